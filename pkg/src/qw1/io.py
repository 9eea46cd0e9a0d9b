"""JSON channel documents and run configuration.

A channel document is one JSON object::

    {
      "in_dims": [2, 2],
      "out_dims": [2, 2],
      "sites": [1, 2],                     # optional, 1-based labels
      "ref_states": [[[..]], [[..]]],      # optional, one matrix per output factor
      "representation": "kraus",           # kraus | delta | choi_state | difference
      "matrices": [ [[ [re, im], ... ], ...], ... ]
    }

Complex entries are ``[re, im]`` pairs. ``kraus`` takes one matrix per
operator (shape ``q x r``); the other representations take exactly one
matrix. ``difference`` holds a Hermitian element of the difference space
and is what ``qw1 norm`` reads. Floats are written with ``repr`` precision,
so a write/read cycle is exact.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any

import numpy as np

from .channels import (
    Channel,
    CompositeSystem,
    channel_from_kraus,
    choi_state_from_channel,
    delta_from_choi_state,
    kraus_from_channel,
)
from .gauge import HermitianDifference

REPRESENTATIONS = ("kraus", "delta", "choi_state", "difference")
CONFIG_ENV = "QW1_CONFIG"


class DocumentError(ValueError):
    """A document that does not parse or does not describe what it claims."""


def encode_matrix(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data: Any, where: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"{where}: entries must be numeric [re, im] pairs ({exc})") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise DocumentError(f"{where}: expected rows of [re, im] pairs, got array of shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DocumentError(f"{where}: non-finite entry")
    return arr[..., 0] + 1j * arr[..., 1]


def _dims(doc: dict, key: str) -> tuple[int, ...]:
    if key not in doc:
        raise DocumentError(f"missing field '{key}'")
    val = doc[key]
    if not isinstance(val, list) or not val or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in val):
        raise DocumentError(f"field '{key}' must be a non-empty list of positive integers")
    return tuple(val)


def system_from_document(doc: dict) -> CompositeSystem:
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    in_dims, out_dims = _dims(doc, "in_dims"), _dims(doc, "out_dims")
    if len(in_dims) != len(out_dims):
        raise DocumentError(f"in_dims has {len(in_dims)} factors but out_dims has {len(out_dims)}")
    refs = None
    if doc.get("ref_states") is not None:
        raw = doc["ref_states"]
        if not isinstance(raw, list) or len(raw) != len(out_dims):
            raise DocumentError(f"field 'ref_states' must list {len(out_dims)} matrices")
        refs = tuple(decode_matrix(m, f"ref_states[{i}]") for i, m in enumerate(raw))
    sites = None
    if doc.get("sites") is not None:
        raw = doc["sites"]
        if not isinstance(raw, list) or len(raw) != len(in_dims) or not all(isinstance(s, int) and s >= 1 for s in raw):
            raise DocumentError(f"field 'sites' must list {len(in_dims)} positive integers")
        sites = tuple(s - 1 for s in raw)
    try:
        return CompositeSystem(in_dims=in_dims, out_dims=out_dims, ref_states=refs, sites=sites)
    except ValueError as exc:
        raise DocumentError(str(exc)) from None


def _header(system: CompositeSystem, representation: str) -> dict:
    doc: dict[str, Any] = {"in_dims": list(system.in_dims), "out_dims": list(system.out_dims)}
    if tuple(system.sites) != tuple(range(system.n)):
        doc["sites"] = [s + 1 for s in system.sites]
    doc["ref_states"] = [encode_matrix(nu) for nu in system.ref_states]
    doc["representation"] = representation
    return doc


def channel_to_document(ch: Channel, representation: str = "delta") -> dict:
    doc = _header(ch.system, representation)
    if representation == "delta":
        doc["matrices"] = [encode_matrix(ch.delta)]
    elif representation == "choi_state":
        doc["matrices"] = [encode_matrix(choi_state_from_channel(ch))]
    elif representation == "kraus":
        doc["matrices"] = [encode_matrix(k) for k in kraus_from_channel(ch)]
    else:
        raise ValueError(f"unknown representation {representation!r}")
    return doc


def difference_to_document(x: HermitianDifference) -> dict:
    doc = _header(x.system, "difference")
    doc["matrices"] = [encode_matrix(x.x)]
    return doc


def _matrices(doc: dict) -> list[np.ndarray]:
    raw = doc.get("matrices")
    if not isinstance(raw, list) or not raw:
        raise DocumentError("field 'matrices' must be a non-empty list")
    return [decode_matrix(m, f"matrices[{i}]") for i, m in enumerate(raw)]


def _representation(doc: dict) -> str:
    rep = doc.get("representation")
    if rep not in REPRESENTATIONS:
        raise DocumentError(f"field 'representation' must be one of {', '.join(REPRESENTATIONS)}; got {rep!r}")
    return rep


def channel_from_document(doc: dict, tol: float = 1e-9) -> Channel:
    """Parse a channel. Shape problems raise DocumentError; validity is checked separately."""
    system = system_from_document(doc)
    rep = _representation(doc)
    if rep == "difference":
        raise DocumentError("a 'difference' document does not describe a channel")
    mats = _matrices(doc)
    side = system.side
    try:
        if rep == "kraus":
            for i, k in enumerate(mats):
                if k.shape != (system.q, system.r):
                    raise DocumentError(f"matrices[{i}]: Kraus operator of shape {k.shape}, expected ({system.q}, {system.r})")
            return channel_from_kraus(system, mats, tol=tol)
        if len(mats) != 1:
            raise DocumentError(f"representation '{rep}' takes exactly one matrix, got {len(mats)}")
        m = mats[0]
        if m.shape != (side, side):
            raise DocumentError(f"matrices[0]: shape {m.shape}, expected ({side}, {side})")
        if rep == "choi_state":
            m = delta_from_choi_state(m, system)
        return Channel(system, m)
    except DocumentError:
        raise
    except ValueError as exc:
        raise DocumentError(str(exc)) from None


def difference_from_document(doc: dict) -> HermitianDifference:
    system = system_from_document(doc)
    if _representation(doc) != "difference":
        raise DocumentError("expected representation 'difference'")
    mats = _matrices(doc)
    if len(mats) != 1 or mats[0].shape != (system.side, system.side):
        raise DocumentError(f"a difference document holds one ({system.side}, {system.side}) matrix")
    try:
        return HermitianDifference(system, mats[0])
    except ValueError as exc:
        raise DocumentError(str(exc)) from None


def load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise DocumentError(f"{path}: {exc.strerror}") from None


def dump_json(doc: dict, path: str | None = None) -> str:
    text = json.dumps(doc)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def decomposition_to_json(decomposition, value: float) -> dict:
    return {
        "value": value,
        "terms": [
            {"site": int(site) + 1, "t": float(t), "Y": encode_matrix(y), "Z": encode_matrix(z)}
            for site, y, z, t in decomposition
        ],
    }


# --- run configuration ---------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    tol: float = 1e-8
    max_iter: int = 200
    seed: int = 0
    verbosity: int = 0
    output: str = "human"  # human | json

    def __post_init__(self):
        if not (isinstance(self.tol, (int, float)) and self.tol > 0):
            raise ValueError(f"tol must be positive, got {self.tol!r}")
        if not (isinstance(self.max_iter, int) and self.max_iter >= 1):
            raise ValueError(f"max_iter must be an integer >= 1, got {self.max_iter!r}")
        if self.output not in ("human", "json"):
            raise ValueError(f"output must be 'human' or 'json', got {self.output!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {', '.join(sorted(extra))}")
        return cls(**data)

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(env: dict | None = None) -> RunConfig:
    """Config from the file named by QW1_CONFIG, or defaults."""
    env = os.environ if env is None else env
    path = env.get(CONFIG_ENV)
    if not path:
        return RunConfig()
    data = load_json(path)
    if not isinstance(data, dict):
        raise DocumentError(f"{path}: config must be a JSON object")
    try:
        return RunConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"{path}: {exc}") from None
