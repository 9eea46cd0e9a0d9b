import json

import numpy as np
import pytest

from qw1 import io as qio
from qw1.channels import CompositeSystem, random_channel
from qw1.gauge import HermitianDifference


@pytest.mark.parametrize("rep", ["delta", "kraus", "choi_state"])
def test_document_round_trip(rep):
    s = CompositeSystem(in_dims=(2, 3), out_dims=(2, 1))
    ch = random_channel(s, 2, 0)
    doc = json.loads(qio.dump_json(qio.channel_to_document(ch, rep)))
    back = qio.channel_from_document(doc)
    assert back.system.same_as(s)
    tol = 0 if rep == "delta" else 1e-10
    assert np.max(np.abs(back.delta - ch.delta)) <= tol


def test_sites_and_reference_states_survive():
    nu = np.diag([0.3, 0.7]).astype(complex)
    s = CompositeSystem(in_dims=(2,), out_dims=(2,), ref_states=(nu,), sites=(2,))
    doc = qio.channel_to_document(random_channel(s, 2, 1))
    assert doc["sites"] == [3]
    back = qio.channel_from_document(json.loads(json.dumps(doc)))
    assert back.system.sites == (2,)
    assert np.array_equal(back.system.ref_states[0], nu)


def test_difference_round_trip():
    s = CompositeSystem(in_dims=(2,), out_dims=(2,))
    x = HermitianDifference.between(random_channel(s, 2, 0), random_channel(s, 2, 1))
    back = qio.difference_from_document(json.loads(qio.dump_json(qio.difference_to_document(x))))
    assert np.array_equal(back.x, x.x)
    with pytest.raises(qio.DocumentError):
        qio.channel_from_document(qio.difference_to_document(x))


@pytest.mark.parametrize("mutate, fragment", [
    (lambda d: d.pop("in_dims"), "in_dims"),
    (lambda d: d.update(representation="lindblad"), "representation"),
    (lambda d: d.update(matrices=[]), "matrices"),
    (lambda d: d.update(matrices=[[[1, 0]]]), "shape"),
    (lambda d: d.update(matrices=[[["a", 0]]]), "matrices[0]"),
])
def test_malformed_documents(mutate, fragment):
    s = CompositeSystem(in_dims=(2,), out_dims=(2,))
    doc = qio.channel_to_document(random_channel(s, 2, 0))
    mutate(doc)
    with pytest.raises(qio.DocumentError, match=fragment.replace("[", r"\[").replace("]", r"\]")):
        qio.channel_from_document(doc)


def test_parse_error_names_line_and_column(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "in_dims": [2,\n}')
    with pytest.raises(qio.DocumentError, match="line 3"):
        qio.load_json(str(p))


def test_config_layers(tmp_path):
    assert qio.load_config({}) == qio.RunConfig()
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"tol": 1e-6, "seed": 4}))
    cfg = qio.load_config({"QW1_CONFIG": str(p)})
    assert cfg.tol == 1e-6 and cfg.seed == 4 and cfg.max_iter == 200
    assert cfg.with_overrides(seed=9, tol=None).to_dict()["seed"] == 9
    p.write_text(json.dumps({"tolerance": 1}))
    with pytest.raises(qio.DocumentError, match="unknown"):
        qio.load_config({"QW1_CONFIG": str(p)})
    with pytest.raises(ValueError):
        qio.RunConfig(output="xml")
