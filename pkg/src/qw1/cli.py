"""Command-line front end: ``qw1 {dist,norm,reduce,validate,random,verify}``.

Exit codes:
    0  success (optimal solve, valid channel, all properties pass)
    1  invalid channel, or a verified property failed
    2  usage or document parse error
    3  dimension mismatch, bad subset or bad partition
    4  solver did not reach optimality

Sites on the command line are 1-based: ``--subset 1,3``, ``--partition "1,3;2"``.
Settings come from defaults, then the JSON file named by QW1_CONFIG, then flags.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from typing import Sequence

from . import io as qio
from .channels import (
    CompositeSystem,
    check_partition,
    is_valid,
    random_channel,
    reduce_to_subset,
)
from .gauge import OPTIMAL, HermitianDifference, SolverOptions, reduction_lower_bound, w1_norm
from .suites import SUITES, run_suite

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_DIMS, EXIT_SOLVER = 0, 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def parse_sites(text: str) -> list[int]:
    try:
        sites = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise CliError(EXIT_DIMS, f"bad site list {text!r}: expected comma-separated integers") from None
    if not sites or any(s < 1 for s in sites):
        raise CliError(EXIT_DIMS, f"bad site list {text!r}: sites are 1-based and non-empty")
    return [s - 1 for s in sites]


def parse_partition(text: str) -> list[list[int]]:
    return [parse_sites(block) for block in text.split(";")]


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise CliError(EXIT_PARSE, f"bad dimension list {text!r}") from None
    if not dims or any(d < 1 for d in dims):
        raise CliError(EXIT_PARSE, f"bad dimension list {text!r}")
    return dims


def _config(args) -> qio.RunConfig:
    try:
        cfg = qio.load_config()
        return cfg.with_overrides(
            tol=args.tol, max_iter=args.max_iter, seed=args.seed,
            output="json" if args.json else None,
            verbosity=args.verbose or None,
        )
    except (qio.DocumentError, ValueError) as exc:
        raise CliError(EXIT_PARSE, f"config: {exc}") from None


def _opts(cfg: qio.RunConfig) -> SolverOptions:
    return SolverOptions(tol=cfg.tol, max_iter=cfg.max_iter, verbose=cfg.verbosity > 1)


def _load_channel(path: str):
    try:
        return qio.channel_from_document(qio.load_json(path))
    except qio.DocumentError as exc:
        msg = str(exc)
        raise CliError(EXIT_PARSE, msg if msg.startswith(path) else f"{path}: {msg}") from None


def _emit(cfg: qio.RunConfig, record: dict, human: str) -> None:
    if cfg.output == "json":
        print(json.dumps(record))
    else:
        print(human)


def _result_record(res, cfg, start, **extra) -> dict:
    rec = {
        "value": res.value,
        "gap": res.duality_gap,
        "status": res.status,
        "seed": cfg.seed,
        "elapsed_ms": round(1000 * (time.perf_counter() - start), 3),
    }
    rec.update(extra)
    return rec


def _report_solve(res, cfg, start, args, extra_human="", **extra) -> int:
    rec = _result_record(res, cfg, start, **extra)
    human = f"W1 = {res.value:.12g}  (gap {res.duality_gap:.2e}, status {res.status}, {res.iterations} iterations)"
    _emit(cfg, rec, human + extra_human)
    if getattr(args, "dump_decomposition", None):
        qio.dump_json(qio.decomposition_to_json(res.decomposition, res.value), args.dump_decomposition)
    return EXIT_OK if res.status == OPTIMAL else EXIT_SOLVER


def cmd_dist(args) -> int:
    cfg = _config(args)
    start = time.perf_counter()
    a, b = _load_channel(args.file_a), _load_channel(args.file_b)
    if not a.system.same_as(b.system):
        raise CliError(EXIT_DIMS, f"system mismatch: {args.file_a} has {_describe(a.system)}, "
                                  f"{args.file_b} has {_describe(b.system)}")
    for path, ch in ((args.file_a, a), (args.file_b, b)):
        rep = is_valid(ch)
        if not rep:
            raise CliError(EXIT_INVALID, f"{path}: not a channel (min eigenvalue {rep.min_eigenvalue:.3g}, "
                                         f"unitality residual {rep.unitality_residual:.3g})")
    x = HermitianDifference.between(a, b)
    res = w1_norm(x, _opts(cfg))
    extra, extra_human = {}, ""
    if args.partition:
        try:
            parts = check_partition(parse_partition(args.partition), a.system.sites)
        except ValueError as exc:
            raise CliError(EXIT_DIMS, str(exc)) from None
        lb = reduction_lower_bound(a, b, parts, _opts(cfg))
        extra["reduction_lower_bound"] = lb
        extra_human = f"\nreduction lower bound over {args.partition}: {lb:.12g}"
    return _report_solve(res, cfg, start, args, extra_human, **extra)


def cmd_norm(args) -> int:
    cfg = _config(args)
    start = time.perf_counter()
    try:
        x = qio.difference_from_document(qio.load_json(args.file))
    except qio.DocumentError as exc:
        raise CliError(EXIT_PARSE, f"{args.file}: {exc}") from None
    return _report_solve(w1_norm(x, _opts(cfg)), cfg, start, args)


def cmd_reduce(args) -> int:
    ch = _load_channel(args.file)
    keep = parse_sites(args.subset)
    if not set(keep) <= set(ch.system.sites):
        raise CliError(EXIT_DIMS, f"subset {args.subset} is not within sites "
                                  f"{','.join(str(s + 1) for s in ch.system.sites)}")
    out = reduce_to_subset(ch, keep)
    text = qio.dump_json(qio.channel_to_document(out, args.representation), args.output)
    if args.output is None:
        print(text)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _config(args)
    ch = _load_channel(args.file)
    rep = is_valid(ch)
    rec = {"valid": rep.valid, "min_eigenvalue": rep.min_eigenvalue,
           "trace_residual": rep.trace_residual, "unitality_residual": rep.unitality_residual}
    human = (f"{'valid' if rep.valid else 'INVALID'} channel: min eigenvalue {rep.min_eigenvalue:.3e}, "
             f"partial-trace residual {rep.trace_residual:.3e}, unitality residual {rep.unitality_residual:.3e}")
    _emit(cfg, rec, human)
    return EXIT_OK if rep.valid else EXIT_INVALID


def cmd_random(args) -> int:
    cfg = _config(args)
    in_dims = _dims(args.dims)
    out_dims = _dims(args.out_dims) if args.out_dims else in_dims
    if len(in_dims) != len(out_dims):
        raise CliError(EXIT_DIMS, "--dims and --out-dims need the same number of factors")
    system = CompositeSystem(in_dims=in_dims, out_dims=out_dims)
    try:
        ch = random_channel(system, args.rank, cfg.seed)
    except ValueError as exc:
        raise CliError(EXIT_DIMS, str(exc)) from None
    text = qio.dump_json(qio.channel_to_document(ch, args.representation), args.output)
    if args.output is None:
        print(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _config(args)
    partition = parse_partition(args.partition) if args.partition else None
    try:
        results = run_suite(args.suite, seed=cfg.seed, opts=_opts(cfg), partition=partition)
    except ValueError as exc:
        raise CliError(EXIT_DIMS, str(exc)) from None
    ok = True
    for r in results:
        ok &= r.passed
        rec = {"value": r.observed, "gap": None, "status": "pass" if r.passed else "fail",
               "seed": r.seed, "elapsed_ms": None, "suite": r.suite, "property": r.name,
               "tolerance": r.tolerance, "instances": r.instances}
        if not r.passed:
            rec["failures"] = r.failures
        human = (f"[{'PASS' if r.passed else 'FAIL'}] {r.suite}: {r.name}  worst {r.observed:.3e} "
                 f"(tol {r.tolerance:g}, {r.instances} checks, seed {r.seed})")
        if not r.passed and cfg.output != "json":
            human += "\n" + json.dumps(r.failures, indent=1)
        _emit(cfg, rec, human)
    return EXIT_OK if ok else EXIT_INVALID


def _describe(s: CompositeSystem) -> str:
    return f"in_dims {list(s.in_dims)}, out_dims {list(s.out_dims)}"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(EXIT_PARSE, message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="solver tolerance (default 1e-8)")
    common.add_argument("--max-iter", type=int, default=None, help="solver iteration cap (default 200)")
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument("--json", action="store_true", help="json-lines output")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = _Parser(prog="qw1", description="Quantum W1 distance between channels on composite systems.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("dist", parents=[common], help="W1 distance between two channel documents")
    d.add_argument("file_a")
    d.add_argument("file_b")
    d.add_argument("--dump-decomposition", metavar="PATH")
    d.add_argument("--partition", help='also report the reduction lower bound, e.g. "1,3;2"')
    d.set_defaults(func=cmd_dist)

    n = sub.add_parser("norm", parents=[common], help="W1 norm of a difference document")
    n.add_argument("file")
    n.add_argument("--dump-decomposition", metavar="PATH")
    n.set_defaults(func=cmd_norm)

    r = sub.add_parser("reduce", parents=[common], help="reduce a channel to a subset of sites")
    r.add_argument("file")
    r.add_argument("--subset", required=True, help="1-based sites to keep, e.g. 1,3")
    r.add_argument("--representation", choices=("delta", "kraus", "choi_state"), default="delta")
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("validate", parents=[common], help="check that a document is a channel")
    v.add_argument("file")
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("random", parents=[common], help="seeded random channel document")
    g.add_argument("--dims", required=True, help="input factor dims, e.g. 2,2")
    g.add_argument("--out-dims", help="output factor dims (default: same as --dims)")
    g.add_argument("--rank", type=int, default=2)
    g.add_argument("--representation", choices=("delta", "kraus", "choi_state"), default="kraus")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_random)

    f = sub.add_parser("verify", parents=[common], help="run a seeded property suite")
    f.add_argument("suite", choices=SUITES)
    f.add_argument("--partition", help='partition for additivity/superadditivity, e.g. "1,3;2"')
    f.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.verbose:
            logging.basicConfig(level=logging.INFO if args.verbose > 1 else logging.WARNING,
                                format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except CliError as exc:
        print(f"qw1: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
