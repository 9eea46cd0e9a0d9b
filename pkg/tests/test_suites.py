import json

import pytest

from qw1 import suites
from qw1.suites import PropertyResult, run_suite


@pytest.mark.parametrize("name", ["additivity", "superadditivity", "duality"])
def test_suites_pass(name):
    results = run_suite(name, seed=3)
    assert results and all(isinstance(r, PropertyResult) for r in results)
    for r in results:
        assert r.passed, r.failures
        assert r.seed == 3 and r.instances > 0


def test_additivity_rejects_three_blocks():
    with pytest.raises(ValueError):
        run_suite("additivity", partition=[[0], [1], [2]])
    with pytest.raises(ValueError):
        run_suite("nonsense")


def test_failure_dump_is_reproducible_json():
    tr = suites._Tracker("demo", "always fails", 0.0, seed=11)
    tr.record(0.5, 4, note="x")
    r = tr.result()
    assert not r.passed and r.observed == 0.5
    dumped = json.loads(json.dumps(r.failures))
    assert dumped[0]["index"] == 4
