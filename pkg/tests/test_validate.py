import json

import pytest

from bogospec.errors import ValidationError
from bogospec.validate import CHECKS, PROVENANCE, Expect, Fixture, default_fixtures, register, report_json, run_suite


def test_every_expectation_has_provenance():
    fx = default_fixtures()
    assert len({f.name for f in fx}) == len(fx)
    for f in fx:
        assert f.check in CHECKS
        for e in f.expect:
            assert e.provenance in PROVENANCE


def test_named_fixtures_present():
    names = {f.name for f in default_fixtures()}
    assert {"square-barrier-a0", "free-case-zeros", "fock-vs-bogo-2mode"} <= names


def test_named_fixtures_pass():
    rep = run_suite(only=["square-barrier-a0", "free-case-zeros", "fock-vs-bogo-2mode"])
    assert rep.passed, rep.table()
    free = [e for e in rep.entries if e.fixture == "free-case-zeros" and e.check.startswith("ebog")]
    assert all(e.measured == 0.0 for e in free)


def test_failures_are_entries_not_exceptions():
    @register("_always_raises")
    def _boom(p):
        raise RuntimeError("boom")

    @register("_constant")
    def _const(p):
        return {"x": 1.0}

    fx = [
        Fixture("b-raises", "_always_raises", (Expect("x", 0.0, 1.0),)),
        Fixture("a-wrong", "_constant", (Expect("x", 2.0, 0.5), Expect("y", 0.0, 1.0))),
        Fixture("c-right", "_constant", (Expect("x", 1.0, 0.0, "rel", "oracle"),)),
    ]
    try:
        rep = run_suite(fx, workers=2)
    finally:
        CHECKS.pop("_always_raises")
        CHECKS.pop("_constant")
    assert [e.fixture for e in rep.entries] == ["a-wrong", "a-wrong", "b-raises", "c-right"]
    assert [e.passed for e in rep.entries] == [False, False, False, True]
    assert "boom" in rep.entries[2].error
    assert rep.entries[1].error == "not measured"
    d = json.loads(report_json(rep))
    assert d["n_failed"] == 3
    assert "3/4" not in rep.table() and "1/4 checks passed" in rep.table()


def test_expect_validation():
    with pytest.raises(ValidationError):
        Expect("x", 0.0, provenance="folklore")
    with pytest.raises(ValidationError):
        Expect("x", 0.0, mode="approx")
    with pytest.raises(ValidationError):
        run_suite([Fixture("z", "no-such-check", ())])


def test_full_suite_passes():
    rep = run_suite(workers=2)
    assert rep.passed, "\n".join(f"{e.fixture}/{e.check}: {e.measured} {e.error}" for e in rep.failures)
