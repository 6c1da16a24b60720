import json

import pytest

from dbc import verify as V
from dbc.numkernel import DBCError


def test_registry_covers_every_suite():
    suites = {c.suite for c in V.REGISTRY}
    assert suites == set(V.SUITES)
    ids = [c.id for c in V.REGISTRY]
    assert len(ids) == len(set(ids))
    assert all(c.anchor for c in V.REGISTRY)


def test_run_config_validation():
    with pytest.raises(ValueError):
        V.RunConfig(samples=0)
    with pytest.raises(ValueError):
        V.RunConfig(n=1)
    with pytest.raises(ValueError):
        V.RunConfig(suites=("nonsense",))


def test_report_shape_and_determinism():
    cfg = V.RunConfig(n=2, seed=11, samples=3, suites=("factorize", "golden"))
    a, b = V.run(cfg), V.run(cfg)
    assert a["schema"] == "dbc-report/1" and a["pass"]
    for r in (a, b):
        r.pop("timestamp")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    keys = [(c["check"], c["u"] or [], c["v"] or []) for c in a["checks"]]
    assert keys == sorted(keys)
    assert a["summary"]["checks"] == len(a["checks"]) == a["summary"]["passed"]


def test_check_rng_is_independent_of_suite_selection():
    cfg1 = V.RunConfig(n=2, seed=5, samples=2, suites=("poisson",))
    cfg2 = V.RunConfig(n=2, seed=5, samples=2, suites=("poisson", "factorize"))
    r1 = {(c["check"], str(c["u"]), str(c["v"])): c["max_dev"] for c in V.run(cfg1)["checks"]}
    r2 = {(c["check"], str(c["u"]), str(c["v"])): c["max_dev"] for c in V.run(cfg2)["checks"]}
    assert all(r2[k] == v for k, v in r1.items())


def test_exceptions_become_failed_entries():
    def boom(ctx):
        raise DBCError("synthetic failure")

    c = V.Check("factorize", "synthetic", "a failing check", 1.0, boom)
    (res,) = V.run_check(c, V.RunConfig(n=2, samples=1))
    assert not res.passed and "synthetic failure" in res.note


def test_exact_checks_have_zero_tolerance():
    cfg = V.RunConfig(n=2, samples=1)
    c = next(c for c in V.REGISTRY if c.id == "leaves/count-cross-check")
    assert all(r.tol == 0.0 and r.passed for r in V.run_check(c, cfg))


def test_pairs_at_rank_four_are_sampled():
    ctx = V.Ctx(V.RunConfig(n=4, seed=1), V.check_seed(1, "x"))
    pairs = ctx.pairs()
    assert len(pairs) == 10 and len(set(pairs)) == 10
    assert ctx.pairs() == pairs
