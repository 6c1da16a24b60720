"""Acceptance criteria 1-8.

Each test prints one ``criterion k: PASS|FAIL`` line (also collected into the
terminal summary).  Run standalone with ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import json
import subprocess
import sys
import time

import pytest

from dbc import verify as V

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run
    ACCEPTANCE_LINES = []


def by_id(name: str) -> V.Check:
    return next(c for c in V.REGISTRY if c.id == name)


def run_checks(names, n: int, samples: int, seed: int = 42):
    cfg = V.RunConfig(n=n, seed=seed, samples=samples)
    out = []
    for name in names:
        out.extend(V.run_check(by_id(name), cfg))
    return out


def summarize(results, limit: float) -> tuple[bool, str]:
    bad = [r for r in results if not r.passed or r.tol > limit or r.max_dev > limit]
    worst = max((r.max_dev for r in results), default=0.0)
    detail = f"{len(results)} entries, max dev {worst:.2e} (limit {limit:g})"
    if bad:
        r = bad[0]
        detail += f"; first failure {r.check} u={r.u} v={r.v} dev={r.max_dev:.2e} {r.note}"
    return not bad, detail


def report(k: int, ok: bool, detail: str) -> None:
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


# ---------------------------------------------------------------------------


def criterion_1():
    t = time.perf_counter()
    res = run_checks(["golden/sl2-entry-brackets"], 2, 20)
    dt = time.perf_counter() - t
    ok, detail = summarize(res, 1e-9)
    assert all(r.samples >= 20 for r in res)
    return ok and dt < 1.0, f"SL(2) six brackets at 20 points, {detail}, {dt:.2f} s"


def criterion_2():
    res = run_checks(["golden/sl2-groupoid-table", "golden/sl2-leaf"], 2, 20)
    ok, detail = summarize(res, 1e-9)
    return ok and all(r.samples >= 20 for r in res), f"SL(2) groupoid tables and leaf groupoid, {detail}"


def criterion_3():
    res = run_checks(["golden/sl3-flag-bracket", "golden/sl3-leaf-groupoid"], 3, 20)
    ok, detail = summarize(res, 1e-8)
    return ok and all(r.samples >= 20 for r in res), f"SL(3) bracket and six-variable groupoid, {detail}"


MAP_CHECKS = ["poisson/map-I_v", "poisson/map-q_v", "poisson/map-Phi_v", "poisson/map-twist",
              "poisson/map-theta", "poisson/map-tau", "poisson/map-inverse", "poisson/map-varpi-uv"]


def criterion_4():
    res = run_checks(MAP_CHECKS, 2, 20)
    t = time.perf_counter()
    res += run_checks(MAP_CHECKS, 3, 20)
    dt = time.perf_counter() - t
    ok, detail = summarize(res, 1e-8)
    return ok and dt < 30.0, f"Poisson-map suite n=2,3 at 20 samples, {detail}, n=3 in {dt:.1f} s"


AXIOMS = ["groupoid/associativity", "groupoid/identities", "groupoid/inverses",
          "groupoid/action-groupoid-axioms", "groupoid/actions"]


def criterion_5():
    res = run_checks(AXIOMS, 2, 50) + run_checks(AXIOMS, 3, 50)
    ok, detail = summarize(res, 1e-9)
    ok = ok and all(r.samples >= 50 for r in res)
    t = time.perf_counter()
    smoke = V.run(V.RunConfig(n=4, seed=42, samples=5, suites=("groupoid",)))
    dt = time.perf_counter() - t
    ok = ok and smoke["pass"] and dt < 120.0
    return ok, (f"axioms at 50 triples n=2,3, {detail}; n=4 smoke "
                f"{smoke['summary']['passed']}/{smoke['summary']['checks']} in {dt:.1f} s")


LEAF_CHECKS = ["leaves/casimirs", "leaves/square-identity", "leaves/sigma-groupoid",
               "leaves/action-invariance", "leaves/count-cross-check", "leaves/leaf-rank"]


def criterion_6():
    res = []
    for n in (2, 3, 4):
        res += run_checks(LEAF_CHECKS, n, 10)
    ok, detail = summarize(res, 1e-8)
    n4 = {(tuple(r.u), tuple(r.v)) for r in res if r.n == 4 and r.u}
    ok = ok and len(n4) == 10 and len({(tuple(r.u), tuple(r.v)) for r in res
                                       if r.n == 3 and r.check == "leaves/casimirs"}) == 36
    return ok, f"leaf suite, all pairs n<=3 and 10 pairs n=4, {detail}"


STRUCT = {"poisson/multiplicativity": 1e-9, "poisson/jacobi-coordinates": 1e-7,
          "poisson/ad-invariance": 1e-10, "poisson/coisotropy-C_v": 1e-9,
          "poisson/weak-pair": 1e-8, "poisson/dressing-membership": 1e-9}


def criterion_7():
    oks, worst = [], 0.0
    for name, limit in STRUCT.items():
        res = run_checks([name], 2, 25) + run_checks([name], 3, 25)
        ok, _ = summarize(res, limit)
        oks.append(ok)
        worst = max(worst, *(r.max_dev for r in res))
    pairs = [r.samples for r in run_checks(["poisson/multiplicativity"], 3, 25)]
    return all(oks) and min(pairs) >= 100, f"structural suite, {sum(oks)}/{len(oks)} checks, max dev {worst:.2e}"


def criterion_8():
    cmd = [sys.executable, "-m", "dbc.cli", "verify", "--suite", "all", "--n", "3", "--seed", "42"]
    runs = []
    t = time.perf_counter()
    for _ in range(2):
        p = subprocess.run(cmd, capture_output=True, text=True)
        rep = json.loads(p.stdout)
        rep.pop("timestamp")
        runs.append((p.returncode, json.dumps(rep, sort_keys=True)))
    dt = time.perf_counter() - t
    same = runs[0][1] == runs[1][1]
    return same and runs[0][0] == 0, (f"two runs identical modulo timestamp: {same}, "
                                      f"exit codes {runs[0][0]}/{runs[1][0]}, {dt:.0f} s")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8]


@pytest.mark.parametrize("k", range(1, 9))
def test_acceptance(k):
    ok, detail = CRITERIA[k - 1]()
    report(k, ok, detail)


if __name__ == "__main__":
    failed = 0
    for k, fn in enumerate(CRITERIA, 1):
        try:
            ok, detail = fn()
        except Exception as exc:  # report and keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        print(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}", flush=True)
        failed += not ok
    sys.exit(1 if failed else 0)
