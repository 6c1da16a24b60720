"""``dbc`` command line: compute verbs and the verification runner.

Exit codes: 0 success, 1 a verification check failed, 2 usage or payload
error, 3 mathematical error (point outside the required cell, and so on).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from . import groupoid as gp
from . import leaves as lv
from . import poisson as po
from .factorize import CellPoint, FlagPoint, sample_double_cell
from .numkernel import DEFAULT_TOL, DBCError, Tolerance, matrix_from_json, matrix_to_json
from .rootdata import parse_weyl, torus_subgroup_dim, weyl_representative

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_MATH = 0, 1, 2, 3
VERBS = ("factor", "bracket", "mul", "twist", "leaf", "verify")


class SchemaError(ValueError):
    pass


# ---------------------------------------------------------------------------
# JSON helpers


def cjson(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def flag_json(fp: FlagPoint) -> dict:
    return {"cell": fp.cell.to_json(), "coords": [cjson(z) for z in fp.coords]}


def parse_matrix(obj, n: int | None) -> np.ndarray:
    """Matrix from ``{"n", "re", "im"}`` or a nested list of numbers / ``[re, im]`` pairs."""
    if isinstance(obj, dict):
        m = matrix_from_json(obj)
    elif isinstance(obj, list):
        try:
            rows = [[complex(*x) if isinstance(x, list) else complex(x) for x in r] for r in obj]
            m = np.array(rows, dtype=complex)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"bad matrix entry: {exc}") from None
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise SchemaError("matrix must be square")
    else:
        raise SchemaError("matrix must be an object or a nested list")
    if n is not None and m.shape[0] != n:
        raise SchemaError(f"matrix size {m.shape[0]} does not match --n {n}")
    if m.shape[0] < 2:
        raise SchemaError("matrix size must be at least 2")
    if abs(np.linalg.det(m) - 1) > 1e-8 * max(1.0, float(np.max(np.abs(m)))) ** m.shape[0]:
        raise SchemaError("matrix is not in SL(n): determinant differs from 1")
    return m


def load_payload(text: str | None) -> dict:
    if text is None or text == "-":
        text = sys.stdin.read() if not sys.stdin.isatty() else "{}"
    elif text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read()
    try:
        data = json.loads(text or "{}")
    except json.JSONDecodeError as exc:
        raise SchemaError(f"payload is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaError("payload must be a JSON object")
    return data


def _weyl(n: int, spec):
    try:
        return parse_weyl(n, spec)
    except (ValueError, KeyError, TypeError) as exc:
        raise SchemaError(f"bad Weyl element {spec!r}: {exc}") from None


def point_from(payload: dict, n: int, tol: Tolerance, key: str = "g") -> CellPoint:
    """A cell point from ``{"g": ...}`` or ``{"sample": {"u", "v", "seed"}}``."""
    seeds = tuple(payload.get("rep_seeds", (0, 0)))
    if key in payload:
        g = parse_matrix(payload[key], None)
        return CellPoint.detect(g, tol, seeds)
    if "sample" in payload:
        s = payload["sample"]
        if not isinstance(s, dict):
            raise SchemaError("'sample' must be an object")
        m = int(s.get("n", n))
        u, v = _weyl(m, s.get("u", "w0")), _weyl(m, s.get("v", "w0"))
        return sample_double_cell(u, v, int(s.get("seed", 0)), rep_seeds=seeds, tol=tol)
    raise SchemaError(f"payload needs '{key}' or 'sample'")


# ---------------------------------------------------------------------------
# verbs


def cmd_factor(payload: dict, args) -> dict:
    p = point_from(payload, args.n, args.tol)
    c, b = p.left(args.tol)
    bm, cp = p.right(args.tol)
    scale = max(1.0, float(np.max(np.abs(p.g))))
    return {"input": p.to_json(),
            "left": {"c": matrix_to_json(c), "b": matrix_to_json(b)},
            "right": {"b_minus": matrix_to_json(bm), "c": matrix_to_json(cp)},
            "flag": flag_json(p.flag()), "coflag": flag_json(p.coflag()),
            "residuals": {"left": float(np.max(np.abs(c @ b - p.g))) / scale,
                          "right": float(np.max(np.abs(bm @ cp - p.g))) / scale}}


def _entry_index(spec, n: int) -> tuple[int, int]:
    try:
        i, j = (int(x) for x in spec)
    except (TypeError, ValueError):
        raise SchemaError(f"entry index must be [i, j], got {spec!r}") from None
    if not (1 <= i <= n and 1 <= j <= n):
        raise SchemaError(f"entry index {spec!r} out of range")
    return i - 1, j - 1


def cmd_bracket(payload: dict, args) -> dict:
    if "g" in payload:
        g = parse_matrix(payload["g"], None)
    else:
        g = point_from(payload, args.n, args.tol).g
    n = g.shape[0]
    (a, b), (c, d) = _entry_index(payload.get("f1", [1, 1]), n), _entry_index(payload.get("f2", [1, 2]), n)
    f1, f2 = (lambda x: x[a, b]), (lambda x: x[c, d])
    val = po.bracket_eval(f1, f2, g)
    direct = po.bracket_tensor_direct(f1, f2, g)
    return {"input": {"g": matrix_to_json(g), "f1": [a + 1, b + 1], "f2": [c + 1, d + 1]},
            "bracket": cjson(val), "direct": cjson(direct),
            "residuals": {"routes": abs(val - direct) / max(1.0, abs(val))}}


def cmd_mul(payload: dict, args) -> dict:
    tol = args.tol
    if "g" in payload and "h" in payload:
        g = parse_matrix(payload["g"], None)
        v = _weyl(g.shape[0], payload.get("v")) if "v" in payload else CellPoint.detect(g, tol).v
        rep = weyl_representative(v, int(payload.get("rep_seed", 0)))
        e1 = gp.GroupoidElement.of(g, v, rep)
        e2 = gp.GroupoidElement.of(parse_matrix(payload["h"], g.shape[0]), v, rep)
    elif "sample" in payload:
        s = payload["sample"]
        m = int(s.get("n", args.n))
        v = _weyl(m, s.get("v", "w0"))
        rng = np.random.default_rng(int(s.get("seed", 0)))
        rep = weyl_representative(v, int(payload.get("rep_seed", 0)))
        p = sample_double_cell(v, v, rng, rep_seeds=(rep.seed, rep.seed), tol=tol)
        e1 = gp.GroupoidElement.of(p.g, v, rep)
        e2 = gp.sample_theta_fiber(e1.tau(), rng, tol)
    else:
        raise SchemaError("mul needs 'g' and 'h', or 'sample'")
    for e in (e1, e2):
        if gp.cell_of(e.g, tol) != (e.v, e.v):
            raise DBCError(f"element is not in G^{{{e.v},{e.v}}}")
    prod = gp.gpd_mul(e1, e2, tol)
    return {"input": {"g": matrix_to_json(e1.g), "h": matrix_to_json(e2.g), "v": e1.v.to_json()},
            "product": matrix_to_json(prod.g),
            "theta": flag_json(prod.theta()), "tau": flag_json(prod.tau()),
            "residuals": {"product_forms": gp.gpd_mul_residual(e1, e2),
                          "theta": prod.theta().distance(e1.theta()),
                          "tau": prod.tau().distance(e2.tau())}}


def cmd_twist(payload: dict, args) -> dict:
    p = point_from(payload, args.n, args.tol)
    t = gp.twist(p, args.tol)
    back = gp.twist(t, args.tol)
    scale = max(1.0, float(np.max(np.abs(p.g))))
    return {"input": p.to_json(), "twist": matrix_to_json(t.g),
            "cell": [t.u.to_json(), t.v.to_json()],
            "residuals": {"forms": gp.twist_residual(p),
                          "round_trip": float(np.max(np.abs(back.g - p.g))) / scale}}


def cmd_leaf(payload: dict, args) -> dict:
    p = point_from(payload, args.n, args.tol)
    census = lv.leaf_census(p.u, p.v)
    return {"input": p.to_json(),
            "invariant": lv.leaf_invariant(p).to_json(),
            "leaf_rank": lv.leaf_rank(p, args.tol),
            "expected_rank": lv.expected_leaf_rank(p.u, p.v),
            "torus_subgroup_dim": torus_subgroup_dim(p.u, p.v),
            "fixed_simples": census.fixed,
            "leaves_per_level": census.count_per_level,
            "residuals": {"square_identity": lv.square_identity_defect(p),
                          "casimir_minors": lv.casimir_minor_defect(p),
                          "casimir_chi": lv.casimir_chi_defect(p)}}


def cmd_verify(args) -> tuple[dict, int]:
    from .verify import SUITES, RunConfig, run
    suites = SUITES if "all" in args.suite else tuple(dict.fromkeys(args.suite))
    cfg = RunConfig(n=args.n, seed=args.seed, samples=args.samples, tol=args.tol, suites=suites)
    report = run(cfg)
    return report, EXIT_OK if report["pass"] else EXIT_FAIL


COMPUTE = {"factor": cmd_factor, "bracket": cmd_bracket, "mul": cmd_mul,
           "twist": cmd_twist, "leaf": cmd_leaf}


# ---------------------------------------------------------------------------
# entry point


def default_tol() -> Tolerance:
    env = os.environ.get("DBC_TOL")
    if not env:
        return DEFAULT_TOL
    try:
        return Tolerance(tol_eq=float(env))
    except ValueError:
        raise SchemaError(f"DBC_TOL must be a positive number, got {env!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dbc", description="Double Bruhat cells of SL(n, C): "
                                 "factorization, Poisson brackets, groupoids and leaves.")
    ap.add_argument("--version", action="version", version=f"dbc {__version__}")
    ap.add_argument("verb", choices=VERBS)
    ap.add_argument("--n", type=int, default=3, help="matrix size for sampled points (2..6)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samples", type=int, default=25, help="samples per check (verify)")
    ap.add_argument("--tol", type=float, default=None, help="equality tolerance (default 1e-9)")
    ap.add_argument("--suite", action="append", default=None,
                    choices=("factorize", "poisson", "groupoid", "leaves", "golden", "all"),
                    help="suite to run; repeatable (default: all)")
    ap.add_argument("--out", default=None, help="write JSON here instead of stdout")
    ap.add_argument("--payload", default=None,
                    help="JSON payload, @file, or - for stdin (compute verbs)")
    return ap


def emit(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=False)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def error_json(kind: str, exc: Exception) -> dict:
    return {"error": {"type": kind, "class": type(exc).__name__, "message": str(exc)}}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.tol = Tolerance(tol_eq=args.tol) if args.tol is not None else default_tol()
        if not 2 <= args.n <= 6:
            raise SchemaError("--n must lie in 2..6")
        if args.samples < 1:
            raise SchemaError("--samples must be at least 1")
        args.suite = args.suite or ["all"]
        if args.verb == "verify":
            report, code = cmd_verify(args)
            emit(report, args.out)
            return code
        result = COMPUTE[args.verb](load_payload(args.payload), args)
        emit({"verb": args.verb, **result}, args.out)
        return EXIT_OK
    except DBCError as exc:
        emit(error_json("math", exc), None)
        return EXIT_MATH
    except (SchemaError, ValueError, KeyError, TypeError, OSError) as exc:
        emit(error_json("usage", exc), None)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
