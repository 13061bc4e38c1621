"""Command-line driver: orbits, verification suites, rank reports, file conversions.

Usage::

    pentagram-lab <orbit|verify|rank|reconstruct|pentagram|random|invariants> [options]

Polygons, corner vectors and reports are JSON; rationals are "p/q" strings.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analysis, closure, corners, invariants, poisson, polygon
from .geom import Point, projectively_equal
from .numerics import format_scalar, make_rng, parse_scalar, random_rational

SUITES = ("bracket", "commute", "casimir", "identities", "tangency", "roundtrip")


# ---------------------------------------------------------------------------
# file formats


def polygon_to_json(p: polygon.ClosedPolygon, field: str) -> dict:
    return {
        "n": p.n,
        "field": field,
        "vertices": [[format_scalar(c) for c in v] for v in p.vertices],
    }


def polygon_from_json(d: dict) -> polygon.ClosedPolygon:
    field = d.get("field", "rational")
    verts = [Point(*(parse_scalar(c, field) for c in v)) for v in d["vertices"]]
    if "n" in d and d["n"] != len(verts):
        raise ValueError("vertex count does not match n")
    return polygon.ClosedPolygon(tuple(verts))


def corners_to_json(v) -> dict:
    x = corners.coords(v)
    return {"n": len(x) // 2, "x": [format_scalar(c) for c in x]}


def corners_from_json(d: dict, field: str = "rational") -> corners.CornerVector:
    x = tuple(parse_scalar(c, field) for c in d["x"])
    if "n" in d and 2 * d["n"] != len(x):
        raise ValueError("corner vector length does not match n")
    return corners.CornerVector(x)


def _load(path: str | None) -> dict:
    if path is None or path == "-":
        return json.load(sys.stdin)
    return json.loads(Path(path).read_text())


def _emit(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2)
    if path is None or path == "-":
        print(text)
    else:
        Path(path).write_text(text + "\n")


def _input_polygon(args) -> polygon.ClosedPolygon:
    if args.input:
        return polygon_from_json(_load(args.input))
    return polygon.random_convex_polygon(args.n, args.seed, field=args.field)


def _input_corners(args) -> corners.CornerVector:
    """Corner vector from --input (corner or polygon JSON) or a random convex polygon."""
    if args.input:
        d = _load(args.input)
        if "x" in d:
            return corners_from_json(d, args.field)
        return polygon.extract_corners(polygon_from_json(d))
    return polygon.extract_corners(_input_polygon(args))


# ---------------------------------------------------------------------------
# orbit


def run_orbit(p: polygon.ClosedPolygon, steps: int, power: int = 1) -> dict:
    """Frames, per-frame invariants and drift statistics of the Float64 orbit."""
    frames = polygon.orbit_array(p, steps, power)
    x = polygon.corners_array(frames)
    funcs = invariants.monodromy_invariants(p.n)
    values = np.column_stack([f.evaluate_batch(x) for _, f in funcs])
    drift = np.abs(values - values[0]) / np.maximum(np.abs(values[0]), np.finfo(float).tiny)
    convex = polygon.is_convex_array(frames)
    return {
        "frames": frames,
        "names": [name for name, _ in funcs],
        "values": values,
        "max_drift": float(drift.max()),
        "drift": {name: float(d) for (name, _), d in zip(funcs, drift.max(axis=0))},
        "all_convex": bool(convex.all()),
        "max_radius": float(np.abs(frames[..., :2]).max()),
        "steps_done": len(frames) - 1,
    }


def write_orbit_csv(result: dict, out) -> None:
    w = csv.writer(out)
    names = result["names"]
    w.writerow(["step", "vertex", "x", "y"] + names)
    blank = [""] * len(names)
    for s, (frame, vals) in enumerate(zip(result["frames"], result["values"])):
        for i, (px, py, _) in enumerate(frame):
            w.writerow([s, i, repr(float(px)), repr(float(py))] + blank)
        w.writerow([s, "summary", "", ""] + [repr(float(t)) for t in vals])


def cmd_orbit(args) -> int:
    p = _input_polygon(args)
    result = run_orbit(p, args.iters, args.power)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            write_orbit_csv(result, fh)
    tol = args.tolerance if args.tolerance is not None else 1e-6
    summary = {
        "n": p.n,
        "power": args.power,
        "steps_requested": args.iters,
        "steps_done": result["steps_done"],
        "max_drift": result["max_drift"],
        "drift": result["drift"],
        "all_convex": result["all_convex"],
        "max_radius": result["max_radius"],
        "tolerance": tol,
    }
    if result["steps_done"] < args.iters:
        summary["truncated_at"] = result["steps_done"] + 1
    print(json.dumps(summary, indent=2))
    ok = result["steps_done"] == args.iters and result["max_drift"] < tol
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# verification suites


def _random_point(rng, n):
    return tuple(random_rational(rng) for _ in range(2 * n))


def suite_bracket(n, trials, rng, tol):
    for _ in range(trials):
        if not poisson.verify_map_preserves_bracket(_random_point(rng, n)).ok:
            return False, "bracket not preserved"
    return True, "all residuals exactly 0"


def suite_commute(n, trials, rng, tol):
    funcs = [f for _, f in invariants.monodromy_invariants(n)]
    if n % 2 == 0:
        funcs += list(invariants.half_casimir_polynomials(n))
    for _ in range(trials):
        x = _random_point(rng, n)
        grads = [f.gradient(x) for f in funcs]
        for i in range(len(grads)):
            for j in range(i + 1, len(grads)):
                if poisson.bracket_of_gradients(grads[i], grads[j], x) != 0:
                    return False, f"pair {i},{j} does not commute"
    return True, "all brackets exactly 0"


def suite_casimir(n, trials, rng, tol):
    cas = [invariants.invariant_polynomial(n, n, p) for p in (invariants.ODD, invariants.EVEN)]
    if n % 2 == 0:
        cas += list(invariants.half_casimir_polynomials(n))
    for _ in range(trials):
        x = _random_point(rng, n)
        if any(c != 0 for f in cas for c in poisson.hamiltonian_field(f, x)):
            return False, "nonzero Casimir field"
    expected = 2 * n - 2 if n % 2 else 2 * n - 4
    r = poisson.tensor_rank(n)
    return r == expected, f"tensor rank {r}, expected {expected}"


def suite_identities(n, trials, rng, tol):
    tol = 1e-9 if tol is None else tol
    worst = 0.0
    for t in range(trials):
        p = polygon.random_convex_polygon(n, int(rng.integers(2**31)))
        v = polygon.extract_corners(p)
        worst = max(worst, invariants.check_closed_identities(v).max())
    return worst < tol, f"max residual {worst:.3g}"


def suite_tangency(n, trials, rng, tol):
    funcs = analysis.monodromy_functions(n)
    for _ in range(trials):
        p = polygon.random_convex_polygon(n, int(rng.integers(2**31)))
        v = polygon.extract_corners(p)
        chart = closure.close_up(n, corners.to_ray_order(v)[: 2 * n - 8])
        if not analysis.tangency_holds(chart, funcs):
            return False, "field leaves the tangent space"
    return True, "all fields tangent"


def suite_roundtrip(n, trials, rng, tol):
    for _ in range(trials):
        p = polygon.random_convex_polygon(n, int(rng.integers(2**31)))
        v = polygon.extract_corners(p)
        q = polygon.ClosedPolygon(tuple(closure.propagate_ray_geometric(corners.to_ray_order(v), n)))
        if polygon.extract_corners(q).x != v.x or not polygon.projectively_equivalent(p, q, allow_relabel=True):
            return False, "round trip mismatch"
    return True, "corners and polygons reproduced exactly"


SUITE_FUNCS = {
    "bracket": suite_bracket,
    "commute": suite_commute,
    "casimir": suite_casimir,
    "identities": suite_identities,
    "tangency": suite_tangency,
    "roundtrip": suite_roundtrip,
}


def cmd_verify(args) -> int:
    rng = make_rng(args.seed)
    trials = args.iters if args.iters is not None else 20
    if args.suite == "tangency" and args.n < 7:
        raise SystemExit("tangency suite needs n >= 7")
    ok, detail = SUITE_FUNCS[args.suite](args.n, trials, rng, args.tolerance)
    _emit({"suite": args.suite, "n": args.n, "trials": trials, "pass": ok, "detail": detail}, args.output)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# rank, conversions


def cmd_rank(args) -> int:
    report = analysis.rank_report(args.n, args.u)
    _emit(report.as_dict(), args.output)
    return 0 if report.ok else 1


def cmd_reconstruct(args) -> int:
    """Corner JSON to polygon JSON, or the point P^u as a chart report when --u is given."""
    if args.input is None and args.u is not None:
        _emit(closure.pu_polygon(args.n, args.u).as_dict(), args.output)
        return 0
    v = _input_corners(args)
    n = v.n
    pts = closure.propagate_ray_geometric(corners.to_ray_order(v), n)
    p = polygon.ClosedPolygon(tuple(p.normalized() for p in pts))
    if polygon.extract_corners(p).x != v.x and args.field == "rational":
        print("warning: corner vector is not closed; polygon realizes only its inner block", file=sys.stderr)
    _emit(polygon_to_json(p, args.field), args.output)
    return 0


def cmd_pentagram(args) -> int:
    p = _input_polygon(args)
    for _ in range(args.power):
        p = polygon.pentagram_map_geometric(p)
    _emit(polygon_to_json(polygon.ClosedPolygon(tuple(v.normalized() for v in p.vertices)), args.field), args.output)
    return 0


def cmd_random(args) -> int:
    p = polygon.random_convex_polygon(args.n, args.seed, field=args.field)
    _emit(polygon_to_json(p, args.field), args.output)
    return 0


def cmd_invariants(args) -> int:
    v = _input_corners(args)
    d = invariants.evaluate_invariants(v).as_dict()
    d["corners"] = corners_to_json(v)["x"]
    _emit(d, args.output)
    return 0


COMMANDS = {
    "orbit": cmd_orbit,
    "verify": cmd_verify,
    "rank": cmd_rank,
    "reconstruct": cmd_reconstruct,
    "pentagram": cmd_pentagram,
    "random": cmd_random,
    "invariants": cmd_invariants,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pentagram-lab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--n", type=int, default=7, help="number of vertices")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--field", choices=("rational", "f64"), default="rational")
    ap.add_argument("--u", type=Fraction, default=None, help="P^u parameter, e.g. 1/100")
    ap.add_argument("--iters", type=int, default=None, help="orbit steps or verification trials")
    ap.add_argument("--power", type=int, choices=(1, 2), default=1, help="iterate T or T^2")
    ap.add_argument("--input", default=None)
    ap.add_argument("--output", default=None)
    ap.add_argument("--suite", choices=SUITES, default="commute")
    ap.add_argument("--tolerance", type=float, default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "orbit" and args.iters is None:
        args.iters = 1000
    if args.command == "rank" and args.u is None:
        args.u = Fraction(1, 100)
    try:
        return COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
