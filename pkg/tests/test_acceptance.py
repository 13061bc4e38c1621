"""The thirteen acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are repeated in the
terminal summary under "acceptance criteria".
"""

import time
from fractions import Fraction

from conftest import record_criterion

from pentagram_lab.analysis import (
    gradient_heft,
    A,
    monodromy_functions,
    rank_report,
    rel2_residuals,
    tangency_holds,
)
from pentagram_lab.closure import (
    WindowPolynomial,
    close_up,
    closure_polynomials,
    propagate_ray_geometric,
    pu_polygon,
    reconstruct_lines,
    reconstruct_points,
    scaling_residual,
)
from pentagram_lab.corners import CornerVector, pentagram_map_coords, to_ray_order
from pentagram_lab.geom import join
from pentagram_lab.invariants import (
    EVEN,
    ODD,
    check_closed_identities,
    evaluate_invariants,
    half_casimir_polynomials,
    invariant_polynomial,
    monodromy_invariants,
    trace_invariants,
)
from pentagram_lab.numerics import make_rng, valuation_estimate
from pentagram_lab.poisson import bracket_of_gradients, hamiltonian_field, tensor_rank, verify_map_preserves_bracket
from pentagram_lab.polygon import (
    extract_corners,
    pentagram_map_geometric,
    projectively_equivalent,
    random_convex_polygon,
)
from pentagram_lab.cli import run_orbit

from helpers import rational_vector

F = Fraction
SEED = 2024


def _check(number, ok, detail):
    record_criterion(number, ok, detail)
    assert ok, detail


def test_criterion_01_invariance():
    rng = make_rng(SEED + 1)
    start = time.perf_counter()
    bad = []
    for n in range(5, 13):
        for _ in range(100):
            v = CornerVector(rational_vector(rng, 2 * n))
            if evaluate_invariants(pentagram_map_coords(v)) != evaluate_invariants(v):
                bad.append(n)
    t = time.perf_counter() - start
    _check(1, not bad, f"exact invariance, n=5..12 x 100 vectors ({t:.1f}s); failures at n={sorted(set(bad))}")


def test_criterion_02_pentagon_and_hexagon():
    pent = sum(
        projectively_equivalent(p, pentagram_map_geometric(p), allow_relabel=True)
        for p in (random_convex_polygon(5, SEED + s) for s in range(20))
    )
    hexa = sum(
        projectively_equivalent(p, pentagram_map_geometric(pentagram_map_geometric(p)), allow_relabel=True)
        for p in (random_convex_polygon(6, SEED + s) for s in range(20))
    )
    _check(2, pent == 20 and hexa == 20, f"pentagon identity {pent}/20, hexagon involution {hexa}/20 (exact)")


def test_criterion_03_bracket_preservation():
    rng = make_rng(SEED + 3)
    worst = F(0)
    for n in range(6, 11):
        for _ in range(20):
            worst = max(worst, verify_map_preserves_bracket(rational_vector(rng, 2 * n)).max_abs())
    _check(3, worst == 0, f"n=6..10 x 20 points, max residual {worst}")


def test_criterion_04_commutation():
    rng = make_rng(SEED + 4)
    start = time.perf_counter()
    nonzero = 0
    for n in range(5, 11):
        funcs = [f for _, f in monodromy_invariants(n)]
        assert len(funcs) == (n + 1 if n % 2 else n + 2)
        for _ in range(20):
            x = rational_vector(rng, 2 * n)
            grads = [f.gradient(x) for f in funcs]
            for i in range(len(grads)):
                for j in range(i + 1, len(grads)):
                    nonzero += bracket_of_gradients(grads[i], grads[j], x) != 0
    t = time.perf_counter() - start
    _check(4, nonzero == 0, f"n=5..10 x 20 points, {nonzero} nonzero brackets ({t:.1f}s)")


def test_criterion_05_casimirs_and_rank():
    rng = make_rng(SEED + 5)
    nonzero = 0
    ranks = {}
    for n in range(5, 13):
        cas = [invariant_polynomial(n, n, ODD), invariant_polynomial(n, n, EVEN)]
        if n % 2 == 0:
            cas += list(half_casimir_polynomials(n))
        for _ in range(5):
            x = rational_vector(rng, 2 * n)
            nonzero += sum(any(c != 0 for c in hamiltonian_field(f, x)) for f in cas)
        ranks[n] = tensor_rank(n)
    expected = {n: 2 * n - 2 if n % 2 else 2 * n - 4 for n in range(5, 13)}
    ok = nonzero == 0 and ranks == expected
    _check(5, ok, f"Casimir fields nonzero: {nonzero}; tensor ranks {list(ranks.values())}")


def test_criterion_06_geometric_coordinate_commutation():
    mismatch = []
    for n in range(5, 11):
        for s in range(20):
            p = random_convex_polygon(n, SEED + 100 * n + s)
            if extract_corners(pentagram_map_geometric(p)) != pentagram_map_coords(extract_corners(p)):
                mismatch.append((n, s))
    _check(6, not mismatch, f"n=5..10 x 20 polygons, mismatches {mismatch}")


def test_criterion_07_trace_form():
    rng = make_rng(SEED + 7)
    worst = 0.0
    for n in (7, 8):
        for _ in range(20):
            x = tuple(float(c) for c in rational_vector(rng, 2 * n))
            iv = evaluate_invariants(x)
            w1, w2 = trace_invariants(x)
            so, se = float(sum(iv.O)), float(sum(iv.E))
            worst = max(worst, abs(w1 - so) / abs(so), abs(w2 - se) / abs(se))
    _check(7, worst < 1e-9, f"max relative difference {worst:.2e} (tol 1e-9)")


def test_criterion_08_closed_identities():
    worst1 = worst2 = 0.0
    for n in (7, 8):
        for s in range(20):
            v = extract_corners(random_convex_polygon(n, SEED + 10 * n + s))
            worst1 = max(worst1, check_closed_identities(v).max())
            worst2 = max(worst2, max(rel2_residuals(v)))
    ok = worst1 < 1e-9 and worst2 < 1e-8
    _check(8, ok, f"Rel1 max {worst1:.2e} (tol 1e-9), Rel2 max {worst2:.2e} (tol 1e-8)")


def test_criterion_09_closure_variety():
    # closure polynomials on closed polygons
    vanish = all(
        all(c == 0 for c in closure_polynomials(extract_corners(random_convex_polygon(n, SEED + 7 * n + s))))
        for n in range(5, 10)
        for s in range(4)
    )
    # geometric oracle for the window conventions
    rng = make_rng(SEED + 9)
    geometric = True
    for _ in range(5):
        x = rational_vector(rng, 24)
        pts = propagate_ray_geometric(x, 10)
        for k in range(0, 11, 2):
            geometric &= reconstruct_points(x, k) == pts[4 + k // 2]
        for k in range(0, 9, 2):
            geometric &= reconstruct_lines(x, k) == join(pts[3 + k // 2], pts[4 + k // 2])
        for k in (0, 4, 8):
            geometric &= all(c == 0 for c in scaling_residual(x, k))
    # reference window values
    t, s, r = F(3, 7), F(5, 11), F(13, 17)
    x = [F(0)] * 12
    x[3] = t
    reference5 = WindowPolynomial(1, 5)(x) == 1 - t
    x[4], x[5] = s, r
    reference7 = WindowPolynomial(1, 7)(x) == 1 - t + t * s * r
    ok = vanish and geometric and reference5 and reference7
    detail = (
        f"closure polys vanish n=5..9: {vanish}; geometric oracle: {geometric}; "
        f"reference O_1^5: {reference5}; reference O_1^7: {reference7}"
    )
    if not reference7:
        detail += " (window rule matching geometry yields 1 - x3 - x5 + x3x4x5)"
    _check(9, ok, detail)


def test_criterion_10_ranks():
    got = {}
    start = time.perf_counter()
    for n in (7, 9, 11, 8):
        rep = rank_report(n, F(1, 100), check_tangency=False)
        got[n] = (rep.full_rank, rep.restricted_rank, rep.expected)
    t = time.perf_counter() - start
    ok = all(fr == e[0] and rr == e[1] for fr, rr, e in got.values())
    summary = ", ".join(f"n={n}: {fr}/{rr} (expected {e[0]}/{e[1]})" for n, (fr, rr, e) in got.items())
    _check(10, ok, f"{summary} ({t:.1f}s)")


def test_criterion_11_tangency():
    results = []
    for n in (7, 9):
        funcs = monodromy_functions(n)
        charts = [pu_polygon(n, F(1, 100))]
        for s in range(3):
            v = extract_corners(random_convex_polygon(n, SEED + 31 * n + s))
            charts.append(close_up(n, to_ray_order(v)[: 2 * n - 8]))
        results += [tangency_holds(c, funcs) for c in charts]
    _check(11, all(results), f"n=7, 9 at P^u and 3 random closed polygons each: {sum(results)}/{len(results)} tangent")


def test_criterion_12_asymptotics():
    u = F(1, 1000)
    chart = pu_polygon(7, u)
    a, b, c, d = chart.abcd
    near_one = all(1 - 10 * u <= e <= 1 + 10 * u for e in (b, c, d))
    lead = a / u**6
    lead_ok = F(9, 10) <= lead <= F(11, 10)
    val = valuation_estimate(lambda t: pu_polygon(7, t).outer[0], u)
    heft, _ = gradient_heft(A(7, 7, 1), 7, F(1, 100))
    ok = near_one and lead_ok and val == 6 and heft == 6
    _check(12, ok, f"b,c,d within 10u: {near_one}; a/u^6 = {float(lead):.4f}; valuation(a) = {val}; heft(grad A_7,+) = {heft}")


def test_criterion_13_orbit():
    p = random_convex_polygon(7, 1)
    start = time.perf_counter()
    res = run_orbit(p, 100_000, power=2)
    t = time.perf_counter() - start
    bounded = res["max_radius"] < 10
    ok = res["steps_done"] == 100_000 and res["max_drift"] < 1e-6 and res["all_convex"] and bounded
    _check(
        13,
        ok,
        f"{res['steps_done']} steps of T^2, max drift {res['max_drift']:.2e} (tol 1e-6), "
        f"all convex: {res['all_convex']}, max radius {res['max_radius']:.3f} ({t:.1f}s)",
    )
