"""Acceptance suite: one printed PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v`` (the lines are printed past the
capture) or ``python tests/test_acceptance.py`` for a bare report.
"""
import itertools
import math
import random
import sys
import time
from fractions import Fraction

import pytest

from irgames import fixtures
from irgames.bridge import compile as compile_spec
from irgames.bridge import play_out, solve_bridge_pure_maxmin, solve_non_overbidding
from irgames.game import MAX, MIN, Recall, chance_degree, classify_recall, payoff
from irgames.poly import GeneralPoly, equivalent, is_perfect_recall
from irgames.solvers import (estimate_maxmin_beh, solve_backward_induction, solve_pure_exhaustive,
                             solve_pure_maxmin, solve_pure_minmax, solve_pure_one_player)
from irgames.transforms import (encode_maxmin_formula, gadget_sqrt, gadget_sqrtsum, game_to_poly,
                                poly_to_game, pr_poly_to_game)

from gen import random_game, random_general_poly, random_multilinear, random_pr_poly
from oracles import disconnected_decompositions, pr_bruteforce, vertex_max

SEED = 1729


@pytest.fixture
def report(capsys):
    """Print one PASS/FAIL line, then fail the test on FAIL."""
    def emit(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
    return emit


def test_c01_pure_values(report):
    g1, g2 = fixtures.g1(), fixtures.g2()
    t0 = time.perf_counter()
    maxmin = solve_pure_maxmin(g2).value
    minmax = solve_pure_minmax(g2).value
    one = solve_pure_one_player(g1).value
    dt = time.perf_counter() - t0
    ok = maxmin == 1 and minmax == 2 and one == 0 and dt < 0.1
    report(1, ok, f"maxmin(G2)={maxmin} minmax(G2)={minmax} pure(G1)={one} in {dt:.3f}s")


def test_c02_sqrt_gadget(report):
    rows, ok = [], True
    for n in (2, 4, 9, 16):
        t0 = time.perf_counter()
        res = estimate_maxmin_beh(gadget_sqrt(n))
        dt = time.perf_counter() - t0
        target = (math.sqrt(n) - 1) / (n - 1)
        err_v = abs(res.value + math.sqrt(n))
        err_x = max(abs(res.witness["I1"][0] - target), abs(res.witness["I2"][0] - target))
        ok &= err_v <= 1e-4 and err_x <= 1e-3 and dt < 5
        rows.append(f"n={n}: |v+sqrt n|={err_v:.1e} |x-x*|={err_x:.1e} {dt:.2f}s")
    report(2, ok, "; ".join(rows))


def test_c03_sqrtsum(report):
    v1 = float(estimate_maxmin_beh(gadget_sqrtsum((4, 9), 5)).value)
    v2 = float(estimate_maxmin_beh(gadget_sqrtsum((2, 3), 3)).value)
    v3 = float(estimate_maxmin_beh(gadget_sqrtsum((4,), 3)).value)
    ok = abs(v1) <= 1e-3 and v2 <= -0.04 and v3 >= 0.3
    report(3, ok, f"(4,9),5 -> {v1:.2e}; (2,3),3 -> {v2:.5f}; (4,),3 -> {v3:.5f}")


def test_c04_poly_to_game_identity(report):
    rng = random.Random(SEED)
    bad = 0
    for _ in range(100):
        F = random_general_poly(rng, nvars=4, max_deg=3, max_terms=6)
        g = poly_to_game(F)
        for _ in range(20):
            pt = {v: Fraction(rng.randint(0, 12), rng.randint(1, 12)) for v in F.variables}
            pt = {v: min(x, Fraction(1)) for v, x in pt.items()}
            strat = {v: (x, 1 - x) for v, x in pt.items()}
            bad += payoff(g, strat) != F.evaluate(pt)
    report(4, bad == 0, f"100 polynomials x 20 points, {bad} mismatches")


def test_c05_pr_detection(report):
    rng = random.Random(SEED)
    polys = [random_multilinear(rng, nvars=5) for _ in range(100)]
    polys += [random_pr_poly(rng, names=[f"v{i}" for i in range(rng.randint(1, 5))]) for _ in range(100)]
    disagree = prop1 = positives = 0
    for f in polys:
        fast = bool(is_perfect_recall(f))
        disagree += fast != pr_bruteforce(f)
        if fast:
            positives += 1
            for _, *parts in disconnected_decompositions(f):
                prop1 += not all(is_perfect_recall(p) and pr_bruteforce(p) for p in parts)
    ok = disagree == 0 and prop1 == 0
    report(5, ok, f"200 polynomials ({positives} perfect recall): {disagree} disagreements, "
                  f"{prop1} decompositions with imperfect parts")


def test_c06_pr_round_trip(report):
    rng = random.Random(SEED)
    bad = 0
    for _ in range(50):
        f = random_pr_poly(rng)
        g = pr_poly_to_game(f)
        rc = classify_recall(g, MAX).kind
        bad += rc != Recall.PERFECT or solve_backward_induction(g).value != vertex_max(f)
    report(6, bad == 0, f"50 perfect-recall polynomials, {bad} failures")


def test_c07_bag_solver(report):
    rng = random.Random(SEED)
    bad = over = 0
    worst = 0.0
    for _ in range(200):
        g = random_game(rng, players=(MAX,), max_nodes=40, max_infosets=12, max_degree=3)
        if not g.active_players():
            bad += solve_pure_one_player(g).value != payoff(g)
            continue
        res = solve_pure_one_player(g)
        bad += res.value != solve_pure_exhaustive(g).value
        bound = len(g.nodes) ** chance_degree(g)
        over += res.stats["candidates"] > bound
        worst = max(worst, res.stats["candidates"] / bound)
    report(7, bad == 0 and over == 0,
           f"200 games: {bad} value mismatches, {over} over nodes^K (max ratio {worst:.3f})")


def test_c08_chance_degree(report):
    vals = {"G2": chance_degree(fixtures.g2())}
    for n in (2, 4, 9, 16):
        vals[f"G-sqrt{n}"] = chance_degree(gadget_sqrt(n))
    fig5 = compile_spec(fixtures.fig5_spec())
    vals["fig5"] = chance_degree(fig5)
    ok = (vals["G2"] == 1 and all(v == 2 for k, v in vals.items() if k.startswith("G-"))
          and vals["fig5"] == 4 and len(fig5.nodes[fig5.root].children) == 4)
    report(8, ok, " ".join(f"{k}={v}" for k, v in vals.items()))


def test_c09_bridge(report):
    fig5, fig6 = fixtures.fig5_spec(), fixtures.fig6_spec()
    p1 = play_out(fig5, ("♠", "⊥", "♠", "⊥"), (0, 1, 0, 2, 4, 0, 0, 0)).payoff
    p2 = play_out(fig5, ("♠", "⊥", "♦", "⊥"), (2, 3, 0, 0, 0)).payoff
    times = {}
    t0 = time.perf_counter()
    nob6 = solve_non_overbidding(fig6).value
    times["nob6"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    pure6 = solve_bridge_pure_maxmin(fig6).value
    times["pure6"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    nob5 = solve_non_overbidding(fig5).value
    pure5 = solve_bridge_pure_maxmin(fig5).value
    times["fig5"] = time.perf_counter() - t0
    ok = (p1 == 4 and p2 == 3 and nob6 == pure6 and nob5 < pure5
          and all(t < 60 for t in times.values()))
    report(9, ok, f"play_out {p1},{p2}; fig6 nob={nob6} pure={pure6}; fig5 nob={nob5} pure={pure5}; "
                  + " ".join(f"{k}={t:.1f}s" for k, t in times.items()))


def _rename(poly: GeneralPoly, mapping: dict) -> GeneralPoly:
    return GeneralPoly({tuple((mapping[v], e) for v, e in mono): c for mono, c in poly.terms.items()})


def test_c10_formula(report):
    g2 = fixtures.g2()
    phi = encode_maxmin_formula(g2, 0, ">=")
    w, x, y, z = (GeneralPoly.var(v) for v in "wxyz")
    ref = w * x + 2 * w * (1 - x) * z + 2 * (1 - w) * y * (1 - z) + (1 - w) * (1 - y)
    renamings = [dict(zip(phi.exists + phi.forall, perm + ("w",)))
                 for perm in itertools.permutations("xyz")]
    matches = [m for m in renamings if equivalent(_rename(phi.matrix, m), ref)]
    ok = (len(phi.exists) == 3 and len(phi.forall) == 1 and phi.relation == ">="
          and phi.threshold == 0 and bool(matches) and equivalent(phi.matrix, game_to_poly(g2)))
    shown = ", ".join(f"{k}->{v}" for k, v in matches[0].items()) if matches else "none"
    report(10, ok, f"matrix matches reference under {shown}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
