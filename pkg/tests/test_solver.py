import math

import numpy as np
import pytest

from gen import make_instance
from crosstrain import (Distribution, Evaluator, ExpectationConfig, Quadrature,
                        RegimeError, SolverConfig, cost_gradient_fd, expected_cost, grid_minimize,
                        solve, solve_case1a, solve_case1b_consistent, solve_case2a,
                        solve_case2b_consistent, solve_global, with_overrides)
from crosstrain.solver import FocSpec, Method, bisect_foc, foc_case1b, foc_case2b

QUAD = ExpectationConfig(Quadrature(512))
CFG = SolverConfig(QUAD, cross_check=False)


def smallest_quadratic_root(delta, B, G, k, Wa, Wg):
    """Smallest root of (B - delta x)(G - x) = k Wa Wg."""
    a, b, c = delta, -(delta * G + B), B * G - k * Wa * Wg
    return (-b - math.sqrt(b * b - 4 * a * c)) / (2 * a)


def test_case1a_matches_algebraic_root(base):
    # P(d_a >= 54000 + 0.9x) P(d_g < 54000 - x) = 2800 / (0.9 * 5000), both factors unclipped
    inst = with_overrides(base, h=5000, c2=9000)
    res = solve_case1a(inst, CFG)
    k = 2800 / (0.9 * 5000)
    root = smallest_quadratic_root(0.9, 65000 - 54000, 54000 - 20000, k, 10000, 40000)
    assert 1000 / 0.9 < root < 54000
    assert res.x1.x1_alpha == pytest.approx(root, abs=1e-6)
    assert res.method.alpha is Method.ANALYTIC
    assert abs(res.foc_residual.alpha) <= 1e-6
    # gamma never runs short enough to pay for training
    assert res.x1.x1_gamma == 0 and res.method.gamma is Method.LOW


def test_case1b_matches_algebraic_root(base):
    # c1/c2 = 0.7, delta1 = delta2 = 0.9, c2 <= delta2 h
    inst = with_overrides(base, h=5000, c2=4000)
    res = solve_case1b_consistent(inst, CFG)
    root = smallest_quadratic_root(0.9, 11000, 34000, 0.7, 10000, 40000)
    assert res.x1.x1_alpha == pytest.approx(root, abs=1e-6)
    assert res.method.alpha is Method.ANALYTIC


def test_case1b_costly_first_stage_stays_at_zero(base):
    inst = with_overrides(base, h=5000, c2=4000, c1=4000)
    res = solve_case1b_consistent(inst, CFG)
    assert res.x1.pair == (0.0, 0.0)
    assert res.method == (Method.LOW, Method.LOW)


def test_boundary_high_trains_everyone():
    inst = make_instance(c1=(500, 500), c2=(4000, 4000), h=(5000, 5000),
                         d_alpha=Distribution.uniform(200000, 210000), d_gamma=Distribution.degenerate(0),
                         delta1=(0.9, 0.9), delta2=(0.9, 0.9))
    res = solve_case1b_consistent(inst, CFG)
    assert res.x1.x1_alpha == inst.gamma.x0 and res.method.alpha is Method.HIGH
    assert res.foc_residual.alpha > 0


def test_not_profitable_gives_boundary_low(base):
    inst = with_overrides(base, h=5000, c2=9000, c1_alpha=4600)  # 0.9 < 4600/5000
    res = solve_case1a(inst, CFG)
    assert res.x1.x1_alpha == 0 and res.method.alpha is Method.LOW
    assert res.foc_residual.alpha <= 0


def test_wrong_regime_is_refused(base):
    with pytest.raises(RegimeError):
        solve_case1b_consistent(base, CFG)
    with pytest.raises(RegimeError):
        solve_case2a(base, CFG)
    inst = with_overrides(base, h=5000, c2=4000, delta2=0.8)
    with pytest.raises(RegimeError):
        solve_case1b_consistent(inst, CFG)  # delta1 != delta2


def test_case1a_is_separable(base):
    inst = with_overrides(base, h=5000, c2=9000)
    a = solve_case1a(inst, CFG).x1.x1_alpha
    b = solve_case1a(with_overrides(inst, c1_gamma=100, c2_gamma=8000), CFG).x1.x1_alpha
    assert a == b


def test_bisect_returns_smallest_root():
    def r(x):
        return 1.0 - x if x < 1 else (0.0 if x <= 2 else 2.0 - x)

    x, m, res, diag = bisect_foc(FocSpec("1a", "alpha", r, 4.0), tol=1e-10)
    assert m is Method.ANALYTIC and x == pytest.approx(1.0, abs=1e-9)
    assert diag["monotone"]


def test_bisect_flags_non_monotone_residual():
    _, _, _, diag = bisect_foc(FocSpec("1a", "alpha", lambda x: math.sin(x), 10.0))
    assert not diag["monotone"]


# -------------------------------------------------------------- case 2

CASE2 = dict(x0=(54000, 54000), c1=(2800, 2000), c2=(9000, 9000), h=(2000, 6000),
             d_alpha=Distribution.uniform(30000, 60000), d_gamma=Distribution.uniform(50000, 70000))


def test_case2a_against_grid_oracle():
    inst = make_instance(**CASE2)
    res = solve_case2a(inst, CFG)
    assert res.method.gamma is Method.ANALYTIC
    step = 54000 / 200
    rep = grid_minimize(inst, step, ExpectationConfig(Quadrature(256)), separable=True)
    assert abs(rep.best_x1.x1_gamma - res.x1.x1_gamma) <= step
    assert abs(rep.best_x1.x1_alpha - res.x1.x1_alpha) <= step


def test_case2a_unprofitable_gamma_training():
    inst = make_instance(**{**CASE2, "c1": (2800, 5500)})  # 0.9 * 6000 <= 5500
    assert solve_case2a(inst, CFG).x1.x1_gamma == 0


def test_case2b_sign_follows_finite_differences():
    inst = make_instance(**{**CASE2, "c2": (1500, 4000)})
    res = solve_case2b_consistent(inst, CFG)
    assert res.method.gamma is Method.ANALYTIC
    fine = ExpectationConfig(Quadrature(1024))
    fd = cost_gradient_fd(inst, res.x1, fine, step=20.0)
    assert abs(fd.gamma) <= 5e-3 * inst.gamma.c1
    # with the middle term's sign flipped the root moves off the stationary point
    a, g, r = inst.alpha, inst.gamma, inst.random
    x = res.x1.x1_gamma
    flipped = (g.c2 * r.d_alpha.prob_le(a.x0 - x) * r.d_gamma.prob_ge(g.x0 + 0.9 * x)
               + r.d_alpha.prob_gt(a.x0 - x) * (a.h - 0.9 * g.h) * r.d_gamma.prob_gt(g.x0 + 0.9 * x)
               - g.c1)
    assert abs(flipped) > 100 * abs(res.foc_residual.gamma) + 1.0
    step = 54000 / 200
    rep = grid_minimize(inst, step, ExpectationConfig(Quadrature(256)), separable=True)
    assert abs(rep.best_x1.x1_gamma - x) <= step


def test_case2b_at_allocation_boundary_reduces_to_case1b():
    inst = make_instance(**{**CASE2, "h": (5400, 6000), "c2": (1500, 4000)})  # h_a = 0.9 h_g
    r2 = foc_case2b(inst)
    r1 = foc_case1b(inst, "gamma")
    for x in np.linspace(0, 54000, 9):
        assert r2.residual(x) == pytest.approx(inst.gamma.c2 * r1.residual(x), abs=1e-9)


def test_case2b_costly_first_stage():
    inst = make_instance(**{**CASE2, "c1": (2800, 4500), "c2": (1500, 4000)})
    assert solve_case2b_consistent(inst, CFG).x1.x1_gamma == 0


# -------------------------------------------------------------- global search

def test_global_agrees_with_case1a(base):
    inst = with_overrides(base, h=5000, c2=9000)
    ana = solve_case1a(inst, CFG)
    glo = solve_global(inst, CFG)
    assert glo.method.alpha is Method.GLOBAL
    assert glo.diagnostics["separable"]
    # the quadrature objective is piecewise linear with kinks one demand cell apart
    cell = inst.random.d_alpha.width / 512 / 0.9
    assert abs(glo.x1.x1_alpha - ana.x1.x1_alpha) <= cell
    assert glo.expected.total == pytest.approx(ana.expected.total, rel=1e-7)
    # pathwise derivative near zero at the interior optimum
    assert abs(glo.foc_residual.alpha) <= 1e-3 * inst.alpha.c1


def test_global_deterministic_plan():
    inst = make_instance(d_alpha=Distribution.degenerate(60000), d_gamma=Distribution.degenerate(40000),
                         h=(5000, 5000), c2=(9000, 9000))
    res = solve_global(inst, CFG)
    assert res.x1.x1_alpha == pytest.approx(6000 / 0.9, abs=2.0)
    assert res.x1.x1_gamma == pytest.approx(0.0, abs=2.0)
    pricey = with_overrides(inst, c1_alpha=4600)
    assert solve_global(pricey, CFG).x1.x1_alpha == pytest.approx(0.0, abs=2.0)


def test_global_inconsistent_productivity_beats_fine_grid(base):
    # delta1 = 0.9, delta2 = 0.65, online training pays: no analytic equation applies
    inst = with_overrides(base, h=8000, delta2=0.65)
    q = ExpectationConfig(Quadrature(128))
    cfg = SolverConfig(q, cross_check=False)
    res = solve(inst, cfg)
    assert res.method.alpha is Method.GLOBAL
    rep = grid_minimize(inst, 54000 / 400, q, separable=True)
    assert res.expected.total <= rep.best_cost + 1e-9 * rep.best_cost


def test_dispatch_examples(base):
    r = solve(base, SolverConfig(QUAD, cross_check=True, check_samples=5000))
    assert r.regime.label == "1a" and Method.GLOBAL not in r.method
    assert not r.diagnostics["cross_check"]["global_better"]
    r = solve(with_overrides(base, c2=2800, h=5000), CFG)
    assert r.regime.label == "1b" and r.method.alpha is not Method.GLOBAL
    mixed = with_overrides(base, c2=2800, h=5000, delta2_alpha=Distribution.uniform(0.5, 0.9))
    r = solve(mixed, SolverConfig(ExpectationConfig(Quadrature(64, delta_nodes=4)), cross_check=False))
    assert r.method == (Method.GLOBAL, Method.GLOBAL)
    assert r.diagnostics["evaluator"] == Evaluator.ORACLE.value
    assert math.isnan(r.foc_residual.alpha)


def test_relabelled_instance_gives_swapped_solution(base):
    inst = with_overrides(base, h_alpha=6000, h_gamma=5000, c2=9000,
                          d_gamma=Distribution.uniform(55000, 65000),
                          d_alpha=Distribution.uniform(20000, 60000))
    a = solve(inst, CFG)
    b = solve(inst.swapped(), CFG)
    assert a.x1.x1_alpha == pytest.approx(b.x1.x1_gamma, abs=1e-7)
    assert a.x1.x1_gamma == pytest.approx(b.x1.x1_alpha, abs=1e-7)
    assert a.x1.x1_gamma > 0


def test_solutions_are_feasible_and_breakdown_consistent(base):
    inst = with_overrides(base, h=8000)
    res = solve(inst, CFG)
    res.x1.check(inst)
    assert res.expected == expected_cost(inst, res.x1, QUAD)
