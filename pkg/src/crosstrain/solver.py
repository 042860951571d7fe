"""Optimal first-stage cross-training levels.

Where the expected cost is known to be convex in each level, the optimum is
the root of a newsvendor-type optimality equation, found by bisection.
Residuals are written as ``LHS - RHS`` and decrease in the candidate level,
so the smallest root is ``inf{x : r(x) <= 0}``. They use exact demand CDFs
and a midpoint rule over the first-stage productivity factor.

* Case 1a (no online training): ``E[d1 ; x0_a + d1*x <= d_a] * P(d_g < x0_g - x) = c1/h``
* Case 1b (online training, d1 == d2): ``P(d_a >= x0_a + d1*x, d_g <= x0_g - x) = c1/c2``
* Case 2a, gamma task:
  ``E[d1*h_g ; d_g > x0_g + d1*x] - h_a * P(d_a > x0_a - x, d_g > x0_g + d1*x) = c1_g``
* Case 2b, gamma task:
  ``c2_g * P(d_a <= x0_a - x, d_g >= x0_g + d1*x)
  + E[d1*h_g - h_a ; d_a > x0_a - x, d_g > x0_g + d1*x] = c1_g``

In Case 2 the alpha task uses the Case-1 equation. Everything else goes to
:func:`solve_global`, a grid search on the sampled objective followed by
golden-section refinement per coordinate.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import RegimeError
from .expect import (CostBreakdown, Evaluator, ExpectationConfig, SAA, expected_cost,
                     instance_blocks, pathwise_gradient, scenario_costs)
from .model import Allocation, Instance, Pair, RegimeTag, Stage2, classify_regime, normalize
from .recourse import FirstStage

log = logging.getLogger(__name__)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class Method(str, enum.Enum):
    ANALYTIC = "AnalyticFOC"
    LOW = "BoundaryLow"
    HIGH = "BoundaryHigh"
    GLOBAL = "GlobalSearch"


@dataclass(frozen=True)
class FocSpec:
    """One optimality equation: ``residual(x)`` is LHS - RHS on ``[0, upper]``."""

    case_id: str
    task: str
    residual: Callable[[float], float]
    upper: float


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    Attributes:
        expectation: how expected costs are computed, for the reported
            breakdown and the global-search objective.
        tol: bisection tolerance on x.
        residual_nodes: midpoint nodes for the productivity expectation
            inside residuals.
        grid: global-search points per axis.
        refine: golden-section tolerance for global refinement.
        cross_check: compare analytic answers with a coarse global search.
        check_grid, check_samples: size of that coarse search.
    """

    expectation: ExpectationConfig
    tol: float = 1e-8
    residual_nodes: int = 512
    grid: int = 41
    refine: float = 1.0
    cross_check: bool = True
    check_grid: int = 21
    check_samples: int = 20_000

    @classmethod
    def saa(cls, seed: int, n: int = 200_000, **kw) -> "SolverConfig":
        return cls(ExpectationConfig(SAA(n, seed)), **kw)

    @property
    def seed(self) -> int | None:
        m = self.expectation.method
        return m.seed if isinstance(m, SAA) else None


@dataclass(frozen=True)
class SolveResult:
    x1: FirstStage
    method: Pair
    foc_residual: Pair
    expected: CostBreakdown
    regime: RegimeTag
    diagnostics: dict = field(default_factory=dict, compare=False)


# ---------------------------------------------------------------- residuals

def _delta_nodes(dist, n):
    return dist.midpoints(n)


def foc_case1a(inst: Instance, task: str = "alpha", nodes: int = 512) -> FocSpec:
    """Case-1a equation for ``task`` (in the labelling of ``inst``)."""
    j = inst if task == "alpha" else inst.swapped()
    a, g, r = j.alpha, j.gamma, j.random
    d1 = _delta_nodes(r.delta1_alpha, nodes)
    ratio = a.c1 / a.h

    def residual(x: float) -> float:
        tail = float(np.mean(d1 * r.d_alpha.prob_ge(a.x0 + d1 * x)))
        return tail * float(r.d_gamma.prob_lt(g.x0 - x)) - ratio

    return FocSpec("1a", task, residual, g.x0)


def foc_case1b(inst: Instance, task: str = "alpha", nodes: int = 512) -> FocSpec:
    j = inst if task == "alpha" else inst.swapped()
    a, g, r = j.alpha, j.gamma, j.random
    d1 = _delta_nodes(r.delta1_alpha, nodes)
    ratio = a.c1 / a.c2

    def residual(x: float) -> float:
        tail = float(np.mean(r.d_alpha.prob_ge(a.x0 + d1 * x)))
        return tail * float(r.d_gamma.prob_le(g.x0 - x)) - ratio

    return FocSpec("1b", task, residual, g.x0)


def foc_case2a(inst: Instance, nodes: int = 512) -> FocSpec:
    """Case-2a equation for the gamma task (``h_alpha <= h_gamma`` labelling)."""
    a, g, r = inst.alpha, inst.gamma, inst.random
    d1 = _delta_nodes(r.delta1_gamma, nodes)

    def residual(x: float) -> float:
        tail_g = r.d_gamma.prob_gt(g.x0 + d1 * x)
        gain = float(np.mean(d1 * g.h * tail_g))
        loss = a.h * float(r.d_alpha.prob_gt(a.x0 - x)) * float(np.mean(tail_g))
        return gain - loss - g.c1

    return FocSpec("2a", "gamma", residual, a.x0)


def foc_case2b(inst: Instance, nodes: int = 512) -> FocSpec:
    """Case-2b equation for the gamma task.

    The middle term is ``E[d1*h_g - h_a ; ...]``: moving one more alpha worker
    to gamma gains ``d1*h_g`` and loses ``h_a`` when both tasks are short.
    """
    a, g, r = inst.alpha, inst.gamma, inst.random
    d1 = _delta_nodes(r.delta1_gamma, nodes)

    def residual(x: float) -> float:
        p_a_ok = float(r.d_alpha.prob_le(a.x0 - x))
        p_a_short = float(r.d_alpha.prob_gt(a.x0 - x))
        online = g.c2 * p_a_ok * float(np.mean(r.d_gamma.prob_ge(g.x0 + d1 * x)))
        shift = p_a_short * float(np.mean((d1 * g.h - a.h) * r.d_gamma.prob_gt(g.x0 + d1 * x)))
        return online + shift - g.c1

    return FocSpec("2b", "gamma", residual, a.x0)


# ---------------------------------------------------------------- bisection

def bisect_foc(foc: FocSpec, tol: float = 1e-8, probe: int = 65):
    """Smallest root of a nonincreasing residual.

    Returns ``(x, method, residual, diagnostics)``. Boundary solutions are
    reported when the residual is already <= 0 at 0 or still > 0 at the
    upper end.
    """
    r = foc.residual
    grid = np.linspace(0.0, foc.upper, probe)
    vals = np.array([r(float(x)) for x in grid])
    scale = max(1.0, float(np.max(np.abs(vals))))
    monotone = bool(np.all(np.diff(vals) <= 1e-9 * scale))
    diag = {"case": foc.case_id, "task": foc.task, "monotone": monotone}
    r0 = vals[0]
    if r0 <= 0.0:
        return 0.0, Method.LOW, float(r0), diag
    ru = vals[-1]
    if ru > 0.0:
        return float(foc.upper), Method.HIGH, float(ru), diag
    # bracket from the probe grid, then bisect keeping r(lo) > 0 >= r(hi)
    k = int(np.argmax(vals <= 0.0))
    lo, hi = float(grid[k - 1]), float(grid[k])
    steps = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if r(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        steps += 1
    r_hi = r(hi)
    diag.update(bracket=(lo, hi), residual_at_lo=float(r(lo)), steps=steps)
    return hi, Method.ANALYTIC, float(r_hi), diag


# ---------------------------------------------------------------- dispatch

def _task_foc(norm: Instance, tag: RegimeTag, task: str, nodes: int) -> FocSpec | None:
    """The optimality equation for ``task`` on the normalized instance, if one applies."""
    stage = tag.stage2_alpha if task == "alpha" else tag.stage2_gamma
    consistent = tag.consistent_tasks.alpha if task == "alpha" else tag.consistent_tasks.gamma
    if tag.is_mixed:
        return None
    if tag.allocation_case is Allocation.CASE1 or task == "alpha":
        if stage is Stage2.NEVER:
            return foc_case1a(norm, task, nodes)
        if consistent:
            return foc_case1b(norm, task, nodes)
        return None
    # gamma task in Case 2: both tasks must agree on online training
    if tag.stage2_alpha is Stage2.NEVER and tag.stage2_gamma is Stage2.NEVER:
        return foc_case2a(norm, nodes)
    if (tag.stage2_alpha is Stage2.ALWAYS and tag.stage2_gamma is Stage2.ALWAYS
            and tag.consistent_delta):
        return foc_case2b(norm, nodes)
    return None


def _denormalize(x: tuple, swapped: bool) -> tuple:
    return (x[1], x[0]) if swapped else x


def _analytic(inst: Instance, cfg: SolverConfig, focs: tuple[FocSpec, FocSpec],
              tag: RegimeTag, swapped: bool) -> SolveResult:
    xs, methods, resid, diags = [], [], [], []
    for foc in focs:
        x, m, res, d = bisect_foc(foc, cfg.tol)
        xs.append(x)
        methods.append(m)
        resid.append(res)
        diags.append(d)
    xa, xg = _denormalize(tuple(xs), swapped)
    x1 = FirstStage(xa, xg)
    return SolveResult(
        x1,
        Pair(*_denormalize(tuple(methods), swapped)),
        Pair(*_denormalize(tuple(resid), swapped)),
        expected_cost(inst, x1, cfg.expectation),
        tag,
        {"foc": Pair(*_denormalize(tuple(diags), swapped))},
    )


def _require(tag: RegimeTag, alloc: Allocation, stage: Stage2, consistent: bool, name: str) -> None:
    ok = (tag.allocation_case is alloc and tag.stage2_alpha is stage
          and tag.stage2_gamma is stage and (tag.consistent_delta or not consistent))
    if not ok:
        raise RegimeError(f"{name} needs a {alloc.value}/{stage.value} instance"
                          + (" with delta1 == delta2" if consistent else "")
                          + f"; regime is {tag.label}")


def _solve_case(inst: Instance, cfg: SolverConfig, alloc, stage, consistent, name, builders):
    tag = classify_regime(inst)
    _require(tag, alloc, stage, consistent, name)
    norm, swapped = normalize(inst)
    focs = tuple(b(norm, cfg.residual_nodes) for b in builders)
    return _analytic(inst, cfg, focs, tag, swapped)


def solve_case1a(inst: Instance, cfg: SolverConfig) -> SolveResult:
    return _solve_case(inst, cfg, Allocation.CASE1, Stage2.NEVER, False, "solve_case1a",
                       (lambda n, k: foc_case1a(n, "alpha", k), lambda n, k: foc_case1a(n, "gamma", k)))


def solve_case1b_consistent(inst: Instance, cfg: SolverConfig) -> SolveResult:
    return _solve_case(inst, cfg, Allocation.CASE1, Stage2.ALWAYS, True, "solve_case1b_consistent",
                       (lambda n, k: foc_case1b(n, "alpha", k), lambda n, k: foc_case1b(n, "gamma", k)))


def solve_case2a(inst: Instance, cfg: SolverConfig) -> SolveResult:
    return _solve_case(inst, cfg, Allocation.CASE2, Stage2.NEVER, False, "solve_case2a",
                       (lambda n, k: foc_case1a(n, "alpha", k), foc_case2a))


def solve_case2b_consistent(inst: Instance, cfg: SolverConfig) -> SolveResult:
    return _solve_case(inst, cfg, Allocation.CASE2, Stage2.ALWAYS, True, "solve_case2b_consistent",
                       (lambda n, k: foc_case1b(n, "alpha", k), foc_case2b))


# ---------------------------------------------------------------- global search

def global_evaluator(tag: RegimeTag) -> Evaluator:
    """Oracle when no single formula table covers every scenario."""
    split = (tag.allocation_case is not Allocation.CASE1
             and tag.stage2_alpha is not tag.stage2_gamma)
    return Evaluator.ORACLE if tag.is_mixed or split else Evaluator.CLOSED_FORM


class _Objective:
    """Expected total cost over a fixed scenario set (common random numbers)."""

    def __init__(self, inst: Instance, ecfg: ExpectationConfig):
        self.inst = inst
        self.evaluator = ecfg.evaluator
        self.blocks = list(instance_blocks(inst, ecfg.method))
        self.count = sum(len(b) for b in self.blocks)
        self.calls = 0

    def recourse(self, xa: float, xg: float) -> float:
        self.calls += 1
        x1 = FirstStage(xa, xg)
        total = 0.0
        for b in self.blocks:
            total += float(np.sum(scenario_costs(self.inst, x1, b, self.evaluator)[0]))
        return total / self.count

    def __call__(self, xa: float, xg: float) -> float:
        return self.inst.alpha.c1 * xa + self.inst.gamma.c1 * xg + self.recourse(xa, xg)

    def per_scenario(self, xa: float, xg: float) -> np.ndarray:
        x1 = FirstStage(xa, xg)
        parts = [scenario_costs(self.inst, x1, b, self.evaluator)[0] for b in self.blocks]
        return self.inst.alpha.c1 * xa + self.inst.gamma.c1 * xg + np.concatenate(parts)


def _surface(obj: _Objective, xs_a: np.ndarray, xs_g: np.ndarray):
    """Objective on the lattice, built from axis evaluations when the recourse separates.

    The recourse cost satisfies v(a, b) + v(0, 0) = v(a, 0) + v(0, b)
    scenario by scenario; this is checked at a few off-axis lattice points
    before it is relied on, with a full lattice evaluation as the fallback.
    """
    inst = obj.inst
    base = obj.recourse(0.0, 0.0)
    ra = np.array([obj.recourse(float(x), 0.0) for x in xs_a])
    rg = np.array([obj.recourse(0.0, float(y)) for y in xs_g])
    first = inst.alpha.c1 * xs_a[:, None] + inst.gamma.c1 * xs_g[None, :]
    surf = first + ra[:, None] + rg[None, :] - base
    na, ng = len(xs_a), len(xs_g)
    probes = {(na - 1, ng - 1), (na // 2, ng // 2), (na // 3, (2 * ng) // 3)}
    i, j = np.unravel_index(int(np.argmin(surf)), surf.shape)
    probes.add((int(i), int(j)))
    scale = max(1.0, float(np.max(np.abs(surf))))
    separable = all(abs(obj(float(xs_a[p]), float(xs_g[q])) - surf[p, q]) <= 1e-9 * scale
                    for p, q in sorted(probes))
    if not separable:
        surf = np.array([[obj(float(a), float(b)) for b in xs_g] for a in xs_a])
    return surf, separable


def _golden(f: Callable[[float], float], lo: float, hi: float, tol: float):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _lattice(upper: float, n: int) -> np.ndarray:
    return np.linspace(0.0, upper, n) if upper > 0 else np.zeros(1)


def global_search(inst: Instance, ecfg: ExpectationConfig, grid: int, refine: float | None):
    """Lattice search plus per-coordinate golden-section refinement.

    Returns ``(x1, objective value, diagnostics)``.
    """
    obj = _Objective(inst, ecfg)
    xs_a = _lattice(inst.gamma.x0, grid)
    xs_g = _lattice(inst.alpha.x0, grid)
    surf, separable = _surface(obj, xs_a, xs_g)
    i, j = np.unravel_index(int(np.argmin(surf)), surf.shape)
    best = (float(xs_a[i]), float(xs_g[j]))
    best_val = float(surf[i, j])
    trace = [("grid", best, best_val)]
    if refine is not None and len(xs_a) > 1 and len(xs_g) > 1:
        half = (xs_a[1] - xs_a[0], xs_g[1] - xs_g[0])
        for _ in range(3):
            moved = 0.0
            for k, upper in ((0, inst.gamma.x0), (1, inst.alpha.x0)):
                lo = max(0.0, best[k] - half[k])
                hi = min(upper, best[k] + half[k])
                if k == 0:
                    x, v = _golden(lambda t: obj(t, best[1]), lo, hi, refine)
                    cand = (x, best[1])
                else:
                    x, v = _golden(lambda t: obj(best[0], t), lo, hi, refine)
                    cand = (best[0], x)
                if v < best_val:
                    moved = max(moved, abs(x - best[k]))
                    best, best_val = cand, v
                    trace.append(("refine", best, best_val))
            if moved < refine:
                break
            half = (max(10 * refine, half[0] / 4), max(10 * refine, half[1] / 4))
    diag = {
        "grid_alpha": xs_a, "grid_gamma": xs_g, "surface": surf,
        "separable": separable, "evaluator": Evaluator(ecfg.evaluator).value,
        "evaluations": obj.calls, "trace": trace,
    }
    return FirstStage(float(best[0]), float(best[1])), float(best_val), diag


def solve_global(inst: Instance, cfg: SolverConfig, grid: int | None = None,
                 refine: float | None = None) -> SolveResult:
    tag = classify_regime(inst)
    ecfg = cfg.expectation.with_evaluator(global_evaluator(tag))
    x1, _, diag = global_search(inst, ecfg, grid or cfg.grid, cfg.refine if refine is None else refine)
    expected = expected_cost(inst, x1, ecfg)
    grad = pathwise_gradient(inst, x1, ecfg) if ecfg.evaluator is Evaluator.CLOSED_FORM else None
    resid = Pair(*(grad if grad is not None else (math.nan, math.nan)))
    return SolveResult(x1, Pair(Method.GLOBAL, Method.GLOBAL), resid, expected, tag, diag)


def _cross_check(inst: Instance, cfg: SolverConfig, tag: RegimeTag, x1: FirstStage) -> dict:
    seed = cfg.seed if cfg.seed is not None else 0
    ecfg = ExpectationConfig(SAA(cfg.check_samples, seed), global_evaluator(tag))
    g_x1, g_val, _ = global_search(inst, ecfg, cfg.check_grid, None)
    obj = _Objective(inst, ecfg)
    diff = obj.per_scenario(*x1.pair) - obj.per_scenario(*g_x1.pair)
    gap = float(np.mean(diff))
    se = float(np.std(diff, ddof=1) / math.sqrt(len(diff))) if len(diff) > 1 else 0.0
    scale = max(1.0, abs(g_val))
    better = gap > max(3.0 * se, 1e-9 * scale)
    if better:
        log.warning("coarse global search beat the analytic solution by %.6g (se %.3g)", gap, se)
    return {"global_x1": g_x1, "analytic_minus_global": gap, "stderr": se, "global_better": better}


def solve(inst: Instance, cfg: SolverConfig) -> SolveResult:
    """Dispatch on the regime: analytic equations where they apply, global search otherwise."""
    tag = classify_regime(inst)
    norm, swapped = normalize(inst)
    focs = (_task_foc(norm, tag, "alpha", cfg.residual_nodes),
            _task_foc(norm, tag, "gamma", cfg.residual_nodes))
    result = None
    if None not in focs:
        result = _analytic(inst, cfg, focs, tag, swapped)
        if not all(d["monotone"] for d in result.diagnostics["foc"]):
            result = None
    if result is None:
        return solve_global(inst, cfg)
    if cfg.cross_check:
        result.diagnostics["cross_check"] = _cross_check(inst, cfg, tag, result.x1)
    return result
