"""Expected total cost ``c1_a*x1_a + c1_g*x1_g + E[v(x1, xi)]`` and its breakdown.

Two ways to take the expectation:

* :class:`SAA` averages over ``n`` scenarios drawn with :func:`model.sample`.
  The same ``(seed, n)`` gives the same scenarios for every ``x1``, so
  differences between candidate levels are free of sampling noise (common
  random numbers).
* :class:`Quadrature` applies the midpoint rule on a tensor grid over every
  nondegenerate axis. With uniform marginals all nodes carry equal weight,
  so this is the mean over a deterministic node set. The integrand is
  piecewise linear with kinks crossing the axes, which suits the midpoint
  rule better than Gauss rules.

The demand grid is evaluated in one block per combination of productivity
nodes, which keeps memory at ``nodes_per_dim**2`` scenarios.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterator, NamedTuple

import numpy as np

from . import _kernels as K
from .errors import FeasibilityError, RegimeError
from .model import TASKS, Distribution, Instance, RandomSpec, ScenarioSet, classify_regime, normalize, sample
from .recourse import FirstStage, kernel_params


class Evaluator(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    ORACLE = "oracle"


@dataclass(frozen=True)
class SAA:
    n: int
    seed: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("SAA needs n >= 1")


@dataclass(frozen=True)
class Quadrature:
    """Midpoint tensor rule.

    Attributes:
        nodes_per_dim: nodes on each nondegenerate demand axis.
        delta_nodes: nodes on each nondegenerate productivity axis.
        max_nodes: refuse grids larger than this many scenarios.
    """

    nodes_per_dim: int = 512
    delta_nodes: int = 16
    max_nodes: int = 2 ** 27

    def __post_init__(self) -> None:
        if self.nodes_per_dim < 2 or self.delta_nodes < 2:
            raise ValueError("quadrature needs at least 2 nodes per axis")


@dataclass(frozen=True)
class ExpectationConfig:
    method: SAA | Quadrature
    evaluator: Evaluator = Evaluator.CLOSED_FORM

    def with_evaluator(self, evaluator: Evaluator) -> "ExpectationConfig":
        return ExpectationConfig(self.method, Evaluator(evaluator))


@dataclass(frozen=True)
class CostBreakdown:
    """Expected cost split; ``total`` is the sum of the three parts.

    ``stderr`` is the SAA standard error of ``total`` (0 for quadrature).
    """

    first_stage: float
    second_stage_training: float
    opportunity: float
    total: float
    stderr: float = 0.0

    @property
    def second_stage(self) -> float:
        return self.second_stage_training + self.opportunity


class GradientFD(NamedTuple):
    alpha: float
    gamma: float
    stderr_alpha: float
    stderr_gamma: float
    one_sided_alpha: bool
    one_sided_gamma: bool


# ---------------------------------------------------------------- scenarios

@lru_cache(maxsize=8)
def _demand_grid(d_alpha: Distribution, d_gamma: Distribution, n: int):
    ga, gg = np.meshgrid(d_alpha.midpoints(n), d_gamma.midpoints(n), indexing="ij")
    da = np.ascontiguousarray(ga.ravel())
    dg = np.ascontiguousarray(gg.ravel())
    da.setflags(write=False)
    dg.setflags(write=False)
    return da, dg


def quadrature_size(spec: RandomSpec, q: Quadrature) -> int:
    size = len(spec.d_alpha.midpoints(q.nodes_per_dim)) * len(spec.d_gamma.midpoints(q.nodes_per_dim))
    names = ("delta1_alpha", "delta1_gamma") if spec.consistent else (
        "delta1_alpha", "delta1_gamma", "delta2_alpha", "delta2_gamma")
    for name in names:
        size *= len(spec.component(name).midpoints(q.delta_nodes))
    return size


def scenario_blocks(spec: RandomSpec, method: SAA | Quadrature) -> Iterator[ScenarioSet]:
    """Yield the equally weighted scenario blocks that define the expectation."""
    if isinstance(method, SAA):
        yield sample(spec, method.seed, method.n)
        return
    size = quadrature_size(spec, method)
    if size > method.max_nodes:
        raise ValueError(
            f"quadrature grid has {size} nodes (limit {method.max_nodes}); "
            "reduce nodes or use SAA")
    da, dg = _demand_grid(spec.d_alpha, spec.d_gamma, method.nodes_per_dim)
    m = method.delta_nodes
    d1a = spec.delta1_alpha.midpoints(m)
    d1g = spec.delta1_gamma.midpoints(m)
    if spec.consistent:
        combos = ((a, g, a, g) for a, g in itertools.product(d1a, d1g))
    else:
        combos = itertools.product(d1a, d1g, spec.delta2_alpha.midpoints(m),
                                   spec.delta2_gamma.midpoints(m))
    n = len(da)
    for combo in combos:
        yield ScenarioSet(da, dg, *(np.full(n, v) for v in combo))


def instance_blocks(inst: Instance, method: SAA | Quadrature) -> Iterator[ScenarioSet]:
    """:func:`scenario_blocks` for ``inst``, skipping axes that cannot affect the cost.

    Online productivity only matters through the decision to train. Where
    training never pays on the whole support, the quadrature keeps a single
    node for that axis. SAA draws are left untouched so seeds keep their
    meaning.
    """
    spec = inst.random
    if isinstance(method, Quadrature) and not spec.consistent:
        over = {}
        for t in TASKS:
            p, d2 = inst.task(t), spec.component(f"delta2_{t}")
            if not d2.is_degenerate and p.c2 > d2.hi * p.h:
                over[f"delta2_{t}"] = Distribution.degenerate(d2.hi)
        spec = replace(spec, **over) if over else spec
    return scenario_blocks(spec, method)


# ---------------------------------------------------------------- evaluation

def check_evaluator(inst: Instance, evaluator: Evaluator) -> None:
    if Evaluator(evaluator) is Evaluator.CLOSED_FORM:
        tag = classify_regime(inst)
        if tag.is_mixed:
            raise RegimeError(
                f"regime {tag.label!r} mixes formula tables; use the oracle evaluator")


def scenario_costs(inst: Instance, x1: FirstStage, block: ScenarioSet,
                   evaluator: Evaluator = Evaluator.CLOSED_FORM):
    """Per-scenario recourse cost and online-training spend for one block."""
    n = len(block)
    cost = np.empty(n)
    train = np.empty(n)
    if Evaluator(evaluator) is Evaluator.ORACLE:
        K.oracle_costs(kernel_params(inst), float(x1.x1_alpha), float(x1.x1_gamma),
                       *block.columns(), cost, train)
        return cost, train
    norm, swapped = normalize(inst)
    xa, xg = (x1.x1_gamma, x1.x1_alpha) if swapped else (x1.x1_alpha, x1.x1_gamma)
    cols = block.swapped().columns() if swapped else block.columns()
    bad = K.closed_form_costs(kernel_params(norm), float(xa), float(xg), *cols, cost, train)
    if bad:
        raise RegimeError(
            f"{bad} scenarios have no closed-form table; use the oracle evaluator")
    return cost, train


def expected_cost(inst: Instance, x1: FirstStage, cfg: ExpectationConfig) -> CostBreakdown:
    x1.check(inst)
    check_evaluator(inst, cfg.evaluator)
    first = inst.alpha.c1 * x1.x1_alpha + inst.gamma.c1 * x1.x1_gamma
    total_cost = 0.0
    total_train = 0.0
    count = 0
    stderr = 0.0
    for block in instance_blocks(inst, cfg.method):
        cost, train = scenario_costs(inst, x1, block, cfg.evaluator)
        total_cost += float(np.sum(cost))
        total_train += float(np.sum(train))
        count += len(cost)
        if isinstance(cfg.method, SAA) and len(cost) > 1:
            stderr = float(np.std(cost, ddof=1)) / math.sqrt(len(cost))
    second = total_cost / count
    train_part = total_train / count
    opportunity = max(second - train_part, 0.0)
    return CostBreakdown(first, train_part, opportunity, first + train_part + opportunity, stderr)


def no_crosstraining_cost(inst: Instance, cfg: ExpectationConfig) -> float:
    """Expected cost when nobody is trained in either stage: all shortfall is lost."""
    a, g = inst.alpha, inst.gamma
    total = 0.0
    count = 0
    for block in instance_blocks(inst, cfg.method):
        lost = a.h * np.maximum(block.d_alpha - a.x0, 0.0) + g.h * np.maximum(block.d_gamma - g.x0, 0.0)
        total += float(np.sum(lost))
        count += len(lost)
    return total / count


def cost_gradient_fd(inst: Instance, x1: FirstStage, cfg: ExpectationConfig,
                     step: float | None = None) -> GradientFD:
    """Central differences of expected total cost, one-sided at the box edges.

    ``step`` defaults to ``1e-3 * x0_gamma``. The standard errors are those of
    the paired (common random number) difference quotient; 0 for quadrature.
    """
    x1.check(inst)
    check_evaluator(inst, cfg.evaluator)
    if step is None:
        step = 1e-3 * inst.gamma.x0
    if step <= 0:
        raise ValueError("step must be positive")
    out = []
    for idx, (c1, upper) in enumerate(((inst.alpha.c1, inst.gamma.x0), (inst.gamma.c1, inst.alpha.x0))):
        x = x1.pair[idx]
        hi = min(x + step, upper)
        lo = max(x - step, 0.0)
        if hi <= lo:
            raise FeasibilityError("no room for a finite difference")
        one_sided = hi < x + step or lo > x - step
        p_hi = list(x1.pair)
        p_lo = list(x1.pair)
        p_hi[idx] = hi
        p_lo[idx] = lo
        diff_sum = 0.0
        count = 0
        se = 0.0
        for block in instance_blocks(inst, cfg.method):
            c_hi, _ = scenario_costs(inst, FirstStage(*p_hi), block, cfg.evaluator)
            c_lo, _ = scenario_costs(inst, FirstStage(*p_lo), block, cfg.evaluator)
            d = c_hi - c_lo
            diff_sum += float(np.sum(d))
            count += len(d)
            if isinstance(cfg.method, SAA) and len(d) > 1:
                se = float(np.std(d, ddof=1)) / math.sqrt(len(d)) / (hi - lo)
        out.append((float(c1 + diff_sum / count / (hi - lo)), se, bool(one_sided)))
    (ga, sa, oa), (gg, sg, og) = out
    return GradientFD(ga, gg, sa, sg, oa, og)


def pathwise_gradient(inst: Instance, x1: FirstStage, cfg: ExpectationConfig) -> tuple[float, float]:
    """Derivative of expected total cost from the slope of each region formula.

    The recourse cost is continuous across region boundaries, so the
    derivative of its expectation is the expectation of the per-region slope.
    This is the general stationarity condition behind every optimality
    equation; it is a diagnostic and does not certify optimality where the
    objective is not convex. Closed-form evaluator only.
    """
    from .recourse import closed_form_table

    check_evaluator(inst, Evaluator.CLOSED_FORM)
    norm, swapped = normalize(inst)
    a, g = norm.alpha, norm.gamma
    sum_a = sum_g = 0.0
    count = 0
    for block in instance_blocks(inst, cfg.method):
        out = closed_form_table(inst, x1.pair, block)
        if np.any(out[:, 8] != 0):
            raise RegimeError("scenarios without a closed-form table; no pathwise gradient")
        nb = block.swapped() if swapped else block
        d1a, d1g, d2a, d2g = nb.delta1_alpha, nb.delta1_gamma, nb.delta2_alpha, nb.delta2_gamma
        reg = out[:, 7].astype(int)
        tra = a.c2 <= d2a * a.h
        trg = g.c2 <= d2g * g.h
        in2 = (reg == K.R2A) | (reg == K.R2B)
        in5 = (reg == K.R5A) | (reg == K.R5B)
        slope_a = np.where(
            in2,
            np.where(tra,
                     np.where(reg == K.R2A, -a.c2 * d1a / d2a, -(a.c2 + a.h * (d1a - d2a))),
                     -a.h * d1a),
            0.0)
        shifted = ((reg == K.R4B) | (reg == K.R6B)) & (a.h < d1g * g.h)
        slope_g = np.where(
            in5,
            np.where(trg,
                     np.where(reg == K.R5A, -g.c2 * d1g / d2g, -(g.c2 + g.h * (d1g - d2g))),
                     -g.h * d1g),
            np.where(shifted, a.h - g.h * d1g, 0.0))
        sum_a += float(np.sum(slope_a))
        sum_g += float(np.sum(slope_g))
        count += len(reg)
    grad = (a.c1 + sum_a / count, g.c1 + sum_g / count)
    return (grad[1], grad[0]) if swapped else grad
