"""Parameter sweeps and the experiment suite.

A sweep varies one feature of a base instance along an axis, solves every
point with the full dispatch and records the optimal levels and cost
breakdown. Costs can be reported relative to

* ``vs_no_crosstraining``: the expected cost when nobody is trained in
  either stage, at the same axis point;
* ``vs_deterministic_demand``: the optimal total of the same family with the
  swept demand fixed at its mean (width 0).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ConfigError, CrossTrainError
from .expect import no_crosstraining_cost
from .model import TASKS, Distribution, Instance, with_overrides
from .solver import SolverConfig, solve


class SweepKind(str, enum.Enum):
    DELTA2_RATIO = "Delta2Ratio"
    DEMAND_VAR_ALPHA = "DemandVarAlpha"
    DEMAND_VAR_GAMMA = "DemandVarGamma"
    DELTA1_VAR = "Delta1Var"
    DELTA2_VAR = "Delta2Var"


class Normalization(str, enum.Enum):
    NONE = "none"
    NO_CROSSTRAINING = "vs_no_crosstraining"
    DETERMINISTIC_DEMAND = "vs_deterministic_demand"


OUTPUTS = ("x1_alpha", "x1_gamma", "total", "first_stage", "second_stage", "opportunity")
COST_OUTPUTS = ("total", "first_stage", "second_stage", "opportunity")

AXIS_LABELS = {
    SweepKind.DELTA2_RATIO: "delta2_over_delta1",
    SweepKind.DEMAND_VAR_ALPHA: "d_alpha_width",
    SweepKind.DEMAND_VAR_GAMMA: "d_gamma_width",
    SweepKind.DELTA1_VAR: "delta1_width",
    SweepKind.DELTA2_VAR: "delta2_width",
}


def default_axis(kind: SweepKind) -> tuple[float, ...]:
    if kind is SweepKind.DELTA2_RATIO:
        return tuple(round(0.5 + 0.05 * k, 10) for k in range(11))
    if kind in (SweepKind.DEMAND_VAR_ALPHA, SweepKind.DEMAND_VAR_GAMMA):
        return tuple(float(2000 * k) for k in range(21))
    return tuple(round(0.05 * k, 10) for k in range(11))


@dataclass(frozen=True)
class SweepSpec:
    """What to vary and what to report.

    ``axis`` defaults to :func:`default_axis`; ``held`` holds overrides
    applied to the base instance before the sweep (see
    :func:`model.with_overrides`).
    """

    kind: SweepKind
    axis: tuple[float, ...] = ()
    held: Mapping[str, float] = field(default_factory=dict)
    outputs: tuple[str, ...] = OUTPUTS
    normalization: Normalization = Normalization.NONE

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SweepKind(self.kind))
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        axis = tuple(float(v) for v in (self.axis or default_axis(self.kind)))
        if any(b <= a for a, b in zip(axis, axis[1:])):
            raise ConfigError("sweep axis must be strictly increasing")
        object.__setattr__(self, "axis", axis)
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad:
            raise ConfigError(f"unknown outputs {bad}")
        object.__setattr__(self, "outputs", tuple(o for o in OUTPUTS if o in self.outputs))
        if (self.normalization is Normalization.DETERMINISTIC_DEMAND
                and self.kind not in (SweepKind.DEMAND_VAR_ALPHA, SweepKind.DEMAND_VAR_GAMMA)):
            raise ConfigError("vs_deterministic_demand needs a demand-width sweep")

    @property
    def axis_label(self) -> str:
        return AXIS_LABELS[self.kind]


@dataclass(frozen=True, eq=False)
class SweepTable:
    columns: tuple[str, ...]
    rows: list
    spec: SweepSpec | None = None
    title: str = ""

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([r[k] for r in self.rows], dtype=float)


def point_instance(base: Instance, kind: SweepKind, value: float) -> Instance:
    """The instance at one axis point."""
    r = base.random
    if kind is SweepKind.DELTA2_RATIO:
        over = {}
        for t in TASKS:
            d1 = r.component(f"delta1_{t}")
            if not d1.is_degenerate:
                raise ConfigError("Delta2Ratio needs deterministic delta1")
            over[f"delta2_{t}"] = d1.lo * value
        return with_overrides(base, **over)
    if kind is SweepKind.DEMAND_VAR_ALPHA:
        return with_overrides(base, d_alpha=Distribution.centered(r.d_alpha.mean, value))
    if kind is SweepKind.DEMAND_VAR_GAMMA:
        return with_overrides(base, d_gamma=Distribution.centered(r.d_gamma.mean, value))
    name = "delta1" if kind is SweepKind.DELTA1_VAR else "delta2"
    over = {f"{name}_{t}": Distribution.centered(r.component(f"{name}_{t}").mean, value)
            for t in TASKS}
    return with_overrides(base, consistent=False, **over)


def _columns(spec: SweepSpec) -> tuple[str, ...]:
    cols = [spec.axis_label, *spec.outputs, "stderr"]
    if spec.normalization is not Normalization.NONE:
        cols += [f"{o}_ratio" for o in spec.outputs if o in COST_OUTPUTS] + ["normalizer"]
    return tuple(cols + ["regime", "method_alpha", "method_gamma", "status"])


def run_sweep(base: Instance, spec: SweepSpec, cfg: SolverConfig, title: str = "") -> SweepTable:
    """Solve every axis point; failing points are flagged and the sweep continues."""
    base = with_overrides(base, **spec.held) if spec.held else base
    cols = _columns(spec)
    det_total = math.nan
    if spec.normalization is Normalization.DETERMINISTIC_DEMAND:
        det_total = solve(point_instance(base, spec.kind, 0.0), cfg).expected.total
    rows = []
    for value in spec.axis:
        try:
            inst = point_instance(base, spec.kind, value)
            res = solve(inst, cfg)
        except (CrossTrainError, ValueError, FloatingPointError) as exc:
            rows.append(_failed_row(cols, value, exc))
            continue
        e = res.expected
        vals = {
            "x1_alpha": res.x1.x1_alpha, "x1_gamma": res.x1.x1_gamma,
            "total": e.total, "first_stage": e.first_stage,
            "second_stage": e.second_stage_training, "opportunity": e.opportunity,
        }
        row = [value, *(vals[o] for o in spec.outputs), e.stderr]
        if spec.normalization is not Normalization.NONE:
            if spec.normalization is Normalization.NO_CROSSTRAINING:
                div = no_crosstraining_cost(inst, cfg.expectation)
            else:
                div = det_total
            row += [vals[o] / div if div > 0 else math.nan
                    for o in spec.outputs if o in COST_OUTPUTS] + [div]
        status = "ok"
        check = res.diagnostics.get("cross_check")
        if check and check["global_better"]:
            status = "global_better"
        row += [res.regime.label, res.method.alpha.value, res.method.gamma.value, status]
        rows.append(tuple(row))
    return SweepTable(cols, rows, spec, title)


def _failed_row(cols, value, exc) -> tuple:
    msg = f"error: {type(exc).__name__}: {exc}"
    return (value, *([math.nan] * (len(cols) - 5)), "", "", "", msg)


# ---------------------------------------------------------------- experiment suite

@dataclass(frozen=True)
class Experiment:
    name: str
    title: str
    held: Mapping[str, float]
    spec: SweepSpec

    def run(self, base: Instance, cfg: SolverConfig) -> SweepTable:
        return run_sweep(with_overrides(base, **self.held), self.spec, cfg, self.title)


def _suite() -> dict[str, Experiment]:
    K, N = SweepKind, Normalization
    ex = [
        Experiment("ratio_h3500", "Online/offline productivity ratio, c2=2800, h=3500",
                   {"c2": 2800, "h": 3500}, SweepSpec(K.DELTA2_RATIO, normalization=N.NO_CROSSTRAINING)),
        Experiment("ratio_h5000", "Online/offline productivity ratio, c2=2800, h=5000",
                   {"c2": 2800, "h": 5000}, SweepSpec(K.DELTA2_RATIO, normalization=N.NO_CROSSTRAINING)),
        Experiment("demvar_alpha_d09_h8000", "Alpha demand width, delta=0.9, h=8000",
                   {"h": 8000, "delta2": 0.9},
                   SweepSpec(K.DEMAND_VAR_ALPHA, normalization=N.DETERMINISTIC_DEMAND)),
    ]
    for h in (5000, 6000, 7000, 8000):
        ex.append(Experiment(
            f"demvar_alpha_d06_h{h}", f"Alpha demand width, delta2=0.6, c2=5000, h={h}",
            {"h": h, "c2": 5000, "delta2": 0.6},
            SweepSpec(K.DEMAND_VAR_ALPHA, normalization=N.DETERMINISTIC_DEMAND)))
    ex += [
        Experiment("demvar_gamma_d09_h5000", "Gamma demand width, delta=0.9, h=5000",
                   {"h": 5000, "delta2": 0.9},
                   SweepSpec(K.DEMAND_VAR_GAMMA, normalization=N.DETERMINISTIC_DEMAND)),
        Experiment("delta1var_d2_075", "Offline productivity width, mean 0.75, delta2=0.75, h=8000",
                   {"h": 8000, "delta1": 0.75, "delta2": 0.75}, SweepSpec(K.DELTA1_VAR)),
        Experiment("delta1var_d2_065", "Offline productivity width, mean 0.75, delta2=0.65, h=8000",
                   {"h": 8000, "delta1": 0.75, "delta2": 0.65}, SweepSpec(K.DELTA1_VAR)),
        Experiment("delta2var_h8000", "Online productivity width, mean 0.75, delta1=0.75, h=8000",
                   {"h": 8000, "delta1": 0.75, "delta2": 0.75}, SweepSpec(K.DELTA2_VAR)),
        Experiment("delta2var_h6000", "Online productivity width, mean 0.75, delta1=0.75, h=6000",
                   {"h": 6000, "delta1": 0.75, "delta2": 0.75}, SweepSpec(K.DELTA2_VAR)),
    ]
    return {e.name: e for e in ex}


SUITE = _suite()
