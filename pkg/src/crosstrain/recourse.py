"""Second-stage recourse: region partition, closed form and an independent oracle.

Given first-stage levels and a realized scenario, the planner assigns the
cross-trained workers, trains idle untrained workers online and loses the
rest. :func:`recourse_closed_form` applies the piecewise formula of the
scenario's demand region; :func:`recourse_oracle` instead minimizes the
second-stage cost directly over the allocation of cross-trained workers and
shares no code with the formulas.

Region labels always refer to the labelling with ``h_alpha <= h_gamma``; when
an instance needs relabelling the label describes the swapped problem.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import FeasibilityError, RegimeError
from .model import Instance, Scenario, ScenarioSet, normalize


class Region(str, enum.Enum):
    O1A = "1a"
    O1B = "1b"
    O1C = "1c"
    O2A = "2a"
    O2B = "2b"
    O3 = "3"
    O4A = "4a"
    O4B = "4b"
    O5A = "5a"
    O5B = "5b"
    O6A = "6a"
    O6B = "6b"

    @property
    def group(self) -> str:
        """Region number without the a/b refinement, e.g. ``"2"``."""
        return self.value[0]


REGIONS = tuple(Region)


@dataclass(frozen=True)
class FirstStage:
    """Cross-training levels chosen before demand is known.

    Attributes:
        x1_alpha: gamma workers trained to also serve alpha (at most x0_gamma).
        x1_gamma: alpha workers trained to also serve gamma (at most x0_alpha).
    """

    x1_alpha: float
    x1_gamma: float

    def check(self, inst: Instance, tol: float = 0.0) -> "FirstStage":
        if not (-tol <= self.x1_alpha <= inst.gamma.x0 + tol):
            raise FeasibilityError(
                f"x1_alpha={self.x1_alpha} outside [0, x0_gamma={inst.gamma.x0}]")
        if not (-tol <= self.x1_gamma <= inst.alpha.x0 + tol):
            raise FeasibilityError(
                f"x1_gamma={self.x1_gamma} outside [0, x0_alpha={inst.alpha.x0}]")
        return self

    def swapped(self) -> "FirstStage":
        return FirstStage(self.x1_gamma, self.x1_alpha)

    @property
    def pair(self) -> tuple[float, float]:
        return (self.x1_alpha, self.x1_gamma)


@dataclass(frozen=True)
class RecourseOutcome:
    """Optimal second-stage action for one scenario.

    ``cost`` equals ``c2_a*stage2_train_alpha + c2_g*stage2_train_gamma +
    h_a*lost_alpha + h_g*lost_gamma``. ``region`` is set by the closed form
    only.
    """

    cost: float
    flexible_to_alpha: float
    flexible_to_gamma: float
    stage2_train_alpha: float
    stage2_train_gamma: float
    lost_alpha: float
    lost_gamma: float
    region: Region | None = None


def kernel_params(inst: Instance) -> np.ndarray:
    a, g = inst.alpha, inst.gamma
    return np.array([a.x0, g.x0, a.c2, g.c2, a.h, g.h], dtype=float)


def _args(inst: Instance, x1: FirstStage, s: Scenario):
    return (*kernel_params(inst), float(x1.x1_alpha), float(x1.x1_gamma),
            float(s.d_alpha), float(s.d_gamma), float(s.delta1[0]), float(s.delta1[1]),
            float(s.delta2[0]), float(s.delta2[1]))


def _normalized(inst: Instance, x1: FirstStage, s: Scenario):
    norm, swapped = normalize(inst)
    if swapped:
        x1 = x1.swapped()
        s = Scenario(s.d_gamma, s.d_alpha, s.delta1.swapped(), s.delta2.swapped())
    return norm, x1, s, swapped


def _outcome(res, swapped: bool, with_region: bool) -> RecourseOutcome:
    cost, ta, tg, la, lg, fa, fg, r, _ = res
    if swapped:
        ta, tg, la, lg, fa, fg = tg, ta, lg, la, fg, fa
    return RecourseOutcome(float(cost), float(fa), float(fg), float(ta), float(tg),
                           float(la), float(lg), REGIONS[r] if with_region else None)


def classify_region(inst: Instance, x1: FirstStage, s: Scenario) -> Region:
    x1.check(inst)
    norm, x1n, sn, _ = _normalized(inst, x1, s)
    args = _args(norm, x1n, sn)
    return REGIONS[K.region_code(args[0], args[1], *args[6:])]


def recourse_closed_form(inst: Instance, x1: FirstStage, s: Scenario) -> RecourseOutcome:
    """Evaluate the region formula for ``s``.

    Raises:
        RegimeError: the scenario is in the second allocation case but only
            one task finds online training worthwhile; no formula covers it.
    """
    x1.check(inst)
    norm, x1n, sn, swapped = _normalized(inst, x1, s)
    res = K.closed_form(*_args(norm, x1n, sn))
    if res[8] != 0:
        raise RegimeError("no closed-form table for this scenario; use recourse_oracle")
    return _outcome(res, swapped, True)


def recourse_oracle(inst: Instance, x1: FirstStage, s: Scenario) -> RecourseOutcome:
    x1.check(inst)
    return _outcome(K.oracle(*_args(inst, x1, s)), False, False)


# ------------------------------------------------------------------ batches

def _broadcast_x1(x1, n):
    xa = np.ascontiguousarray(np.broadcast_to(np.asarray(x1[0], dtype=float), (n,)))
    xg = np.ascontiguousarray(np.broadcast_to(np.asarray(x1[1], dtype=float), (n,)))
    return xa, xg


def closed_form_table(inst: Instance, x1, scenarios) -> np.ndarray:
    """Closed-form outcomes as an ``(n, 9)`` array with columns ``_kernels.COLS``.

    ``x1`` is a pair of scalars or of length-``n`` arrays. Rows reflect the
    normalized labelling, so callers needing alpha/gamma columns for a
    relabelled instance should normalize first. Feasibility is not checked.
    """
    sc = ScenarioSet.of(scenarios)
    norm, swapped = normalize(inst)
    if swapped:
        sc = sc.swapped()
        x1 = (x1[1], x1[0])
    xa, xg = _broadcast_x1(x1, len(sc))
    out = np.empty((len(sc), 9))
    K.closed_form_detail(kernel_params(norm), xa, xg, *sc.columns(), out)
    return out


def oracle_table(inst: Instance, x1, scenarios) -> np.ndarray:
    sc = ScenarioSet.of(scenarios)
    xa, xg = _broadcast_x1(x1, len(sc))
    out = np.empty((len(sc), 9))
    K.oracle_detail(kernel_params(inst), xa, xg, *sc.columns(), out)
    return out
