"""Problem data, distributions, scenario sampling and regime classification.

Two tasks, ``alpha`` and ``gamma``, each start with a dedicated workforce
``x0``. Before demand is known the planner cross-trains ``x1_alpha`` workers
out of the gamma pool to also serve alpha (and ``x1_gamma`` the other way) at
unit cost ``c1``. After demand and productivities are revealed, idle untrained
workers can be trained online at cost ``c2``; unmet demand costs ``h``.

Randomness
----------
A scenario is the tuple ``(d_alpha, d_gamma, delta1, delta2)``. Every
component is independent, and each has its own child stream spawned from
``numpy.random.SeedSequence(seed)`` in the fixed order

    d_alpha, d_gamma, delta1_alpha, delta1_gamma, delta2_alpha, delta2_gamma

using the PCG64 bit generator. A uniform draw is ``lo + (hi - lo) * u`` with
``u = Generator.random()``. A degenerate component consumes no draws.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError

TASKS = ("alpha", "gamma")
COMPONENTS = ("d_alpha", "d_gamma", "delta1_alpha", "delta1_gamma", "delta2_alpha", "delta2_gamma")


class Pair(NamedTuple):
    """A value for each task, always in (alpha, gamma) order."""

    alpha: object
    gamma: object

    def swapped(self) -> "Pair":
        return Pair(self.gamma, self.alpha)


@dataclass(frozen=True)
class Distribution:
    """Degenerate or uniform marginal.

    Use the :meth:`degenerate` and :meth:`uniform` constructors.
    """

    kind: str
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if self.kind not in ("degenerate", "uniform"):
            raise ConfigError(f"unknown distribution kind {self.kind!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ConfigError("distribution parameters must be finite")
        if self.kind == "degenerate" and self.lo != self.hi:
            raise ConfigError("degenerate distribution needs lo == hi")
        if self.kind == "uniform" and not self.lo < self.hi:
            raise ConfigError(f"uniform needs lo < hi, got ({self.lo}, {self.hi})")

    @classmethod
    def degenerate(cls, value: float) -> "Distribution":
        return cls("degenerate", float(value), float(value))

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "Distribution":
        return cls("uniform", float(lo), float(hi))

    @classmethod
    def centered(cls, mean: float, width: float) -> "Distribution":
        """Uniform of the given width around ``mean``; degenerate at width 0."""
        if width == 0:
            return cls.degenerate(mean)
        return cls.uniform(mean - width / 2.0, mean + width / 2.0)

    @property
    def is_degenerate(self) -> bool:
        return self.kind == "degenerate"

    @property
    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __str__(self) -> str:
        if self.is_degenerate:
            return f"degenerate {self.lo!r}"
        return f"uniform {self.lo!r} {self.hi!r}"

    # Probabilities. Strict and non-strict versions differ only for the
    # degenerate kind, but the optimality equations care about which is which.
    def prob_le(self, t):
        t = np.asarray(t, dtype=float)
        if self.is_degenerate:
            return (t >= self.lo).astype(float)
        return np.clip((t - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def prob_lt(self, t):
        t = np.asarray(t, dtype=float)
        if self.is_degenerate:
            return (t > self.lo).astype(float)
        return np.clip((t - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def prob_ge(self, t):
        return 1.0 - self.prob_lt(t)

    def prob_gt(self, t):
        return 1.0 - self.prob_le(t)

    def midpoints(self, n: int) -> np.ndarray:
        """Midpoint-rule nodes, equally weighted. One node if degenerate."""
        if self.is_degenerate:
            return np.array([self.lo])
        return self.lo + (self.hi - self.lo) * (np.arange(n) + 0.5) / n

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.is_degenerate:
            return np.full(n, self.lo)
        return self.lo + (self.hi - self.lo) * rng.random(n)


@dataclass(frozen=True)
class TaskParams:
    """Deterministic data for one task.

    Attributes:
        x0: initial dedicated workforce.
        c1: cost per unit cross-trained before demand is known.
        c2: cost per unit trained online after demand is known.
        h: cost per unit of lost demand.
    """

    x0: float
    c1: float
    c2: float
    h: float

    def __post_init__(self) -> None:
        for name in ("x0", "c1", "c2", "h"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ConfigError(f"{name} must be finite, got {v}")
        if self.x0 < 0:
            raise ConfigError(f"x0 must be nonnegative, got {self.x0}")
        for name in ("c1", "c2", "h"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class RandomSpec:
    """Independent marginals for demand and productivity factors.

    ``consistent=True`` declares ``delta2 == delta1`` samplewise for both
    tasks; the ``delta2_*`` marginals must then equal ``delta1_*``.
    """

    d_alpha: Distribution
    d_gamma: Distribution
    delta1_alpha: Distribution
    delta1_gamma: Distribution
    delta2_alpha: Distribution
    delta2_gamma: Distribution
    consistent: bool = False

    def __post_init__(self) -> None:
        for name in ("d_alpha", "d_gamma"):
            if getattr(self, name).lo < 0:
                raise ConfigError(f"{name} support must lie in [0, inf)")
        for name in COMPONENTS[2:]:
            d = getattr(self, name)
            if d.lo <= 0 or d.hi > 1:
                raise ConfigError(f"{name} support must lie in (0, 1], got [{d.lo}, {d.hi}]")
        if self.consistent and (
            self.delta1_alpha != self.delta2_alpha or self.delta1_gamma != self.delta2_gamma
        ):
            raise ConfigError("consistent=true requires delta2 marginals equal to delta1")

    def component(self, name: str) -> Distribution:
        return getattr(self, name)

    def task_consistent(self, task: str) -> bool:
        """Whether delta1 == delta2 almost surely for ``task``."""
        d1 = getattr(self, f"delta1_{task}")
        d2 = getattr(self, f"delta2_{task}")
        return self.consistent or (d1.is_degenerate and d1 == d2)

    def swapped(self) -> "RandomSpec":
        return RandomSpec(
            self.d_gamma, self.d_alpha,
            self.delta1_gamma, self.delta1_alpha,
            self.delta2_gamma, self.delta2_alpha,
            self.consistent,
        )


@dataclass(frozen=True)
class Instance:
    alpha: TaskParams
    gamma: TaskParams
    random: RandomSpec

    def task(self, name: str) -> TaskParams:
        return getattr(self, name)

    def swapped(self) -> "Instance":
        """Relabel alpha as gamma and vice versa."""
        return Instance(self.gamma, self.alpha, self.random.swapped())


def normalize(inst: Instance) -> tuple[Instance, bool]:
    """Relabel tasks so that ``h_alpha <= h_gamma``; report whether swapped."""
    if inst.alpha.h > inst.gamma.h:
        return inst.swapped(), True
    return inst, False


# ---------------------------------------------------------------- overrides

_TASK_FIELDS = ("x0", "c1", "c2", "h")


def with_overrides(inst: Instance, **values: float) -> Instance:
    """Return a copy of ``inst`` with selected parameters replaced.

    Keys are task fields (``h``, ``c2`` ...) applied to both tasks, or
    suffixed with ``_alpha``/``_gamma`` for one task. ``delta1``/``delta2``
    (optionally suffixed) set degenerate productivity factors. Distribution
    objects may be passed for any ``RandomSpec`` component name.
    """
    tasks = {t: {} for t in TASKS}
    rnd: dict[str, object] = {}
    for key, val in values.items():
        base, targets = key, TASKS
        for t in TASKS:
            if key.endswith("_" + t):
                base, targets = key[: -len(t) - 1], (t,)
        if base in _TASK_FIELDS:
            for t in targets:
                tasks[t][base] = float(val)
        elif base in ("delta1", "delta2", "d"):
            dist = val if isinstance(val, Distribution) else Distribution.degenerate(val)
            for t in targets:
                rnd[f"{base}_{t}"] = dist
        elif key == "consistent":
            rnd["consistent"] = bool(val)
        else:
            raise ConfigError(f"unknown override {key!r}")
    spec = inst.random
    if rnd:
        merged = {n: rnd.get(n, getattr(spec, n)) for n in COMPONENTS}
        if "consistent" in rnd:
            merged["consistent"] = rnd["consistent"]
        else:
            # keep a declared equality only while the marginals still agree
            merged["consistent"] = spec.consistent and all(
                merged[f"delta1_{t}"] == merged[f"delta2_{t}"] for t in TASKS)
        spec = RandomSpec(**merged)
    return Instance(
        replace(inst.alpha, **tasks["alpha"]),
        replace(inst.gamma, **tasks["gamma"]),
        spec,
    )


# ---------------------------------------------------------------- scenarios

@dataclass(frozen=True)
class Scenario:
    d_alpha: float
    d_gamma: float
    delta1: Pair
    delta2: Pair


@dataclass(frozen=True, eq=False)
class ScenarioSet(Sequence):
    """Column-oriented batch of scenarios; indexing yields :class:`Scenario`."""

    d_alpha: np.ndarray
    d_gamma: np.ndarray
    delta1_alpha: np.ndarray
    delta1_gamma: np.ndarray
    delta2_alpha: np.ndarray
    delta2_gamma: np.ndarray

    def __len__(self) -> int:
        return len(self.d_alpha)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return ScenarioSet(*(c[i] for c in self.columns()))
        return Scenario(
            float(self.d_alpha[i]), float(self.d_gamma[i]),
            Pair(float(self.delta1_alpha[i]), float(self.delta1_gamma[i])),
            Pair(float(self.delta2_alpha[i]), float(self.delta2_gamma[i])),
        )

    def __iter__(self) -> Iterator[Scenario]:
        for i in range(len(self)):
            yield self[i]

    def columns(self) -> tuple[np.ndarray, ...]:
        return (self.d_alpha, self.d_gamma, self.delta1_alpha,
                self.delta1_gamma, self.delta2_alpha, self.delta2_gamma)

    def swapped(self) -> "ScenarioSet":
        return ScenarioSet(self.d_gamma, self.d_alpha, self.delta1_gamma,
                           self.delta1_alpha, self.delta2_gamma, self.delta2_alpha)

    @classmethod
    def of(cls, scenarios: Sequence[Scenario]) -> "ScenarioSet":
        if isinstance(scenarios, ScenarioSet):
            return scenarios
        if isinstance(scenarios, Scenario):
            scenarios = [scenarios]
        cols = [[s.d_alpha, s.d_gamma, s.delta1[0], s.delta1[1], s.delta2[0], s.delta2[1]]
                for s in scenarios]
        arr = np.asarray(cols, dtype=float).reshape(-1, 6)
        return cls(*(np.ascontiguousarray(arr[:, k]) for k in range(6)))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=16)
def sample(spec: RandomSpec, seed: int, n: int) -> ScenarioSet:
    """Draw ``n`` independent scenarios; bit-identical for equal ``(seed, n)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    streams = np.random.SeedSequence(int(seed)).spawn(len(COMPONENTS))
    cols = {}
    for name, ss in zip(COMPONENTS, streams):
        cols[name] = spec.component(name).draw(np.random.Generator(np.random.PCG64(ss)), n)
    if spec.consistent:
        cols["delta2_alpha"] = cols["delta1_alpha"].copy()
        cols["delta2_gamma"] = cols["delta1_gamma"].copy()
    return ScenarioSet(*(_frozen(cols[c]) for c in COMPONENTS))


# ---------------------------------------------------------------- regimes

class Allocation(str, enum.Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"
    MIXED = "Mixed"


class Stage2(str, enum.Enum):
    NEVER = "NeverTrain"
    ALWAYS = "AlwaysTrain"
    MIXED = "Mixed"


@dataclass(frozen=True)
class RegimeTag:
    """Regime of an instance, stated for the normalized labelling.

    ``swapped`` records whether the tasks were relabelled so that
    ``h_alpha <= h_gamma``; all other fields refer to the relabelled tasks.
    """

    allocation_case: Allocation
    stage2_alpha: Stage2
    stage2_gamma: Stage2
    consistent_delta: bool
    swapped: bool = False
    consistent_tasks: Pair = field(default=Pair(False, False))

    @property
    def is_mixed(self) -> bool:
        return Allocation.MIXED is self.allocation_case or Stage2.MIXED in (
            self.stage2_alpha, self.stage2_gamma)

    @property
    def label(self) -> str:
        """Short tag such as ``1a``, ``2b``, ``1-mixed-train`` or ``mixed``."""
        if self.is_mixed:
            return "mixed"
        case = "1" if self.allocation_case is Allocation.CASE1 else "2"
        if self.stage2_alpha is self.stage2_gamma:
            return case + ("a" if self.stage2_alpha is Stage2.NEVER else "b")
        return case + "-split"


def classify_regime(inst: Instance) -> RegimeTag:
    norm, swapped = normalize(inst)
    a, g, r = norm.alpha, norm.gamma, norm.random
    # Case 1 iff h_a >= delta1_g * h_g over the whole support of delta1_g.
    d = r.delta1_gamma
    if a.h >= d.hi * g.h:
        alloc = Allocation.CASE1
    elif a.h < d.lo * g.h:
        alloc = Allocation.CASE2
    else:
        alloc = Allocation.MIXED

    def stage2(t: TaskParams, d2: Distribution) -> Stage2:
        # AlwaysTrain iff c2 <= delta2 * h everywhere.
        if t.c2 <= d2.lo * t.h:
            return Stage2.ALWAYS
        if t.c2 > d2.hi * t.h:
            return Stage2.NEVER
        return Stage2.MIXED

    cons = Pair(r.task_consistent("alpha"), r.task_consistent("gamma"))
    return RegimeTag(
        alloc,
        stage2(a, r.delta2_alpha),
        stage2(g, r.delta2_gamma),
        bool(cons.alpha and cons.gamma),
        swapped,
        cons,
    )
