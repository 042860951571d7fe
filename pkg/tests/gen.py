"""Instance builders shared by the tests."""

from __future__ import annotations

import numpy as np

from crosstrain import Distribution, Instance, RandomSpec, TaskParams


def _dist(v):
    return v if isinstance(v, Distribution) else Distribution.degenerate(v)


def make_instance(x0=(54000, 54000), c1=(2800, 2800), c2=(4000, 4000), h=(3500, 3500),
                  d_alpha=Distribution.uniform(55000, 65000),
                  d_gamma=Distribution.uniform(20000, 60000),
                  delta1=(0.9, 0.9), delta2=(0.9, 0.9), consistent=False) -> Instance:
    spec = RandomSpec(_dist(d_alpha), _dist(d_gamma), _dist(delta1[0]), _dist(delta1[1]),
                      _dist(delta2[0]), _dist(delta2[1]), consistent)
    return Instance(TaskParams(x0[0], c1[0], c2[0], h[0]),
                    TaskParams(x0[1], c1[1], c2[1], h[1]), spec)


def _productivity(rng, uniform: bool, lo=0.3) -> Distribution:
    if uniform and rng.random() < 0.7:
        a = rng.uniform(lo, 0.95)
        return Distribution.uniform(a, rng.uniform(a + 0.02, 1.0))
    return Distribution.degenerate(rng.uniform(lo, 1.0))


def _demand(rng, x0: float, uniform=True) -> Distribution:
    mean = x0 * rng.uniform(0.6, 1.4)
    if not uniform:
        return Distribution.degenerate(mean)
    return Distribution.centered(mean, mean * rng.uniform(0.05, 1.0))


def random_instance(rng: np.random.Generator, allocation="case1", stage2=("never", "never"),
                    consistent=False, uniform_delta=True, uniform_demand=True,
                    relabel=True) -> Instance:
    """Random instance whose regime is fixed by construction.

    ``stage2`` entries are ``never``, ``always`` or ``mixed`` (a uniform online
    productivity straddling the threshold). Tasks are built in the
    ``h_alpha <= h_gamma`` labelling and swapped at random when ``relabel``.
    """
    x0 = rng.uniform(1000, 60000, 2)
    d1 = [_productivity(rng, uniform_delta) for _ in range(2)]
    if consistent:
        d2 = list(d1)
    else:
        d2 = []
        for s in stage2:
            if s == "mixed":
                a = rng.uniform(0.3, 0.8)
                d2.append(Distribution.uniform(a, rng.uniform(a + 0.05, 1.0)))
            else:
                d2.append(_productivity(rng, uniform_delta))
    h_g = rng.uniform(2000, 10000)
    if allocation == "case1":
        h_a = h_g * rng.uniform(d1[1].hi, 1.0)
    else:
        h_a = h_g * d1[1].lo * rng.uniform(0.2, 0.99)
    h = (h_a, h_g)
    c2 = []
    for k, s in enumerate(stage2):
        if s == "never":
            c2.append(h[k] * d2[k].hi * rng.uniform(1.01, 2.0))
        elif s == "always":
            c2.append(h[k] * d2[k].lo * rng.uniform(0.2, 1.0))
        else:
            c2.append(h[k] * rng.uniform(d2[k].lo, d2[k].hi))
    c1 = [h[k] * rng.uniform(0.05, 0.9) for k in range(2)]
    inst = make_instance(
        x0=tuple(x0), c1=tuple(c1), c2=tuple(c2), h=h,
        d_alpha=_demand(rng, x0[0], uniform_demand), d_gamma=_demand(rng, x0[1], uniform_demand),
        delta1=tuple(d1), delta2=tuple(d2), consistent=consistent)
    if relabel and rng.random() < 0.5:
        inst = inst.swapped()
    return inst
