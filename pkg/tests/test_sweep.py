import numpy as np
import pytest

from crosstrain import ConfigError, Distribution, ExpectationConfig, Quadrature, SolverConfig, \
    no_crosstraining_cost, with_overrides
from crosstrain.sweep import (SUITE, Normalization, SweepKind, SweepSpec, default_axis, point_instance,
                              run_sweep)

CFG = SolverConfig(ExpectationConfig(Quadrature(64)), cross_check=False)


def test_default_axes():
    assert default_axis(SweepKind.DELTA2_RATIO)[0] == 0.5 and default_axis(SweepKind.DELTA2_RATIO)[-1] == 1.0
    assert len(default_axis(SweepKind.DEMAND_VAR_ALPHA)) == 21
    assert default_axis(SweepKind.DELTA1_VAR)[-1] == 0.5


def test_spec_validation():
    with pytest.raises(ConfigError):
        SweepSpec(SweepKind.DELTA2_RATIO, axis=(0.9, 0.8))
    with pytest.raises(ConfigError):
        SweepSpec(SweepKind.DELTA2_RATIO, outputs=("speed",))
    with pytest.raises(ConfigError):
        SweepSpec(SweepKind.DELTA1_VAR, normalization=Normalization.DETERMINISTIC_DEMAND)


def test_point_instances(base):
    p = point_instance(base, SweepKind.DELTA2_RATIO, 0.5)
    assert p.random.delta2_alpha == Distribution.degenerate(0.45)
    p = point_instance(base, SweepKind.DEMAND_VAR_GAMMA, 10000)
    assert p.random.d_gamma == Distribution.uniform(35000, 45000)
    p = point_instance(with_overrides(base, delta1=0.75, delta2=0.75), SweepKind.DELTA1_VAR, 0.2)
    assert p.random.delta1_alpha == Distribution.uniform(0.65, 0.85)
    assert not p.random.consistent


def test_deterministic_demand_normalization_is_one_at_zero(base):
    spec = SweepSpec(SweepKind.DEMAND_VAR_ALPHA, axis=(0, 4000),
                     normalization=Normalization.DETERMINISTIC_DEMAND)
    t = run_sweep(with_overrides(base, h=8000), spec, CFG)
    assert t.column("total_ratio")[0] == 1.0
    assert list(t.columns[-4:]) == ["regime", "method_alpha", "method_gamma", "status"]


def test_ratio_flat_when_online_training_never_pays(base):
    spec = SweepSpec(SweepKind.DELTA2_RATIO, axis=(0.5, 0.6, 0.7),
                     normalization=Normalization.NO_CROSSTRAINING)
    t = run_sweep(with_overrides(base, c2=2800, h=3500), spec, CFG)
    assert np.all(t.column("second_stage") == 0)
    assert np.ptp(t.column("total_ratio")) == 0
    for row, v in zip(t.rows, spec.axis):
        inst = point_instance(with_overrides(base, c2=2800, h=3500), SweepKind.DELTA2_RATIO, v)
        k = t.columns.index("normalizer")
        assert row[k] == no_crosstraining_cost(inst, CFG.expectation)


def test_suite_has_every_experiment():
    assert len(SUITE) == 12
    kinds = {e.spec.kind for e in SUITE.values()}
    assert kinds == set(SweepKind)
