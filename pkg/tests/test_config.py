import pytest

from crosstrain import ConfigError, Distribution
from crosstrain.config import dumps, load, loads

GOOD = """
[alpha]
x0 = 100
c1 = 1
c2 = 2
h = 3   # trailing comment
[gamma]
x0 = 50
c1 = 1
c2 = 2
h = 4
[random]
d_alpha = uniform 80 120
d_gamma = 60
delta1_alpha = 0.9
delta1_gamma = degenerate 0.8
consistent = true
"""


def test_basecase_matches_published_data(base):
    assert (base.alpha.c1, base.alpha.c2, base.alpha.h) == (2800, 4000, 3500)
    assert base.alpha.x0 == base.gamma.x0 == 54000
    assert base.random.d_alpha == Distribution.uniform(55000, 65000)
    assert base.random.d_gamma == Distribution.uniform(20000, 60000)
    assert base.random.delta2_gamma == Distribution.degenerate(0.9)


def test_parse_and_roundtrip():
    inst = loads(GOOD)
    assert inst.gamma.h == 4 and inst.random.d_gamma.is_degenerate
    assert inst.random.delta2_alpha == inst.random.delta1_alpha  # defaulted
    assert inst.random.consistent
    assert loads(dumps(inst)) == inst


@pytest.mark.parametrize("text", [
    GOOD.replace("[gamma]", "[gama]"),
    GOOD.replace("h = 4", "h = four"),
    GOOD.replace("uniform 80 120", "normal 80 120"),
    GOOD.replace("uniform 80 120", "uniform 120 80"),
    GOOD.replace("x0 = 50", "x0 = 50\nspeed = 3"),
    GOOD.replace("d_gamma = 60\n", ""),
    "not an ini file",
])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        loads(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load(tmp_path / "nope.cfg")
