import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swiptbf.errors import ScenarioParseError
from swiptbf.model import Scenario
from swiptbf.serialization import dump_scenario, load_scenario, parse_scenario

BASE = {
    "M": 2,
    "K_I": 1,
    "K_E": 1,
    "channels_h": [[[1.0, 0.0], [0.0, 1.0]]],
    "channels_g": [[[0.5, 0.5], [0.0, 0.0]]],
    "sigma2_dbm": -50,
    "gamma_db": 10,
    "zeta": 0.5,
    "power_w": 1.0,
}


def test_decibels_converted_at_parse():
    s = parse_scenario(json.dumps(BASE))
    assert s.sigma2[0] == pytest.approx(1e-8)
    assert s.gamma[0] == pytest.approx(10.0)
    assert s.alpha[0] == 1.0
    assert s.h[0, 1] == 1j


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(0, 3), st.integers(1, 3))
def test_round_trip(seed, k_i, k_e, m):
    rng = np.random.default_rng(seed)
    cn = lambda *sh: rng.standard_normal(sh) + 1j * rng.standard_normal(sh)
    s = Scenario(h=cn(k_i, m), g=cn(k_e, m), sigma2=rng.uniform(0.1, 1, k_i), gamma=rng.uniform(0.1, 5, k_i),
                 alpha=rng.uniform(0, 1, k_e), zeta=0.3, power=2.0)
    back = parse_scenario(dump_scenario(s))
    for name in ("h", "g", "sigma2", "gamma", "alpha"):
        np.testing.assert_array_equal(getattr(back, name), getattr(s, name))
    assert (back.zeta, back.power) == (s.zeta, s.power)


def test_syntax_error_position(load_fixture):
    with pytest.raises(ScenarioParseError) as info:
        load_fixture("malformed.json")
    assert (info.value.line, info.value.column) == (4, 8)
    assert "malformed.json:4:8" in str(info.value)


@pytest.mark.parametrize("patch,needle", [
    ({"M": 0}, "M must be"),
    ({"gamma_linear": 3.0}, "exactly one"),
    ({"channels_h": [[[1.0, 0.0]]]}, "channels_h"),
    ({"bogus": 1}, "unknown key"),
    ({"zeta": 2.0}, "zeta"),
])
def test_schema_errors(patch, needle):
    doc = dict(BASE, **patch)
    with pytest.raises(ScenarioParseError, match=needle):
        parse_scenario(json.dumps(doc, indent=1))


def test_schema_error_points_at_key():
    text = json.dumps(dict(BASE, M=0), indent=1)
    with pytest.raises(ScenarioParseError) as info:
        parse_scenario(text)
    assert info.value.line == 2


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioParseError, match="cannot read"):
        load_scenario(tmp_path / "nope.json")
