import json
import math

import numpy as np
import pytest

from nhwishart import _io
from nhwishart.quadrature import integrate, radial_grid_rule, radial_integral


def test_integrate_smooth_and_singular():
    assert integrate(lambda x: x ** 7, 0.0, 2.0) == pytest.approx(2 ** 8 / 8, rel=1e-14)
    assert integrate(np.cos, 0.0, 50.0) == pytest.approx(math.sin(50.0), abs=1e-12)
    # x log x has a derivative singularity at 0: integral over [0, 1] is -1/4
    val = integrate(lambda x: np.where(x > 0, x * np.log(np.maximum(x, 1e-300)), 0.0), 0.0, 1.0)
    assert val == pytest.approx(-0.25, rel=1e-10)
    assert integrate(np.exp, 1.0, 1.0) == 0.0


def test_radial_integral_of_gaussian():
    assert radial_integral(lambda r: np.exp(-r * r) / math.pi, r_scale=1.0) == pytest.approx(1.0, rel=1e-12)
    assert radial_integral(lambda r: np.exp(-r) / (2 * math.pi), r_scale=0.1) == pytest.approx(1.0, rel=1e-12)


def test_radial_grid_rule():
    x, w = radial_grid_rule(3.0, panels=4, order=10)
    assert np.sum(w) == pytest.approx(3.0, rel=1e-14)
    assert np.sum(w * x ** 5) == pytest.approx(3.0 ** 6 / 6, rel=1e-13)


def test_seventeen_digit_roundtrip(tmp_path):
    vals = [0.1, 1 / 3, math.pi * 1e-300, -2.5e17]
    for v in vals:
        assert float(_io.fmt(v)) == v
    _io.write_csv(tmp_path / "a.csv", ["v"], [vals])
    back = np.loadtxt(tmp_path / "a.csv", skiprows=1)
    assert np.array_equal(back, vals)
    _io.write_json(tmp_path / "a.json", {"x": 1 / 3, "bad": math.inf, "arr": np.arange(2), "ok": True})
    data = json.loads((tmp_path / "a.json").read_text())
    assert data == {"x": 1 / 3, "bad": None, "arr": [0, 1], "ok": True}
    with pytest.raises(ValueError):
        _io.write_csv(tmp_path / "b.csv", ["a", "b"], [[1, 2], [1]])
    with pytest.raises(OSError, match="nope"):
        _io.write_json(tmp_path / "nope" / "x.json", {})
