import math

import mpmath
import numpy as np
import pytest

from sepprofiles import profiles
from sepprofiles.errors import ValidationError

CLOSED_FORMS = ["gumbel", "half_poisson", "sparse_ktop", "gaussian"]


def test_profile_values_at_zero():
    assert profiles.gumbel(0.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)
    assert profiles.half_poisson(0.0) == pytest.approx(1 - math.exp(-0.5), abs=1e-15)
    assert profiles.sparse_ktop(0.0) == pytest.approx(1 - 2 / math.e, abs=1e-15)
    assert profiles.gaussian_profile(0.0) == 0.5


def test_gaussian_at_one():
    assert profiles.gaussian_profile(1.0) == pytest.approx(0.158655253931457, abs=1e-12)


@pytest.mark.parametrize("c", np.linspace(-8, 8, 33))
def test_gaussian_relative_accuracy(c):
    reference = float(mpmath.erfc(mpmath.mpf(c) / mpmath.sqrt(2)) / 2)
    assert abs(profiles.gaussian_profile(c) - reference) <= 1e-12 * reference


@pytest.mark.parametrize("name", CLOSED_FORMS)
def test_limits(name):
    fn = profiles.profile(name)
    assert fn(-40.0) == pytest.approx(1.0, abs=1e-12)
    assert fn(40.0) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("name", CLOSED_FORMS)
def test_strictly_decreasing_on_grid(name):
    fn = profiles.profile(name)
    wide = fn(np.linspace(-10, 30, 401))
    assert np.all(np.diff(wide) <= 0)
    assert np.all((wide >= 0) & (wide <= 1))
    # Strictly decreasing wherever doubles can resolve the value from 0 and 1.
    values = fn(np.linspace(-2, 6, 161))
    assert np.all(np.diff(values) < 0)


def test_sparse_ktop_is_poisson_tail():
    for c in (-1.0, 0.0, 1.5, 4.0):
        x = math.exp(-c)
        assert profiles.sparse_ktop(c) == pytest.approx(1 - math.exp(-x) * (1 + x), rel=1e-12)


def test_sparse_ktop_accurate_in_far_tail():
    x = math.exp(-30.0)
    assert profiles.sparse_ktop(30.0) == pytest.approx(x * x / 2, rel=1e-9)


def test_half_poisson_is_shifted_gumbel():
    grid = np.linspace(-5, 5, 101)
    assert np.max(np.abs(profiles.half_poisson(grid) - profiles.gumbel(grid + math.log(2)))) < 1e-15


def test_array_and_scalar_inputs():
    assert isinstance(profiles.gumbel(0.3), float)
    assert profiles.gumbel(np.array([0.0, 1.0])).shape == (2,)


def test_unknown_profile():
    with pytest.raises(ValidationError):
        profiles.profile("nope")


# ---------------------------------------------------------------- constants


def test_catalan_series():
    assert profiles.catalan_series() == pytest.approx(float(mpmath.catalan), abs=1e-12)


def test_gaussian_constants():
    k = profiles.gaussian_constants()
    assert abs(k.a - 4.65979) < 1e-5
    assert abs(k.b - 1.08247) < 1e-5
    assert k.mu == pytest.approx(math.pi / 2 - 2, abs=1e-15)
    assert k.v == pytest.approx(0.04632261332238752, abs=1e-12)
    assert abs(k.b**2 * (4 - math.pi) ** 3 - 16 * k.v) < 1e-10
    assert all(d < 1e-9 for d in k.checks.values())


def test_constants_against_independent_quadrature():
    h = lambda u: mpmath.log(u * u + (1 - u) ** 2)
    mu = mpmath.quad(h, [0, 0.5, 1])
    v = mpmath.quad(lambda u: (h(u) - mu) ** 2, [0, 0.5, 1])
    k = profiles.gaussian_constants()
    assert abs(k.mu - float(mu)) < 1e-12
    assert abs(k.v - float(v)) < 1e-12


# ---------------------------------------------------------------- curves


def test_profile_curve_closed_form_and_gap(tmp_path):
    grid = [-1.0, 0.0, 1.0]
    a = profiles.ProfileCurve.closed_form("gumbel", grid, n=100)
    b = profiles.ProfileCurve("mc", grid, a.values + 0.01, stderrs=[0.001] * 3)
    assert b.sup_gap(a) == pytest.approx(0.01)
    path = tmp_path / "curve.csv"
    b.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "family,c,value,stderr" and len(lines) == 4


def test_profile_curve_validation():
    with pytest.raises(ValidationError):
        profiles.ProfileCurve("x", [0.0], [1.5])
    with pytest.raises(ValidationError):
        profiles.ProfileCurve("x", [0.0, 1.0], [0.5])
    a = profiles.ProfileCurve("x", [0.0], [0.5])
    with pytest.raises(ValidationError):
        a.sup_gap(profiles.ProfileCurve("y", [1.0], [0.5]))
