import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sepprofiles import chain, product_walks as pw, profiles
from sepprofiles.errors import ParameterError, SizeError, ValidationError


# ---------------------------------------------------------------- rate vectors


def test_rates_must_sum_to_one():
    with pytest.raises(ValidationError):
        pw.RateVector((0.5, 0.6))
    with pytest.raises(ValidationError):
        pw.RateVector((1.0, 0.0))


def test_rate_vector_minimum_and_multiplicity():
    rates = pw.RateVector.first_coordinate(10, 0.5)
    assert rates.min_multiplicity == 9
    assert rates.min_rate == pytest.approx(1 / 10 - 0.5 / 9)
    assert pw.RateVector.uniform(7).min_multiplicity == 7


def test_half_split_rates():
    rates = pw.RateVector.half_split(10, 0.1)
    assert rates.min_multiplicity == 5
    assert float(sum(rates.rates)) == pytest.approx(1.0, abs=1e-15)


# ---------------------------------------------------------------- separations


def test_hypercube_time_zero():
    assert pw.hypercube_separation(pw.RateVector.uniform(5), 0.0) == 1


@pytest.mark.parametrize("n", [10, 1000, 5000])
@pytest.mark.parametrize("c", [-1.0, 0.0, 2.0])
def test_uniform_hypercube_closed_form(n, c):
    t = n * (math.log(n) + c)
    expected = 1 - (1 - math.exp(-c) / n) ** n
    assert pw.hypercube_separation(pw.RateVector.uniform(n), t) == pytest.approx(expected, abs=1e-12)


def test_log_space_switchover_is_continuous():
    n = pw.DIRECT_CAP
    rates = pw.RateVector.uniform(n).as_array()
    for t in (100.0, n * math.log(n), 3e4):
        direct = pw._product_separation(rates, t, force_direct=True)
        logged = pw._product_separation(rates, t, force_direct=False)
        assert direct == pytest.approx(logged, abs=1e-13)


@pytest.mark.parametrize("t", [0.2, 1.0, 4.0])
def test_two_dimensional_hypercube_matches_uniformization(t):
    kernel = pw.coordinate_refresh_kernel(2, pw.RateVector.uniform(2))
    assert pw.hypercube_separation(pw.RateVector.uniform(2), t) == pytest.approx(
        chain.separation_continuous(kernel, t, (0, 0)).value, abs=1e-10)


def test_zmn_time_zero_and_m_check():
    assert pw.zmn_separation_uniform(3, 4, 0.0) == 1
    with pytest.raises(ParameterError):
        pw.zmn_separation_uniform(1, 4, 1.0)


def test_zmn_matches_729_state_kernel():
    kernel = pw.coordinate_refresh_kernel(3, pw.RateVector.uniform(6))
    got = chain.separation_continuous(kernel, 4.0, (0,) * 6).value
    assert pw.zmn_separation_uniform(3, 6, 4.0) == pytest.approx(got, abs=1e-9)


def test_zmn_large_n_near_gumbel():
    n = 10**6
    assert abs(pw.zmn_separation_uniform(3, n, n * math.log(n)) - (1 - math.exp(-1))) < 1e-5


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.05, 1.0), min_size=1, max_size=12), st.floats(0.0, 80.0))
def test_separation_in_unit_interval(weights, t):
    total = sum(weights)
    rates = pw.RateVector(tuple(w / total for w in weights))
    s = pw.hypercube_separation(rates, t)
    assert 0.0 <= s <= 1.0


# ---------------------------------------------------------------- lazy map


def test_lazy_time_map():
    assert pw.lazy_time_map(2.5, 1.0) == 2.5
    assert pw.lazy_time_map(1.0, 0.01) == pytest.approx(100.0)
    with pytest.raises(ParameterError):
        pw.lazy_time_map(1.0, 0.0)
    with pytest.raises(ParameterError):
        pw.lazy_time_map(1.0, 1.5)


@pytest.mark.parametrize("t", [0.5, 3.0, 17.0])
def test_lazy_identity(t):
    rates = pw.RateVector.uniform(8)
    alpha = 1 / 3
    assert abs(pw.lazy_separation(rates, alpha, pw.lazy_time_map(t, alpha)) - pw.hypercube_separation(rates, t)) < 1e-12


# ---------------------------------------------------------------- Gumbel check


def test_gumbel_check_uniform_large_n():
    chk = pw.gumbel_profile_check(pw.RateVector.uniform(10**6), 0.0)
    assert abs(chk.value - (1 - math.exp(-1))) < 1e-5


def test_gumbel_check_first_coordinate():
    rates = pw.RateVector.first_coordinate(10**4, 0.5)
    chk = pw.gumbel_profile_check(rates, 0.0)
    assert abs(chk.value - profiles.gumbel(0.0)) < 1e-3
    assert chk.diagnostic < 1e-10


def test_gumbel_check_monotone_to_zero():
    rates = pw.RateVector.uniform(500)
    values = [pw.gumbel_profile_check(rates, c).value for c in np.linspace(-2, 25, 40)]
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-9


# ---------------------------------------------------------------- comparison sums


def test_comparison_sums_decrease_in_n():
    totals = [pw.perturbed_comparison_sums(3, n, 0.5, 0.0).total for n in (10**2, 10**3, 10**4)]
    assert totals[0] > totals[1] > totals[2]
    assert totals[2] < 0.05


def test_comparison_sums_hypercube_case():
    n, c = 200, 0.4
    u = math.exp(-c)
    sums = pw.perturbed_comparison_sums(2, n, 0.5, c)
    assert sums.s0 == pytest.approx((1 + u / (n - 1)) ** (n - 1) - (1 + u / n) ** (n - 1), rel=1e-12)


def test_exact_s1_below_triangle_bound():
    for n in (50, 400):
        bound = pw.perturbed_comparison_sums(3, n, 0.5, 0.0)
        exact = pw.perturbed_comparison_sums(3, n, 0.5, 0.0, exact=True)
        assert exact.s0 == bound.s0
        assert exact.s1 <= bound.s1 * (1 + 1e-12)


def test_direct_sum_matches_closed_forms():
    n, b, c = 60, 0.3, 0.2
    direct = pw.perturbed_comparison_sum_direct(3, n, b, c)
    exact = pw.perturbed_comparison_sums(3, n, b, c, exact=True)
    assert direct == pytest.approx(exact.total, rel=1e-10)


def test_comparison_sums_reject_nonpositive_slow_rate():
    with pytest.raises(ParameterError):
        pw.perturbed_comparison_sums(2, 2, 0.9, 0.0)


# ---------------------------------------------------------------- half split


def test_half_split_bound_positive_when_rates_equal():
    assert pw.halfsplit_comparison_bound(100, 0.2, 0.2, 0.0) > 0


def test_half_split_bound_small_at_ten_thousand():
    assert pw.halfsplit_comparison_bound(10**4, 0.1, 0.2, 0.0) < 0.1


def test_half_split_bound_decreases():
    values = [pw.halfsplit_comparison_bound(n, 0.1, 0.2, 0.0) for n in (10**2, 10**3, 10**4, 10**5)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_half_split_parameter_range():
    with pytest.raises(ParameterError):
        pw.halfsplit_comparison_bound(100, 0.6, 0.2, 0.0)
    with pytest.raises(ParameterError):
        pw.halfsplit_comparison_bound(101, 0.1, 0.2, 0.0)


# ---------------------------------------------------------------- continuity sums


def test_first_coordinate_slow_part_tends_to_e():
    parts = pw.hypercube_continuity_sums("first_coordinate", 10**6, 0.0, 0.5)
    assert parts.slow_part == pytest.approx(math.e, abs=1e-5)


def test_first_coordinate_fast_part_is_negligible():
    assert pw.hypercube_continuity_sums("first_coordinate", 100, 0.0, 0.5).fast_part < 1e-8


def test_half_split_fast_part_value():
    # Frozen from a 40-digit decimal evaluation of the same closed form; the
    # part decays like N^(1 - r_b) = N^(-1/2) here, so it is still ~0.058.
    parts = pw.hypercube_continuity_sums("half_split", 10**4, 0.0, 0.1)
    assert parts.fast_part == pytest.approx(0.0584787296219184, rel=1e-12)
    assert parts.slow_part == pytest.approx(2.75617031448993, rel=1e-12)


def test_half_split_fast_part_decreases():
    values = [pw.hypercube_continuity_sums("half_split", n, 0.0, 0.1).fast_part for n in (10**2, 10**4, 10**6)]
    assert values[0] > values[1] > values[2]


def test_general_closed_form_matches_spectral_enumeration():
    rates = pw.RateVector((0.1, 0.15, 0.2, 0.25, 0.3))
    spec = pw.hypercube_spectrum(rates, with_table=False)
    t, w, c = 7.0, 2.0, -0.3
    direct = chain.continuity_sum_general(spec, t, w, c, transitive=True)
    assert pw.refresh_continuity_sum(rates, t, w, c) == pytest.approx(direct, rel=1e-12)


def test_first_coordinate_continuity_matches_general_form():
    n, b, c = 30, 0.5, 0.2
    rates = pw.RateVector.first_coordinate(n, b)
    slow = float(rates.min_rate)
    t, w = math.log(n - 1) / slow, 1 / slow
    parts = pw.hypercube_continuity_sums("first_coordinate", n, c, b)
    assert parts.total == pytest.approx(pw.refresh_continuity_sum(rates, t, w, c), rel=1e-10)


# ---------------------------------------------------------------- Bernoulli-Laplace


def test_bl_spectrum_n4():
    spec = pw.bl_spectrum(4)
    assert spec.gaps == [0, 1, Fraction(3, 2)]
    assert spec.dimensions == [1, 3, 2]


@pytest.mark.parametrize("n", range(2, 31, 2))
def test_bl_dimensions_telescope(n):
    spec = pw.bl_spectrum(n)
    assert sum(spec.dimensions) == math.comb(n, n // 2)
    assert all(d > 0 for d in spec.dimensions)


def test_bl_parity_enforced():
    with pytest.raises(ParameterError):
        pw.bl_spectrum(5)
    with pytest.raises(ParameterError):
        pw.bl_kernel(7)


def test_bl_sum_near_e():
    assert abs(pw.bl_continuity_sum(10**4, 0.0) - math.e) <= 0.2


@pytest.mark.parametrize("n", [10**2, 10**3, 10**4])
def test_bl_dominating_bound(n):
    for c in np.linspace(-2, 2, 9):
        value = pw.bl_continuity_sum(n, c)
        assert math.isfinite(value)
        assert value <= pw.bl_dominating_bound(n, abs(c))


def test_bl_sum_direct_small_n():
    n, c = 12, 0.5
    spec = pw.bl_spectrum(n)
    direct = n / 4 * sum(float(d) * float(g) * math.exp(-(n / 4) * (math.log(n) + c) * float(g))
                         for d, g in zip(spec.dimensions[1:], spec.gaps[1:]))
    assert pw.bl_continuity_sum(n, c) == pytest.approx(direct, rel=1e-12)


def test_bl_kernel_boundary_and_balance():
    kernel = pw.bl_kernel(10, mode="exact")
    assert kernel.rows[0] == {1: 1}
    assert kernel.reversible
    for n in (2, 8, 20):
        assert pw.bl_kernel(n, mode="exact").reversible


def test_bl_kernel_caps():
    with pytest.raises(SizeError):
        pw.bl_kernel(22, mode="exact")
    with pytest.raises(SizeError):
        pw.bl_kernel(202)


def test_bl_kernel_spectrum_matches_formula():
    n = 16
    kernel = pw.bl_kernel(n)
    spec = chain.SpectralDecomposition.from_reversible_kernel(kernel)
    expected = sorted(float(g) for g in pw.bl_spectrum(n).gaps)
    assert np.allclose(sorted(spec.gaps), expected, atol=1e-12)


def test_bl_n4_spectral_path_agrees_with_uniformization():
    kernel = pw.bl_kernel(4)
    spec = chain.SpectralDecomposition.from_reversible_kernel(kernel)
    a = chain.separation_continuous(kernel, 1.0, 2).value
    b = chain.separation_continuous(kernel, 1.0, 2, spectral=spec).value
    assert abs(a - b) < 1e-9
