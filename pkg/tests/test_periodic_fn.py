import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landau_eig import periodic_fn as pf
from landau_eig.errors import SeriesDivergenceError
from landau_eig.periodic_fn import PeriodicFn

OM = 1.3
coeffs = st.lists(st.floats(-1, 1, allow_nan=False), min_size=1, max_size=8)
T_GRID = np.linspace(0, 2 * np.pi / OM, 97)


def test_w_star_square():
    ws = PeriodicFn.w_star(OM)
    sq = ws * ws
    assert np.allclose(sq.coeffs, [2.0, 0.0, 2.0])


@given(coeffs, coeffs)
def test_product_matches_pointwise(a, b):
    f, g = PeriodicFn(OM, a), PeriodicFn(OM, b)
    assert np.allclose((f * g)(T_GRID), f(T_GRID) * g(T_GRID), atol=1e-12)


@given(coeffs, coeffs, coeffs)
@settings(max_examples=30)
def test_algebra_laws(a, b, c):
    f, g, h = (PeriodicFn(OM, x) for x in (a, b, c))
    assert (f * (g + h)).allclose(f * g + f * h, atol=1e-12)
    assert (f * g).allclose(g * f, atol=0)


def test_frequency_mismatch():
    with pytest.raises(ValueError, match="frequency"):
        PeriodicFn(1.0, [1]) * PeriodicFn(2.0, [1])


def test_projections_split():
    f = PeriodicFn(OM, [0.3, -1.0, 0.5, 0.1])
    assert (pf.project_Y(f) + pf.project_Yprime(f)).allclose(f, atol=0)
    assert pf.project_Yprime(f).coef(1) == 0


@given(st.lists(st.floats(-0.5, 0.5), min_size=1, max_size=5), st.integers(0, 4))
@settings(max_examples=40)
def test_exp_remainder_pointwise(a, order):
    f = PeriodicFn(OM, a)
    x = f(T_GRID)
    ref = np.exp(x) - sum(x**i / math.factorial(i) for i in range(order + 1))
    assert np.allclose(pf.exp_remainder(f, order)(T_GRID), ref, atol=1e-13)


def test_exp_remainder_tiny_argument_no_cancellation():
    f = PeriodicFn(OM, [0.0, 1e-6])
    r = pf.exp_remainder(f, 2)  # ~ f^3/6
    ref = (f**3) / 6 + (f**4) / 24
    assert np.allclose(r.padded(5), ref.padded(5), rtol=1e-9, atol=1e-32)
    assert r.coef(3) == pytest.approx(2e-18 / 6 / 8, rel=1e-9)


def test_phi_divergence():
    with pytest.raises(SeriesDivergenceError):
        pf.phi(PeriodicFn(OM, [0.0, 40.0]), 1, max_terms=20)


def test_second_derivative_and_mean():
    f = PeriodicFn(OM, [0.7, 1.0, 0.0, 2.0])
    assert np.allclose(pf.second_derivative(f).coeffs, [0, -OM**2, 0, -18 * OM**2])
    assert pf.mean(f) == 0.7
    assert pf.mean(pf.second_derivative(f)) == 0


def test_derivative_two_sided_is_odd():
    f = PeriodicFn(OM, [0.1, 0.4, -0.2])
    d = pf.derivative_two_sided(f)
    assert np.allclose(d, -d[::-1])
    # f'(t) = -0.4 OM sin(OM t) + 0.4 OM sin(2 OM t)
    t = 0.37
    n = np.arange(-2, 3)
    val = np.sum(d * np.exp(1j * n * OM * t))
    assert val.imag == pytest.approx(0, abs=1e-14)
    assert val.real == pytest.approx(-0.4 * OM * np.sin(OM * t) + 0.4 * OM * np.sin(2 * OM * t))


def test_norms():
    f = PeriodicFn(OM, [1.0, 0.5])
    assert pf.norm_C(f) == pytest.approx(1.5)
    assert pf.norm_l1(f) == 1.5
    assert pf.norm_L2(f) ** 2 == pytest.approx(f.T * (1 + 0.125))
    assert pf.inner_L2(f, f) == pytest.approx(pf.norm_L2(f) ** 2)


def test_from_samples_roundtrip():
    f = PeriodicFn(OM, [0.2, -0.3, 0.05])
    t, y = pf.sample(f, 32)
    assert PeriodicFn.from_samples(OM, y).allclose(f, atol=1e-14)


def test_trimming_and_serialization(tmp_path):
    f = PeriodicFn(OM, [1.0, 0.5, 1e-20, 0.0])
    assert f.N == 1
    g = PeriodicFn.from_dict(json.loads(f.to_json()))
    assert g.allclose(f, atol=0) and g.omega == f.omega
    f.write_csv(tmp_path / "f.csv", n_samples=8)
    assert len((tmp_path / "f.csv").read_text().splitlines()) == 9


def test_linear_combination():
    f, g = PeriodicFn.cos_mode(OM, 2), PeriodicFn.constant(OM, 3.0)
    h = pf.linear_combination([2.0, -1.0], [f, g])
    assert np.allclose(h.coeffs, [-3.0, 0.0, 2.0])
