import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from moire_dos import fermi_energy, gaussian
from moire_dos.testfn import combine, custom, zero


def test_gaussian_peak():
    g = gaussian(3.0, 0.5)
    assert g(3.0) == pytest.approx(1.0 / (math.sqrt(2 * math.pi) * 0.5), rel=1e-15)


def test_gaussian_standard_normal_value():
    assert gaussian(0.0, 1.0)(1.0) == pytest.approx(0.24197072451914337, rel=1e-14)


@pytest.mark.parametrize("E, eps", [(0.0, 1.0), (10.0, 0.05), (-3.0, 2.5)])
def test_gaussian_normalized(E, eps):
    g = gaussian(E, eps)
    val, _ = quad(lambda t: float(g(t)), E - 8 * eps, E + 8 * eps, epsabs=1e-13, epsrel=1e-13, limit=200)
    assert val == pytest.approx(1.0, abs=1e-10 + 2 * math.erfc(8 / math.sqrt(2)))


@pytest.mark.parametrize("eps", [0.0, -1.0])
def test_gaussian_rejects_eps(eps):
    with pytest.raises(ValueError):
        gaussian(0.0, eps)


def test_fermi_half_occupation():
    assert fermi_energy(3.0, 10.0)(10.0) == 5.0


def test_fermi_zero_at_zero():
    assert fermi_energy(1.0, 10.0)(0.0) == 0.0


def test_fermi_low_temperature_limit():
    g = fermi_energy(1e3, 10.0)
    assert abs(g(9.0) - 9.0) <= 1e-10
    assert abs(g(11.0)) <= 1e-10


@pytest.mark.parametrize("beta", [0.0, -2.0])
def test_fermi_rejects_beta(beta):
    with pytest.raises(ValueError):
        fermi_energy(beta, 10.0)


def test_fermi_branches_match_direct_formula():
    g = fermi_energy(1.0, 10.0)
    lam = np.array([-35.0, -29.0, 10.0, 45.0, 49.0, 51.0, 60.0])
    direct = lam / (1.0 + np.exp(lam - 10.0))
    assert np.allclose(g(lam), direct, rtol=1e-15, atol=0)


@given(st.floats(-1e6, 1e6), st.floats(1e-3, 1e3), st.floats(-100, 100))
def test_fermi_finite(lam, beta, mu):
    assert np.isfinite(fermi_energy(beta, mu)(lam))


@given(st.floats(-1e3, 1e3))
def test_gaussian_finite(lam):
    assert np.isfinite(gaussian(0.0, 0.1)(lam))


def test_metadata_monotone():
    assert fermi_energy(1.0, 10.0).delta == pytest.approx(math.pi)
    assert fermi_energy(5.0, 10.0).delta < fermi_energy(1.0, 10.0).delta
    assert fermi_energy(1.0, 10.0).zeta < fermi_energy(5.0, 10.0).zeta
    assert fermi_energy(1.0, 10.0).zeta_nominal and fermi_energy(1.0, 10.0).lower_bound_ok
    assert gaussian(0.0, 0.1).delta < gaussian(0.0, 1.0).delta


def test_labels_and_keys_distinguish_parameters():
    assert fermi_energy(1.0, 10.0).label == "fermi_energy(beta=1.0,mu=10.0)"
    assert fermi_energy(1.0, 10.0).key != fermi_energy(5.0, 10.0).key


def test_custom_and_combine():
    g1, g2 = gaussian(0.0, 1.0), fermi_energy(1.0, 10.0)
    c = combine(2.5, g1, g2)
    lam = np.linspace(-5, 30, 11)
    assert np.allclose(c(lam), 2.5 * g1(lam) + g2(lam), rtol=1e-15)
    assert np.all(zero()(lam) == 0)
    with pytest.raises(ValueError):
        custom(lambda x: x, 0.0, 1.0)
