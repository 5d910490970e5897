"""Randomized properties across modules."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from moire_dos import (Lattice, System, dos_scheme_a, dos_scheme_b, eig_hermitian, enumerate_pairs,
                       fermi_energy, gaussian, gaussian_model, matrix_function_element, square_lattice)
from moire_dos.cache import EigenCache
from moire_dos.harness import ConvergenceRecord, RECORD_FIELDS, fit_rate, read_records, write_records
from moire_dos.kernels import compensated_sum
from moire_dos.spectral import parity_partner, spectral_weights
from moire_dos.testfn import combine

from conftest import SQRT5M1

LAT1 = Lattice([[SQRT5M1]])
LAT2 = Lattice([[2.0]])
SYSTEM = System(gaussian_model(LAT1, 0.01), gaussian_model(LAT2, 0.01))
finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
# the csv module cannot write NUL characters at all
label = st.text(st.characters(blacklist_characters="\x00", blacklist_categories=("Cs",)),
                min_size=1, max_size=8)


@given(st.floats(0.5, 15.0), st.floats(0.5, 80.0))
def test_origin_centered_sets_are_inversion_symmetric(W, L):
    pairs = enumerate_pairs(LAT1, LAT2, W, L)
    partner = parity_partner(pairs)
    assert partner is not None
    assert np.array_equal(pairs.entries[partner], -pairs.entries)


@given(st.floats(0.5, 6.0), st.floats(0.5, 15.0), st.floats(0, math.pi))
def test_2d_sets_satisfy_cutoffs(W, L, theta):
    a, b = square_lattice(2.0), square_lattice(2.0, theta)
    pairs = enumerate_pairs(a, b, W, L)
    u = np.linalg.norm(pairs.g1 + pairs.g2, axis=1)
    v = np.linalg.norm(pairs.g1 - pairs.g2, axis=1)
    assert np.all(u <= W * (1 + 1e-12)) and np.all(v <= L * (1 + 1e-12))


@given(st.floats(-3, 3), st.floats(0.1, 2.0), st.floats(-5, 5))
def test_scheme_b_linear_in_g(center, eps, alpha):
    cache = EigenCache()
    g1, g2 = gaussian(center, eps), fermi_energy(2.0, 5.0)
    f = lambda g: dos_scheme_b(SYSTEM, g, 6.0, 40.0, cache=cache).value
    assert abs(f(combine(alpha, g1, g2)) - (alpha * f(g1) + f(g2))) <= 1e-10 * (1 + abs(alpha))


@given(st.floats(-2, 20), st.floats(0.2, 2.0))
def test_scheme_a_positive_for_positive_g(center, eps):
    assert dos_scheme_a(SYSTEM, gaussian(center, eps), 5.0, 20.0, 8, workers=1,
                        cache=EigenCache()).value >= -1e-12


@given(st.integers(2, 25), st.integers(0, 2**32 - 1))
def test_weights_are_a_probability_vector(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n))
    m = (x + x.T) / 2
    idx = int(rng.integers(n))
    w, wt = spectral_weights(m, idx)
    assert np.all(wt >= 0) and abs(wt.sum() - 1) <= 1e-12
    assert np.all(np.diff(w) >= 0)
    # first moment is the diagonal entry
    assert abs(np.sum(w * wt) - m[idx, idx]) <= 1e-11 * (1 + np.abs(m).max())


@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_function_element_hermitian(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    dec = eig_hermitian((x + x.conj().T) / 2)
    g = gaussian(0.0, 1.5)
    i, j = rng.integers(n, size=2)
    a = matrix_function_element(dec, g, int(i), int(j))
    b = matrix_function_element(dec, g, int(j), int(i))
    assert abs(a - np.conj(b)) <= 1e-13


@given(st.floats(-3, -0.01), st.floats(-5, 5), st.sampled_from(["exponential", "power"]))
def test_fit_recovers_slope(slope, intercept, model):
    x = np.linspace(1.0, 10.0, 12)
    t = np.log(x) if model == "power" else x
    err = np.exp(intercept + slope * t)
    assume(np.sum(err > 1e-12) >= 3)
    f = fit_rate(x, err, model)
    assert f.slope == pytest.approx(slope, abs=1e-8)
    assert f.r_squared > 1 - 1e-10


@given(st.lists(finite, max_size=300))
def test_compensated_sum_close_to_fsum(xs):
    exact = math.fsum(xs)
    scale = sum(abs(x) for x in xs)
    assert abs(compensated_sum(np.array(xs, dtype=float)) - exact) <= 1e-15 * scale + 1e-300


record = st.builds(
    ConvergenceRecord,
    sweep=label, scheme=st.sampled_from(["A", "B", "average"]),
    g=label, parameter=st.sampled_from(["L", "W", "h"]),
    value=finite, W=st.none() | finite, L=st.none() | finite,
    K=st.none() | st.integers(1, 10**6), Nb=st.none() | st.integers(1, 64),
    dos=st.none() | st.floats(allow_nan=False), reference=st.none() | finite,
    abs_error=st.none() | st.floats(0, 1e300), rel_error=st.none() | st.floats(0, math.inf),
    N=st.none() | st.integers(1, 10**6), nodes=st.none() | st.integers(1, 10**6),
    ref_scheme=st.sampled_from(["A", "B"]), ref_W=finite, ref_L=finite,
    ref_K=st.none() | st.integers(1, 10**6), ref_Nb=st.none() | st.integers(1, 64),
    status=st.sampled_from(["ok", "failed"]), message=st.none() | label)


@given(st.lists(record, max_size=5))
def test_csv_round_trip(tmp_path_factory, recs):
    # empty strings are the "not applicable" marker, so text fields are non-empty
    assume(all(r.message is None or r.message.strip("\r") for r in recs))
    path = tmp_path_factory.mktemp("csv") / "r.csv"
    write_records(path, recs)
    back = read_records(path)
    assert len(back) == len(recs)
    for a, b in zip(back, recs):
        for f in RECORD_FIELDS:
            va, vb = getattr(a, f), getattr(b, f)
            if isinstance(vb, float):
                assert va.hex() == vb.hex()
            else:
                assert va == vb
