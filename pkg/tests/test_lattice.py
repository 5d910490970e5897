import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from moire_dos import (Lattice, ball_volume, enumerate_pairs, fold_to_cell,
                       incommensurability_diagnostic, reciprocal_basis, square_lattice)
from moire_dos.errors import InvalidLatticeError, LatticeMismatchError, ResourceLimitError

from conftest import SQRT5M1

LAT1 = Lattice([[SQRT5M1]])
LAT2 = Lattice([[2.0]])


def brute_pairs(lat1, lat2, W, L, bound, center=(0, 0)):
    """Every (n, m) in a box, tested one at a time in plain Python."""
    b1 = lat1.reciprocal[0, 0]
    b2 = lat2.reciprocal[0, 0]
    n0, m0 = center
    out = []
    for n in range(n0 - bound, n0 + bound + 1):
        for m in range(m0 - bound, m0 + bound + 1):
            u = b1 * (n - n0) + b2 * (m - m0)
            v = b1 * (n - n0) - b2 * (m - m0)
            if abs(u) <= W * (1 + 1e-12) and abs(v) <= L * (1 + 1e-12):
                out.append((n, m))
    return sorted(out)


def brute_pairs_2d(lat1, lat2, W, L, bound):
    out = []
    rng = range(-bound, bound + 1)
    for n in itertools.product(rng, rng):
        g1 = lat1.reciprocal @ np.array(n, float)
        for m in itertools.product(rng, rng):
            g2 = lat2.reciprocal @ np.array(m, float)
            if np.linalg.norm(g1 + g2) <= W * (1 + 1e-12) and np.linalg.norm(g1 - g2) <= L * (1 + 1e-12):
                out.append(n + m)
    return sorted(out)


# reciprocal_basis ----------------------------------------------------------

def test_reciprocal_basis_unit():
    assert np.allclose(reciprocal_basis([[1.0]]), [[2 * math.pi]], rtol=1e-15)


def test_reciprocal_basis_square_side_two():
    assert np.allclose(reciprocal_basis(2 * np.eye(2)), math.pi * np.eye(2), rtol=1e-15, atol=0)


def test_reciprocal_basis_example1_constant():
    b = reciprocal_basis([[SQRT5M1]])
    assert b[0, 0] == pytest.approx(2 * math.pi / SQRT5M1, rel=1e-15)
    assert b[0, 0] == pytest.approx(5.0832, abs=5e-5)


@pytest.mark.parametrize("a", [[[0.0]], [[1.0, 2.0], [2.0, 4.0]], [[np.nan]], [[np.inf, 0], [0, 1]]])
def test_reciprocal_basis_rejects_singular_or_nonfinite(a):
    with pytest.raises(InvalidLatticeError):
        reciprocal_basis(a)


@pytest.mark.parametrize("lat", [LAT1, LAT2, square_lattice(2.0), square_lattice(2.0, math.pi / 10),
                                 Lattice([[1.0, 0.3], [0.2, 1.7]])])
def test_lattice_duality_invariants(lat):
    d = lat.dimension
    assert np.allclose(lat.reciprocal.T @ lat.basis, 2 * math.pi * np.eye(d), rtol=0, atol=1e-12 * 2 * math.pi)
    assert lat.cell_volume * lat.reciprocal_cell_volume == pytest.approx((2 * math.pi) ** d, rel=1e-12)


def test_three_dimensional_lattice_rejected():
    with pytest.raises(InvalidLatticeError):
        Lattice(np.eye(3))


# enumerate_pairs -------------------------------------------------------------

def test_small_cutoffs_keep_only_origin():
    s = enumerate_pairs(LAT1, LAT2, 1.0, 1.0)
    assert len(s) == 1 and s.entries.tolist() == [[0, 0]]


@pytest.mark.parametrize("center", [(0, 0), (3, -2), (-7, 11)])
def test_vanishing_cutoffs_keep_only_center(center):
    s = enumerate_pairs(LAT1, LAT2, 1e-9, 1e-9, center=center)
    assert s.entries.tolist() == [list(center)]
    assert s.index_of_center == 0


def test_example1_w10_l40_matches_brute_force():
    s = enumerate_pairs(LAT1, LAT2, 10.0, 40.0)
    ref = brute_pairs(LAT1, LAT2, 10.0, 40.0, 64)
    assert len(s) == len(ref)
    assert [tuple(r) for r in s.entries.tolist()] == ref


def test_twenty_random_cutoffs_match_brute_force(rng):
    for _ in range(20):
        W = rng.uniform(0.1, 10.0)
        L = rng.uniform(0.1, 40.0)
        s = enumerate_pairs(LAT1, LAT2, W, L)
        assert [tuple(r) for r in s.entries.tolist()] == brute_pairs(LAT1, LAT2, W, L, 20)


def test_two_dimensional_matches_brute_force():
    a, b = square_lattice(2.0), square_lattice(2.0, math.pi / 10)
    s = enumerate_pairs(a, b, 4.0, 9.0)
    assert [tuple(r) for r in s.entries.tolist()] == brute_pairs_2d(a, b, 4.0, 9.0, 4)


def test_entries_satisfy_both_inequalities_and_are_sorted():
    s = enumerate_pairs(LAT1, LAT2, 7.5, 33.0, center=(2, -5))
    g1c, g2c = LAT1.reciprocal[0, 0] * 2, LAT2.reciprocal[0, 0] * -5
    u = (s.g1[:, 0] - g1c) + (s.g2[:, 0] - g2c)
    v = (s.g1[:, 0] - g1c) - (s.g2[:, 0] - g2c)
    assert np.all(np.abs(u) <= 7.5 * (1 + 1e-12)) and np.all(np.abs(v) <= 33.0 * (1 + 1e-12))
    rows = [tuple(r) for r in s.entries.tolist()]
    assert rows == sorted(rows)
    assert rows[s.index_of_center] == (2, -5)


def test_boundary_points_are_included():
    # |G1 + G2| hits W exactly for (n, m) = (1, 0)
    W = LAT1.reciprocal[0, 0]
    s = enumerate_pairs(LAT1, LAT2, W, W)
    assert (1, 0) in s.as_set() and (-1, 0) in s.as_set()


def test_monotone_in_cutoffs():
    small = enumerate_pairs(LAT1, LAT2, 6.0, 20.0).as_set()
    assert small <= enumerate_pairs(LAT1, LAT2, 6.0, 30.0).as_set()
    assert small <= enumerate_pairs(LAT1, LAT2, 9.0, 20.0).as_set()


@given(st.integers(-40, 40), st.integers(-40, 40), st.floats(0.5, 12.0), st.floats(0.5, 45.0))
def test_translation_covariance(n0, m0, W, L):
    base = enumerate_pairs(LAT1, LAT2, W, L)
    moved = enumerate_pairs(LAT1, LAT2, W, L, center=(n0, m0))
    assert np.array_equal(moved.entries, base.entries + np.array([n0, m0]))
    assert moved.index_of_center == base.index_of_center


def test_translation_covariance_2d(ex2_lattices):
    a, b = ex2_lattices
    base = enumerate_pairs(a, b, 5.0, 12.0)
    moved = enumerate_pairs(a, b, 5.0, 12.0, center=(1, -2, 3, 0))
    assert np.array_equal(moved.entries, base.entries + np.array([1, -2, 3, 0]))


def test_resource_cap_names_projected_count():
    with pytest.raises(ResourceLimitError) as info:
        enumerate_pairs(LAT1, LAT2, 50.0, 5000.0, max_entries=1000)
    assert info.value.projected > 1000 and info.value.cap == 1000
    assert str(info.value.projected) in str(info.value)


def test_dimension_mismatch():
    with pytest.raises(LatticeMismatchError):
        enumerate_pairs(LAT1, square_lattice(1.0), 1.0, 1.0)


def test_nonpositive_cutoffs_rejected():
    with pytest.raises(ValueError):
        enumerate_pairs(LAT1, LAT2, 0.0, 1.0)


def test_index_lookup():
    s = enumerate_pairs(LAT1, LAT2, 8.0, 30.0)
    for i, row in enumerate(s.entries.tolist()):
        assert s.index(tuple(row)) == i
    assert s.index((10**6, 0)) == -1


# fold_to_cell -----------------------------------------------------------------

def test_fold_origin():
    assert fold_to_cell([0.0], LAT2).tolist() == [0.0]


def test_fold_scalar_example():
    assert fold_to_cell([5.5], LAT2)[0] == pytest.approx(1.5, abs=1e-15)


def test_fold_negative():
    assert fold_to_cell([-0.5], LAT2)[0] == pytest.approx(1.5, abs=1e-15)


def test_fold_rejects_nonfinite():
    with pytest.raises(ValueError):
        fold_to_cell([np.nan], LAT2)


@given(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4))
def test_fold_2d_idempotent_in_cell_and_congruent(x, y):
    lat = square_lattice(2.0, math.pi / 10)
    p = np.array([x, y])
    b = fold_to_cell(p, lat)
    frac = lat.inverse @ b
    assert np.all(frac >= 0) and np.all(frac < 1)
    assert np.array_equal(fold_to_cell(b, lat), b)
    k = lat.inverse @ (p - b)
    assert np.max(np.abs(k - np.rint(k))) < 1e-10 * max(1.0, np.abs(k).max())


@given(st.floats(-1e6, 1e6))
def test_fold_1d_in_cell(x):
    b = fold_to_cell([x], LAT1)[0]
    assert 0.0 <= b < SQRT5M1


# ball_volume ---------------------------------------------------------------------

@pytest.mark.parametrize("d, L, expected", [(1, 2.0, 2.0), (2, 2.0, math.pi), (2, 40.0, 400 * math.pi)])
def test_ball_volume(d, L, expected):
    assert ball_volume(d, L) == pytest.approx(expected, rel=1e-15)


def test_ball_volume_bad_dimension():
    with pytest.raises(ValueError):
        ball_volume(3, 1.0)


# incommensurability ----------------------------------------------------------------

def continued_fraction_best(x, qmax):
    """Best |q x - p| over q <= qmax from the convergents and semiconvergents."""
    a, frac = [], x
    for _ in range(40):
        ai = math.floor(frac)
        a.append(ai)
        if frac - ai < 1e-15:
            break
        frac = 1.0 / (frac - ai)
    best = math.inf
    h0, h1, k0, k1 = 1, a[0], 0, 1
    best = min(best, abs(k1 * x - h1))
    for ai in a[1:]:
        for t in range(1, ai + 1):  # semiconvergents
            h, k = t * h1 + h0, t * k1 + k0
            if k <= qmax:
                best = min(best, abs(k * x - h))
        h0, h1, k0, k1 = h1, ai * h1 + h0, k1, ai * k1 + k0
        if k1 > qmax:
            break
    return best


def test_identical_lattices_are_commensurate():
    rep = incommensurability_diagnostic(LAT1, LAT1, 50)
    assert rep.relation_found
    m, n, res = rep.reciprocal_relation
    assert abs(m[0]) == 1 and res < 1e-12


def test_example1_no_relation_matches_continued_fractions():
    rep = incommensurability_diagnostic(LAT1, LAT2, 50)
    assert not rep.relation_found
    oracle = continued_fraction_best(LAT2.reciprocal[0, 0] / LAT1.reciprocal[0, 0], 50)
    assert rep.reciprocal_relation[2] == pytest.approx(oracle, rel=1e-9)
    assert oracle > 1e-3


def test_example2_no_relation(ex2_lattices):
    a, b = ex2_lattices
    rep = incommensurability_diagnostic(a, b, 50)
    assert not rep.relation_found
    for i, j, val, p, q, res in rep.entries:
        assert res == pytest.approx(continued_fraction_best(val % 1.0, 50), abs=1e-12)


def test_rational_ratio_found():
    rep = incommensurability_diagnostic(Lattice([[3.0]]), Lattice([[2.0]]), 10)
    assert rep.relation_found
