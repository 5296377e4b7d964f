from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact import oracle
from artifact.lattice import (
    IndefiniteFormError,
    LatticeError,
    QuadraticForm,
    central_lattice,
    coroot_lattice,
    enumerate_coefficients,
    enumerate_up_to,
    integral_lattice,
    iter_short_vector_chunks,
    lattice_from_generators,
    product_integral_lattice,
)
from artifact.rootsys import build_root_system


@st.composite
def definite_forms(draw, max_dim=4):
    """``M^T M + D`` with a small integer ``M`` and a positive rational diagonal ``D``."""
    n = draw(st.integers(1, max_dim))
    m = np.array(draw(st.lists(st.lists(st.integers(-2, 2), min_size=n, max_size=n),
                               min_size=n, max_size=n)), dtype=object)
    diag = draw(st.lists(st.fractions(Fraction(1, 3), 3, max_denominator=4), min_size=n, max_size=n))
    g = m.T @ m
    return [[Fraction(int(g[i][j])) + (diag[i] if i == j else 0) for j in range(n)] for i in range(n)]


@settings(max_examples=60, deadline=None)
@given(definite_forms(), st.fractions(0, 12, max_denominator=3))
def test_enumeration_matches_box_scan(gram, bound):
    fast = sorted(tuple(int(a) for a in x) for x in enumerate_coefficients(gram, bound, dedup=False))
    assert fast == oracle.brute_enumerate(gram, bound)


@settings(max_examples=40, deadline=None)
@given(definite_forms(), st.fractions(0, 12, max_denominator=3))
def test_dedup_keeps_one_of_each_pair(gram, bound):
    full = enumerate_coefficients(gram, bound, dedup=False)
    half = enumerate_coefficients(gram, bound)
    assert 2 * len(half) == len(full)
    assert {tuple(x) for x in half}.isdisjoint({tuple(-x) for x in half})


def test_identity_form_bound_one_has_four_vectors():
    got = [tuple(int(a) for a in x) for x in enumerate_coefficients([[1, 0], [0, 1]], 1, dedup=False)]
    assert got == [(-1, 0), (0, -1), (0, 1), (1, 0)]


@pytest.mark.parametrize("label, rank, norm, count", [
    ("A", 2, 2, 6), ("D", 4, 2, 24), ("E8", None, 2, 240), ("E7", None, 2, 126), ("E6", None, 2, 72),
])
def test_minimal_vectors_of_root_lattices(label, rank, norm, count):
    lat = coroot_lattice(build_root_system(label, rank))
    vectors = enumerate_up_to(lat, None, norm, dedup=False)
    assert len(vectors) == count


@pytest.mark.parametrize("bound, count", [(1, 6), (2, 18), (3, 26), (4, 32)])
def test_cubic_lattice_counts(bound, count):
    # theta series of Z^3: 1 + 6q + 12q^2 + 8q^3 + 6q^4
    assert len(enumerate_coefficients(np.eye(3, dtype=int).tolist(), bound, dedup=False)) == count


def test_ordering_by_norm_then_lex():
    xs = enumerate_coefficients([[2, 1], [1, 2]], 6)
    norms = [2 * a * a + 2 * a * b + 2 * b * b for a, b in xs.tolist()]
    assert norms == sorted(norms)


def test_chunks_include_zero():
    chunks = list(iter_short_vector_chunks([[1]], 0))
    assert [c.tolist() for c in chunks] == [[[0]]]


def test_large_entries_fall_back_to_exact_objects():
    big = 10**12
    xs = enumerate_coefficients([[big, 0], [0, big]], big)
    assert sorted(map(tuple, xs.tolist())) == [(0, 1), (1, 0)]


@pytest.mark.parametrize("gram, minor", [([[1, 2], [2, 1]], 2), ([[0]], 1), ([[-1, 0], [0, 1]], 1)])
def test_indefinite_rejected(gram, minor):
    with pytest.raises(IndefiniteFormError) as info:
        QuadraticForm(gram)
    assert info.value.minor_index == minor


def test_non_symmetric_rejected():
    with pytest.raises(LatticeError):
        QuadraticForm([[1, 0], [1, 1]])


@pytest.mark.parametrize("label, rank, gamma, index", [
    ("A", 3, (), 1), ("A", 3, ("2L1",), 2), ("A", 3, ("L1",), 4), ("A", 5, ("3L1",), 2),
    ("D", 4, ("F",), 2), ("D", 4, ("full",), 4), ("E7", None, ("F",), 2), ("B", 3, ("e1",), 2),
])
def test_integral_lattice_index(label, rank, gamma, index):
    rs = build_root_system(label, rank)
    lat = integral_lattice(label, rank, gamma)
    assert lat.index_of(coroot_lattice(rs)) == index
    assert central_lattice(rs).contains_lattice(lat)


def test_generators_canonical_basis():
    a = lattice_from_generators([(2, 0), (0, 2), (1, 1)])
    b = lattice_from_generators([(1, 1), (1, -1)])
    assert a == b


def test_product_lattice_diagonal_quotient():
    su2 = build_root_system("A", 1)
    lat = product_integral_lattice([(su2, ()), (su2, ())], gamma_generators=[("L1", "L1")])
    single = product_integral_lattice([(su2, ()), (su2, ())])
    assert lat.index_of(single) == 2


def test_product_lattice_rejects_torus_component():
    su2 = build_root_system("A", 1)
    with pytest.raises(LatticeError):
        product_integral_lattice([(su2, ())], torus_dim=1, gamma_generators=[("1/2", "L1")])
