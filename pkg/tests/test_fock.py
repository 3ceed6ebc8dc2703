import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from holomem import fock
from holomem.errors import CapacityError
from holomem.model import lift

A_, AA, C1, C2 = range(4)


def unit(i):
    e = np.zeros(4)
    e[i] = 1.0
    return e


def random_unitary(rng, n=4):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# -- basis ---------------------------------------------------------------

@pytest.mark.parametrize("l, size", [(0, 1), (1, 4), (2, 10), (3, 20), (8, 165)])
def test_sector_sizes(l, size):
    assert fock.sector_dim(l) == size == math.comb(l + 3, 3)
    assert len(fock.sector_basis(l)) == size


def test_vacuum_sector():
    basis = fock.sector_basis(0)
    assert [s.as_tuple() for s in basis.states] == [(0, 0, 0, 0)]


def test_ordering_is_descending_lexicographic():
    for l in range(5):
        tuples = [s.as_tuple() for s in fock.sector_basis(l).states]
        assert tuples == sorted(tuples, reverse=True)
        assert all(sum(t) == l and min(t) >= 0 for t in tuples)
        # photon Fock state comes first
        assert tuples[0] == (l, 0, 0, 0)


def test_index_roundtrip():
    basis = fock.sector_basis(3)
    for k, s in enumerate(basis.states):
        assert basis.index(s) == k
        assert basis.index(s.as_tuple()) == k


def test_single_excitation_basis_matches_mode_order():
    tuples = [s.as_tuple() for s in fock.sector_basis(1).states]
    assert tuples == [tuple(unit(i).astype(int)) for i in range(4)]


def test_capacity_error_names_limit():
    with pytest.raises(CapacityError, match="8"):
        fock.sector_basis(9)


def test_capacity_env_override(monkeypatch):
    monkeypatch.setenv(fock.MAX_SECTOR_ENV, "2")
    fock.sector_basis(2)
    with pytest.raises(CapacityError, match="maximum sector 2"):
        fock.sector_basis(3)
    monkeypatch.setenv(fock.MAX_SECTOR_ENV, "ten")
    with pytest.raises(CapacityError):
        fock.check_sector(1)


@pytest.mark.parametrize("bad", [-1, 1.5])
def test_invalid_sector(bad):
    with pytest.raises(ValueError):
        fock.check_sector(bad)


def test_mode_index():
    assert [fock.mode_index(m) for m in fock.MODES] == [0, 1, 2, 3]
    with pytest.raises(ValueError):
        fock.mode_index("B")
    with pytest.raises(ValueError):
        fock.bilinear(4, 0, 1)


def test_sector_vector_validation():
    v = fock.SectorVector(1, [0, 2, 0, 0])
    assert v.norm() == pytest.approx(2.0)
    assert v.normalized()[(0, 1, 0, 0)] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fock.SectorVector(1, np.zeros(3))


# -- bilinears -------------------------------------------------------------

def test_number_operator_example():
    assert np.array_equal(np.diag(fock.bilinear("a", "a", 1)), [1, 0, 0, 0])
    for l in range(4):
        occ = np.array([s.as_tuple() for s in fock.sector_basis(l).states])
        for i in range(4):
            assert np.allclose(np.diag(fock.number_operator(i, l)), occ[:, i], atol=1e-14)


def test_single_particle_hop():
    hop = fock.bilinear("A", "a", 1)
    expected = np.zeros((4, 4))
    expected[AA, A_] = 1.0
    assert np.array_equal(hop, expected)


def test_hop_bosonic_enhancement():
    out = fock.bilinear("A", "a", 2) @ fock.basis_state((2, 0, 0, 0)).amplitudes
    v = fock.SectorVector(2, out)
    assert v[(1, 1, 0, 0)] == pytest.approx(math.sqrt(2))
    assert np.count_nonzero(out) == 1


def _brute_bilinear(i, j, l):
    # ladder algebra on occupation tuples, independent of the matrix code
    tuples = [s.as_tuple() for s in fock.sector_basis(l).states]
    index = {t: k for k, t in enumerate(tuples)}
    m = np.zeros((len(tuples), len(tuples)))
    for col, occ in enumerate(tuples):
        if occ[j] == 0:
            continue
        amp = math.sqrt(occ[j])
        lowered = list(occ)
        lowered[j] -= 1
        amp *= math.sqrt(lowered[i] + 1)
        lowered[i] += 1
        m[index[tuple(lowered)], col] += amp
    return m


@pytest.mark.parametrize("l", [0, 1, 2, 3])
def test_bilinear_matches_brute_force(l):
    for i, j in itertools.product(range(4), repeat=2):
        assert np.allclose(fock.bilinear(i, j, l), _brute_bilinear(i, j, l), atol=0, rtol=0)


@pytest.mark.parametrize("l", range(5))
def test_bilinear_adjoint_and_commutator(l):
    for i, j in itertools.product(range(4), repeat=2):
        bij, bji = fock.bilinear(i, j, l), fock.bilinear(j, i, l)
        assert np.array_equal(bij, bji.conj().T)
        if i != j:
            comm = bij @ bji - bji @ bij
            assert np.allclose(comm, fock.bilinear(i, i, l) - fock.bilinear(j, j, l), atol=1e-13)


@pytest.mark.parametrize("l", range(4))
def test_creation_annihilation_identity(l):
    # a_i a_i^dag = N_i + 1 on sector l
    for i in range(4):
        up = fock.creation_matrix(i, l)
        assert np.allclose(up.T @ up, fock.number_operator(i, l) + np.eye(fock.sector_dim(l)))


@pytest.mark.parametrize("l", range(4))
def test_canonical_commutators(l):
    for i, j in itertools.product(range(4), repeat=2):
        lhs = fock.annihilation_matrix(i, l) @ fock.creation_matrix(j, l)
        rhs = fock.creation_matrix(j, l - 1) @ fock.annihilation_matrix(i, l - 1) if l else 0.0
        assert np.allclose(lhs - rhs, np.eye(fock.sector_dim(l)) * (i == j))


# -- creation of polaritons ----------------------------------------------------

def test_apply_creation_examples():
    one = fock.apply_creation(unit(A_), fock.vacuum())
    assert one.l == 1 and np.allclose(one.amplitudes, unit(A_))
    two = fock.apply_creation(unit(A_), one)
    assert two[(2, 0, 0, 0)] == pytest.approx(math.sqrt(2))
    mix = fock.apply_creation((unit(C1) + unit(C2)) / math.sqrt(2), fock.vacuum())
    assert np.allclose(mix.amplitudes, [0, 0, 1 / math.sqrt(2), 1 / math.sqrt(2)])


def test_apply_creation_capacity(monkeypatch):
    monkeypatch.setenv(fock.MAX_SECTOR_ENV, "1")
    with pytest.raises(CapacityError):
        fock.apply_creation(unit(A_), fock.photon_state(1))


def test_mode_occupations():
    v = np.zeros(10)
    v[fock.sector_basis(2).index((1, 0, 1, 0))] = 1.0
    assert np.allclose(fock.mode_occupations(fock.SectorVector(2, v)), [1, 0, 1, 0])


@settings(max_examples=40, deadline=None)
@given(st.tuples(*[st.integers(0, 2)] * 4).filter(lambda t: 0 < sum(t) <= 5))
def test_basis_state_built_by_creation(occ):
    v = fock.vacuum()
    for i, n in enumerate(occ):
        for _ in range(n):
            v = fock.apply_creation(unit(i), v)
    norm = math.prod(math.factorial(n) for n in occ)
    assert np.allclose(v.amplitudes / math.sqrt(norm), fock.basis_state(occ).amplitudes)


# -- second quantization ---------------------------------------------------------

def test_second_quantize_identity_and_single_particle(rng):
    u = random_unitary(rng)
    assert np.allclose(fock.second_quantize(u, 1), u)
    assert np.allclose(fock.second_quantize(np.eye(4), 3), np.eye(20))
    assert np.allclose(fock.second_quantize(u, 0), [[1.0]])


@pytest.mark.parametrize("l", [2, 3])
def test_second_quantize_is_a_unitary_homomorphism(rng, l):
    u, v = random_unitary(rng), random_unitary(rng)
    U = fock.second_quantize(u, l)
    assert np.allclose(U.conj().T @ U, np.eye(fock.sector_dim(l)), atol=1e-12)
    assert np.allclose(fock.second_quantize(u @ v, l), U @ fock.second_quantize(v, l), atol=1e-12)


@pytest.mark.parametrize("l", [1, 2, 3])
def test_second_quantize_of_exponential(rng, l):
    # exp(-i H) on sector l is the second quantization of exp(-i h)
    z = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = z + z.conj().T
    assert np.allclose(fock.second_quantize(expm(-1j * h), l), expm(-1j * lift(h, l)), atol=1e-11)
