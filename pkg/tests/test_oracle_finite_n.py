import math

import numpy as np
import pytest

from holomem.errors import CapacityError
from holomem.model import SystemParams, sector_h, single_particle_h
from holomem.oracle_finite_n import (block_hamiltonian, build_finite_system, commutator_defect,
                                     dark_degeneracy_check, finite_hamiltonian, symmetric_state)
from holomem.schedules import constant_schedule


@pytest.fixture(scope="module")
def three():
    return build_finite_system(3, 1)


def test_caps():
    with pytest.raises(CapacityError):
        build_finite_system(7)
    with pytest.raises(CapacityError):
        build_finite_system(2, 4)
    with pytest.raises(CapacityError):
        symmetric_state(build_finite_system(2, 1), (0, 3, 0, 0))


def test_dimensions(three):
    assert three.dim == 4 ** 3 * 2
    assert three["A"].shape == (three.dim, three.dim)


def test_single_atom_is_a_flip():
    fs = build_finite_system(1, 0)
    assert np.array_equal(fs["A"].toarray(), fs.flip("b", "a", 0).toarray())
    with pytest.raises(IndexError):
        fs.flip("b", "a", 1)
    with pytest.raises(ValueError):
        fs.flip("b", "x", 0)


def test_a_annihilates_ground(three):
    ground = symmetric_state(three, (0, 0, 0, 0))
    assert np.linalg.norm(three["A"] @ ground) == 0.0


def test_created_excitation_is_symmetric(three):
    ground = symmetric_state(three, (0, 0, 0, 0))
    v = three["A"].conj().T @ ground
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-14)
    # equal weight 1/sqrt(3) on |abb>, |bab>, |bba>
    assert np.allclose(np.sort(np.abs(v[v != 0])), np.full(3, 1 / math.sqrt(3)))
    assert np.allclose(v, symmetric_state(three, (0, 1, 0, 0)))


def test_hamiltonian_hermitian(three):
    p = SystemParams(1.0, 0.3, 0.1, -0.2)
    H = finite_hamiltonian(three, p, constant_schedule(0.5, 0.7, 2.0), 1.3)
    assert abs(H - H.conj().T).max() < 1e-15


def test_zero_control_couples_photon_and_a_only(three):
    p = SystemParams(g_sqrt_N=0.8)
    H = finite_hamiltonian(three, p, constant_schedule(0.0, 0.0, 1.0), 0.0)
    expected = 0.8 * (three["a"] @ three["A"].conj().T)
    assert abs(H - expected - expected.conj().T).max() < 1e-15


def test_ground_defect_vanishes(three):
    assert commutator_defect(three, "ground", 1) == pytest.approx(0.0, abs=1e-14)
    assert commutator_defect(three, "ground", 2) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("N", [2, 3, 4, 5, 6])
def test_excited_defect(N):
    fs = build_finite_system(N, 1)
    for k in (1, 2):
        defect = commutator_defect(fs, "one-k-excitation", k)
        assert defect == pytest.approx(-2.0 / N, abs=1e-10)
        assert defect * N == pytest.approx(-2.0, abs=1e-10)


def test_defect_arguments(three):
    with pytest.raises(ValueError):
        commutator_defect(three, "two", 1)
    with pytest.raises(ValueError):
        commutator_defect(three, "ground", 3)


@pytest.mark.parametrize("N", [2, 4, 6])
def test_collective_commutators(N):
    fs = build_finite_system(N, 1)
    for k in ("1", "2"):
        A, Tp, Tm, C = fs["A"], fs[f"T+{k}"], fs[f"T-{k}"], fs[f"C{k}"]
        assert abs(A @ Tp - Tp @ A - C).max() < 1e-14
        assert abs(C @ Tm - Tm @ C - A).max() < 1e-14
    assert abs(fs["T+1"] @ fs["T+2"] - fs["T+2"] @ fs["T+1"]).max() < 1e-14


@pytest.mark.parametrize("N", [2, 3, 4, 5, 6])
def test_single_excitation_block_matches_model(N):
    p = SystemParams(1.1, 0.4, 0.15, -0.25)
    s = constant_schedule(0.6, 0.9, 5.0)
    block, residual = block_hamiltonian(build_finite_system(N, 1), p, s, 2.0, 1)
    # the single-excitation mapping is exact, matrix for matrix
    assert np.allclose(block, single_particle_h(p, s, 2.0), atol=1e-12)
    assert residual < 1e-12


def test_dark_degeneracy_small_sectors():
    fs = build_finite_system(3, 1)
    p = SystemParams()
    s = constant_schedule(0.6, 0.9, 5.0)
    assert dark_degeneracy_check(fs, p, s, 1.0, 0).zero_modes == 1
    rep = dark_degeneracy_check(fs, p, s, 1.0, 1)
    assert (rep.zero_modes, rep.predicted) == (2, 2)
    assert rep.max_deviation < 1e-12
    with pytest.raises(ValueError):
        dark_degeneracy_check(fs, p, s, 1.0, 3)


def test_two_excitations_approach_bosons():
    p = SystemParams(g_sqrt_N=1.0, delta_p=0.5)
    s = constant_schedule(0.6, 0.9, 5.0)
    small = dark_degeneracy_check(build_finite_system(4, 2), p, s, 1.0, 2)
    large = dark_degeneracy_check(build_finite_system(6, 2), p, s, 1.0, 2)
    assert small.zero_modes == large.zero_modes == 3
    assert large.max_deviation < small.max_deviation
    assert large.invariance < 1e-12


def test_two_excitation_block_against_bosons():
    # finite-N corrections are of order 1/N relative to the bosonic spectrum
    p = SystemParams(g_sqrt_N=1.0, delta_p=0.5)
    s = constant_schedule(0.6, 0.9, 5.0)
    block, _ = block_hamiltonian(build_finite_system(6, 2), p, s, 1.0, 2)
    gap = np.max(np.abs(np.linalg.eigvalsh(block) - np.linalg.eigvalsh(sector_h(p, s, 1.0, 2))))
    assert 0 < gap < 1.0
