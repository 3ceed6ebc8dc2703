"""Fixed-excitation sectors of the four bosonic modes (a, A, C1, C2).

Every quadratic, number-conserving Hamiltonian in this package acts inside
one sector at a time, so states and operators are dense arrays over the
occupation basis of a single sector.  Basis states are ordered
lexicographically *descending* on ``(n_a, n_A, n_C1, n_C2)``; the pure
photon state ``(l, 0, 0, 0)`` is therefore always index 0.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterator

import numpy as np

from .errors import CapacityError

MODES = ("a", "A", "C1", "C2")
N_MODES = 4
DEFAULT_MAX_SECTOR = 8
MAX_SECTOR_ENV = "HOLOMEM_MAX_SECTOR"


def max_sector() -> int:
    """Largest admissible sector index (``HOLOMEM_MAX_SECTOR`` overrides)."""
    raw = os.environ.get(MAX_SECTOR_ENV)
    if raw is None or raw == "":
        return DEFAULT_MAX_SECTOR
    try:
        value = int(raw)
    except ValueError as exc:
        raise CapacityError(f"{MAX_SECTOR_ENV}={raw!r} is not an integer") from exc
    if value < 0:
        raise CapacityError(f"{MAX_SECTOR_ENV} must be non-negative, got {value}")
    return value


def check_sector(l: int) -> int:
    if int(l) != l or l < 0:
        raise ValueError(f"sector index must be a non-negative integer, got {l!r}")
    limit = max_sector()
    if l > limit:
        raise CapacityError(
            f"sector l={l} exceeds the maximum sector {limit} "
            f"(set {MAX_SECTOR_ENV} to raise the limit)"
        )
    return int(l)


def mode_index(mode: int | str) -> int:
    """Map a mode label ('a', 'A', 'C1', 'C2') or integer 0..3 to its index."""
    if isinstance(mode, str):
        try:
            return MODES.index(mode)
        except ValueError:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}") from None
    if isinstance(mode, (int, np.integer)) and not isinstance(mode, bool) and 0 <= mode < N_MODES:
        return int(mode)
    raise ValueError(f"invalid mode index {mode!r}; expected 0..3 or one of {MODES}")


@dataclass(frozen=True, order=True)
class OccupationState:
    n_a: int
    n_A: int
    n_C1: int
    n_C2: int

    def __post_init__(self):
        if min(self.as_tuple()) < 0:
            raise ValueError(f"negative occupation in {self.as_tuple()}")

    @property
    def total(self) -> int:
        return self.n_a + self.n_A + self.n_C1 + self.n_C2

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.n_a, self.n_A, self.n_C1, self.n_C2)


@dataclass(frozen=True)
class SectorBasis:
    l: int
    states: tuple[OccupationState, ...]

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[OccupationState]:
        return iter(self.states)

    @property
    def size(self) -> int:
        return len(self.states)

    def index(self, occupation) -> int:
        key = occupation.as_tuple() if isinstance(occupation, OccupationState) else tuple(occupation)
        return _index_map(self.l)[key]


@dataclass(frozen=True)
class SectorVector:
    """Amplitudes of a state in sector ``l``, indexed in basis order."""

    l: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (sector_dim(self.l),):
            raise ValueError(
                f"sector {self.l} needs {sector_dim(self.l)} amplitudes, got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "SectorVector":
        return SectorVector(self.l, self.amplitudes / self.norm())

    def __getitem__(self, occupation) -> complex:
        return complex(self.amplitudes[sector_basis(self.l).index(occupation)])


def sector_dim(l: int) -> int:
    return (l + 1) * (l + 2) * (l + 3) // 6


@lru_cache(maxsize=None)
def _tuples(l: int) -> tuple[tuple[int, int, int, int], ...]:
    tuples = [t + (l - sum(t),) for t in product(range(l + 1), repeat=3) if sum(t) <= l]
    return tuple(sorted(tuples, reverse=True))


@lru_cache(maxsize=None)
def _index_map(l: int) -> dict:
    return {t: k for k, t in enumerate(_tuples(l))}


def sector_basis(l: int) -> SectorBasis:
    """Occupation basis of the sector with ``l`` total excitations."""
    l = check_sector(l)
    return SectorBasis(l, tuple(OccupationState(*t) for t in _tuples(l)))


def basis_state(occupation) -> SectorVector:
    occ = occupation.as_tuple() if isinstance(occupation, OccupationState) else tuple(occupation)
    l = check_sector(sum(occ))
    amps = np.zeros(sector_dim(l), dtype=complex)
    amps[_index_map(l)[occ]] = 1.0
    return SectorVector(l, amps)


def vacuum() -> SectorVector:
    return SectorVector(0, np.ones(1, dtype=complex))


def photon_state(l: int) -> SectorVector:
    """Fock state |l> of the probe with every collective mode empty."""
    return basis_state((l, 0, 0, 0))


def _frozen(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def _creation(i: int, l: int) -> np.ndarray:
    target = _index_map(l + 1)
    out = np.zeros((sector_dim(l + 1), sector_dim(l)))
    for q, occ in enumerate(_tuples(l)):
        raised = list(occ)
        raised[i] += 1
        out[target[tuple(raised)], q] = np.sqrt(raised[i])
    return _frozen(out)


def creation_matrix(mode, l: int) -> np.ndarray:
    """Matrix of a_i^dagger mapping sector ``l`` into sector ``l + 1`` (read-only)."""
    i = mode_index(mode)
    check_sector(l)
    check_sector(l + 1)
    return _creation(i, int(l))


def annihilation_matrix(mode, l: int) -> np.ndarray:
    """Matrix of a_i mapping sector ``l + 1`` down to sector ``l``."""
    return creation_matrix(mode, l).T


@lru_cache(maxsize=None)
def _bilinear(i: int, j: int, l: int) -> np.ndarray:
    if l == 0:
        return _frozen(np.zeros((1, 1)))
    # a_i^dag a_j = (a_i^dag from l-1) @ (a_j from l)
    return _frozen(_creation(i, l - 1) @ _creation(j, l - 1).T)


def bilinear(i, j, l: int) -> np.ndarray:
    """Matrix of a_i^dagger a_j restricted to sector ``l`` (read-only)."""
    ii, jj = mode_index(i), mode_index(j)
    return _bilinear(ii, jj, check_sector(l))


@lru_cache(maxsize=None)
def bilinear_stack(l: int) -> np.ndarray:
    """All sixteen bilinears as an array of shape (4, 4, d, d)."""
    l = check_sector(l)
    d = sector_dim(l)
    out = np.empty((N_MODES, N_MODES, d, d))
    for i in range(N_MODES):
        for j in range(N_MODES):
            out[i, j] = _bilinear(i, j, l)
    return _frozen(out)


def number_operator(mode, l: int) -> np.ndarray:
    return bilinear(mode, mode, l)


def apply_creation(u, v: SectorVector) -> SectorVector:
    """Return (sum_i u_i a_i^dagger) v.

    ``u`` holds the coefficients of the creation operators directly, so a
    polariton ``P = sum_i w_i a_i`` is created with ``u = conj(w)``.
    """
    coeffs = np.asarray(getattr(u, "creation", u), dtype=complex)
    if coeffs.shape != (N_MODES,):
        raise ValueError(f"mode vector must have 4 components, got shape {coeffs.shape}")
    check_sector(v.l + 1)
    out = np.zeros(sector_dim(v.l + 1), dtype=complex)
    for i in range(N_MODES):
        if coeffs[i] != 0:
            out += coeffs[i] * (_creation(i, v.l) @ v.amplitudes)
    return SectorVector(v.l + 1, out)


def mode_occupations(v: SectorVector) -> np.ndarray:
    """Expectation values <n_i> for the four modes."""
    occ = np.array(_tuples(v.l), dtype=float)
    return np.abs(v.amplitudes) ** 2 @ occ


def second_quantize(u: np.ndarray, l: int) -> np.ndarray:
    """Sector-l matrix of the mode transformation a_k^dag -> sum_i u[i, k] a_i^dag.

    Column n is prod_k (sum_i u[i, k] a_i^dag)^(n_k) / sqrt(n_k!) |0>; for a
    unitary ``u`` the result is unitary.
    """
    u = np.asarray(u, dtype=complex)
    l = check_sector(l)
    out = np.empty((sector_dim(l), sector_dim(l)), dtype=complex)
    for col, occ in enumerate(_tuples(l)):
        v = vacuum()
        norm = 1.0
        for k, n_k in enumerate(occ):
            for _ in range(n_k):
                v = apply_creation(u[:, k], v)
            norm *= math.factorial(n_k)
        out[:, col] = v.amplitudes / math.sqrt(norm)
    return out
