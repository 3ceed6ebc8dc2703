"""Brute-force N-atom check of the collective-boson description.

Every atom has four levels ordered (b, a, 1, 2); the probe photon is a
truncated oscillator with at most ``n_max`` quanta.  Collective operators are
literal sums of single-atom flips sigma_{mu nu}^(j) = |mu><nu|_j on the full
tensor-product space, so nothing here assumes bosonic statistics.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import fock
from .errors import CapacityError
from .model import SystemParams, sector_h
from .schedules import PulseSchedule

LEVELS = ("b", "a", "1", "2")
MAX_ATOMS = 6
MAX_PHOTONS = 3
# relative zero-eigenvalue threshold
ZERO_TOL = 1e-8

# boson mode (a, A, C1, C2) -> atomic level occupied by one excitation of it
_MODE_LEVEL = {1: LEVELS.index("a"), 2: LEVELS.index("1"), 3: LEVELS.index("2")}


def _level(name: str) -> int:
    try:
        return LEVELS.index(str(name))
    except ValueError:
        raise ValueError(f"unknown atomic level {name!r}, expected one of {LEVELS}") from None


@dataclass
class FiniteSystem:
    N: int
    n_max: int
    ops: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return 4 ** self.N * (self.n_max + 1)

    def flip(self, mu: str, nu: str, j: int) -> sp.csr_matrix:
        """sigma_{mu nu} on atom j (0-based), identity elsewhere."""
        if not 0 <= j < self.N:
            raise IndexError(f"atom index {j} outside 0..{self.N - 1}")
        local = sp.coo_matrix(([1.0], ([_level(mu)], [_level(nu)])), shape=(4, 4))
        left = sp.identity(4 ** j, format="csr")
        right = sp.identity(4 ** (self.N - j - 1) * (self.n_max + 1), format="csr")
        return sp.kron(sp.kron(left, local), right, format="csr")

    def collective(self, mu: str, nu: str) -> sp.csr_matrix:
        """sum_j sigma_{mu nu}^(j)."""
        key = ("sum", mu, nu)
        if key not in self.ops:
            self.ops[key] = sum(self.flip(mu, nu, j) for j in range(self.N)).tocsr()
        return self.ops[key]

    def __getitem__(self, name: str) -> sp.csr_matrix:
        return self.ops[name]


def build_finite_system(N: int, n_max: int = 1) -> FiniteSystem:
    """Assemble S, A, T_+-^(k), C_k and the photon annihilator a."""
    if not 1 <= N <= MAX_ATOMS:
        raise CapacityError(f"atom count N={N} outside 1..{MAX_ATOMS}")
    if not 0 <= n_max <= MAX_PHOTONS:
        raise CapacityError(f"photon truncation n_max={n_max} outside 0..{MAX_PHOTONS}")
    fs = FiniteSystem(N, n_max)
    root = 1.0 / math.sqrt(N)
    fs.ops["S"] = fs.collective("a", "a")
    fs.ops["A"] = (root * fs.collective("b", "a")).tocsr()
    for k in ("1", "2"):
        fs.ops[f"T-{k}"] = fs.collective(k, "a")
        fs.ops[f"T+{k}"] = fs.collective("a", k)
        fs.ops[f"C{k}"] = (root * fs.collective("b", k)).tocsr()
    photon = sp.diags(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1, format="csr")
    fs.ops["a"] = sp.kron(sp.identity(4 ** N, format="csr"), photon, format="csr")
    return fs


def finite_hamiltonian(fs: FiniteSystem, p: SystemParams, s: PulseSchedule, t: float) -> sp.csr_matrix:
    """Delta_p S + (g sqrt(N) a A^dag + Omega_k e^{i phi_k} T_+^(k) + h.c.), no boson approximation."""
    t = s.check_time(t)
    o1, o2 = s.omegas(t)
    coupling = (p.g_sqrt_N * (fs["a"] @ fs["A"].conj().T)
                + o1 * np.exp(1j * p.delta_1 * t) * fs["T+1"]
                + o2 * np.exp(1j * p.delta_2 * t) * fs["T+2"])
    return (p.delta_p * fs["S"] + coupling + coupling.conj().T).tocsr()


def _index(fs: FiniteSystem, levels, photons: int) -> int:
    idx = 0
    for lev in levels:
        idx = 4 * idx + lev
    return idx * (fs.n_max + 1) + photons


def symmetric_state(fs: FiniteSystem, occupation) -> np.ndarray:
    """Normalized permutation-symmetric state for boson occupation (n_a, n_A, n_C1, n_C2).

    n_A, n_C1, n_C2 count atoms in levels a, 1, 2; the rest sit in b.
    """
    n_photon, *counts = (int(x) for x in occupation)
    if n_photon > fs.n_max or sum(counts) > fs.N or min(n_photon, *counts) < 0:
        raise CapacityError(f"occupation {tuple(occupation)} does not fit N={fs.N}, n_max={fs.n_max}")
    pattern = [_MODE_LEVEL[m] for m, c in zip((1, 2, 3), counts) for _ in range(c)]
    pattern += [0] * (fs.N - len(pattern))
    v = np.zeros(fs.dim, dtype=complex)
    for perm in set(itertools.permutations(pattern)):
        v[_index(fs, perm, n_photon)] = 1.0
    return v / np.linalg.norm(v)


def symmetric_block(fs: FiniteSystem, l: int) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """Occupations (in sector-basis order) and the isometry onto the symmetric excitation-l space."""
    occs = [occ for occ in (st.as_tuple() for st in fock.sector_basis(l).states)
            if occ[0] <= fs.n_max and sum(occ[1:]) <= fs.N]
    return occs, np.stack([symmetric_state(fs, occ) for occ in occs], axis=1)


def commutator_defect(fs: FiniteSystem, state: str = "ground", k: int = 1) -> float:
    """<psi| [C_k, C_k^dag] - 1 |psi> for psi = |b...b> ("ground") or C_k^dag|b...b> ("one-k-excitation")."""
    if k not in (1, 2):
        raise ValueError(f"k must be 1 or 2, got {k}")
    occ = {"ground": (0, 0, 0, 0), "one-k-excitation": (0, 0, 1, 0) if k == 1 else (0, 0, 0, 1)}
    if state not in occ:
        raise ValueError(f"state must be one of {sorted(occ)}, got {state!r}")
    psi = symmetric_state(fs, occ[state])
    C = fs[f"C{k}"]
    comm = C @ C.conj().T - C.conj().T @ C
    return float(np.vdot(psi, comm @ psi).real - np.vdot(psi, psi).real)


@dataclass(frozen=True)
class DegeneracyReport:
    zero_modes: int
    predicted: int          # l + 1
    max_deviation: float    # largest |eigenvalue difference| to the bosonic sector spectrum
    invariance: float       # ||H Q - Q (Q^dag H Q)||, zero if the symmetric space is invariant


def block_hamiltonian(fs: FiniteSystem, p: SystemParams, s: PulseSchedule, t: float,
                      l: int) -> tuple[np.ndarray, float]:
    """Q^dag H Q on the symmetric excitation-l space and the invariance residual."""
    _, Q = symmetric_block(fs, l)
    HQ = finite_hamiltonian(fs, p, s, t) @ Q
    block = Q.conj().T @ HQ
    return block, float(np.linalg.norm(HQ - Q @ block))


def dark_degeneracy_check(fs: FiniteSystem, p: SystemParams, s: PulseSchedule, t: float,
                          l: int = 1) -> DegeneracyReport:
    """Count zero eigenvalues of the symmetric excitation-l block and compare with l + 1."""
    if not 0 <= l <= 2:
        raise ValueError(f"excitation must be 0, 1 or 2, got {l}")
    occs, _ = symmetric_block(fs, l)
    block, residual = block_hamiltonian(fs, p, s, t, l)
    evals = np.linalg.eigvalsh(block)
    scale = max(np.linalg.norm(block, 2), 1.0)
    zeros = int(np.sum(np.abs(evals) < ZERO_TOL * scale))
    if len(occs) == fock.sector_dim(l):
        boson = np.linalg.eigvalsh(sector_h(p, s, t, l))
        deviation = float(np.max(np.abs(evals - boson))) if evals.size else 0.0
    else:
        deviation = float("nan")
    return DegeneracyReport(zeros, l + 1, deviation, residual)

