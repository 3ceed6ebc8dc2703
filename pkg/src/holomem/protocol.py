"""Quantum-memory protocol: write, hold, read, retrieval and the geometric qubit gate.

An input photonic state sum_l c_l |l>_p |b> is processed sector by sector.
The adiabatic mode identifies |l>_p with the dark state |D_{l,0}(0)> and
transports its dark coefficients with the holonomy W_l; the exact mode
propagates the photon Fock states under the full Hamiltonian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from . import fock
from .darkspace import dark_basis
from .dynamics import max_margin, mode_propagator
from .errors import DesignError, ProtocolSetupError
from .holonomy import holonomy_integrate, phi_of_t
from .model import EXCITED, META_1, META_2, PHOTON, SystemParams
from .schedules import HALF_PI, CycleDesign, PulseSchedule, cycle_for_margin

MODES = ("adiabatic", "exact")
# Omega >> g sqrt(N) and Omega << g sqrt(N) are read as a factor of 10
DEFAULT_RATIO = 10.0


@dataclass(frozen=True)
class PhotonState:
    """Photon-number amplitudes c_l, l = 0..l_max, with the atoms in |b>."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex).ravel()
        if c.size == 0:
            raise ValueError("need at least one coefficient")
        fock.check_sector(c.size - 1)
        norm = float(np.vdot(c, c).real)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"photon state must be normalized, sum |c_l|^2 = {norm!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def l_max(self) -> int:
        return self.coefficients.size - 1

    @classmethod
    def fock(cls, l: int) -> "PhotonState":
        c = np.zeros(l + 1, dtype=complex)
        c[l] = 1.0
        return cls(c)

    @classmethod
    def random(cls, l_max: int, rng: np.random.Generator) -> "PhotonState":
        c = rng.normal(size=l_max + 1) + 1j * rng.normal(size=l_max + 1)
        return cls(c / np.linalg.norm(c))

    def sectors(self):
        """(l, c_l) for the non-zero components."""
        return [(l, c) for l, c in enumerate(self.coefficients) if c != 0]


def primed_coefficients(c0: complex, l: int) -> np.ndarray:
    """c'_m = (-1)^(l-m) sqrt(l!) c0 / ((i sqrt 2)^l sqrt(m! (l-m)!)), m = 0..l.

    Expansion of c0 |D_{l,0}> over the primed dark states |D'_{l-m,m}>.
    """
    if l < 0:
        raise ValueError("l must be non-negative")
    pref = math.sqrt(math.factorial(l)) * complex(c0) / (1j * math.sqrt(2.0)) ** l
    return np.array([(-1) ** (l - m) * pref / math.sqrt(math.factorial(m) * math.factorial(l - m))
                     for m in range(l + 1)])


def _round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def retrieval_condition(p: SystemParams, s: PulseSchedule) -> tuple[float, int, float]:
    """(phi(T), j, |phi(T) - 2 j pi|) with j the nearest integer to phi(T) / 2pi."""
    phi = phi_of_t(p, s, s.duration)
    j = _round_half_away(phi / (2 * math.pi))
    return phi, j, abs(phi - 2 * math.pi * j)


def _omega_ratio(p: SystemParams, s: PulseSchedule, t: float) -> float:
    return math.hypot(*s.omegas(t)) / p.g_sqrt_N


def check_cycle(p: SystemParams, s: PulseSchedule, ratio: float = DEFAULT_RATIO) -> None:
    """Both endpoints need Omega >= ratio * g sqrt(N) (theta near 0)."""
    bad = [f"{name} (t={t:g}): Omega/g sqrt(N) = {_omega_ratio(p, s, t):.4g}"
           for name, t in (("start", 0.0), ("end", s.duration))
           if _omega_ratio(p, s, t) < ratio]
    if bad:
        raise ProtocolSetupError(f"schedule is not cyclic, need Omega >= {ratio:g} g sqrt(N) at "
                                 + "; ".join(bad))


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _occupations(states: dict[int, np.ndarray]) -> tuple[float, float]:
    photon = atomic = 0.0
    for l, amps in states.items():
        occ = fock.mode_occupations(fock.SectorVector(l, amps))
        photon += float(occ[PHOTON])
        atomic += float(occ[EXCITED] + occ[META_1] + occ[META_2])
    return photon, atomic


def overlap(a: dict[int, np.ndarray], b: dict[int, np.ndarray]) -> complex:
    """<a|b> for states stored as {l: sector amplitudes}."""
    return complex(sum(np.vdot(a[l], b[l]) for l in a.keys() & b.keys()))


def photon_input(state: PhotonState) -> dict[int, np.ndarray]:
    """The input as Fock-space sector vectors, c_l |l, 0, 0, 0>."""
    return {l: c * fock.photon_state(l).amplitudes for l, c in state.sectors()}


def encoded_input(p: SystemParams, s: PulseSchedule, state: PhotonState, t: float = 0.0):
    """The input mapped onto the dark states, c_l |D_{l,0}(t)>."""
    return {l: c * dark_basis(p, s, t, l).frame[:, 0] for l, c in state.sectors()}


@dataclass
class SectorResult:
    l: int
    weight: complex                       # input amplitude c_l
    holonomy: np.ndarray                  # adiabatic W_l over the run
    coefficients: np.ndarray              # dark coefficients at the end, including c_l
    leakage: float                        # |c_l|^2 minus the weight in the dark space


@dataclass
class Trajectory:
    """Samples of a run: dark coefficients per sector, leakage and photon number."""

    times: np.ndarray
    coefficients: dict[int, np.ndarray]   # l -> (len(times), l + 1)
    leakage: dict[int, np.ndarray]
    photon_occupancy: np.ndarray


@dataclass
class StorageReport:
    mode: str
    time: float                           # storage time tau
    sectors: list[SectorResult]
    state: dict[int, np.ndarray]
    photon_occupancy: float
    atomic_occupancy: float
    max_margin: float
    trajectory: Trajectory | None = None


@dataclass
class CycleReport:
    mode: str
    phi: float
    j: int
    deviation: float
    sectors: list[SectorResult]
    state: dict[int, np.ndarray]
    fidelity: float
    encoding_overlap: float               # |<input|encoded dark input>|^2
    max_margin: float
    trajectory: Trajectory | None = None


def _transport(p, s, state: PhotonState, t1: float, mode: str, samples: int = 0):
    """Shared core of run_storage and run_cycle.

    Propagates segment by segment over the sampling grid (just [0, t1] when
    ``samples`` is 0) and returns per-sector results, final states and the
    optional trajectory.
    """
    _check_mode(mode)
    sectors = state.sectors()
    grid = [0.0, t1]
    if samples:
        grid = np.union1d(np.linspace(0.0, t1, max(int(samples), 2)),
                          [b for b in s.breakpoints() if b <= t1]).tolist()
    u = np.eye(4, dtype=complex)
    W = {l: np.eye(l + 1, dtype=complex) for l, _ in sectors}
    rows = []

    def snapshot(t):
        out = {}
        for l, c in sectors:
            basis = dark_basis(p, s, t, l)
            if mode == "adiabatic":
                coeffs = c * W[l][:, 0]
                amps = basis.frame @ coeffs
            else:
                amps = c * (fock.second_quantize(u, l) @ fock.photon_state(l).amplitudes)
                coeffs = basis.coefficients(amps)
            out[l] = (amps, coeffs, max(abs(c) ** 2 - float(np.vdot(coeffs, coeffs).real), 0.0))
        return out

    if samples:
        rows.append(snapshot(0.0))
    # the vacuum is stationary, so only excited sectors need the propagator
    propagate = mode == "exact" and any(l > 0 for l, _ in sectors)
    for a, b in zip(grid, grid[1:]):
        if propagate:
            u = mode_propagator(p, s, a, b) @ u
        for l, _ in sectors:
            W[l] = holonomy_integrate(p, s, l, a, b) @ W[l]
        if samples:
            rows.append(snapshot(b))
    last = rows[-1] if samples else snapshot(t1)
    final = {l: last[l][0] for l, _ in sectors}
    results = [SectorResult(l, complex(c), W[l], last[l][1], last[l][2]) for l, c in sectors]
    trajectory = None
    if samples:
        trajectory = Trajectory(
            times=np.array(grid),
            coefficients={l: np.array([r[l][1] for r in rows]) for l, _ in sectors},
            leakage={l: np.array([r[l][2] for r in rows]) for l, _ in sectors},
            photon_occupancy=np.array([_occupations({l: r[l][0] for l, _ in sectors})[0]
                                       for r in rows]),
        )
    return results, final, trajectory


def run_storage(p: SystemParams, s: PulseSchedule, state: PhotonState, mode: str = "adiabatic",
                ratio: float = DEFAULT_RATIO, samples: int = 0) -> StorageReport:
    """Write the photonic input into the atomic modes, reporting the state at tau."""
    tau = s.storage_time
    problems = []
    if _omega_ratio(p, s, 0.0) < ratio:
        problems.append(f"Omega(0)/g sqrt(N) = {_omega_ratio(p, s, 0.0):.4g} < {ratio:g}")
    if _omega_ratio(p, s, tau) > 1.0 / ratio:
        problems.append(f"Omega(tau={tau:g})/g sqrt(N) = {_omega_ratio(p, s, tau):.4g} > {1 / ratio:g}")
    if problems:
        raise ProtocolSetupError("storage preconditions violated: " + "; ".join(problems))
    sectors, final, traj = _transport(p, s, state, tau, mode, samples)
    photon, atomic = _occupations(final)
    return StorageReport(mode, tau, sectors, final, photon, atomic, max_margin(p, s, 0.0, tau), traj)


def run_cycle(p: SystemParams, s: PulseSchedule, state: PhotonState, mode: str = "adiabatic",
              ratio: float = DEFAULT_RATIO, samples: int = 0) -> CycleReport:
    """Full write / rotate / read cycle and the fidelity of the output to the input.

    Adiabatic mode compares the transported state with the encoded input
    c_l |D_{l,0}(0)>; exact mode compares the propagated photon input with
    itself.  ``encoding_overlap`` quantifies the photon-to-dark mismatch at t=0.
    ``samples > 0`` also records a trajectory on that many uniform times.
    """
    check_cycle(p, s, ratio)
    phi, j, dev = retrieval_condition(p, s)
    sectors, final, traj = _transport(p, s, state, s.duration, mode, samples)
    encoded = encoded_input(p, s, state)
    reference = encoded if mode == "adiabatic" else photon_input(state)
    fid = min(abs(overlap(reference, final)) ** 2, 1.0)
    enc = min(abs(overlap(photon_input(state), encoded)) ** 2, 1.0)
    return CycleReport(mode, phi, j, dev, sectors, final, fid, enc, max_margin(p, s), traj)


def qubit_gate(p: SystemParams, s: PulseSchedule, ratio: float = DEFAULT_RATIO) -> np.ndarray:
    """Geometric gate on |0> = E'^dag|0>, |1> = D'^dag|0>: diag(e^{i phi(T)}, e^{-i phi(T)})."""
    check_cycle(p, s, ratio)
    if not p.resonant:
        raise ProtocolSetupError("the diagonal gate needs three-photon resonance (delta_1 = delta_2 = 0)")
    phi = phi_of_t(p, s, s.duration)
    return np.diag([np.exp(1j * phi), np.exp(-1j * phi)])


def exact_qubit_gate(p: SystemParams, s: PulseSchedule) -> np.ndarray:
    """2x2 block <q_j(T)| U(T, 0) |q_k(0)> of the exact one-excitation propagator."""
    u = mode_propagator(p, s)
    start = dark_basis(p, s, 0.0, 1, primed=True).frame[:, ::-1]
    end = dark_basis(p, s, s.duration, 1, primed=True).frame[:, ::-1]
    return end.conj().T @ fock.second_quantize(u, 1) @ start


def gate_fidelity(target: np.ndarray, actual: np.ndarray) -> float:
    """|tr(target^dag actual)|^2 / d^2."""
    d = target.shape[0]
    return float(abs(np.trace(target.conj().T @ actual)) ** 2 / d ** 2)


def design_phase_schedule(p: SystemParams, target_phi: float, family: CycleDesign | None = None,
                          *, max_margin_bound: float = 1e-3, headroom: float = 0.9,
                          loops: int | None = None, tol: float = 1e-12,
                          max_loops: int = 64) -> PulseSchedule:
    """Bisect the kappa sweep of the cycle family so that phi(T) = target_phi.

    Leg durations follow from ``headroom * max_margin_bound``.  Positive
    targets sweep kappa upward from 0, negative ones downward from pi/2; the
    number of loops is the smallest that keeps kappa inside [0, pi/2].
    """
    if not math.isfinite(target_phi):
        raise DesignError(f"target phase must be finite, got {target_phi}")
    family = family or CycleDesign()
    g = p.g_sqrt_N
    per_rad = g / math.hypot(g, family.omega_min) - g / math.hypot(g, family.omega_max)
    if per_rad <= 0:
        raise DesignError("omega_min must be below omega_max for a non-zero phase")
    sign = 1.0 if target_phi >= 0 else -1.0
    kappa_start = 0.0 if sign > 0 else HALF_PI

    def build(sweep: float, n: int) -> PulseSchedule:
        return cycle_for_margin(headroom * max_margin_bound, g, omega_max=family.omega_max,
                                omega_min=family.omega_min, sweep=sweep, loops=n,
                                kappa_start=kappa_start, hold_time=family.hold_time).build(g)

    if target_phi == 0:
        s = build(0.0, 1)
    else:
        n = loops or max(1, math.ceil(abs(target_phi) / (HALF_PI * per_rad) * (1 + 1e-9)))
        if n > max_loops:
            raise DesignError(f"|target| = {abs(target_phi):.6g} needs {n} loops "
                              f"(at most {HALF_PI * per_rad:.6g} rad per loop), limit is {max_loops}")

        def miss(sweep):
            trial = build(sweep, n)
            return phi_of_t(p, trial, trial.duration) - target_phi

        lo, hi = 0.0, sign * HALF_PI
        f_lo, f_hi = miss(lo), miss(hi)
        if f_lo * f_hi > 0:
            raise DesignError(f"target {target_phi:.6g} not bracketed by sweep in [{lo}, {hi:.6g}] "
                              f"with {n} loops: phi - target = {f_lo:.3g}, {f_hi:.3g}")
        sweep = bisect(miss, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)
        s = build(sweep, n)
        achieved = phi_of_t(p, s, s.duration)
        if abs(achieved - target_phi) > 1e-6:
            raise DesignError(f"bisection stalled: phi(T) = {achieved!r} for target {target_phi!r}")
    m = max_margin(p, s)
    if m > max_margin_bound:
        raise DesignError(f"designed schedule has max adiabatic margin {m:.3g} > {max_margin_bound:g}")
    return s
