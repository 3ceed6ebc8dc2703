"""Exact sector evolution, adiabaticity margins and dark-space diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import fock
from ._integrate import StepStats, propagate
from .darkspace import dark_basis, polariton_frame, polariton_generator
from .model import SystemParams, lift, single_particle_h
from .schedules import PulseSchedule

MIN_SAMPLES = 200


@dataclass(frozen=True)
class AdiabaticMargins:
    """g sqrt(N) x_k / (g^2 N + Omega^2)^(3/2) for x_k = |dOmega_k/dt| and Omega |delta_k|."""

    rate_1: float
    rate_2: float
    detuning_1: float
    detuning_2: float

    @property
    def max(self) -> float:
        return max(self.rate_1, self.rate_2, self.detuning_1, self.detuning_2)


def adiabatic_margins(p: SystemParams, s: PulseSchedule, t: float) -> AdiabaticMargins:
    o1, o2 = s.omegas(t)
    d1, d2 = s.omega_dots(t)
    g = p.g_sqrt_N
    omega = math.hypot(o1, o2)
    scale = g / (g * g + omega * omega) ** 1.5
    return AdiabaticMargins(
        rate_1=scale * abs(d1),
        rate_2=scale * abs(d2),
        detuning_1=scale * omega * abs(p.delta_1),
        detuning_2=scale * omega * abs(p.delta_2),
    )


def max_margin(p: SystemParams, s: PulseSchedule, t0: float = 0.0, t1: float | None = None,
               samples: int = 4001) -> float:
    """Largest adiabatic margin over [t0, t1]: dense scan plus local refinement."""
    t1 = s.duration if t1 is None else t1
    grid = np.union1d(np.linspace(t0, t1, samples), [b for b in s.breakpoints() if t0 <= b <= t1])
    values = np.array([adiabatic_margins(p, s, t).max for t in grid])
    k = int(np.argmax(values))
    best = float(values[k])
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda u: -adiabatic_margins(p, s, u).max, bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-9 * max(1.0, t1)})
        best = max(best, -float(res.fun))
    return best


@dataclass(frozen=True)
class EvolutionReport:
    final: fock.SectorVector
    times: np.ndarray
    coefficients: np.ndarray   # dark coefficients c_m(t), shape (len(times), l + 1)
    leakage: np.ndarray
    max_margin: float
    steps: int


def fidelity(psi: fock.SectorVector, chi: fock.SectorVector) -> float:
    """|<psi|chi>|^2."""
    if psi.l != chi.l:
        raise ValueError(f"sector mismatch: l={psi.l} vs l={chi.l}")
    return float(min(abs(np.vdot(psi.amplitudes, chi.amplitudes)) ** 2, 1.0))


def dark_leakage(p: SystemParams, s: PulseSchedule, t: float, l: int, psi) -> tuple[np.ndarray, float]:
    """Dark coefficients c_m = <D_{l-m,m}(t)|psi> and the weight outside the dark space."""
    amps = getattr(psi, "amplitudes", psi)
    c = dark_basis(p, s, t, l).coefficients(amps)
    leak = float(np.vdot(amps, amps).real - np.vdot(c, c).real)
    return c, max(leak, 0.0)


def _dark_indices(l: int) -> list[int]:
    # frame-mode occupations (n_D, n_E, 0, 0) in dark-column order m = 0..l
    return [fock.sector_basis(l).index((l - m, m, 0, 0)) for m in range(l + 1)]


def evolve_sector(p: SystemParams, s: PulseSchedule, l: int, psi0: fock.SectorVector,
                  t0: float = 0.0, t1: float | None = None, tol: float = 1e-9,
                  samples: int = MIN_SAMPLES + 1, max_step: float | None = None,
                  frame: str = "polariton") -> EvolutionReport:
    """Integrate i d/dt psi = H_l(t) psi exactly (no adiabatic reduction).

    ``frame="polariton"`` propagates the amplitudes on the instantaneous
    modes (D, E, B, A), where the generator is the second-quantized
    F^dag h F - i F^dag dF/dt; this removes the stiffness of large control
    amplitudes without approximating anything.  ``frame="lab"`` steps
    H_l(t) directly.  Steps are adaptive: fourth-order Magnus in the
    polariton frame, exponential midpoint in the lab frame.

    Dark projections are recorded on a uniform grid of ``samples`` points plus
    the schedule breakpoints.
    """
    fock.check_sector(l)
    t1 = s.duration if t1 is None else t1
    if not 0 <= t0 <= t1 <= s.duration * (1 + 1e-12):
        raise ValueError(f"need 0 <= t0 <= t1 <= T, got [{t0}, {t1}]")
    if psi0.l != l:
        raise ValueError(f"initial state lives in sector {psi0.l}, not {l}")
    if abs(psi0.norm() - 1.0) > 1e-6:
        raise ValueError(f"initial state must be normalized (norm = {psi0.norm():.9f})")
    if frame not in ("polariton", "lab"):
        raise ValueError(f"frame must be 'polariton' or 'lab', got {frame!r}")
    samples = max(int(samples), MIN_SAMPLES)
    grid = np.union1d(np.linspace(t0, t1, samples),
                      [b for b in s.breakpoints() if t0 <= b <= t1])
    stack = fock.bilinear_stack(l)
    coeffs, leaks = [], []

    if frame == "lab":
        def hamiltonian(u):
            return np.tensordot(single_particle_h(p, s, u), stack, axes=([0, 1], [0, 1]))

        def record(u, y):
            c, leak = dark_leakage(p, s, u, l, y)
            coeffs.append(c)
            leaks.append(leak)

        y0 = psi0.amplitudes
    else:
        dark = _dark_indices(l)

        def hamiltonian(u):
            return lift(polariton_generator(p, s, u), l)

        def record(u, y):
            c = y[dark]
            coeffs.append(c)
            leaks.append(max(float(np.vdot(y, y).real - np.vdot(c, c).real), 0.0))

        y0 = fock.second_quantize(polariton_frame(p, s, t0)[0], l).conj().T @ psi0.amplitudes

    record(t0, y0)
    stats = StepStats()
    y1 = propagate(hamiltonian, y0, t0, t1, tol=tol, stops=grid[1:-1],
                   on_stop=record, max_step=max_step, stats=stats,
                   order=4 if frame == "polariton" else 2)
    if frame == "polariton":
        y1 = fock.second_quantize(polariton_frame(p, s, t1)[0], l) @ y1
    if t1 == t0:
        coeffs, leaks = coeffs[:1], leaks[:1]
    return EvolutionReport(
        final=fock.SectorVector(l, y1),
        times=grid if t1 > t0 else grid[:1],
        coefficients=np.array(coeffs),
        leakage=np.array(leaks),
        max_margin=max_margin(p, s, t0, t1),
        steps=stats.accepted,
    )


def mode_propagator(p: SystemParams, s: PulseSchedule, t0: float = 0.0, t1: float | None = None,
                    tol: float = 1e-10, stats: StepStats | None = None) -> np.ndarray:
    """Exact 4x4 single-particle propagator u(t1, t0) in the lab mode basis.

    H is quadratic and number conserving, so the sector-l propagator is
    ``fock.second_quantize(u, l)`` for every l.  Integration runs in the
    polariton frame with fourth-order Magnus steps.
    """
    t1 = s.duration if t1 is None else t1
    if not 0 <= t0 <= t1 <= s.duration * (1 + 1e-12):
        raise ValueError(f"need 0 <= t0 <= t1 <= T, got [{t0}, {t1}]")
    u = propagate(lambda t: polariton_generator(p, s, t), np.eye(4, dtype=complex), t0, t1,
                  tol=tol, stops=[b for b in s.breakpoints() if t0 < b < t1],
                  stats=stats, order=4)
    return polariton_frame(p, s, t1)[0] @ u @ polariton_frame(p, s, t0)[0].conj().T


def adiabatic_deviation(p: SystemParams, s: PulseSchedule, l: int, c0=None,
                        tol: float = 1e-10) -> float:
    """1 - |<W c0 | c(T)>|^2 between the holonomy prediction and exact dark coefficients.

    The exact run starts in the dark state with coefficients ``c0``
    (default: all weight on m = 0) and is projected onto the dark basis at T.
    """
    from .holonomy import holonomy_integrate

    c0 = np.eye(l + 1, dtype=complex)[0] if c0 is None else np.asarray(c0, dtype=complex)
    c0 = c0 / np.linalg.norm(c0)
    psi0 = dark_basis(p, s, 0.0, l).state(c0)
    report = evolve_sector(p, s, l, psi0, tol=tol)
    predicted = holonomy_integrate(p, s, l) @ c0
    return float(max(1.0 - abs(np.vdot(predicted, report.coefficients[-1])) ** 2, 0.0))
