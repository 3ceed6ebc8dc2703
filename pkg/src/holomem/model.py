"""System parameters, mixing angles and the bosonized interaction Hamiltonian.

Frequencies are in units of the collective coupling g sqrt(N) by default
(``g_sqrt_N = 1``), times in units of 1 / (g sqrt(N)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .errors import DegenerateScheduleError
from .schedules import PulseSchedule

# Omega(t) must stay above this fraction of g sqrt(N) for kappa to be defined.
OMEGA_FLOOR = 1e-6

PHOTON, EXCITED, META_1, META_2 = range(4)


@dataclass(frozen=True)
class SystemParams:
    g_sqrt_N: float = 1.0
    delta_p: float = 0.0
    delta_1: float = 0.0
    delta_2: float = 0.0

    def __post_init__(self):
        for name in ("g_sqrt_N", "delta_p", "delta_1", "delta_2"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.g_sqrt_N <= 0:
            raise ValueError(f"g_sqrt_N must be positive, got {self.g_sqrt_N}")

    @property
    def resonant(self) -> bool:
        """True when both three-photon mismatches vanish."""
        return self.delta_1 == 0.0 and self.delta_2 == 0.0


@dataclass(frozen=True)
class MixingAngles:
    Omega: float
    theta: float
    kappa: float
    kappa_dot: float
    theta_dot: float
    phi_1: float
    phi_2: float


def mixing_angles(p: SystemParams, s: PulseSchedule, t: float) -> MixingAngles:
    """theta = arctan(g sqrt(N) / Omega), kappa = arctan(Omega_2 / Omega_1) and rates."""
    t = s.check_time(t)
    o1, o2, d1, d2 = s.controls(t)
    omega = math.hypot(o1, o2)
    if omega < OMEGA_FLOOR * p.g_sqrt_N:
        raise DegenerateScheduleError(
            f"Omega({t}) = {omega:.3g} is below {OMEGA_FLOOR:g} g sqrt(N); kappa is undefined"
        )
    g = p.g_sqrt_N
    omega_dot = (o1 * d1 + o2 * d2) / omega
    return MixingAngles(
        Omega=omega,
        theta=math.atan2(g, omega),
        kappa=math.atan2(o2, o1),
        kappa_dot=(o1 * d2 - o2 * d1) / (omega * omega),
        theta_dot=-g * omega_dot / (g * g + omega * omega),
        phi_1=p.delta_1 * t,
        phi_2=p.delta_2 * t,
    )


def single_particle_h(p: SystemParams, s: PulseSchedule, t: float) -> np.ndarray:
    """4x4 coefficient matrix h with H = sum_ij h_ij a_i^dag a_j.

    Delta_p S enters once (it is already Hermitian); only the three coupling
    terms receive a Hermitian conjugate.
    """
    t = s.check_time(t)
    o1, o2 = s.omegas(t)
    h = np.zeros((4, 4), dtype=complex)
    h[EXCITED, EXCITED] = p.delta_p
    h[EXCITED, PHOTON] = p.g_sqrt_N
    h[EXCITED, META_1] = o1 * np.exp(1j * p.delta_1 * t)
    h[EXCITED, META_2] = o2 * np.exp(1j * p.delta_2 * t)
    h[PHOTON, EXCITED] = np.conj(h[EXCITED, PHOTON])
    h[META_1, EXCITED] = np.conj(h[EXCITED, META_1])
    h[META_2, EXCITED] = np.conj(h[EXCITED, META_2])
    return h


def lift(h: np.ndarray, l: int) -> np.ndarray:
    """Second-quantized sector-l matrix of the quadratic form sum_ij h_ij a_i^dag a_j."""
    return np.tensordot(h, fock.bilinear_stack(l), axes=([0, 1], [0, 1]))


def sector_h(p: SystemParams, s: PulseSchedule, t: float, l: int) -> np.ndarray:
    return lift(single_particle_h(p, s, t), l)
