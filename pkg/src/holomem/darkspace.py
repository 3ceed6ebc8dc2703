"""Polariton mode vectors and the instantaneous dark-state frames.

A polariton P = sum_i w_i a_i is stored by its annihilation coefficients w
(as the operators are written); its creation operator has coefficients
conj(w), exposed as :attr:`ModeVector.creation`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .model import MixingAngles, SystemParams, mixing_angles, sector_h
from .schedules import PulseSchedule

SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class ModeVector:
    amplitudes: np.ndarray
    label: str

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (4,):
            raise ValueError("a mode vector has four components (a, A, C1, C2)")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def creation(self) -> np.ndarray:
        return self.amplitudes.conj()

    def inner(self, other: "ModeVector") -> complex:
        """Bosonic commutator [P, Q^dagger] = sum_i p_i conj(q_i)."""
        return complex(np.vdot(other.amplitudes, self.amplitudes))


def _phased_mixing(p, s, t):
    ang = mixing_angles(p, s, t)
    e1 = np.exp(1j * ang.phi_1)
    e2 = np.exp(1j * ang.phi_2)
    return ang, e1, e2


def dark_mode_vectors(p: SystemParams, s: PulseSchedule, t: float) -> tuple[ModeVector, ModeVector]:
    """Annihilation coefficients of D = a cos(theta) - C sin(theta) and of E."""
    ang, e1, e2 = _phased_mixing(p, s, t)
    ct, st = math.cos(ang.theta), math.sin(ang.theta)
    ck, sk = math.cos(ang.kappa), math.sin(ang.kappa)
    u_d = np.array([ct, 0.0, -st * e1 * ck, -st * e2 * sk])
    u_e = np.array([0.0, 0.0, -e1 * sk, e2 * ck])
    return ModeVector(u_d, "D"), ModeVector(u_e, "E")


def primed_mode_vectors(p: SystemParams, s: PulseSchedule, t: float) -> tuple[ModeVector, ModeVector]:
    """D' = (iD + E)/sqrt(2) and E' = (-iD + E)/sqrt(2)."""
    u_d, u_e = dark_mode_vectors(p, s, t)
    d, e = u_d.amplitudes, u_e.amplitudes
    return (ModeVector(SQRT_HALF * (1j * d + e), "D'"),
            ModeVector(SQRT_HALF * (-1j * d + e), "E'"))


def bright_mode_vector(p: SystemParams, s: PulseSchedule, t: float) -> ModeVector:
    ang, e1, e2 = _phased_mixing(p, s, t)
    ct, st = math.cos(ang.theta), math.sin(ang.theta)
    ck, sk = math.cos(ang.kappa), math.sin(ang.kappa)
    return ModeVector(np.array([st, 0.0, ct * e1 * ck, ct * e2 * sk]), "B")


@dataclass(frozen=True)
class DarkBasis:
    """Columns m = 0..l hold |D_{l-m, m}(t)> (or the primed analogue)."""

    l: int
    frame: np.ndarray
    primed: bool
    t: float

    def column(self, m: int) -> fock.SectorVector:
        return fock.SectorVector(self.l, self.frame[:, m])

    def coefficients(self, psi) -> np.ndarray:
        amps = getattr(psi, "amplitudes", psi)
        return self.frame.conj().T @ amps

    def state(self, coefficients) -> fock.SectorVector:
        return fock.SectorVector(self.l, self.frame @ np.asarray(coefficients, dtype=complex))


def frame_from_modes(first: ModeVector, second: ModeVector, l: int) -> np.ndarray:
    """Matrix whose column m is P^dag^(l-m) Q^dag^m |0> / sqrt((l-m)! m!)."""
    fock.check_sector(l)
    cols = []
    for m in range(l + 1):
        v = fock.vacuum()
        for _ in range(m):
            v = fock.apply_creation(second, v)
        for _ in range(l - m):
            v = fock.apply_creation(first, v)
        cols.append(v.amplitudes / math.sqrt(math.factorial(l - m) * math.factorial(m)))
    return np.stack(cols, axis=1)


def dark_basis(p: SystemParams, s: PulseSchedule, t: float, l: int, primed: bool = False) -> DarkBasis:
    modes = primed_mode_vectors(p, s, t) if primed else dark_mode_vectors(p, s, t)
    frame = frame_from_modes(*modes, l)
    frame.setflags(write=False)
    return DarkBasis(l, frame, primed, float(t))


def darkness_residual(p: SystemParams, s: PulseSchedule, t: float, l: int) -> float:
    """max_m || H_l(t) |D_{l-m, m}(t)> ||."""
    if l == 0:
        return 0.0
    basis = dark_basis(p, s, t, l)
    h = sector_h(p, s, t, l)
    return float(np.max(np.linalg.norm(h @ basis.frame, axis=0)))


def polariton_frame(p: SystemParams, s: PulseSchedule, t: float,
                    angles: MixingAngles | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Instantaneous mode frame F = [D^dag, E^dag, B^dag, A^dag] and F^dag dF/dt.

    Entry (j, k) of F^dag dF/dt is the commutator [P_j, d/dt P_k^dag], which for
    j, k in {D, E} are the f-coefficients.  Derivatives are analytic.
    """
    ang = mixing_angles(p, s, t) if angles is None else angles
    e1 = np.exp(1j * ang.phi_1)
    e2 = np.exp(1j * ang.phi_2)
    ct, st = math.cos(ang.theta), math.sin(ang.theta)
    ck, sk = math.cos(ang.kappa), math.sin(ang.kappa)
    th, kd = ang.theta_dot, ang.kappa_dot
    d1, d2 = p.delta_1, p.delta_2
    rows = np.array([
        [ct, 0.0, -st * ck * e1, -st * sk * e2],
        [0.0, 0.0, -sk * e1, ck * e2],
        [st, 0.0, ct * ck * e1, ct * sk * e2],
        [0.0, 1.0, 0.0, 0.0],
    ], dtype=complex)
    rates = np.array([
        [-st * th, 0.0,
         -(ct * th * ck - st * sk * kd + 1j * d1 * st * ck) * e1,
         -(ct * th * sk + st * ck * kd + 1j * d2 * st * sk) * e2],
        [0.0, 0.0, -(ck * kd + 1j * d1 * sk) * e1, (-sk * kd + 1j * d2 * ck) * e2],
        [ct * th, 0.0,
         (-st * th * ck - ct * sk * kd + 1j * d1 * ct * ck) * e1,
         (-st * th * sk + ct * ck * kd + 1j * d2 * ct * sk) * e2],
        [0.0, 0.0, 0.0, 0.0],
    ], dtype=complex)
    return rows.conj().T, rows @ rates.conj().T


def polariton_generator(p: SystemParams, s: PulseSchedule, t: float) -> np.ndarray:
    """Single-particle generator F^dag h F - i F^dag dF/dt in the polariton frame.

    F^dag h F vanishes except for the bright block [[0, R], [R, Delta_p]] on
    (B, A), with R = sqrt(g^2 N + Omega^2).
    """
    ang = mixing_angles(p, s, t)
    _, fdf = polariton_frame(p, s, t, ang)
    gen = -1j * fdf
    gen = 0.5 * (gen + gen.conj().T)
    r = math.hypot(p.g_sqrt_N, ang.Omega)
    gen[2, 3] += r
    gen[3, 2] += r
    gen[3, 3] += p.delta_p
    return gen
