"""Wilczek-Zee connection on the dark manifold and its holonomy.

Convention: the connection of sector l is K[m, n] = -<D_{l-m,m}| d/dt D_{l-n,n}>,
the generator of the dark coefficients dc/dt = K c.  At three-photon
resonance K = kappa_dot sin(theta) K0 with the constant antisymmetric matrix
returned by :func:`k0_matrix`, so the holonomy is exp(phi K0).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from . import fock
from ._integrate import StepStats, propagate
from .darkspace import dark_basis
from .errors import AccuracyWarning
from .model import SystemParams, mixing_angles
from .schedules import PulseSchedule

# local step size bound for the time-ordered integral: ||K|| dt <= 0.05
STEP_NORM = 0.05


@dataclass(frozen=True)
class FCoefficients:
    f_DD: complex
    f_ED: complex
    f_DE: complex
    f_EE: complex


def f_coefficients(p: SystemParams, s: PulseSchedule, t: float) -> FCoefficients:
    """Commutators [X, d/dt Y^dag] for X, Y in {D, E}."""
    ang = mixing_angles(p, s, t)
    st = math.sin(ang.theta)
    ck, sk = math.cos(ang.kappa), math.sin(ang.kappa)
    d1, d2 = p.delta_1, p.delta_2
    f_dd = -1j * st * st * (d1 * ck * ck + d2 * sk * sk)
    f_ed = -ang.kappa_dot * st + 1j * (d2 - d1) * st * ck * sk
    f_ee = -1j * (d1 * sk * sk + d2 * ck * ck)
    return FCoefficients(f_dd, f_ed, -np.conj(f_ed), f_ee)


def _assemble(f: FCoefficients, l: int) -> np.ndarray:
    K = np.zeros((l + 1, l + 1), dtype=complex)
    for m in range(l + 1):
        K[m, m] = -((l - m) * f.f_DD + m * f.f_EE)
        if m < l:
            K[m, m + 1] = -math.sqrt((m + 1) * (l - m)) * f.f_DE
        if m > 0:
            K[m, m - 1] = -math.sqrt(m * (l - m + 1)) * f.f_ED
    return K


def connection_analytic(p: SystemParams, s: PulseSchedule, t: float, l: int) -> np.ndarray:
    """Tridiagonal anti-Hermitian connection of sector l from the f-coefficients."""
    fock.check_sector(l)
    return _assemble(f_coefficients(p, s, t), l)


def connection_numeric(p: SystemParams, s: PulseSchedule, t: float, l: int, dt: float) -> np.ndarray:
    """Connection from central differences of the constructed dark frame."""
    T = s.duration
    if not dt > 0:
        raise ValueError("dt must be positive")
    if t - dt < 0 or t + dt > T:
        raise ValueError(f"t +/- dt = [{t - dt}, {t + dt}] leaves the schedule domain [0, {T}]")
    if dt > 1e-2 * T:
        warnings.warn(f"dt={dt:g} exceeds 1e-2 T; the finite-difference connection is inaccurate",
                      AccuracyWarning, stacklevel=2)
    here = dark_basis(p, s, t, l).frame
    ahead = dark_basis(p, s, t + dt, l).frame
    behind = dark_basis(p, s, t - dt, l).frame
    return -here.conj().T @ ((ahead - behind) / (2.0 * dt))


def k0_matrix(l: int) -> np.ndarray:
    """Constant real antisymmetric generator with entries
    K0[m+1, m] = sqrt((m+1)(l-m)) = -K0[m, m+1]."""
    K = np.zeros((l + 1, l + 1))
    for m in range(l):
        w = math.sqrt((m + 1) * (l - m))
        K[m + 1, m] = w
        K[m, m + 1] = -w
    return K


def _segments(s: PulseSchedule, t0: float, t1: float) -> list[float]:
    inner = [b for b in s.breakpoints() if t0 < b < t1]
    return [t0, *inner, t1]


def phi_of_t(p: SystemParams, s: PulseSchedule, t: float, t0: float = 0.0) -> float:
    """Integral of kappa_dot sin(theta) from t0 to t."""
    if t < t0:
        return -phi_of_t(p, s, t0, t)

    def rate(u):
        ang = mixing_angles(p, s, u)
        return ang.kappa_dot * math.sin(ang.theta)

    edges = _segments(s, t0, t)
    atol = 1e-10 / max(len(edges) - 1, 1)
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        value, _ = quad(rate, a, b, epsabs=atol, epsrel=1e-13, limit=400)
        total += value
    return total


def holonomy_integrate(p: SystemParams, s: PulseSchedule, l: int, t0: float = 0.0,
                       t1: float | None = None, *, tol: float = 1e-13,
                       steps: int | None = None, stats: StepStats | None = None) -> np.ndarray:
    """Time-ordered exp of the connection, W(t1, t0).

    With ``steps`` given, uses that many uniform exponential-midpoint steps.
    Otherwise fourth-order Magnus steps adapt to the local error ``tol``,
    with ||K|| dt <= 0.05.
    """
    fock.check_sector(l)
    t1 = s.duration if t1 is None else t1
    if not 0 <= t0 <= t1 <= s.duration * (1 + 1e-12):
        raise ValueError(f"need 0 <= t0 <= t1 <= T, got t0={t0}, t1={t1}")
    eye = np.eye(l + 1, dtype=complex)
    if l == 0 or t1 == t0:
        return eye

    def generator(u):
        return 1j * connection_analytic(p, s, u, l)

    if steps is not None:
        edges = np.linspace(t0, t1, int(steps) + 1)
        W = eye
        for a, b in zip(edges, edges[1:]):
            W = expm((b - a) * connection_analytic(p, s, 0.5 * (a + b), l)) @ W
        return W
    def step_limit(u):
        # Frobenius norm bounds the operator norm from above
        norm = np.linalg.norm(connection_analytic(p, s, u, l))
        return STEP_NORM / norm if norm > 0 else np.inf

    return propagate(generator, eye, t0, t1, tol=tol, stops=_segments(s, t0, t1)[1:-1],
                     step_limit=step_limit, stats=stats, order=4)


def holonomy_closed_form(l: int, phi: float) -> np.ndarray:
    """exp(phi K0): the resonant holonomy, a real orthogonal matrix."""
    return expm(phi * k0_matrix(l))


def primed_holonomy(l: int, phi: float) -> np.ndarray:
    """diag(e^{-i l phi}, e^{-i (l-2) phi}, ..., e^{i l phi})."""
    return np.diag(np.exp(-1j * phi * (l - 2 * np.arange(l + 1))))


def basis_change_matrix(l: int) -> np.ndarray:
    """Unitary V with (primed dark frame) = (dark frame) @ V.

    Column m expands D'^dag^(l-m) E'^dag^m |0> / sqrt((l-m)! m!) with
    D'^dag = (-i D^dag + E^dag)/sqrt(2), E'^dag = (i D^dag + E^dag)/sqrt(2)
    as a polynomial in (D^dag, E^dag).
    """
    V = np.zeros((l + 1, l + 1), dtype=complex)
    for m in range(l + 1):
        p, q = l - m, m
        # coefficient arrays indexed by the power of E^dag
        first = np.array([math.comb(p, j) * (-1j) ** (p - j) for j in range(p + 1)])
        second = np.array([math.comb(q, j) * (1j) ** (q - j) for j in range(q + 1)])
        poly = np.convolve(first, second)
        norm = math.sqrt(2.0 ** l * math.factorial(p) * math.factorial(q))
        for k in range(l + 1):
            V[k, m] = poly[k] * math.sqrt(math.factorial(l - k) * math.factorial(k)) / norm
    return V
