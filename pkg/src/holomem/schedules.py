"""Control-pulse schedules Omega_1(t), Omega_2(t) on [0, T].

Two forms are provided.  :class:`PiecewiseSchedule` chains smooth legs
between waypoints in the (Omega, kappa) plane, with Omega_1 = Omega cos(kappa)
and Omega_2 = Omega sin(kappa).  Inside a leg Omega is interpolated in the
coordinate y = Omega / sqrt(scale**2 + Omega**2); with ``scale = g sqrt(N)``
this is cos(theta), whose rate equals the adiabaticity ratio of a pure ramp.
Both coordinates follow a cosine edge profile, so the amplitudes are C^1 with
vanishing derivatives at every leg boundary.

:class:`SampledSchedule` interpolates tabulated amplitudes with monotone
cubic (PCHIP) interpolants and differentiates the interpolant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

HALF_PI = 0.5 * math.pi


def _edge(x: float) -> tuple[float, float]:
    """Cosine edge profile on [0, 1] and its derivative."""
    if x <= 0.0:
        return 0.0, 0.0
    if x >= 1.0:
        return 1.0, 0.0
    return 0.5 - 0.5 * math.cos(math.pi * x), 0.5 * math.pi * math.sin(math.pi * x)


class PulseSchedule:
    """Base class: subclasses provide ``duration``, ``omegas`` and ``omega_dots``."""

    duration: float

    def omegas(self, t: float) -> tuple[float, float]:
        raise NotImplementedError

    def omega_dots(self, t: float) -> tuple[float, float]:
        raise NotImplementedError

    def controls(self, t: float) -> tuple[float, float, float, float]:
        """(Omega_1, Omega_2, dOmega_1/dt, dOmega_2/dt) in one call."""
        return (*self.omegas(t), *self.omega_dots(t))

    def breakpoints(self) -> list[float]:
        """Times where the second derivative may jump (always includes 0 and T)."""
        return [0.0, self.duration]

    @property
    def storage_time(self) -> float:
        """Time of minimal total Rabi frequency (the write endpoint tau)."""
        grid = np.union1d(np.linspace(0.0, self.duration, 2001), self.breakpoints())
        total = [math.hypot(*self.omegas(t)) for t in grid]
        return float(grid[int(np.argmin(total))])

    def check_time(self, t: float) -> float:
        T = self.duration
        if not (-1e-12 * max(T, 1.0) <= t <= T * (1 + 1e-12) + 1e-12):
            raise ValueError(f"time {t} outside schedule domain [0, {T}]")
        return min(max(float(t), 0.0), T)


@dataclass(frozen=True)
class Leg:
    """One smooth segment from (omega_start, kappa_start) to (omega_end, kappa_end)."""

    duration: float
    omega_start: float
    omega_end: float
    kappa_start: float
    kappa_end: float

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"leg duration must be positive, got {self.duration}")
        for name in ("omega_start", "omega_end"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("kappa_start", "kappa_end"):
            k = getattr(self, name)
            if not (-1e-15 <= k <= HALF_PI + 1e-15):
                raise ValueError(f"{name}={k} outside [0, pi/2]; amplitudes must stay non-negative")


class PiecewiseSchedule(PulseSchedule):
    def __init__(self, legs, scale: float = 1.0, storage_time: float | None = None):
        self.legs = tuple(legs)
        if not self.legs:
            raise ValueError("schedule needs at least one leg")
        if not scale > 0:
            raise ValueError("scale must be positive")
        for prev, nxt in zip(self.legs, self.legs[1:]):
            if not (math.isclose(prev.omega_end, nxt.omega_start, rel_tol=1e-12)
                    and math.isclose(prev.kappa_end, nxt.kappa_start, rel_tol=1e-12, abs_tol=1e-15)):
                raise ValueError("consecutive legs must share their waypoint")
        self.scale = float(scale)
        self._starts = np.concatenate([[0.0], np.cumsum([leg.duration for leg in self.legs])])
        self.duration = float(self._starts[-1])
        self._storage_time = storage_time

    @property
    def storage_time(self) -> float:
        if self._storage_time is not None:
            return self._storage_time
        return super().storage_time

    def breakpoints(self) -> list[float]:
        return [float(x) for x in self._starts]

    def _y(self, omega: float) -> float:
        return omega / math.hypot(self.scale, omega)

    def _locate(self, t: float):
        t = self.check_time(t)
        k = int(np.searchsorted(self._starts, t, side="right")) - 1
        k = min(max(k, 0), len(self.legs) - 1)
        leg = self.legs[k]
        return leg, (t - self._starts[k]) / leg.duration

    def polar(self, t: float) -> tuple[float, float, float, float]:
        """(Omega, kappa, dOmega/dt, dkappa/dt) at time t."""
        leg, x = self._locate(t)
        s, ds = _edge(x)
        ya, yb = self._y(leg.omega_start), self._y(leg.omega_end)
        y = ya + (yb - ya) * s
        ydot = (yb - ya) * ds / leg.duration
        omega = self.scale * y / math.sqrt(1.0 - y * y)
        omega_dot = self.scale * ydot / (1.0 - y * y) ** 1.5
        kappa = leg.kappa_start + (leg.kappa_end - leg.kappa_start) * s
        kappa_dot = (leg.kappa_end - leg.kappa_start) * ds / leg.duration
        return omega, kappa, omega_dot, kappa_dot

    def omegas(self, t):
        omega, kappa, _, _ = self.polar(t)
        return omega * math.cos(kappa), omega * math.sin(kappa)

    def omega_dots(self, t):
        omega, kappa, omega_dot, kappa_dot = self.polar(t)
        c, s = math.cos(kappa), math.sin(kappa)
        return omega_dot * c - omega * s * kappa_dot, omega_dot * s + omega * c * kappa_dot

    def controls(self, t):
        omega, kappa, omega_dot, kappa_dot = self.polar(t)
        c, s = math.cos(kappa), math.sin(kappa)
        return (omega * c, omega * s,
                omega_dot * c - omega * s * kappa_dot, omega_dot * s + omega * c * kappa_dot)

    def with_hold(self, after_leg: int, duration: float) -> "PiecewiseSchedule":
        """Copy with a constant plateau inserted after leg ``after_leg``."""
        leg = self.legs[after_leg]
        hold = Leg(duration, leg.omega_end, leg.omega_end, leg.kappa_end, leg.kappa_end)
        legs = list(self.legs)
        legs.insert(after_leg + 1, hold)
        tau = self._storage_time
        if tau is not None and tau > self._starts[after_leg + 1]:
            tau += duration
        return PiecewiseSchedule(legs, self.scale, tau)


class SampledSchedule(PulseSchedule):
    """Tabulated amplitudes with monotone-cubic interpolation."""

    def __init__(self, times, omega_1, omega_2):
        times = np.asarray(times, dtype=float)
        omega_1 = np.asarray(omega_1, dtype=float)
        omega_2 = np.asarray(omega_2, dtype=float)
        if times.ndim != 1 or len(times) < 2:
            raise ValueError("need at least two sample times")
        if omega_1.shape != times.shape or omega_2.shape != times.shape:
            raise ValueError("omega samples must match the time grid")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise ValueError("sample times must start at 0 and increase strictly")
        if np.any(omega_1 < 0) or np.any(omega_2 < 0):
            raise ValueError("Rabi frequencies must be non-negative")
        self.times = times
        self.duration = float(times[-1])
        self._f1 = PchipInterpolator(times, omega_1)
        self._f2 = PchipInterpolator(times, omega_2)
        self._d1 = self._f1.derivative()
        self._d2 = self._f2.derivative()

    def breakpoints(self):
        return [float(x) for x in self.times]

    def omegas(self, t):
        t = self.check_time(t)
        return max(float(self._f1(t)), 0.0), max(float(self._f2(t)), 0.0)

    def omega_dots(self, t):
        t = self.check_time(t)
        return float(self._d1(t)), float(self._d2(t))


def constant_schedule(omega_1: float, omega_2: float, duration: float) -> SampledSchedule:
    return SampledSchedule([0.0, duration], [omega_1, omega_1], [omega_2, omega_2])


@dataclass(frozen=True)
class CycleDesign:
    """Knobs of the write / rotate / read pulse family.

    Each loop ramps Omega from ``omega_max`` down to ``omega_min`` at fixed
    kappa, sweeps kappa by ``sweep`` while Omega is small, ramps back up and
    (if ``close``) sweeps kappa back at large Omega.  The geometric phase of
    one loop is ``sweep * (sin(theta_min) - sin(theta_max))``.
    """

    omega_max: float = 100.0
    omega_min: float = 0.01
    sweep: float = 1.0
    loops: int = 1
    kappa_start: float = 0.0
    ramp_time: float = 100.0
    sweep_time: float = 100.0
    return_time: float = 10.0
    hold_time: float = 0.0
    close: bool = True
    extra: dict = field(default_factory=dict, compare=False)

    def build(self, scale: float = 1.0) -> PiecewiseSchedule:
        k0, k1 = self.kappa_start, self.kappa_start + self.sweep
        hi, lo = self.omega_max, self.omega_min
        legs = []
        storage_time = None
        for n in range(self.loops):
            legs.append(Leg(self.ramp_time, hi, lo, k0, k0))
            if storage_time is None:
                storage_time = self.ramp_time
            if self.hold_time > 0:
                legs.append(Leg(self.hold_time, lo, lo, k0, k0))
            if self.sweep != 0:
                legs.append(Leg(self.sweep_time, lo, lo, k0, k1))
            legs.append(Leg(self.ramp_time, lo, hi, k1, k1))
            if self.close and self.sweep != 0:
                legs.append(Leg(self.return_time, hi, hi, k1, k0))
            elif n + 1 < self.loops and self.sweep != 0:
                raise ValueError("multi-loop cycles must be closed")
        return PiecewiseSchedule(legs, scale=scale, storage_time=storage_time)

    def phi_estimate(self, g_sqrt_N: float = 1.0) -> float:
        s_min = g_sqrt_N / math.hypot(g_sqrt_N, self.omega_min)
        s_max = g_sqrt_N / math.hypot(g_sqrt_N, self.omega_max)
        back = s_max if self.close else 0.0
        return self.loops * self.sweep * (s_min - back)


def cycle_for_margin(max_margin: float, g_sqrt_N: float = 1.0, *, omega_max: float = 100.0,
                     omega_min: float = 0.01, sweep: float = 1.0, loops: int = 1,
                     kappa_start: float = 0.0, hold_time: float = 0.0, close: bool = True,
                     min_time: float = 1.0) -> CycleDesign:
    """Choose leg durations so every adiabatic margin stays below ``max_margin``.

    Ramps move cos(theta) at peak rate (pi/2)|dy|/ramp_time, which bounds
    g sqrt(N) |dOmega_k/dt| / (g^2 N + Omega^2)^(3/2).  A kappa sweep at fixed
    Omega rotates D into E at rate sin(theta) |dkappa/dt| and couples E to the
    bright mode at rate cos(theta) |dkappa/dt|; both are kept below
    ``max_margin`` times the gap R = sqrt(g^2 N + Omega^2).  That is stricter
    than the Omega g sqrt(N) |dkappa/dt| / R^3 margin, which misses the E-B
    coupling and lets short sweeps turn sudden on the scale 1/R.
    """
    if not max_margin > 0:
        raise ValueError("max_margin must be positive")
    g = g_sqrt_N
    dy = abs(omega_max / math.hypot(g, omega_max) - omega_min / math.hypot(g, omega_min))
    # the ramp margin peaks exactly at the bound; keep rounding on the safe side
    ramp_time = max(HALF_PI * dy / max_margin * (1 + 1e-9), min_time)

    def sweep_bound(omega):
        return max(g, omega) * HALF_PI * abs(sweep) / (g * g + omega * omega) / max_margin

    sweep_time = max(sweep_bound(omega_min), min_time)
    return_time = max(sweep_bound(omega_max), min_time)
    return CycleDesign(omega_max=omega_max, omega_min=omega_min, sweep=sweep, loops=loops,
                       kappa_start=kappa_start, ramp_time=ramp_time, sweep_time=sweep_time,
                       return_time=return_time, hold_time=hold_time, close=close)
