"""Adaptive unitary propagation for i dy/dt = H(t) y.

Order 2 is the exponential midpoint rule, exp(-i H(t + dt/2) dt).  Order 4 is
the two-point Gauss-Legendre Magnus step, exp(-i G) with
G = dt/2 (H1 + H2) - i sqrt(3) dt^2 / 12 [H2, H1].  Both exponentiate a
Hermitian matrix through its eigendecomposition, so every step is unitary to
rounding.  The local error is estimated by step doubling and the
two-half-step result is kept.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class StepStats:
    accepted: int = 0
    rejected: int = 0


_GAUSS = np.sqrt(3.0) / 6.0


def _apply_exp(generator, dt, y):
    w, v = np.linalg.eigh(generator)
    phases = np.exp(-1j * w * dt)
    if y.ndim == 1:
        return v @ (phases * (v.conj().T @ y))
    return v @ (phases[:, None] * (v.conj().T @ y))


def _midpoint_step(hamiltonian, t, dt, y):
    return _apply_exp(hamiltonian(t + 0.5 * dt), dt, y)


def _magnus4_step(hamiltonian, t, dt, y):
    h1 = hamiltonian(t + (0.5 - _GAUSS) * dt)
    h2 = hamiltonian(t + (0.5 + _GAUSS) * dt)
    g = 0.5 * (h1 + h2) - 1j * (np.sqrt(3.0) * dt / 12.0) * (h2 @ h1 - h1 @ h2)
    return _apply_exp(0.5 * (g + g.conj().T), dt, y)


def propagate(hamiltonian, y0, t0: float, t1: float, *, tol: float = 1e-9,
              stops=(), on_stop=None, max_step: float | None = None,
              first_step: float | None = None, stats: StepStats | None = None,
              order: int = 2, step_limit=None) -> np.ndarray:
    """Solve i dy/dt = H(t) y from t0 to t1.

    ``stops`` are interior times the integrator must land on exactly (kinks of
    the schedule, sampling times); ``on_stop(t, y)`` is called at each of them
    and at t1.  ``step_limit(t)``, if given, caps the step starting at t.
    """
    if order not in (2, 4):
        raise ValueError(f"order must be 2 or 4, got {order}")
    step = _midpoint_step if order == 2 else _magnus4_step
    exponent = 1.0 / (order + 1)
    y = np.array(y0, dtype=complex)
    stats = stats if stats is not None else StepStats()
    if t1 <= t0:
        if on_stop is not None:
            on_stop(t0, y)
        return y
    marks = sorted({float(t) for t in stops if t0 < t < t1} | {float(t1)})
    span = t1 - t0
    dt = first_step or min(span / 16.0, max_step or np.inf)
    t = t0
    for target in marks:
        while t < target:
            remaining = target - t
            h = min(dt, remaining)
            if max_step is not None:
                h = min(h, max_step)
            if step_limit is not None:
                h = min(h, step_limit(t))
            full = step(hamiltonian, t, h, y)
            half = step(hamiltonian, t, 0.5 * h, y)
            half = step(hamiltonian, t + 0.5 * h, 0.5 * h, half)
            err = float(np.linalg.norm(full - half))
            if err <= tol or h <= 1e-14 * max(1.0, abs(t)):
                t = target if h == remaining else t + h
                y = half
                stats.accepted += 1
                grow = 4.0 if err == 0 else min(4.0, 0.9 * (tol / err) ** exponent)
                if h == remaining and grow >= 1.0:
                    # the last step was truncated to hit a mark; keep the previous size
                    dt = max(dt, h * grow)
                else:
                    dt = h * max(grow, 0.2)
            else:
                stats.rejected += 1
                dt = h * max(0.2, 0.9 * (tol / err) ** exponent)
        if on_stop is not None:
            on_stop(target, y)
    return y
