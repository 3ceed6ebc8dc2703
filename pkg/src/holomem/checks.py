"""Invariant suites behind ``holomem verify``.

Every check returns a :class:`Check` carrying the measured value, the bound it
is held to and the verdict, so a run can be summarized without re-computing.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import fock, oracle_finite_n as fin
from .darkspace import darkness_residual
from .holonomy import (connection_analytic, connection_numeric, holonomy_closed_form,
                       holonomy_integrate, phi_of_t)
from .model import SystemParams, sector_h, single_particle_h
from .schedules import PulseSchedule, constant_schedule

DARKNESS_RTOL = 1e-10
CONNECTION_ATOL = 1e-6
UNITARITY_ATOL = 1e-9
CLOSED_FORM_ATOL = 1e-8
FINITE_N_ATOL = 1e-10
COMMUTATOR_ATOL = 1e-12


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    threshold: float
    passed: bool
    skipped: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


def _check(suite, name, value, threshold) -> Check:
    value = float(value)
    return Check(suite, name, value, threshold, bool(value < threshold))


def random_params(rng: np.random.Generator) -> SystemParams:
    return SystemParams(g_sqrt_N=float(rng.uniform(0.5, 2.0)), delta_p=float(rng.uniform(-1, 1)),
                        delta_1=float(rng.uniform(-0.5, 0.5)), delta_2=float(rng.uniform(-0.5, 0.5)))


def darkness_suite(rng: np.random.Generator, samples: int = 50, sectors=(0, 1, 2, 3)) -> list[Check]:
    """Random parameters and control amplitudes: ||H_l D|| relative to ||H_l||."""
    worst = 0.0
    for _ in range(samples):
        p = random_params(rng)
        o1, o2 = rng.uniform(0.05, 5.0, size=2)
        s = constant_schedule(o1, o2, 10.0)
        t = float(rng.uniform(0.0, 10.0))
        for l in sectors:
            if l == 0:
                continue
            scale = max(np.linalg.norm(sector_h(p, s, t, l), 2), 1e-300)
            worst = max(worst, darkness_residual(p, s, t, l) / scale)
    return [_check("darkness", f"max relative residual over {samples} samples", worst, DARKNESS_RTOL)]


def connection_suite(p: SystemParams, s: PulseSchedule, rng: np.random.Generator, samples: int = 50,
                     sectors=(1, 2, 3)) -> list[Check]:
    """Analytic connection against central differences of the dark frame."""
    dt = min(1e-4 * s.duration, 1e-2)
    times = rng.uniform(dt, s.duration - dt, size=samples)
    out = []
    for l in sectors:
        if l == 0:
            continue
        err = max(np.max(np.abs(connection_analytic(p, s, t, l) - connection_numeric(p, s, t, l, dt)))
                  for t in times)
        out.append(_check("connection", f"l={l} max |K_analytic - K_numeric| (dt={dt:.3g})",
                          err, CONNECTION_ATOL))
    return out


def unitarity_suite(p: SystemParams, s: PulseSchedule, sectors=(1, 2, 3)) -> list[Check]:
    out = []
    for l in sectors:
        W = holonomy_integrate(p, s, l)
        out.append(_check("unitarity", f"l={l} ||W^dag W - 1||",
                          np.linalg.norm(W.conj().T @ W - np.eye(l + 1), 2), UNITARITY_ATOL))
    return out


def closed_form_suite(p: SystemParams, s: PulseSchedule, sectors=(1, 2, 3)) -> list[Check]:
    """Integrated holonomy against exp(phi K0); only meaningful at three-photon resonance."""
    if not p.resonant:
        return [Check("closed_form", "skipped: delta_1 or delta_2 non-zero", math.nan,
                      CLOSED_FORM_ATOL, True, True)]
    phi = phi_of_t(p, s, s.duration)
    return [_check("closed_form", f"l={l} ||W - exp(phi K0)||",
                   np.linalg.norm(holonomy_integrate(p, s, l) - holonomy_closed_form(l, phi), 2),
                   CLOSED_FORM_ATOL)
            for l in sectors if l > 0]


def finite_n_suite(rng: np.random.Generator, atoms=(2, 3, 4, 5, 6), n_max: int = 1) -> list[Check]:
    """Commutator defect -2/N, collective commutators and the one-excitation spectrum."""
    out = []
    for N in atoms:
        fs = fin.build_finite_system(N, n_max)
        defect = fin.commutator_defect(fs, "one-k-excitation", 1)
        out.append(_check("finite_n", f"N={N} |defect + 2/N|", abs(defect + 2.0 / N), FINITE_N_ATOL))
        comm = 0.0
        for k in ("1", "2"):
            A, Tp, Tm, C = fs["A"], fs[f"T+{k}"], fs[f"T-{k}"], fs[f"C{k}"]
            comm = max(comm, abs(A @ Tp - Tp @ A - C).max(), abs(C @ Tm - Tm @ C - A).max())
        comm = max(comm, abs(fs["T+1"] @ fs["T+2"] - fs["T+2"] @ fs["T+1"]).max())
        out.append(_check("finite_n", f"N={N} collective commutators", comm, COMMUTATOR_ATOL))
        p = random_params(rng)
        s = constant_schedule(*rng.uniform(0.05, 3.0, size=2), 10.0)
        t = float(rng.uniform(0, 10))
        block, _ = fin.block_hamiltonian(fs, p, s, t, 1)
        gap = np.max(np.abs(np.linalg.eigvalsh(block) - np.linalg.eigvalsh(single_particle_h(p, s, t))))
        out.append(_check("finite_n", f"N={N} one-excitation spectrum vs 4x4 model", gap, FINITE_N_ATOL))
    return out


def run_suites(suites, p: SystemParams, s: PulseSchedule, rng: np.random.Generator, *,
               samples: int = 50, sectors=(0, 1, 2, 3), atoms=(2, 3, 4, 5, 6),
               n_max: int = 1) -> list[Check]:
    for l in sectors:
        fock.check_sector(l)
    checks = []
    for name in suites:
        if name == "darkness":
            checks += darkness_suite(rng, samples, sectors)
        elif name == "connection":
            checks += connection_suite(p, s, rng, samples, sectors)
        elif name == "unitarity":
            checks += unitarity_suite(p, s, [l for l in sectors if l > 0])
        elif name == "closed_form":
            checks += closed_form_suite(p, s, sectors)
        elif name == "finite_n":
            checks += finite_n_suite(rng, atoms, n_max)
        else:
            raise ValueError(f"unknown suite {name!r}")
    return checks
