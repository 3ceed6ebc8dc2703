"""Command-line front end: ``holomem {holonomy,protocol,verify,sweep}``.

Each command reads a YAML config, writes JSON (scalars and matrices, complex
numbers as [re, im]) and CSV time series into ``--out``, and keeps run
metadata in a separate ``run_meta.json`` so data files are reproducible.
Exit codes: 0 success, 1 a verify check failed, 2 invalid config or inputs.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import itertools
import json
import logging
import math
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata
from pathlib import Path

import numpy as np

from . import checks, fock, protocol
from .config import SUITES, RunConfig, build_schedule, load_config, photon_input, system_params, with_value
from .darkspace import dark_basis
from .dynamics import adiabatic_deviation, adiabatic_margins, max_margin, mode_propagator
from .errors import HolomemError
from .holonomy import (basis_change_matrix, connection_analytic, holonomy_closed_form,
                       holonomy_integrate, phi_of_t, primed_holonomy)
from .model import mixing_angles

log = logging.getLogger("holomem")

EXIT_OK, EXIT_FAILED, EXIT_INVALID = 0, 1, 2


# -- serialization -----------------------------------------------------------

def to_jsonable(x):
    """Complex -> [re, im]; arrays -> nested lists; NaN -> null."""
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [to_jsonable(float(x.real)), to_jsonable(float(x.imag))]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def write_json(path: Path, data) -> None:
    path.write_text(json.dumps(to_jsonable(data), indent=2, allow_nan=False) + "\n", encoding="utf-8")


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def write_meta(out: Path, command: str, args, cfg: RunConfig) -> None:
    write_json(out / "run_meta.json", {
        "command": command,
        "config": str(args.config) if args.config else None,
        "seed": cfg.command.seed,
        "mode": cfg.command.mode,
        "version": _version(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "started": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    })


def _modes(cfg: RunConfig) -> list[str]:
    return ["adiabatic", "exact"] if cfg.command.mode == "both" else [cfg.command.mode]


def _rng(cfg: RunConfig) -> np.random.Generator:
    return np.random.default_rng(cfg.command.seed)


# -- commands ----------------------------------------------------------------

def cmd_holonomy(cfg: RunConfig, out: Path) -> int:
    p = system_params(cfg)
    s = build_schedule(cfg, p)
    opts = cfg.command.holonomy
    for l in opts.sectors:
        fock.check_sector(l)
    phi = phi_of_t(p, s, s.duration)
    modes = _modes(cfg)
    u = mode_propagator(p, s) if "exact" in modes else None
    sectors = []
    for l in opts.sectors:
        W = holonomy_integrate(p, s, l, tol=opts.tol)
        closed = holonomy_closed_form(l, phi)
        V = basis_change_matrix(l)
        entry = {
            "l": l,
            "W": W,
            "closed_form": closed,
            "norm_difference": float(np.linalg.norm(W - closed, 2)),
            "primed_diagonal": np.diag(V.conj().T @ W @ V),
            "primed_prediction": np.diag(primed_holonomy(l, phi)),
        }
        if u is not None:
            # exact transfer between dark bases at 0 and T
            M = (dark_basis(p, s, s.duration, l).frame.conj().T @ fock.second_quantize(u, l)
                 @ dark_basis(p, s, 0.0, l).frame)
            entry["exact_transfer"] = M
            entry["exact_vs_integrated"] = float(np.linalg.norm(M - W, 2))
        sectors.append(entry)
    write_json(out / "holonomy.json", {
        "phi_T": phi,
        "duration": s.duration,
        "resonant": p.resonant,
        "max_margin": max_margin(p, s),
        "sectors": sectors,
    })
    times = np.union1d(np.linspace(0.0, s.duration, opts.samples), s.breakpoints())
    header = ["t", "theta", "kappa", "kappa_dot", "margin_rate_1", "margin_rate_2",
              "margin_detuning_1", "margin_detuning_2", "margin_max"]
    header += [f"norm_K_{l}" for l in opts.sectors]
    rows = []
    for t in times:
        ang = mixing_angles(p, s, t)
        m = adiabatic_margins(p, s, t)
        rows.append([float(t), ang.theta, ang.kappa, ang.kappa_dot, m.rate_1, m.rate_2,
                     m.detuning_1, m.detuning_2, m.max]
                    + [float(np.linalg.norm(connection_analytic(p, s, t, l), 2)) for l in opts.sectors])
    write_csv(out / "holonomy_timeseries.csv", header, rows)
    return EXIT_OK


def _cycle_json(r: protocol.CycleReport) -> dict:
    return {
        "mode": r.mode,
        "phi_T": r.phi,
        "j": r.j,
        "deviation": r.deviation,
        "fidelity": r.fidelity,
        "encoding_overlap": r.encoding_overlap,
        "max_margin": r.max_margin,
        "sectors": [{"l": x.l, "weight": x.weight, "holonomy": x.holonomy,
                     "final_dark_coefficients": x.coefficients, "leakage": x.leakage}
                    for x in r.sectors],
    }


def cmd_protocol(cfg: RunConfig, out: Path) -> int:
    p = system_params(cfg)
    s = build_schedule(cfg, p)
    opts = cfg.command.protocol
    state = photon_input(cfg, _rng(cfg))
    report = {"input": state.coefficients, "storage_time": s.storage_time, "runs": []}
    for mode in _modes(cfg):
        log.info("protocol: %s mode", mode)
        r = protocol.run_cycle(p, s, state, mode, ratio=opts.ratio, samples=opts.samples)
        st = protocol.run_storage(p, s, state, mode, ratio=opts.ratio)
        entry = _cycle_json(r)
        entry["storage"] = {"photon_occupancy": st.photon_occupancy,
                            "atomic_occupancy": st.atomic_occupancy,
                            "max_margin": st.max_margin}
        report["runs"].append(entry)
        tr = r.trajectory
        sectors = sorted(tr.coefficients)
        header = ["t", "photon_occupancy"] + [f"leakage_{l}" for l in sectors]
        header += [f"c_{l}_{m}_{part}" for l in sectors for m in range(l + 1) for part in ("re", "im")]
        rows = []
        for k, t in enumerate(tr.times):
            row = [float(t), float(tr.photon_occupancy[k])] + [float(tr.leakage[l][k]) for l in sectors]
            for l in sectors:
                for c in tr.coefficients[l][k]:
                    row += [float(c.real), float(c.imag)]
            rows.append(row)
        write_csv(out / f"protocol_{mode}.csv", header, rows)
    write_json(out / "protocol.json", report)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path, suites=None) -> int:
    p = system_params(cfg)
    s = build_schedule(cfg, p)
    opts = cfg.command.verify
    suites = suites or opts.suites
    results = checks.run_suites(suites, p, s, _rng(cfg), samples=opts.samples, sectors=opts.sectors,
                                atoms=opts.finite_n.atoms, n_max=opts.finite_n.n_max)
    ok = all(c.passed for c in results)
    write_json(out / "verify.json", {"passed": ok, "checks": [c.as_dict() for c in results]})
    for c in results:
        status = "SKIP" if c.skipped else ("PASS" if c.passed else "FAIL")
        print(f"{status} {c.suite}: {c.name} = {c.value:.3g} (< {c.threshold:g})")
    return EXIT_OK if ok else EXIT_FAILED


def _sweep_point(args) -> dict:
    cfg_data, assignment = args
    cfg = RunConfig.model_validate(cfg_data)
    for path, value in assignment:
        cfg = with_value(cfg, path, value)
    opts = cfg.command.sweep
    row = {path: value for path, value in assignment}
    try:
        p = system_params(cfg)
        s = build_schedule(cfg, p)
        row.update(duration=s.duration, phi_T=phi_of_t(p, s, s.duration), max_margin=max_margin(p, s))
        if opts.metric == "fidelity":
            state = photon_input(cfg, _rng(cfg))
            for mode in _modes(cfg):
                row[f"fidelity_{mode}"] = protocol.run_cycle(p, s, state, mode).fidelity
        elif opts.metric == "deviation":
            row["deviation"] = adiabatic_deviation(p, s, opts.sector)
        elif opts.metric == "path_dependence":
            if not hasattr(s, "with_hold"):
                raise HolomemError("path_dependence needs a cycle or design schedule")
            companion = s.with_hold(0, opts.companion_hold)
            row["path_dependence"] = float(np.linalg.norm(
                holonomy_integrate(p, s, opts.sector) - holonomy_integrate(p, companion, opts.sector), 2))
        row["error"] = ""
    except (HolomemError, ValueError) as exc:
        row["error"] = str(exc).replace("\n", " ")
    return row


def cmd_sweep(cfg: RunConfig, out: Path) -> int:
    opts = cfg.command.sweep
    if not opts.knobs or any(not k.values for k in opts.knobs):
        raise HolomemError("sweep grid is empty: give one or two knobs with at least one value each")
    for k in opts.knobs:
        with_value(cfg, k.path, k.values[0])   # fail early on unknown paths
    grid = list(itertools.product(*[[(knob.path, v) for v in knob.values] for knob in opts.knobs]))
    data = cfg.model_dump()
    tasks = [(data, list(a)) for a in grid]
    if opts.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=opts.workers) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]
    header = list(dict.fromkeys(key for row in rows for key in row))
    header.remove("error")
    header.append("error")
    write_csv(out / "sweep.csv", header, [[row.get(h, math.nan) for h in header] for row in rows])
    return EXIT_OK


COMMANDS = {"holonomy": cmd_holonomy, "protocol": cmd_protocol, "verify": cmd_verify, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holomem", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", type=Path, help="YAML run configuration (defaults if omitted)")
        cmd.add_argument("--out", type=Path, default=Path("."), help="output directory")
        cmd.add_argument("--seed", type=int, help="random seed (u64), overrides the config")
        cmd.add_argument("--mode", choices=["adiabatic", "exact", "both"], help="overrides the config")
        if name == "verify":
            cmd.add_argument("--finite-n", action="store_true", help="run only the finite-N oracle suite")
            cmd.add_argument("--suite", action="append", choices=list(SUITES),
                             help="run this suite (repeatable)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        overrides = {}
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise HolomemError("--seed must be an unsigned 64-bit integer")
            overrides["seed"] = args.seed
        if args.mode is not None:
            overrides["mode"] = args.mode
        if overrides:
            cfg = cfg.model_copy(update={"command": cfg.command.model_copy(update=overrides)})
        args.out.mkdir(parents=True, exist_ok=True)
        write_meta(args.out, args.command, args, cfg)
        if args.command == "verify":
            suites = ["finite_n"] if args.finite_n else args.suite
            return cmd_verify(cfg, args.out, suites)
        return COMMANDS[args.command](cfg, args.out)
    except (HolomemError, ValueError) as exc:
        print(f"holomem: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
