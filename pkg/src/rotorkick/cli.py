"""Command-line entry point: ``rotorkick <command> [options]``.

Every command writes ``<prefix>.csv`` and ``<prefix>.manifest.json`` to the
output directory (``--output-dir``, else $ROTORKICK_OUTPUT_DIR, else
``./rotorkick-out``).  Exit status 2 signals a configuration error, 1 a
numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .basis import BasisSpec, EigensolverError
from .leakage import LeakageConvergenceError, leakage_estimate, leakage_exact, leakage_worst_case
from .output import CSV_SCHEMA_VERSION, trajectory_header, trajectory_rows, write_csv, write_json
from .propagation import RotorState, sudden_deviation
from .scheduler import BasisOverflowError, TrainConfig, run_adaptive_train, run_explicit_train
from .targets import efficiency_duration_table
from .thermal import build_ensemble, run_thermal_train, thermal_optimal_bound
from .units import ConfigError

__all__ = ["main", "build_parser"]


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotorkick",
        description="Molecular orientation by trains of sudden half-cycle kicks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file or run manifest (values overridden by flags)")
        p.add_argument("--output-dir", help="output directory (default $ROTORKICK_OUTPUT_DIR or ./rotorkick-out)")
        p.add_argument("--prefix", help="output file stem (default: command name)")
        return p

    def molecule(p):
        p.add_argument("--molecule", help="registry entry (default LiCl)")
        p.add_argument("--registry", help="molecule registry file (INI)")

    def train(p):
        p.add_argument("--area", type=float, help="kick area A")
        p.add_argument("--epsilon", type=float, help="pulse-length parameter epsilon = tau*B")
        p.add_argument("--pulse-duration", help="physical pulse length, e.g. '0.3 ps' (overrides --area/--epsilon)")
        p.add_argument("--peak-field", help="physical field amplitude, e.g. '1.5e5 V/cm'")
        p.add_argument("--shape", choices=["square", "sin2"], help="field shape for the unit conversion")
        p.add_argument("--kicks", type=int, help="maximum number of kicks")
        p.add_argument("--n", dest="N", type=int, help="subspace size N (levels |m|..|m|+N)")
        p.add_argument("--mode", choices=["global", "first-local"], help="maximum search within one period")
        p.add_argument("--convergence-tol", type=float, help="stop when successive maxima differ less")
        p.add_argument("--threshold", type=float, help="orientation threshold for durations")

    p = common(sub.add_parser("targets", help="efficiency/duration table of optimal states"))
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--threshold", type=float)

    p = common(sub.add_parser("simulate", help="pure-state kick train from |l0, m>"))
    molecule(p)
    train(p)
    p.add_argument("--m", type=int)
    p.add_argument("--l0", type=int, help="initial level (default |m|)")
    p.add_argument("--l-max", type=int, help="propagation basis size (default grown automatically)")

    p = common(sub.add_parser("thermal", help="Boltzmann ensemble driven by a shared kick train"))
    molecule(p)
    train(p)
    p.add_argument("--temperature", type=float, help="rotational temperature in K")
    p.add_argument("--weight-floor", type=float, help="discarded Boltzmann weight")
    p.add_argument("--diagnostics", action="store_true", default=None, help="per-|m| columns")

    p = common(sub.add_parser("leakage", help="per-kick leakage out of the subspace, exact and estimated"))
    p.add_argument("--area", dest="areas", type=_floats, help="comma-separated kick areas")
    p.add_argument("--n", dest="ns", type=_ints, help="comma-separated subspace sizes")
    p.add_argument("--m", type=int)
    p.add_argument("--l-max", type=int)
    p.add_argument("--worst-case", action="store_true", default=None,
                   help="also report the largest leakage over the eigenbasis of C_N")

    p = common(sub.add_parser("validate-sudden", help="finite pulse vs sudden kick as epsilon shrinks"))
    p.add_argument("--area", type=float)
    p.add_argument("--epsilons", type=_floats)
    p.add_argument("--steps", type=int)
    p.add_argument("--l-max", type=int)

    p = common(sub.add_parser("sweep", help="grid over areas, N, kick counts and temperatures"))
    molecule(p)
    p.add_argument("--areas", type=_floats)
    p.add_argument("--ns", type=_ints)
    p.add_argument("--kicks", type=_ints)
    p.add_argument("--temperatures", type=_floats, help="kelvin; 0 runs the pure ground state")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--mode", choices=["global", "first-local"])
    p.add_argument("--workers", type=int, help="parallel workers (default $ROTORKICK_WORKERS or 1)")
    return parser


_NOT_SETTINGS = {"command", "config", "output_dir", "prefix", "pulse_duration", "peak_field", "shape"}


def _overrides(args) -> dict:
    out = {k: v for k, v in vars(args).items() if k not in _NOT_SETTINGS and v is not None}
    if args.command in ("simulate", "thermal") and (args.pulse_duration or args.peak_field):
        if not (args.pulse_duration and args.peak_field):
            raise ConfigError("--pulse-duration and --peak-field go together", "pulse")
        out["pulse"] = {"duration": args.pulse_duration, "peak_field": args.peak_field,
                        "shape": args.shape or "square"}
    if args.command == "sweep" and "workers" not in out and os.environ.get("ROTORKICK_WORKERS"):
        out["workers"] = int(os.environ["ROTORKICK_WORKERS"])
    return out


def _train_config(cfg, derived, kicks=None) -> TrainConfig:
    return TrainConfig(
        area_per_kick=derived["area"],
        max_kicks=kicks if kicks is not None else cfg["kicks"],
        epsilon=derived.get("epsilon", cfg.get("epsilon", 0.01)),
        convergence_tol=cfg.get("convergence_tol", 1e-4),
        mode=cfg.get("mode", "global"),
    )


def cmd_targets(cfg, derived, out):
    rows = efficiency_duration_table(cfg["n_min"], cfg["n_max"], cfg["m"], cfg["threshold"])
    path = write_csv(out / "targets.csv", ["N", "efficiency", "efficiency_estimate", "duration_fraction"],
                     [[r.N, r.efficiency, r.efficiency_estimate, r.duration_fraction] for r in rows])
    return [path], {"rows": len(rows)}


def cmd_simulate(cfg, derived, out):
    tc = _train_config(cfg, derived)
    result = run_adaptive_train(tc, N=cfg["N"], m=cfg["m"], l0=cfg["l0"], l_max=cfg["l_max"])
    target = result.target
    traj = result.trajectory
    header = trajectory_header(cfg["m"], traj.populations.shape[1])
    paths = [write_csv(out / "trajectory.csv", header, trajectory_rows(traj))]
    t_rot = derived.get("T_rot_ps", float("nan"))
    paths.append(write_csv(out / "kicks.csv", ["kick", "time_trot", "time_ps", "cos_at_kick"],
                           [[i + 1, t, t * t_rot, c] for i, (t, c) in
                            enumerate(zip(result.kick_times, result.maxima_sequence))]))
    # same schedule inside the subspace, for the full-vs-truncated comparison
    sub = BasisSpec(cfg["m"], abs(cfg["m"]) + cfg["N"])
    l0 = abs(cfg["m"]) if cfg["l0"] is None else cfg["l0"]
    trunc = run_explicit_train(RotorState.basis_state(sub, l0), result.kick_times, tc.area_per_kick,
                               target, overflow_tol=None)
    deviation = float(np.max(np.abs(trunc.trajectory.cos - traj.cos)))
    summary = {
        "kick_times": result.kick_times,
        "maxima_sequence": result.maxima_sequence,
        "post_train_peak": result.post_train_peak,
        "post_train_duration": result.post_train_duration,
        "final_overlap": float(abs(np.vdot(target.state.amplitudes,
                                           result.final_state.amplitudes[: cfg["N"] + 1])) ** 2),
        "target_efficiency": target.efficiency,
        "converged": result.converged,
        "l_max_used": result.final_state.spec.l_max,
        "truncated_max_deviation": deviation,
    }
    return paths, summary


def cmd_thermal(cfg, derived, out):
    ens = build_ensemble(derived["temperature_ratio"], cfg["weight_floor"])
    tc = _train_config(cfg, derived)
    traj = run_thermal_train(ens, tc, N=cfg["N"], diagnostics=cfg["diagnostics"])
    header = ["clock", "ensemble_cos_expectation"]
    cols = [traj.clock, traj.value]
    for am, series in sorted(traj.sector_values.items()):
        header.append(f"sector_m{am}")
        cols.append(series)
    paths = [write_csv(out / "thermal.csv", header, zip(*cols))]
    summary = {
        "members": len(ens.members),
        "l_cut": ens.l_cut,
        "truncation_residual": ens.residual,
        "kick_times": traj.kick_times,
        "maxima_sequence": traj.maxima_sequence,
        "post_train_peak": traj.post_train_peak,
        "post_train_duration": traj.post_train_duration,
        "optimal_bound": thermal_optimal_bound(cfg["N"], ens),
    }
    return paths, summary


def cmd_leakage(cfg, derived, out):
    header = ["A", "N", "m", "eta_exact", "eta_estimate", "l_max_used"]
    if cfg["worst_case"]:
        header.append("eta_worst_case")
    rows = []
    for N in cfg["ns"]:
        l_max = cfg["l_max"] if cfg["l_max"] is not None else abs(cfg["m"]) + 2 * N + 16
        for A in cfg["areas"]:
            row = [A, N, cfg["m"], leakage_exact(A, N, cfg["m"], l_max), leakage_estimate(A, N), l_max]
            if cfg["worst_case"]:
                row.append(leakage_worst_case(A, N, cfg["m"], l_max))
            rows.append(row)
    return [write_csv(out / "leakage.csv", header, rows)], {"rows": len(rows)}


def cmd_validate_sudden(cfg, derived, out):
    eps = np.asarray(cfg["epsilons"])
    dev = np.array([sudden_deviation(cfg["area"], e, cfg["steps"], cfg["l_max"]) for e in eps])
    slope = float(np.polyfit(np.log(eps), np.log(dev), 1)[0]) if len(eps) > 1 else float("nan")
    path = write_csv(out / "validate-sudden.csv", ["epsilon", "max_amplitude_deviation"], zip(eps, dev))
    return [path], {"scaling_exponent": slope}


def _sweep_job(job):
    area, N, kicks, temperature, cfg, ratio = job
    tc = TrainConfig(area, kicks, cfg["epsilon"], mode=cfg["mode"])
    if temperature == 0:
        res = run_adaptive_train(tc, N=N)
        overlap = float(abs(np.vdot(res.target.state.amplitudes, res.final_state.amplitudes[: N + 1])) ** 2)
        peak, duration = res.post_train_peak, res.post_train_duration
    else:
        traj = run_thermal_train(build_ensemble(ratio), tc, N=N)
        overlap, peak, duration = float("nan"), traj.post_train_peak, traj.post_train_duration
    return [area, N, kicks, temperature, peak, duration, overlap, leakage_estimate(area, N)]


def cmd_sweep(cfg, derived, out):
    from .units import get_molecule, kelvin_to_ratio

    mol = get_molecule(cfg["molecule"], cfg.get("registry"))
    jobs = [
        (a, n, k, t, cfg, kelvin_to_ratio(mol, t) if t > 0 else None)
        for t in cfg["temperatures"] for n in cfg["ns"] for k in cfg["kicks"] for a in cfg["areas"]
    ]
    if cfg["workers"] > 1:
        with ProcessPoolExecutor(cfg["workers"]) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(j) for j in jobs]
    header = ["A", "N", "kicks", "temperature_K", "post_train_peak", "post_train_duration",
              "final_overlap", "eta_estimate"]
    return [write_csv(out / "sweep.csv", header, rows)], {"runs": len(rows)}


COMMANDS = {
    "targets": cmd_targets,
    "simulate": cmd_simulate,
    "thermal": cmd_thermal,
    "leakage": cmd_leakage,
    "validate-sudden": cmd_validate_sudden,
    "sweep": cmd_sweep,
}


def run(argv=None) -> dict:
    """Execute one command and return its manifest."""
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    file_cfg = cfgmod.load_config_file(args.config) if args.config else None
    cfg = cfgmod.resolve(args.command, file_cfg, _overrides(args))
    derived = cfgmod.derive(cfg)
    out_dir = Path(args.output_dir or os.environ.get("ROTORKICK_OUTPUT_DIR") or "rotorkick-out")
    prefix = args.prefix or args.command
    tmp_dir = out_dir / f".{prefix}.parts"
    paths, summary = COMMANDS[args.command](cfg, derived, tmp_dir)
    final = []
    for p in paths:
        stem = p.name if prefix == args.command else f"{prefix}.{p.name}"
        dest = out_dir / stem
        os.replace(p, dest)
        final.append(dest)
    tmp_dir.rmdir()
    manifest = {
        "manifest_version": 1,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "command": args.command,
        "argv": list(sys.argv[1:] if argv is None else argv),
        "config": cfg,
        "library_version": _version(),
        "derived": derived,
        "outputs": [str(p) for p in final],
        "results": summary,
        "wall_clock_s": time.perf_counter() - started,
    }
    write_json(out_dir / f"{prefix}.manifest.json", manifest)
    return manifest


def main(argv=None) -> int:
    try:
        run(argv)
    except ConfigError as exc:
        print(f"rotorkick: config error: {exc}", file=sys.stderr)
        return 2
    except (BasisOverflowError, LeakageConvergenceError, EigensolverError) as exc:
        print(f"rotorkick: numerical failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
