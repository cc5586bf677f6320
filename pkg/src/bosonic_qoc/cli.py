"""Command line interface: ``bosonic-qoc <command> ...``.

Exit codes: 0 success, 1 configuration or input error, 2 target fidelity not
reached (synthesize) or a failing check (validate, bench).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import SCENARIOS, BenchContext, run_scenario, write_metrics
from .campaign import build_problem, run_sweep
from .config import ConfigError, ExperimentConfig, load_config, load_preset
from .controls import pulse_spectrum
from .dynamics import evolve_state, lab_frame_pulse, propagate
from .fockspace import state_index
from .io import (RESONANCE_COLUMNS, check_roundtrip, read_pulse_json, resonance_rows,
                 write_pulse_json, write_pulse_samples, write_rows, write_spectrum, write_trajectory)
from .objective import fidelity
from .optimizer import multistart
from .resonance import enumerate_transitions
from .targets import build_layer
from .validation import EXPECTED_CARRIERS, format_table, run_validation

log = logging.getLogger("bosonic_qoc")

RUN_COLUMNS = ["seed", "iterations", "evaluations", "fidelity", "leakage", "objective",
               "max_guard_population", "wall_time", "cpu_time", "converged", "status"]


def _common(p: argparse.ArgumentParser, config_required: bool = False):
    p.add_argument("--config", type=Path, required=config_required, help="experiment TOML file")
    p.add_argument("--out", type=Path, help="output directory or file")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--seed", type=int, help="override the configured RNG seed")
    p.add_argument("--frame", choices=["rotating", "lab"], help="override the configured frame")


def _system_source(p: argparse.ArgumentParser):
    p.add_argument("--preset", choices=["A", "B"], help="use a shipped preset instead of --config")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bosonic-qoc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="multistart synthesis of one gate at one duration")
    _common(p, config_required=True)
    p.add_argument("--angle", type=float, help="angle in units of pi (default: first configured)")
    p.add_argument("--tau", type=float, help="duration in ns (default: first configured)")
    p.add_argument("--restarts", type=int, help="override the configured number of restarts")

    p = sub.add_parser("sweep", help="angle x duration x restart campaign with aggregate CSVs")
    _common(p, config_required=True)
    p.add_argument("--no-timing", action="store_true",
                   help="zero CPU-time columns so reruns are byte-identical")

    p = sub.add_parser("resonances", help="carrier table as CSV")
    _common(p)
    _system_source(p)

    p = sub.add_parser("spectrum", help="FFT magnitude of a stored pulse")
    _common(p)
    _system_source(p)
    p.add_argument("--pulse", type=Path, required=True, help="pulse JSON")
    p.add_argument("--mode", help="driven mode (default: all)")
    p.add_argument("--sample-rate", type=float, help="sample rate in MHz (default: 8x the largest carrier)")

    p = sub.add_parser("propagate", help="evolve a basis state under a stored pulse")
    _common(p)
    _system_source(p)
    p.add_argument("--pulse", type=Path, required=True, help="pulse JSON")
    p.add_argument("--state", default=None, help="initial occupations, e.g. '0,1,0' (default: ground)")
    p.add_argument("--samples", type=int, default=101, help="trajectory samples")
    p.add_argument("--angle", type=float, help="also report fidelity against the configured layer at this angle/pi")

    p = sub.add_parser("validate", help="built-in property checks")
    _common(p)
    _system_source(p)
    p.add_argument("--corrupt-gradient", action="store_true",
                   help="inject a 1%% gradient error (negative control: the FD check must fail)")

    p = sub.add_parser("bench", help="acceptance scenarios")
    bsub = p.add_subparsers(dest="bench_command", required=True)
    b = bsub.add_parser("run", help="run a scenario by name, or 'all'")
    b.add_argument("name", help=f"one of: all, {', '.join(SCENARIOS)}")
    b.add_argument("--out", type=Path, help="metrics CSV path")
    b.add_argument("--seed", type=int, default=0)
    bsub.add_parser("list", help="list scenarios")
    return parser


def _load(args) -> ExperimentConfig:
    if getattr(args, "config", None) is not None:
        config = load_config(args.config, args.seed)
    elif getattr(args, "preset", None):
        config = load_preset(args.preset, args.seed)
    else:
        raise ConfigError("--config", "give --config or --preset")
    if args.frame:
        config.frame = args.frame
    return config


def _out_dir(args, config: ExperimentConfig) -> Path:
    return args.out if args.out is not None else config.output_dir


def cmd_synthesize(args) -> int:
    config = _load(args)
    angle = args.angle if args.angle is not None else config.gate.angles_over_pi[0]
    tau = args.tau if args.tau is not None else config.pulse.durations_ns[0]
    if args.restarts is not None:
        config.optimizer.restarts = args.restarts
    problem = build_problem(config, angle, tau)
    params, records = multistart(problem, config.optimizer, args.workers)
    out = _out_dir(args, config)
    write_pulse_json(out / "pulse.json", params)
    write_pulse_samples(out / "pulse_samples.csv", params)
    write_rows(out / "runs.csv", RUN_COLUMNS, [r.as_row() for r in records])
    check_roundtrip(out / "runs.csv", RUN_COLUMNS, len(records))
    best = max(records, key=lambda r: r.fidelity)
    reached = best.fidelity >= config.optimizer.target_fidelity
    summary = [
        f"system {config.system.name}, layer {config.gate.layer}, angle {angle} pi, tau {tau} ns",
        f"restarts {len(records)}, best seed {best.seed}",
        f"best fidelity {best.fidelity:.6f} (target {config.optimizer.target_fidelity})",
        f"max guard population {best.max_guard_population:.3e}",
        f"target {'reached' if reached else 'NOT reached'}",
    ]
    (out / "summary.txt").write_text("\n".join(summary) + "\n")
    print("\n".join(summary))
    return 0 if reached else 2


def cmd_sweep(args) -> int:
    config = _load(args)
    out = _out_dir(args, config)
    result = run_sweep(config, out, args.workers, timing=not args.no_timing)
    for row in result["aggregate"]:
        print(f"{row['gate']} tau={row['tau_ns']:g} ns  mean fidelity {row['mean_fidelity']:.4f}  "
              f"best-of-restarts {row['mean_best_fidelity']:.4f}")
    print(f"wrote {out}")
    return 0


def cmd_resonances(args) -> int:
    config = _load(args)
    table = enumerate_transitions(config.system, config.frame)
    rows = resonance_rows(table)
    if args.out is not None:
        write_rows(args.out, RESONANCE_COLUMNS, rows)
        check_roundtrip(args.out, RESONANCE_COLUMNS, len(rows))
    else:
        print(",".join(RESONANCE_COLUMNS))
        for r in rows:
            print(f"{r['mode']},\"{r['from']}\",\"{r['to']}\",{r['freq_MHz']:.6f},{r['degeneracy_group']}")
    counts = {k: len(v) for k, v in table.distinct_frequencies.items()}
    print(f"# {len(table)} transitions, {table.total_distinct()} distinct carriers {counts}", file=sys.stderr)
    return 0


def cmd_spectrum(args) -> int:
    params = read_pulse_json(args.pulse)
    modes = [args.mode] if args.mode else params.modes
    offsets = {}
    if args.frame == "lab":
        system = _load(args).system
        offsets = dict(zip(system.basis.labels, system.frame_offsets("rotating")))
    fmax = max(np.max(np.abs(params.carriers[m])) for m in modes) / (2 * math.pi)
    rate = args.sample_rate * 1e6 if args.sample_rate else max(8 * fmax, 100e6)
    out = args.out or Path(".")
    for m in modes:
        freqs, mag = pulse_spectrum(params, m, rate, offsets.get(m, 0.0))
        path = write_spectrum(out / f"spectrum_{m}.csv", freqs, mag)
        peak = freqs[np.argmax(mag)] / 1e6
        print(f"{m}: strongest line at {peak:.3f} MHz -> {path}")
    return 0


def cmd_propagate(args) -> int:
    config = _load(args)
    system = config.system
    params = read_pulse_json(args.pulse)
    frame = config.frame
    run_params = lab_frame_pulse(system, params) if frame == "lab" else params
    basis = system.basis
    occ = [0] * len(basis.dims) if args.state is None else [int(n) for n in args.state.split(",")]
    psi0 = np.zeros(basis.dim_full, dtype=complex)
    psi0[state_index(basis, occ)] = 1.0
    times, pops = evolve_state(system, run_params, psi0, args.samples, frame=frame)
    labels = [basis.state_label(i) for i in range(basis.dim_full)]
    out = args.out or Path("trajectory.csv")
    write_trajectory(out, times, pops, labels)
    guard = float(pops[:, ~basis.essential_mask].sum(axis=1).max())
    print(f"final populations: " + ", ".join(
        f"{labels[i]}={pops[-1, i]:.4f}" for i in np.argsort(pops[-1])[::-1][:4]))
    print(f"max guard population {guard:.3e}; trajectory -> {out}")
    if args.angle is not None:
        res = propagate(system, run_params, frame=frame)
        target = build_layer(system, config.gate.layer, args.angle * math.pi, config.gate.graph)
        if frame == "lab":
            print("fidelity is reported in the rotating frame only", file=sys.stderr)
        else:
            print(f"fidelity vs {config.gate.layer}({args.angle} pi): {fidelity(res, target, basis):.6f}")
    return 0


def cmd_validate(args) -> int:
    config = _load(args)
    expected = EXPECTED_CARRIERS.get(args.preset) if args.preset else config.pulse.expected_carriers
    checks = run_validation(config.system, expected, seed=config.optimizer.seed,
                            gradient_error=0.01 if args.corrupt_gradient else 0.0)
    print(format_table(checks))
    return 0 if all(c.passed for c in checks) else 2


def cmd_bench(args) -> int:
    if args.bench_command == "list":
        for s in SCENARIOS.values():
            print(f"{s.criterion:<3} {s.name:<20} budget {s.budget:>6.0f} s  {s.description}")
        return 0
    names = list(SCENARIOS) if args.name == "all" else [args.name]
    if args.name != "all" and args.name not in SCENARIOS:
        raise ConfigError("name", f"unknown scenario {args.name!r}; known: {', '.join(SCENARIOS)}")
    ctx = BenchContext(args.seed)
    results = []
    for name in names:
        result = run_scenario(name, ctx)
        results.append(result)
        print(result.line(), flush=True)
    if args.out is not None:
        write_metrics(args.out, results)
    return 0 if all(r.passed for r in results) else 2


COMMANDS = {
    "synthesize": cmd_synthesize, "sweep": cmd_sweep, "resonances": cmd_resonances,
    "spectrum": cmd_spectrum, "propagate": cmd_propagate, "validate": cmd_validate, "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
