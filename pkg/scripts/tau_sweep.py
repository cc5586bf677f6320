"""Fidelity-vs-duration campaign for a preset at reduced scale.

Runs the preset's gate layer over a few angles and durations and prints the
aggregate table (mean across angles of the mean and best-of-restarts fidelity).

    python3 scripts/tau_sweep.py --preset B --angles 0.2 --taus 500 1000 --restarts 2 --iterations 40
"""

import argparse
from pathlib import Path

from bosonic_qoc.campaign import run_sweep
from bosonic_qoc.config import load_preset


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--preset", choices=["A", "B"], default="B")
    p.add_argument("--angles", type=float, nargs="+", default=[0.2], help="angles in units of pi")
    p.add_argument("--taus", type=float, nargs="+", default=[500.0, 1000.0], help="durations in ns")
    p.add_argument("--restarts", type=int, default=2)
    p.add_argument("--iterations", type=int, default=40)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, default=Path("runs/tau_sweep"))
    args = p.parse_args()

    config = load_preset(args.preset)
    config.gate.angles_over_pi = args.angles
    config.pulse.durations_ns = args.taus
    config.optimizer.restarts = args.restarts
    config.optimizer.max_iterations = args.iterations
    result = run_sweep(config, args.out, args.workers)
    print(f"{'tau_ns':>8} {'mean F':>8} {'best F':>8} {'p20':>8} {'p80':>8} {'max leak':>9}")
    for r in result["aggregate"]:
        print(f"{r['tau_ns']:8.0f} {r['mean_fidelity']:8.4f} {r['mean_best_fidelity']:8.4f} "
              f"{r['mean_p20_fidelity']:8.4f} {r['mean_p80_fidelity']:8.4f} {r['max_leakage']:9.2e}")
    print(f"CSV files in {args.out}")


if __name__ == "__main__":
    main()
