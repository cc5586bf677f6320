"""Spectrum of a random initial pulse: lines sit at the rotating-frame carriers.

    python3 scripts/spectrum_demo.py --preset A --tau 1000
"""

import argparse

import numpy as np
from scipy.signal import find_peaks

from bosonic_qoc.controls import pulse_spectrum, random_init
from bosonic_qoc.model import preset
from bosonic_qoc.resonance import carrier_sets, enumerate_transitions


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--preset", choices=["A", "B"], default="A")
    p.add_argument("--tau", type=float, default=1000.0, help="duration in ns")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    system = preset(args.preset)
    carriers = carrier_sets(enumerate_transitions(system))
    params = random_init(carriers, args.tau * 1e-9, 10, args.seed)
    print(f"frequency resolution 1/tau = {1e3 / args.tau:.3f} MHz; closer carriers merge")
    for label, freqs in carriers.items():
        f_mhz = np.sort(freqs / (2 * np.pi * 1e6))
        rate = max(8 * np.abs(f_mhz).max(), 100.0) * 1e6
        nu, mag = pulse_spectrum(params, label, rate)
        peaks, _ = find_peaks(mag, height=0.2 * mag.max())
        print(f"mode {label}: {len(f_mhz)} carriers (MHz) {np.round(f_mhz, 3).tolist()}")
        print(f"  strongest spectral lines (MHz) {np.round(np.sort(nu[peaks]) / 1e6, 3).tolist()}")


if __name__ == "__main__":
    main()
