"""Pulse parametrization: quadratic B-spline envelopes modulated by resonant carriers.

For a driven mode m with carriers Omega_k (rad/s, rotating frame),

    d_m(t) = sum_k exp(i Omega_k t) sum_b alpha_{k,b} S_b(t)

where S_b are quadratic B-splines on a uniform clamped knot vector over [0, tau].
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

from .units import TWO_PI, to_mhz

SPLINE_DEGREE = 2
INIT_AMPLITUDE = TWO_PI * 0.2e6  # rad/s, upper bound for random initial coefficients


def knot_vector(n_splines: int, duration: float) -> np.ndarray:
    if n_splines < SPLINE_DEGREE + 1:
        raise ValueError(f"need at least {SPLINE_DEGREE + 1} quadratic B-splines, got {n_splines}")
    interior = np.linspace(0.0, duration, n_splines - SPLINE_DEGREE + 1)
    return np.concatenate([[0.0] * SPLINE_DEGREE, interior, [duration] * SPLINE_DEGREE])


def bspline_basis(n_splines: int, duration: float, t) -> np.ndarray:
    """Values S_b(t); shape (n_splines,) for scalar t, (len(t), n_splines) otherwise."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    slack = 1e-12 * duration
    if np.any(t < -slack) or np.any(t > duration + slack):
        raise ValueError(f"t outside [0, {duration}]")
    t = np.clip(t, 0.0, duration)
    values = BSpline.design_matrix(t, knot_vector(n_splines, duration), SPLINE_DEGREE).toarray()
    return values[0] if scalar else values


@dataclass
class PulseParams:
    """Complex spline coefficients ``alphas[mode]`` of shape (n_carriers, n_splines)."""

    alphas: dict
    carriers: dict
    duration: float
    splines: int
    seed: int | None = None

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.splines < SPLINE_DEGREE + 1:
            raise ValueError(f"need at least {SPLINE_DEGREE + 1} splines")
        if list(self.alphas) != list(self.carriers):
            raise ValueError("alphas and carriers must name the same modes in the same order")
        for label, a in self.alphas.items():
            a = np.asarray(a, dtype=complex)
            if a.shape != (len(self.carriers[label]), self.splines):
                raise ValueError(f"mode {label!r}: alphas shape {a.shape} does not match carriers/splines")
            self.alphas[label] = a
            self.carriers[label] = np.asarray(self.carriers[label], dtype=float)

    @property
    def modes(self) -> list[str]:
        return list(self.alphas)

    @property
    def size(self) -> int:
        return sum(2 * a.size for a in self.alphas.values())

    def pack(self) -> np.ndarray:
        """Real vector: per mode, per carrier, N_b real parts then N_b imaginary parts."""
        chunks = []
        for a in self.alphas.values():
            chunks.append(np.concatenate([a.real, a.imag], axis=1).ravel())
        return np.concatenate(chunks) if chunks else np.zeros(0)

    def with_vector(self, x: np.ndarray) -> PulseParams:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.size,):
            raise ValueError(f"expected {self.size} parameters, got {x.shape}")
        alphas, pos = {}, 0
        for label, a in self.alphas.items():
            n = 2 * a.size
            block = x[pos:pos + n].reshape(a.shape[0], 2, self.splines)
            alphas[label] = block[:, 0] + 1j * block[:, 1]
            pos += n
        return PulseParams(alphas, {k: v.copy() for k, v in self.carriers.items()},
                           self.duration, self.splines, self.seed)

    def to_dict(self) -> dict:
        return {
            "duration_ns": round(self.duration * 1e9, 6),
            "splines": self.splines,
            "seed": self.seed,
            "carriers_MHz": {k: [to_mhz(w) for w in v] for k, v in self.carriers.items()},
            "alphas": {k: [[[z.real, z.imag] for z in row] for row in a] for k, a in self.alphas.items()},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> PulseParams:
        carriers = {k: TWO_PI * 1e6 * np.asarray(v, dtype=float) for k, v in doc["carriers_MHz"].items()}
        alphas = {}
        for k, rows in doc["alphas"].items():
            arr = np.asarray(rows, dtype=float).reshape(len(carriers[k]), -1, 2)
            alphas[k] = arr[..., 0] + 1j * arr[..., 1]
        splines = doc.get("splines") or next(iter(alphas.values())).shape[1]
        return cls(alphas, carriers, doc["duration_ns"] * 1e-9, int(splines), doc.get("seed"))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> PulseParams:
        return cls.from_dict(json.loads(text))


def zero_pulse(carriers: dict, duration: float, splines: int) -> PulseParams:
    alphas = {k: np.zeros((len(v), splines), dtype=complex) for k, v in carriers.items()}
    return PulseParams(alphas, dict(carriers), duration, splines)


def random_init(carriers: dict, duration: float, splines: int, seed: int,
                amplitude: float = INIT_AMPLITUDE) -> PulseParams:
    """Every real parameter i.i.d. uniform in [0, amplitude)."""
    template = zero_pulse(carriers, duration, splines)
    rng = np.random.default_rng(seed)
    params = template.with_vector(rng.uniform(0.0, amplitude, size=template.size))
    params.seed = seed
    return params


def carrier_basis(params: PulseParams, label: str, t) -> np.ndarray:
    """exp(i Omega_k t) S_b(t), shape (len(t), n_carriers, n_splines)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = bspline_basis(params.splines, params.duration, t)
    phase = np.exp(1j * np.outer(t, params.carriers[label]))
    return phase[:, :, None] * s[:, None, :]


def evaluate_drive(params: PulseParams, label: str, t):
    """Complex drive amplitude d_m(t) in rad/s."""
    if label not in params.alphas:
        raise KeyError(f"mode {label!r} is not driven; driven modes: {params.modes}")
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    envelopes = bspline_basis(params.splines, params.duration, t) @ params.alphas[label].T
    d = np.sum(np.exp(1j * np.outer(t, params.carriers[label])) * envelopes, axis=1)
    return d[0] if scalar else d


def sample_drives(params: PulseParams, t) -> dict:
    return {label: evaluate_drive(params, label, t) for label in params.modes}


def pulse_spectrum(params: PulseParams, label: str, sample_rate: float, frame_offset: float = 0.0):
    """Magnitude spectrum of d_m sampled over [0, tau).

    ``sample_rate`` is in Hz; ``frame_offset`` (rad/s) shifts the frequency axis,
    e.g. by the mode frequency to report lab-frame lines. Returns
    (frequencies in Hz ascending, |DFT| / n_samples).
    """
    carriers = params.carriers[label]
    fmax = np.max(np.abs(carriers)) / TWO_PI if len(carriers) else 0.0
    if sample_rate < 4 * fmax:
        raise ValueError(f"sample rate {sample_rate:.3g} Hz below 4x the largest carrier ({fmax:.3g} Hz)")
    n = max(int(round(params.duration * sample_rate)), 1)
    t = np.arange(n) / sample_rate
    d = evaluate_drive(params, label, t)
    spectrum = np.fft.fftshift(np.fft.fft(d)) / n
    freqs = np.fft.fftshift(np.fft.fftfreq(n, d=1.0 / sample_rate)) + frame_offset / TWO_PI
    return freqs, np.abs(spectrum)
