"""Time-ordered propagation of the driven system.

The drive is sampled at step midpoints. Two unitary steppers are provided:

``split`` (default)
    Strang splitting exp(-i E dt/2) K exp(-i E dt/2). The static part is
    diagonal and exponentiated exactly; K is the product over driven modes
    of exp(-i dt V_m), and these commute because each V_m acts on one tensor
    factor. Every step is exactly unitary and costs a few small matmuls.
``expm``
    Exact dense exponential of the full midpoint Hamiltonian. Exact for
    piecewise-constant drives. Only sensible for small Hilbert spaces.

Both steppers also provide the reverse step and the per-step derivative
data needed by the discrete adjoint in :mod:`bosonic_qoc.objective`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .controls import PulseParams, sample_drives
from .fockspace import embed_mode_operator, single_mode_lowering
from .model import SystemSpec, static_energies
from .units import TWO_PI

METHODS = ("split", "expm")
STEPS_PER_PERIOD = 20
MIN_STEPS = 10_000


class StepTooCoarse(ValueError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    duration: float
    steps: int

    @property
    def dt(self) -> float:
        return self.duration / self.steps

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.duration, self.steps + 1)

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.steps) + 0.5) * self.dt

    @property
    def trapezoid(self) -> np.ndarray:
        w = np.full(self.steps + 1, self.dt)
        w[0] = w[-1] = 0.5 * self.dt
        return w


def fastest_frequency(carriers: dict, duration: float, splines: int) -> float:
    """Largest carrier (Hz) plus the envelope bandwidth N_b / tau."""
    fmax = max((np.max(np.abs(c)) for c in carriers.values() if len(c)), default=0.0) / TWO_PI
    return fmax + splines / duration


def default_steps(carriers: dict, duration: float, splines: int) -> int:
    f = fastest_frequency(carriers, duration, splines)
    dt = min(1.0 / (STEPS_PER_PERIOD * f), duration / MIN_STEPS)
    return int(math.ceil(duration / dt * (1 - 1e-12)))


def check_resolution(carriers: dict, duration: float, splines: int, steps: int) -> None:
    f = fastest_frequency(carriers, duration, splines)
    dt = duration / steps
    if dt * f * STEPS_PER_PERIOD > 1.0 + 1e-9:
        need = int(math.ceil(duration * f * STEPS_PER_PERIOD))
        raise StepTooCoarse(
            f"{steps} steps give {1 / (dt * f):.1f} steps per period of the fastest drive "
            f"component ({f / 1e6:.1f} MHz); need >= {STEPS_PER_PERIOD}, i.e. steps >= {need}"
        )


def _mode_hermitian_parts(levels: int) -> tuple[np.ndarray, np.ndarray]:
    """V = x hx + y hy equals d a + conj(d) a^dagger for d = x + i y."""
    a = single_mode_lowering(levels)
    return a + a.conj().T, 1j * (a - a.conj().T)


def _exp_derivative_kernel(lam: np.ndarray, dt: float) -> np.ndarray:
    """Divided differences of exp(-i dt lambda), stable for (near-)degenerate eigenvalues."""
    diff = lam[..., :, None] - lam[..., None, :]
    mean = 0.5 * (lam[..., :, None] + lam[..., None, :])
    return -1j * dt * np.exp(-1j * dt * mean) * np.sinc(dt * diff / (2 * np.pi))


class SplitStepper:
    def __init__(self, system: SystemSpec, energies: np.ndarray, dt: float, drives: dict, steps: int):
        dims = system.basis.dims
        self.dt = dt
        self.half = np.exp(-0.5j * dt * energies)
        self.factors = []  # (label, levels, leading size, hx, hy, eigvecs, eigvals, K) per driven mode
        self._cross = []
        for label, d in drives.items():
            j = system.basis.mode_index(label)
            hx, hy = _mode_hermitian_parts(dims[j])
            v = d.real[:, None, None] * hx + d.imag[:, None, None] * hy
            lam, q = np.linalg.eigh(v)
            k = (q * np.exp(-1j * dt * lam)[:, None, :]) @ q.conj().transpose(0, 2, 1)
            pre = int(np.prod(dims[:j]))
            self.factors.append((label, dims[j], pre, hx, hy, q, lam, k))
            self._cross.append(np.zeros((steps, dims[j], dims[j]), dtype=complex))

    @staticmethod
    def _apply(mat, psi, pre, n):
        return np.matmul(mat, psi.reshape(pre, n, -1)).reshape(psi.shape)

    def step(self, n: int, psi: np.ndarray) -> np.ndarray:
        psi = self.half[:, None] * psi
        for _, levels, pre, *_, k in self.factors:
            psi = self._apply(k[n], psi, pre, levels)
        return self.half[:, None] * psi

    def backward(self, n: int, psi_next: np.ndarray, lam_next: np.ndarray):
        """Returns (psi_n, M_n^dagger lam_next) and records derivative data for step n."""
        back = np.conj(self.half)[None, :, None]
        u = back * np.stack([psi_next, lam_next])
        for _, levels, pre, *_, k in self.factors:
            u = self._apply(k[n].conj().T, u, 2 * pre, levels)
        # u = (P psi_n, P nu): cross matrices between the two for each mode
        for slot, (_, levels, pre, *_rest) in enumerate(self.factors):
            phi = u[0].reshape(pre, levels, -1)
            mu = u[1].reshape(pre, levels, -1)
            r = mu.conj() @ phi.transpose(0, 2, 1)
            self._cross[slot][n] = r[0] if pre == 1 else r.sum(axis=0)
        u = back * u
        return u[0], u[1]

    def control_gradients(self) -> dict:
        """dJ/dx + i dJ/dy per step for each driven mode (x, y = Re, Im of the midpoint drive)."""
        out = {}
        for slot, (label, _, _, hx, hy, q, lam, k) in enumerate(self.factors):
            gamma = _exp_derivative_kernel(lam, self.dt)
            qh = q.conj().transpose(0, 2, 1)
            phase = np.exp(1j * self.dt * lam)
            r = self._cross[slot]
            g = []
            for h in (hx, hy):
                inner = phase[:, :, None] * gamma * (qh @ h @ q)
                a = q @ inner @ qh  # K^dagger dK
                g.append(2.0 * np.real(np.sum(a * r, axis=(1, 2))))
            out[label] = g[0] + 1j * g[1]
        return out


class ExpmStepper:
    """Exponentials are formed step by step (dense, dim^2 each), never stored in bulk."""

    def __init__(self, system: SystemSpec, energies: np.ndarray, dt: float, drives: dict, steps: int):
        self.dt = dt
        self.h0 = np.diag(energies).astype(complex)
        self.drives = drives
        self.parts = {}
        for label in drives:
            j = system.basis.mode_index(label)
            hx, hy = _mode_hermitian_parts(system.basis.dims[j])
            self.parts[label] = (embed_mode_operator(system.basis, j, hx), embed_mode_operator(system.basis, j, hy))
        self._grad = {label: np.zeros(steps, dtype=complex) for label in drives}

    def _eig(self, n: int):
        h = self.h0.copy()
        for label, (hx, hy) in self.parts.items():
            d = self.drives[label][n]
            h += d.real * hx + d.imag * hy
        lam, q = np.linalg.eigh(h)
        return lam, q, (q * np.exp(-1j * self.dt * lam)) @ q.conj().T

    def step(self, n: int, psi: np.ndarray) -> np.ndarray:
        return self._eig(n)[2] @ psi

    def backward(self, n: int, psi_next: np.ndarray, lam_next: np.ndarray):
        lam, q, m = self._eig(n)
        mh = m.conj().T
        psi = mh @ psi_next
        nu = mh @ lam_next
        gamma = _exp_derivative_kernel(lam, self.dt)
        # sum_ij dM_ij R_ij with R_ij = sum_c conj(lam_next_ic) psi_jc, rotated into the eigenbasis
        r_rot = q.T @ (lam_next.conj() @ psi.T) @ q.conj()
        qh = q.conj().T
        for label, (hx, hy) in self.parts.items():
            gx = 2.0 * np.real(np.sum(gamma * (qh @ hx @ q) * r_rot))
            gy = 2.0 * np.real(np.sum(gamma * (qh @ hy @ q) * r_rot))
            self._grad[label][n] = gx + 1j * gy
        return psi, nu

    def control_gradients(self) -> dict:
        return self._grad


STEPPERS = {"split": SplitStepper, "expm": ExpmStepper}


@dataclass
class PropagationResult:
    final_propagator: np.ndarray  # (dim_full, n_columns)
    leakage_integral: float
    step_count: int
    max_guard_population: float
    columns: np.ndarray

    def unitarity_error(self) -> float:
        u = self.final_propagator
        return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))


def initial_columns(system: SystemSpec, columns="essential") -> np.ndarray:
    if isinstance(columns, str):
        if columns == "essential":
            return system.basis.essential_indices
        if columns == "full":
            return np.arange(system.basis.dim_full)
        raise ValueError(f"columns must be 'essential', 'full' or an index list, got {columns!r}")
    return np.asarray(columns, dtype=int)


def make_stepper(system, drives, grid: TimeGrid, method="split", frame="rotating"):
    if method not in STEPPERS:
        raise ValueError(f"method must be one of {METHODS}")
    return STEPPERS[method](system, static_energies(system, frame), grid.dt, drives, grid.steps)


def run_forward(stepper, psi0: np.ndarray, grid: TimeGrid, weights: np.ndarray | None,
                guard_mask: np.ndarray):
    """March psi0 through all steps; returns (final, trapezoid leakage / tau, max guard population)."""
    psi = psi0
    trap = grid.trapezoid / grid.duration
    leak = 0.0
    max_guard = 0.0
    for n in range(grid.steps + 1):
        if n > 0:
            psi = stepper.step(n - 1, psi)
        pop = psi.real**2 + psi.imag**2
        if weights is not None:
            leak += trap[n] * float(weights @ pop.sum(axis=1))
        if guard_mask.any():
            max_guard = max(max_guard, float(np.max(guard_mask @ pop)))
    return psi, leak, max_guard


def propagate_samples(system: SystemSpec, drives: dict, duration: float, steps: int,
                      method: str = "split", frame: str = "rotating", weights=None,
                      columns="essential") -> PropagationResult:
    """Propagate with explicit midpoint drive samples ``drives[label]`` of length ``steps``."""
    grid = TimeGrid(duration, steps)
    for label, d in drives.items():
        if len(d) != steps:
            raise ValueError(f"drive {label!r} has {len(d)} samples, expected {steps}")
    cols = initial_columns(system, columns)
    psi0 = np.eye(system.basis.dim_full, dtype=complex)[:, cols]
    stepper = make_stepper(system, drives, grid, method, frame)
    guard = (~system.basis.essential_mask).astype(float)
    final, leak, max_guard = run_forward(stepper, psi0, grid, weights, guard)
    return PropagationResult(final, leak, steps, max_guard, cols)


def propagate(system: SystemSpec, params: PulseParams, steps: int | None = None,
              method: str = "split", frame: str = "rotating", weights=None,
              columns="essential") -> PropagationResult:
    """Propagator columns at t = tau for the spline pulse ``params``."""
    if steps is None:
        steps = default_steps(params.carriers, params.duration, params.splines)
    else:
        check_resolution(params.carriers, params.duration, params.splines, steps)
    grid = TimeGrid(params.duration, steps)
    drives = sample_drives(params, grid.midpoints)
    return propagate_samples(system, drives, params.duration, steps, method, frame, weights, columns)


def evolve_state(system: SystemSpec, params: PulseParams, psi0, n_samples: int = 101,
                 steps: int | None = None, method: str = "split", frame: str = "rotating"):
    """Populations of every basis state at ``n_samples`` evenly spaced times in [0, tau].

    Returns (times, populations[n_samples, dim_full]).
    """
    psi = np.asarray(psi0, dtype=complex).reshape(-1, 1)
    if psi.shape[0] != system.basis.dim_full:
        raise ValueError(f"state has dimension {psi.shape[0]}, expected {system.basis.dim_full}")
    if not math.isclose(float(np.vdot(psi, psi).real), 1.0, rel_tol=0, abs_tol=1e-10):
        raise ValueError("initial state is not normalized")
    if steps is None:
        steps = default_steps(params.carriers, params.duration, params.splines)
    else:
        check_resolution(params.carriers, params.duration, params.splines, steps)
    grid = TimeGrid(params.duration, steps)
    stepper = make_stepper(system, sample_drives(params, grid.midpoints), grid, method, frame)
    sample_at = set(np.round(np.linspace(0, steps, n_samples)).astype(int).tolist())
    times, pops = [], []
    for n in range(steps + 1):
        if n > 0:
            psi = stepper.step(n - 1, psi)
        if n in sample_at:
            times.append(n * grid.dt)
            pops.append(np.abs(psi[:, 0]) ** 2)
    return np.array(times), np.array(pops)


def lab_frame_pulse(system: SystemSpec, params: PulseParams) -> PulseParams:
    """The same physical drive with carriers shifted from the rotating to the lab frame.

    A rotating-frame term d a corresponds to d exp(i f t) a in the lab frame,
    so every carrier of mode j moves up by its frame offset f_j.
    """
    offsets = dict(zip(system.basis.labels, system.frame_offsets("rotating")))
    carriers = {k: np.asarray(v) + offsets[k] for k, v in params.carriers.items()}
    return PulseParams({k: a.copy() for k, a in params.alphas.items()}, carriers,
                       params.duration, params.splines, params.seed)
