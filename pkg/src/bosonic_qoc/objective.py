"""Synthesis objective O = O_F + O_L and its discrete-adjoint gradient.

O_F = 1 - |Tr_ess(U^dagger V) / E|^2 with E the essential dimension, and
O_L = (1/tau) * trapezoid-integral of Tr(U(t)^dagger W U(t)) over the
integrator's own time grid. The gradient is the exact derivative of this
discretized objective, so it agrees with finite differences of the same
discretization up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .controls import PulseParams, carrier_basis
from .dynamics import TimeGrid, check_resolution, default_steps, make_stepper, run_forward
from .fockspace import CompositeBasis
from .model import SystemSpec
from .targets import TargetGate


def guard_weights(basis: CompositeBasis) -> np.ndarray:
    """Leakage weights: 1.0 on the deepest guard level, one decade less per level below, 0 on essential states."""
    depth = np.maximum(0, basis.occupations - (np.array(basis.essential_dims) - 1))
    per_state = depth.max(axis=1)
    deepest = max(m.guard_levels for m in basis.modes)
    return np.where(per_state > 0, 10.0 ** (per_state - deepest), 0.0)


def trace_overlap(final: np.ndarray, target: np.ndarray, basis: CompositeBasis) -> complex:
    """Tr(U^dagger V) / E over the essential block of the propagator columns."""
    idx = basis.essential_indices
    u = final[idx]
    if u.shape[1] == basis.dim_full:
        u = u[:, idx]
    if u.shape != target.shape:
        raise ValueError(f"propagator block {u.shape} does not match target {target.shape}")
    return complex(np.sum(u.conj() * target)) / basis.dim_essential


def fidelity(final, target: TargetGate | np.ndarray, basis: CompositeBasis) -> float:
    """|Tr_ess(U^dagger V) / E|^2. ``final`` may be a PropagationResult or a column block."""
    u = getattr(final, "final_propagator", final)
    v = target.unitary if isinstance(target, TargetGate) else np.asarray(target)
    return abs(trace_overlap(np.asarray(u), v, basis)) ** 2


@dataclass
class ObjectiveValue:
    infidelity: float
    leakage: float
    gradient: np.ndarray | None = None
    max_guard_population: float = 0.0
    overlap: complex = 0.0

    @property
    def total(self) -> float:
        return self.infidelity + self.leakage

    @property
    def fidelity(self) -> float:
        return 1.0 - self.infidelity


@dataclass
class SynthesisProblem:
    """Everything fixed during one optimization: system, target, carriers, tau, time grid."""

    system: SystemSpec
    target: TargetGate
    carriers: dict
    duration: float
    splines: int
    steps: int | None = None
    method: str = "split"
    frame: str = "rotating"
    leakage: bool = True
    weights: np.ndarray | None = None
    gradient_error: float = 0.0  # debug only: relative error injected into gradients
    _basis_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.target.dim != self.system.basis.dim_essential:
            raise ValueError(
                f"target is {self.target.dim}-dimensional, essential space is {self.system.basis.dim_essential}"
            )
        if self.steps is None:
            self.steps = default_steps(self.carriers, self.duration, self.splines)
        else:
            check_resolution(self.carriers, self.duration, self.splines, self.steps)
        if self.weights is None:
            self.weights = guard_weights(self.system.basis)
        if not self.leakage:
            self.weights = np.zeros(self.system.basis.dim_full)

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.duration, self.steps)

    def template(self) -> PulseParams:
        from .controls import zero_pulse
        return zero_pulse(self.carriers, self.duration, self.splines)

    def _carrier_basis(self, params: PulseParams, label: str) -> np.ndarray:
        if label not in self._basis_cache:
            self._basis_cache[label] = carrier_basis(params, label, self.grid.midpoints)
        return self._basis_cache[label]

    def drives(self, params: PulseParams) -> dict:
        return {
            label: np.einsum("nkb,kb->n", self._carrier_basis(params, label), params.alphas[label])
            for label in params.modes
        }

    def evaluate(self, params: PulseParams, gradient: bool = True) -> ObjectiveValue:
        basis = self.system.basis
        grid = self.grid
        stepper = make_stepper(self.system, self.drives(params), grid, self.method, self.frame)
        idx = basis.essential_indices
        psi0 = np.eye(basis.dim_full, dtype=complex)[:, idx]
        guard = (~basis.essential_mask).astype(float)
        weights = self.weights if np.any(self.weights) else None
        final, leak, max_guard = run_forward(stepper, psi0, grid, weights, guard)

        target = self.target.unitary
        overlap = trace_overlap(final, target, basis)
        value = ObjectiveValue(1.0 - abs(overlap) ** 2, leak, None, max_guard, overlap)
        if not gradient:
            return value

        coef = grid.trapezoid / grid.duration
        lam = np.zeros_like(final)
        lam[idx] = -np.conj(overlap) * target / basis.dim_essential
        if weights is not None:
            lam += coef[-1] * weights[:, None] * final
        psi = final
        for n in range(grid.steps - 1, -1, -1):
            psi, lam = stepper.backward(n, psi, lam)
            if weights is not None:
                lam = lam + coef[n] * weights[:, None] * psi

        chunks = []
        control_grads = stepper.control_gradients()
        for label in params.modes:
            z = np.einsum("n,nkb->kb", np.conj(control_grads[label]), self._carrier_basis(params, label))
            chunks.append(np.concatenate([z.real, -z.imag], axis=1).ravel())
        grad = np.concatenate(chunks)
        if self.gradient_error:
            grad = grad * (1.0 + self.gradient_error)
        value.gradient = grad
        return value

    def __call__(self, x: np.ndarray):
        """Optimizer interface: returns (objective, gradient, info)."""
        value = self.evaluate(self.template().with_vector(x))
        info = {
            "fidelity": value.fidelity,
            "leakage": value.leakage,
            "max_guard_population": value.max_guard_population,
        }
        return value.total, value.gradient, info


def objective_and_gradient(system: SystemSpec, params: PulseParams, target: TargetGate,
                           weights: np.ndarray | None = None, steps: int | None = None,
                           method: str = "split", frame: str = "rotating") -> ObjectiveValue:
    problem = SynthesisProblem(system, target, params.carriers, params.duration, params.splines,
                               steps, method, frame, weights=weights)
    return problem.evaluate(params)
