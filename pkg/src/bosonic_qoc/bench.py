"""Desk-scale reproduction scenarios, one per acceptance criterion.

Each scenario returns a ScenarioResult with a pass flag and metrics; the
runner writes one metrics row per scenario. Runtime budgets are soft: an
overrun is logged as a warning but does not fail the scenario.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .config import load_preset
from .controls import PulseParams, zero_pulse
from .dynamics import propagate, propagate_samples
from .fockspace import ModeSpec, lowering_operator
from .io import write_rows
from .model import SystemSpec, build_static_hamiltonian, preset, static_energies
from .objective import SynthesisProblem
from .optimizer import OptimizerConfig, multistart
from .resonance import carrier_sets, enumerate_transitions
from .targets import (SIGMA_X, SIGMA_Z, TargetGate, build_layer, dft_matrix, mixing_qutrit,
                      phase_separation)
from .units import TWO_PI, ghz, mhz
from .validation import fd_gradient_check, random_point, validation_problem

log = logging.getLogger(__name__)

METRIC_COLUMNS = ["scenario", "criterion", "passed", "seconds", "budget_s", "metrics"]


@dataclass
class ScenarioResult:
    name: str
    criterion: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0
    budget: float = math.inf

    def line(self) -> str:
        shown = ", ".join(f"{k}={_short(v)}" for k, v in self.metrics.items())
        return f"criterion {self.criterion:<3} {self.name:<20} {'PASS' if self.passed else 'FAIL'}  {shown}"


def _short(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(str(_short(x)) for x in v) + "]"
    return str(v)


@dataclass
class Scenario:
    name: str
    criterion: str
    budget: float  # seconds
    run: object
    description: str = ""


class BenchContext:
    """Shares synthesis runs between scenarios (leakage reuses the converged runs)."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.synthesis: dict = {}


# criterion 1

def resonance_counts(ctx: BenchContext) -> ScenarioResult:
    a = enumerate_transitions(preset("A"))
    b = enumerate_transitions(preset("B"))
    per_a = {k: len(v) for k, v in a.distinct_frequencies.items()}
    per_b = {k: len(v) for k, v in b.distinct_frequencies.items()}
    passed = (a.total_distinct() == 22 and per_a == {"T": 8, "m": 14}
              and len(b) == 33 and b.total_distinct() == 17 and per_b == {"T": 9, "l": 4, "m": 4})
    return ScenarioResult("resonance-counts", "1", passed, {
        "A_distinct": a.total_distinct(), "A_per_mode": per_a,
        "B_instances": len(b), "B_distinct": b.total_distinct(), "B_per_mode": per_b,
    })


# criterion 2

def gate_library(ctx: BenchContext) -> ScenarioResult:
    rng = np.random.default_rng(ctx.seed)
    worst_unitary = 0.0
    for name in ("A", "B"):
        system = preset(name)
        for kind in ("hadamard", "mix", "phase"):
            for angle in np.linspace(-math.pi, math.pi, 11):
                u = build_layer(system, kind, angle).unitary
                worst_unitary = max(worst_unitary, np.abs(u.conj().T @ u - np.eye(len(u))).max())
    uniform = np.ones(3) / math.sqrt(3)
    fixed = max(np.abs(mixing_qutrit(b) @ uniform - uniform).max() for b in rng.uniform(-math.pi, math.pi, 100))
    zz = np.kron(SIGMA_Z, SIGMA_Z)
    phase_err = max(
        np.abs(phase_separation(2, g) - np.exp(0.5j * g) * expm(0.5j * g * zz)).max()
        for g in rng.uniform(-math.pi, math.pi, 100)
    )
    f = dft_matrix(3)
    dft_err = max(
        np.abs(f @ np.diag([1, np.exp(-1j * b), np.exp(1j * b)]) @ f.conj().T - mixing_qutrit(b)).max()
        for b in rng.uniform(-math.pi, math.pi, 100)
    )
    tol = 1e-12
    passed = max(worst_unitary, fixed, phase_err, dft_err) < tol
    return ScenarioResult("gate-library", "2", passed, {
        "unitarity": worst_unitary, "uniform_fixed": fixed, "phase_vs_zz": phase_err, "circulant_vs_dft": dft_err,
    })


# criterion 3

def qubit_system(guard: int = 0, frequency: float = ghz(5.0), kerr: float = mhz(200.0)) -> SystemSpec:
    return SystemSpec(ModeSpec("T", 2, guard, frequency, kerr), name="qubit")


def small_system() -> SystemSpec:
    """Transmon qubit plus a 3-level cavity: dimension 6."""
    t = ModeSpec("T", 2, 0, ghz(5.0), mhz(200.0))
    m = ModeSpec("m", 3, 0, ghz(3.0), mhz(0.6))
    return SystemSpec(t, (m,), {("T", "m"): mhz(10.95)}, name="small")


def piecewise_constant_oracle(system: SystemSpec, drives: dict, duration: float, steps: int,
                              refine: int = 10) -> np.ndarray:
    """Ordered product of dense exponentials, each step split into ``refine`` equal substeps."""
    h0 = build_static_hamiltonian(system)
    ops = {m.label: lowering_operator(system.basis, j) for j, m in enumerate(system.modes) if m.label in drives}
    dt = duration / steps / refine
    u = np.eye(system.basis.dim_full, dtype=complex)
    for n in range(steps):
        h = h0.astype(complex)
        for label, a in ops.items():
            d = drives[label][n]
            h = h + d * a + np.conj(d) * a.conj().T
        step = expm(-1j * dt * h)
        for _ in range(refine):
            u = step @ u
    return u


def propagator(ctx: BenchContext) -> ScenarioResult:
    # zero drive: analytic diagonal phases at 8000 ns
    system = preset("B")
    carriers = carrier_sets(enumerate_transitions(system))
    tau = 8000e-9
    res = propagate(system, zero_pulse(carriers, tau, 10), columns="full")
    phases = np.exp(-1j * static_energies(system) * tau)
    zero_err = float(np.abs(res.final_propagator - np.diag(phases)).max())

    # random piecewise-constant drive, dimension 6, against a refined dense product
    small = small_system()
    rng = np.random.default_rng(ctx.seed)
    steps, duration = 200, 50e-9
    drives = {label: TWO_PI * 5e6 * (rng.normal(size=steps) + 1j * rng.normal(size=steps))
              for label in ("T", "m")}
    got = propagate_samples(small, drives, duration, steps, method="expm", columns="full").final_propagator
    want = piecewise_constant_oracle(small, drives, duration, steps)
    random_err = float(np.abs(got - want).max())

    # resonant constant drive on a qubit: P1(t) = sin^2(|alpha| t) in the interaction frame
    qubit = qubit_system()
    alpha = TWO_PI * 2e6
    duration = 200e-9
    params = PulseParams({"T": np.full((1, 10), alpha, dtype=complex)}, {"T": [mhz(200.0)]}, duration, 10)
    final = propagate(qubit, params, columns="full").final_propagator
    rabi_err = abs(abs(final[1, 0]) ** 2 - math.sin(alpha * duration) ** 2)

    passed = zero_err < 1e-10 and random_err < 1e-9 and rabi_err < 1e-6
    return ScenarioResult("propagator", "3", passed, {
        "zero_drive_err": zero_err, "random_drive_err": random_err, "rabi_err": rabi_err,
    })


# criterion 4

def gradient_fd(ctx: BenchContext, points: int = 10, components: int = 20) -> ScenarioResult:
    worst = {}
    passed = True
    for name in ("A", "B"):
        problem = validation_problem(preset(name), 500e-9, 10)
        worst[name] = 0.0
        for p in range(points):
            seed = ctx.seed + p
            x = random_point(problem, seed)
            comps = np.random.default_rng(seed).choice(len(x), size=components, replace=False)
            ok, ratio, _ = fd_gradient_check(problem, x, comps)
            passed &= ok
            worst[name] = max(worst[name], ratio)
    return ScenarioResult("gradient-fd", "4", bool(passed), {
        "points_per_preset": points, "components": components,
        "A_max_err_over_tol": worst["A"], "B_max_err_over_tol": worst["B"],
    })


# criterion 5

def _record_synthesis(ctx, key, problem, params, records):
    ctx.synthesis[key] = {"problem": problem, "params": params, "records": records}


def qubit_x_problem(duration: float = 100e-9, splines: int = 10) -> SynthesisProblem:
    system = qubit_system(guard=1)
    carriers = carrier_sets(enumerate_transitions(system))
    target = TargetGate("custom", math.pi, SIGMA_X)
    return SynthesisProblem(system, target, carriers, duration, splines)


def qubit_x_gate(ctx: BenchContext) -> ScenarioResult:
    problem = qubit_x_problem()
    config = OptimizerConfig(max_iterations=100, target_fidelity=0.999, restarts=3, seed=ctx.seed)
    params, records = multistart(problem, config)
    _record_synthesis(ctx, "qubit-x-gate", problem, params, records)
    best = max(r.fidelity for r in records)
    return ScenarioResult("qubit-x-gate", "5a", best >= 0.999, {
        "best_fidelity": best, "iterations": [r.iterations for r in records],
        "max_guard_population": min(r.max_guard_population for r in records if r.fidelity == best),
    })


def preset_b_problem(duration: float, beta: float = math.pi / 5) -> SynthesisProblem:
    system = preset("B")
    carriers = carrier_sets(enumerate_transitions(system))
    return SynthesisProblem(system, build_layer(system, "mixing", beta), carriers, duration, 10)


def preset_b_mixing(ctx: BenchContext) -> ScenarioResult:
    """Restarts run one at a time and stop at the first success (up to 10)."""
    problem = preset_b_problem(1000e-9)
    records = []
    best_params = None
    for r in range(10):
        config = OptimizerConfig(max_iterations=150, target_fidelity=0.95, restarts=1, seed=ctx.seed + r)
        params, recs = multistart(problem, config)
        records += recs
        if best_params is None or recs[0].fidelity > max(x.fidelity for x in records[:-1]):
            best_params = params
        if recs[0].fidelity >= 0.95:
            break
    _record_synthesis(ctx, "preset-b-mixing", problem, best_params, records)
    best = max(r.fidelity for r in records)
    return ScenarioResult("preset-b-mixing", "5b", best >= 0.95, {
        "best_fidelity": best, "restarts_used": len(records),
        "iterations": [r.iterations for r in records],
    })


TAU_GRID_NS = (500.0, 1000.0, 2000.0)


def tau_trend(ctx: BenchContext, restarts: int = 2, max_iterations: int = 60) -> ScenarioResult:
    """Best-of-restarts fidelity on a fixed iteration budget for each tau.

    The target is set to 1 so that every run spends the same budget; with an
    early stop at a threshold the comparison would only measure where each run
    happened to cross it.
    """
    best = []
    for tau in TAU_GRID_NS:
        problem = preset_b_problem(tau * 1e-9)
        config = OptimizerConfig(max_iterations=max_iterations, target_fidelity=1.0,
                                 restarts=restarts, seed=ctx.seed)
        _, records = multistart(problem, config)
        best.append(max(r.fidelity for r in records))
    passed = all(b2 >= b1 for b1, b2 in zip(best, best[1:]))
    return ScenarioResult("tau-trend", "5c", passed, {"tau_ns": list(TAU_GRID_NS), "best_fidelity": best})


# criterion 6

def leakage(ctx: BenchContext) -> ScenarioResult:
    problem = qubit_x_problem()
    x = random_point(problem, ctx.seed)
    zeroed = SynthesisProblem(problem.system, problem.target, problem.carriers, problem.duration,
                              problem.splines, leakage=False)
    value = zeroed.evaluate(zeroed.template().with_vector(x), gradient=False)
    if "qubit-x-gate" not in ctx.synthesis:
        qubit_x_gate(ctx)
    guard_pops = {}
    for key, run in ctx.synthesis.items():
        converged = [r for r in run["records"] if r.converged]
        if converged:
            guard_pops[key] = max(r.max_guard_population for r in converged)
    passed = value.leakage == 0.0 and bool(guard_pops) and all(v < 1e-2 for v in guard_pops.values())
    return ScenarioResult("leakage", "6", passed, {"zeroed_weights_O_L": value.leakage, **{
        f"{k}_max_guard": v for k, v in guard_pops.items()}})


# criterion 7

def preset_bookkeeping(ctx: BenchContext) -> ScenarioResult:
    a, b = load_preset("A"), load_preset("B")
    found = {
        "N_b": (a.pulse.splines, b.pulse.splines),
        "N_f": (enumerate_transitions(a.system).total_distinct(), enumerate_transitions(b.system).total_distinct()),
        "expected_N_f": (a.pulse.expected_carriers, b.pulse.expected_carriers),
        "guard_T": (a.system.control_mode.guard_levels, b.system.control_mode.guard_levels),
        "guard_cavity": tuple(m.guard_levels for m in (*a.system.computational_modes, *b.system.computational_modes)),
        "restarts": (a.optimizer.restarts, b.optimizer.restarts),
        "target_fidelity": (a.optimizer.target_fidelity, b.optimizer.target_fidelity),
        "max_iterations": (a.optimizer.max_iterations, b.optimizer.max_iterations),
        "B_iteration_range": b.max_iterations_range,
    }
    want = {
        "N_b": (10, 10), "N_f": (22, 17), "expected_N_f": (22, 17), "guard_T": (3, 3),
        "guard_cavity": (2, 2, 2), "restarts": (10, 10), "target_fidelity": (0.99, 0.99),
        "max_iterations": (100, 150), "B_iteration_range": (30, 150),
    }
    mismatched = [k for k in want if found[k] != want[k]]
    return ScenarioResult("preset-bookkeeping", "7", not mismatched, {"mismatched": mismatched or "none"})


# criterion 8

def determinism(ctx: BenchContext) -> ScenarioResult:
    problem = qubit_x_problem()
    config = OptimizerConfig(max_iterations=20, target_fidelity=1.0, restarts=2, seed=ctx.seed)
    first_params, first = multistart(problem, config)
    second_params, second = multistart(problem, config)
    diff = max(abs(r1.fidelity - r2.fidelity) for r1, r2 in zip(first, second))
    param_diff = float(np.abs(first_params.pack() - second_params.pack()).max())
    same_counts = [r.iterations for r in first] == [r.iterations for r in second]
    return ScenarioResult("determinism", "8", diff <= 1e-12 and same_counts, {
        "max_fidelity_diff": diff, "max_param_diff": param_diff, "same_iteration_counts": same_counts,
    })


SCENARIOS = {
    s.name: s for s in [
        Scenario("resonance-counts", "1", 1.0, resonance_counts, "carrier counts for presets A and B"),
        Scenario("gate-library", "2", 1.0, gate_library, "target unitaries and identities"),
        Scenario("propagator", "3", 30.0, propagator, "zero drive, refined dense product, Rabi flop"),
        Scenario("gradient-fd", "4", 600.0, gradient_fd, "adjoint vs central differences"),
        Scenario("qubit-x-gate", "5a", 120.0, qubit_x_gate, "qubit X gate with one guard level"),
        Scenario("preset-b-mixing", "5b", 7200.0, preset_b_mixing, "preset B mixing layer, beta = pi/5"),
        Scenario("tau-trend", "5c", 7200.0, tau_trend, "best fidelity non-decreasing in tau"),
        Scenario("leakage", "6", 120.0, leakage, "O_L with zero weights; guard population of converged runs"),
        Scenario("preset-bookkeeping", "7", 5.0, preset_bookkeeping, "shipped preset configs"),
        Scenario("determinism", "8", 60.0, determinism, "identical reruns"),
    ]
}
CRITERIA = ("1", "2", "3", "4", "5a", "5b", "5c", "6", "7", "8")


def run_scenario(name: str, ctx: BenchContext | None = None) -> ScenarioResult:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}")
    ctx = ctx or BenchContext()
    scenario = SCENARIOS[name]
    start = time.perf_counter()
    result = scenario.run(ctx)
    result.seconds = time.perf_counter() - start
    result.budget = scenario.budget
    if result.seconds > scenario.budget:
        log.warning("scenario %s took %.1f s, budget %.0f s", name, result.seconds, scenario.budget)
    return result


def run_all(names=None, ctx: BenchContext | None = None) -> list[ScenarioResult]:
    ctx = ctx or BenchContext()
    return [run_scenario(n, ctx) for n in (names or list(SCENARIOS))]


def write_metrics(path, results: list[ScenarioResult]):
    rows = [{
        "scenario": r.name, "criterion": r.criterion, "passed": r.passed, "seconds": round(r.seconds, 3),
        "budget_s": r.budget, "metrics": "; ".join(f"{k}={_short(v)}" for k, v in r.metrics.items()),
    } for r in results]
    return write_rows(path, METRIC_COLUMNS, rows)
