"""Built-in property checks: the table printed by ``bosonic-qoc validate``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .controls import bspline_basis, random_init
from .dynamics import default_steps, propagate
from .model import SystemSpec
from .objective import SynthesisProblem, fidelity
from .resonance import carrier_sets, enumerate_transitions
from .targets import build_layer

EXPECTED_CARRIERS = {"A": 22, "B": 17}
FD_RTOL = 1e-5
FD_REL_STEP = 1e-6


@dataclass
class Check:
    name: str
    passed: bool
    value: str
    criterion: str

    def row(self) -> str:
        return f"{self.name:<22} {'PASS' if self.passed else 'FAIL':<5} {self.value:<28} {self.criterion}"


def fd_gradient_check(problem: SynthesisProblem, x: np.ndarray, components, rtol: float = FD_RTOL,
                      rel_step: float = FD_REL_STEP):
    """Compare adjoint gradient components with central differences.

    The step for component i is ``rel_step * |x_i|``. Rounding in the two
    objective values limits the difference quotient to about eps |f| / h, so
    the comparison is |g_adj - g_fd| <= rtol |g_fd| + 100 eps max(|f|, 1) / h.
    Returns (passed, worst ratio of error to tolerance, details list); each
    detail is (index, adjoint, finite difference, error / tolerance).
    """
    f0, g, _ = problem(x)
    details = []
    ok = True
    worst = 0.0
    for i in components:
        h = rel_step * max(abs(x[i]), 1.0)
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        fd = (problem.evaluate(problem.template().with_vector(xp), gradient=False).total
              - problem.evaluate(problem.template().with_vector(xm), gradient=False).total) / (2 * h)
        floor = 100 * np.finfo(float).eps * max(abs(f0), 1.0) / h
        ratio = abs(g[i] - fd) / (rtol * abs(fd) + floor)
        ok &= bool(ratio <= 1.0)
        worst = max(worst, ratio)
        details.append((int(i), float(g[i]), float(fd), float(ratio)))
    return ok, worst, details


def random_point(problem: SynthesisProblem, seed: int) -> np.ndarray:
    return random_init(problem.carriers, problem.duration, problem.splines, seed).pack()


def check_resonances(system: SystemSpec, expected: int | None) -> Check:
    n = enumerate_transitions(system).total_distinct()
    passed = expected is None or n == expected
    return Check("resonance count", passed, str(n), f"== {expected}" if expected is not None else "(no reference)")


def check_partition_of_unity(splines: int, duration: float) -> Check:
    t = np.linspace(0, duration, 2001)
    err = float(np.max(np.abs(bspline_basis(splines, duration, t).sum(axis=1) - 1)))
    return Check("partition of unity", err < 1e-12, f"{err:.1e}", "< 1e-12")


def check_unitarity(problem: SynthesisProblem, seed: int) -> Check:
    params = problem.template().with_vector(random_point(problem, seed))
    res = propagate(problem.system, params, problem.steps, problem.method, problem.frame, columns="full")
    err = res.unitarity_error()
    return Check("unitarity", err < 1e-8, f"{err:.1e}", "< 1e-8")


def check_gradient(problem: SynthesisProblem, seed: int, n_components: int = 4) -> Check:
    x = random_point(problem, seed)
    rng = np.random.default_rng(seed)
    comps = rng.choice(len(x), size=min(n_components, len(x)), replace=False)
    ok, worst, _ = fd_gradient_check(problem, x, comps)
    return Check("gradient vs FD", ok, f"max err/tol {worst:.2g}", f"<= 1 at rtol {FD_RTOL:g}")


def check_step_convergence(problem: SynthesisProblem, seed: int, tol: float = 1e-6) -> Check:
    params = problem.template().with_vector(random_point(problem, seed))
    values = []
    for steps in (problem.steps, 2 * problem.steps):
        res = propagate(problem.system, params, steps, problem.method, problem.frame)
        values.append(fidelity(res, problem.target, problem.system.basis))
    diff = abs(values[1] - values[0])
    return Check("step convergence", diff < tol, f"|dF| {diff:.1e} at 2x steps", f"< {tol:g}")


def validation_problem(system: SystemSpec, duration: float = 500e-9, splines: int = 10,
                       gradient_error: float = 0.0) -> SynthesisProblem:
    carriers = carrier_sets(enumerate_transitions(system))
    target = build_layer(system, "mixing", math.pi / 5)
    return SynthesisProblem(system, target, carriers, duration, splines,
                            default_steps(carriers, duration, splines), gradient_error=gradient_error)


def run_validation(system: SystemSpec, expected_carriers: int | None = None, seed: int = 0,
                   gradient_error: float = 0.0, duration: float = 500e-9) -> list[Check]:
    problem = validation_problem(system, duration, gradient_error=gradient_error)
    return [
        check_resonances(system, expected_carriers),
        check_partition_of_unity(problem.splines, problem.duration),
        check_unitarity(problem, seed),
        check_gradient(problem, seed),
        check_step_convergence(problem, seed),
    ]


def format_table(checks: list[Check]) -> str:
    header = f"{'check':<22} {'result':<5} {'value':<28} criterion"
    return "\n".join([header, *(c.row() for c in checks)])
