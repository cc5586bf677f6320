"""L-BFGS with a strong-Wolfe line search, optional box bounds, and random multistart."""

from __future__ import annotations

import logging
import math
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .controls import PulseParams, random_init
from .units import TWO_PI

log = logging.getLogger(__name__)

# Optimization variables are spline coefficients in units of 2*pi*MHz.
PARAM_SCALE = TWO_PI * 1e6


@dataclass
class OptimizerConfig:
    max_iterations: int = 100
    target_fidelity: float = 0.99
    memory: int = 10
    restarts: int = 10
    seed: int = 0
    bound: float | None = None  # symmetric box on every real coefficient, rad/s
    c1: float = 1e-4
    c2: float = 0.9
    gradient_tol: float = 1e-10
    max_line_search: int = 25

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 <= self.target_fidelity <= 1:
            raise ValueError("target_fidelity must lie in [0, 1]")
        if self.memory < 1 or self.restarts < 1:
            raise ValueError("memory and restarts must be >= 1")
        if self.bound is not None and self.bound <= 0:
            raise ValueError("bound must be positive")


@dataclass
class RunRecord:
    seed: int | None
    iterations: int
    evaluations: int
    fidelity: float
    leakage: float
    objective: float
    max_guard_population: float
    wall_time: float
    cpu_time: float
    converged: bool
    status: str

    @property
    def cpu_per_evaluation(self) -> float:
        return self.cpu_time / max(self.evaluations, 1)

    def as_row(self) -> dict:
        return asdict(self)


class _Counter:
    """Wraps the objective: counts calls, normalizes the return shape, tracks the best point."""

    def __init__(self, fun):
        self.fun = fun
        self.calls = 0
        self.best = None  # (f, x, g, info)

    def __call__(self, x):
        out = self.fun(x)
        f, g = out[0], out[1]
        info = out[2] if len(out) > 2 else {}
        self.calls += 1
        f = float(f)
        g = np.asarray(g, dtype=float)
        if math.isfinite(f) and (self.best is None or f < self.best[0]):
            self.best = (f, x.copy(), g, info)
        return f, g, info


def _two_loop(g, history):
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(history):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if history:
        s, y, _ = history[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(history, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


def _cubic_min(a, fa, da, b, fb, db):
    """Minimizer of the cubic through (a, fa, da), (b, fb, db); None if degenerate."""
    d1 = da + db - 3 * (fa - fb) / (a - b)
    rad = d1 * d1 - da * db
    if rad < 0:
        return None
    d2 = math.copysign(math.sqrt(rad), b - a)
    denom = db - da + 2 * d2
    if denom == 0:
        return None
    return b - (b - a) * (db + d2 - d1) / denom


def strong_wolfe(evaluate, x, d, f0, g0, alpha, c1=1e-4, c2=0.9, max_iter=25):
    """Line search along x + alpha d satisfying the strong Wolfe conditions.

    Near convergence, where objective differences drown in rounding, the
    approximate Wolfe test of Hager and Zhang (derivative-based, with f <= f0)
    is accepted as well. Returns (alpha, f, g, info) or None.
    """
    dphi0 = g0 @ d
    prev = (0.0, f0, dphi0, g0, {})
    evals = 0

    def approx_wolfe(f, dphi):
        return f <= f0 and c2 * dphi0 <= dphi <= (2 * c1 - 1) * dphi0

    def zoom(lo, hi):
        nonlocal evals
        while evals < max_iter:
            a_lo, f_lo, d_lo = lo[:3]
            a_hi, f_hi, d_hi = hi[:3]
            width = a_hi - a_lo
            trial = _cubic_min(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi)
            lo_edge, hi_edge = sorted((a_lo + 0.1 * width, a_hi - 0.1 * width))
            if trial is None or not lo_edge <= trial <= hi_edge:
                trial = 0.5 * (a_lo + a_hi)
            f, g, info = evaluate(x + trial * d)
            evals += 1
            dphi = g @ d
            if math.isfinite(f) and approx_wolfe(f, dphi):
                return trial, f, g, info
            if not math.isfinite(f) or f > f0 + c1 * trial * dphi0 or f >= f_lo:
                hi = (trial, f, dphi, g, info)
            else:
                if abs(dphi) <= -c2 * dphi0:
                    return trial, f, g, info
                if dphi * (a_hi - a_lo) >= 0:
                    hi = lo
                lo = (trial, f, dphi, g, info)
            if abs(hi[0] - lo[0]) < 1e-14 * max(1.0, abs(lo[0])):
                break
        # fall back to the best sufficient-decrease point seen, if any
        if lo[0] > 0:
            return lo[0], lo[1], lo[3], lo[4]
        return None

    for i in range(max_iter):
        f, g, info = evaluate(x + alpha * d)
        evals += 1
        dphi = g @ d
        cur = (alpha, f, dphi, g, info)
        if math.isfinite(f) and approx_wolfe(f, dphi):
            return alpha, f, g, info
        if not math.isfinite(f) or f > f0 + c1 * alpha * dphi0 or (i > 0 and f >= prev[1]):
            return zoom(prev, cur)
        if abs(dphi) <= -c2 * dphi0:
            return alpha, f, g, info
        if dphi >= 0:
            return zoom(cur, prev)
        prev = cur
        alpha *= 2.0
    return (prev[0], prev[1], prev[3], prev[4]) if prev[0] > 0 else None


def _projected_backtracking(evaluate, x, d, f0, g0, alpha, lower, upper, c1, max_iter):
    for _ in range(max_iter):
        trial = np.clip(x + alpha * d, lower, upper)
        step = trial - x
        if not np.any(step):
            return None
        f, g, info = evaluate(trial)
        if math.isfinite(f) and f <= f0 + c1 * (g0 @ step):
            return trial, f, g, info
        alpha *= 0.5
    return None


def _projected_gradient_norm(x, g, lower, upper):
    if lower is None:
        return float(np.max(np.abs(g))) if g.size else 0.0
    pg = np.clip(x - g, lower, upper) - x
    return float(np.max(np.abs(pg))) if pg.size else 0.0


def minimize(fun, x0, config: OptimizerConfig, seed=None, callback=None):
    """Minimize ``fun(x) -> (f, grad[, info])`` from ``x0``.

    Stops when ``info['fidelity'] >= config.target_fidelity``, after
    ``config.max_iterations`` iterations, or when the (projected) gradient
    max-norm drops below ``config.gradient_tol``. A failed line search ends the
    run with the best point so far. Returns ``(x, RunRecord)``.
    """
    wall0, cpu0 = time.perf_counter(), time.process_time()
    evaluate = _Counter(fun)
    bound = config.bound
    lower = upper = None
    x = np.asarray(x0, dtype=float).copy()
    if bound is not None:
        lower, upper = -bound * np.ones_like(x), bound * np.ones_like(x)
        x = np.clip(x, lower, upper)

    f, g, info = evaluate(x)
    history = deque(maxlen=config.memory)
    iterations = 0
    status = "max_iterations"

    def reached(info):
        return "fidelity" in info and info["fidelity"] >= config.target_fidelity

    while True:
        if reached(info):
            status = "target_fidelity"
            break
        if _projected_gradient_norm(x, g, lower, upper) < config.gradient_tol:
            status = "gradient_tol"
            break
        if iterations >= config.max_iterations:
            status = "max_iterations"
            break

        d = _two_loop(g, history)
        if g @ d >= 0:
            history.clear()
            d = -g
        alpha = 1.0 if history else min(1.0, 1.0 / max(np.linalg.norm(g), 1e-300))

        if bound is None:
            found = strong_wolfe(evaluate, x, d, f, g, alpha, config.c1, config.c2, config.max_line_search)
            if found is not None:
                a, f_new, g_new, info_new = found
                x_new = x + a * d
        else:
            found = _projected_backtracking(evaluate, x, d, f, g, alpha, lower, upper,
                                            config.c1, config.max_line_search)
            if found is not None:
                x_new, f_new, g_new, info_new = found
        if found is None or not f_new <= f:
            status = "line_search_failed"
            break

        s, y = x_new - x, g_new - g
        sy = s @ y
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            history.append((s, y, 1.0 / sy))
        x, f, g, info = x_new, f_new, g_new, info_new
        iterations += 1
        if callback is not None:
            callback(iterations, x, f, info)
        log.debug("iter %d f=%.6e fidelity=%s", iterations, f, info.get("fidelity"))

    # accepted iterates are monotone, so the current point is the best accepted one
    record = RunRecord(
        seed=seed,
        iterations=iterations,
        evaluations=evaluate.calls,
        fidelity=float(info.get("fidelity", float("nan"))),
        leakage=float(info.get("leakage", float("nan"))),
        objective=f,
        max_guard_population=float(info.get("max_guard_population", float("nan"))),
        wall_time=time.perf_counter() - wall0,
        cpu_time=time.process_time() - cpu0,
        converged=status == "target_fidelity",
        status=status,
    )
    return x, record


class ScaledObjective:
    """Presents a SynthesisProblem in coefficient units of 2*pi*MHz."""

    def __init__(self, problem, scale: float = PARAM_SCALE):
        self.problem = problem
        self.scale = scale

    def __call__(self, z):
        f, g, info = self.problem(np.asarray(z) * self.scale)
        return f, g * self.scale, info


def run_restart(problem, config: OptimizerConfig, seed: int):
    """One minimization from the random pulse drawn with ``seed``; returns (PulseParams, RunRecord)."""
    init = random_init(problem.carriers, problem.duration, problem.splines, seed)
    scaled = ScaledObjective(problem)
    cfg = config
    if config.bound is not None:
        cfg = OptimizerConfig(**{**asdict(config), "bound": config.bound / PARAM_SCALE})
    z, record = minimize(scaled, init.pack() / PARAM_SCALE, cfg, seed=seed)
    params = init.with_vector(z * PARAM_SCALE)
    params.seed = seed
    return params, record


def _restart_job(args):
    problem, config, seed = args
    return run_restart(problem, config, seed)


def multistart(problem, config: OptimizerConfig, workers: int = 1):
    """``config.restarts`` runs with seeds seed, seed+1, ...; returns (best PulseParams, records)."""
    seeds = [config.seed + r for r in range(config.restarts)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_restart_job, [(problem, config, s) for s in seeds]))
    else:
        results = [run_restart(problem, config, s) for s in seeds]
    records = [r for _, r in results]
    best = max(range(len(results)), key=lambda i: (records[i].fidelity, -i))
    return results[best][0], records
