"""Solver loops: fixed-step GD, Polyak GD, and the three curvature methods.

Per-iteration records land in a Trace; rate bounds and the per-step
descent/contraction inequalities can be replayed against a recorded run
with `verify_rate_bounds`.
"""

from __future__ import annotations

import dataclasses
import time
from typing import List, Optional

import numpy as np

from .errors import LcdError, NoExcess
from .projection import ProjectionInput, lcd2_project, lcd3_project, polyak_point

METHODS = ("gd", "polyak", "lcd1", "lcd2", "lcd3")
DIVERGENCE_FACTOR = 1e6


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    method: str
    gamma: Optional[float] = None  # fixed stepsize, gd only
    max_iters: int = 1000
    f_tol: Optional[float] = None
    g_tol: Optional[float] = None
    record_iterates: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "gd" and (self.gamma is None or self.gamma <= 0):
            raise ValueError("gd needs a positive gamma")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")


@dataclasses.dataclass(frozen=True)
class TraceRecord:
    k: int
    f_gap: float
    grad_norm: float
    step_norm: float
    newton_iters: int
    elapsed_s: float


@dataclasses.dataclass
class Trace:
    method: str
    records: List[TraceRecord] = dataclasses.field(default_factory=list)
    status: str = "max_iters"  # converged | max_iters | diverged
    f_star: Optional[float] = None
    iterates: Optional[List[np.ndarray]] = None
    error: Optional[str] = None

    @property
    def f_gaps(self):
        return np.array([r.f_gap for r in self.records])

    @property
    def final_f_gap(self):
        return self.records[-1].f_gap if self.records else np.nan


def polyak_step(obj, x):
    """Single Polyak-stepsize move; needs a known optimal value."""
    if obj.f_star is None:
        raise ValueError("polyak step needs f_star")
    gap = obj.f(x) - obj.f_star
    return polyak_point(x, obj.grad(x), max(gap, 0.0))


def lcd1_step(obj, x):
    """Minimize the curvature upper bound: x - [C(x) + L I]^{-1} grad."""
    if obj.model.excess is None:
        raise NoExcess(f"model of {obj.name!r} has no smoothness excess")
    g = obj.grad(x)
    return x - obj.model(x).shifted_solve(obj.model.excess, g)


def find_excess_by_doubling(obj, x0=None, start=1e-3, probe_iters=20,
                            max_doublings=60):
    """Heuristic excess for models that only certify the lower bound.

    Doubles a trial constant until the upper-bound step descends
    monotonically over a probe window from x0. The result makes the
    method run; it does not certify the upper inequality globally.
    """
    x0 = np.zeros(obj.dim) if x0 is None else np.asarray(x0, dtype=float)
    trial = float(start)
    for _ in range(max_doublings):
        x = x0.copy()
        f_prev = obj.f(x)
        stable = True
        for _ in range(probe_iters):
            x = x - obj.model(x).shifted_solve(trial, obj.grad(x))
            f_new = obj.f(x)
            if not np.isfinite(f_new) or f_new > f_prev + 1e-12 * (1 + abs(f_prev)):
                stable = False
                break
            f_prev = f_new
        if stable:
            return trial
        trial *= 2.0
    raise ValueError("no stable excess found within the doubling budget")


def _take_step(obj, cfg, x, f_x, g, gap):
    """Returns (next point, inner newton iterations)."""
    method = cfg.method
    if method == "gd":
        return x - cfg.gamma * g, 0
    if method == "polyak":
        return polyak_point(x, g, max(gap, 0.0)), 0
    if method == "lcd1":
        if obj.model.excess is None:
            raise NoExcess(f"model of {obj.name!r} has no smoothness excess")
        return x - obj.model(x).shifted_solve(obj.model.excess, g), 0
    inp = ProjectionInput(x=x, g=g, C=obj.model(x), gap=max(gap, 0.0))
    if method == "lcd2":
        return lcd2_project(inp)
    return lcd3_project(inp)


def run(obj, cfg, x0=None):
    """Iterate the configured method from x0 (default: the origin).

    Records one row per completed iteration. Stops on the f-gap or
    gradient-norm tolerance, on the iteration cap, once the f-gap exceeds
    1e6 times the initial gap (divergence guard), or when a step raises;
    step errors are recorded on the trace and mark the run diverged.
    """
    if cfg.method in ("polyak", "lcd2", "lcd3") and obj.f_star is None:
        raise ValueError(f"{cfg.method} needs obj.f_star")
    x = np.zeros(obj.dim) if x0 is None else np.asarray(x0, dtype=float).copy()
    f_star = obj.f_star
    trace = Trace(method=cfg.method, f_star=f_star,
                  iterates=[x.copy()] if cfg.record_iterates else None)
    f_x = obj.f(x)
    g = obj.grad(x)
    gn = float(np.linalg.norm(g))
    gap = f_x - f_star if f_star is not None else np.nan
    init_gap = gap
    t0 = time.perf_counter()
    k = 0
    while True:
        if cfg.f_tol is not None and np.isfinite(gap) and gap <= cfg.f_tol:
            trace.status = "converged"
            break
        if cfg.g_tol is not None and gn <= cfg.g_tol:
            trace.status = "converged"
            break
        if k >= cfg.max_iters:
            trace.status = "max_iters"
            break
        try:
            x_new, n_newton = _take_step(obj, cfg, x, f_x, g, gap)
        except LcdError as exc:
            trace.status = "diverged"
            trace.error = f"{type(exc).__name__}: {exc}"
            break
        k += 1
        step_norm = float(np.linalg.norm(x_new - x))
        x = x_new
        f_x = obj.f(x)
        g = obj.grad(x)
        gn = float(np.linalg.norm(g))
        gap = f_x - f_star if f_star is not None else np.nan
        trace.records.append(TraceRecord(
            k=k, f_gap=float(gap), grad_norm=gn, step_norm=step_norm,
            newton_iters=n_newton, elapsed_s=time.perf_counter() - t0,
        ))
        if cfg.record_iterates:
            trace.iterates.append(x.copy())
        bad = not (np.isfinite(f_x) and np.all(np.isfinite(x)))
        if np.isfinite(gap) and np.isfinite(init_gap) and init_gap > 0:
            bad = bad or gap > DIVERGENCE_FACTOR * init_gap
        if bad:
            trace.status = "diverged"
            break
    return trace


# ---------------------------------------------------------------------------
# Runtime verification of the convergence guarantees
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class RateViolation:
    k: int
    kind: str
    amount: float


@dataclasses.dataclass
class RateReport:
    checked: int = 0
    violations: List[RateViolation] = dataclasses.field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    @property
    def worst(self):
        return max((v.amount for v in self.violations), default=0.0)


def verify_rate_bounds(trace, obj, x_star, tol=1e-9):
    """Replay a recorded run against its guarantees.

    For the upper-bound method: the 1/k rate on the gap, monotone descent,
    and the distance recursion
    ||x_{k+1}-x*||^2 - ||x_k-x*||^2 <= -(2/L)(f(x_{k+1}) - f*).
    For projection methods (and the Polyak special case): the 1/k rate on
    the running-minimum gap and the contraction
    ||x_{k+1}-x*||^2 <= ||x_k-x*||^2 - ||x_{k+1}-x_k||^2.
    """
    if trace.iterates is None:
        raise ValueError("trace was recorded without iterate history")
    if obj.model.excess is None:
        raise NoExcess("rate bounds need the model excess")
    x_star = np.asarray(x_star, dtype=float)
    f_star = obj.f_star if obj.f_star is not None else obj.f(x_star)
    L = obj.model.excess
    xs = trace.iterates
    fs = [obj.f(x) for x in xs]
    r0 = float(np.linalg.norm(xs[0] - x_star)) ** 2
    report = RateReport()
    upper_bound_method = trace.method in ("gd", "lcd1")

    running_min = np.inf
    for k in range(1, len(xs)):
        gap_k = fs[k] - f_star
        running_min = min(running_min, gap_k)
        bound = L * r0 / (2.0 * k)
        report.checked += 1
        tracked = gap_k if upper_bound_method else running_min
        if tracked > bound + tol * (1.0 + abs(bound)):
            report.violations.append(RateViolation(k, "rate", tracked - bound))

    for k in range(len(xs) - 1):
        d_now = float(np.linalg.norm(xs[k] - x_star)) ** 2
        d_next = float(np.linalg.norm(xs[k + 1] - x_star)) ** 2
        report.checked += 1
        if upper_bound_method:
            if fs[k + 1] > fs[k] + tol:
                report.violations.append(
                    RateViolation(k + 1, "descent", fs[k + 1] - fs[k]))
            if L > 0:
                lhs = d_next - d_now
                rhs = -(2.0 / L) * (fs[k + 1] - f_star)
                if lhs > rhs + tol:
                    report.violations.append(
                        RateViolation(k + 1, "distance", lhs - rhs))
            elif fs[k + 1] - f_star > tol * (1.0 + abs(f_star)):
                report.violations.append(
                    RateViolation(k + 1, "one-step", fs[k + 1] - f_star))
        else:
            step2 = float(np.linalg.norm(xs[k + 1] - xs[k])) ** 2
            if d_next > d_now - step2 + tol:
                report.violations.append(
                    RateViolation(k + 1, "contraction",
                                  d_next - (d_now - step2)))
    return report
