"""Quasi-Newton UCCSD-VQE driver with small-amplitude filtration.

The minimizer is a limited-memory BFGS (history 10) with a strong-Wolfe
line search. One "iteration" means one accepted parameter update, and
convergence is declared when the energy change between accepted iterates
drops below energy_tol, with an infinity-norm gradient stop of 1e-8 as a
safeguard. The optimizer object is a plain resumable state machine, so
pausing after kappa iterations for the filtration step and continuing is
bit-for-bit identical to never pausing; a rebuild happens only when the
filter actually drops parameters.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError
from .fcidump import IntegralSet
from .fermion import ParameterMap, enumerate_excitations, spin_adapt
from .simulator import UccsdProblem

_WOLFE_C1 = 1e-4
_WOLFE_C2 = 0.9
_GRAD_TOL = 1e-8
_MEMORY = 10


@dataclass(slots=True)
class VqeOptions:
    """Knobs shared by every run mode."""

    use_spin_adaptation: bool = False
    use_saf: bool = False
    kappa: int = 2
    eps1: float = 1e-4
    eps2: float = 1e-5
    energy_tol: float = 1e-6
    max_iterations: int = 500
    fd_step: float = 1e-6
    gradient: str = "adjoint"  # "adjoint" (exact) or "fd" (central differences)

    def __post_init__(self):
        if self.kappa < 2:
            raise ValueError("kappa must be at least 2 (the filter needs two iterates)")
        if self.eps1 < 0 or self.eps2 < 0:
            # 0 is allowed: the strict < in the filter makes it drop nothing.
            raise ValueError("eps1 and eps2 must be non-negative")
        if self.energy_tol <= 0 or self.fd_step <= 0:
            raise ValueError("energy_tol and fd_step must be positive")
        if self.gradient not in ("adjoint", "fd"):
            raise ValueError(f"unknown gradient mode {self.gradient!r}")


@dataclass(slots=True)
class IterationRecord:
    theta: np.ndarray
    energy: float
    wall_time: float


@dataclass(slots=True)
class SafEvent:
    iteration: int
    dropped: tuple


@dataclass(slots=True)
class VqeTrace:
    iterations: list[IterationRecord] = field(default_factory=list)
    events: list[SafEvent] = field(default_factory=list)
    status: str = "running"

    def energies(self):
        return np.array([rec.energy for rec in self.iterations])

    def theta_at(self, iteration: int) -> np.ndarray:
        """Parameter snapshot after the given 1-based iteration."""
        return self.iterations[iteration - 1].theta

    @property
    def n_iterations(self) -> int:
        return len(self.iterations)


@dataclass(slots=True)
class VqeResult:
    energy: float
    theta_final: np.ndarray
    n_params_initial: int
    n_params_final: int
    n_iterations: int
    wall_time: float
    dropped_indices: tuple
    s_squared_final: float
    trace: VqeTrace


class LbfgsMinimizer:
    """Resumable L-BFGS with strong-Wolfe line search.

    step() performs exactly one accepted update and records it in the
    trace; repeated calls continue deterministically from stored state.
    """

    def __init__(self, objective, theta0, energy_tol, trace=None):
        self.objective = objective
        self.energy_tol = energy_tol
        self.trace = VqeTrace() if trace is None else trace
        self.x = np.array(theta0, dtype=np.float64)
        self.f, self.g = self._eval(self.x)
        self.s_hist: list[np.ndarray] = []
        self.y_hist: list[np.ndarray] = []
        self.converged = len(self.x) == 0 or float(np.max(np.abs(self.g))) < _GRAD_TOL
        self.n_evals = 1

    def _eval(self, x):
        f, g = self.objective(x)
        if not (np.isfinite(f) and np.all(np.isfinite(g))):
            self.trace.status = "aborted: non-finite objective"
            err = ConvergenceError(
                f"objective returned a non-finite value at theta={x!r} "
                f"after {self.trace.n_iterations} iterations"
            )
            err.trace = self.trace
            raise err
        return float(f), np.asarray(g, dtype=np.float64)

    def _direction(self):
        # two-loop recursion over the stored (s, y) pairs
        q = self.g.copy()
        alphas = []
        for s, y in zip(reversed(self.s_hist), reversed(self.y_hist)):
            a = np.dot(s, q) / np.dot(y, s)
            alphas.append(a)
            q -= a * y
        if self.y_hist:
            y, s = self.y_hist[-1], self.s_hist[-1]
            q *= np.dot(s, y) / np.dot(y, y)
        for (s, y), a in zip(zip(self.s_hist, self.y_hist), reversed(alphas)):
            b = np.dot(y, q) / np.dot(y, s)
            q += (a - b) * s
        d = -q
        if np.dot(d, self.g) >= 0:
            d = -self.g
        return d

    def _line_search(self, d):
        """Strong-Wolfe search along d; returns (alpha, f, g) accepted."""
        f0, g0 = self.f, float(np.dot(self.g, d))
        alpha_prev, f_prev = 0.0, f0
        alpha = 1.0
        f_a, g_vec = f0, self.g
        for it in range(30):
            f_a, g_vec = self._eval(self.x + alpha * d)
            self.n_evals += 1
            if f_a > f0 + _WOLFE_C1 * alpha * g0 or (it > 0 and f_a >= f_prev):
                return self._zoom(d, alpha_prev, alpha, f_prev, f_a, f0, g0)
            ga = float(np.dot(g_vec, d))
            if abs(ga) <= -_WOLFE_C2 * g0:
                return alpha, f_a, g_vec
            if ga >= 0:
                return self._zoom(d, alpha, alpha_prev, f_a, f_prev, f0, g0)
            alpha_prev, f_prev = alpha, f_a
            alpha *= 2.0
        return alpha, f_a, g_vec  # expansion never bracketed; accept best effort

    def _zoom(self, d, lo, hi, f_lo, f_hi, f0, g0):
        f_a, g_vec, alpha = f_lo, self.g, lo
        for _ in range(50):
            alpha = 0.5 * (lo + hi)
            f_a, g_vec = self._eval(self.x + alpha * d)
            self.n_evals += 1
            if f_a > f0 + _WOLFE_C1 * alpha * g0 or f_a >= f_lo:
                hi, f_hi = alpha, f_a
            else:
                ga = float(np.dot(g_vec, d))
                if abs(ga) <= -_WOLFE_C2 * g0:
                    return alpha, f_a, g_vec
                if ga * (hi - lo) >= 0:
                    hi, f_hi = lo, f_lo
                lo, f_lo = alpha, f_a
            if abs(hi - lo) < 1e-16:
                break
        return alpha, f_a, g_vec

    def step(self) -> bool:
        """One accepted update; returns False once converged."""
        if self.converged:
            return False
        start = time.perf_counter()
        d = self._direction()
        alpha, f_new, g_new = self._line_search(d)
        s = alpha * d
        y = g_new - self.g
        if np.dot(s, y) > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            self.s_hist.append(s)
            self.y_hist.append(y)
            if len(self.s_hist) > _MEMORY:
                self.s_hist.pop(0)
                self.y_hist.pop(0)
        delta = abs(f_new - self.f)
        self.x = self.x + s
        self.f, self.g = f_new, g_new
        self.trace.iterations.append(
            IterationRecord(self.x.copy(), self.f, time.perf_counter() - start)
        )
        if delta < self.energy_tol or float(np.max(np.abs(self.g))) < _GRAD_TOL:
            self.converged = True
            self.trace.status = "converged"
        return True


def minimize(objective, theta0, options: VqeOptions) -> VqeTrace:
    """Run L-BFGS to convergence; the trace records every iteration."""
    opt = LbfgsMinimizer(objective, theta0, options.energy_tol)
    _drive(opt, options.max_iterations)
    _finalize_status(opt)
    return opt.trace


def _drive(opt: LbfgsMinimizer, budget: int) -> int:
    """Advance the optimizer by at most budget accepted iterations."""
    done = 0
    while done < budget and opt.step():
        done += 1
    return done


def _finalize_status(opt: LbfgsMinimizer):
    if opt.trace.status == "running":
        opt.trace.status = "converged" if opt.converged else "iteration budget exhausted"


def saf_filter(trace: VqeTrace, eps1: float, eps2: float, kappa: int | None = None):
    """Split parameters into (kept, dropped) at iteration kappa.

    Dropped are those with |theta_k| < eps1 at iteration kappa whose
    change from iteration kappa-1 is also below eps2. kappa defaults to
    the trace length (filter on the latest iterate).
    """
    if kappa is None:
        kappa = trace.n_iterations
    if trace.n_iterations < kappa or kappa < 1:
        raise ValueError(f"trace has {trace.n_iterations} iterations, filter needs {kappa}")
    now = trace.theta_at(kappa)
    prev = trace.theta_at(kappa - 1) if kappa >= 2 else np.zeros_like(now)
    small = np.abs(now) < eps1
    settled = np.abs(now - prev) < eps2
    dropped = [int(k) for k in np.nonzero(small & settled)[0]]
    kept = [int(k) for k in range(len(now)) if k not in set(dropped)]
    return kept, dropped


def build_problem(integrals: IntegralSet, use_spin_adaptation: bool) -> UccsdProblem:
    excitations = enumerate_excitations(integrals.n_occ, integrals.n_virt)
    if use_spin_adaptation:
        pmap = spin_adapt(excitations, integrals.n_spatial)
    else:
        pmap = ParameterMap.identity(len(excitations))
    return UccsdProblem(integrals, excitations, pmap)


def run_uccsd_vqe(
    integrals: IntegralSet, options: VqeOptions | None = None, problem: UccsdProblem | None = None
) -> VqeResult:
    """Full pipeline: build, optionally filter at kappa, optimize to tol.

    With use_saf the first kappa iterations run on the full parameter set;
    parameters passing both smallness tests are then removed together with
    any excitation whose amplitude no longer references a surviving
    parameter, and the optimizer restarts warm from the surviving values.
    A filter that drops nothing continues the original optimizer state
    unchanged.
    """
    options = VqeOptions() if options is None else options
    t_start = time.perf_counter()
    if problem is None:
        problem = build_problem(integrals, options.use_spin_adaptation)

    def objective_for(prob):
        return lambda th: prob.energy_and_gradient(
            th, mode=options.gradient, fd_step=options.fd_step
        )

    n_initial = problem.n_parameters
    theta0 = np.zeros(n_initial)
    opt = LbfgsMinimizer(objective_for(problem), theta0, options.energy_tol)
    trace = opt.trace
    dropped: tuple = ()
    final_problem = problem

    if options.use_saf and not opt.converged:
        done = _drive(opt, min(options.kappa, options.max_iterations))
        if done >= options.kappa:
            kept, dropped_list = saf_filter(trace, options.eps1, options.eps2, options.kappa)
            dropped = tuple(dropped_list)
            if dropped:
                trace.events.append(SafEvent(options.kappa, dropped))
                reduced_map, exc_kept = problem.pmap.restrict(kept)
                reduced_exc = [problem.excitations[k] for k in exc_kept]
                final_problem = UccsdProblem(integrals, reduced_exc, reduced_map)
                warm = opt.x[kept]
                opt = LbfgsMinimizer(
                    objective_for(final_problem), warm, options.energy_tol, trace=trace
                )
        budget = options.max_iterations - trace.n_iterations
        _drive(opt, max(budget, 0))
    else:
        _drive(opt, options.max_iterations)
    _finalize_status(opt)

    wall = time.perf_counter() - t_start
    return VqeResult(
        energy=opt.f,
        theta_final=opt.x.copy(),
        n_params_initial=n_initial,
        n_params_final=final_problem.n_parameters,
        n_iterations=trace.n_iterations,
        wall_time=wall,
        dropped_indices=dropped,
        s_squared_final=final_problem.s_squared(opt.x),
        trace=trace,
    )
