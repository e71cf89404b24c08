"""Kernel ridge regression between principal and auxiliary amplitudes.

The outer loop alternates short full-space optimization bursts with
reduced-space optimization in which only the principal amplitudes are
varied and the auxiliary ones are regressed from them. Energies reported
anywhere in the loop are true expectation values at the composed full
parameter vector, so the variational bound survives the approximation.

fit/predict operate on the data exactly as given by default; the loop
passes standardize=True so that each column is shifted to zero mean and
unit variance before the kernel is evaluated (near-zero auxiliary columns
are numerically fragile otherwise). Columns with no variance are left
untouched. Predictions are mapped back through the inverse transform.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import ConvergenceError
from .fcidump import IntegralSet
from .simulator import UccsdProblem
from .vqe import (
    LbfgsMinimizer,
    SafEvent,
    VqeOptions,
    VqeResult,
    VqeTrace,
    IterationRecord,
    _drive,
    build_problem,
    saf_filter,
)

_DEGENERATE_STD = 1e-12


@dataclass(slots=True)
class MlOptions:
    """Outer-loop and regression settings."""

    n: int = 4
    fraction: float | None = 0.35
    epsilon: float | None = None
    kernel: str = "poly"
    gamma: float = 1.0
    c0: float = 0.0
    degree: int = 3
    lam: float = 1e-6
    max_cycles: int = 50

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if (self.fraction is None) == (self.epsilon is None):
            raise ValueError("exactly one of fraction or epsilon must be set")
        if self.fraction is not None and not 0 < self.fraction <= 1:
            raise ValueError("fraction must lie in (0, 1]")
        if self.kernel not in ("linear", "poly"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.lam <= 0:
            raise ValueError("lam must be positive")


@dataclass(slots=True)
class AmplitudeSplit:
    principal: tuple
    auxiliary: tuple
    epsilon: float | None
    fraction: float
    degenerate: bool  # auxiliary empty: regression has nothing to predict


def label_amplitudes(theta, fraction=None, epsilon=None) -> AmplitudeSplit:
    """Split parameter indices into principal and auxiliary sets.

    Cutoff mode keeps every |theta_k| >= epsilon as principal. Fraction
    mode keeps the ceil(f*N) largest magnitudes, ties broken toward the
    lower index.
    """
    theta = np.asarray(theta, dtype=np.float64)
    n = len(theta)
    if n == 0:
        raise ValueError("cannot label an empty parameter vector")
    if (fraction is None) == (epsilon is None):
        raise ValueError("exactly one of fraction or epsilon must be set")
    if epsilon is not None:
        principal = [k for k in range(n) if abs(theta[k]) >= epsilon]
    else:
        count = int(np.ceil(fraction * n))
        # stable sort on (-|theta|, index): equal magnitudes keep index order
        order = sorted(range(n), key=lambda k: (-abs(theta[k]), k))
        principal = sorted(order[:count])
    if not principal:
        raise ValueError("principal set is empty: regression target undefined")
    principal_set = set(principal)
    auxiliary = [k for k in range(n) if k not in principal_set]
    return AmplitudeSplit(
        principal=tuple(principal),
        auxiliary=tuple(auxiliary),
        epsilon=epsilon,
        fraction=len(principal) / n,
        degenerate=not auxiliary,
    )


@dataclass(slots=True)
class _ColumnTransform:
    mu: np.ndarray
    sigma: np.ndarray

    @classmethod
    def fit(cls, data):
        mu = data.mean(axis=0)
        sigma = data.std(axis=0)
        flat = sigma < _DEGENERATE_STD
        mu = np.where(flat, 0.0, mu)
        sigma = np.where(flat, 1.0, sigma)
        return cls(mu, sigma)

    def forward(self, data):
        return (data - self.mu) / self.sigma

    def inverse(self, data):
        return data * self.sigma + self.mu


@dataclass(slots=True)
class RegressionModel:
    kernel: str
    gamma: float
    c0: float
    degree: int
    lam: float
    x_train: np.ndarray  # rows as used in the kernel (post-transform)
    dual_coef: np.ndarray  # A = (K + lam I)^-1 Y
    x_transform: _ColumnTransform | None = None
    y_transform: _ColumnTransform | None = None

    def gram(self, x1, x2):
        base = x1 @ x2.T
        if self.kernel == "linear":
            return base
        return (self.gamma * base + self.c0) ** self.degree


def fit(x, y, kernel="linear", lam=1e-6, gamma=1.0, c0=0.0, degree=3,
        standardize=False) -> RegressionModel:
    """Kernel ridge fit: dual coefficients A = (K(X,X) + lam I)^-1 Y."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if len(x) != len(y):
        raise ValueError(f"X has {len(x)} rows, Y has {len(y)}")
    if lam <= 0:
        raise ValueError("lam must be positive")
    xt = yt = None
    if standardize:
        xt, yt = _ColumnTransform.fit(x), _ColumnTransform.fit(y)
        x, y = xt.forward(x), yt.forward(y)
    model = RegressionModel(kernel, gamma, c0, degree, lam, x, None, xt, yt)
    gram = model.gram(x, x) + lam * np.eye(len(x))
    try:
        model.dual_coef = cho_solve(cho_factor(gram), y)
    except LinAlgError as exc:
        cond = np.linalg.cond(gram)
        raise ConvergenceError(
            f"regression system is ill-conditioned (cond ~ {cond:.3e}): {exc}"
        ) from exc
    return model


def predict(model: RegressionModel, x_new):
    """Evaluate y = K(x_new, X) A; accepts a single row or a batch."""
    x_new = np.asarray(x_new, dtype=np.float64)
    single = x_new.ndim == 1
    x_new = np.atleast_2d(x_new)
    if x_new.shape[1] != model.x_train.shape[1]:
        raise ValueError(
            f"input has {x_new.shape[1]} features, model expects {model.x_train.shape[1]}"
        )
    if model.x_transform is not None:
        x_new = model.x_transform.forward(x_new)
    out = model.gram(x_new, model.x_train) @ model.dual_coef
    if model.y_transform is not None:
        out = model.y_transform.inverse(out)
    return out[0] if single else out


def model_to_dict(model: RegressionModel) -> dict:
    """JSON-ready dump of everything needed to reproduce predictions."""
    payload = {
        "kernel": model.kernel,
        "gamma": model.gamma,
        "c0": model.c0,
        "degree": model.degree,
        "lambda": model.lam,
        "x_train": model.x_train.tolist(),
        "dual_coef": model.dual_coef.tolist(),
    }
    if model.x_transform is not None:
        payload["x_transform"] = {
            "mu": model.x_transform.mu.tolist(),
            "sigma": model.x_transform.sigma.tolist(),
        }
    if model.y_transform is not None:
        payload["y_transform"] = {
            "mu": model.y_transform.mu.tolist(),
            "sigma": model.y_transform.sigma.tolist(),
        }
    return payload


def save_model(model: RegressionModel, path):
    with open(path, "w") as handle:
        json.dump(model_to_dict(model), handle, indent=2)
        handle.write("\n")


@dataclass(slots=True)
class MlVqeResult(VqeResult):
    n_full_iterations: int = 0
    n_reduced_iterations: int = 0
    n_cycles: int = 0
    split: AmplitudeSplit | None = None
    model: RegressionModel | None = None


def _compose(theta_principal, predicted, split, n_params):
    full = np.empty(n_params)
    full[list(split.principal)] = theta_principal
    if split.auxiliary:
        full[list(split.auxiliary)] = predicted
    return full


def run_ml_assisted_vqe(
    integrals: IntegralSet, base_options: VqeOptions | None = None,
    ml_options: MlOptions | None = None,
) -> MlVqeResult:
    """Regression-assisted UCCSD-VQE.

    The base options decide the parameterization (plain or spin-adapted)
    and whether a filtration pass runs first; the loop then alternates
    n-iteration full-space bursts with reduced-space minimization where
    auxiliary amplitudes come from the fitted model. Stops when a
    full-space burst converges within its n iterations; a burst that
    converges immediately after model feedback is the signal that the
    regression agrees with the optimizer. The reduced minimization never
    terminates the loop on its own: it can stall on a plateau of the
    model manifold while the full gradient is still large.
    """
    base_options = VqeOptions() if base_options is None else base_options
    ml_options = MlOptions() if ml_options is None else ml_options
    t_start = time.perf_counter()

    problem = build_problem(integrals, base_options.use_spin_adaptation)
    n_initial = problem.n_parameters
    trace = VqeTrace()
    dropped: tuple = ()
    theta = np.zeros(n_initial)
    n_full = 0

    def objective_full(prob):
        return lambda th: prob.energy_and_gradient(
            th, mode=base_options.gradient, fd_step=base_options.fd_step
        )

    if base_options.use_saf:
        pre = LbfgsMinimizer(objective_full(problem), theta, base_options.energy_tol, trace=trace)
        done = _drive(pre, base_options.kappa)
        n_full += done
        theta = pre.x
        if done >= base_options.kappa:
            kept, dropped_list = saf_filter(
                trace, base_options.eps1, base_options.eps2, base_options.kappa
            )
            dropped = tuple(dropped_list)
            if dropped:
                trace.events.append(SafEvent(base_options.kappa, dropped))
                reduced_map, exc_kept = problem.pmap.restrict(kept)
                problem = UccsdProblem(
                    integrals, [problem.excitations[k] for k in exc_kept], reduced_map
                )
                theta = theta[kept]
        elif pre.converged:
            trace.status = "converged"
            return _package(
                problem, theta, trace, n_initial, dropped, n_full, 0, 0, None, None, t_start
            )

    n_params = problem.n_parameters
    n_reduced = 0
    cycles = 0
    split = None
    model = None
    full_objective = objective_full(problem)

    while cycles < ml_options.max_cycles:
        cycles += 1
        # step 1: a burst of n full-space iterations from the current vector.
        # Converging inside the burst is the sole exit: on the first cycle it
        # means plain VQE finished before the model mattered, on later cycles
        # it means the composed feedback vector was already (within one
        # iteration) a minimum of the true landscape.
        burst = LbfgsMinimizer(full_objective, theta, base_options.energy_tol, trace=trace)
        done = _drive(burst, ml_options.n)
        n_full += done
        theta = burst.x
        if burst.converged:
            trace.status = "converged"
            break

        # step 2: label at the burst's last iterate, fit on its n rows
        split = label_amplitudes(
            theta, fraction=ml_options.fraction, epsilon=ml_options.epsilon
        )
        if split.degenerate:
            warnings.warn("auxiliary set is empty; continuing as plain VQE")
            tail = LbfgsMinimizer(full_objective, theta, base_options.energy_tol, trace=trace)
            n_full += _drive(tail, base_options.max_iterations)
            theta = tail.x
            trace.status = "converged" if tail.converged else "iteration budget exhausted"
            break
        rows = trace.iterations[-done:]
        data = np.array([rec.theta for rec in rows])
        model = fit(
            data[:, split.principal],
            data[:, split.auxiliary],
            kernel=ml_options.kernel,
            lam=ml_options.lam,
            gamma=ml_options.gamma,
            c0=ml_options.c0,
            degree=ml_options.degree,
            standardize=True,
        )

        # step 3: optimize the principal block, auxiliary from the model
        def reduced_objective(th_p, _split=split, _model=model):
            full = _compose(th_p, predict(_model, th_p), _split, n_params)
            e = problem.energy(full)
            grad = np.empty(len(th_p))
            for k in range(len(th_p)):
                probe = th_p.copy()
                probe[k] += base_options.fd_step
                full_hi = _compose(probe, predict(_model, probe), _split, n_params)
                probe[k] -= 2 * base_options.fd_step
                full_lo = _compose(probe, predict(_model, probe), _split, n_params)
                grad[k] = (problem.energy(full_hi) - problem.energy(full_lo)) / (
                    2 * base_options.fd_step
                )
            return e, grad

        reduced = LbfgsMinimizer(
            reduced_objective, theta[list(split.principal)], base_options.energy_tol
        )
        done_reduced = _drive(reduced, base_options.max_iterations)
        n_reduced += done_reduced
        # step 4: feed the composed vector back to the next burst
        theta = _compose(reduced.x, predict(model, reduced.x), split, n_params)
        for rec in reduced.trace.iterations:
            composed = _compose(rec.theta, predict(model, rec.theta), split, n_params)
            trace.iterations.append(IterationRecord(composed, rec.energy, rec.wall_time))
    else:
        trace.status = "ml cycle budget exhausted"

    return _package(
        problem, theta, trace, n_initial, dropped, n_full, n_reduced, cycles, split,
        model, t_start,
    )


def _package(problem, theta, trace, n_initial, dropped, n_full, n_reduced, cycles,
             split, model, t_start):
    return MlVqeResult(
        energy=problem.energy(theta),
        theta_final=np.asarray(theta, dtype=np.float64).copy(),
        n_params_initial=n_initial,
        n_params_final=problem.n_parameters,
        n_iterations=n_full + n_reduced,
        wall_time=time.perf_counter() - t_start,
        dropped_indices=dropped,
        s_squared_final=problem.s_squared(theta),
        trace=trace,
        n_full_iterations=n_full,
        n_reduced_iterations=n_reduced,
        n_cycles=cycles,
        split=split,
        model=model,
    )
