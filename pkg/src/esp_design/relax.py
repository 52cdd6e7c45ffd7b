"""
Projected gradient descent for the relaxed design problem.

The feasible set is the slice of the unit cube ``{0 <= z <= 1, sum(z) = k}``;
an optimum always spends the whole budget, so the inequality ``sum(z) <= k``
can be replaced by equality.  Projection onto that slice is a continuous
quadratic knapsack problem, solved here by bisection on the multiplier of the
equality constraint followed by an exact pass over the piecewise-linear dual.
"""
from dataclasses import dataclass, field
import logging

import numpy as np
from scipy.linalg import qr

from .errors import InfeasibleProblemError, InputError
from .objective import check_design, check_order, relaxed_value, relaxed_value_grad

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 2000
    step_init: float = 1.0
    tol_obj: float = 1e-9
    tol_grad: float = 1e-7
    seed: int = 0
    armijo_slope: float = 1e-4
    backtrack: float = 0.5

    def __post_init__(self):
        if self.max_iters < 1:
            raise InputError("max_iters must be >= 1")
        if not (self.step_init > 0 and self.tol_obj > 0 and self.tol_grad > 0):
            raise InputError("step_init and tolerances must be positive")
        if not 0 < self.backtrack < 1:
            raise InputError("backtrack factor must lie in (0, 1)")


@dataclass
class SolverReport:
    final_weights: np.ndarray
    objective_trace: list = field(default_factory=list)
    iterations: int = 0
    support_size: int = 0
    converged: bool = False

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


def _clamped_sum(y, mu):
    return np.clip(y - mu, 0.0, 1.0).sum()


def project_knapsack(y, k) -> np.ndarray:
    """Euclidean projection of ``y`` onto ``{z : 0 <= z <= 1, sum(z) = k}``.

    The projection is ``clip(y - mu, 0, 1)`` for the multiplier ``mu`` solving
    ``sum(clip(y - mu, 0, 1)) = k``.

    Parameters
    ----------
    y : array_like (n,)
    k : float
        Budget, ``0 < k <= n``.

    Returns
    -------
    z : np.ndarray (n,)
    """
    y = np.asarray(y, dtype=float).ravel()
    n = y.size
    if not np.all(np.isfinite(y)):
        raise InputError("cannot project a vector with non-finite entries")
    if not 0 < k <= n:
        raise InputError(f"budget k={k} must satisfy 0 < k <= n={n}")
    k = float(k)

    lo, hi = y.min() - 1.0, y.max()
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _clamped_sum(y, mid) > k:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, abs(mid)):
            break
    mu = 0.5 * (lo + hi)

    # exact pass: with the active sets fixed the sum is affine in mu
    d = y - mu
    upper = d >= 1.0
    free = (d > 0.0) & ~upper
    nf = free.sum()
    if nf:
        mu_exact = (y[free].sum() + upper.sum() - k) / nf
        d2 = y - mu_exact
        if np.all((d2[free] >= -1e-12) & (d2[free] <= 1 + 1e-12)) and \
                np.all(d2[upper] >= 1 - 1e-12) and np.all(d2[~upper & ~free] <= 1e-12):
            mu = mu_exact
    return np.clip(y - mu, 0.0, 1.0)


def support(z, eps=1e-6) -> int:
    """Number of weights strictly above ``eps``."""
    if eps < 0:
        raise InputError("eps must be non-negative")
    return int(np.count_nonzero(np.asarray(z) > eps))


def _initial_weights(X, k, order):
    n, m = X.shape
    z = project_knapsack(np.full(n, k / n), k)
    if np.isfinite(relaxed_value(X, z, order)):
        return z
    # seed mass on m well-conditioned rows picked by pivoted QR of X^T
    _, _, piv = qr(X.T, pivoting=True, mode="economic")
    y = np.full(n, (k - m) / max(n - m, 1))
    y[piv[:m]] = 1.0
    z = project_knapsack(y, k)
    if np.isfinite(relaxed_value(X, z, order)):
        return z
    raise InfeasibleProblemError("no positive definite starting design found")


def solve_relaxation(X, k, order, cfg=None) -> SolverReport:
    """Minimise the relaxed objective over ``{0 <= z <= 1, sum(z) = k}``.

    Projected gradient descent with an Armijo backtracking line search.  Each
    iteration starts its search from twice the previously accepted step, so
    the step adapts upward as well as down.  Stops when the objective changes
    by less than ``cfg.tol_obj``, when the projected-gradient norm drops under
    ``cfg.tol_grad``, or after ``cfg.max_iters`` iterations.
    """
    cfg = cfg or SolverConfig()
    X = check_design(X)
    n, m = X.shape
    order = check_order(order, m)
    if int(k) != k or not m <= k <= n:
        raise InputError(f"budget k={k} must be an integer with m={m} <= k <= n={n}")
    k = int(k)

    z = _initial_weights(X, k, order)
    f, g = relaxed_value_grad(X, z, order)
    trace = [f]
    step = cfg.step_init
    converged = False
    it = 0
    while it < cfg.max_iters:
        pg = z - project_knapsack(z - g, k)
        if np.linalg.norm(pg) < cfg.tol_grad:
            converged = True
            break
        it += 1
        step *= 2.0
        while True:
            zn = project_knapsack(z - step * g, k)
            fn = relaxed_value(X, zn, order)
            if fn <= f + cfg.armijo_slope * g @ (zn - z):
                break
            step *= cfg.backtrack
            if step < 1e-16:
                zn = None
                break
        if zn is None:
            logger.debug("line search stalled at iteration %d", it)
            converged = True
            break
        fn, gn = relaxed_value_grad(X, zn, order)
        delta = f - fn
        z, f, g = zn, fn, gn
        trace.append(f)
        if abs(delta) < cfg.tol_obj:
            converged = True
            break
    return SolverReport(
        final_weights=z,
        objective_trace=trace,
        iterations=it,
        support_size=support(z),
        converged=converged,
    )
