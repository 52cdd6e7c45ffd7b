"""
Turning relaxed weights or large candidate sets into designs of size ``k``.

* :func:`sample_rounding` -- Bernoulli rounding of relaxed weights.
* :func:`greedy_removal` -- drop, one at a time, the row whose removal hurts
  the objective least.
* :func:`greedy_from_relaxation` -- greedy removal started from the support
  of the relaxed optimum.
* :func:`fedorov_exchange` -- best-improvement swap local search.
* :func:`uniform_baseline` -- a uniformly random feasible subset.

Candidate moves are scored in batches: all downdated (or swapped) Gram
matrices of a round are stacked and their spectra computed in one call.
Ties go to the smallest index everywhere.
"""
from dataclasses import dataclass
from enum import Enum
import logging

import numpy as np

from .errors import (
    CannotRoundError,
    InfeasibleDesignError,
    InfeasibleProblemError,
    InputError,
    StuckInfeasibleError,
)
from .esp import is_pd_spectrum
from .objective import (
    check_design,
    check_order,
    check_subset,
    check_weights,
    gram,
    objective_from_spectra,
    weighted_gram,
)
from .relax import SolverConfig, solve_relaxation

logger = logging.getLogger(__name__)

FEDOROV_MIN_GAIN = 1e-12


class MethodTag(str, Enum):
    UNIF = "unif"
    UNIF_FDV = "unif-fdv"
    GREEDY = "greedy"
    GREEDY_FDV = "greedy-fdv"
    SAMPLE = "sample"
    RELAX = "relax"


@dataclass(frozen=True)
class RoundingOutcome:
    subset: np.ndarray
    draws: int


def _check_budget(k, m, n):
    if isinstance(k, bool) or int(k) != k or not m <= k <= n:
        raise InputError(f"budget k={k} must be an integer with m={m} <= k <= n={n}")
    return int(k)


def sample_rounding(z, k, seed=0) -> RoundingOutcome:
    """Round relaxed weights to a set of exactly ``k`` indices.

    Repeatedly pick an index uniformly among those not yet selected and keep
    it with probability ``z_i``, until ``k`` indices are kept.
    """
    z = np.asarray(z, dtype=float).ravel()
    z = check_weights(z, z.size)
    n = z.size
    if isinstance(k, bool) or int(k) != k or not 0 < k <= n:
        raise InputError(f"budget k={k} must be an integer in (0, {n}]")
    k = int(k)
    if np.count_nonzero(z > 0) < k:
        raise CannotRoundError(f"only {np.count_nonzero(z > 0)} positive weights for k={k}")

    rng = np.random.default_rng(seed)
    remaining = list(range(n))
    chosen = []
    draws = 0
    while len(chosen) < k:
        draws += 1
        pos = int(rng.integers(len(remaining)))
        i = remaining[pos]
        if rng.random() < z[i]:
            chosen.append(i)
            remaining[pos] = remaining[-1]
            remaining.pop()
    return RoundingOutcome(np.array(sorted(chosen), dtype=int), draws)


def rounding_diagnostic(X, z) -> float:
    """``||S^-1||_2 * cond(S) * max_i ||x_i||^2 * log m`` for ``S = X^T diag(z) X``.

    Small values suggest that Bernoulli rounding of ``z`` should lose at most a
    constant factor.  Purely advisory.
    """
    X = check_design(X)
    n, m = X.shape
    z = check_weights(z, n)
    lam = np.linalg.eigvalsh(weighted_gram(X, z))
    if not is_pd_spectrum(lam):
        raise InfeasibleDesignError("information matrix is not positive definite")
    row_norm2 = np.max(np.einsum("ij,ij->i", X, X))
    return float((1.0 / lam[0]) * (lam[-1] / lam[0]) * row_norm2 * np.log(m))


def _removal_scores(X, S, order):
    XS = X[S]
    G = gram(X, S)
    cand = G[None, :, :] - XS[:, :, None] * XS[:, None, :]
    return objective_from_spectra(np.linalg.eigvalsh(cand), order)


def greedy_removal(X, k, order, S0) -> np.ndarray:
    """Shrink ``S0`` to ``k`` rows by repeated best single removal.

    Raises
    ------
    StuckInfeasibleError
        When every removal from the current set leaves a singular Gram matrix.
        The current set is attached as ``partial``.
    """
    X = check_design(X)
    n, m = X.shape
    order = check_order(order, m)
    S = check_subset(S0, n)
    k = _check_budget(k, m, n)
    if S.size < k:
        raise InputError(f"initial set has {S.size} < k={k} elements")
    if not is_pd_spectrum(np.linalg.eigvalsh(gram(X, S))):
        raise InfeasibleDesignError("initial set is not feasible")
    while S.size > k:
        scores = _removal_scores(X, S, order)
        if not np.isfinite(scores).any():
            raise StuckInfeasibleError(f"no feasible removal from a set of size {S.size}", S.copy())
        S = np.delete(S, int(np.argmin(scores)))
    return S


def leverage_scores(X) -> np.ndarray:
    """``x_i^T (X^T X)^{-1} x_i`` for every row."""
    Q, _ = np.linalg.qr(X)
    return np.einsum("ij,ij->i", Q, Q)


def support_start(X, z, k, eps=1e-6) -> np.ndarray:
    """Support of ``z``, padded to ``k`` rows by weight then leverage if short."""
    S = np.flatnonzero(z > eps)
    if S.size >= k:
        return S
    lev = leverage_scores(X)
    rest = np.setdiff1d(np.arange(X.shape[0]), S)
    order = np.lexsort((rest, -lev[rest], -z[rest]))
    return np.sort(np.concatenate([S, rest[order[: k - S.size]]]))


def greedy_from_relaxation(X, k, order, cfg=None, report=None) -> np.ndarray:
    """Greedy removal started from the support of the relaxed optimum.

    ``report`` may carry an already computed :class:`SolverReport` for the
    same ``(X, k, order)``; otherwise the relaxation is solved here.
    """
    X = check_design(X)
    n, m = X.shape
    order = check_order(order, m)
    k = _check_budget(k, m, n)
    if report is None:
        report = solve_relaxation(X, k, order, cfg or SolverConfig())
    S0 = support_start(X, report.final_weights, k)
    return greedy_removal(X, k, order, S0)


def fedorov_exchange(X, k, order, S_init, max_sweeps=1000) -> np.ndarray:
    """Best-improvement exchange: swap ``i in S`` for ``j not in S`` while it helps.

    Each sweep scores every swap and applies the best one if it lowers the
    objective by more than ``1e-12``.
    """
    X = check_design(X)
    n, m = X.shape
    order = check_order(order, m)
    S = check_subset(S_init, n)
    k = _check_budget(k, m, n)
    if S.size != k:
        raise InputError(f"initial set has {S.size} elements, expected k={k}")
    f = float(objective_from_spectra(np.linalg.eigvalsh(gram(X, S)), order))
    if not np.isfinite(f):
        raise InputError("initial set is not feasible")

    for sweep in range(max_sweeps):
        out = np.setdiff1d(np.arange(n), S)
        if out.size == 0:
            break
        Xo = X[out]
        outer = Xo[:, :, None] * Xo[:, None, :]
        G = gram(X, S)
        best, best_pair = f - FEDOROV_MIN_GAIN, None
        for a, i in enumerate(S):
            Gi = G - np.outer(X[i], X[i])
            vals = objective_from_spectra(np.linalg.eigvalsh(Gi[None] + outer), order)
            b = int(np.argmin(vals))
            if vals[b] < best:
                best, best_pair = float(vals[b]), (a, b)
        if best_pair is None:
            break
        a, b = best_pair
        S = np.sort(np.concatenate([np.delete(S, a), [out[b]]]))
        f = float(objective_from_spectra(np.linalg.eigvalsh(gram(X, S)), order))
    else:
        logger.debug("fedorov exchange hit max_sweeps=%d", max_sweeps)
    return S


def uniform_baseline(n, k, seed=0, X=None, max_tries=100) -> np.ndarray:
    """Uniformly random ``k``-subset of ``range(n)``.

    With ``X`` given, draws are repeated until the subset is feasible.
    """
    if isinstance(k, bool) or int(k) != k or not 0 < k <= n:
        raise InputError(f"budget k={k} must be an integer in (0, {n}]")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        S = np.sort(rng.choice(n, size=int(k), replace=False))
        if X is None or is_pd_spectrum(np.linalg.eigvalsh(gram(np.asarray(X, float), S))):
            return S
    raise InfeasibleProblemError(f"no feasible uniform draw in {max_tries} tries")
