"""
Brute-force reference computations.

Nothing here touches the eigenvalue-based machinery in :mod:`esp_design.esp`
or :mod:`esp_design.objective`: ESPs come from literal subset sums or from
principal minors, inverses are formed explicitly and determinants use LU.
These are only meant for tiny instances and refuse anything larger than the
configured :class:`EnumerationBudget`.
"""
from dataclasses import dataclass
from itertools import combinations
from math import comb, prod

import numpy as np

from .errors import BudgetExceededError, InfeasibleProblemError, InputError


@dataclass(frozen=True)
class EnumerationBudget:
    max_n: int = 12
    max_m: int = 4
    max_subsets: int = 10**6


DEFAULT_BUDGET = EnumerationBudget()

#: separate cap on vector length for the literal subset sum
MAX_BRUTEFORCE_LEN = 20


def esp_bruteforce(v, order) -> float:
    """Sum over all ``order``-subsets of the product of their entries."""
    v = [float(x) for x in np.asarray(v, dtype=float).ravel()]
    if len(v) > MAX_BRUTEFORCE_LEN:
        raise BudgetExceededError(f"vector of length {len(v)} exceeds {MAX_BRUTEFORCE_LEN}")
    if order < 0:
        raise InputError("order must be non-negative")
    if order == 0:
        return 1.0
    return float(sum(prod(c) for c in combinations(v, order)))


def esp_minor_sum(M, order) -> float:
    """Sum of all ``order x order`` principal minors of ``M``."""
    M = np.asarray(M, dtype=float)
    m = M.shape[0]
    if m > 12:
        raise BudgetExceededError(f"matrix of size {m} exceeds 12")
    if order == 0:
        return 1.0
    total = 0.0
    for idx in combinations(range(m), order):
        total += np.linalg.det(M[np.ix_(idx, idx)])
    return float(total)


def inverse_esp(G, order) -> float:
    """``E_order(G^{-1})`` from an explicit inverse and principal minors."""
    return esp_minor_sum(np.linalg.inv(G), order)


def _check_enumeration(n, k, budget, m=0):
    if m > budget.max_m:
        raise BudgetExceededError(f"m={m} exceeds max_m={budget.max_m}")
    if n > budget.max_n:
        raise BudgetExceededError(f"n={n} exceeds max_n={budget.max_n}")
    if comb(n, k) > budget.max_subsets:
        raise BudgetExceededError(f"C({n},{k}) exceeds max_subsets={budget.max_subsets}")


def cauchy_binet_check(X, rtol=1e-8, budget=DEFAULT_BUDGET) -> bool:
    """Check ``det(X^T X) = sum_{|S| = m} det(X_S^T X_S)`` numerically."""
    X = np.asarray(X, dtype=float)
    n, m = X.shape
    _check_enumeration(n, m, budget, m)
    lhs = np.linalg.det(X.T @ X)
    rhs = sum(np.linalg.det(X[list(S)]) ** 2 for S in combinations(range(n), m))
    return bool(abs(lhs - rhs) <= rtol * max(abs(lhs), abs(rhs), 1e-300))


def _is_pd(G):
    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        return False
    w = np.linalg.eigvalsh(G)
    return w[0] > 1e-10 * w[-1]


def exhaustive_optimum(X, k, order, budget=DEFAULT_BUDGET):
    """Global minimiser of the design objective over all feasible ``k``-subsets.

    Ties go to the lexicographically smallest subset.

    Returns
    -------
    S : tuple of int
    value : float
        ``log(E_order((X_S^T X_S)^{-1})) / order`` at the optimum.
    """
    X = np.asarray(X, dtype=float)
    n, m = X.shape
    _check_enumeration(n, k, budget, m)
    best, best_S = np.inf, None
    for S in combinations(range(n), k):
        G = X[list(S)].T @ X[list(S)]
        if not _is_pd(G):
            continue
        e = inverse_esp(G, order)
        if e <= 0:
            continue
        val = np.log(e) / order
        if val < best:
            best, best_S = val, S
    if best_S is None:
        raise InfeasibleProblemError("no feasible subset of the requested size")
    return best_S, float(best)


def volume_sampling_expectation(X, k, order, budget=DEFAULT_BUDGET):
    """Exact expectation of ``E_order((X_S^T X_S)^{-1})`` under volume sampling.

    ``S`` of size ``k`` is drawn with probability proportional to
    ``det(X_S^T X_S)``; singular subsets carry zero probability.

    Returns
    -------
    lhs : float
        The expectation, by full enumeration.
    rhs : float
        ``prod_{i=1}^{order} (n-m+i)/(k-m+i) * E_order((X^T X)^{-1})``.
    """
    X = np.asarray(X, dtype=float)
    n, m = X.shape
    _check_enumeration(n, k, budget, m)
    num = 0.0
    den = 0.0
    for S in combinations(range(n), k):
        XS = X[list(S)]
        G = XS.T @ XS
        d = np.linalg.det(G)
        den += d
        if _is_pd(G):
            num += d * inverse_esp(G, order)
    if den <= 0:
        raise InputError("every subset of size k is singular")
    lhs = num / den
    factor = prod((n - m + i) / (k - m + i) for i in range(1, order + 1))
    rhs = factor * inverse_esp(X.T @ X, order)
    return float(lhs), float(rhs)
