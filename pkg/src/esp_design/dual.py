"""
Numerical handling of the dual of the relaxed design problem.

For a PSD multiplier ``H`` the inner maximisation over ``A`` is attained at a
matrix ``a(H)`` that shares the eigenvectors of ``H``; its eigenvalues solve

.. math:: \\lambda_i^2 e_{l-1}(\\lambda_{(i)}) = h_i e_l(\\lambda), \\quad i = 1..m

where ``lambda_(i)`` drops the ``i``-th entry.  Closed forms exist only for
``l = 1`` (``a(H) = tr(H^{1/2}) H^{1/2}``) and ``l = m`` (``a(H) = H``); for
other orders the system is solved by Newton's method in log coordinates.

``a`` is positively homogeneous (``a(cH) = c a(H)``), and any ``H`` with
``x_i^T H x_i <= 1`` for every row yields the lower bound

.. math:: \\frac{1}{l}\\log E_l(a(H)) + \\log(l / k) \\le f_l(z)

for every feasible relaxed design ``z`` (see :func:`dual_bound`).
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError, NumericFailure
from .esp import as_symmetric, log_esp, log_esp_leave_one_out


@dataclass(frozen=True)
class DualCertificate:
    H: np.ndarray
    a_of_H: np.ndarray
    stationarity_residual: float
    trace_residual: float
    max_row_constraint: float = float("nan")


def _check_order(order, m):
    if isinstance(order, bool) or int(order) != order or not 1 <= order <= m:
        raise InputError(f"order must be an integer in [1, {m}], got {order!r}")
    return int(order)


def _pd_spectrum(H):
    H = as_symmetric(H)
    h, U = np.linalg.eigh(H)
    if not h[0] > 0 or h[0] <= 1e-10 * h[-1]:
        raise DomainError("H must be positive definite (every h_i > 0)")
    return h, U


def _log_esp_leave_two_out(lam, order):
    """``log e_order`` of ``lam`` with entries ``i`` and ``j`` removed, ``i != j``."""
    m = lam.size
    if order < 0:
        return np.full((m, m), -np.inf)
    if m == 2:
        val = 0.0 if order == 0 else -np.inf
        out = np.full((2, 2), val)
        return out
    idx = np.array([[[t for t in range(m) if t != i and t != j] if i != j
                     else list(range(m - 2)) for j in range(m)] for i in range(m)])
    _, la = log_esp(lam[idx], order)
    return la


def _residual_terms(u, logh, order):
    lam = np.exp(u)
    _, full = log_esp(lam, order)
    if lam.size == 1:
        loo = np.zeros(1) if order == 1 else np.full(1, -np.inf)
    else:
        _, loo = log_esp_leave_one_out(lam, order - 1)
    F = 2 * u + loo - full - logh
    return F, lam, loo, full


def _stationarity_residual(F):
    return float(np.max(np.abs(np.expm1(F))))


def _solve(H, order, tol=1e-12, max_iter=500):
    h, U = _pd_spectrum(H)
    m = h.size
    order = _check_order(order, m)
    logh = np.log(h)
    # the l = 1 solution is a scale-aware starting point
    u = 0.5 * logh + np.log(np.sqrt(h).sum())
    F, lam, loo, full = _residual_terms(u, logh, order)
    res = _stationarity_residual(F)
    for _ in range(max_iter):
        if res <= tol:
            break
        r = np.exp(u + loo - full)
        if m > 1:
            l2 = _log_esp_leave_two_out(lam, order - 2)
            Q = np.exp(u[None, :] + l2 - loo[:, None])
            np.fill_diagonal(Q, 0.0)
        else:
            Q = np.zeros((1, 1))
        J = 2 * np.eye(m) + Q - np.ones((m, 1)) * r[None, :]
        try:
            du = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            du = -0.5 * F
        t = 1.0
        while True:
            u_new = u + t * du
            F_new, lam_new, loo_new, full_new = _residual_terms(u_new, logh, order)
            if np.linalg.norm(F_new) < np.linalg.norm(F) or t < 1e-6:
                break
            t *= 0.5
        u, F, lam, loo, full = u_new, F_new, lam_new, loo_new, full_new
        res = _stationarity_residual(F)
    if not res <= 1e-8:
        raise NumericFailure(f"stationarity system did not converge (residual {res:.3e})", res)
    A = (U * lam) @ U.T
    return 0.5 * (A + A.T), lam, h, U, res


def solve_a_of_H(H, order) -> np.ndarray:
    """The maximiser ``a(H)`` of ``-log E_l(A) - tr(H A^{-1})`` over PD ``A``.

    Raises
    ------
    DomainError
        If ``H`` is not positive definite.
    NumericFailure
        If Newton's method stalls above a relative residual of ``1e-8``.
    """
    return _solve(H, order)[0]


def a_of_H_closed_form(H, order) -> np.ndarray:
    """Closed-form ``a(H)`` for ``order`` equal to 1 or ``m``."""
    h, U = _pd_spectrum(H)
    m = h.size
    order = _check_order(order, m)
    if order == m:
        lam = h
    elif order == 1:
        lam = np.sqrt(h) * np.sqrt(h).sum()
    else:
        raise InputError("closed form known only for order 1 or m")
    return (U * lam) @ U.T


def dual_certificate(H, order, X=None) -> DualCertificate:
    """Solve for ``a(H)`` and report the stationarity and trace residuals."""
    A, lam, h, U, res = _solve(H, order)
    trace = float(np.sum(h / lam))
    row = float("nan")
    if X is not None:
        X = np.asarray(X, dtype=float)
        row = float(np.max(np.einsum("ij,jk,ik->i", X, as_symmetric(H), X)))
    return DualCertificate(as_symmetric(H), A, res, abs(trace - order), row)


def dual_value(H, order) -> float:
    """``log(E_l(a(H))) / l``."""
    _, lam, _, _, _ = _solve(H, order)
    _, la = log_esp(lam, int(order))
    return float(la) / order


def dual_bound(H, order, k) -> float:
    """Lower bound on the relaxed objective for budget ``k``.

    Valid whenever ``x_i^T H x_i <= 1`` for every row of the design matrix.
    """
    return dual_value(H, order) + np.log(order / k)


def h_of_a(A, order) -> np.ndarray:
    """Inverse of the map ``H -> a(H)``: ``H = A grad E_l(A) A / E_l(A)``."""
    A = as_symmetric(A)
    lam, U = np.linalg.eigh(A)
    if not lam[0] > 0:
        raise DomainError("A must be positive definite")
    order = _check_order(order, lam.size)
    _, full = log_esp(lam, order)
    if lam.size == 1:
        loo = np.zeros(1)
    else:
        _, loo = log_esp_leave_one_out(lam, order - 1)
    h = np.exp(2 * np.log(lam) + loo - full)
    return (U * h) @ U.T


def feasible_dual_point(X, z, order) -> np.ndarray:
    """A dual-feasible ``H`` built from a primal design ``z``.

    Takes ``h_of_a((X^T diag(z) X)^{-1})`` and rescales it so that
    ``max_i x_i^T H x_i = 1``.
    """
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    M = (X * z[:, None]).T @ X
    H = h_of_a(np.linalg.inv(0.5 * (M + M.T)), order)
    scale = np.max(np.einsum("ij,jk,ik->i", X, H, X))
    return H / scale
