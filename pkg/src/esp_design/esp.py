"""
Elementary symmetric polynomials of vectors and of symmetric matrix spectra.

For a vector ``v`` of length ``m`` the order-``l`` elementary symmetric
polynomial is

.. math:: e_l(v) = \\sum_{|I| = l} \\prod_{j \\in I} v_j

and for a symmetric matrix ``E_l(M) = e_l(eigvals(M))``.  Values of degree
``l`` overflow double precision quickly, so everything here works in the log
domain: the polynomial product ``prod_j (1 + v_j t)`` is expanded coefficient
by coefficient (truncated at degree ``l``) on a spectrum that has been divided
by its geometric mean, and the running coefficient vector is renormalised
after each factor.

The public :func:`esp_vector` returns 0 for ``l = 0``; every internal helper
uses the algebraic convention ``e_0 = 1``, which is what the inverse identity
``E_l(M^{-1}) = E_{m-l}(M) / det(M)`` needs at ``l = m``.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError, InputError

#: relative eigenvalue floor below which a matrix is not treated as PD
PD_FLOOR = 1e-10
#: relative asymmetry tolerated before a matrix is rejected
SYM_TOL = 1e-10


@dataclass(frozen=True)
class LogESP:
    """Log-domain value of an elementary symmetric polynomial.

    ``log_value`` is ``log|E_l|`` (``-inf`` for an exact zero) and ``sign``
    is -1, 0 or +1.
    """

    log_value: float
    order: int
    sign: int = 1

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_value)

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigenvalues (descending) and orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.T


# ----------------------------------------------------------------------------
# validation helpers
# ----------------------------------------------------------------------------

def _check_order(order, lo=0, hi=None):
    if isinstance(order, bool) or int(order) != order:
        raise InputError(f"order must be an integer, got {order!r}")
    order = int(order)
    if order < lo or (hi is not None and order > hi):
        raise InputError(f"order {order} outside [{lo}, {hi}]")
    return order


def as_symmetric(M, tol=SYM_TOL) -> np.ndarray:
    """Validate a square finite matrix and return ``(M + M.T) / 2``."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix has non-finite entries")
    scale = max(np.max(np.abs(M), initial=0.0), 1.0)
    if np.max(np.abs(M - M.T), initial=0.0) > tol * scale:
        raise InputError("matrix is not symmetric")
    return 0.5 * (M + M.T)


def spectral_decomp(M) -> SpectralDecomp:
    """Symmetric eigendecomposition with eigenvalues sorted descending."""
    M = as_symmetric(M)
    w, U = np.linalg.eigh(M)
    return SpectralDecomp(w[::-1].copy(), U[:, ::-1].copy())


def is_pd_spectrum(eigenvalues, floor=PD_FLOOR):
    """True when the smallest eigenvalue exceeds ``floor`` times the largest.

    Works on the last axis, so a stack of spectra gives a boolean array.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    top = lam.max(axis=-1)
    return (top > 0) & (lam.min(axis=-1) > floor * top)


def pd_eigh(M, what="matrix"):
    """Eigendecomposition of a matrix that must be positive definite."""
    dec = spectral_decomp(M)
    if not is_pd_spectrum(dec.eigenvalues):
        raise DomainError(f"{what} is not positive definite")
    return dec


# ----------------------------------------------------------------------------
# batched log-domain recurrence
# ----------------------------------------------------------------------------

def log_esp_all(v, max_order):
    """All ESPs of orders ``0..max_order`` along the last axis of ``v``.

    Parameters
    ----------
    v : array_like (..., m)
        Real values; leading axes are treated as a batch.
    max_order : int
        Highest order needed.  Orders above ``m`` come out as exact zeros.

    Returns
    -------
    sign : np.ndarray (..., max_order + 1)
    logabs : np.ndarray (..., max_order + 1)
        ``e_j = sign * exp(logabs)``, with ``e_0 = 1``.
    """
    v = np.asarray(v, dtype=float)
    batch = v.shape[:-1]
    m = v.shape[-1]
    v = v.reshape(-1, m)
    B = v.shape[0]

    a = np.abs(v)
    nz = a > 0
    cnt = nz.sum(axis=1)
    with np.errstate(divide="ignore"):
        la = np.where(nz, np.log(np.where(nz, a, 1.0)), 0.0)
    log_g = np.where(cnt > 0, la.sum(axis=1) / np.maximum(cnt, 1), 0.0)
    # rescale in the log domain: exp(-log_g) alone overflows for subnormals
    w = np.where(nz, np.sign(v) * np.exp(la - log_g[:, None]), 0.0)

    c = np.zeros((B, max_order + 1))
    c[:, 0] = 1.0
    log_s = np.zeros(B)
    for j in range(m):
        c[:, 1:] = c[:, 1:] + w[:, j, None] * c[:, :-1]
        s = np.abs(c).max(axis=1)
        c /= s[:, None]
        log_s += np.log(s)

    sign = np.sign(c)
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(c))
    logabs = logabs + log_s[:, None] + np.arange(max_order + 1) * log_g[:, None]
    logabs[sign == 0] = -np.inf
    shape = batch + (max_order + 1,)
    return sign.reshape(shape), logabs.reshape(shape)


def log_esp(v, order):
    """``(sign, log|e_order(v)|)`` along the last axis, with ``e_0 = 1``."""
    sign, logabs = log_esp_all(v, order)
    return sign[..., order], logabs[..., order]


def _drop_one_index(m):
    return np.array([[j for j in range(m) if j != i] for i in range(m)], dtype=int).reshape(m, m - 1)


def log_esp_leave_one_out(v, order):
    """``e_order`` of ``v`` with each entry removed in turn.

    Each of the ``m`` reduced vectors is run through the recurrence from
    scratch rather than obtained by polynomial division, which is unstable
    when some entries are near zero.

    Returns ``(sign, logabs)`` of shape ``(..., m)``.
    """
    v = np.asarray(v, dtype=float)
    m = v.shape[-1]
    if m == 0:
        raise InputError("empty vector")
    if m == 1:
        shape = v.shape[:-1] + (1,)
        if order == 0:
            return np.ones(shape), np.zeros(shape)
        return np.zeros(shape), np.full(shape, -np.inf)
    reduced = v[..., _drop_one_index(m)]
    return log_esp(reduced, order)


# ----------------------------------------------------------------------------
# public API
# ----------------------------------------------------------------------------

def esp_vector(v, order) -> LogESP:
    """Elementary symmetric polynomial of a vector.

    Follows the convention ``e_0 = 0`` at this boundary, and returns an exact
    zero for orders larger than the vector length.
    """
    v = np.asarray(v, dtype=float).ravel()
    if not np.all(np.isfinite(v)):
        raise InputError("vector has non-finite entries")
    order = _check_order(order)
    if order == 0 or order > v.size:
        return LogESP(-math.inf, order, 0)
    s, la = log_esp(v, order)
    return LogESP(float(la), order, int(s))


def esp_matrix(M, order) -> LogESP:
    """``E_order(M) = e_order(eigvals(M))`` for symmetric ``M``."""
    M = as_symmetric(M)
    order = _check_order(order)
    lam = np.linalg.eigvalsh(M)
    return esp_vector(lam, order)


def esp_of_inverse(M, order) -> LogESP:
    """``E_order(M^{-1})`` via ``E_{m-order}(M) / det(M)``, never inverting ``M``."""
    M = as_symmetric(M)
    m = M.shape[0]
    order = _check_order(order, 1, m)
    lam = np.linalg.eigvalsh(M)
    if not is_pd_spectrum(lam):
        raise DomainError("matrix is not positive definite")
    _, la = log_esp(lam, m - order)
    return LogESP(float(la - np.log(lam).sum()), order, 1)


def esp_gradient(M, order) -> np.ndarray:
    """Gradient of ``M -> E_order(M)`` over symmetric matrices.

    Equal to ``U diag(e_{order-1}(lambda without lambda_i)) U^T``.
    """
    M = as_symmetric(M)
    m = M.shape[0]
    order = _check_order(order, 1, m)
    w, U = np.linalg.eigh(M)
    s, la = log_esp_leave_one_out(w, order - 1)
    d = s * np.exp(la)
    return (U * d) @ U.T


def _pd_power(w, U, p):
    return (U * w**p) @ U.T


def geodesic_point(P, Q, t) -> np.ndarray:
    """Point ``P #_t Q`` on the affine-invariant geodesic from ``P`` to ``Q``."""
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise InputError(f"t must lie in [0, 1], got {t}")
    dp = pd_eigh(P, "P")
    pd_eigh(Q, "Q")
    Q = as_symmetric(Q)
    w, U = dp.eigenvalues, dp.eigenvectors
    P_half = _pd_power(w, U, 0.5)
    P_mhalf = _pd_power(w, U, -0.5)
    C = P_mhalf @ Q @ P_mhalf
    C = 0.5 * (C + C.T)
    cw, cU = np.linalg.eigh(C)
    G = P_half @ _pd_power(np.maximum(cw, 0.0), cU, t) @ P_half
    return 0.5 * (G + G.T)
