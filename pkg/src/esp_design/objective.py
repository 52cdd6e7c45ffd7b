"""
The ESP-design objective and its continuous relaxation.

For a design matrix ``X`` (n x m, one candidate experiment per row), a subset
``S`` and an order ``1 <= l <= m`` the criterion is

.. math:: f_l(S) = \\frac{1}{l} \\log E_l\\big((X_S^T X_S)^{-1}\\big)

which is A-optimal design at ``l = 1`` and D-optimal design at ``l = m``.
The relaxation replaces ``X_S^T X_S`` by ``X^T diag(z) X`` for weights
``0 <= z <= 1``.  Inverses are never formed: the objective is evaluated as
``(log E_{m-l}(G) - log det G) / l`` on the spectrum of the Gram matrix ``G``.
"""
import numpy as np

from .errors import InfeasibleDesignError, InputError
from .esp import PD_FLOOR, is_pd_spectrum, log_esp, log_esp_leave_one_out


def check_design(X) -> np.ndarray:
    """Validate a design matrix: finite, 2-D, ``n >= m`` and full column rank."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InputError(f"design matrix must be 2-D, got shape {X.shape}")
    n, m = X.shape
    if m < 1 or n < m:
        raise InputError(f"design matrix needs n >= m >= 1, got {n} x {m}")
    if not np.all(np.isfinite(X)):
        raise InputError("design matrix has non-finite entries")
    sv = np.linalg.svd(X, compute_uv=False)
    if not sv[0] > 0 or sv[-1] <= PD_FLOOR * sv[0]:
        raise InputError("design matrix is not of full column rank")
    return X


def check_order(order, m) -> int:
    if isinstance(order, bool) or int(order) != order or not 1 <= int(order) <= m:
        raise InputError(f"order must be an integer in [1, {m}], got {order!r}")
    return int(order)


def check_subset(S, n) -> np.ndarray:
    """Return ``S`` as a sorted array of distinct indices in ``[0, n)``."""
    S = np.asarray(S, dtype=int).ravel()
    if S.size and (S.min() < 0 or S.max() >= n):
        raise InputError(f"subset indices must lie in [0, {n})")
    T = np.unique(S)
    if T.size != S.size:
        raise InputError("subset has repeated indices")
    return T


def check_weights(z, n) -> np.ndarray:
    z = np.asarray(z, dtype=float).ravel()
    if z.size != n:
        raise InputError(f"weights have length {z.size}, expected {n}")
    if not np.all(np.isfinite(z)):
        raise InputError("weights have non-finite entries")
    if z.min(initial=0.0) < -1e-12 or z.max(initial=0.0) > 1 + 1e-12:
        raise InputError("weights must lie in [0, 1]")
    return np.clip(z, 0.0, 1.0)


def indicator(S, n) -> np.ndarray:
    z = np.zeros(n)
    z[np.asarray(S, dtype=int)] = 1.0
    return z


def gram(X, S=None) -> np.ndarray:
    XS = X if S is None else X[np.asarray(S, dtype=int)]
    G = XS.T @ XS
    return 0.5 * (G + G.T)


def weighted_gram(X, z) -> np.ndarray:
    G = (X * z[:, None]).T @ X
    return 0.5 * (G + G.T)


def objective_from_spectra(lam, order) -> np.ndarray:
    """``f_l`` from Gram eigenvalues along the last axis; ``+inf`` where not PD.

    Accepts a stack of spectra so that candidate moves in the greedy and
    exchange algorithms can be scored in one call.
    """
    lam = np.asarray(lam, dtype=float)
    m = lam.shape[-1]
    ok = is_pd_spectrum(lam)
    safe = np.where(ok[..., None], lam, 1.0)
    _, la = log_esp(safe, m - order)
    val = (la - np.log(safe).sum(axis=-1)) / order
    return np.where(ok, val, np.inf)


def _objective_from_gram(G, order):
    lam = np.linalg.eigvalsh(G)
    val = float(objective_from_spectra(lam, order))
    if not np.isfinite(val):
        raise InfeasibleDesignError("information matrix is not positive definite")
    return val


def f_discrete(X, S, order) -> float:
    """Objective ``f_l(S) = log E_l((X_S^T X_S)^{-1}) / l``.

    Raises
    ------
    InfeasibleDesignError
        If ``X_S^T X_S`` is not positive definite.
    """
    X = check_design(X)
    n, m = X.shape
    order = check_order(order, m)
    S = check_subset(S, n)
    if S.size < m:
        raise InfeasibleDesignError(f"subset of size {S.size} cannot identify {m} parameters")
    return _objective_from_gram(gram(X, S), order)


def f_relaxed(X, z, order) -> float:
    """Relaxed objective ``log E_l((X^T diag(z) X)^{-1}) / l``."""
    X = check_design(X)
    n, m = X.shape
    order = check_order(order, m)
    z = check_weights(z, n)
    return _objective_from_gram(weighted_gram(X, z), order)


def _w_spectrum(lam, order):
    """Eigenvalues of W for Gram eigenvalues ``lam``.

    ``1/lam_j - e_{m-l-1}(lam_(j)) / e_{m-l}(lam)`` rewritten as
    ``e_{m-l}(lam_(j)) / (lam_j e_{m-l}(lam))``, which is free of cancellation
    because ``e_{m-l}(lam) = lam_j e_{m-l-1}(lam_(j)) + e_{m-l}(lam_(j))``.
    """
    m = lam.size
    p = m - order
    _, full = log_esp(lam, p)
    if m == 1:
        return 1.0 / lam
    _, loo = log_esp_leave_one_out(lam, p)
    return np.exp(loo - full - np.log(lam))


def _w_parts(X, z, order):
    X = check_design(X)
    n, m = X.shape
    order = check_order(order, m)
    z = check_weights(z, n)
    lam, U = np.linalg.eigh(weighted_gram(X, z))
    if not is_pd_spectrum(lam):
        raise InfeasibleDesignError("information matrix is not positive definite")
    return X, order, lam, U, _w_spectrum(lam, order)


def w_matrix(X, z, order) -> np.ndarray:
    """The positive definite kernel ``W`` with ``df/dz_i = -x_i^T W x_i / l``."""
    _, _, _, U, w = _w_parts(X, z, order)
    W = (U * w) @ U.T
    return 0.5 * (W + W.T)


def grad_relaxed(X, z, order) -> np.ndarray:
    """Gradient of :func:`f_relaxed` with respect to the weights."""
    X, order, _, U, w = _w_parts(X, z, order)
    Y = X @ U
    return -(Y**2 @ w) / order


# unchecked kernels for iterative solvers; callers validate once up front

def relaxed_value(X, z, order) -> float:
    """:func:`f_relaxed` without validation; ``+inf`` when infeasible."""
    lam = np.linalg.eigvalsh(weighted_gram(X, z))
    return float(objective_from_spectra(lam, order))


def relaxed_value_grad(X, z, order):
    """Value and gradient of the relaxed objective without validation."""
    lam, U = np.linalg.eigh(weighted_gram(X, z))
    if not is_pd_spectrum(lam):
        return np.inf, None
    val = float(objective_from_spectra(lam, order))
    w = _w_spectrum(lam, order)
    Y = X @ U
    return val, -(Y**2 @ w) / order
