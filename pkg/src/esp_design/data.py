"""
Instance generators, CSV ingestion and evaluation metrics.

Two synthetic families are provided: Gaussian rows with a random sparse
precision matrix, and Gaussian rows with a diagonal covariance whose
variances decay as ``j ** -alpha``.  Real datasets are read from CSV files
with a header row; feature columns can be rescaled to unit Euclidean norm.
"""
import csv
from dataclasses import dataclass, field
from enum import Enum
import io
from typing import Optional

import numpy as np

from .errors import CsvFormatError, InputError
from .objective import check_design, check_subset


class SyntheticKind(str, Enum):
    SPARSE_PRECISION = "sparse"
    SKEWED_COVARIANCE = "skewed"


@dataclass(frozen=True)
class SyntheticSpec:
    kind: SyntheticKind
    n: int
    m: int
    density_d: float = 0.6
    alpha: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", SyntheticKind(self.kind))
        if not self.n >= self.m >= 1:
            raise InputError(f"need n >= m >= 1, got n={self.n}, m={self.m}")
        if not 0 < self.density_d <= 1:
            raise InputError(f"density must lie in (0, 1], got {self.density_d}")
        if self.alpha < 0:
            raise InputError(f"alpha must be >= 0, got {self.alpha}")


@dataclass
class Dataset:
    X: np.ndarray
    y: Optional[np.ndarray] = None
    column_names: list = field(default_factory=list)
    column_scales: Optional[np.ndarray] = None
    precision: Optional[np.ndarray] = None

    def denormalized(self) -> np.ndarray:
        """Raw feature values, undoing column normalisation if it was applied."""
        if self.column_scales is None:
            return self.X.copy()
        return self.X * self.column_scales

    def to_csv(self, path_or_buf=None) -> str:
        """Write features (and the response, if any) as CSV; returns the text."""
        names = self.column_names or [f"x{j + 1}" for j in range(self.X.shape[1])]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = list(names) + (["y"] if self.y is not None else [])
        w.writerow(header)
        for i, row in enumerate(self.X):
            cells = [repr(float(v)) for v in row]
            if self.y is not None:
                cells.append(repr(float(self.y[i])))
            w.writerow(cells)
        text = buf.getvalue()
        if path_or_buf is not None:
            if hasattr(path_or_buf, "write"):
                path_or_buf.write(text)
            else:
                with open(path_or_buf, "w", newline="") as fh:
                    fh.write(text)
        return text


def sparse_precision(m, density, rng) -> np.ndarray:
    """Random symmetric precision matrix made PD by diagonal dominance."""
    mask = np.triu(rng.random((m, m)) < density, 1)
    vals = np.triu(rng.uniform(-1.0, 1.0, (m, m)), 1) * mask
    P = vals + vals.T
    np.fill_diagonal(P, np.abs(P).sum(axis=1) + 1.0)
    return P


def gen_sparse_precision(spec: SyntheticSpec) -> Dataset:
    """Rows drawn i.i.d. from ``N(0, P^{-1})`` with ``P`` a sparse precision."""
    if spec.kind is not SyntheticKind.SPARSE_PRECISION:
        raise InputError("spec.kind must be SPARSE_PRECISION")
    rng = np.random.default_rng(spec.seed)
    P = sparse_precision(spec.m, spec.density_d, rng)
    L = np.linalg.cholesky(P)
    g = rng.standard_normal((spec.n, spec.m))
    # x = L^{-T} g has covariance (L L^T)^{-1} = P^{-1}
    X = np.linalg.solve(L.T, g.T).T
    return Dataset(X=X, precision=P)


def gen_skewed(spec: SyntheticSpec) -> Dataset:
    """Rows drawn i.i.d. from ``N(0, diag(1, 2^-alpha, ..., m^-alpha))``."""
    if spec.kind is not SyntheticKind.SKEWED_COVARIANCE:
        raise InputError("spec.kind must be SKEWED_COVARIANCE")
    rng = np.random.default_rng(spec.seed)
    sd = np.arange(1, spec.m + 1, dtype=float) ** (-spec.alpha / 2)
    return Dataset(X=rng.standard_normal((spec.n, spec.m)) * sd)


def generate(spec: SyntheticSpec) -> Dataset:
    if spec.kind is SyntheticKind.SPARSE_PRECISION:
        return gen_sparse_precision(spec)
    return gen_skewed(spec)


def normalize_columns(X):
    """Scale each column to unit Euclidean norm; returns ``(Xn, scales)``."""
    scales = np.linalg.norm(X, axis=0)
    if np.any(scales == 0):
        j = int(np.flatnonzero(scales == 0)[0])
        raise InputError(f"column {j} is identically zero and cannot be normalised")
    return X / scales, scales


def load_csv(path, response_column=None, normalize=False) -> Dataset:
    """Read a CSV file of experiments (one per row) with a header line.

    Parameters
    ----------
    path : str or path-like or file object
    response_column : str or int, optional
        Name or zero-based position of the response column to split off.
    normalize : bool
        Rescale every feature column to unit Euclidean norm.

    Raises
    ------
    CsvFormatError
        On ragged rows, empty or non-numeric cells.  ``row`` is the 1-based
        data row (the header is row 0) and ``column`` the header name.
    """
    if hasattr(path, "read"):
        text = path.read()
    else:
        with open(path, newline="") as fh:
            text = fh.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("empty CSV file", row=0) from None
    header = [h.strip() for h in header]
    if not header or all(h == "" for h in header):
        raise CsvFormatError("missing header row", row=0)

    rows = []
    for r, cells in enumerate(reader, start=1):
        if not cells:
            continue
        if len(cells) != len(header):
            raise CsvFormatError(
                f"row {r}: expected {len(header)} cells, found {len(cells)}", row=r)
        vals = []
        for name, cell in zip(header, cells):
            cell = cell.strip()
            if cell == "":
                raise CsvFormatError(f"row {r}, column {name!r}: missing value", row=r, column=name)
            try:
                v = float(cell)
            except ValueError:
                raise CsvFormatError(
                    f"row {r}, column {name!r}: non-numeric value {cell!r}", row=r, column=name
                ) from None
            if not np.isfinite(v):
                raise CsvFormatError(f"row {r}, column {name!r}: non-finite value", row=r, column=name)
            vals.append(v)
        rows.append(vals)
    if not rows:
        raise CsvFormatError("CSV file has no data rows", row=1)
    data = np.array(rows, dtype=float)

    y = None
    names = list(header)
    if response_column is not None:
        if isinstance(response_column, str) and response_column in header:
            j = header.index(response_column)
        else:
            try:
                j = int(response_column)
            except (TypeError, ValueError):
                raise InputError(f"unknown response column {response_column!r}") from None
            if not 0 <= j < len(header):
                raise InputError(f"response column index {j} out of range")
        y = data[:, j].copy()
        data = np.delete(data, j, axis=1)
        del names[j]

    scales = None
    if normalize:
        data, scales = normalize_columns(data)
    if data.shape[0] < data.shape[1] + 1:
        raise InputError(f"need at least m + 1 = {data.shape[1] + 1} rows, found {data.shape[0]}")
    try:
        check_design(data)
    except InputError as exc:
        raise InputError(f"feature matrix rejected: {exc}") from None
    return Dataset(X=data, y=y, column_names=names, column_scales=scales)


def predictive_error(X, y, S) -> float:
    """Relative prediction error on the rows left out of ``S``.

    Fits ``theta`` by least squares on the rows in ``S`` and returns
    ``||X_H theta - y_H|| / ||y_H||`` over the complement ``H``; when ``S``
    covers every row the in-sample ratio is returned instead.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    S = check_subset(S, X.shape[0])
    theta, *_ = np.linalg.lstsq(X[S], y[S], rcond=None)
    H = np.setdiff1d(np.arange(X.shape[0]), S)
    if H.size == 0:
        H = S
    denom = np.linalg.norm(y[H])
    if denom == 0:
        raise InputError("held-out responses are all zero")
    return float(np.linalg.norm(X[H] @ theta - y[H]) / denom)


def sparsity_fraction(X, S) -> float:
    """Fraction of non-zero entries (``|x| > 1e-12``) in ``X_S``."""
    X = np.asarray(X, dtype=float)
    XS = X[np.asarray(S, dtype=int)]
    if XS.size == 0:
        return 0.0
    return float(np.count_nonzero(np.abs(XS) > 1e-12) / XS.size)
