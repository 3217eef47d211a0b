"""Gaussian marginal likelihoods for polynomial design matrices.

Log marginals are reported relative to the base model: the returned
value is the log Bayes factor of a model against the base, so the base
scores exactly 0 and differences between any two models are exact log
Bayes factors.  The default evaluator is a null-based unit-information
g-prior (g = n) with the base columns and the error variance treated as
common to all models; anything with a ``log_marginal(dataset, model)``
method can be plugged in instead.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg as sla

from .space import Model, ModelSpace, bit_ids
from .terms import Term

# relative tolerance on |diag R| for the numerical rank
_RANK_RTOL = 1e-10


@dataclass
class Dataset:
    """Responses plus raw main-effect columns (standardization applied once,
    up front, and recorded: selection is coding-dependent for models that
    break strong heredity)."""

    y: np.ndarray
    mains: np.ndarray
    names: list[str]
    response_name: str = "y"
    centered: bool = False
    scaled: bool = False

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.mains = np.asarray(self.mains, dtype=float)
        if self.y.ndim != 1 or self.mains.ndim != 2:
            raise ValueError("y must be a vector and mains a matrix")
        if self.mains.shape[0] != self.y.shape[0]:
            raise ValueError("response and main-effect row counts disagree")
        if self.y.size == 0:
            raise ValueError("empty dataset")
        if not (np.isfinite(self.y).all() and np.isfinite(self.mains).all()):
            raise ValueError("dataset contains non-finite values")

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.mains.shape[1]

    @classmethod
    def from_arrays(cls, y, X, names=None, response_name="y", center=False, scale=False):
        X = np.asarray(X, dtype=float).copy()
        if center:
            X -= X.mean(axis=0)
        if scale:
            sd = X.std(axis=0)
            sd[sd == 0] = 1.0
            X /= sd
        names = list(names) if names else [f"x{j + 1}" for j in range(X.shape[1])]
        return cls(np.asarray(y, dtype=float), X, names, response_name, center, scale)


def load_csv(path, response: str, center: bool = False, scale: bool = False) -> Dataset:
    """Read a header-first CSV; ``response`` names the y column, every other
    column is a numeric main effect.  Malformed rows report their line number."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if response not in header:
            raise ValueError(f"{path}: response column {response!r} not found")
        ycol = header.index(response)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric value") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows)
    names = [h for k, h in enumerate(header) if k != ycol]
    return Dataset.from_arrays(
        data[:, ycol], np.delete(data, ycol, axis=1), names, response, center, scale
    )


def _columns(mains: np.ndarray, ts) -> np.ndarray:
    """One design column per term: the elementwise product of main-effect powers."""
    n = mains.shape[0]
    out = np.empty((n, len(ts)))
    for k, t in enumerate(ts):
        col = np.ones(n)
        for j, e in enumerate(t):
            if e:
                col = col * mains[:, j] ** e
        out[:, k] = col
    return out


def build_design(dataset: Dataset, model: Model) -> np.ndarray:
    """Design matrix of the model: base plus selected terms in canonical order."""
    if not model.is_valid():
        raise ValueError("model violates the heredity condition")
    return _columns(dataset.mains, model.terms())


def _orth_basis(A: np.ndarray) -> tuple[np.ndarray, int]:
    """Orthonormal basis of the column space via column-pivoted QR; the
    numerical rank uses max |diag R| * 1e-10 as cutoff."""
    if A.shape[1] == 0:
        return A, 0
    Q, R, _ = sla.qr(A, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0.0:
        return A[:, :0], 0
    k = int(np.count_nonzero(d > d[0] * _RANK_RTOL))
    return Q[:, :k], k


def _log_bf_from_r2(n: int, kb: int, k: int, r2: float, g: float) -> float:
    if n <= kb + k:
        raise ValueError(f"saturated fit: n={n} <= base rank {kb} + model rank {k}")
    return 0.5 * ((n - kb - k) * math.log1p(g) - (n - kb) * math.log1p(g * (1.0 - r2)))


@dataclass(frozen=True)
class GPriorEvaluator:
    """Unit-information g-prior Bayes factors against the base model.

    With k the rank of the selected columns after residualizing on the
    base and R^2 their coefficient of determination on the residualized
    response:  log BF = ((n-kb-k)/2) log(1+g) - ((n-kb)/2) log(1+g(1-R^2)).
    """

    g: float | None = None  # None -> g = n

    def effective_g(self, n: int) -> float:
        g = float(n) if self.g is None else float(self.g)
        if g <= 0:
            raise ValueError("g must be positive")
        return g

    def log_marginal(self, dataset: Dataset, model: Model) -> float:
        g = self.effective_g(dataset.n)
        space = model.space
        Xb = _columns(dataset.mains, space.base_terms)
        Xs = _columns(dataset.mains, model.selected_terms())
        Qb, kb = _orth_basis(Xb)
        yt = dataset.y - Qb @ (Qb.T @ dataset.y)
        k, r2 = 0, 0.0
        if Xs.shape[1]:
            Xt = Xs - Qb @ (Qb.T @ Xs)
            Qm, k = _orth_basis(Xt)
            tss = float(yt @ yt)
            if k and tss > 0.0:
                fit = Qm.T @ yt
                r2 = min(1.0, float(fit @ fit) / tss)
        return _log_bf_from_r2(dataset.n, kb, k, r2, g)


@dataclass(frozen=True)
class PluginEvaluator:
    """Adapter for a user-supplied marginal (must be base-normalized)."""

    fn: Callable[[Dataset, Model], float]

    def log_marginal(self, dataset: Dataset, model: Model) -> float:
        return float(self.fn(dataset, model))


class MarginalCache:
    """Model-keyed store of log marginals; reinsertions must agree."""

    def __init__(self):
        self._store: dict[int, float] = {}

    def get(self, key: int) -> float | None:
        return self._store.get(key)

    def put(self, key: int, value: float) -> None:
        old = self._store.get(key)
        if old is not None and abs(old - value) > 1e-9:
            raise ValueError(f"conflicting cache insert for key {key}: {old} vs {value}")
        self._store[key] = value

    def __len__(self):
        return len(self._store)

    def __contains__(self, key):
        return key in self._store


def log_marginal(
    dataset: Dataset,
    model: Model,
    evaluator=None,
    cache: MarginalCache | None = None,
) -> float:
    """log m(y|M) up to the constant shared by all models of the space."""
    evaluator = evaluator or GPriorEvaluator()
    if cache is None:
        return evaluator.log_marginal(dataset, model)
    got = cache.get(model.bits)
    if got is None:
        got = evaluator.log_marginal(dataset, model)
        cache.put(model.bits, got)
    return got


class DesignContext:
    """Per (dataset, space) workspace for scoring many models.

    Residualizes everything on the base once and keeps the Gram matrix of
    the residualized node columns, so one model costs one small Cholesky
    solve.  Ill-conditioned submatrices fall back to the rank-revealing
    QR route, which is the reference implementation.
    """

    def __init__(self, dataset: Dataset, space: ModelSpace, evaluator: GPriorEvaluator | None = None):
        evaluator = evaluator or GPriorEvaluator()
        self.n = dataset.n
        self.g = evaluator.effective_g(dataset.n)
        Xb = _columns(dataset.mains, space.base_terms)
        self.Qb, self.kb = _orth_basis(Xb)
        cols = _columns(dataset.mains, space.nodes)
        self.Xt = cols - self.Qb @ (self.Qb.T @ cols)
        self.yt = dataset.y - self.Qb @ (self.Qb.T @ dataset.y)
        self.tss = float(self.yt @ self.yt)
        self.G = self.Xt.T @ self.Xt
        self.gy = self.Xt.T @ self.yt

    def log_bf_bits(self, bits: int) -> float:
        idx = bit_ids(bits)
        if not idx:
            return _log_bf_from_r2(self.n, self.kb, 0, 0.0, self.g)
        G = self.G[np.ix_(idx, idx)]
        try:
            L = np.linalg.cholesky(G)
            d = np.diag(L)
            if d[0] == 0.0 or d.min() <= d.max() * 1e-7:
                raise np.linalg.LinAlgError
            sol = sla.cho_solve((L, True), self.gy[idx])
        except np.linalg.LinAlgError:
            return self._log_bf_qr(idx)
        r2 = 0.0
        if self.tss > 0.0:
            r2 = min(1.0, float(self.gy[idx] @ sol) / self.tss)
        return _log_bf_from_r2(self.n, self.kb, len(idx), r2, self.g)

    def _log_bf_qr(self, idx) -> float:
        Qm, k = _orth_basis(self.Xt[:, idx])
        r2 = 0.0
        if k and self.tss > 0.0:
            fit = Qm.T @ self.yt
            r2 = min(1.0, float(fit @ fit) / self.tss)
        return _log_bf_from_r2(self.n, self.kb, k, r2, self.g)


def directed_distance(
    dataset: Dataset,
    true_model: Model,
    true_beta,
    model: Model,
    sigma2: float = 1.0,
) -> float:
    """Finite-n normalized quadratic form measuring the part of the true
    mean the candidate model cannot explain; 0 whenever the candidate
    nests the true model.  ``true_beta`` aligns with the true model's
    design columns."""
    mean = build_design(dataset, true_model) @ np.asarray(true_beta, dtype=float)
    Q, _ = _orth_basis(build_design(dataset, model))
    resid = mean - Q @ (Q.T @ mean)
    return float(resid @ resid) / (dataset.n * sigma2)


def posterior_mean_coefficients(
    dataset: Dataset, model: Model, evaluator: GPriorEvaluator | None = None
) -> dict[Term, float]:
    """Posterior-mean coefficients under the g-prior: least squares on the
    base-residualized selected columns shrunk by g/(1+g); base coefficients
    unshrunk.  Keys follow the model's design column order."""
    evaluator = evaluator or GPriorEvaluator()
    g = evaluator.effective_g(dataset.n)
    space = model.space
    base_ts = space.base_terms
    sel_ts = model.selected_terms()
    Xb = _columns(dataset.mains, base_ts)
    bb = np.linalg.lstsq(Xb, dataset.y, rcond=None)[0] if base_ts else np.zeros(0)
    coef = {}
    if sel_ts:
        Xs = _columns(dataset.mains, sel_ts)
        Gamma = np.linalg.lstsq(Xb, Xs, rcond=None)[0] if base_ts else np.zeros((0, len(sel_ts)))
        Xt = Xs - Xb @ Gamma if base_ts else Xs
        bs = (g / (1.0 + g)) * np.linalg.lstsq(Xt, dataset.y, rcond=None)[0]
        bb = bb - Gamma @ bs if base_ts else bb
        coef.update(zip(sel_ts, bs))
    out = dict(zip(base_ts, bb))
    out.update(coef)
    return out


def predict_model(
    dataset: Dataset,
    model: Model,
    new_mains,
    evaluator: GPriorEvaluator | None = None,
) -> np.ndarray:
    """Plug-in prediction at new main-effect rows from one model's
    posterior-mean coefficients."""
    coefs = posterior_mean_coefficients(dataset, model, evaluator)
    Xn = _columns(np.asarray(new_mains, dtype=float), list(coefs.keys()))
    return Xn @ np.asarray(list(coefs.values()))
