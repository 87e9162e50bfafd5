"""Epsilon-insensitive support vector regression with an RBF kernel.

The dual problem is solved directly in the beta = alpha - alpha*
parametrization:

    maximize  -1/2 sum_ij beta_i beta_j K_ij - eps sum_i |beta_i| + sum_i y_i beta_i
    subject to  sum_i beta_i = 0,  -C <= beta_i <= C

by two-variable SMO: every iteration picks the maximal violating pair of
feasible coordinate directions, takes the exact minimizing step along it
(capped at box bounds and at zero crossings of the |beta_i| terms, which are
landed on exactly), and updates the cached gradient. Stopping when the pair
violation drops to tol certifies the standard KKT conditions at tol/2.

grid_search runs k-fold cross validation over a hyperparameter grid, scoring
folds by held-out Pearson correlation (or negative MSE), optionally across
worker processes; results are reduced in grid order so parallel and
sequential runs produce identical output.
"""

from __future__ import annotations

import multiprocessing
import struct
import warnings
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import kfold_assign
from .errors import ConvergenceError, EmbeddingFormatError, ValidationError
from .evaluation import ConstantInputWarning, pearson

DEFAULT_GRID_VALUES = (0.01, 0.1, 1.0, 10.0)
DEFAULT_TOL = 1e-3
DEFAULT_MAX_ITER = 10_000_000
FULL_CACHE_LIMIT = 8000
BOUND_REL_TOL = 1e-6

SVR1_MAGIC = b"SVR1"
_SVR_HEADER = struct.Struct("<4sIIdddd")


@dataclass(frozen=True)
class Hyperparams:
    """Regularization C, tube half-width epsilon, and RBF width gamma."""

    C: float
    epsilon: float
    gamma: float

    def __post_init__(self):
        if not self.C > 0:
            raise ValidationError(f"C must be positive, got {self.C}")
        if self.epsilon < 0:
            raise ValidationError(f"epsilon must be non-negative, got {self.epsilon}")
        if not self.gamma > 0:
            raise ValidationError(f"gamma must be positive, got {self.gamma}")


def default_grid() -> list[Hyperparams]:
    """All 64 combinations of {0.01, 0.1, 1.0, 10} for C, epsilon, gamma.

    Enumeration order (C ascending, then epsilon, then gamma) doubles as the
    grid-search tie-break order.
    """
    return [
        Hyperparams(c, e, g)
        for c in DEFAULT_GRID_VALUES
        for e in DEFAULT_GRID_VALUES
        for g in DEFAULT_GRID_VALUES
    ]


def rbf_kernel(x, y, gamma: float) -> float:
    """exp(-gamma * ||x - y||^2); always in (0, 1] and exactly 1 at x == y."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValidationError(f"kernel arguments must be equal-length vectors, got {x.shape}, {y.shape}")
    d = x - y
    return float(np.exp(-gamma * float(d @ d)))


def rbf_gram(X, Y, gamma: float) -> np.ndarray:
    """Kernel matrix between the rows of X and the rows of Y."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    xsq = np.einsum("ij,ij->i", X, X)
    ysq = np.einsum("ij,ij->i", Y, Y)
    d2 = xsq[:, None] + ysq[None, :] - 2.0 * (X @ Y.T)
    np.maximum(d2, 0.0, out=d2)
    d2 *= -gamma
    return np.exp(d2, out=d2)


class _KernelCache:
    """Kernel rows for training: full matrix when it fits, LRU rows above."""

    def __init__(self, X: np.ndarray, gamma: float, full_limit: int = FULL_CACHE_LIMIT,
                 row_budget: int = 256 * 2**20):
        self.X = X
        self.gamma = gamma
        self.n = X.shape[0]
        if self.n <= full_limit:
            self._full = rbf_gram(X, X, gamma)
            self._rows = None
        else:
            self._full = None
            self._sq = np.einsum("ij,ij->i", X, X)
            self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
            self._max_rows = max(2, row_budget // (8 * self.n))

    def row(self, i: int) -> np.ndarray:
        if self._full is not None:
            return self._full[i]
        rows = self._rows
        hit = rows.get(i)
        if hit is not None:
            rows.move_to_end(i)
            return hit
        d2 = self._sq + self._sq[i] - 2.0 * (self.X @ self.X[i])
        np.maximum(d2, 0.0, out=d2)
        d2 *= -self.gamma
        row = np.exp(d2, out=d2)
        rows[i] = row
        if len(rows) > self._max_rows:
            rows.popitem(last=False)
        return row


@dataclass(eq=False)
class SVRModel:
    """A trained model: support vectors, dual coefficients, bias, params.

    support_indices (positions within the training set) are kept in memory
    for KKT certification but are not part of the serialized SVR1 format.
    """

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    params: Hyperparams
    support_indices: np.ndarray | None = None

    def __post_init__(self):
        sv = np.asarray(self.support_vectors, dtype=np.float64)
        coef = np.asarray(self.dual_coefs, dtype=np.float64)
        if sv.ndim != 2 or coef.ndim != 1 or sv.shape[0] != coef.shape[0]:
            raise ValidationError("support vectors and dual coefficients disagree in shape")
        if not (np.all(np.isfinite(sv)) and np.all(np.isfinite(coef)) and np.isfinite(self.bias)):
            raise ValidationError("model parameters must be finite")
        if np.any(np.abs(coef) > self.params.C * (1.0 + 1e-12)):
            raise ValidationError("a dual coefficient exceeds the box bound C")
        if np.any(coef == 0.0):
            raise ValidationError("zero dual coefficients must be dropped from the model")
        drift = 1e-6 * max(1.0, self.params.C) * np.sqrt(max(coef.shape[0], 1))
        if abs(float(coef.sum())) > drift:
            raise ValidationError("dual coefficients violate the sum-to-zero constraint")
        self.support_vectors = sv
        self.dual_coefs = coef

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]

    @property
    def n_sv(self) -> int:
        return self.support_vectors.shape[0]


def svr_predict(model: SVRModel, x) -> float:
    """f(x) = sum_i beta_i k(sv_i, x) + bias."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.dim:
        raise ValidationError(f"input length {x.shape} does not match model dim {model.dim}")
    if model.n_sv == 0:
        return float(model.bias)
    diff = model.support_vectors - x
    d2 = np.einsum("ij,ij->i", diff, diff)
    k = np.exp(-model.params.gamma * d2)
    return float(model.dual_coefs @ k + model.bias)


def svr_predict_batch(model: SVRModel, X) -> np.ndarray:
    """Row-wise predictions; identical to calling svr_predict per row."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError("expected a 2-D matrix of inputs")
    return np.array([svr_predict(model, row) for row in X])


def svr_train(
    X,
    y,
    params: Hyperparams,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SVRModel:
    """Train epsilon-SVR by SMO until the maximal pair violation is <= tol.

    Raises ConvergenceError (carrying the residual violation) if max_iter
    pair updates are exhausted first.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValidationError(f"bad training shapes: X {X.shape}, y {y.shape}")
    n = y.shape[0]
    if n < 1:
        raise ValidationError("need at least one training point")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValidationError("training data must be finite")
    if not tol > 0:
        raise ValidationError(f"tol must be positive, got {tol}")

    C, eps = params.C, params.epsilon

    # Identical targets: the constant model is optimal and needs no solve.
    if np.ptp(y) == 0.0:
        return SVRModel(
            support_vectors=np.zeros((0, X.shape[1])),
            dual_coefs=np.zeros(0),
            bias=float(y[0]),
            params=params,
            support_indices=np.zeros(0, dtype=np.int64),
        )

    cache = _KernelCache(X, params.gamma)
    beta = np.zeros(n)
    g = -y.copy()  # g_i = (K beta)_i - y_i, maintained incrementally

    # Subgradient adjustments for moving beta_i up or down, +/-inf when the
    # corresponding box bound blocks the move.
    adj_up = np.full(n, eps)
    adj_dn = np.full(n, -eps)

    def refresh(idx: int) -> None:
        b = beta[idx]
        adj_up[idx] = np.inf if b >= C else (eps if b >= 0.0 else -eps)
        adj_dn[idx] = -np.inf if b <= -C else (eps if b > 0.0 else -eps)

    up_vals = np.empty(n)
    dn_vals = np.empty(n)
    scratch = np.empty(n)

    iterations = 0
    while True:
        np.add(g, adj_up, out=up_vals)
        np.add(g, adj_dn, out=dn_vals)
        i = int(np.argmin(up_vals))
        j = int(np.argmax(dn_vals))
        viol = dn_vals[j] - up_vals[i]
        if not viol > tol:
            break
        if iterations >= max_iter:
            raise ConvergenceError(violation=float(viol), iterations=max_iter)
        iterations += 1

        ki = cache.row(i)
        kj = cache.row(j)
        eta = ki[i] + kj[j] - 2.0 * ki[j]
        step = viol / eta if eta > 1e-12 else np.inf

        cap_box_i = C - beta[i]
        cap_box_j = beta[j] + C
        cap_zero_i = -beta[i] if beta[i] < 0.0 else np.inf
        cap_zero_j = beta[j] if beta[j] > 0.0 else np.inf
        lam = min(step, cap_box_i, cap_box_j, cap_zero_i, cap_zero_j)

        # Land exactly on bounds and zero crossings so beta values stay
        # exactly classifiable for the KKT bookkeeping.
        if lam == cap_box_i:
            beta[i] = C
        elif lam == cap_zero_i:
            beta[i] = 0.0
        else:
            beta[i] += lam
        if lam == cap_box_j:
            beta[j] = -C
        elif lam == cap_zero_j:
            beta[j] = 0.0
        else:
            beta[j] -= lam

        np.subtract(ki, kj, out=scratch)
        scratch *= lam
        g += scratch
        refresh(i)
        refresh(j)

    bias = _bias_from_duals(g, beta, C, eps)
    sv_mask = beta != 0.0
    return SVRModel(
        support_vectors=X[sv_mask].copy(),
        dual_coefs=beta[sv_mask].copy(),
        bias=bias,
        params=params,
        support_indices=np.flatnonzero(sv_mask),
    )


def _bias_from_duals(g, beta, C: float, eps: float) -> float:
    """Midpoint of the KKT-feasible bias interval, with g = K beta - y.

    The bias is unique only when a free support vector exists; otherwise any
    value in an interval is optimal, so the model pins the midpoint. Bound
    and zero membership is classified with a small relative tolerance
    (BOUND_REL_TOL) so that two solvers agreeing on beta to ~1e-9 pick the
    same bias instead of flipping on one-ulp differences.
    """
    bound_tol = BOUND_REL_TOL * C
    zero_tol = BOUND_REL_TOL * max(C, 1.0)
    positive = beta > zero_tol
    negative = beta < -zero_tol
    up = np.where(beta >= C - bound_tol, np.inf, g + np.where(negative, -eps, eps))
    dn = np.where(beta <= -C + bound_tol, -np.inf, g + np.where(positive, eps, -eps))
    lo = float(np.min(up))
    hi = float(np.max(dn))
    if np.isinf(lo) and np.isinf(hi):
        return 0.0
    if np.isinf(lo):
        return -hi
    if np.isinf(hi):
        return -lo
    return -0.5 * (lo + hi)


def dual_objective(X, y, params: Hyperparams, betas) -> float:
    """Value of the SVR dual at `betas`; oracle support for tests.

    Requires feasibility: sum(betas) = 0 and |beta_i| <= C.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    betas = np.asarray(betas, dtype=np.float64)
    if betas.shape != y.shape:
        raise ValidationError(f"got {betas.shape[0]} betas for {y.shape[0]} points")
    if np.any(np.abs(betas) > params.C * (1.0 + 1e-12)):
        raise ValidationError("box constraint |beta_i| <= C violated")
    if abs(float(betas.sum())) > 1e-8 * max(1.0, params.C) * max(1.0, np.sqrt(len(betas))):
        raise ValidationError("equality constraint sum(beta) = 0 violated")
    K = rbf_gram(X, X, params.gamma)
    return float(y @ betas - 0.5 * betas @ K @ betas - params.epsilon * np.abs(betas).sum())


@dataclass(frozen=True)
class KKTReport:
    """Worst per-point KKT violation plus the equality-constraint residual."""

    max_violation: float
    beta_sum: float
    n_support: int

    def passes(self, tol: float) -> bool:
        drift = 1e-9 * max(1.0, np.sqrt(max(self.n_support, 1)))
        return self.max_violation <= tol and abs(self.beta_sum) <= drift


def kkt_violations(X, y, betas, bias: float, params: Hyperparams) -> np.ndarray:
    """Per-point violation of the epsilon-SVR KKT conditions.

    With e_i = f(x_i) - y_i: beta_i = 0 needs |e_i| <= eps; an interior
    positive (negative) beta needs e_i = -eps (+eps); beta at +C (-C) needs
    e_i <= -eps (>= +eps).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    betas = np.asarray(betas, dtype=np.float64)
    C, eps = params.C, params.epsilon
    f = rbf_gram(X, X, params.gamma) @ betas + bias
    e = f - y

    viol = np.zeros_like(e)
    at_zero = betas == 0.0
    at_up = betas >= C
    at_dn = betas <= -C
    int_pos = (betas > 0.0) & ~at_up
    int_neg = (betas < 0.0) & ~at_dn
    viol[at_zero] = np.maximum(0.0, np.abs(e[at_zero]) - eps)
    viol[int_pos] = np.abs(e[int_pos] + eps)
    viol[int_neg] = np.abs(e[int_neg] - eps)
    viol[at_up] = np.maximum(0.0, e[at_up] + eps)
    viol[at_dn] = np.maximum(0.0, eps - e[at_dn])
    return viol


def check_kkt(model: SVRModel, X, y) -> KKTReport:
    """Certify a trained model against its full training set."""
    if model.support_indices is None:
        raise ValidationError(
            "model has no support indices (loaded from file?); use kkt_violations directly"
        )
    y = np.asarray(y, dtype=np.float64)
    betas = np.zeros(y.shape[0])
    betas[model.support_indices] = model.dual_coefs
    viol = kkt_violations(X, y, betas, model.bias, model.params)
    return KKTReport(
        max_violation=float(viol.max()) if viol.size else 0.0,
        beta_sum=float(betas.sum()),
        n_support=model.n_sv,
    )


@dataclass(frozen=True)
class GridPoint:
    params: Hyperparams
    mean_score: float
    fold_scores: tuple[float, ...]


@dataclass(frozen=True)
class CVResult:
    """Scores for every grid entry plus the winning hyperparameters."""

    grid: tuple[GridPoint, ...]
    best: Hyperparams
    warnings: tuple[str, ...]


def _score_fold(X, y, folds, fold, params, tol, max_iter, score):
    train = folds != fold
    model = svr_train(X[train], y[train], params, tol=tol, max_iter=max_iter)
    held_y = y[~train]
    preds = svr_predict_batch(model, X[~train])
    if score == "neg_mse":
        return -float(np.mean((preds - held_y) ** 2)), None
    if held_y.size < 2:
        return 0.0, "fold has fewer than 2 points, scored 0"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConstantInputWarning)
        r = pearson(preds, held_y)
    if any(issubclass(w.category, ConstantInputWarning) for w in caught):
        return r, "constant input in fold, scored 0"
    return r, None


_GRID_DATA = None


def _grid_worker_init(X, y, folds, tol, max_iter, score):
    global _GRID_DATA
    _GRID_DATA = (X, y, folds, tol, max_iter, score)


def _grid_worker_cell(task):
    gi, fold, c, eps, gamma = task
    X, y, folds, tol, max_iter, score = _GRID_DATA
    value, warn = _score_fold(X, y, folds, fold, Hyperparams(c, eps, gamma), tol, max_iter, score)
    return gi, fold, value, warn


def grid_search(
    X,
    y,
    grid: Sequence[Hyperparams],
    k: int,
    seed: int,
    score: str = "pearson",
    jobs: int = 1,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> CVResult:
    """k-fold cross validation over a hyperparameter grid.

    Folds come from corpus.kfold_assign(len(y), k, seed). The winner is the
    entry with the highest mean fold score; ties keep the earliest grid
    entry. Cells may be evaluated in worker processes (jobs > 1) without
    changing any output value.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    grid = list(grid)
    if not grid:
        raise ValidationError("hyperparameter grid is empty")
    if score not in ("pearson", "neg_mse"):
        raise ValidationError(f"unknown CV objective {score!r}")
    n = y.shape[0]
    if n < k:
        raise ValidationError(f"need at least k={k} points, got {n}")
    folds = kfold_assign(n, k, seed)

    cells = [(gi, fold) for gi in range(len(grid)) for fold in range(k)]
    results: dict[tuple[int, int], tuple[float, str | None]] = {}
    if jobs and jobs > 1:
        tasks = [(gi, fold, grid[gi].C, grid[gi].epsilon, grid[gi].gamma) for gi, fold in cells]
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(
            max_workers=jobs,
            mp_context=ctx,
            initializer=_grid_worker_init,
            initargs=(X, y, folds, tol, max_iter, score),
        ) as pool:
            chunk = max(1, len(tasks) // (4 * jobs))
            for gi, fold, value, warn in pool.map(_grid_worker_cell, tasks, chunksize=chunk):
                results[(gi, fold)] = (value, warn)
    else:
        for gi, fold in cells:
            results[(gi, fold)] = _score_fold(X, y, folds, fold, grid[gi], tol, max_iter, score)

    points = []
    warns = []
    for gi, params in enumerate(grid):
        fold_scores = []
        for fold in range(k):
            value, warn = results[(gi, fold)]
            fold_scores.append(value)
            if warn:
                warns.append(
                    f"C={params.C} epsilon={params.epsilon} gamma={params.gamma} "
                    f"fold={fold}: {warn}"
                )
        points.append(GridPoint(params, sum(fold_scores) / k, tuple(fold_scores)))

    best = points[0]
    for point in points[1:]:
        if point.mean_score > best.mean_score:
            best = point
    return CVResult(grid=tuple(points), best=best.params, warnings=tuple(warns))


def save_model(model: SVRModel, path) -> None:
    """Serialize as SVR1 (little-endian): header then (beta, vector) records."""
    header = _SVR_HEADER.pack(
        SVR1_MAGIC,
        model.dim,
        model.n_sv,
        model.params.C,
        model.params.epsilon,
        model.params.gamma,
        model.bias,
    )
    if model.n_sv:
        body = np.hstack([model.dual_coefs[:, None], model.support_vectors]).astype("<f8")
        payload = header + body.tobytes()
    else:
        payload = header
    Path(path).write_bytes(payload)


def load_model(path) -> SVRModel:
    """Read an SVR1 file; the exact inverse of save_model."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _SVR_HEADER.size:
        raise EmbeddingFormatError(f"{path}: truncated model header")
    magic, dim, n_sv, c, eps, gamma, bias = _SVR_HEADER.unpack_from(data, 0)
    if magic != SVR1_MAGIC:
        raise EmbeddingFormatError(f"{path}: bad magic {magic!r}, expected {SVR1_MAGIC!r}")
    expected = _SVR_HEADER.size + n_sv * 8 * (dim + 1)
    if len(data) != expected:
        raise EmbeddingFormatError(f"{path}: expected {expected} bytes, found {len(data)}")
    if n_sv:
        body = np.frombuffer(data, dtype="<f8", offset=_SVR_HEADER.size).reshape(n_sv, dim + 1)
        coefs = body[:, 0].copy()
        svs = body[:, 1:].copy()
    else:
        coefs = np.zeros(0)
        svs = np.zeros((0, dim))
    return SVRModel(
        support_vectors=svs,
        dual_coefs=coefs,
        bias=bias,
        params=Hyperparams(c, eps, gamma),
    )
