"""L2-regularized linear SVMs trained by dual coordinate descent.

The primal problem per binary classifier is

    min_w  0.5 * w.w  +  C * sum_i loss(y_i * (w . x_i))

with loss either squared hinge, max(0, 1 - m)^2 (the default), or hinge,
max(0, 1 - m). Training runs in the dual: one pass (epoch) visits every
example in a seeded random permutation and applies the closed-form
single-variable update, maintaining w = sum_i alpha_i y_i x_i
incrementally. The squared hinge dual is box-free with a diagonal shift of
1/(2C); the hinge dual clips alpha to [0, C]. Convergence is declared when
the largest projected-gradient violation seen in an epoch drops to tol.

Multiclass is one-vs-rest: one weight vector per catalog label, prediction
by score argmax with ties going to the smallest label id. A bias is
implemented as an appended constant feature (value bias_scale) and is
regularized along with the rest of w.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from .corpus import LabelCatalog
from .features import SparseVector

log = logging.getLogger(__name__)

LOSSES = ("squared_hinge", "hinge")

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a speedup, not a contract
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(f):
            return f

        return deco


@dataclass(frozen=True)
class TrainConfig:
    """Solver settings; defaults mirror the liblinear-style conventions."""

    c: float = 1.0
    loss: str = "squared_hinge"
    tol: float = 1e-4
    max_epochs: int = 1000
    shuffle_seed: int = 0
    fit_bias: bool = True
    bias_scale: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"C must be positive, got {self.c}")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if not self.bias_scale > 0:
            raise ValueError(f"bias_scale must be positive, got {self.bias_scale}")


@dataclass
class EpochStats:
    """Objective values logged after one epoch (history is opt-in)."""

    epoch: int
    max_violation: float
    primal: float
    dual: float

    @property
    def gap(self) -> float:
        return self.primal - self.dual


@dataclass
class TrainInfo:
    epochs: int
    converged: bool
    final_violation: float


@njit(cache=True, nogil=True)
def _cd_epoch(data, indices, indptr, y, qdiag, alpha, w, upper, diag, order):
    # One dual coordinate descent sweep in the given visiting order.
    # Returns the largest |projected gradient| seen before each update.
    max_viol = 0.0
    for t in range(order.shape[0]):
        i = order[t]
        lo = indptr[i]
        hi = indptr[i + 1]
        yi = y[i]
        g = 0.0
        for p in range(lo, hi):
            g += data[p] * w[indices[p]]
        g = yi * g - 1.0 + diag * alpha[i]

        a = alpha[i]
        if a <= 0.0:
            pg = g if g < 0.0 else 0.0
        elif a >= upper:
            pg = g if g > 0.0 else 0.0
        else:
            pg = g

        if pg != 0.0:
            v = -pg if pg < 0.0 else pg
            if v > max_viol:
                max_viol = v
            q = qdiag[i]
            if q > 0.0:
                na = a - g / q
                if na < 0.0:
                    na = 0.0
                elif na > upper:
                    na = upper
                if na != a:
                    delta = (na - a) * yi
                    for p in range(lo, hi):
                        w[indices[p]] += delta * data[p]
                    alpha[i] = na
            else:
                # all-zero row without bias under hinge loss: the dual is
                # linear in alpha_i, so jump straight to the active bound
                alpha[i] = upper if g < 0.0 else 0.0
    return max_viol


class _Csr:
    """Row-major sparse matrix in raw-array form, ready for the kernel."""

    __slots__ = ("data", "indices", "indptr", "n_rows", "n_cols")

    def __init__(self, data, indices, indptr, n_cols):
        self.data = data
        self.indices = indices
        self.indptr = indptr
        self.n_rows = len(indptr) - 1
        self.n_cols = n_cols

    def row_norms_sq(self) -> np.ndarray:
        sq = self.data * self.data
        out = np.zeros(self.n_rows, dtype=np.float64)
        rows = np.repeat(
            np.arange(self.n_rows), np.diff(self.indptr).astype(np.int64)
        )
        np.add.at(out, rows, sq)
        return out

    def dot(self, w: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n_rows, dtype=np.float64)
        rows = np.repeat(
            np.arange(self.n_rows), np.diff(self.indptr).astype(np.int64)
        )
        np.add.at(out, rows, self.data * w[self.indices])
        return out


def _build_csr(
    X: Sequence[SparseVector],
    n_features: Optional[int],
    fit_bias: bool,
    bias_scale: float,
) -> _Csr:
    if n_features is None:
        n_features = 0
        for x in X:
            if x.nnz:
                n_features = max(n_features, int(x.indices[-1]) + 1)
    else:
        for x in X:
            if x.nnz and int(x.indices[-1]) >= n_features:
                raise ValueError(
                    f"feature index {int(x.indices[-1])} out of range for {n_features} features"
                )
    extra = 1 if fit_bias else 0
    nnz = sum(x.nnz for x in X) + extra * len(X)
    data = np.empty(nnz, dtype=np.float64)
    indices = np.empty(nnz, dtype=np.int64)
    indptr = np.zeros(len(X) + 1, dtype=np.int64)
    pos = 0
    for r, x in enumerate(X):
        k = x.nnz
        data[pos : pos + k] = x.values
        indices[pos : pos + k] = x.indices
        pos += k
        if fit_bias:
            data[pos] = bias_scale
            indices[pos] = n_features
            pos += 1
        indptr[r + 1] = pos
    return _Csr(data, indices, indptr, n_features + extra)


def primal_objective(
    csr: _Csr, y: np.ndarray, w: np.ndarray, c: float, loss: str
) -> float:
    margins = y * csr.dot(w)
    slack = np.maximum(0.0, 1.0 - margins)
    if loss == "squared_hinge":
        penalty = np.sum(slack * slack)
    else:
        penalty = np.sum(slack)
    return 0.5 * float(np.dot(w, w)) + c * float(penalty)


def _dual_objective(alpha: np.ndarray, w: np.ndarray, diag: float) -> float:
    # Value of the dual maximization problem at alpha (equals the primal
    # optimum at the solution, so primal - dual is the optimality gap).
    return float(np.sum(alpha)) - 0.5 * float(np.dot(w, w)) - 0.5 * diag * float(
        np.dot(alpha, alpha)
    )


def _solve(
    csr: _Csr,
    y: np.ndarray,
    cfg: TrainConfig,
    history: Optional[list] = None,
) -> tuple[np.ndarray, TrainInfo]:
    n = csr.n_rows
    if cfg.loss == "squared_hinge":
        upper, diag = np.inf, 1.0 / (2.0 * cfg.c)
    else:
        upper, diag = cfg.c, 0.0
    qdiag = csr.row_norms_sq() + diag
    alpha = np.zeros(n, dtype=np.float64)
    w = np.zeros(csr.n_cols, dtype=np.float64)
    rng = np.random.default_rng(cfg.shuffle_seed)

    epochs = 0
    viol = np.inf
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(n).astype(np.int64)
        viol = _cd_epoch(
            csr.data, csr.indices, csr.indptr, y, qdiag, alpha, w, upper, diag, order
        )
        epochs = epoch
        if history is not None:
            history.append(
                EpochStats(
                    epoch=epoch,
                    max_violation=float(viol),
                    primal=primal_objective(csr, y, w, cfg.c, cfg.loss),
                    dual=_dual_objective(alpha, w, diag),
                )
            )
        if viol <= cfg.tol:
            break
    converged = viol <= cfg.tol
    if not converged:
        log.warning(
            "dual coordinate descent stopped at max_epochs=%d with violation %.3g > tol %.3g",
            cfg.max_epochs,
            viol,
            cfg.tol,
        )
    return w, TrainInfo(epochs=epochs, converged=converged, final_violation=float(viol))


def _validate_xy(X: Sequence[SparseVector], y) -> np.ndarray:
    if len(X) != len(y):
        raise ValueError(f"got {len(X)} examples but {len(y)} targets")
    if len(X) == 0:
        raise ValueError("need at least one example")
    yarr = np.asarray(y, dtype=np.float64)
    if not np.all(np.isin(yarr, (-1.0, 1.0))):
        raise ValueError("binary targets must be -1 or +1")
    return yarr


def train_binary(
    X: Sequence[SparseVector],
    y: Sequence[int],
    cfg: TrainConfig = TrainConfig(),
    n_features: Optional[int] = None,
    history: Optional[list] = None,
) -> np.ndarray:
    """Train one binary classifier; returns the weight vector.

    When cfg.fit_bias is set the returned vector has the bias weight
    appended as its last entry. Pass a list as ``history`` to receive
    per-epoch EpochStats.
    """
    yarr = _validate_xy(X, y)
    csr = _build_csr(X, n_features, cfg.fit_bias, cfg.bias_scale)
    w, _ = _solve(csr, yarr, cfg, history)
    return w


@dataclass(eq=False)
class LinearModel:
    """One-vs-rest linear classifier over a label catalog."""

    catalog: LabelCatalog
    weights: np.ndarray  # (L, V) feature weights, bias kept separately
    biases: np.ndarray  # (L,) bias weights; zero when fit_bias is off
    c: float
    loss: str
    fit_bias: bool
    bias_scale: float
    fit_info: Optional[list[TrainInfo]] = field(default=None, repr=False)

    def __post_init__(self):
        L = len(self.catalog)
        if self.weights.shape[0] != L or self.biases.shape != (L,):
            raise ValueError("need exactly one weight vector and bias per label")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.biases))):
            raise ValueError("model weights must be finite")

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[1])

    def decision_values(self, x: SparseVector) -> np.ndarray:
        """Per-label scores w_l . x + bias_l * bias_scale."""
        if x.nnz and int(x.indices[-1]) >= self.n_features:
            raise ValueError(
                f"feature index {int(x.indices[-1])} out of range for {self.n_features} features"
            )
        scores = self.weights[:, x.indices] @ x.values
        scores += self.biases * self.bias_scale
        return scores

    def predict(self, x: SparseVector) -> int:
        """Label id with the highest score; ties go to the smallest id."""
        return int(np.argmax(self.decision_values(x)))


def train_multiclass(
    X: Sequence[SparseVector],
    y: Sequence[int],
    catalog: LabelCatalog,
    cfg: TrainConfig = TrainConfig(),
    n_features: Optional[int] = None,
    threads: int = 1,
) -> LinearModel:
    """Train one-vs-rest classifiers, one per catalog label, in catalog order.

    The one-vs-rest problems are independent, so they may run on a thread
    pool; results are assembled in label order either way. A label absent
    from the data still gets a vector (the all-negative solution).
    """
    L = len(catalog)
    if L < 2:
        raise ValueError(f"need at least 2 labels, got {L}")
    if len(X) != len(y):
        raise ValueError(f"got {len(X)} examples but {len(y)} targets")
    if len(X) == 0:
        raise ValueError("need at least one example")
    yarr = np.asarray(y, dtype=np.int64)
    if yarr.size and (yarr.min() < 0 or yarr.max() >= L):
        raise ValueError("label ids must lie in 0..L-1")

    csr = _build_csr(X, n_features, cfg.fit_bias, cfg.bias_scale)
    V = csr.n_cols - (1 if cfg.fit_bias else 0)

    def one(label_id: int) -> tuple[np.ndarray, TrainInfo]:
        ybin = np.where(yarr == label_id, 1.0, -1.0)
        return _solve(csr, ybin, cfg)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(L)))
    else:
        results = [one(l) for l in range(L)]

    weights = np.empty((L, V), dtype=np.float64)
    biases = np.zeros(L, dtype=np.float64)
    infos = []
    for l, (w, info) in enumerate(results):
        weights[l] = w[:V]
        if cfg.fit_bias:
            biases[l] = w[V]
        infos.append(info)
    return LinearModel(
        catalog=catalog,
        weights=weights,
        biases=biases,
        c=cfg.c,
        loss=cfg.loss,
        fit_bias=cfg.fit_bias,
        bias_scale=cfg.bias_scale,
        fit_info=infos,
    )
