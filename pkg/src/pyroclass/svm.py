"""Soft-margin kernel SVM trained by sequential minimal optimization.

The trainer maximizes the standard dual
    W(a) = sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
subject to 0 <= a_i <= C and sum_i a_i y_i = 0, by repeatedly solving the
two-variable subproblem analytically. Working pairs are chosen
deterministically: the outer loop alternates full sweeps with sweeps over
non-bound points, and each examined point is paired with the partner
maximizing the bias-free error difference. Convergence is the two-threshold
criterion: with F_i = g_i - y_i (g is the decision value without bias), the
optimality gap max_{I_low} F - min_{I_up} F must close to within the
tolerance, which bounds every point's KKT violation once the bias is set.
"""

from __future__ import annotations

import struct
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from ._binio import expect_magic, read_exact, write_header
from .dataset import LabeledDataset
from .errors import DataError, TrainingError, UsageError
from .kernels import KernelSpec, kernel_from_tag

SVMM_MAGIC = b"SVMM"
SVMM_VERSION = 1

# Multipliers below this are treated as zero when extracting support vectors.
ALPHA_DROP = 1e-9

_TAG_IDS = {"linear": 0, "polynomial": 1, "gaussian": 2, "sigmoid": 3}
_IDS_TAG = {v: k for k, v in _TAG_IDS.items()}


@dataclass(frozen=True)
class SvmConfig:
    """Training knobs for the SMO solver.

    max_iter is a hard cap on two-variable updates; None means 1000 * n.
    max_passes counts consecutive sweeps without an update before giving up.
    gram_budget_bytes bounds the kernel cache: the full Gram matrix is
    materialized when it fits, otherwise rows are computed on demand and
    kept in an LRU cache within the budget.
    """

    kernel: KernelSpec
    C: float
    kkt_tol: float = 1e-3
    eps: float = 1e-12
    max_passes: int = 5
    max_iter: Optional[int] = None
    gram_budget_bytes: int = 2 << 30

    def __post_init__(self):
        if not self.C > 0:
            raise UsageError(f"C must be > 0, got {self.C}")
        if not self.kkt_tol > 0:
            raise UsageError(f"kkt_tol must be > 0, got {self.kkt_tol}")
        if not self.eps > 0:
            raise UsageError(f"eps must be > 0, got {self.eps}")
        if self.max_passes < 1:
            raise UsageError(f"max_passes must be >= 1, got {self.max_passes}")
        if self.max_iter is not None and self.max_iter < 1:
            raise UsageError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True, eq=False)
class SvmModel:
    """A trained classifier: f(x) = sum_i dual_coefs[i] K(sv_i, x) + bias.

    dual_coefs holds the signed products a_i y_i for the retained support
    vectors. converged=False flags a model returned at an iteration cap;
    it is still usable for prediction.
    """

    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    kernel: KernelSpec
    iterations: int = 0
    objective: float = 0.0
    converged: bool = True

    def __post_init__(self):
        sv, coefs = self.support_vectors, self.dual_coefs
        if sv.ndim != 2 or coefs.ndim != 1 or sv.shape[0] != coefs.shape[0]:
            raise DataError(f"support vectors {sv.shape} and dual coefs "
                            f"{coefs.shape} are inconsistent")
        if not np.isfinite(self.bias):
            raise DataError(f"bias must be finite, got {self.bias}")
        m = coefs.shape[0]
        if m:
            if not np.all(np.isfinite(coefs)):
                raise DataError("dual coefs must be finite")
            if np.any(coefs == 0.0):
                raise DataError("zero dual coefs must be dropped")
            # equality constraint sum a_i y_i = 0, with max|coef| <= C
            # standing in for the box bound; the ALPHA_DROP term covers
            # the sum shift from dropping near-zero multipliers
            tol = 1e-6 * float(np.max(np.abs(coefs))) * m + ALPHA_DROP * m
            if abs(float(np.add.reduce(coefs))) > tol:
                raise DataError("dual coefs violate the equality constraint")

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]


class _FullGram:
    """Kernel provider backed by the fully materialized Gram matrix."""

    def __init__(self, spec: KernelSpec, X: np.ndarray):
        self.G = kernels.gram(spec, X)

    def row(self, i: int) -> np.ndarray:
        return self.G[i]


class _RowCacheGram:
    """Kernel provider computing Gram rows on demand with LRU eviction.

    Rows come from the same tiled primitive as the full matrix, so both
    providers return identical bits.
    """

    def __init__(self, spec: KernelSpec, X: np.ndarray, max_rows: int):
        self.spec = spec
        self.X = X
        self.max_rows = max(2, max_rows)
        self._cache: OrderedDict = OrderedDict()

    def row(self, i: int) -> np.ndarray:
        cached = self._cache.get(i)
        if cached is not None:
            self._cache.move_to_end(i)
            return cached
        r = kernels.gram_cross(self.spec, self.X[i:i + 1], self.X)[0]
        self._cache[i] = r
        while len(self._cache) > self.max_rows:
            self._cache.popitem(last=False)
        return r


def _make_provider(spec: KernelSpec, X: np.ndarray, budget: int):
    n = X.shape[0]
    if n * n * 8 <= budget:
        return _FullGram(spec, X)
    return _RowCacheGram(spec, X, budget // max(1, n * 8))


def train_smo(ds: LabeledDataset, cfg: SvmConfig) -> SvmModel:
    """Fit the soft-margin dual on a two-class dataset.

    Deterministic given dataset order: no randomized working-set choice.
    If the iteration cap is reached first, the model comes back flagged
    (converged=False) but remains usable.
    """
    X = np.ascontiguousarray(ds.features, dtype=np.float64)
    y = ds.labels.astype(np.float64)
    n = X.shape[0]
    if n < 2:
        raise TrainingError(f"need at least 2 training rows, got {n}")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise TrainingError("training data contains a single class; "
                            "both +1 and -1 labels are required")

    C = float(cfg.C)
    tau = cfg.kkt_tol / 2.0  # internal slack; final KKT holds at kkt_tol
    eps = cfg.eps
    max_iter = cfg.max_iter if cfg.max_iter is not None else 1000 * n
    provider = _make_provider(cfg.kernel, X, cfg.gram_budget_bytes)

    alpha = np.zeros(n, dtype=np.float64)
    F = -y.copy()  # bias-free errors: F_i = g_i - y_i, g starts at 0
    steps = 0

    def thresholds() -> tuple[float, float]:
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        b_hi = float(np.min(F[up])) if np.any(up) else np.inf
        b_lo = float(np.max(F[low])) if np.any(low) else -np.inf
        return b_lo, b_hi

    def take_step(i1: int, i2: int) -> bool:
        nonlocal steps, F
        if i1 == i2 or i1 < 0:
            return False
        a1, a2 = float(alpha[i1]), float(alpha[i2])
        y1, y2 = float(y[i1]), float(y[i2])
        F1, F2 = float(F[i1]), float(F[i2])
        s = y1 * y2
        if s < 0:
            L, H = max(0.0, a2 - a1), min(C, C + a2 - a1)
        else:
            L, H = max(0.0, a1 + a2 - C), min(C, a1 + a2)
        if L >= H:
            return False
        row1 = provider.row(i1)
        row2 = provider.row(i2)
        k11, k22, k12 = row1[i1], row2[i2], row1[i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2n = a2 + y2 * (F1 - F2) / eta
            a2n = min(max(a2n, L), H)
        else:
            # curvature is flat or negative along the constraint line; the
            # maximum sits at an endpoint. Objective change for a move t:
            # dW(t) = y2 (F1 - F2) t - eta t^2 / 2
            tL, tH = L - a2, H - a2
            dWL = y2 * (F1 - F2) * tL - 0.5 * eta * tL * tL
            dWH = y2 * (F1 - F2) * tH - 0.5 * eta * tH * tH
            if dWL > dWH + eps:
                a2n = L
            elif dWH > dWL + eps:
                a2n = H
            else:
                return False
        if a2n < 1e-10 * C:
            a2n = 0.0
        elif a2n > (1.0 - 1e-10) * C:
            a2n = C
        if abs(a2n - a2) < eps * (a2n + a2 + eps):
            return False
        a1n = a1 + s * (a2 - a2n)
        if a1n < 1e-10 * C:
            a1n = 0.0
        elif a1n > (1.0 - 1e-10) * C:
            a1n = C
        F += y1 * (a1n - a1) * row1 + y2 * (a2n - a2) * row2
        alpha[i1] = a1n
        alpha[i2] = a2n
        steps += 1
        return True

    def examine(i2: int) -> bool:
        a2 = float(alpha[i2])
        y2 = float(y[i2])
        F2 = float(F[i2])
        b_lo, b_hi = thresholds()
        in_up = (y2 > 0 and a2 < C) or (y2 < 0 and a2 > 0)
        in_low = (y2 > 0 and a2 > 0) or (y2 < 0 and a2 < C)
        viol_up = (b_lo - F2) if (in_up and b_lo - F2 > 2.0 * tau) else -np.inf
        viol_low = (F2 - b_hi) if (in_low and F2 - b_hi > 2.0 * tau) else -np.inf
        if viol_up == -np.inf and viol_low == -np.inf:
            return False
        low_mask = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        up_mask = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        if viol_up >= viol_low:
            # partner with the largest error difference from the low set
            cand = np.where(low_mask, F, -np.inf)
            i1 = int(np.argmax(cand))
            if not np.isfinite(cand[i1]):
                i1 = -1
        else:
            cand = np.where(up_mask, F, np.inf)
            i1 = int(np.argmin(cand))
            if not np.isfinite(cand[i1]):
                i1 = -1
        if take_step(i1, i2):
            return True
        # deterministic fallback: non-bound partners in index order, then all
        for j in np.nonzero((alpha > 0) & (alpha < C))[0]:
            if take_step(int(j), i2):
                return True
        for j in range(n):
            if take_step(j, i2):
                return True
        return False

    examine_all = True
    stall = 0
    converged = False
    while steps < max_iter and stall < cfg.max_passes:
        b_lo, b_hi = thresholds()
        if b_lo - b_hi <= 2.0 * tau:
            converged = True
            break
        if examine_all:
            sweep = range(n)
        else:
            sweep = np.nonzero((alpha > 0) & (alpha < C))[0]
        changed = 0
        for i2 in sweep:
            if steps >= max_iter:
                break
            if examine(int(i2)):
                changed += 1
        if examine_all:
            if changed == 0:
                stall += 1
            else:
                stall = 0
                examine_all = False
        elif changed == 0:
            examine_all = True
    if not converged:
        b_lo, b_hi = thresholds()
        converged = b_lo - b_hi <= 2.0 * tau

    interior = (alpha > ALPHA_DROP) & (alpha < C - ALPHA_DROP)
    if np.any(interior):
        # at optimality y_i f(x_i) = 1 on interior vectors, i.e. b = -F_i
        bias = float(np.mean(-F[interior]))
    else:
        b_lo, b_hi = thresholds()
        if np.isinf(b_lo) and np.isinf(b_hi):
            bias = 0.0
        elif np.isinf(b_lo):
            bias = -b_hi
        elif np.isinf(b_hi):
            bias = -b_lo
        else:
            bias = -(b_lo + b_hi) / 2.0

    ay = alpha * y
    if isinstance(provider, _FullGram):
        g = np.add.reduce(provider.G * ay[None, :], axis=-1)
    else:
        g = F + y  # error-cache estimate; exact recomputation would redo
        # a full Gram pass in row-cache mode
    objective = float(np.add.reduce(alpha) - 0.5 * np.add.reduce(ay * g))

    keep = alpha > ALPHA_DROP
    return SvmModel(
        support_vectors=np.ascontiguousarray(X[keep]),
        dual_coefs=np.ascontiguousarray(ay[keep]),
        bias=bias,
        kernel=cfg.kernel,
        iterations=steps,
        objective=objective,
        converged=converged,
    )


def dual_objective(alphas, labels, gram) -> float:
    """W(a) for given multipliers, labels, and a precomputed Gram matrix."""
    a = np.asarray(alphas, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    G = np.asarray(gram, dtype=np.float64)
    if a.ndim != 1 or y.shape != a.shape:
        raise DataError(f"alphas {a.shape} and labels {y.shape} must be "
                        f"equal-length vectors")
    if G.shape != (a.shape[0], a.shape[0]):
        raise DataError(f"gram shape {G.shape} does not match "
                        f"{a.shape[0]} points")
    ay = a * y
    g = np.add.reduce(G * ay[None, :], axis=-1)
    return float(np.add.reduce(a) - 0.5 * np.add.reduce(ay * g))


def _check_features(model: SvmModel, d: int) -> None:
    if d != model.n_features:
        raise DataError(f"dimension mismatch: model was trained with "
                        f"{model.n_features} features, input has {d}")


def decision_many(model: SvmModel, X) -> np.ndarray:
    """Decision values for each row of X."""
    Xa = np.ascontiguousarray(X, dtype=np.float64)
    if Xa.ndim != 2:
        raise DataError(f"X must be 2-D, got shape {Xa.shape}")
    _check_features(model, Xa.shape[1])
    if model.support_vectors.shape[0] == 0:
        return np.full(Xa.shape[0], model.bias, dtype=np.float64)
    K = kernels.gram_cross(model.kernel, Xa, model.support_vectors)
    return np.add.reduce(K * model.dual_coefs[None, :], axis=-1) + model.bias


def decision(model: SvmModel, x) -> float:
    """Decision value f(x) for a single feature row."""
    xa = np.ascontiguousarray(x, dtype=np.float64)
    if xa.ndim != 1:
        raise DataError(f"x must be a 1-D feature row, got shape {xa.shape}")
    return float(decision_many(model, xa[None, :])[0])


def predict_many(model: SvmModel, X) -> np.ndarray:
    """Labels for each row of X; a decision value of exactly 0 maps to +1."""
    f = decision_many(model, X)
    return np.where(f >= 0.0, 1, -1).astype(np.int64)


def predict(model: SvmModel, x) -> int:
    return 1 if decision(model, x) >= 0.0 else -1


def save_model(model: SvmModel, path) -> None:
    """Write a model in the SVMM format.

    Layout (little-endian): magic "SVMM"; u32 version = 1; u8 kernel tag id
    (0 linear, 1 polynomial, 2 gaussian, 3 sigmoid); u32 parameter count;
    f64 parameters in each kernel's declared order; u64 m; u64 d; f64 bias;
    f64 dual_coefs[m]; f64 support vectors, m x d row-major. Training
    diagnostics are not persisted.
    """
    params = [float(p) for p in model.kernel.params]
    m, d = model.support_vectors.shape
    with open(path, "wb") as f:
        write_header(f, SVMM_MAGIC, SVMM_VERSION)
        f.write(struct.pack("<BI", _TAG_IDS[model.kernel.tag], len(params)))
        f.write(struct.pack(f"<{len(params)}d", *params))
        f.write(struct.pack("<QQd", m, d, model.bias))
        f.write(np.ascontiguousarray(model.dual_coefs, dtype="<f8").tobytes())
        f.write(np.ascontiguousarray(model.support_vectors,
                                     dtype="<f8").tobytes())


def load_model(path) -> SvmModel:
    """Read an SVMM file written by save_model; bit-exact round-trip."""
    p = str(path)
    try:
        f = open(path, "rb")
    except FileNotFoundError:
        raise DataError(f"{p}: file not found") from None
    with f:
        expect_magic(f, SVMM_MAGIC, SVMM_VERSION, p)
        tag_id, n_params = struct.unpack(
            "<BI", read_exact(f, 5, p, "kernel header"))
        if tag_id not in _IDS_TAG:
            raise DataError(f"{p}: unknown kernel tag id {tag_id}")
        params = struct.unpack(
            f"<{n_params}d", read_exact(f, 8 * n_params, p,
                                        "kernel parameters"))
        try:
            kernel = kernel_from_tag(_IDS_TAG[tag_id], params)
        except (TypeError, ValueError):
            raise DataError(f"{p}: malformed parameters for kernel "
                            f"{_IDS_TAG[tag_id]!r}") from None
        m, d, bias = struct.unpack("<QQd", read_exact(f, 24, p,
                                                      "model header"))
        coefs = np.frombuffer(read_exact(f, 8 * m, p, "dual coefficients"),
                              dtype="<f8")
        sv = np.frombuffer(read_exact(f, 8 * m * d, p, "support vectors"),
                           dtype="<f8").reshape(m, d)
        if f.read(1):
            raise DataError(f"{p}: trailing bytes after support vectors")
    return SvmModel(support_vectors=sv, dual_coefs=coefs, bias=bias,
                    kernel=kernel)
