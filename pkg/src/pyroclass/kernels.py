"""The four kernels and Gram-matrix construction for the dual solver.

Exactness contract: eval, gram, and gram_cross all route through one
pairwise primitive (broadcast product + np.add.reduce over the feature
axis, computed in memory-bounded tiles), so a Gram entry is bit-identical
to the scalar evaluation of the same pair. BLAS matrix products are
deliberately avoided here: their blocked accumulation order changes with
shape, which would break that equality. For the same reason integer powers
use an explicit multiply chain; np.power's scalar and vector code paths can
round differently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DataError, UsageError

# Upper bound on one broadcast intermediate; tiles never allocate more than
# roughly this many bytes. Tiling cannot change results: reducing over the
# last axis is per-row-pair, so tile boundaries only split independent rows.
TILE_BUDGET_BYTES = 64 << 20


@dataclass(frozen=True)
class LinearKernel:
    """K(x, z) = x . z"""

    tag = "linear"

    @property
    def params(self) -> tuple:
        return ()

    _base = "dot"

    def _transform(self, base: np.ndarray) -> np.ndarray:
        return base


@dataclass(frozen=True)
class PolynomialKernel:
    """K(x, z) = (x . z + offset) ** degree"""

    degree: int
    offset: float = 0.0

    tag = "polynomial"

    def __post_init__(self):
        if isinstance(self.degree, bool) or int(self.degree) != self.degree:
            raise UsageError(f"polynomial degree must be an integer, "
                             f"got {self.degree!r}")
        if self.degree < 1:
            raise UsageError(f"polynomial degree must be >= 1, "
                             f"got {self.degree}")
        if self.offset < 0:
            raise UsageError(f"polynomial offset must be >= 0, "
                             f"got {self.offset}")
        object.__setattr__(self, "degree", int(self.degree))

    @property
    def params(self) -> tuple:
        return (self.degree, self.offset)

    _base = "dot"

    def _transform(self, base: np.ndarray) -> np.ndarray:
        shifted = base + self.offset
        result = shifted
        for _ in range(self.degree - 1):
            result = result * shifted
        return result


@dataclass(frozen=True)
class GaussianKernel:
    """K(x, z) = exp(-gamma * ||x - z||^2), gamma = 1 / (2 sigma^2)"""

    gamma: float

    tag = "gaussian"

    def __post_init__(self):
        if not self.gamma > 0:
            raise UsageError(f"gaussian gamma must be > 0, got {self.gamma}")

    @property
    def params(self) -> tuple:
        return (self.gamma,)

    _base = "sqdist"

    def _transform(self, base: np.ndarray) -> np.ndarray:
        return np.exp(-self.gamma * base)


@dataclass(frozen=True)
class SigmoidKernel:
    """K(x, z) = tanh(slope * (x . z) + offset)"""

    slope: float
    offset: float = 0.0

    tag = "sigmoid"

    @property
    def params(self) -> tuple:
        return (self.slope, self.offset)

    _base = "dot"

    def _transform(self, base: np.ndarray) -> np.ndarray:
        return np.tanh(self.slope * base + self.offset)


KernelSpec = Union[LinearKernel, PolynomialKernel, GaussianKernel,
                   SigmoidKernel]

_TAGS = {cls.tag: cls for cls in
         (LinearKernel, PolynomialKernel, GaussianKernel, SigmoidKernel)}


def kernel_from_tag(tag: str, params) -> KernelSpec:
    """Rebuild a kernel spec from its tag and parameter tuple."""
    if tag not in _TAGS:
        raise DataError(f"unknown kernel tag {tag!r}; "
                        f"expected one of {sorted(_TAGS)}")
    cls = _TAGS[tag]
    if tag == "polynomial":
        degree, offset = params
        return cls(degree=int(degree), offset=float(offset))
    return cls(*map(float, params))


def describe_kernel(spec: KernelSpec) -> str:
    """Human-readable one-liner, e.g. 'gaussian(gamma=0.01)'."""
    if spec.tag == "linear":
        return "linear"
    if spec.tag == "polynomial":
        return f"polynomial(degree={spec.degree},offset={spec.offset:g})"
    if spec.tag == "gaussian":
        return f"gaussian(gamma={spec.gamma:g})"
    return f"sigmoid(slope={spec.slope:g},offset={spec.offset:g})"


def _as_matrix(a, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise DataError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def _pairwise_base(X: np.ndarray, Z: np.ndarray, kind: str) -> np.ndarray:
    """All-pairs dot products or squared distances, tiled.

    Each tile materializes the (rows_x, rows_z, d) broadcast intermediate
    and reduces it over the feature axis with np.add.reduce, the single
    accumulation order every kernel path in this module shares.
    """
    n, d = X.shape
    m = Z.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    max_cells = max(1, TILE_BUDGET_BYTES // (8 * d))
    bj = max(1, min(m, max_cells))
    bi = max(1, max_cells // bj)
    for i0 in range(0, n, bi):
        i1 = min(i0 + bi, n)
        xb = X[i0:i1, None, :]
        for j0 in range(0, m, bj):
            j1 = min(j0 + bj, m)
            zb = Z[None, j0:j1, :]
            if kind == "dot":
                prod = xb * zb
            else:
                prod = xb - zb
                prod *= prod
            out[i0:i1, j0:j1] = np.add.reduce(prod, axis=-1)
    return out


def eval(spec: KernelSpec, x, y) -> float:
    """Evaluate K(x, y) for two feature rows."""
    xa = np.ascontiguousarray(x, dtype=np.float64)
    ya = np.ascontiguousarray(y, dtype=np.float64)
    if xa.ndim != 1 or ya.ndim != 1:
        raise DataError(f"kernel arguments must be 1-D rows, got shapes "
                        f"{xa.shape} and {ya.shape}")
    if xa.shape != ya.shape:
        raise DataError(f"dimension mismatch: x has {xa.shape[0]} features, "
                        f"y has {ya.shape[0]}")
    if xa.shape[0] < 1:
        raise DataError("kernel arguments must have at least one feature")
    base = _pairwise_base(xa[None, :], ya[None, :], spec._base)
    return float(spec._transform(base)[0, 0])


def gram(spec: KernelSpec, X) -> np.ndarray:
    """The n x n matrix G[i][j] = eval(spec, X[i], X[j]).

    Entries are computed for i <= j and mirrored, so the result is exactly
    symmetric.
    """
    Xa = _as_matrix(X, "X")
    n, d = Xa.shape
    if n < 1:
        raise DataError("gram requires at least one row")
    # zeros, not empty: entries below the diagonal stay untouched until the
    # mirror step, and the elementwise transform must not see garbage
    G = np.zeros((n, n), dtype=np.float64)
    max_cells = max(1, TILE_BUDGET_BYTES // (8 * d))
    bj = max(1, min(n, max_cells))
    bi = max(1, max_cells // bj)
    for i0 in range(0, n, bi):
        i1 = min(i0 + bi, n)
        xb = Xa[i0:i1, None, :]
        for j0 in range(0, n, bj):
            j1 = min(j0 + bj, n)
            if j1 <= i0:  # tile lies entirely below the diagonal
                continue
            zb = Xa[None, j0:j1, :]
            if spec._base == "dot":
                prod = xb * zb
            else:
                prod = xb - zb
                prod *= prod
            G[i0:i1, j0:j1] = np.add.reduce(prod, axis=-1)
    G = spec._transform(G)
    for i in range(1, n):
        G[i, :i] = G[:i, i]
    return G


def gram_cross(spec: KernelSpec, X, Z) -> np.ndarray:
    """The n x m matrix G[i][j] = eval(spec, X[i], Z[j])."""
    Xa = _as_matrix(X, "X")
    Za = _as_matrix(Z, "Z")
    if Xa.shape[1] != Za.shape[1]:
        raise DataError(f"dimension mismatch: X has {Xa.shape[1]} features, "
                        f"Z has {Za.shape[1]}")
    return spec._transform(_pairwise_base(Xa, Za, spec._base))
