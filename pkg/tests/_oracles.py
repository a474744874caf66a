"""Independent oracles used to freeze expected values in the test suite.

Each oracle reimplements the quantity under test from first principles,
not via the library code paths, so agreement is evidence rather than
tautology.
"""

from __future__ import annotations

import math

import numpy as np


# ------------------------------------------------------- kernel formulas

def kernel_value(tag: str, params: dict, x, y) -> float:
    """Pairwise kernel value via math-module scalar arithmetic."""
    dot = math.fsum(float(a) * float(b) for a, b in zip(x, y))
    if tag == "linear":
        return dot
    if tag == "polynomial":
        return (dot + params["offset"]) ** params["degree"]
    if tag == "gaussian":
        sq = math.fsum((float(a) - float(b)) ** 2 for a, b in zip(x, y))
        return math.exp(-params["gamma"] * sq)
    if tag == "sigmoid":
        return math.tanh(params["slope"] * dot + params["offset"])
    raise ValueError(tag)


def gram_bruteforce(tag: str, params: dict, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    G = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            G[i, j] = kernel_value(tag, params, X[i], X[j])
    return G


# -------------------------------------------- box+hyperplane projection

def project_feasible(v, y, C: float) -> np.ndarray:
    """Euclidean projection of v onto {0 <= a <= C, sum(a*y) = 0}.

    Exact piecewise-linear solve: a(theta) = clip(v - theta*y, 0, C) and
    g(theta) = sum(y * a(theta)) is non-increasing, linear between the
    2n breakpoints where a coordinate saturates.
    """
    v = np.asarray(v, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    # breakpoints where v_i - theta*y_i hits 0 or C (y_i = +-1)
    bps = np.unique(np.concatenate([(v - 0.0) * y, (v - C) * y]))

    def g(theta):
        return float(np.add.reduce(y * np.clip(v - theta * y, 0.0, C)))

    values = np.array([g(t) for t in bps])
    # with both classes present g(-inf) = C*n_pos > 0 > -C*n_neg = g(+inf)
    below = np.nonzero(values <= 0.0)[0]
    if below.size == 0:
        theta = bps[-1]
    else:
        hi = int(below[0])
        if values[hi] == 0.0 or hi == 0:
            theta = bps[hi]
        else:
            g_lo, g_hi = values[hi - 1], values[hi]
            t_lo, t_hi = bps[hi - 1], bps[hi]
            theta = t_lo + (t_hi - t_lo) * g_lo / (g_lo - g_hi)
    return np.clip(v - theta * y, 0.0, C)


def dual_value(a, y, K) -> float:
    a = np.asarray(a, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    Q = np.asarray(K) * np.outer(y, y)
    return float(a.sum() - 0.5 * a @ Q @ a)


def solve_qp_pga(K, y, C: float, iters: int = 3000,
                 starts: int = 2, seed: int = 0):
    """Projected-gradient ascent on the soft-margin dual.

    Brute-force reference, independent of the trainer. Uses spectral
    (Barzilai-Borwein) step lengths because plain 1/L steps crawl on
    ill-conditioned Gram matrices, best-iterate tracking (the sigmoid
    kernel can make the problem indefinite) and extra random feasible
    starts. Stops a start early once the projected step vanishes.
    Returns (alphas, objective).
    """
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    Q = K * np.outer(y, y)
    eigs = np.linalg.eigvalsh((Q + Q.T) / 2.0)
    L = float(np.max(np.abs(eigs)))
    step0 = 1.0 / max(L, 1e-12)
    step_lo, step_hi = step0 * 1e-8, step0 * 1e8
    rng = np.random.default_rng(seed)
    best_a, best_w = None, -np.inf

    def consider(point):
        nonlocal best_a, best_w
        w = dual_value(point, y, K)
        if w > best_w:
            best_w, best_a = w, point.copy()

    for s in range(max(1, starts)):
        if s == 0:
            a = np.zeros(n)
        else:
            a = project_feasible(rng.uniform(0.0, C, size=n), y, C)
        consider(a)
        grad = 1.0 - Q @ a
        step = step0
        for _ in range(iters):
            move = project_feasible(a + step * grad, y, C) - a
            mm = float(move @ move)
            if mm <= 1e-28 * max(1.0, float(a @ a)):
                # a tiny BB step can masquerade as a fixed point; only
                # stop if the reference step does not move either
                move = project_feasible(a + step0 * grad, y, C) - a
                mm = float(move @ move)
                if mm <= 1e-28 * max(1.0, float(a @ a)):
                    break
            # exact line search along the projected segment keeps the
            # ascent monotone (raw BB iterates can limit-cycle on
            # rank-deficient Grams); slope >= 0 by the projection
            # property, and curve <= 0 means the endpoint is best
            curve = float(move @ (Q @ move))
            slope = float(grad @ move)
            if slope <= 0.0:
                # exactly zero up to rounding at a fixed point
                break
            t = min(1.0, slope / curve) if curve > 0.0 else 1.0
            a = a + t * move
            grad = 1.0 - Q @ a
            step = mm / curve if curve > 0.0 else step_hi
            step = min(max(step, step_lo), step_hi)
            consider(a)
    return best_a, best_w


# ------------------------------------------------ finite-difference grad

def fd_gradient(fun, x0, step: float = 1e-6) -> np.ndarray:
    """Central finite differences of a scalar function of a vector."""
    x0 = np.asarray(x0, dtype=np.float64)
    out = np.empty_like(x0)
    for i in range(x0.size):
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += step
        xm[i] -= step
        out[i] = (fun(xp) - fun(xm)) / (2.0 * step)
    return out


# ------------------------------------------------------- metric formulas

def metrics_from_cm(tp: int, fp: int, fn: int, tn: int) -> dict:
    total = tp + fp + fn + tn
    out = {"accuracy": (tp + tn) / total}
    out["tpr"] = tp / (tp + fn) if tp + fn > 0 else None
    out["fpr"] = fp / (fp + tn) if fp + tn > 0 else None
    out["f1"] = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn > 0 else None
    return out


def roc_sweep(labels, scores):
    """Threshold-sweep ROC by explicit enumeration (independent path)."""
    labels = list(labels)
    scores = list(scores)
    n_pos = sum(1 for v in labels if v == 1)
    n_neg = len(labels) - n_pos
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < len(order):
        j = i
        while j < len(order) and scores[order[j]] == scores[order[i]]:
            if labels[order[j]] == 1:
                tp += 1
            else:
                fp += 1
            j += 1
        points.append((fp / n_neg, tp / n_pos))
        i = j
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    return points


def trapezoid_auc(points) -> float:
    total = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        total += 0.5 * (x1 - x0) * (y0 + y1)
    return total


# ----------------------------------------------------- bilinear reference

def resize_bilinear_reference(pixels: np.ndarray, tw: int,
                              th: int) -> np.ndarray:
    """Per-pixel scalar bilinear resize with the pixel-center mapping."""
    src_h, src_w = pixels.shape[0], pixels.shape[1]
    out = np.zeros((th, tw, 3), dtype=np.uint8)
    for dy in range(th):
        sy = (dy + 0.5) * (src_h / th) - 0.5
        sy = min(max(sy, 0.0), src_h - 1.0)
        y0 = int(math.floor(sy))
        y1 = min(y0 + 1, src_h - 1)
        fy = sy - y0
        for dx in range(tw):
            sx = (dx + 0.5) * (src_w / tw) - 0.5
            sx = min(max(sx, 0.0), src_w - 1.0)
            x0 = int(math.floor(sx))
            x1 = min(x0 + 1, src_w - 1)
            fx = sx - x0
            for c in range(3):
                top = (1 - fx) * pixels[y0, x0, c] + fx * pixels[y0, x1, c]
                bot = (1 - fx) * pixels[y1, x0, c] + fx * pixels[y1, x1, c]
                val = (1 - fy) * top + fy * bot
                out[dy, dx, c] = int(math.floor(val + 0.5))
    return out


def median_blur_reference(pixels: np.ndarray, window: int) -> np.ndarray:
    """Edge-replicated per-channel median by explicit neighborhood scan."""
    h, w = pixels.shape[0], pixels.shape[1]
    r = window // 2
    out = np.zeros_like(pixels)
    for y in range(h):
        for x in range(w):
            for c in range(3):
                vals = []
                for ddy in range(-r, r + 1):
                    for ddx in range(-r, r + 1):
                        yy = min(max(y + ddy, 0), h - 1)
                        xx = min(max(x + ddx, 0), w - 1)
                        vals.append(int(pixels[yy, xx, c]))
                vals.sort()
                out[y, x, c] = vals[len(vals) // 2]
    return out
