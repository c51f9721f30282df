"""Compiled inner loops for tree split search and Pegasos updates."""

import numpy as np
from numba import njit


@njit(cache=True)
def _xlog2x(a):
    return a * np.log2(a) if a > 0.0 else 0.0


@njit(cache=True)
def varying_features(X, rows):
    """Features whose value is not constant over ``rows``."""
    d = X.shape[1]
    out = np.empty(d, dtype=np.int64)
    k = 0
    first = rows[0]
    for f in range(d):
        v = X[first, f]
        for r in rows[1:]:
            if X[r, f] != v:
                out[k] = f
                k += 1
                break
    return out[:k]


@njit(cache=True)
def best_split_kernel(X, W, rows, features, min_gain):
    """Scan ``features`` for the highest information-gain threshold.

    Same contract as ``tree.best_split`` restricted to ``rows``: first
    maximum in (feature, threshold) order wins.  Returns
    ``(gain, feature, threshold)`` with feature -1 when nothing beats
    ``min_gain``.
    """
    n = rows.shape[0]
    C = W.shape[1]
    parent = np.zeros(C)
    for r in rows:
        for c in range(C):
            parent[c] += W[r, c]
    total = parent.sum()
    h_parent = 0.0
    for c in range(C):
        if parent[c] > 0.0:
            p = parent[c] / total
            h_parent -= p * np.log2(p)
    best_gain = -np.inf
    best_f = -1
    best_thr = 0.0
    left = np.empty(C)
    col = np.empty(n)
    for f in features:
        for i in range(n):
            col[i] = X[rows[i], f]
        order = np.argsort(col, kind="mergesort")
        left[:] = 0.0
        for i in range(n - 1):
            r = rows[order[i]]
            for c in range(C):
                left[c] += W[r, c]
            lo = col[order[i]]
            hi = col[order[i + 1]]
            if not hi > lo:
                continue
            nl = 0.0
            cost = 0.0
            for c in range(C):
                nl += left[c]
                cost -= _xlog2x(left[c]) + _xlog2x(parent[c] - left[c])
            cost += _xlog2x(nl) + _xlog2x(total - nl)
            gain = h_parent - cost / total
            if gain > best_gain:
                best_gain = gain
                best_f = f
                thr = (lo + hi) / 2.0
                if not (lo <= thr and thr < hi):
                    thr = lo
                best_thr = thr
    if best_gain <= min_gain:
        return 0.0, -1, 0.0
    return best_gain, best_f, best_thr


@njit(cache=True)
def pegasos_epoch(W, total, Xa, Ypm, order, lam, t0, radius):
    """One pass of Pegasos over ``order``; updates ``W`` and the running sum ``total`` in place."""
    C, d = W.shape
    t = t0
    scores = np.empty(C)
    for i in order:
        t += 1
        eta = 1.0 / (lam * t)
        shrink = 1.0 - 1.0 / t
        for c in range(C):
            s = 0.0
            for j in range(d):
                s += W[c, j] * Xa[i, j]
            scores[c] = s * Ypm[i, c]
        for c in range(C):
            active = scores[c] < 1.0
            step = eta * Ypm[i, c]
            norm2 = 0.0
            for j in range(d):
                w = W[c, j] * shrink
                if active:
                    w += step * Xa[i, j]
                W[c, j] = w
                norm2 += w * w
            if norm2 > radius * radius:
                scale = radius / np.sqrt(norm2)
                for j in range(d):
                    W[c, j] *= scale
            for j in range(d):
                total[c, j] += W[c, j]
    return t
