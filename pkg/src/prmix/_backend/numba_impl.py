"""Numba-compiled implementations of the hot kernels."""

import math

import numpy as np
from numba import njit

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@njit(cache=True)
def pr_recurse(family_code, p1, p2, log_w, xs, ws):
    """Mixing-weight recursion over a batch; mirrors the numpy backend."""
    n_nodes = log_w.shape[0]
    n = xs.shape[0]
    inc = np.empty(n)
    lk = np.empty(n_nodes)
    lgam = np.empty(n_nodes)
    logp2 = np.empty(n_nodes)
    if family_code == 1:
        for j in range(n_nodes):
            lgam[j] = math.lgamma(p1[j])
            logp2[j] = math.log(p2[j])
    for t in range(n):
        x = xs[t]
        if family_code == 0:
            for j in range(n_nodes):
                z = (x - p1[j]) / p2[j]
                lk[j] = -math.log(p2[j]) - _LOG_SQRT_2PI - 0.5 * z * z
        else:
            lx = math.log(x)
            for j in range(n_nodes):
                lk[j] = p1[j] * logp2[j] + (p1[j] - 1.0) * lx - p2[j] * x - lgam[j]
        mx = -np.inf
        for j in range(n_nodes):
            s = log_w[j] + lk[j]
            if s > mx:
                mx = s
        if not np.isfinite(mx):
            return inc, t
        acc = 0.0
        for j in range(n_nodes):
            acc += math.exp(log_w[j] + lk[j] - mx)
        m = mx + math.log(acc)
        inc[t] = m
        w = ws[t]
        if w > 0.0:
            l1w = math.log1p(-w)
            lw = math.log(w)
            for j in range(n_nodes):
                a = l1w + log_w[j]
                b = lw + log_w[j] + lk[j] - m
                if a > b:
                    log_w[j] = a + math.log1p(math.exp(b - a))
                else:
                    log_w[j] = b + math.log1p(math.exp(a - b))
        mx2 = -np.inf
        for j in range(n_nodes):
            if log_w[j] > mx2:
                mx2 = log_w[j]
        acc2 = 0.0
        for j in range(n_nodes):
            acc2 += math.exp(log_w[j] - mx2)
        z2 = mx2 + math.log(acc2)
        for j in range(n_nodes):
            log_w[j] -= z2
    return inc, -1


@njit(cache=True)
def pava_decreasing(y, w):
    """Weighted pool-adjacent-violators fit under a non-increasing constraint."""
    n = y.shape[0]
    level = np.empty(n)
    weight = np.empty(n)
    size = np.empty(n, dtype=np.int64)
    k = 0
    for i in range(n):
        level[k] = y[i]
        weight[k] = w[i]
        size[k] = 1
        while k > 0 and level[k - 1] < level[k]:
            tot = weight[k - 1] + weight[k]
            level[k - 1] = (weight[k - 1] * level[k - 1] + weight[k] * level[k]) / tot
            weight[k - 1] = tot
            size[k - 1] += size[k]
            k -= 1
        k += 1
    out = np.empty(n)
    pos = 0
    for b in range(k):
        for _ in range(size[b]):
            out[pos] = level[b]
            pos += 1
    return out
