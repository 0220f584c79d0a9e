"""Pure-numpy implementations of the hot kernels.

Same contracts as the numba backend; used when numba is unavailable or
when PRMIX_BACKEND=numpy is set.
"""

import math

import numpy as np
from scipy.special import gammaln

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _log_kernel(family_code, p1, p2, x):
    if family_code == 0:
        z = (x - p1) / p2
        return -np.log(p2) - _LOG_SQRT_2PI - 0.5 * z * z
    return p1 * np.log(p2) + (p1 - 1.0) * np.log(x) - p2 * x - gammaln(p1)


def pr_recurse(family_code, p1, p2, log_w, xs, ws):
    """Run the mixing-weight recursion over a batch of observations.

    ``log_w`` is updated in place.  Returns (per-step predictive log
    density increments, status); status is -1 on success or the index of
    the step whose mixture density underflowed.
    """
    n = xs.shape[0]
    inc = np.empty(n)
    # lgamma term is index-only; hoist it out of the observation loop
    if family_code == 1:
        lgam = gammaln(p1)
        logp2 = np.log(p2)
    for t in range(n):
        x = xs[t]
        if family_code == 0:
            z = (x - p1) / p2
            # overflow in z*z is the degenerate case handled below
            with np.errstate(over="ignore"):
                lk = -np.log(p2) - _LOG_SQRT_2PI - 0.5 * z * z
        else:
            lk = p1 * logp2 + (p1 - 1.0) * math.log(x) - p2 * x - lgam
        s = log_w + lk
        mx = np.max(s)
        if not np.isfinite(mx):
            return inc, t
        m = mx + math.log(np.sum(np.exp(s - mx)))
        inc[t] = m
        w = ws[t]
        if w > 0.0:
            stay = math.log1p(-w) + log_w
            move = math.log(w) + s - m
            log_w[:] = np.logaddexp(stay, move)
        elif w < 0.0 or w >= 1.0:
            raise ValueError("recursion weights must lie in [0, 1)")
        z2 = log_w.max()
        log_w -= z2 + math.log(np.sum(np.exp(log_w - z2)))
    return inc, -1


def pava_decreasing(y, w):
    """Weighted least-squares fit under a non-increasing constraint.

    Pool-adjacent-violators on (y, w); returns the fitted values expanded
    back to the input length.
    """
    n = y.shape[0]
    level = np.empty(n)
    weight = np.empty(n)
    size = np.empty(n, dtype=np.int64)
    k = 0
    for i in range(n):
        level[k] = y[i]
        weight[k] = w[i]
        size[k] = 1
        # merge while the decreasing order is violated
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
        out[pos : pos + size[b]] = level[b]
        pos += size[b]
    return out
