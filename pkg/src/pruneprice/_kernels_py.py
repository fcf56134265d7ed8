"""Pure-Python Monte-Carlo acceptance counter (fallback for ``_kernels``).

For trial ``t`` the seed is ``derive_seed(master, t)``; stream word 0 picks
the branch and word 1 the uniform price position, exactly as
:func:`pruneprice.mechanisms.randomized_draw` does.  All acceptance tests
are precomputed as integer comparisons on the raw 64-bit words:

* branch (a) iff ``k1 < cut_a``; branch (b) iff ``cut_a <= k1 <= cut_b_m1``;
* in branches (a)/(b) item ``j`` accepts iff ``acc_a[j]`` / ``acc_b[j]``;
* in branch (c) item ``j`` accepts iff ``lo_k[j] <= k2 <= hi_k[j]``.

Returns per-item acceptance counts and the float sum and sum of squares of
the realized value (used only for standard errors).
"""

from __future__ import annotations

from .rng import GAMMA, MASK64, mix64

_TRIAL_KEY = 0x5851F42D4C957F2D


def mc_accept_counts(master, trials, cut_a, cut_b_m1, acc_a, acc_b, lo_k, hi_k, values):
    n = len(values)
    counts = [0] * n
    key = (master & MASK64) ^ _TRIAL_KEY
    rows = list(zip(range(n), acc_a, acc_b, lo_k, hi_k, values))
    s1 = s2 = 0.0
    for t in range(trials):
        seed = mix64(key + (t + 1) * GAMMA)
        k1 = mix64(seed + GAMMA)
        total = 0.0
        if k1 < cut_a:
            for j, a, _, _, _, v in rows:
                if a:
                    counts[j] += 1
                    total += v
        elif k1 <= cut_b_m1:
            for j, _, b, _, _, v in rows:
                if b:
                    counts[j] += 1
                    total += v
        else:
            k2 = mix64(seed + 2 * GAMMA)
            for j, _, _, lo, hi, v in rows:
                if lo <= k2 <= hi:
                    counts[j] += 1
                    total += v
        s1 += total
        s2 += total * total
    return counts, s1, s2
