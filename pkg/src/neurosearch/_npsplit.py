"""Numpy implementation of the exact greedy split scan.

Fallback for the compiled kernel in ``_fastsplit.pyx``; both must agree
bit-for-bit (same accumulation order, same tie handling) so trained models do
not depend on which backend is active.
"""

from __future__ import annotations

import numpy as np


def scan_best_split(values, presort, in_node, g, h, sum_g, sum_h, lam):
    """Best axis-aligned split over all features for one tree node.

    Parameters
    ----------
    values : (n, p) float64, Fortran order
    presort : (n, p) int32, Fortran order; rows sorted ascending per column
    in_node : (n,) uint8 node-membership mask
    g, h : (n,) float64 gradient / hessian per row
    sum_g, sum_h : node totals (sequential sum in presort order start-to-end)
    lam : leaf regularization

    Returns (best_feature, best_threshold, best_gain); feature -1 if no split
    with positive gain exists. Ties break to the lowest feature index, then
    the lowest threshold.
    """
    n, p = values.shape
    parent = sum_g * sum_g / (sum_h + lam)
    mask = in_node != 0
    best_feat = -1
    best_thr = 0.0
    best_gain = 0.0
    for j in range(p):
        idx = presort[:, j]
        sel = idx[mask[idx]]
        if sel.size < 2:
            continue
        vals = values[sel, j]
        cut = vals[1:] > vals[:-1]
        if not cut.any():
            continue
        gl = np.cumsum(g[sel])[:-1][cut]
        hl = np.cumsum(h[sel])[:-1][cut]
        gr = sum_g - gl
        hr = sum_h - hl
        gains = gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent
        i_best = int(np.argmax(gains))
        gain = float(gains[i_best])
        if gain > best_gain:
            left_val = float(vals[:-1][cut][i_best])
            right_val = float(vals[1:][cut][i_best])
            thr = 0.5 * (left_val + right_val)
            if thr >= right_val:
                thr = left_val
            best_gain = gain
            best_feat = j
            best_thr = thr
    return best_feat, best_thr, best_gain
