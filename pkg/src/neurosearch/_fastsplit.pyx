# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled exact greedy split scan, the hot kernel of boosted-tree training.

Semantics match ``_npsplit.scan_best_split`` exactly: identical accumulation
order and tie handling, so both backends grow identical trees.
"""


def scan_best_split(double[::1, :] values, int[::1, :] presort,
                    unsigned char[:] in_node, double[:] g, double[:] h,
                    double sum_g, double sum_h, double lam):
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t p = values.shape[1]
    cdef double parent = sum_g * sum_g / (sum_h + lam)
    cdef Py_ssize_t best_feat = -1
    cdef double best_thr = 0.0
    cdef double best_gain = 0.0
    cdef Py_ssize_t j, t, r, m
    cdef double gl, hl, gr, hr, v, prev_val, gain, thr

    with nogil:
        for j in range(p):
            gl = 0.0
            hl = 0.0
            m = 0
            prev_val = 0.0
            for t in range(n):
                r = presort[t, j]
                if in_node[r] == 0:
                    continue
                v = values[r, j]
                if m > 0 and v > prev_val:
                    gr = sum_g - gl
                    hr = sum_h - hl
                    gain = gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent
                    if gain > best_gain:
                        thr = 0.5 * (prev_val + v)
                        if thr >= v:
                            thr = prev_val
                        best_gain = gain
                        best_feat = j
                        best_thr = thr
                gl += g[r]
                hl += h[r]
                prev_val = v
                m += 1
    return best_feat, best_thr, best_gain
