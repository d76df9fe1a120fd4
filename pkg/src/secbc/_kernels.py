"""Fused numba kernel for the t = 2 power-manifold sweeps.

The default grids put ~3e8 sub-covariance evaluations inside
frontier_power; materializing the determinant tensors in numpy is
memory-bandwidth bound, so the 2x2 case runs as one jitted loop that
computes both determinants from the principal-minor coefficients,
bins the confidential rate and keeps the best private rate per bin.

Parallelism is over constraint nodes; every node owns its output slice,
so results are bit-identical for any thread count.  Everything falls
back to the pure-numpy sweep when numba is unavailable.
"""

from __future__ import annotations

import math

import numpy as np

try:
    import numba
    from numba import njit, prange

    # The portable layer avoids TBB/OMP version probing warnings; the
    # kernel is race-free by construction so any layer is deterministic.
    numba.config.THREADING_LAYER = "workqueue"
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep of the fast path
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap

    prange = range


@njit(cache=True, parallel=True)
def _sweep2_kernel(
    a1,
    b1,
    c1,
    a2,
    b2,
    c2,
    dvals,
    ntheta,
    r1cap,
    nbins,
    best_r1,
    best_det2,
    best_flat,
    raw_ratio,
    raw_arg,
    raw_det2,
):  # pragma: no cover - exercised through the wrapper
    nnodes = raw_ratio.shape[0]
    nd = dvals.shape[0]
    for node in prange(nnodes):
        rbest = -1.0
        rarg = -1
        rdet2 = 1.0
        for tl in range(ntheta):
            row = node * ntheta + tl
            ra1 = a1[row]
            rb1 = b1[row]
            rc1 = c1[row]
            ra2 = a2[row]
            rb2 = b2[row]
            rc2 = c2[row]
            for i in range(nd):
                di = dvals[i]
                base1 = 1.0 + di * ra1
                coef1 = rb1 + di * rc1
                base2 = 1.0 + di * ra2
                coef2 = rb2 + di * rc2
                rowflat = tl * nd * nd + i * nd
                for j in range(nd):
                    dj = dvals[j]
                    det1 = base1 + dj * coef1
                    det2 = base2 + dj * coef2
                    ratio = det1 / det2
                    if ratio > rbest:
                        rbest = ratio
                        rarg = rowflat + j
                        rdet2 = det2
                    if nbins > 0:
                        r1 = 0.0
                        if ratio > 1.0:
                            r1 = 0.5 * math.log2(ratio)
                        b = int(r1 * nbins / r1cap)
                        if b >= nbins:
                            b = nbins - 1
                        idx = node * nbins + b
                        if det2 < best_det2[idx]:
                            best_det2[idx] = det2
                            best_r1[idx] = r1
                            best_flat[idx] = rowflat + j
        raw_ratio[node] = rbest
        raw_arg[node] = rarg
        raw_det2[node] = rdet2


def minor_coeffs_2x2(g: np.ndarray, w: np.ndarray):
    """Principal-minor coefficients of (G W)^T (G W) for 2x2 factors.

    ``w`` has shape (..., 2, 2); returns (M00, M11, det M) so that
    det(I + diag(d) M) = 1 + d0*M00 + d1*M11 + d0*d1*detM.
    """
    a = np.einsum("ij,...jk->...ik", g, w)
    m00 = a[..., 0, 0] ** 2 + a[..., 1, 0] ** 2
    m11 = a[..., 0, 1] ** 2 + a[..., 1, 1] ** 2
    m01 = a[..., 0, 0] * a[..., 0, 1] + a[..., 1, 0] * a[..., 1, 1]
    return m00, m11, m00 * m11 - m01 * m01


def sweep2(g1, g2, factors, vb, dvals, r1cap, nbins):
    """Run the fused sweep for a batch of 2x2 constraint factors.

    factors (n,2,2) are square roots of the constraint matrices, vb the
    inner rotation batch.  With nbins > 0 returns per-(node, bin) winners
    (r1, det2, flat index) plus per-node raw maxima; with nbins = 0 only
    the raw maxima are tracked.
    """
    if HAVE_NUMBA:
        from .sweeps import worker_count

        numba.set_num_threads(
            max(1, min(worker_count(), numba.config.NUMBA_NUM_THREADS))
        )
    n = factors.shape[0]
    ntheta = vb.shape[0]
    w = np.einsum("nij,vjk->nvik", factors, vb).reshape(n * ntheta, 2, 2)
    a1, b1, c1 = minor_coeffs_2x2(g1, w)
    a2, b2, c2 = minor_coeffs_2x2(g2, w)
    nb = max(nbins, 0)
    best_r1 = np.zeros(n * nb)
    best_det2 = np.full(n * nb, np.inf)
    best_flat = np.full(n * nb, -1, dtype=np.int64)
    raw_ratio = np.empty(n)
    raw_arg = np.empty(n, dtype=np.int64)
    raw_det2 = np.empty(n)
    _sweep2_kernel(
        a1,
        b1,
        c1,
        a2,
        b2,
        c2,
        np.asarray(dvals, dtype=float),
        ntheta,
        float(r1cap),
        nb,
        best_r1,
        best_det2,
        best_flat,
        raw_ratio,
        raw_arg,
        raw_det2,
    )
    return best_r1, best_det2, best_flat, raw_ratio, raw_arg, raw_det2
