"""Rate-region enumeration and Pareto frontiers.

Four families of regions are computed, all as unions of boxes indexed by
generating covariances:

- fixed-covariance pair region: rectangles over sub-covariances K* of K
  (confidential rate, private rate);
- power-constraint pair region: union of the above over the trace-P
  manifold of constraint matrices;
- common-message triple regions (fixed covariance and power);
- the comparison region where both private messages are confidential.

Frontiers carry the generating covariances on every point so any output
row can be re-verified by plugging the matrices back into the rate
formulas.  Sweeps follow the grid resolutions in :class:`GridSpec`; the
extreme corners (max confidential rate, max private rate) additionally
get golden-section polish so they match the dedicated wiretap optimizer.

Manifold chunks may be evaluated in parallel (see SECBC_THREADS); chunk
results are always merged in lexicographic parameter order, so output is
independent of the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._kernels import HAVE_NUMBA
from .channel import GaussianBc, mi_xy
from .matops import sqrt_factor, validate_psd
from .sweeps import (
    GridSpec,
    chain_factor,
    children_factors,
    coordinate_refine,
    det_i_plus_gram,
    diag_combos,
    diag_values,
    half_log2_det_gram,
    pair_dets,
    rotation_batch,
    simplex_grid,
    theta_tuple_grid,
    top_k_flat,
    worker_count,
)

__all__ = [
    "RatePoint",
    "RateTriple",
    "Frontier",
    "pareto_filter_pairs",
    "pareto_filter_triples",
    "frontier_fixed_cov",
    "wtc_capacity",
    "wtc_capacity_power",
    "augment_trace",
    "frontier_power",
    "region_common_fixed",
    "region_common_power",
    "both_confidential_frontier",
    "check_k1_zero",
]

PARETO_SLACK = 1e-9


@dataclass
class RatePoint:
    """A (R1, R2) pair with the covariances that generate it."""

    r1: float
    r2: float
    gen: dict = field(default_factory=dict)

    def __post_init__(self):
        self.r1 = max(0.0, float(self.r1))
        self.r2 = max(0.0, float(self.r2))


@dataclass
class RateTriple:
    """A (R0, R1, R2) triple with the covariances that generate it."""

    r0: float
    r1: float
    r2: float
    gen: dict = field(default_factory=dict)

    def __post_init__(self):
        self.r0 = max(0.0, float(self.r0))
        self.r1 = max(0.0, float(self.r1))
        self.r2 = max(0.0, float(self.r2))


@dataclass
class Frontier:
    """Pareto-maximal points sorted by R1 ascending, plus sweep metadata."""

    points: list
    meta: dict = field(default_factory=dict)

    @property
    def is_triple(self) -> bool:
        return bool(self.points) and isinstance(self.points[0], RateTriple)

    def rates(self) -> np.ndarray:
        if self.is_triple:
            return np.array([[p.r1, p.r2, p.r0] for p in self.points])
        return np.array([[p.r1, p.r2] for p in self.points])

    def max_r1(self) -> float:
        return max((p.r1 for p in self.points), default=0.0)

    def max_r2(self) -> float:
        return max((p.r2 for p in self.points), default=0.0)

    def r2_available(self, r1: float, slack: float = 0.0) -> float:
        """Largest R2 on the frontier among points with R1 >= r1 - slack."""
        best = -np.inf
        for p in self.points:
            if p.r1 >= r1 - slack:
                best = max(best, p.r2)
        return best


def _pareto_mask(r1: np.ndarray, r2: np.ndarray, slack: float = PARETO_SLACK):
    """Boolean mask of Pareto-maximal (r1, r2) pairs, slack-tolerant."""
    n = r1.size
    if n == 0:
        return np.zeros(0, dtype=bool)
    order = np.lexsort((-r2, -r1))  # r1 desc, r2 desc within ties
    r2s = r2[order]
    cummax = np.maximum.accumulate(r2s)
    keep_sorted = np.empty(n, dtype=bool)
    keep_sorted[0] = True
    keep_sorted[1:] = r2s[1:] > cummax[:-1] + slack
    mask = np.zeros(n, dtype=bool)
    mask[order[keep_sorted]] = True
    return mask


def pareto_filter_pairs(points: list, slack: float = PARETO_SLACK) -> list:
    """Drop dominated pairs; result is sorted by R1 ascending.

    Filtering is idempotent: applying it to its own output changes
    nothing.
    """
    if not points:
        return []
    r1 = np.array([p.r1 for p in points])
    r2 = np.array([p.r2 for p in points])
    mask = _pareto_mask(r1, r2, slack)
    kept = [p for p, m in zip(points, mask) if m]
    kept.sort(key=lambda p: (p.r1, p.r2))
    return kept


def _pareto_rows_triples(arr: np.ndarray, slack: float = PARETO_SLACK) -> np.ndarray:
    """Row indices of Pareto-maximal (r0, r1, r2) rows, duplicates deduped."""
    if arr.shape[0] == 0:
        return np.zeros(0, dtype=int)
    uniq, first = np.unique(arr, axis=0, return_index=True)
    dominated = np.zeros(len(uniq), dtype=bool)
    for s in range(0, len(uniq), 256):
        blk = uniq[s : s + 256]
        geq = (uniq[None, :, :] >= blk[:, None, :]).all(axis=-1)
        strict = (uniq[None, :, :] > blk[:, None, :] + slack).any(axis=-1)
        dominated[s : s + 256] = (geq & strict).any(axis=1)
    return first[~dominated]


def pareto_filter_triples(points: list, slack: float = PARETO_SLACK) -> list:
    """Drop dominated triples (componentwise, slack-tolerant dominance)."""
    if not points:
        return []
    arr = np.array([[p.r0, p.r1, p.r2] for p in points])
    kept = [points[i] for i in _pareto_rows_triples(arr, slack)]
    kept.sort(key=lambda p: (p.r1, p.r2, p.r0))
    return kept


def _grid_tables(t: int, theta_steps: int, diag_steps: int):
    m = t * (t - 1) // 2
    tuples = theta_tuple_grid(m, theta_steps)
    vb = rotation_batch(tuples, t)
    dvals = diag_values(diag_steps)
    return tuples, vb, dvals, diag_combos(dvals, t)


def _half_log2_pair(g, parents, vb, dvals, t):
    return 0.5 * np.log2(pair_dets(g, parents, vb, [dvals] * t))


def _subcov_from_flat(b0, tuples, dcombos, flat, t):
    """(sub-covariance, its chained factor, params) for a flat grid index."""
    nd = dcombos.shape[0]
    vi, di = divmod(int(flat), nd)
    params = np.concatenate([tuples[vi], dcombos[di]])
    (b,) = chain_factor(b0, params, t, 1)
    ks = b @ b.T
    return 0.5 * (ks + ks.T), b, params


def _bounds_spans_level(t, theta_steps, diag_steps):
    m = t * (t - 1) // 2
    bounds = [(0.0, 2.0 * math.pi)] * m + [(0.0, 1.0)] * t
    spans = [2.0 * math.pi / theta_steps] * m + [1.0 / max(diag_steps - 1, 1)] * t
    return bounds, np.asarray(spans)


def _max_r1_fixed(ch, b0, grid: GridSpec, extra_seeds=None):
    """Grid + refine maximum of the raw confidential rate over K* of B0 B0^T."""
    t = ch.t
    tuples, vb, dvals, dcombos = _grid_tables(t, grid.theta_steps, grid.diag_steps)
    l1 = _half_log2_pair(ch.g1, b0[None], vb, dvals, t)[0].reshape(len(vb), -1)
    l2 = _half_log2_pair(ch.g2, b0[None], vb, dvals, t)[0].reshape(len(vb), -1)
    raw = l1 - l2
    seeds = [
        np.concatenate([tuples[i // dcombos.shape[0]], dcombos[i % dcombos.shape[0]]])
        for i in top_k_flat(raw, grid.starts)
    ]
    if extra_seeds:
        seeds = seeds + [np.asarray(s, dtype=float) for s in extra_seeds]

    def objective(params):
        (b,) = chain_factor(b0, params, t, 1)
        return half_log2_det_gram(ch.g1, b) - half_log2_det_gram(ch.g2, b)

    best_x, best_f = seeds[0], float(raw.max())
    if grid.refine_iters > 0:
        bounds, spans = _bounds_spans_level(t, grid.theta_steps, grid.diag_steps)
        for x0 in seeds:
            x, fx = coordinate_refine(
                objective, x0, bounds, spans, grid.refine_tol, grid.refine_iters
            )
            if fx > best_f:
                best_x, best_f = x, fx
    (b,) = chain_factor(b0, best_x, t, 1)
    kstar = b @ b.T
    return best_f, best_x, 0.5 * (kstar + kstar.T)


def wtc_capacity(ch: GaussianBc, k, grid: GridSpec | None = None):
    """Wiretap secrecy capacity under the covariance constraint ``k``.

    Maximizes the confidential-rate closed form over all K* below k;
    returns (value, argmax).  The zero matrix is always in the sweep, so
    the value is nonnegative.
    """
    grid = grid or GridSpec()
    k = validate_psd(k, name="k")
    if k.shape[0] != ch.t:
        raise ValueError("constraint dimension does not match the channel")
    if np.abs(k).max() < 1e-15:
        return 0.0, np.zeros_like(k)
    value, _, kstar = _max_r1_fixed(ch, sqrt_factor(k), grid)
    return float(value), kstar


def frontier_fixed_cov(ch: GaussianBc, k, grid: GridSpec | None = None) -> Frontier:
    """Pareto frontier of the pair region under covariance constraint ``k``.

    Sweeps sub-covariances of ``k`` on the (angles, scalings) grid,
    clamps the raw confidential rate at zero, Pareto-filters, and splices
    in the golden-refined max-R1 corner so the frontier endpoint agrees
    with :func:`wtc_capacity`.  The K* = 0 node puts (0, max R2) on the
    frontier exactly.
    """
    grid = grid or GridSpec()
    k = validate_psd(k, name="k")
    t = ch.t
    if k.shape[0] != t:
        raise ValueError("constraint dimension does not match the channel")
    meta = {
        "kind": "fixed_cov",
        "mode": "one_confidential",
        "constraint": k,
        "channel": (ch.g1, ch.g2),
        "grid": grid,
    }
    if np.abs(k).max() < 1e-15:
        return Frontier(
            [RatePoint(0.0, 0.0, {"k": k, "kstar": np.zeros_like(k)})], meta
        )
    c2k = mi_xy(ch, k, 2)
    b0 = sqrt_factor(k)
    tuples, vb, dvals, dcombos = _grid_tables(t, grid.theta_steps, grid.diag_steps)
    nd = dcombos.shape[0]

    cand: list[tuple[float, float, int]] = []
    chunk = max(1, int(4_000_000 // max(nd, 1)))
    for s in range(0, len(vb), chunk):
        vsel = vb[s : s + chunk]
        l1 = _half_log2_pair(ch.g1, b0[None], vsel, dvals, t)[0].reshape(len(vsel), -1)
        l2 = _half_log2_pair(ch.g2, b0[None], vsel, dvals, t)[0].reshape(len(vsel), -1)
        r1 = np.maximum(l1 - l2, 0.0).ravel()
        r2 = (c2k - l2).ravel()
        mask = _pareto_mask(r1, r2)
        idx = np.flatnonzero(mask)
        base = s * nd
        cand.extend(zip(r1[idx], r2[idx], (idx + base).tolist()))

    r1 = np.array([c[0] for c in cand])
    r2 = np.array([c[1] for c in cand])
    mask = _pareto_mask(r1, r2)
    points = []
    for i in np.flatnonzero(mask):
        ks, _, _ = _subcov_from_flat(b0, tuples, dcombos, cand[i][2], t)
        points.append(RatePoint(cand[i][0], cand[i][1], {"k": k, "kstar": ks}))

    if grid.refine_iters > 0:
        rmax, params, kstar = _max_r1_fixed(ch, b0, grid)
        (b,) = chain_factor(b0, params, t, 1)
        r2_at = c2k - half_log2_det_gram(ch.g2, b)
        points.append(RatePoint(max(0.0, rmax), r2_at, {"k": k, "kstar": kstar}))
    return Frontier(pareto_filter_pairs(points), meta)


def augment_trace(kprime, p: float) -> np.ndarray:
    """Raise the (1,1) entry of ``kprime`` until the trace reaches ``p``.

    The result dominates ``kprime`` in the PSD order and has trace
    exactly ``p``; raising only a diagonal entry keeps PSD-ness.
    """
    kprime = validate_psd(kprime, name="kprime")
    tr = float(np.trace(kprime))
    if tr > p + 1e-9 * (1.0 + abs(p)):
        raise ValueError(f"trace {tr} exceeds the power budget {p}")
    out = kprime.copy()
    out[0, 0] += max(p - tr, 0.0)
    return out


def _manifold_nodes(t: int, p: float, theta_steps: int, trace_steps: int):
    """Constraint matrices of trace p: factors B = V(angles) diag(sqrt(q))."""
    m = t * (t - 1) // 2
    full = math.pi if t == 2 else 2.0 * math.pi
    tuples = theta_tuple_grid(m, theta_steps, full=full)
    vmani = rotation_batch(tuples, t)
    qs = simplex_grid(t, p, trace_steps)
    return tuples, vmani, qs


def _mani_factor(vmani_row: np.ndarray, q_row: np.ndarray) -> np.ndarray:
    return vmani_row * np.sqrt(q_row)[None, :]


def _map_ordered(fn, items):
    w = worker_count()
    if w <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=w) as ex:
        return list(ex.map(fn, items))


def _power_sweep(
    ch: GaussianBc,
    p: float,
    grid: GridSpec,
    both_confidential: bool,
    force_numpy: bool = False,
):
    """Shared manifold sweep for the two power-constraint pair regions.

    Returns (candidates, tables); candidates are rows
    (r1, r2, node_index, inner_flat_index, raw_r1) merged in node order.
    The 2x2 case runs through the fused numba kernel; other dimensions
    (and ``force_numpy``) take the vectorized numpy path, which produces
    the same candidates.
    """
    t = ch.t
    mani_tuples, vmani, qs = _manifold_nodes(t, p, grid.theta_steps, grid.trace_steps)
    tuples, vb, dvals, dcombos = _grid_tables(t, grid.theta_steps, grid.diag_steps)
    nd = dcombos.shape[0]
    nflat = len(vb) * nd
    n_nodes = len(vmani) * len(qs)
    r1cap = mi_xy(ch, p * np.eye(t), 1) + 1e-9
    nbins = grid.r1_bins
    tables = {
        "mani_tuples": mani_tuples,
        "qs": qs,
        "tuples": tuples,
        "dcombos": dcombos,
        "vmani": vmani,
    }

    if t == 2 and HAVE_NUMBA and not force_numpy:
        cand = _power_sweep_kernel(
            ch, vmani, qs, vb, dvals, r1cap, nbins, both_confidential
        )
        return cand, tables

    node_ids = np.arange(n_nodes)
    chunk = max(1, int(6_000_000 // max(nflat, 1)))
    chunks = [node_ids[s : s + chunk] for s in range(0, n_nodes, chunk)]

    def work(ids):
        vi, qi = np.divmod(ids, len(qs))
        bmani = vmani[vi] * np.sqrt(qs[qi])[:, None, :]
        c1k = 0.5 * np.log2(det_i_plus_gram(ch.g1, bmani))
        c2k = 0.5 * np.log2(det_i_plus_gram(ch.g2, bmani))
        l1 = _half_log2_pair(ch.g1, bmani, vb, dvals, t).reshape(len(ids), -1)
        l2 = _half_log2_pair(ch.g2, bmani, vb, dvals, t).reshape(len(ids), -1)
        raw = l1 - l2
        if both_confidential:
            # Both bounds move together in the raw rate, so the single
            # dominating candidate per node is its max-raw corner.
            arg = np.argmax(raw, axis=1)
            amax = raw[np.arange(len(ids)), arg]
            ck = c2k - c1k
            out = np.column_stack(
                [
                    np.maximum(amax, 0.0),
                    np.maximum(amax + ck, 0.0),
                    ids,
                    arg,
                    amax,
                ]
            )
            return out
        r1 = np.maximum(raw, 0.0)
        r2 = c2k[:, None] - l2
        bidx = np.minimum((r1 / r1cap * nbins).astype(np.int64), nbins - 1)
        comb = (np.arange(len(ids))[:, None] * nbins + bidx).ravel()
        best = np.full(len(ids) * nbins, -np.inf)
        np.maximum.at(best, comb, r2.ravel())
        sel = np.flatnonzero(r2.ravel() >= best[comb])
        _, firsts = np.unique(comb[sel], return_index=True)
        pick = sel[firsts]
        rows, flats = np.divmod(pick, nflat)
        binned = np.column_stack(
            [
                r1.ravel()[pick],
                r2.ravel()[pick],
                ids[rows],
                flats,
                raw.ravel()[pick],
            ]
        )
        # Per-node raw maxima carry the true (unclamped) corner seeds.
        arg = np.argmax(raw, axis=1)
        amax = raw[np.arange(len(ids)), arg]
        corners = np.column_stack(
            [
                np.maximum(amax, 0.0),
                r2[np.arange(len(ids)), arg],
                ids,
                arg,
                amax,
            ]
        )
        return np.vstack([binned, corners])

    parts = _map_ordered(work, chunks)
    cand = np.vstack(parts) if parts else np.zeros((0, 5))
    return cand, tables


def _power_sweep_kernel(ch, vmani, qs, vb, dvals, r1cap, nbins, both_confidential):
    """Fused-kernel body of :func:`_power_sweep` for t = 2."""
    from ._kernels import sweep2

    n_nodes = len(vmani) * len(qs)
    node_ids = np.arange(n_nodes)
    rows = []
    for s in range(0, n_nodes, 1024):
        ids = node_ids[s : s + 1024]
        vi, qi = np.divmod(ids, len(qs))
        bmani = vmani[vi] * np.sqrt(qs[qi])[:, None, :]
        c1k = 0.5 * np.log2(det_i_plus_gram(ch.g1, bmani))
        c2k = 0.5 * np.log2(det_i_plus_gram(ch.g2, bmani))
        kb = 0 if both_confidential else nbins
        best_r1, best_det2, best_flat, ratio, arg, rdet2 = sweep2(
            ch.g1, ch.g2, bmani, vb, dvals, r1cap, kb
        )
        raw = 0.5 * np.log2(ratio)
        if both_confidential:
            ck = c2k - c1k
            rows.append(
                np.column_stack(
                    [
                        np.maximum(raw, 0.0),
                        np.maximum(raw + ck, 0.0),
                        ids,
                        arg,
                        raw,
                    ]
                )
            )
            continue
        sel = np.flatnonzero(best_flat >= 0)
        local = sel // nbins
        rows.append(
            np.column_stack(
                [
                    best_r1[sel],
                    c2k[local] - 0.5 * np.log2(best_det2[sel]),
                    ids[local],
                    best_flat[sel],
                    best_r1[sel],
                ]
            )
        )
        # Per-node raw maxima carry the true (unclamped) corner seeds.
        rows.append(
            np.column_stack(
                [
                    np.maximum(raw, 0.0),
                    c2k - 0.5 * np.log2(rdet2),
                    ids,
                    arg,
                    raw,
                ]
            )
        )
    return np.vstack(rows) if rows else np.zeros((0, 5))


def _node_constraint(tables, node: int, t: int):
    qs = tables["qs"]
    vi, qi = divmod(int(node), len(qs))
    b = _mani_factor(tables["vmani"][vi], qs[qi])
    kmat = b @ b.T
    return 0.5 * (kmat + kmat.T), b, tables["mani_tuples"][vi], qs[qi]


def _power_corner_refine(ch, p, grid, tables, seed_rows, objective_kind):
    """Joint polish over (manifold angles, trace head, inner params).

    objective_kind: 'r1' for the raw confidential rate, 'c2' for the
    private-rate corner, 'bc2' for the both-confidential R2 corner.
    Trace splits are parameterized by their first t-1 coordinates; an
    infeasible tail returns -inf, which golden section simply avoids.
    """
    t = ch.t
    m = t * (t - 1) // 2
    full = math.pi if t == 2 else 2.0 * math.pi
    mani_bounds = [(0.0, full)] * m + [(0.0, p)] * (t - 1)
    mani_spans = [full / grid.theta_steps] * m + [
        p / max(grid.trace_steps - 1, 1)
    ] * (t - 1)
    in_bounds, in_spans = _bounds_spans_level(t, grid.theta_steps, grid.diag_steps)
    bounds = mani_bounds + in_bounds
    spans = np.concatenate([mani_spans, in_spans])

    def split_params(x):
        ang = x[:m]
        head = x[m : m + t - 1]
        tail = p - head.sum()
        inner = x[m + t - 1 :]
        return ang, head, tail, inner

    def objective(x):
        ang, head, tail, inner = split_params(x)
        if tail < 0.0:
            return -np.inf
        q = np.concatenate([head, [tail]])
        bmani = rotation_batch(ang[None], t)[0] * np.sqrt(q)[None, :]
        if objective_kind == "c2":
            return half_log2_det_gram(ch.g2, bmani)
        (b,) = chain_factor(bmani, inner, t, 1)
        raw = half_log2_det_gram(ch.g1, b) - half_log2_det_gram(ch.g2, b)
        if objective_kind == "r1":
            return raw
        ck = half_log2_det_gram(ch.g2, bmani) - half_log2_det_gram(ch.g1, bmani)
        return raw + ck

    best_x, best_f = None, -np.inf
    for x0 in seed_rows:
        x, fx = coordinate_refine(
            objective, x0, bounds, spans, grid.refine_tol, grid.refine_iters
        )
        if fx > best_f:
            best_x, best_f = x, fx
    ang, head, tail, inner = split_params(best_x)
    q = np.concatenate([head, [max(tail, 0.0)]])
    bmani = rotation_batch(ang[None], t)[0] * np.sqrt(q)[None, :]
    kmat = bmani @ bmani.T
    (b,) = chain_factor(bmani, inner, t, 1)
    ks = b @ b.T
    return best_f, 0.5 * (kmat + kmat.T), 0.5 * (ks + ks.T), bmani


def _corner_seed(tables, cand_row, t):
    node = int(cand_row[2])
    flat = int(cand_row[3])
    qs = tables["qs"]
    vi, qi = divmod(node, len(qs))
    nd = tables["dcombos"].shape[0]
    ivi, idi = divmod(flat, nd)
    return np.concatenate(
        [
            tables["mani_tuples"][vi],
            qs[qi][:-1],
            tables["tuples"][ivi],
            tables["dcombos"][idi],
        ]
    )


def frontier_power(ch: GaussianBc, p: float, grid: GridSpec | None = None) -> Frontier:
    """Pareto frontier of the pair region under total power ``p``.

    Sweeps constraint matrices over the trace-p manifold (rotation angles
    plus a simplex-gridded diagonal), unions the per-constraint sweeps,
    and re-filters.  Restricting to trace exactly p is lossless: smaller
    traces are dominated via :func:`augment_trace`.
    """
    grid = grid or GridSpec()
    if p < 0:
        raise ValueError("power must be nonnegative")
    t = ch.t
    meta = {
        "kind": "power",
        "mode": "one_confidential",
        "power": p,
        "channel": (ch.g1, ch.g2),
        "grid": grid,
    }
    if p == 0:
        zero = np.zeros((t, t))
        return Frontier([RatePoint(0.0, 0.0, {"k": zero, "kstar": zero})], meta)
    if t == 1:
        fr = frontier_fixed_cov(ch, np.array([[float(p)]]), grid)
        return Frontier(fr.points, meta)

    cand, tables = _power_sweep(ch, p, grid, both_confidential=False)
    mask = _pareto_mask(cand[:, 0], cand[:, 1])
    kept = cand[mask]
    points = []
    for row in kept:
        kmat, b, _, _ = _node_constraint(tables, int(row[2]), t)
        ks, _, _ = _subcov_from_flat(
            b, tables["tuples"], tables["dcombos"], int(row[3]), t
        )
        points.append(RatePoint(row[0], row[1], {"k": kmat, "kstar": ks}))

    if grid.refine_iters > 0:
        order = np.argsort(-cand[:, 4], kind="stable")[: grid.starts]
        seeds = [_corner_seed(tables, cand[i], t) for i in order]
        rmax, kmat, ks, bmani = _power_corner_refine(
            ch, p, grid, tables, seeds, "r1"
        )
        r2_at = half_log2_det_gram(ch.g2, bmani) - 0.5 * np.log2(
            det_i_plus_gram(ch.g2, sqrt_factor(ks)[None])[0]
        )
        points.append(RatePoint(max(0.0, rmax), r2_at, {"k": kmat, "kstar": ks}))

        # Max-R2 corner: K* = 0, constraint maximizing the receiver-2 rate.
        zeros_inner = np.zeros(t * (t - 1) // 2 + t)
        c2_seeds = []
        for i in np.argsort(-cand[:, 1], kind="stable")[: grid.starts]:
            s = _corner_seed(tables, cand[i], t)
            s[-zeros_inner.size :] = 0.0
            c2_seeds.append(s)
        c2max, kmat2, _, _ = _power_corner_refine(ch, p, grid, tables, c2_seeds, "c2")
        points.append(
            RatePoint(0.0, c2max, {"k": kmat2, "kstar": np.zeros((t, t))})
        )
    return Frontier(pareto_filter_pairs(points), meta)


def both_confidential_frontier(
    ch: GaussianBc, p: float, grid: GridSpec | None = None
) -> Frontier:
    """Comparison region with both private messages confidential.

    For a constraint K and sub-covariance S the two bounds are coupled:
    R2 equals the raw R1 plus a per-constraint offset, so each constraint
    contributes exactly one undominated corner (its max-raw-R1 point).
    The frontier is the Pareto filter of those corners over the trace-p
    manifold.
    """
    grid = grid or GridSpec()
    if p < 0:
        raise ValueError("power must be nonnegative")
    t = ch.t
    meta = {
        "kind": "power",
        "mode": "both_confidential",
        "power": p,
        "channel": (ch.g1, ch.g2),
        "grid": grid,
    }
    if p == 0:
        zero = np.zeros((t, t))
        return Frontier([RatePoint(0.0, 0.0, {"k": zero, "kstar": zero})], meta)
    cand, tables = _power_sweep(ch, p, grid, both_confidential=True)

    mask = _pareto_mask(cand[:, 0], cand[:, 1])
    points = []
    for row in cand[mask]:
        kmat, b, _, _ = _node_constraint(tables, int(row[2]), t)
        ks, _, _ = _subcov_from_flat(
            b, tables["tuples"], tables["dcombos"], int(row[3]), t
        )
        points.append(RatePoint(row[0], row[1], {"k": kmat, "kstar": ks}))

    if grid.refine_iters > 0:
        if t == 1:
            kmat = np.array([[float(p)]])
            raw, _, ks = _max_r1_fixed(ch, sqrt_factor(kmat), grid)
            ck = mi_xy(ch, kmat, 2) - mi_xy(ch, kmat, 1)
            points.append(
                RatePoint(max(0.0, raw), max(0.0, raw + ck), {"k": kmat, "kstar": ks})
            )
        else:
            for kind in ("r1", "bc2"):
                key = 4 if kind == "r1" else 1
                order = np.argsort(-cand[:, key], kind="stable")[: grid.starts]
                seeds = [_corner_seed(tables, cand[i], t) for i in order]
                raw, kmat, ks, bmani = _power_corner_refine(
                    ch, p, grid, tables, seeds, kind
                )
                ck = half_log2_det_gram(ch.g2, bmani) - half_log2_det_gram(
                    ch.g1, bmani
                )
                if kind == "r1":
                    r1v, r2v = max(0.0, raw), max(0.0, raw + ck)
                else:
                    # The bc2 objective is raw + ck; peel ck back off for R1.
                    r1v, r2v = max(0.0, raw - ck), max(0.0, raw)
                points.append(RatePoint(r1v, r2v, {"k": kmat, "kstar": ks}))
    return Frontier(pareto_filter_pairs(points), meta)


def wtc_capacity_power(ch: GaussianBc, p: float, grid: GridSpec | None = None):
    """Wiretap secrecy capacity under a total power constraint.

    Maximizes the confidential rate jointly over the trace-p constraint
    manifold and the sub-covariance; returns (value, constraint, argmax).
    """
    grid = grid or GridSpec()
    t = ch.t
    if p <= 0:
        zero = np.zeros((t, t))
        return 0.0, zero, zero
    if t == 1:
        kmat = np.array([[float(p)]])
        value, kstar = wtc_capacity(ch, kmat, grid)
        return value, kmat, kstar
    cand, tables = _power_sweep(ch, p, grid, both_confidential=True)
    order = np.argsort(-cand[:, 4], kind="stable")[: grid.starts]
    seeds = [_corner_seed(tables, cand[i], t) for i in order]
    raw, kmat, ks, _ = _power_corner_refine(ch, p, grid, tables, seeds, "r1")
    return max(0.0, float(raw)), kmat, ks


def _common_candidates(ch, b0, kmat, theta_steps, diag_steps):
    """Candidate (r0, r1, r2, outer_flat, inner_flat) rows for one constraint."""
    t = ch.t
    tuples, vb, dvals, dcombos = _grid_tables(t, theta_steps, diag_steps)
    c1k = mi_xy(ch, kmat, 1)
    c2k = mi_xy(ch, kmat, 2)
    kids = children_factors(b0[None], vb, dcombos)[0]
    n1 = kids.shape[0] * kids.shape[1]
    flat1 = kids.reshape(n1, t, t)
    l1o = 0.5 * np.log2(det_i_plus_gram(ch.g1, flat1))
    l2o = 0.5 * np.log2(det_i_plus_gram(ch.g2, flat1))
    r0 = np.minimum(c1k - l1o, c2k - l2o)
    l1i = _half_log2_pair(ch.g1, flat1, vb, dvals, t).reshape(n1, -1)
    l2i = _half_log2_pair(ch.g2, flat1, vb, dvals, t).reshape(n1, -1)
    nflat = l1i.shape[1]
    r1 = np.maximum(l1i - l2i, 0.0).ravel()
    r2 = np.maximum(l2o[:, None] - l2i, 0.0).ravel()
    outer = np.repeat(np.arange(n1), nflat)
    inner = np.tile(np.arange(nflat), n1)
    cand = np.column_stack(
        [np.maximum(r0, 0.0)[outer], r1, r2, outer, inner]
    )
    tables = {"tuples": tuples, "dcombos": dcombos}
    return cand, tables


def _reduce_triples(cand: np.ndarray, bins: int = 96) -> np.ndarray:
    """Thin triple candidates: max r2 per (r0, r1) cell, then exact filter."""
    if cand.shape[0] == 0:
        return cand
    r0, r1, r2 = cand[:, 0], cand[:, 1], cand[:, 2]
    s0 = r0.max() + 1e-12
    s1 = r1.max() + 1e-12
    b0 = np.minimum((r0 / s0 * bins).astype(np.int64), bins - 1)
    b1 = np.minimum((r1 / s1 * bins).astype(np.int64), bins - 1)
    comb = b0 * bins + b1
    best = np.full(bins * bins, -np.inf)
    np.maximum.at(best, comb, r2)
    sel = np.flatnonzero(r2 >= best[comb])
    _, firsts = np.unique(comb[sel], return_index=True)
    return cand[sel[firsts]]


def _triples_from_candidates(ch, b0, kmat, cand, tables) -> list:
    t = ch.t
    out = []
    for row in cand:
        # The inner split was swept from the chained outer factor, so the
        # same factor (not a fresh Cholesky root) must rebuild it.
        ksum, bsum, _ = _subcov_from_flat(
            b0, tables["tuples"], tables["dcombos"], int(row[3]), t
        )
        k2, _, _ = _subcov_from_flat(
            bsum, tables["tuples"], tables["dcombos"], int(row[4]), t
        )
        k1 = ksum - k2
        out.append(
            RateTriple(row[0], row[1], row[2], {"k": kmat, "k1": k1, "k2": k2})
        )
    return out


def region_common_fixed(ch: GaussianBc, k, grid: GridSpec | None = None) -> Frontier:
    """Pareto surface of (R0, R1, R2) under covariance constraint ``k``.

    Sweeps the chained parameterization: an outer sub-covariance K1+K2 of
    ``k`` (what is left carries the common message) and an inner split of
    it into the confidential layer K2 and receiver 2's private layer K1.
    """
    grid = grid or GridSpec()
    k = validate_psd(k, name="k")
    t = ch.t
    if k.shape[0] != t:
        raise ValueError("constraint dimension does not match the channel")
    meta = {
        "kind": "fixed_cov",
        "mode": "common",
        "constraint": k,
        "channel": (ch.g1, ch.g2),
        "grid": grid,
    }
    zero = np.zeros((t, t))
    if np.abs(k).max() < 1e-15:
        return Frontier([RateTriple(0, 0, 0, {"k": k, "k1": zero, "k2": zero})], meta)
    b0 = sqrt_factor(k)
    cand, tables = _common_candidates(
        ch, b0, k, grid.chain_theta_steps, grid.chain_diag_steps
    )
    cand = _reduce_triples(cand)
    cand = cand[_pareto_rows_triples(cand[:, :3])]
    points = _triples_from_candidates(ch, b0, k, cand, tables)
    return Frontier(pareto_filter_triples(points), meta)


def region_common_power(ch: GaussianBc, p: float, grid: GridSpec | None = None) -> Frontier:
    """Union of the common-message surfaces over the trace-p manifold."""
    grid = grid or GridSpec()
    if p < 0:
        raise ValueError("power must be nonnegative")
    t = ch.t
    meta = {
        "kind": "power",
        "mode": "common",
        "power": p,
        "channel": (ch.g1, ch.g2),
        "grid": grid,
    }
    zero = np.zeros((t, t))
    if p == 0:
        return Frontier(
            [RateTriple(0, 0, 0, {"k": zero, "k1": zero, "k2": zero})], meta
        )
    if t == 1:
        fr = region_common_fixed(ch, np.array([[float(p)]]), grid)
        return Frontier(fr.points, meta)
    mani_tuples, vmani, qs = _manifold_nodes(
        t, p, grid.deep_theta_steps, grid.deep_trace_steps
    )
    nodes = [(vi, qi) for vi in range(len(vmani)) for qi in range(len(qs))]

    def node_factor(node):
        vi, qi = node
        b = _mani_factor(vmani[vi], qs[qi])
        kmat = b @ b.T
        return b, 0.5 * (kmat + kmat.T)

    def work(item):
        node_idx, node = item
        b, kmat = node_factor(node)
        cand, tables = _common_candidates(
            ch, b, kmat, grid.deep_theta_steps, grid.deep_diag_steps
        )
        cand = _reduce_triples(cand, bins=64)
        return np.column_stack([cand, np.full(cand.shape[0], node_idx)]), tables

    parts = _map_ordered(work, list(enumerate(nodes)))
    tables = parts[0][1]
    cand = np.vstack([c for c, _ in parts])
    cand = _reduce_triples(cand)
    cand = cand[_pareto_rows_triples(cand[:, :3])]
    points = []
    for row in cand:
        b, kmat = node_factor(nodes[int(row[5])])
        points.extend(
            _triples_from_candidates(ch, b, kmat, row[None, :5], tables)
        )
    return Frontier(pareto_filter_triples(points), meta)


def check_k1_zero(ch: GaussianBc, k, samples: int = 100, seed: int = 0) -> bool:
    """Verify that dropping the artificial-noise layer never shrinks rates.

    For each random split (K1, K2) with K1 + K2 below ``k``, the rate
    pair of the split must be dominated by the point generated with
    K1 = 0 and the same total budget reassigned, i.e. by the wiretap
    optimum over K* below K1 + K2 (whose private rate is automatically
    at least the split's).  Comparisons carry a 1e-6 optimizer slack.
    """
    k = validate_psd(k, name="k")
    t = ch.t
    rng = np.random.default_rng(seed)
    m = t * (t - 1) // 2
    b0 = sqrt_factor(k)
    # Moderate per-sample sweep; refinement is seeded with the grid top,
    # the split's own parameters and the full-budget point, which keeps
    # the 1e-6 comparison honest at this resolution.
    igrid = GridSpec(
        theta_steps=24, diag_steps=13, starts=2, refine_iters=36, refine_tol=1e-5
    )
    eye = np.eye(t)

    def half_l2(g, mat):
        a = g @ mat @ g.T
        return 0.5 * np.linalg.slogdet(eye + a)[1] / math.log(2.0)

    for _ in range(samples):
        p_out = np.concatenate(
            [rng.uniform(0, 2 * math.pi, m), rng.uniform(0, 1, t)]
        )
        p_in = np.concatenate(
            [rng.uniform(0, 2 * math.pi, m), rng.uniform(0, 1, t)]
        )
        (bsum,) = chain_factor(b0, p_out, t, 1)
        ksum = bsum @ bsum.T
        (b2,) = chain_factor(bsum, p_in, t, 1)
        k2 = b2 @ b2.T
        k1 = ksum - k2
        r1_split = (
            half_l2(ch.g1, ksum)
            - half_l2(ch.g1, k1)
            - half_l2(ch.g2, ksum)
            + half_l2(ch.g2, k1)
        )
        r2_split = half_l2(ch.g2, k) - half_l2(ch.g2, ksum)
        seeds = [p_in, np.concatenate([np.zeros(m), np.ones(t)])]
        w, _, kstar = _max_r1_fixed(ch, bsum, igrid, extra_seeds=seeds)
        r2_at = half_l2(ch.g2, k) - half_l2(ch.g2, kstar)
        if max(0.0, w) + 1e-6 < max(0.0, r1_split):
            return False
        if r2_at + 1e-6 < r2_split:
            return False
    return True
