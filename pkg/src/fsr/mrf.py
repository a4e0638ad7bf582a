"""Mean focus labeling as a multi-label Potts MRF.

Data cost per pixel and label is exp(-sum_j Fhat_j), where Fhat_j is the
measure response normalized by its per-pixel profile sum (measures with
an all-zero profile at a pixel are skipped). Labels are optimized with
alpha-expansion moves, each solved exactly as an s-t min cut; total
energy never increases across sweeps and the sweep order is fixed, so
results are deterministic.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, maximum_flow

from .errors import EmptyVolumeSet

INT_SCALE = 1_000_000_000  # float costs -> integer capacities
DEFAULT_LAMBDA_FRAC = 0.05
MAX_SWEEPS = 10


def data_cost_volume(volumes: list) -> np.ndarray:
    """k x H x W cost exp(-sum of profile-normalized responses)."""
    if not volumes:
        raise EmptyVolumeSet("need at least one focus volume")
    score = np.zeros_like(np.asarray(volumes[0], dtype=np.float64))
    for vol in volumes:
        v = np.asarray(vol, dtype=np.float64)
        denom = v.sum(axis=0)
        ok = denom > 0
        norm = np.zeros_like(v)
        norm[:, ok] = v[:, ok] / denom[ok]
        score += norm
    return np.exp(-score)


def potts_energy(labels: np.ndarray, cost: np.ndarray, lam: float) -> float:
    k, h, w = cost.shape
    data = cost[labels, np.arange(h)[:, None], np.arange(w)[None, :]].sum()
    smooth = (labels[:, 1:] != labels[:, :-1]).sum() + (labels[1:, :] != labels[:-1, :]).sum()
    return float(data + lam * smooth)


def _expand(labels: np.ndarray, cost: np.ndarray, lam: float, alpha: int) -> np.ndarray:
    """One alpha-expansion move solved as an exact min cut."""
    k, h, w = cost.shape
    n = h * w
    flat = labels.ravel()
    ids = np.arange(n).reshape(h, w)

    d_alpha = np.rint(cost[alpha].ravel() * INT_SCALE).astype(np.int64)
    d_keep = np.rint(
        cost[flat, np.repeat(np.arange(h), w), np.tile(np.arange(w), h)] * INT_SCALE
    ).astype(np.int64)
    lam_i = np.int64(round(lam * INT_SCALE))

    pairs = [
        (ids[:, :-1].ravel(), ids[:, 1:].ravel()),
        (ids[:-1, :].ravel(), ids[1:, :].ravel()),
    ]
    same_u, same_v, aux_p, aux_q, aux_cp, aux_cq = [], [], [], [], [], []
    for pu, pv in pairs:
        lu, lv = flat[pu], flat[pv]
        same = lu == lv
        diff = ~same
        keep = same & (lu != alpha)
        same_u.append(pu[keep])
        same_v.append(pv[keep])
        aux_p.append(pu[diff])
        aux_q.append(pv[diff])
        aux_cp.append(np.where(lu[diff] != alpha, lam_i, 0).astype(np.int64))
        aux_cq.append(np.where(lv[diff] != alpha, lam_i, 0).astype(np.int64))

    # node layout: 0 = source, 1..n = pixels, then one auxiliary per
    # mixed-label neighbor pair, last = sink; a pixel on the source side
    # keeps its label, on the sink side it takes alpha
    pix = np.arange(1, n + 1, dtype=np.int64)
    su = np.concatenate(same_u) + 1
    sv = np.concatenate(same_v) + 1
    ap = np.concatenate(aux_p) + 1
    aq = np.concatenate(aux_q) + 1
    acp = np.concatenate(aux_cp)
    acq = np.concatenate(aux_cq)
    n_aux = len(ap)
    aux_ids = n + 1 + np.arange(n_aux, dtype=np.int64)
    sink = n + 1 + n_aux

    lam_full = np.full(len(su), lam_i)
    rows = np.concatenate(
        [np.zeros(n, dtype=np.int64), pix, su, sv, ap, aux_ids, aq, aux_ids, aux_ids]
    )
    cols = np.concatenate(
        [pix, np.full(n, sink), sv, su, aux_ids, ap, aux_ids, aq, np.full(n_aux, sink)]
    )
    caps = np.concatenate(
        [d_alpha, d_keep, lam_full, lam_full, acp, acp, acq, acq, np.full(n_aux, lam_i)]
    )

    g = csr_matrix((caps, (rows, cols)), shape=(sink + 1, sink + 1))
    res = maximum_flow(g, 0, sink)
    residual = g - res.flow
    adj = csr_matrix(
        (residual.data > 0, residual.indices, residual.indptr), shape=residual.shape
    )
    reach = breadth_first_order(adj, 0, directed=True, return_predecessors=False)
    source_side = np.zeros(sink + 1, dtype=bool)
    source_side[reach] = True

    out = flat.copy()
    out[~source_side[1 : n + 1]] = alpha
    return out.reshape(h, w)


def alpha_expansion(cost: np.ndarray, lam: float, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """Minimize data + Potts smoothness; returns the label map."""
    k = cost.shape[0]
    labels = np.argmin(cost, axis=0).astype(np.int64)
    if k == 1 or lam < 0:
        return labels.astype(np.int32)
    energy = potts_energy(labels, cost, lam)
    for _ in range(max_sweeps):
        changed = False
        for alpha in range(k):
            proposal = _expand(labels, cost, lam, alpha)
            e = potts_energy(proposal, cost, lam)
            if e < energy - 1e-12:
                labels = proposal
                energy = e
                changed = True
        if not changed:
            break
    return labels.astype(np.int32)


def mean_focus_mrf(volumes: list, lam: float | None = None, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """Smoothed per-pixel mean focus label from all supplied focus volumes."""
    cost = data_cost_volume(volumes)
    if lam is None:
        lam = DEFAULT_LAMBDA_FRAC * float(cost.max())
    return alpha_expansion(cost, lam, max_sweeps)
