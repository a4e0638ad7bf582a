"""Consensus scoring, measure clustering, and the composite focus measure.

A measure earns consensus at a pixel when its response peak lands within
+/-w slices of the smoothed mean focus label. Measures are then clustered
by the L1 distance between their per-pixel max-normalized profiles
(single linkage), the cluster count is picked at the elbow of the
log within-cluster dispersion, and the best-consensus representative of
each cluster joins the composite with its consensus score as weight.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from .errors import EmptyVolumeSet, UnknownMeasure
from .measures import REGISTRY, focus_volume
from .stack import FocalStack

DEFAULT_MEMBER_COUNT = 5
W_FRACTION = 0.10


def consensus_window(k: int, w_frac: float = W_FRACTION) -> int:
    return max(1, round(w_frac * k))


def normalize_profiles(vol: np.ndarray) -> np.ndarray:
    """Scale each pixel's focus profile so its maximum is 1 (0 stays 0)."""
    v = np.asarray(vol, dtype=np.float64)
    peak = v.max(axis=0)
    out = np.zeros_like(v)
    ok = peak > 0
    out[:, ok] = v[:, ok] / peak[ok]
    return out


@dataclass(frozen=True)
class ConsensusReport:
    """Cumulative consensus per measure over a corpus of stacks.

    @param chat: measure name -> fraction of pixels in agreement, in [0,1].
    @param mean_labels: smoothed mean focus label map per stack.
    @param w: slice window half-width used for agreement.
    """

    chat: dict
    mean_labels: list = field(repr=False)
    w: int = 1


def consensus_scores(volume_sets: list, mean_labels: list, w: int) -> ConsensusReport:
    """Score each measure's peak agreement with the mean focus labels.

    @param volume_sets: per stack, a dict of measure name -> k x H x W volume.
    @param mean_labels: per stack, an H x W mean focus label map.
    """
    if not volume_sets:
        raise EmptyVolumeSet("no volumes supplied")
    names = sorted(volume_sets[0])
    total_pixels = sum(lbl.size for lbl in mean_labels)
    hits = {n: 0 for n in names}
    for vols, labels in zip(volume_sets, mean_labels):
        for n in names:
            peak = np.argmax(vols[n], axis=0)
            hits[n] += int((np.abs(peak - labels) <= w).sum())
    chat = {n: hits[n] / total_pixels for n in names}
    return ConsensusReport(chat=chat, mean_labels=list(mean_labels), w=w)


@dataclass(frozen=True)
class ClusterReport:
    """Measure clustering result.

    @param names: measure order used by `distances`.
    @param distances: symmetric L1 profile-distance matrix, zero diagonal.
    @param assignment: measure name -> cluster id (1..m_star).
    @param m_star: chosen cluster count.
    """

    names: list
    distances: np.ndarray = field(repr=False)
    assignment: dict = field(default_factory=dict)
    m_star: int = 1


def profile_distance_matrix(volume_sets: list) -> tuple:
    if not volume_sets:
        raise EmptyVolumeSet("no volumes supplied")
    names = sorted(volume_sets[0])
    nf = len(names)
    d = np.zeros((nf, nf))
    for vols in volume_sets:
        normed = [normalize_profiles(vols[n]) for n in names]
        for i in range(nf):
            for j in range(i + 1, nf):
                d[i, j] += float(np.abs(normed[i] - normed[j]).sum())
    d = d + d.T
    return names, d


def within_cluster_dispersion(d: np.ndarray, labels: np.ndarray) -> float:
    """Sum over clusters of pairwise distance / (2 * cluster size)."""
    total = 0.0
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        if len(idx) < 2:
            continue
        total += d[np.ix_(idx, idx)].sum() / (2.0 * len(idx))
    return total


def pick_cluster_count(d: np.ndarray, z: np.ndarray) -> int:
    """Elbow of log W_m: maximum second difference, ties to the smaller m."""
    nf = d.shape[0]
    if nf < 3:
        return 1 if np.allclose(d, 0) else nf
    logs = []
    for m in range(1, nf + 1):
        labels = fcluster(z, t=m, criterion="maxclust")
        logs.append(np.log(max(within_cluster_dispersion(d, labels), 1e-12)))
    best_m, best_curv = 2, -np.inf
    for m in range(2, nf):
        curv = logs[m - 2] - 2.0 * logs[m - 1] + logs[m]
        if curv > best_curv + 1e-12:
            best_m, best_curv = m, curv
    return best_m


def cluster_measures(volume_sets: list) -> ClusterReport:
    """Group correlated measures; single linkage over L1 profile distances."""
    names, d = profile_distance_matrix(volume_sets)
    if np.allclose(d, 0):
        return ClusterReport(names, d, {n: 1 for n in names}, 1)
    z = linkage(squareform(d, checks=False), method="single")
    m_star = pick_cluster_count(d, z)
    labels = fcluster(z, t=m_star, criterion="maxclust")
    assignment = {n: int(c) for n, c in zip(names, labels)}
    return ClusterReport(names, d, assignment, m_star)


@dataclass(frozen=True)
class CompositeFocusMeasure:
    """Weighted set of cluster-representative measures.

    @param members: (name, weight) pairs, weights positive and summing to 1,
        ordered by descending consensus (name breaks ties).
    @param m_star: cluster count behind the selection.
    """

    members: list
    m_star: int = 0
    corpus_hash: str = ""

    def __post_init__(self):
        if not self.members:
            raise ValueError("composite needs at least one member")
        total = sum(w for _, w in self.members)
        if abs(total - 1.0) > 1e-6 or any(w <= 0 for _, w in self.members):
            raise ValueError("member weights must be positive and sum to 1")

    def to_dict(self) -> dict:
        return {
            "members": [{"name": n, "weight": w} for n, w in self.members],
            "m_star": self.m_star,
            "corpus_hash": self.corpus_hash,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CompositeFocusMeasure":
        members = [(m["name"], float(m["weight"])) for m in d["members"]]
        return cls(members, int(d.get("m_star", 0)), d.get("corpus_hash", ""))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "CompositeFocusMeasure":
        return cls.from_dict(json.loads(Path(path).read_text()))


def compose_cfm(
    report: ConsensusReport, clusters: ClusterReport, count: int = DEFAULT_MEMBER_COUNT
) -> CompositeFocusMeasure:
    """Pick per-cluster representatives by consensus and weight them."""
    if not 1 <= count <= 10:
        raise ValueError("member count must be within 1..10")
    reps = []
    by_cluster = {}
    for name, cid in clusters.assignment.items():
        by_cluster.setdefault(cid, []).append(name)
    for cid, members in by_cluster.items():
        best = max(members, key=lambda n: (report.chat[n], n))
        reps.append(best)
    reps.sort(key=lambda n: (-report.chat[n], n))
    reps = reps[:count]
    total = sum(report.chat[n] for n in reps)
    if total <= 0:
        weights = [1.0 / len(reps)] * len(reps)
    else:
        weights = [report.chat[n] / total for n in reps]
    return CompositeFocusMeasure(list(zip(reps, weights)), clusters.m_star)


def cfm_response(stack: FocalStack, cfm: CompositeFocusMeasure, volumes: dict | None = None) -> np.ndarray:
    """Weighted sum of per-pixel max-normalized member volumes.

    @param volumes: optional precomputed name -> volume map to reuse.
    """
    out = None
    for name, weight in cfm.members:
        if name not in REGISTRY:
            raise UnknownMeasure(f"composite references unknown measure {name!r}")
        vol = volumes[name] if volumes and name in volumes else focus_volume(stack, name)
        normed = normalize_profiles(vol) * weight
        out = normed if out is None else out + normed
    return out.astype(np.float32)
