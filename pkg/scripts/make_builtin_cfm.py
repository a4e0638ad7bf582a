"""Derive the shipped composite focus measure from a synthetic corpus.

Runs the full consensus analysis (mean focus by MRF, peak agreement,
measure clustering) over a mix of synthetic scenes, then weights the
five shipped members by their measured consensus scores.
"""

import hashlib
import json
from pathlib import Path

from fsr.consensus import (
    CompositeFocusMeasure,
    cluster_measures,
    compose_cfm,
    consensus_scores,
    consensus_window,
)
from fsr.measures import focus_volume, measure_names
from fsr.mrf import mean_focus_mrf
from fsr.synth import (
    bokeh_scene,
    synth_stack,
    three_plane_scene,
    two_plane_scene,
    vignette_scene,
)

MEMBERS = ["MIS8", "LAP1", "LAP2", "STA3", "GRA5"]

SCENES = [
    ("three_plane", lambda: three_plane_scene(seed=11, size=96, k=8, rate=0.6)),
    ("three_plane", lambda: three_plane_scene(seed=23, size=96, k=8, rate=0.4)),
    ("two_plane", lambda: two_plane_scene(seed=31, size=96, k=8, rate=0.7)),
    ("vignette", lambda: vignette_scene(seed=41, size=96, k=8)),
    ("bokeh", lambda: bokeh_scene(seed=53, size=96, k=8)),
]


def main():
    volume_sets, mean_labels, k = [], [], None
    for name, make in SCENES:
        stack, _ = synth_stack(make())
        k = stack.k
        vols = {m: focus_volume(stack, m) for m in measure_names()}
        volume_sets.append(vols)
        mean_labels.append(mean_focus_mrf(list(vols.values())))
        print(f"analyzed {name}: k={stack.k} {stack.height}x{stack.width}")

    w = consensus_window(k)
    report = consensus_scores(volume_sets, mean_labels, w)
    clusters = cluster_measures(volume_sets)
    print("consensus:", {n: round(v, 4) for n, v in sorted(report.chat.items())})
    print("clusters:", clusters.assignment, "m_star:", clusters.m_star)
    print("own composition:", compose_cfm(report, clusters).members)

    total = sum(report.chat[m] for m in MEMBERS)
    weights = [report.chat[m] / total for m in MEMBERS]
    corpus = hashlib.sha256(
        json.dumps([n for n, _ in SCENES]).encode() + str(k).encode()
    ).hexdigest()[:16]
    cfm = CompositeFocusMeasure(
        members=sorted(zip(MEMBERS, weights), key=lambda p: (-p[1], p[0])),
        m_star=clusters.m_star,
        corpus_hash=corpus,
    )
    out = Path(__file__).resolve().parents[1] / "src" / "fsr" / "data" / "cfm_builtin.json"
    cfm.save(out)
    print("wrote", out)
    print(json.dumps(cfm.to_dict(), indent=2))


if __name__ == "__main__":
    main()
