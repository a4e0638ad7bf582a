"""Command-line driver: build, refocus, analyze-measures, synth, serve."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .consensus import (
    CompositeFocusMeasure,
    cluster_measures,
    compose_cfm,
    consensus_scores,
    consensus_window,
)
from .errors import EmptyTargets, FsrError, InvalidTargets, MissingSlices, NonContiguousExtended
from .images import write_png16
from .metrics import psnr, ssim
from .pipeline import build_representation, builtin_cfm
from .refocus import make_targets, refocus
from .representation import deserialize, serialize
from .stack import load_stack, save_stack

DEFAULT_THRESHOLD_FLAGS = {
    "w_frac": 0.10,
    "t_grad": 20.0,
    "t_bokeh": 0.9,
    "t_beta_frac": 0.30,
}


@dataclass(frozen=True)
class JobConfig:
    """Resolved configuration of one build run."""

    input_path: Path
    output_path: Path
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLD_FLAGS))
    cfm: str = "builtin"
    threads: int = 1

    def __post_init__(self):
        for name in ("w_frac", "t_beta_frac"):
            v = self.thresholds[name]
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        if not 0.0 < self.thresholds["t_bokeh"] <= 1.0:
            raise ValueError("t_bokeh must be in (0, 1]")
        if self.thresholds["t_grad"] < 0:
            raise ValueError("t_grad must be non-negative")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


def _fail(err: Exception) -> int:
    payload = {"error": type(err).__name__, "message": str(err)}
    print(json.dumps(payload), file=sys.stderr)
    if isinstance(err, MissingSlices):
        return 2
    if isinstance(err, (InvalidTargets, EmptyTargets, NonContiguousExtended)):
        return 3
    return 1


def _load_cfm(spec: str) -> CompositeFocusMeasure:
    if spec == "builtin":
        return builtin_cfm()
    return CompositeFocusMeasure.load(spec)


def cmd_build(args) -> int:
    config = JobConfig(
        input_path=Path(args.stack),
        output_path=Path(args.out),
        thresholds={
            "w_frac": args.w_frac,
            "t_grad": args.t_grad,
            "t_bokeh": args.t_bokeh,
            "t_beta_frac": args.t_beta_frac,
        },
        cfm=args.cfm,
        threads=args.threads,
    )
    os.environ.setdefault("FSR_THREADS", str(config.threads))
    stack = load_stack(config.input_path)
    rep = build_representation(
        stack, cfm=_load_cfm(config.cfm), thresholds=config.thresholds
    )
    serialize(rep, config.output_path)
    size = sum(f.stat().st_size for f in config.output_path.iterdir())
    print(
        json.dumps(
            {
                "k": rep.k,
                "labels": [int(v) for v in np.unique(rep.focusmap.index)],
                "dual_count": rep.dual.count,
                "bokeh_count": rep.bokeh.count,
                "container_bytes": size,
                "path": str(config.output_path),
            }
        )
    )
    return 0


def _target_spec(args) -> dict:
    if args.aif:
        return {"mode": "all-in-focus"}
    if args.slice is not None:
        return {"mode": "single", "label": args.slice}
    if args.range is not None:
        return {"mode": "extended", "range": list(args.range)}
    if args.labels is not None:
        return {"mode": "npr", "labels": [int(v) for v in args.labels.split(",")]}
    raise InvalidTargets("one of --slice, --range, --labels, --aif is required")


def cmd_refocus(args) -> int:
    rep = deserialize(args.container)
    spec = _target_spec(args)
    targets = make_targets(spec["mode"], spec, rep)
    out = refocus(rep, targets)
    write_png16(args.out, out)
    if args.compare:
        from .images import decode_png16

        truth = decode_png16(Path(args.compare).read_bytes())
        print(json.dumps({"psnr": psnr(out, truth), "ssim": ssim(out, truth)}))
    return 0


def cmd_analyze_measures(args) -> int:
    from .measures import focus_volume, measure_names
    from .mrf import mean_focus_mrf

    volume_sets, mean_labels, k = [], [], None
    for directory in args.stacks:
        stack = load_stack(directory)
        k = stack.k
        vols = {m: focus_volume(stack, m) for m in measure_names()}
        volume_sets.append(vols)
        mean_labels.append(mean_focus_mrf(list(vols.values())))
    w = consensus_window(k, args.w_frac)
    report = consensus_scores(volume_sets, mean_labels, w)
    clusters = cluster_measures(volume_sets)
    cfm = compose_cfm(report, clusters, count=args.members)
    if args.out:
        cfm.save(args.out)
    print(
        json.dumps(
            {
                "consensus": {n: round(v, 6) for n, v in sorted(report.chat.items())},
                "clusters": clusters.assignment,
                "m_star": clusters.m_star,
                "members": [{"name": n, "weight": w_} for n, w_ in cfm.members],
                "out": str(args.out) if args.out else None,
            }
        )
    )
    return 0


def cmd_synth(args) -> int:
    from . import synth

    makers = {
        "three-plane": lambda: synth.three_plane_scene(args.seed, args.size, args.k),
        "two-plane": lambda: synth.two_plane_scene(args.seed, args.size, args.k),
        "bokeh": lambda: synth.bokeh_scene(args.seed, args.size, args.k),
        "vignette": lambda: synth.vignette_scene(args.seed, args.size, args.k),
    }
    scene = makers[args.scene]()
    stack, gt = synth.synth_stack(scene)
    out = Path(args.out)
    save_stack(stack, out)
    if args.ground_truth:
        from .images import encode_png16_indices

        (out / "gt_labels.png").write_bytes(encode_png16_indices(gt.labels))
        (out / "gt_dual.png").write_bytes(encode_png16_indices(gt.dual + 1))
        (out / "gt_meta.json").write_text(
            json.dumps(
                {
                    "sigma_table": np.asarray(gt.sigma_table).tolist(),
                    "layer_focus": gt.layer_focus,
                },
                indent=1,
            )
        )
    print(json.dumps({"k": stack.k, "size": [stack.height, stack.width], "path": str(out)}))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.container, frontend=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fsr", description="Focal stack refocusing toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="analyze a stack into an fsr container")
    b.add_argument("stack", help="stack directory (manifest.json + slices)")
    b.add_argument("out", help="output container directory")
    b.add_argument("--cfm", default="builtin", help="composite measure JSON or 'builtin'")
    b.add_argument("--w-frac", type=float, default=0.10, dest="w_frac")
    b.add_argument("--t-grad", type=float, default=20.0, dest="t_grad")
    b.add_argument("--t-bokeh", type=float, default=0.9, dest="t_bokeh")
    b.add_argument("--t-beta-frac", type=float, default=0.30, dest="t_beta_frac")
    b.add_argument("--threads", type=int, default=1)
    b.set_defaults(func=cmd_build)

    r = sub.add_parser("refocus", help="render a focus configuration")
    r.add_argument("container")
    r.add_argument("out", help="output PNG path")
    r.add_argument("--slice", type=int, default=None)
    r.add_argument("--range", type=int, nargs=2, default=None, metavar=("A", "B"))
    r.add_argument("--labels", default=None, help="comma-separated label list")
    r.add_argument("--aif", action="store_true", help="all-in-focus")
    r.add_argument("--compare", default=None, help="reference PNG; prints PSNR/SSIM JSON")
    r.set_defaults(func=cmd_refocus)

    a = sub.add_parser("analyze-measures", help="consensus analysis over stacks")
    a.add_argument("stacks", nargs="+")
    a.add_argument("--out", default=None, help="write the composite JSON here")
    a.add_argument("--members", type=int, default=5)
    a.add_argument("--w-frac", type=float, default=0.10, dest="w_frac")
    a.set_defaults(func=cmd_analyze_measures)

    s = sub.add_parser("synth", help="render a synthetic focal stack")
    s.add_argument("out")
    s.add_argument("--scene", default="three-plane",
                   choices=["three-plane", "two-plane", "bokeh", "vignette"])
    s.add_argument("--size", type=int, default=256)
    s.add_argument("--k", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--ground-truth", action="store_true", dest="ground_truth")
    s.set_defaults(func=cmd_synth)

    v = sub.add_parser("serve", help="serve refocus operations over HTTP")
    v.add_argument("container")
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--port", type=int, default=8787)
    v.add_argument("--frontend", default=None, help="static UI directory to mount")
    v.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FsrError as err:
        return _fail(err)
    except (OSError, ValueError, KeyError) as err:
        return _fail(err)


if __name__ == "__main__":
    sys.exit(main())
