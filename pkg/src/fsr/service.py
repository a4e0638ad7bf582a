"""Local HTTP service exposing refocus operations to the browser UI."""

from __future__ import annotations

import threading
from collections import OrderedDict
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response

from .errors import EmptyTargets, InvalidTargets, NonContiguousExtended
from .images import encode_png16, encode_png16_indices
from .refocus import make_targets, refocus
from .representation import Representation, deserialize

SPEC_VERSION = 1
CACHE_CAPACITY = 16
MODES = ("single", "all-in-focus", "extended", "npr", "point")


def _bad(detail: str):
    return HTTPException(status_code=400, detail=detail)


def resolve_spec(spec, rep: Representation) -> dict:
    """Normalize a client target spec; point clicks become label ranges."""
    if not isinstance(spec, dict):
        raise _bad("spec must be a JSON object")
    if int(spec.get("version", SPEC_VERSION)) != SPEC_VERSION:
        raise _bad(f"unsupported spec version {spec.get('version')}")
    mode = spec.get("mode")
    if mode not in MODES:
        raise _bad(f"mode must be one of {MODES}")
    try:
        if mode == "point":
            pt = spec["point"]
            x, y = int(pt["x"]), int(pt["y"])
            if not (0 <= x < rep.width and 0 <= y < rep.height):
                raise _bad(f"point ({x}, {y}) outside {rep.width}x{rep.height}")
            spread = int(pt.get("spread", 0))
            if spread < 0:
                raise _bad("spread must be non-negative")
            label = int(rep.focusmap.index[y, x])
            lo = max(0, label - spread)
            hi = min(rep.k - 1, label + spread)
            return {"mode": "extended", "range": [lo, hi]}
        if mode == "single":
            return {"mode": "single", "label": int(spec["label"])}
        if mode == "extended":
            if "range" in spec:
                lo, hi = (int(v) for v in spec["range"])
                return {"mode": "extended", "range": [lo, hi]}
            return {"mode": "extended", "labels": [int(v) for v in spec["labels"]]}
        if mode == "npr":
            return {"mode": "npr", "labels": [int(v) for v in spec["labels"]]}
        return {"mode": "all-in-focus"}
    except HTTPException:
        raise
    except (KeyError, TypeError, ValueError) as err:
        raise _bad(f"malformed spec: {err}")


def create_app(container: str | Path, frontend: str | Path | None = None) -> FastAPI:
    """Application serving one container; renders are cached (LRU)."""
    rep = deserialize(container)
    app = FastAPI(title="fsr refocus service")
    cache: OrderedDict[str, bytes] = OrderedDict()
    lock = threading.Lock()
    app.state.render_cache = cache

    info = {
        "k": rep.k,
        "width": rep.width,
        "height": rep.height,
        "labels": [int(v) for v in np.unique(rep.focusmap.index)],
        "dual_count": rep.dual.count,
        "bokeh_count": rep.bokeh.count,
    }
    focus_png = encode_png16_indices(rep.focusmap.index)
    # sparse layers ship as masks: dual stores index+1 so "absent" is 0
    dual_png = encode_png16_indices(rep.dual.index.astype(np.int64) + 1)
    bokeh_png = encode_png16_indices(rep.bokeh.mask.astype(np.int32))
    preview_png = encode_png16(rep.focusmap.image)

    @app.get("/info")
    def get_info():
        return info

    @app.get("/map/focus")
    def get_focus_map():
        return Response(content=focus_png, media_type="image/png")

    @app.get("/map/dual")
    def get_dual_map():
        return Response(content=dual_png, media_type="image/png")

    @app.get("/map/bokeh")
    def get_bokeh_map():
        return Response(content=bokeh_png, media_type="image/png")

    @app.get("/slice/preview")
    def get_preview():
        return Response(content=preview_png, media_type="image/png")

    @app.post("/refocus")
    async def post_refocus(request: Request):
        try:
            spec = await request.json()
        except Exception:
            raise _bad("body must be JSON")
        resolved = resolve_spec(spec, rep)
        try:
            targets = make_targets(resolved["mode"], resolved, rep)
        except (InvalidTargets, EmptyTargets, NonContiguousExtended) as err:
            raise HTTPException(status_code=422, detail=str(err))
        key = ",".join(str(l) for l in targets.labels)
        with lock:
            if key in cache:
                cache.move_to_end(key)
                return Response(content=cache[key], media_type="image/png")
            png = encode_png16(refocus(rep, targets))
            cache[key] = png
            while len(cache) > CACHE_CAPACITY:
                cache.popitem(last=False)
        return Response(content=png, media_type="image/png")

    if frontend is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(frontend), html=True), name="ui")
    return app
