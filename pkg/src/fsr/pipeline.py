"""End-to-end construction of the compact representation from a stack."""

from __future__ import annotations

import importlib.resources
import json

from .calibrate import build_pi
from .consensus import CompositeFocusMeasure, cfm_response, consensus_window
from .costvolume import build_cost_volume, filter_cost_volume
from .focusmaps import (
    DualFocusLayer,
    FocusMap,
    detect_bokeh,
    detect_dual_focus,
    extract_focus_map,
)
from .images import quantize_unit
from .representation import DEFAULT_THRESHOLDS, Representation
from .stack import FocalStack, align_stack


def builtin_cfm() -> CompositeFocusMeasure:
    """Composite focus measure shipped with the package."""
    text = (
        importlib.resources.files("fsr").joinpath("data/cfm_builtin.json").read_text()
    )
    return CompositeFocusMeasure.from_dict(json.loads(text))


def build_representation(
    stack: FocalStack,
    cfm: CompositeFocusMeasure | None = None,
    thresholds: dict | None = None,
    align: bool = True,
) -> Representation:
    """Run the full analysis: focus map, dual layer, bokeh, kernel table.

    Image payloads are quantized to the 16-bit grid so the produced
    representation serializes and round-trips exactly.
    """
    thr = dict(DEFAULT_THRESHOLDS)
    thr.update(thresholds or {})
    if cfm is None:
        cfm = builtin_cfm()
    if align and not stack.aligned:
        stack = align_stack(stack)

    response = cfm_response(stack, cfm)
    cv = filter_cost_volume(build_cost_volume(response, stack))
    fm = extract_focus_map(cv, stack)
    fm = FocusMap(index=fm.index, image=quantize_unit(fm.image))

    kernels = build_pi(stack, fm.index, fm.image)

    w = consensus_window(stack.k, thr["w_frac"])
    dual = detect_dual_focus(cv, fm, stack, w=w, t_grad=thr["t_grad"])
    dual = DualFocusLayer(index=dual.index, image=quantize_unit(dual.image))

    bokeh = detect_bokeh(stack, kernels.sigma, t_bokeh=thr["t_bokeh"])
    return Representation(fm, dual, bokeh, kernels, stack.geometry, stack.k, thr)
