import { describe, expect, it } from "vitest";

import {
  allInFocusSpec,
  clampSpread,
  pointInBounds,
  pointSpec,
  specKey,
  validateSpec,
} from "../src/spec.js";
import type { StackInfo, TargetSpec } from "../src/types.js";

const info: StackInfo = {
  k: 6,
  width: 128,
  height: 96,
  labels: [0, 1, 2, 3, 4, 5],
  dual_count: 10,
  bokeh_count: 0,
};

describe("clampSpread", () => {
  it("keeps in-range values", () => {
    expect(clampSpread(3, 6)).toBe(3);
    expect(clampSpread(0, 6)).toBe(0);
    expect(clampSpread(5, 6)).toBe(5);
  });

  it("clamps to [0, k-1]", () => {
    expect(clampSpread(-2, 6)).toBe(0);
    expect(clampSpread(99, 6)).toBe(5);
  });

  it("rounds fractional slider values", () => {
    expect(clampSpread(2.4, 6)).toBe(2);
    expect(clampSpread(2.6, 6)).toBe(3);
  });

  it("treats non-finite input as zero", () => {
    expect(clampSpread(Number.NaN, 6)).toBe(0);
    expect(clampSpread(Number.POSITIVE_INFINITY, 6)).toBe(0);
  });
});

describe("pointInBounds", () => {
  it("accepts interior integer coordinates", () => {
    expect(pointInBounds(0, 0, info)).toBe(true);
    expect(pointInBounds(127, 95, info)).toBe(true);
  });

  it("rejects coordinates outside the frame", () => {
    expect(pointInBounds(-1, 0, info)).toBe(false);
    expect(pointInBounds(128, 0, info)).toBe(false);
    expect(pointInBounds(0, 96, info)).toBe(false);
  });

  it("rejects fractional coordinates", () => {
    expect(pointInBounds(1.5, 2, info)).toBe(false);
  });
});

describe("pointSpec", () => {
  it("builds a point spec with the clamped spread", () => {
    expect(pointSpec(10, 20, 99, info)).toEqual({
      mode: "point",
      point: { x: 10, y: 20, spread: 5 },
    });
  });
});

describe("validateSpec", () => {
  it("accepts all-in-focus unconditionally", () => {
    expect(validateSpec(allInFocusSpec(), info)).toBe(true);
  });

  it("checks single labels against k", () => {
    expect(validateSpec({ mode: "single", label: 0 }, info)).toBe(true);
    expect(validateSpec({ mode: "single", label: 5 }, info)).toBe(true);
    expect(validateSpec({ mode: "single", label: 6 }, info)).toBe(false);
    expect(validateSpec({ mode: "single", label: -1 }, info)).toBe(false);
    expect(validateSpec({ mode: "single", label: 1.5 }, info)).toBe(false);
  });

  it("checks extended ranges for order and bounds", () => {
    expect(validateSpec({ mode: "extended", range: [1, 4] }, info)).toBe(true);
    expect(validateSpec({ mode: "extended", range: [2, 2] }, info)).toBe(true);
    expect(validateSpec({ mode: "extended", range: [4, 1] }, info)).toBe(false);
    expect(validateSpec({ mode: "extended", range: [0, 6] }, info)).toBe(false);
  });

  it("requires extended label lists to be contiguous", () => {
    expect(validateSpec({ mode: "extended", labels: [2, 3, 4] }, info)).toBe(true);
    expect(validateSpec({ mode: "extended", labels: [4, 2, 3] }, info)).toBe(true);
    expect(validateSpec({ mode: "extended", labels: [0, 2] }, info)).toBe(false);
    expect(validateSpec({ mode: "extended", labels: [] }, info)).toBe(false);
  });

  it("allows gaps in npr label lists but not empty or out-of-range ones", () => {
    expect(validateSpec({ mode: "npr", labels: [0, 2, 5] }, info)).toBe(true);
    expect(validateSpec({ mode: "npr", labels: [] }, info)).toBe(false);
    expect(validateSpec({ mode: "npr", labels: [0, 9] }, info)).toBe(false);
  });

  it("checks point coordinates and spread", () => {
    expect(validateSpec(pointSpec(64, 48, 2, info), info)).toBe(true);
    expect(validateSpec({ mode: "point", point: { x: 128, y: 0, spread: 0 } }, info)).toBe(false);
    expect(validateSpec({ mode: "point", point: { x: 0, y: 0, spread: -1 } }, info)).toBe(false);
    expect(validateSpec({ mode: "point", point: { x: 0, y: 0, spread: 6 } }, info)).toBe(false);
    expect(validateSpec({ mode: "point", point: { x: 0.5, y: 0, spread: 0 } }, info)).toBe(false);
  });
});

describe("specKey", () => {
  it("is independent of object key order", () => {
    const a = { mode: "point", point: { x: 1, y: 2, spread: 3 } } as TargetSpec;
    const b = { point: { spread: 3, y: 2, x: 1 }, mode: "point" } as TargetSpec;
    expect(specKey(a)).toBe(specKey(b));
  });

  it("keeps nested point fields in the key", () => {
    const key = specKey(pointSpec(7, 9, 1, info));
    expect(key).toContain('"x":7');
    expect(key).toContain('"y":9');
    expect(key).toContain('"spread":1');
  });

  it("distinguishes different targets", () => {
    expect(specKey({ mode: "single", label: 1 })).not.toBe(specKey({ mode: "single", label: 2 }));
    expect(specKey({ mode: "extended", range: [1, 3] })).not.toBe(
      specKey({ mode: "extended", labels: [1, 2, 3] }),
    );
  });
});
