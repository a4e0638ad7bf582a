/** Target-spec construction and validation.
 *
 * Every request the UI issues goes through validateSpec first, so any
 * sequence of user actions maps to a well-formed spec or no request at all.
 */

import type { StackInfo, TargetSpec } from "./types.js";

/** Depth-of-field width is always kept inside [0, k-1]. */
export function clampSpread(spread: number, k: number): number {
  if (!Number.isFinite(spread)) return 0;
  return Math.min(Math.max(Math.round(spread), 0), k - 1);
}

export function pointInBounds(x: number, y: number, info: StackInfo): boolean {
  return Number.isInteger(x) && Number.isInteger(y) && x >= 0 && y >= 0 && x < info.width && y < info.height;
}

/** Spec for a click at (x, y) with the current spread. */
export function pointSpec(x: number, y: number, spread: number, info: StackInfo): TargetSpec {
  return { mode: "point", point: { x, y, spread: clampSpread(spread, info.k) } };
}

export function allInFocusSpec(): TargetSpec {
  return { mode: "all-in-focus" };
}

function isLabel(v: unknown, k: number): v is number {
  return typeof v === "number" && Number.isInteger(v) && v >= 0 && v < k;
}

/** True iff the spec is well-formed for a k-slice stack of the given size. */
export function validateSpec(spec: TargetSpec, info: StackInfo): boolean {
  switch (spec.mode) {
    case "all-in-focus":
      return true;
    case "single":
      return isLabel(spec.label, info.k);
    case "extended":
      if ("range" in spec) {
        const [lo, hi] = spec.range;
        return isLabel(lo, info.k) && isLabel(hi, info.k) && lo <= hi;
      }
      return (
        spec.labels.length > 0 &&
        spec.labels.every((l) => isLabel(l, info.k)) &&
        contiguous(spec.labels)
      );
    case "npr":
      return spec.labels.length > 0 && spec.labels.every((l) => isLabel(l, info.k));
    case "point": {
      const { x, y, spread } = spec.point;
      return (
        pointInBounds(x, y, info) &&
        Number.isInteger(spread) &&
        spread >= 0 &&
        spread <= info.k - 1
      );
    }
  }
}

function contiguous(labels: number[]): boolean {
  const sorted = [...new Set(labels)].sort((a, b) => a - b);
  return sorted.every((l, i) => i === 0 || l === sorted[i - 1]! + 1);
}

function canonical(value: unknown): unknown {
  if (Array.isArray(value)) return value.map(canonical);
  if (value !== null && typeof value === "object") {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value).sort()) {
      out[key] = canonical((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}

/** Stable string form; equal specs stringify identically. */
export function specKey(spec: TargetSpec): string {
  return JSON.stringify(canonical(spec));
}
