/** Overlay rasterization: label and mask maps to 40%-alpha RGBA pixels. */

import type { GrayImage } from "./png.js";

export const OVERLAY_ALPHA = Math.round(0.4 * 255);

/** Evenly spaced hues around the wheel, one per focus label. */
export function labelPalette(k: number): [number, number, number][] {
  const palette: [number, number, number][] = [];
  for (let i = 0; i < k; i++) {
    const h = (i / Math.max(k, 1)) * 6;
    const x = 1 - Math.abs((h % 2) - 1);
    const sector: [number, number, number][] = [
      [1, x, 0],
      [x, 1, 0],
      [0, 1, x],
      [0, x, 1],
      [x, 0, 1],
      [1, 0, x],
    ];
    const [r, g, b] = sector[Math.min(Math.floor(h), 5)]!;
    palette.push([Math.round(r * 255), Math.round(g * 255), Math.round(b * 255)]);
  }
  return palette;
}

/** Color every pixel by its focus label at overlay alpha. */
export function colorizeLabels(map: GrayImage, k: number): Uint8ClampedArray {
  const palette = labelPalette(k);
  const out = new Uint8ClampedArray(map.width * map.height * 4);
  for (let i = 0; i < map.data.length; i++) {
    const label = Math.min(map.data[i]!, k - 1);
    const [r, g, b] = palette[label]!;
    out[4 * i] = r;
    out[4 * i + 1] = g;
    out[4 * i + 2] = b;
    out[4 * i + 3] = OVERLAY_ALPHA;
  }
  return out;
}

/** Tint non-zero pixels of a mask map; zero pixels stay transparent. */
export function tintMask(map: GrayImage, rgb: [number, number, number]): Uint8ClampedArray {
  const out = new Uint8ClampedArray(map.width * map.height * 4);
  for (let i = 0; i < map.data.length; i++) {
    if (map.data[i]! === 0) continue;
    out[4 * i] = rgb[0];
    out[4 * i + 1] = rgb[1];
    out[4 * i + 2] = rgb[2];
    out[4 * i + 3] = OVERLAY_ALPHA;
  }
  return out;
}

/** Count of non-transparent overlay pixels (mask support size). */
export function activePixels(rgba: Uint8ClampedArray): number {
  let n = 0;
  for (let i = 3; i < rgba.length; i += 4) {
    if (rgba[i]! > 0) n++;
  }
  return n;
}
