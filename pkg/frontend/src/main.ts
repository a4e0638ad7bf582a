/** DOM shell: wires the canvas, slider, overlays, and history together.
 *
 * All imaging math happens server-side; this file only moves bytes
 * between the service and the screen.
 */

import { ApiClient, ServiceError } from "./client.js";
import { History } from "./history.js";
import { decodeGray, type GrayImage } from "./png.js";
import { activePixels, colorizeLabels, tintMask } from "./overlay.js";
import { allInFocusSpec, clampSpread, pointInBounds, pointSpec, specKey } from "./spec.js";
import type { OverlayToggles, StackInfo, TargetSpec } from "./types.js";

const DUAL_TINT: [number, number, number] = [255, 64, 224];
const BOKEH_TINT: [number, number, number] = [255, 208, 0];

interface HistoryEntry {
  spec: TargetSpec;
  label: string;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function describe(spec: TargetSpec): string {
  switch (spec.mode) {
    case "point":
      return `point (${spec.point.x}, ${spec.point.y}) spread ${spec.point.spread}`;
    case "all-in-focus":
      return "all-in-focus";
    case "single":
      return `slice ${spec.label}`;
    case "extended":
      return "range" in spec ? `range ${spec.range[0]}..${spec.range[1]}` : `labels ${spec.labels.join(",")}`;
    case "npr":
      return `labels ${spec.labels.join(",")}`;
  }
}

class App {
  private info!: StackInfo;
  private history = new History<HistoryEntry>();
  private maps: Partial<Record<"focus" | "dual" | "bokeh", GrayImage>> = {};
  private overlays: OverlayToggles = { focus: false, dual: false, bokeh: false };
  private renderUrl: string | null = null;
  private point: { x: number; y: number } | null = null;
  private spread = 0;

  constructor(private client: ApiClient) {}

  async start(): Promise<void> {
    this.info = await this.client.getInfo();
    const { k, width, height, dual_count, bokeh_count } = this.info;
    el("meta").textContent =
      `${width}x${height}, ${k} slices, ${dual_count} dual px, ${bokeh_count} bokeh px`;

    const image = el<HTMLImageElement>("render");
    image.src = this.client.previewUrl();
    image.width = width;
    image.height = height;
    const overlay = el<HTMLCanvasElement>("overlay");
    overlay.width = width;
    overlay.height = height;

    const slider = el<HTMLInputElement>("spread");
    slider.max = String(k - 1);
    slider.value = "0";
    slider.addEventListener("input", () => {
      this.spread = clampSpread(Number(slider.value), k);
      el("spread-value").textContent = String(this.spread);
      if (this.point) {
        void this.request(pointSpec(this.point.x, this.point.y, this.spread, this.info));
      }
    });

    overlay.addEventListener("click", (event) => {
      const rect = overlay.getBoundingClientRect();
      const x = Math.floor(((event.clientX - rect.left) / rect.width) * width);
      const y = Math.floor(((event.clientY - rect.top) / rect.height) * height);
      if (!pointInBounds(x, y, this.info)) return;
      this.point = { x, y };
      void this.request(pointSpec(x, y, this.spread, this.info));
    });

    el("aif").addEventListener("click", () => void this.request(allInFocusSpec()));
    el("back").addEventListener("click", () => void this.navigate(this.history.back()));
    el("forward").addEventListener("click", () => void this.navigate(this.history.forward()));

    for (const layer of ["focus", "dual", "bokeh"] as const) {
      el<HTMLInputElement>(`overlay-${layer}`).addEventListener("change", (event) => {
        this.overlays[layer] = (event.target as HTMLInputElement).checked;
        void this.drawOverlays();
      });
    }
  }

  /** POST the spec; superseded requests dissolve quietly. */
  private async request(spec: TargetSpec, fromHistory = false): Promise<void> {
    try {
      const result = await this.client.refocus(spec, this.info);
      if (result === null) return;
      if (this.renderUrl) URL.revokeObjectURL(this.renderUrl);
      this.renderUrl = URL.createObjectURL(result.blob);
      const image = el<HTMLImageElement>("render");
      image.src = this.renderUrl;
      const download = el<HTMLAnchorElement>("download");
      download.href = this.renderUrl;
      if (!fromHistory) {
        this.history.push({ spec, label: describe(spec) });
      }
      this.renderHistory();
      el("status").textContent = describe(spec);
    } catch (err) {
      if (err instanceof ServiceError) {
        this.toast(err.message);
      } else {
        throw err;
      }
    }
  }

  private async navigate(entry: HistoryEntry | null): Promise<void> {
    if (entry) await this.request(entry.spec, true);
  }

  private renderHistory(): void {
    const list = el<HTMLUListElement>("history");
    list.replaceChildren(
      ...this.history.list().map((entry, index) => {
        const item = document.createElement("li");
        item.textContent = entry.label;
        if (entry === this.history.current()) item.className = "current";
        item.addEventListener("click", () => void this.request(entry.spec, true));
        return item;
      }),
    );
  }

  private async map(name: "focus" | "dual" | "bokeh"): Promise<GrayImage> {
    const cached = this.maps[name];
    if (cached) return cached;
    const decoded = await decodeGray(await this.client.getMap(name));
    this.maps[name] = decoded;
    return decoded;
  }

  private async drawOverlays(): Promise<void> {
    const overlay = el<HTMLCanvasElement>("overlay");
    const ctx = overlay.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, overlay.width, overlay.height);
    const layers: [keyof OverlayToggles, () => Promise<Uint8ClampedArray>][] = [
      ["focus", async () => colorizeLabels(await this.map("focus"), this.info.k)],
      ["dual", async () => tintMask(await this.map("dual"), DUAL_TINT)],
      ["bokeh", async () => tintMask(await this.map("bokeh"), BOKEH_TINT)],
    ];
    for (const [name, make] of layers) {
      if (!this.overlays[name]) continue;
      const rgba = await make();
      if (activePixels(rgba) === 0) continue;
      const tile = new OffscreenCanvas(overlay.width, overlay.height);
      const tileCtx = tile.getContext("2d")!;
      tileCtx.putImageData(new ImageData(new Uint8ClampedArray(rgba), overlay.width, overlay.height), 0, 0);
      ctx.drawImage(tile, 0, 0);
    }
  }

  private toast(message: string): void {
    const node = el("toast");
    node.textContent = message;
    node.classList.add("visible");
    setTimeout(() => node.classList.remove("visible"), 4000);
  }
}

if (typeof document !== "undefined") {
  const app = new App(new ApiClient());
  void app.start().catch((err) => {
    document.body.textContent = `failed to load container info: ${err}`;
  });
}

export { App, describe };
