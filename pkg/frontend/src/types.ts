/** Container summary returned by GET /info. */
export interface StackInfo {
  k: number;
  width: number;
  height: number;
  labels: number[];
  dual_count: number;
  bokeh_count: number;
}

export type Mode = "single" | "all-in-focus" | "extended" | "npr" | "point";

/** Target spec accepted by POST /refocus (version 1 schema). */
export type TargetSpec =
  | { mode: "all-in-focus" }
  | { mode: "single"; label: number }
  | { mode: "extended"; range: [number, number] }
  | { mode: "extended"; labels: number[] }
  | { mode: "npr"; labels: number[] }
  | { mode: "point"; point: { x: number; y: number; spread: number } };

export interface OverlayToggles {
  focus: boolean;
  dual: boolean;
  bokeh: boolean;
}

export interface ViewState {
  renderUrl: string | null;
  mode: Mode;
  point: { x: number; y: number } | null;
  spread: number;
  overlays: OverlayToggles;
}
