/** HTTP client for the refocus service.
 *
 * At most one render request is in flight: issuing a new one aborts the
 * pending request, so a burst of clicks or slider moves resolves to the
 * latest action. Superseded requests resolve to null.
 */

import { specKey, validateSpec } from "./spec.js";
import type { StackInfo, TargetSpec } from "./types.js";

export class ServiceError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export interface RenderResult {
  blob: Blob;
  key: string;
}

type FetchLike = typeof fetch;

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: string };
    if (typeof body.detail === "string") return body.detail;
  } catch {
    /* non-JSON error body */
  }
  return `request failed with status ${response.status}`;
}

export class ApiClient {
  private inflight: AbortController | null = null;

  constructor(private baseUrl: string = "", private fetchImpl: FetchLike = fetch) {}

  async getInfo(): Promise<StackInfo> {
    const response = await this.fetchImpl(`${this.baseUrl}/info`);
    if (!response.ok) throw new ServiceError(response.status, await errorDetail(response));
    return (await response.json()) as StackInfo;
  }

  async getMap(name: "focus" | "dual" | "bokeh"): Promise<Uint8Array> {
    const response = await this.fetchImpl(`${this.baseUrl}/map/${name}`);
    if (!response.ok) throw new ServiceError(response.status, await errorDetail(response));
    return new Uint8Array(await response.arrayBuffer());
  }

  previewUrl(): string {
    return `${this.baseUrl}/slice/preview`;
  }

  /**
   * Render the given targets. Resolves to null when superseded by a newer
   * request; rejects with ServiceError on a 4xx/5xx response.
   */
  async refocus(spec: TargetSpec, info: StackInfo): Promise<RenderResult | null> {
    if (!validateSpec(spec, info)) {
      throw new ServiceError(0, `invalid target spec ${specKey(spec)}`);
    }
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}/refocus`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ version: 1, ...spec }),
        signal: controller.signal,
      });
    } catch (err) {
      if (controller.signal.aborted) return null;
      throw err;
    }
    if (controller.signal.aborted) return null;
    if (this.inflight === controller) this.inflight = null;
    if (!response.ok) throw new ServiceError(response.status, await errorDetail(response));
    return { blob: await response.blob(), key: specKey(spec) };
  }
}
