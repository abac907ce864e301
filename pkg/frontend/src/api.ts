/** Thin fetch wrapper over the annotation service API.
 *
 * Every method resolves with parsed data or rejects with ApiError carrying
 * the HTTP status and the server's diagnostic, so the UI can surface
 * failures inline.
 */

import type {
  LabeledCounts,
  PipelineConfig,
  PointsDocument,
  SessionInfo,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function fail(response: Response): Promise<never> {
  let detail = response.statusText || `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") {
      detail = body.detail;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = globalThis.fetch.bind(globalThis),
  ) {}

  async createSession(imageBytes: ArrayBuffer | Uint8Array): Promise<SessionInfo> {
    const response = await this.fetchFn(`${this.baseUrl}/api/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/octet-stream" },
      body: imageBytes as BodyInit,
    });
    if (!response.ok) await fail(response);
    return response.json();
  }

  async putPoints(sessionId: string, doc: PointsDocument): Promise<LabeledCounts> {
    const response = await this.fetchFn(
      `${this.baseUrl}/api/sessions/${sessionId}/points`,
      {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(doc),
      },
    );
    if (!response.ok) await fail(response);
    return response.json();
  }

  async patchConfig(
    sessionId: string,
    partial: Partial<PipelineConfig>,
  ): Promise<PipelineConfig> {
    const response = await this.fetchFn(
      `${this.baseUrl}/api/sessions/${sessionId}/config`,
      {
        method: "PATCH",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(partial),
      },
    );
    if (!response.ok) await fail(response);
    return response.json();
  }

  artifactUrl(
    sessionId: string,
    name: "label.pgm" | "trust.fmap" | "superpixels.pgm" | "points.json" | "overlay.png",
  ): string {
    return `${this.baseUrl}/api/sessions/${sessionId}/${name}`;
  }

  async fetchArtifact(
    sessionId: string,
    name: "label.pgm" | "trust.fmap" | "superpixels.pgm" | "points.json" | "overlay.png",
  ): Promise<ArrayBuffer> {
    const response = await this.fetchFn(this.artifactUrl(sessionId, name));
    if (!response.ok) await fail(response);
    return response.arrayBuffer();
  }
}
