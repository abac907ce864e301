/** Annotation controller: glue between AnnotationState and the API.
 *
 * Owns the mutation queue (one in-flight request per session; later edits
 * wait their turn) and tells the view what changed. Kept DOM-free so the
 * whole user flow is scriptable from tests.
 */

import { ApiClient, ApiError } from "./api.js";
import { AnnotationState, validThreshold } from "./state.js";
import type { LabeledCounts, PipelineConfig, SessionInfo } from "./types.js";
import { DEFAULT_THRESHOLDS } from "./types.js";

export interface ViewHooks {
  onSession?(info: SessionInfo): void;
  onCounts?(counts: Record<string, number>): void;
  onOverlayInvalidated?(): void;
  onConfig?(config: PipelineConfig): void;
  onError?(message: string, at?: { x: number; y: number }): void;
}

export class AnnotationApp {
  readonly state = new AnnotationState();
  session: SessionInfo | null = null;
  lastCounts: Record<string, number> = {};
  private queue: Promise<unknown> = Promise.resolve();

  constructor(
    readonly api: ApiClient,
    private readonly hooks: ViewHooks = {},
  ) {}

  /** Serialize mutations: one in-flight request, later edits queue up. */
  private enqueue<T>(task: () => Promise<T>): Promise<T> {
    const next = this.queue.then(task);
    this.queue = next.catch(() => undefined);
    return next;
  }

  async uploadImage(imageBytes: ArrayBuffer | Uint8Array): Promise<SessionInfo> {
    return this.enqueue(async () => {
      try {
        const info = await this.api.createSession(imageBytes);
        this.session = info;
        this.state.reset(info.width, info.height);
        this.lastCounts = {};
        this.hooks.onSession?.(info);
        this.hooks.onOverlayInvalidated?.();
        return info;
      } catch (err) {
        this.surface(err);
        throw err;
      }
    });
  }

  private requireSession(): SessionInfo {
    if (!this.session) {
      throw new Error("no active session; upload an image first");
    }
    return this.session;
  }

  /** Click at image coordinates; PED clicks accumulate polyline vertices. */
  async click(x: number, y: number): Promise<LabeledCounts | null> {
    this.requireSession();
    let kind: "point" | "vertex";
    try {
      kind = this.state.addClick(x, y);
    } catch (err) {
      this.surface(err, { x, y });
      throw err;
    }
    if (kind === "vertex") {
      return null; // nothing to sync until the polyline is finished
    }
    return this.sync({ x, y });
  }

  /** Finish the pending PED polyline and sync it. */
  async finishPolyline(): Promise<LabeledCounts | null> {
    this.requireSession();
    if (!this.state.finishPolyline()) {
      return null;
    }
    return this.sync();
  }

  /** Drop the latest edit and re-sync the full set. */
  async undo(): Promise<LabeledCounts | null> {
    this.requireSession();
    if (!this.state.undo()) {
      return null;
    }
    return this.sync();
  }

  async setThresholds(values: {
    threshold_srf_irf?: number;
    threshold_ped?: number;
  }): Promise<PipelineConfig> {
    const session = this.requireSession();
    for (const v of Object.values(values)) {
      if (v !== undefined && !validThreshold(v)) {
        const message = `threshold ${v} is out of range [0, 1]`;
        this.hooks.onError?.(message);
        throw new RangeError(message);
      }
    }
    return this.enqueue(async () => {
      try {
        const config = await this.api.patchConfig(session.session_id, values);
        this.hooks.onConfig?.(config);
        // config changes regenerate labels on the next read
        if (!this.state.isEmpty) {
          await this.push();
        }
        return config;
      } catch (err) {
        this.surface(err);
        throw err;
      }
    });
  }

  async resetThresholds(): Promise<PipelineConfig> {
    return this.setThresholds({ ...DEFAULT_THRESHOLDS });
  }

  async download(
    name: "label.pgm" | "trust.fmap" | "points.json",
  ): Promise<ArrayBuffer> {
    const session = this.requireSession();
    return this.api.fetchArtifact(session.session_id, name);
  }

  overlayUrl(): string {
    const session = this.requireSession();
    // cache-bust: the overlay changes whenever points/config do
    return `${this.api.artifactUrl(session.session_id, "overlay.png")}?v=${Date.now()}`;
  }

  private async sync(at?: { x: number; y: number }): Promise<LabeledCounts> {
    const session = this.requireSession();
    return this.enqueue(async () => {
      try {
        const counts = await this.api.putPoints(
          session.session_id,
          this.state.toDocument(),
        );
        this.lastCounts = counts.labeled_counts;
        this.hooks.onCounts?.(counts.labeled_counts);
        this.hooks.onOverlayInvalidated?.();
        return counts;
      } catch (err) {
        this.surface(err, at);
        throw err;
      }
    });
  }

  /** Re-PUT the current document (used after config changes). */
  private async push(): Promise<void> {
    const session = this.requireSession();
    const counts = await this.api.putPoints(
      session.session_id,
      this.state.toDocument(),
    );
    this.lastCounts = counts.labeled_counts;
    this.hooks.onCounts?.(counts.labeled_counts);
    this.hooks.onOverlayInvalidated?.();
  }

  private surface(err: unknown, at?: { x: number; y: number }): void {
    const message =
      err instanceof ApiError
        ? `${err.message} (HTTP ${err.status})`
        : err instanceof Error
          ? err.message
          : String(err);
    this.hooks.onError?.(message, at);
  }
}
