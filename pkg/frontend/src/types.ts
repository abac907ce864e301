/** Shared types for the annotation client. */

export type FluidClass = 1 | 2 | 3;

export const CLASS_NAMES: Record<FluidClass, string> = {
  1: "IRF",
  2: "SRF",
  3: "PED",
};

export interface PointEntry {
  x: number;
  y: number;
  class: FluidClass;
}

export interface PolylineVertex {
  x: number;
  y: number;
}

/** Wire format of PUT /api/sessions/{id}/points and points.json. */
export interface PointsDocument {
  points: PointEntry[];
  ped_polylines: PolylineVertex[][];
}

export interface SessionInfo {
  session_id: string;
  width: number;
  height: number;
}

export interface LabeledCounts {
  labeled_counts: Record<string, number>;
}

/** The server's effective configuration (PATCH response). */
export interface PipelineConfig {
  region_size: number;
  compactness: number;
  iterations: number;
  threshold_srf_irf: number;
  threshold_ped: number;
  trust_init: number;
  trust_seed: number;
  decay_per_hop: number;
  self_confidence_keep_fraction: number;
  trust_gate: number;
  delta: number | "static";
  alpha: number;
  beta: number;
  w_max: number;
  t_max: number;
  ema_decay: number;
}

export const DEFAULT_THRESHOLDS = { threshold_srf_irf: 0.6, threshold_ped: 0.5 };
