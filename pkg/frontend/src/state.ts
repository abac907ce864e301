/** Client-side annotation state.
 *
 * Holds only what the user has drawn plus the last acknowledged server
 * responses; all label math happens server-side. Edits build a fresh
 * points document that the controller PUTs wholesale, so the server stays
 * the single source of truth.
 */

import type {
  FluidClass,
  PointEntry,
  PointsDocument,
  PolylineVertex,
} from "./types.js";

/** One undoable edit: a placed point or a completed PED polyline. */
type Edit =
  | { kind: "point"; entry: PointEntry }
  | { kind: "polyline"; vertices: PolylineVertex[] };

export class AnnotationState {
  activeClass: FluidClass = 1;
  private edits: Edit[] = [];
  /** vertices of the polyline currently being drawn (PED mode) */
  pendingPolyline: PolylineVertex[] = [];

  imageWidth = 0;
  imageHeight = 0;

  reset(width: number, height: number): void {
    this.edits = [];
    this.pendingPolyline = [];
    this.imageWidth = width;
    this.imageHeight = height;
  }

  inBounds(x: number, y: number): boolean {
    return x >= 0 && y >= 0 && x < this.imageWidth && y < this.imageHeight;
  }

  /** Record a click; for PED the vertex joins the pending polyline. */
  addClick(x: number, y: number): "point" | "vertex" {
    if (!this.inBounds(x, y)) {
      throw new RangeError(`(${x},${y}) is outside the ${this.imageWidth}x${this.imageHeight} image`);
    }
    if (this.activeClass === 3) {
      this.pendingPolyline.push({ x, y });
      return "vertex";
    }
    this.edits.push({ kind: "point", entry: { x, y, class: this.activeClass } });
    return "point";
  }

  /** Close the pending PED polyline (needs >= 2 vertices). */
  finishPolyline(): boolean {
    if (this.pendingPolyline.length < 2) {
      return false;
    }
    this.edits.push({ kind: "polyline", vertices: this.pendingPolyline });
    this.pendingPolyline = [];
    return true;
  }

  /** Drop the most recent point/polyline (or the in-progress polyline first). */
  undo(): boolean {
    if (this.pendingPolyline.length > 0) {
      this.pendingPolyline = [];
      return true;
    }
    return this.edits.pop() !== undefined;
  }

  get isEmpty(): boolean {
    return this.edits.length === 0;
  }

  /** Full document for PUT, in the order the edits were made. */
  toDocument(): PointsDocument {
    const points: PointEntry[] = [];
    const polylines: PolylineVertex[][] = [];
    for (const edit of this.edits) {
      if (edit.kind === "point") {
        points.push(edit.entry);
      } else {
        polylines.push(edit.vertices);
      }
    }
    return { points, ped_polylines: polylines };
  }
}

/** Threshold slider validation shared by slider + manual entry. */
export function validThreshold(value: number): boolean {
  return Number.isFinite(value) && value >= 0 && value <= 1;
}
