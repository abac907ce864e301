/** DOM bootstrap: wires the annotation controller to the page. */

import { ApiClient } from "./api.js";
import { AnnotationApp } from "./app.js";
import { CLASS_NAMES, DEFAULT_THRESHOLDS } from "./types.js";
import type { FluidClass } from "./types.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const canvas = byId<HTMLCanvasElement>("canvas");
const ctx = canvas.getContext("2d")!;
const statusLine = byId<HTMLDivElement>("status");
const countsLine = byId<HTMLDivElement>("counts");
const sessionLine = byId<HTMLDivElement>("session");
const fileInput = byId<HTMLInputElement>("file-input");
const dropZone = byId<HTMLDivElement>("drop-zone");
const showOverlay = byId<HTMLInputElement>("show-overlay");

let zoom = 1;
let rawImage: ImageBitmap | null = null;
let overlayImage: ImageBitmap | null = null;

function setStatus(message: string, isError = false): void {
  statusLine.textContent = message;
  statusLine.className = isError ? "status error" : "status";
}

const app = new AnnotationApp(new ApiClient(), {
  onSession(info) {
    sessionLine.textContent =
      `session ${info.session_id} — ${info.width}x${info.height}`;
    setStatus("image uploaded; click a fluid region to annotate");
    countsLine.textContent = "";
  },
  onCounts(counts) {
    countsLine.textContent = ([1, 2, 3] as FluidClass[])
      .map((c) => `${CLASS_NAMES[c]}: ${counts[String(c)] ?? 0} px`)
      .join("   ");
  },
  onOverlayInvalidated() {
    void refreshOverlay();
  },
  onConfig(config) {
    (byId<HTMLInputElement>("t-srf-irf")).value = String(config.threshold_srf_irf);
    (byId<HTMLInputElement>("t-ped")).value = String(config.threshold_ped);
    byId<HTMLSpanElement>("t-srf-irf-value").textContent =
      Number(config.threshold_srf_irf).toFixed(2);
    byId<HTMLSpanElement>("t-ped-value").textContent =
      Number(config.threshold_ped).toFixed(2);
    setStatus("thresholds updated");
  },
  onError(message, at) {
    setStatus(at ? `${message} at (${at.x},${at.y})` : message, true);
  },
});

function draw(): void {
  if (!rawImage) return;
  canvas.width = Math.round(rawImage.width * zoom);
  canvas.height = Math.round(rawImage.height * zoom);
  ctx.imageSmoothingEnabled = zoom < 3;
  const image = showOverlay.checked && overlayImage ? overlayImage : rawImage;
  ctx.drawImage(image, 0, 0, canvas.width, canvas.height);
  // pending polyline vertices drawn client-side for feedback while editing
  if (app.state.pendingPolyline.length > 0) {
    ctx.strokeStyle = "#40c840";
    ctx.fillStyle = "#40c840";
    ctx.lineWidth = Math.max(1, zoom / 2);
    ctx.beginPath();
    app.state.pendingPolyline.forEach((v, i) => {
      const px = (v.x + 0.5) * zoom;
      const py = (v.y + 0.5) * zoom;
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
      ctx.fillRect(px - 2, py - 2, 4, 4);
    });
    ctx.stroke();
  }
}

async function refreshOverlay(): Promise<void> {
  if (!app.session) return;
  try {
    const response = await fetch(app.overlayUrl());
    if (!response.ok) return;
    overlayImage = await createImageBitmap(await response.blob());
    draw();
  } catch {
    // keep the previous overlay; the status line already reports API errors
  }
}

async function loadFile(file: File): Promise<void> {
  const bytes = await file.arrayBuffer();
  try {
    await app.uploadImage(bytes);
  } catch {
    return; // surfaced via onError
  }
  // render the raw upload immediately; PGM needs the server round trip
  try {
    overlayImage = null;
    const blob = new Blob([bytes], { type: file.type || "image/png" });
    rawImage = await createImageBitmap(blob);
  } catch {
    const response = await fetch(app.overlayUrl());
    rawImage = await createImageBitmap(await response.blob());
  }
  zoom = Math.max(
    1,
    Math.floor(600 / Math.max(rawImage.width, rawImage.height)),
  );
  draw();
}

fileInput.addEventListener("change", () => {
  const file = fileInput.files?.[0];
  if (file) void loadFile(file);
});

dropZone.addEventListener("dragover", (event) => {
  event.preventDefault();
  dropZone.classList.add("dragging");
});
dropZone.addEventListener("dragleave", () => dropZone.classList.remove("dragging"));
dropZone.addEventListener("drop", (event) => {
  event.preventDefault();
  dropZone.classList.remove("dragging");
  const file = event.dataTransfer?.files?.[0];
  if (file) void loadFile(file);
});

canvas.addEventListener("click", (event) => {
  if (!app.session || !rawImage) return;
  const rect = canvas.getBoundingClientRect();
  const x = Math.floor((event.clientX - rect.left) / zoom);
  const y = Math.floor((event.clientY - rect.top) / zoom);
  void app
    .click(x, y)
    .then(() => draw())
    .catch(() => undefined);
});

canvas.addEventListener("dblclick", (event) => {
  event.preventDefault();
  void app.finishPolyline().then(() => draw());
});

canvas.addEventListener("wheel", (event) => {
  if (!rawImage) return;
  event.preventDefault();
  zoom = Math.min(16, Math.max(0.25, zoom * (event.deltaY < 0 ? 1.25 : 0.8)));
  draw();
});

for (const value of [1, 2, 3] as FluidClass[]) {
  byId<HTMLInputElement>(`class-${value}`).addEventListener("change", () => {
    app.state.activeClass = value;
    setStatus(
      value === 3
        ? "PED: click polyline vertices, double-click to finish"
        : `${CLASS_NAMES[value]}: click inside a fluid region`,
    );
  });
}

byId<HTMLButtonElement>("undo").addEventListener("click", () => {
  void app.undo().then(() => draw());
});

byId<HTMLButtonElement>("finish-polyline").addEventListener("click", () => {
  void app.finishPolyline().then(() => draw());
});

function bindThreshold(
  sliderId: string,
  labelId: string,
  field: "threshold_srf_irf" | "threshold_ped",
): void {
  const slider = byId<HTMLInputElement>(sliderId);
  slider.addEventListener("change", () => {
    const value = Number(slider.value);
    if (!Number.isFinite(value) || value < 0 || value > 1) {
      setStatus(`threshold ${slider.value} must lie in [0, 1]`, true);
      return;
    }
    byId<HTMLSpanElement>(labelId).textContent = value.toFixed(2);
    void app.setThresholds({ [field]: value }).catch(() => undefined);
  });
}

bindThreshold("t-srf-irf", "t-srf-irf-value", "threshold_srf_irf");
bindThreshold("t-ped", "t-ped-value", "threshold_ped");

byId<HTMLButtonElement>("reset-thresholds").addEventListener("click", () => {
  byId<HTMLInputElement>("t-srf-irf").value = String(
    DEFAULT_THRESHOLDS.threshold_srf_irf,
  );
  byId<HTMLInputElement>("t-ped").value = String(DEFAULT_THRESHOLDS.threshold_ped);
  void app.resetThresholds().catch(() => undefined);
});

showOverlay.addEventListener("change", () => draw());

function bindDownload(buttonId: string, name: "label.pgm" | "trust.fmap" | "points.json") {
  byId<HTMLButtonElement>(buttonId).addEventListener("click", () => {
    void app
      .download(name)
      .then((buffer) => {
        const link = document.createElement("a");
        link.href = URL.createObjectURL(new Blob([buffer]));
        link.download = name;
        link.click();
        URL.revokeObjectURL(link.href);
      })
      .catch(() => undefined);
  });
}

bindDownload("dl-label", "label.pgm");
bindDownload("dl-trust", "trust.fmap");
bindDownload("dl-points", "points.json");

setStatus("drop a PGM or PNG slice to start");
