/** Scripted end-to-end session against the real annotation service.
 *
 * Spawns the Python server, then drives the same controller the browser
 * uses: upload the stripe fixture, place one IRF point, check the labeled
 * count against the server's artifacts, raise the IRF threshold and check
 * the count never increases, and download files byte-identical to direct
 * server GETs. Skips when the Python package is not installed.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { AnnotationApp } from "../src/app.js";

const PORT = 8793;
const BASE = `http://127.0.0.1:${PORT}`;

function havePython(): boolean {
  const probe = spawnSync("python3", ["-c", "import fluidlabel"], {
    timeout: 20000,
  });
  return probe.status === 0;
}

/** 39x39 stripe fixture as binary PGM: bands of 50 / 50 / 200. */
function stripePgm(): Uint8Array {
  const header = new TextEncoder().encode("P5\n39 39\n255\n");
  const pixels = new Uint8Array(39 * 39);
  for (let y = 0; y < 39; y++) {
    for (let x = 0; x < 39; x++) {
      pixels[y * 39 + x] = x < 26 ? 50 : 200;
    }
  }
  const out = new Uint8Array(header.length + pixels.length);
  out.set(header);
  out.set(pixels, header.length);
  return out;
}

const pythonAvailable = havePython();
let server: ChildProcess | null = null;

async function waitForServer(): Promise<void> {
  for (let i = 0; i < 100; i++) {
    try {
      const response = await fetch(`${BASE}/api/sessions`, {
        method: "POST",
        body: stripePgm(),
      });
      if (response.status === 201) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error("annotation server did not come up");
}

describe.skipIf(!pythonAvailable)("end-to-end annotation session", () => {
  beforeAll(async () => {
    server = spawn(
      "python3",
      ["-m", "fluidlabel.cli", "serve", "--bind", `127.0.0.1:${PORT}`],
      { stdio: "ignore" },
    );
    await waitForServer();
  }, 60000);

  afterAll(() => {
    server?.kill();
  });

  it("runs the full annotate-tune-export flow", async () => {
    const counts: Record<string, number>[] = [];
    const app = new AnnotationApp(new ApiClient(BASE), {
      onCounts: (c) => counts.push(c),
    });

    // upload the stripe fixture
    const info = await app.uploadImage(stripePgm());
    expect(info.width).toBe(39);
    expect(info.height).toBe(39);

    // place one IRF point inside the left stripe
    const put = await app.click(6, 6);
    expect(put).not.toBeNull();
    const irfCount = put!.labeled_counts["1"];
    expect(irfCount).toBeGreaterThan(0);

    // the reported count matches the server's own label artifact
    const labelBytes = new Uint8Array(await app.download("label.pgm"));
    const headerEnd = labelBytes.indexOf(0x0a, labelBytes.indexOf(0x0a, labelBytes.indexOf(0x0a) + 1) + 1) + 1;
    let ones = 0;
    for (let i = headerEnd; i < labelBytes.length; i++) {
      if (labelBytes[i] === 1) ones += 1;
    }
    expect(ones).toBe(irfCount);

    // raising the IRF threshold never increases the labeled count
    const observed = [irfCount];
    for (const threshold of [0.8, 0.95]) {
      await app.setThresholds({ threshold_srf_irf: threshold });
      observed.push(app.lastCounts["1"]);
    }
    for (let i = 1; i < observed.length; i++) {
      expect(observed[i]).toBeLessThanOrEqual(observed[i - 1]);
    }

    // downloads are byte-identical to direct server GETs
    const sessionId = app.session!.session_id;
    for (const name of ["label.pgm", "trust.fmap", "points.json"] as const) {
      const viaApp = new Uint8Array(await app.download(name));
      const direct = new Uint8Array(
        await (await fetch(`${BASE}/api/sessions/${sessionId}/${name}`)).arrayBuffer(),
      );
      expect(viaApp).toEqual(direct);
    }

    // overlay reachable for the canvas refresh path
    const overlay = await fetch(app.overlayUrl());
    expect(overlay.status).toBe(200);
    expect(overlay.headers.get("content-type")).toBe("image/png");
  }, 60000);

  it("PED polyline grows only via upper blocks and undo reverts", async () => {
    const app = new AnnotationApp(new ApiClient(BASE));
    // horizontal bands: bright top, dark middle+bottom
    const header = new TextEncoder().encode("P5\n39 39\n255\n");
    const pixels = new Uint8Array(39 * 39);
    for (let y = 0; y < 39; y++) {
      for (let x = 0; x < 39; x++) {
        pixels[y * 39 + x] = y < 13 ? 200 : 60;
      }
    }
    const image = new Uint8Array(header.length + pixels.length);
    image.set(header);
    image.set(pixels, header.length);
    await app.uploadImage(image);

    app.state.activeClass = 3;
    await app.click(4, 32);
    await app.click(30, 32);
    const counts = await app.finishPolyline();
    expect(counts).not.toBeNull();
    expect(counts!.labeled_counts["3"]).toBeGreaterThan(0);

    // undo returns the session to an empty labeling
    const after = await app.undo();
    expect(after!.labeled_counts).toEqual({ "1": 0, "2": 0, "3": 0 });
  }, 60000);

  it("surfaces server-side rejections inline", async () => {
    const errors: string[] = [];
    const app = new AnnotationApp(new ApiClient(BASE), {
      onError: (m) => errors.push(m),
    });
    await app.uploadImage(stripePgm());
    await expect(
      app.setThresholds({ threshold_srf_irf: 1.5 }),
    ).rejects.toThrow();
    expect(errors.length).toBeGreaterThan(0);
  }, 60000);
});

describe.skipIf(pythonAvailable)("environment", () => {
  it("skipped: python fluidlabel package unavailable", () => {
    expect(pythonAvailable).toBe(false);
  });
});
