/** Rendering degradation and history persistence. */
import { describe, expect, it } from "vitest";
import { renderScene } from "../src/render.js";
import { foldEvents, initialModel } from "../src/state.js";
import { loadHistory, saveHistory } from "../src/history.js";
import type { WireEvent } from "../src/wire.js";

describe("renderScene", () => {
  it("degrades silently without a 2D context (headless canvas)", () => {
    const canvas = document.createElement("canvas");
    expect(() =>
      renderScene(canvas, initialModel(), {
        yaw: 0,
        highlight: new Set(),
        clock: 0,
        scrubIndex: null,
      }),
    ).not.toThrow();
  });

  it("tolerates malformed payloads (falls back to the table view)", () => {
    const bad: WireEvent[] = [
      {
        v: "dash-wire/1",
        seq: 1,
        kind: "scene_snapshot",
        payload: { table_extent: [0.1], objects: [] } as never,
      },
    ];
    const model = foldEvents(bad);
    const canvas = document.createElement("canvas");
    expect(() =>
      renderScene(canvas, model, {
        yaw: 0.3,
        highlight: new Set(["nope"]),
        clock: 1,
        scrubIndex: 5,
      }),
    ).not.toThrow();
  });
});

describe("history storage", () => {
  it("round-trips entries per session id", () => {
    const entries = [
      { text: "move the red box at 0.1 0.1", status: "accepted", at: 1 },
    ];
    saveHistory("s1", entries);
    expect(loadHistory("s1")).toEqual(entries);
    expect(loadHistory("other")).toEqual([]);
  });
});
