/** Command studio application: wires the session client, the pure event
 * fold, the canvas renderer, the command box, and the replay panel into a
 * single-page UI. All state shown in the DOM derives from the fold plus the
 * last command response; nothing is computed client-side from physics. */

import { SessionClient } from "./client.js";
import type { CommandRejection } from "./wire.js";
import {
  applyEvent,
  initialModel,
  rewardSeries,
  type ClientSceneModel,
} from "./state.js";
import { renderScene } from "./render.js";
import { loadHistory, saveHistory, type HistoryEntry } from "./history.js";

export interface Studio {
  client: SessionClient;
  getModel(): ClientSceneModel;
  getHighlight(): Set<string>;
  newSession(seed: number, mode?: string): Promise<void>;
  submit(text: string): Promise<void>;
  root: HTMLElement;
  dispose(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

export function createStudio(root: HTMLElement, base: string): Studio {
  const client = new SessionClient(base);
  let model = initialModel();
  let highlight = new Set<string>();
  let history: HistoryEntry[] = [];
  let scrubIndex: number | null = null;
  let yaw = 0;
  let disposed = false;
  const t0 = Date.now();

  // --- layout ---------------------------------------------------------------
  root.classList.add("studio");
  const canvas = el("canvas", {
    "data-role": "scene",
    width: "760",
    height: "480",
  });
  const stageLabel = el("div", { "data-role": "stage", class: "stage" });
  const viewWrap = el("div", { class: "view" });
  viewWrap.append(canvas, stageLabel);

  const seedInput = el("input", {
    "data-role": "seed",
    type: "number",
    value: "1",
  });
  const modeSelect = el("select", { "data-role": "mode" });
  for (const m of ["ground_truth", "noisy"]) {
    modeSelect.append(el("option", { value: m }, m));
  }
  const newBtn = el("button", { "data-role": "new-session" }, "new session");
  const sessionRow = el("div", { class: "row" });
  sessionRow.append(seedInput, modeSelect, newBtn);

  const input = el("input", {
    "data-role": "command-input",
    placeholder: "e.g. put the red box on the blue cylinder",
    disabled: "disabled",
  });
  const sendBtn = el("button", { "data-role": "command-submit" }, "send");
  sendBtn.disabled = true;
  const busyChip = el("span", { "data-role": "busy", class: "chip hidden" },
    "executing…");
  const commandRow = el("div", { class: "row" });
  commandRow.append(input, sendBtn, busyChip);

  const diagnostic = el("div", { "data-role": "diagnostic", class: "diag" });
  const candidates = el("ul", { "data-role": "candidates", class: "cands" });
  const outcomeChip = el("div", { "data-role": "outcome", class: "chip" });
  const historyList = el("ul", { "data-role": "history", class: "history" });

  const scrub = el("input", {
    "data-role": "scrubber",
    type: "range",
    min: "0",
    max: "0",
    value: "0",
    disabled: "disabled",
  });
  const scrubLabel = el("span", { "data-role": "scrub-label" }, "live");
  const spark = el("canvas", {
    "data-role": "sparkline",
    width: "280",
    height: "56",
  });
  const replayPanel = el("div", { "data-role": "replay", class: "replay" });
  replayPanel.append(el("h3", {}, "replay"), scrub, scrubLabel, spark);

  const side = el("div", { class: "side" });
  side.append(
    sessionRow,
    commandRow,
    diagnostic,
    candidates,
    outcomeChip,
    el("h3", {}, "history"),
    historyList,
    replayPanel,
  );
  root.append(viewWrap, side);

  // --- rendering --------------------------------------------------------------
  function draw(): void {
    renderScene(canvas as HTMLCanvasElement, model, {
      yaw,
      highlight,
      clock: (Date.now() - t0) / 1000,
      scrubIndex,
    });
    stageLabel.textContent = model.stage ? `stage: ${model.stage}` : "";
    drawSparkline();
  }

  function drawSparkline(): void {
    const ctx = spark.getContext ? spark.getContext("2d") : null;
    if (!ctx) return;
    ctx.clearRect(0, 0, spark.width, spark.height);
    const { totals } = rewardSeries(model.poseLog);
    if (totals.length < 2) return;
    const lo = Math.min(...totals);
    const hi = Math.max(...totals);
    const span = hi - lo || 1;
    ctx.strokeStyle = "#6fae8f";
    ctx.beginPath();
    totals.forEach((v, i) => {
      const x = (i / (totals.length - 1)) * spark.width;
      const y = spark.height - ((v - lo) / span) * (spark.height - 4) - 2;
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }

  function refreshControls(): void {
    const executing = model.trialsCompleted < submitted;
    input.disabled = !client.session || executing;
    sendBtn.disabled = input.disabled;
    busyChip.classList.toggle("hidden", !executing);
    if (model.outcome) {
      outcomeChip.textContent = `${model.outcome.kind}: ${model.outcome.outcome}`;
      outcomeChip.dataset.outcome = model.outcome.outcome;
    }
    const n = model.poseLog.length;
    scrub.max = String(Math.max(0, n - 1));
    scrub.disabled = !(model.outcome && n > 0);
    replayPanel.classList.toggle("disabled", scrub.disabled);
  }

  function refreshHistory(): void {
    historyList.textContent = "";
    for (const h of history) {
      const li = el("li", {}, h.text);
      li.append(el("span", { class: "chip" }, h.status));
      historyList.append(li);
    }
    if (client.session) saveHistory(client.session.id, history);
  }

  function setCandidates(ids: string[]): void {
    highlight = new Set(ids);
    candidates.textContent = "";
    for (const id of ids) {
      candidates.append(el("li", { "data-id": id }, id));
    }
  }

  // --- behavior --------------------------------------------------------------
  let submitted = 0;

  client.onEvent = (e) => {
    model = applyEvent(model, e);
    if (e.kind === "trial_outcome" && history.length > 0) {
      history[history.length - 1].status = `outcome:${model.outcome?.outcome}`;
      refreshHistory();
    }
    refreshControls();
    draw();
  };

  async function newSession(seed: number, mode = "ground_truth"): Promise<void> {
    client.stop();
    model = initialModel();
    highlight = new Set();
    scrubIndex = null;
    submitted = 0;
    const info = await client.createSession(seed, mode);
    history = loadHistory(info.id);
    client.start();
    diagnostic.textContent = "";
    setCandidates([]);
    outcomeChip.textContent = "";
    refreshHistory();
    refreshControls();
    draw();
  }

  async function submit(text: string): Promise<void> {
    if (!text.trim()) return;
    const res = await client.submitCommand(text);
    if (res.ok) {
      submitted += 1;
      setCandidates([]);
      diagnostic.textContent = "";
      history.push({ text, status: "accepted", at: Date.now() });
    } else {
      const rej: CommandRejection = res.rejection;
      diagnostic.textContent = `${rej.error}: ${rej.detail}`;
      setCandidates(rej.candidates ?? []);
      history.push({ text, status: `rejected:${rej.error}`, at: Date.now() });
    }
    refreshHistory();
    refreshControls();
    draw();
  }

  newBtn.addEventListener("click", () => {
    void newSession(Number(seedInput.value) || 0, modeSelect.value);
  });
  sendBtn.addEventListener("click", () => {
    const text = input.value;
    input.value = "";
    void submit(text);
  });
  input.addEventListener("keydown", (ev) => {
    if ((ev as KeyboardEvent).key === "Enter") sendBtn.click();
  });
  scrub.addEventListener("input", () => {
    scrubIndex = Number(scrub.value);
    scrubLabel.textContent = `sample ${scrub.value}`;
    draw();
  });
  canvas.addEventListener("pointerdown", (ev) => {
    const startX = (ev as PointerEvent).clientX;
    const startYaw = yaw;
    const move = (m: Event) => {
      yaw = startYaw + ((m as PointerEvent).clientX - startX) * 0.01;
      draw();
    };
    const up = () => {
      window.removeEventListener("pointermove", move);
      window.removeEventListener("pointerup", up);
    };
    window.addEventListener("pointermove", move);
    window.addEventListener("pointerup", up);
  });

  const pulseTimer = setInterval(() => {
    if (highlight.size > 0) draw();
  }, 120);

  return {
    client,
    getModel: () => model,
    getHighlight: () => highlight,
    newSession,
    submit,
    root,
    dispose() {
      if (disposed) return;
      disposed = true;
      clearInterval(pulseTimer);
      client.stop();
    },
  };
}

// Auto-boot when loaded as the page script (not under test).
if (typeof document !== "undefined" && document.getElementById("app")) {
  const root = document.getElementById("app") as HTMLElement;
  createStudio(root, window.location.origin);
}
