/** 2.5D orthographic scene rendering onto a canvas.
 *
 * Objects are drawn as colored primitives, the arm as a link skeleton,
 * with a stage label overlay. An optional orbit angle gives a perspective
 * impression while keeping the projection orthographic. Rendering degrades
 * to a table outline when payloads are malformed or a 2D context is
 * unavailable (e.g. headless test environments).
 */

import type { ClientSceneModel } from "./state.js";
import type { Vec3, WireObject } from "./wire.js";

export interface ViewOptions {
  /** orbit angle around the vertical axis, radians */
  yaw: number;
  /** ids to pulse-highlight (ambiguity candidates) */
  highlight: Set<string>;
  /** animation clock for the pulse, seconds */
  clock: number;
  /** pose override from the replay scrubber (index into poseLog), or null */
  scrubIndex: number | null;
}

const TILT = 0.52; // vertical compression of the ground plane
const MARGIN = 30; // px

interface Projector {
  toScreen(p: Vec3): [number, number];
  scale: number;
}

function makeProjector(
  canvas: { width: number; height: number },
  extent: number[],
  yaw: number,
): Projector {
  const [x0, x1, y0, y1] = extent;
  const cx = (x0 + x1) / 2;
  const cy = (y0 + y1) / 2;
  const span = Math.max(x1 - x0, y1 - y0) * 1.35;
  const scale = Math.min(canvas.width, canvas.height * 1.6) / span - MARGIN / 4;
  const cos = Math.cos(yaw);
  const sin = Math.sin(yaw);
  return {
    scale,
    toScreen(p: Vec3): [number, number] {
      const dx = p[0] - cx;
      const dy = p[1] - cy;
      const rx = dx * cos - dy * sin;
      const ry = dx * sin + dy * cos;
      return [
        canvas.width / 2 + rx * scale,
        canvas.height * 0.62 + ry * scale * TILT - p[2] * scale * 0.9,
      ];
    },
  };
}

const FILL: Record<string, string> = {
  red: "#d64545",
  green: "#3f9e4d",
  blue: "#3b6fd4",
  yellow: "#d9b23a",
  purple: "#8d5bbd",
  orange: "#dd8435",
  white: "#e8e8e8",
  black: "#333333",
};

function drawObject(
  ctx: CanvasRenderingContext2D,
  proj: Projector,
  obj: WireObject,
  pose: { position: Vec3 },
  highlighted: boolean,
  clock: number,
): void {
  const base = pose.position;
  const w = obj.width;
  const h = obj.height;
  const color = FILL[obj.color] ?? obj.color;
  const [bx, by] = proj.toScreen(base);
  const [tx, ty] = proj.toScreen([base[0], base[1], base[2] + h]);
  const halfW = (w / 2) * proj.scale;
  ctx.save();
  if (highlighted) {
    const pulse = 0.5 + 0.5 * Math.sin(clock * 6);
    ctx.shadowColor = "#ffd54d";
    ctx.shadowBlur = 10 + 14 * pulse;
    ctx.lineWidth = 2.5;
    ctx.strokeStyle = "#ffd54d";
  } else {
    ctx.lineWidth = 1;
    ctx.strokeStyle = "rgba(0,0,0,0.45)";
  }
  ctx.fillStyle = color;
  if (obj.shape === "sphere") {
    const r = halfW;
    const cy = (by + ty) / 2;
    ctx.beginPath();
    ctx.arc(bx, cy, r, 0, Math.PI * 2);
    ctx.fill();
    ctx.stroke();
  } else if (obj.shape === "cylinder") {
    const ry = halfW * TILT;
    ctx.beginPath();
    ctx.moveTo(bx - halfW, by);
    ctx.lineTo(tx - halfW, ty);
    ctx.ellipse(tx, ty, halfW, ry, 0, Math.PI, 0);
    ctx.lineTo(bx + halfW, by);
    ctx.ellipse(bx, by, halfW, ry, 0, 0, Math.PI);
    ctx.fill();
    ctx.stroke();
    ctx.beginPath();
    ctx.ellipse(tx, ty, halfW, ry, 0, 0, Math.PI * 2);
    ctx.fill();
    ctx.stroke();
  } else {
    // box: front face plus a top face for depth
    const ry = halfW * TILT;
    ctx.beginPath();
    ctx.rect(bx - halfW, ty, halfW * 2, by - ty);
    ctx.fill();
    ctx.stroke();
    ctx.beginPath();
    ctx.moveTo(tx - halfW, ty);
    ctx.lineTo(tx - halfW * 0.6, ty - ry);
    ctx.lineTo(tx + halfW * 1.4, ty - ry);
    ctx.lineTo(tx + halfW, ty);
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
  }
  ctx.restore();
  ctx.fillStyle = "rgba(255,255,255,0.85)";
  ctx.font = "10px system-ui, sans-serif";
  ctx.textAlign = "center";
  ctx.fillText(obj.id, bx, by + 12);
}

function drawArm(
  ctx: CanvasRenderingContext2D,
  proj: Projector,
  links: Vec3[],
): void {
  ctx.save();
  ctx.strokeStyle = "#9fb4c7";
  ctx.lineWidth = 5;
  ctx.lineCap = "round";
  ctx.beginPath();
  links.forEach((p, i) => {
    const [sx, sy] = proj.toScreen(p);
    if (i === 0) ctx.moveTo(sx, sy);
    else ctx.lineTo(sx, sy);
  });
  ctx.stroke();
  ctx.fillStyle = "#e3ecf5";
  for (const p of links) {
    const [sx, sy] = proj.toScreen(p);
    ctx.beginPath();
    ctx.arc(sx, sy, 3.5, 0, Math.PI * 2);
    ctx.fill();
  }
  const palm = links[links.length - 1];
  const [px, py] = proj.toScreen(palm);
  ctx.fillStyle = "#ffffff";
  ctx.beginPath();
  ctx.arc(px, py, 5, 0, Math.PI * 2);
  ctx.fill();
  ctx.restore();
}

export function renderScene(
  canvas: HTMLCanvasElement,
  model: ClientSceneModel,
  view: ViewOptions,
): void {
  const ctx = canvas.getContext ? canvas.getContext("2d") : null;
  if (!ctx) return; // headless: nothing to draw on
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.fillStyle = "#10151c";
  ctx.fillRect(0, 0, canvas.width, canvas.height);

  const extent =
    model.scene && Array.isArray(model.scene.table_extent) &&
    model.scene.table_extent.length >= 4
      ? model.scene.table_extent
      : [-0.525, 0.675, -0.2, 0.6];
  const proj = makeProjector(canvas, extent, view.yaw);

  // tabletop
  const [x0, x1, y0, y1] = extent;
  const corners: Vec3[] = [
    [x0, y0, 0], [x1, y0, 0], [x1, y1, 0], [x0, y1, 0],
  ];
  ctx.beginPath();
  corners.forEach((c, i) => {
    const [sx, sy] = proj.toScreen(c);
    if (i === 0) ctx.moveTo(sx, sy);
    else ctx.lineTo(sx, sy);
  });
  ctx.closePath();
  ctx.fillStyle = "#1d2733";
  ctx.fill();
  ctx.strokeStyle = "#34455a";
  ctx.stroke();

  if (!model.scene) return; // degrade to the bare table view

  // replay override: object poses and arm from the scrubbed sample
  let poses = model.objectPoses;
  let links = model.links;
  if (view.scrubIndex !== null && model.poseLog.length > 0) {
    const idx = Math.max(0, Math.min(view.scrubIndex, model.poseLog.length - 1));
    const sample = model.poseLog[idx];
    poses = { ...poses };
    for (const [id, op] of Object.entries(sample.objects)) poses[id] = op;
    if (sample.links) links = sample.links;
  }

  // painter's order: farther (smaller projected y) first
  const objs = [...model.scene.objects].sort((a, b) => {
    const pa = poses[a.id]?.position ?? a.position;
    const pb = poses[b.id]?.position ?? b.position;
    return proj.toScreen(pa)[1] - proj.toScreen(pb)[1];
  });
  for (const o of objs) {
    const pose = poses[o.id] ?? { position: o.position };
    if (!Array.isArray(pose.position) || pose.position.length < 3) continue;
    drawObject(ctx, proj, o, pose, view.highlight.has(o.id), view.clock);
  }

  if (links && links.length > 1) drawArm(ctx, proj, links);

  // stage overlay
  if (model.stage) {
    ctx.fillStyle = "rgba(255,255,255,0.9)";
    ctx.font = "600 13px system-ui, sans-serif";
    ctx.textAlign = "left";
    ctx.fillText(`stage: ${model.stage}`, 12, 20);
  }
  if (model.outcome && model.outcome.outcome === "plan_failure") {
    ctx.fillStyle = "#b23c3c";
    ctx.fillRect(0, canvas.height - 34, canvas.width, 34);
    ctx.fillStyle = "#ffffff";
    ctx.font = "600 13px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(
      "motion plan error: unable to find a collision-free path",
      canvas.width / 2,
      canvas.height - 13,
    );
  }
}
