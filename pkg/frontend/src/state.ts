/** Client scene model: a pure fold over the dash-wire/1 event stream.
 *
 * `applyEvent` never mutates its input; replaying a recorded event log
 * through `foldEvents` reproduces the model byte-for-byte. No physics or
 * grounding happens here — every displayed fact originates from an event.
 */

import type {
  ErrorPayload,
  OutcomePayload,
  PlanPayload,
  PoseSample,
  Quat,
  ScenePayload,
  StagePayload,
  StepBatchPayload,
  Vec3,
  WireEvent,
} from "./wire.js";

export interface ObjectPose {
  position: Vec3;
  orientation: Quat;
}

export interface StageMark {
  stage: string;
  /** index into poseLog of the first sample recorded at/after this stage */
  sampleIndex: number;
}

export interface ClientSceneModel {
  /** last applied sequence number; monotone */
  seq: number;
  scene: ScenePayload | null;
  /** live object poses, keyed by object id (starts from the snapshot) */
  objectPoses: Record<string, ObjectPose>;
  /** latest arm configuration and link skeleton */
  q: number[] | null;
  links: Vec3[] | null;
  /** current pipeline stage and the per-trial stage timeline */
  stage: string | null;
  stages: StageMark[];
  /** executed pose samples for the current trial (replay scrubber source) */
  poseLog: PoseSample[];
  /** planned trajectories announced for the current trial */
  plans: PlanPayload[];
  /** terminal event of the current trial, if finished */
  outcome: OutcomePayload | null;
  lastError: ErrorPayload | null;
  /** trials finished since the session snapshot */
  trialsCompleted: number;
}

export function initialModel(): ClientSceneModel {
  return {
    seq: 0,
    scene: null,
    objectPoses: {},
    q: null,
    links: null,
    stage: null,
    stages: [],
    poseLog: [],
    plans: [],
    outcome: null,
    lastError: null,
    trialsCompleted: 0,
  };
}

function clone<T>(x: T): T {
  return JSON.parse(JSON.stringify(x)) as T;
}

/** Apply one wire event; ignores stale/duplicate sequence numbers and
 * heartbeats. Returns a new model; the input is left untouched. */
export function applyEvent(
  model: ClientSceneModel,
  event: WireEvent,
): ClientSceneModel {
  if (event.kind === "heartbeat") return model;
  if (event.seq <= model.seq) return model; // duplicate or out-of-order
  const m = clone(model);
  m.seq = event.seq;
  switch (event.kind) {
    case "scene_snapshot": {
      const p = event.payload as ScenePayload;
      m.scene = clone(p);
      m.objectPoses = {};
      for (const o of p.objects) {
        m.objectPoses[o.id] = { position: o.position, orientation: o.orientation };
      }
      break;
    }
    case "stage_change": {
      const p = event.payload as StagePayload;
      if (p.stage === "perceive") {
        // a new trial begins: reset per-trial accumulators
        m.stages = [];
        m.poseLog = [];
        m.plans = [];
        m.outcome = null;
        m.lastError = null;
      }
      m.stage = p.stage;
      m.stages.push({ stage: p.stage, sampleIndex: m.poseLog.length });
      break;
    }
    case "plan_ready": {
      m.plans.push(clone(event.payload as PlanPayload));
      break;
    }
    case "step_batch": {
      const p = event.payload as StepBatchPayload;
      for (const pose of p.poses) {
        m.poseLog.push(clone(pose));
        for (const [id, op] of Object.entries(pose.objects)) {
          m.objectPoses[id] = clone(op);
        }
        m.q = pose.q.slice();
        if (pose.links) m.links = clone(pose.links);
      }
      break;
    }
    case "trial_outcome": {
      m.outcome = clone(event.payload as OutcomePayload);
      m.trialsCompleted += 1;
      break;
    }
    case "error": {
      m.lastError = clone(event.payload as ErrorPayload);
      break;
    }
  }
  return m;
}

export function foldEvents(
  events: WireEvent[],
  start: ClientSceneModel = initialModel(),
): ClientSceneModel {
  let m = start;
  for (const e of events) m = applyEvent(m, e);
  return m;
}

/** Sum of the per-term series along the pose log; used to cross-check the
 * reward sparkline against server totals. */
export function rewardSeries(
  log: PoseSample[],
): { totals: number[]; terms: Record<string, number[]> } {
  const totals: number[] = [];
  const terms: Record<string, number[]> = {};
  for (const s of log) {
    if (!s.reward) continue;
    totals.push(s.reward.total);
    for (const [k, v] of Object.entries(s.reward.terms)) {
      (terms[k] ??= []).push(v);
    }
  }
  return { totals, terms };
}
