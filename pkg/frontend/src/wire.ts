/** dash-wire/1 message types.
 *
 * Every event is `{v, seq, kind, payload}` with strictly increasing `seq`
 * per session. Clients resume by passing the last seen sequence number;
 * unknown payload fields must be ignored (additive versioning within
 * dash-wire/1).
 */

export const WIRE_VERSION = "dash-wire/1";

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // w x y z

export interface WireObject {
  id: string;
  shape: "box" | "cylinder" | "sphere" | string;
  color: string;
  width: number;
  height: number;
  position: Vec3;
  orientation: Quat;
}

export interface ScenePayload {
  table_extent: number[];
  objects: WireObject[];
}

export interface PlanPayload {
  stage: string;
  duration: number;
  /** [t, q0..q6] rows sampled along the planned trajectory. */
  samples: number[][];
  /** arm joint origins + palm point per sample, world frame */
  links?: Vec3[][];
}

export interface RewardPayload {
  terms: Record<string, number>;
  total: number;
}

export interface PoseSample {
  t: number;
  q: number[];
  links?: Vec3[];
  reward?: RewardPayload | null;
  objects: Record<string, { position: Vec3; orientation: Quat }>;
}

export interface StepBatchPayload {
  poses: PoseSample[];
}

export interface StagePayload {
  stage: string;
}

export interface OutcomePayload {
  outcome: string;
  kind: string;
  target_id: string | null;
  final_position: Vec3 | null;
  destination: Vec3 | null;
  note: string;
  sim_steps: number;
}

export interface ErrorPayload {
  error: string;
  detail: string;
}

export type WireKind =
  | "scene_snapshot"
  | "plan_ready"
  | "step_batch"
  | "stage_change"
  | "trial_outcome"
  | "error"
  | "heartbeat";

export interface WireEvent {
  v: string;
  seq: number;
  kind: WireKind;
  payload:
    | ScenePayload
    | PlanPayload
    | StepBatchPayload
    | StagePayload
    | OutcomePayload
    | ErrorPayload
    | Record<string, never>;
}

/** Rejection body for POST /sessions/{id}/command (HTTP 409/422). */
export interface CommandRejection {
  error: "AmbiguousCommand" | "ParseFailure" | "BusySession" | string;
  detail: string;
  candidates?: string[];
}

export interface CommandAccepted {
  accepted: true;
  task: {
    kind: string;
    target_id: string;
    destination: number[];
    bottom_id: string | null;
  };
}
