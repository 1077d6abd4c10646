/** JSON payload shapes of the scenesketch HTTP service. */

/** One labeled box, center-anchored on the unit canvas (y grows downward). */
export interface LayoutObject {
  class: string;
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface LayoutDoc {
  description: string;
  objects: LayoutObject[];
  seed: number;
  temperature: number;
  truncated: boolean;
  clamped_count: number;
  source: string;
}

export interface SceneBox {
  x: number;
  y: number;
  w: number;
  h: number;
}

/** One placed sketch: polylines in unit-canvas coordinates (y grows down). */
export interface SceneObject {
  label: string;
  layer: number;
  box: SceneBox;
  polylines: number[][][];
}

export interface SceneDoc {
  description: string;
  canvas_px: number;
  objects: SceneObject[];
  provenance: Record<string, unknown>;
}

export interface Candidate {
  candidate_id: string;
  layout: LayoutDoc;
  preview: SceneDoc;
}

export interface CreateSessionResponse {
  schema_version: number;
  session_id: string;
  description: string;
}

export interface CandidatesResponse {
  schema_version: number;
  session_id: string;
  round: number;
  candidates: Candidate[];
}

export interface SelectResponse {
  schema_version: number;
  session_id: string;
  selected: LayoutDoc;
  object_seeds: number[];
}

export interface ResketchResponse {
  schema_version: number;
  session_id: string;
  object_index: number;
  object_seed: number;
  object_seeds: number[];
}

export interface RenderJsonResponse {
  schema_version: number;
  session_id: string;
  scene: SceneDoc;
}

export interface HealthResponse {
  schema_version: number;
  status: string;
  classes: string[];
}

/** A user-drawn seed box for autocompletion. */
export interface UserBox {
  class: string;
  x: number;
  y: number;
  w: number;
  h: number;
}
