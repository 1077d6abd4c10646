/** Shared builders and fakes for the UI test suite. */

import type {
  Candidate,
  CandidatesResponse,
  CreateSessionResponse,
  LayoutDoc,
  RenderJsonResponse,
  ResketchResponse,
  SceneDoc,
  SelectResponse,
} from "../src/types.js";

export function makeLayout(overrides: Partial<LayoutDoc> = {}): LayoutDoc {
  return {
    description: "a horse under a tree",
    objects: [
      { class: "horse", x: 0.5, y: 0.74, w: 0.2, h: 0.12 },
      { class: "tree", x: 0.5, y: 0.26, w: 0.22, h: 0.14 },
    ],
    seed: 7,
    temperature: 0.4,
    truncated: false,
    clamped_count: 0,
    source: "model",
    ...overrides,
  };
}

export function makeScene(overrides: Partial<SceneDoc> = {}): SceneDoc {
  return {
    description: "a horse under a tree",
    canvas_px: 512,
    objects: [
      {
        label: "horse",
        layer: 0,
        box: { x: 0.5, y: 0.74, w: 0.2, h: 0.12 },
        polylines: [
          [
            [0.4, 0.68],
            [0.6, 0.8],
          ],
        ],
      },
      {
        label: "tree",
        layer: 1,
        box: { x: 0.5, y: 0.26, w: 0.22, h: 0.14 },
        polylines: [
          [
            [0.39, 0.19],
            [0.61, 0.33],
            [0.5, 0.26],
          ],
        ],
      },
    ],
    provenance: {},
    ...overrides,
  };
}

export function makeCandidate(id: string): Candidate {
  return { candidate_id: id, layout: makeLayout(), preview: makeScene() };
}

export function makeCandidatesResponse(
  round: number,
  ids: string[],
): CandidatesResponse {
  return {
    schema_version: 1,
    session_id: "s000001",
    round,
    candidates: ids.map(makeCandidate),
  };
}

export const CREATE_RESPONSE: CreateSessionResponse = {
  schema_version: 1,
  session_id: "s000001",
  description: "a horse under a tree",
};

export const SELECT_RESPONSE: SelectResponse = {
  schema_version: 1,
  session_id: "s000001",
  selected: makeLayout(),
  object_seeds: [11, 22],
};

export const RESKETCH_RESPONSE: ResketchResponse = {
  schema_version: 1,
  session_id: "s000001",
  object_index: 0,
  object_seed: 99,
  object_seeds: [99, 22],
};

export const RENDER_JSON_RESPONSE: RenderJsonResponse = {
  schema_version: 1,
  session_id: "s000001",
  scene: makeScene(),
};

export const SVG_TEXT = '<svg xmlns="http://www.w3.org/2000/svg"></svg>';

export interface Deferred<T> {
  promise: Promise<T>;
  resolve: (value: T) => void;
  reject: (reason?: unknown) => void;
}

export function deferred<T>(): Deferred<T> {
  let resolve!: (value: T) => void;
  let reject!: (reason?: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

/** Let queued microtasks and zero-delay timers run. */
export function tick(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
