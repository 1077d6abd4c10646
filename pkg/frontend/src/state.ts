/** Pure UI state machine.
 *
 * `reduce(state, event)` is the only way state changes.  It returns the
 * next state plus the HTTP commands the change requires — so the full
 * transition is a pure function of (current state, event), and replaying
 * an event log reproduces the exact request sequence.  All generation
 * happens server-side; this module only bookkeeps what the server said.
 */

import type { Candidate, LayoutDoc, SceneDoc, UserBox } from "./types.js";

export type Phase =
  | "idle" // no session; prompt entry enabled
  | "creating" // session creation in flight
  | "choosing" // waiting for or showing a candidate round
  | "selected"; // a layout is selected; scene view active

export interface UiState {
  phase: Phase;
  sessionId: string | null;
  description: string;
  /** Current candidate round, immutable once issued. */
  round: number | null;
  candidates: Candidate[] | null;
  /** The accepted seed box, when this round came from autocompletion. */
  userBox: UserBox | null;
  selection: { layout: LayoutDoc; objectSeeds: number[] } | null;
  scene: SceneDoc | null;
  svg: string | null;
  /** View-only state. */
  hoveredObject: number | null;
  banner: string | null;
  /** Monotone counter stamping request ids onto mutations. */
  mutationCounter: number;
}

export const initialState: UiState = {
  phase: "idle",
  sessionId: null,
  description: "",
  round: null,
  candidates: null,
  userBox: null,
  selection: null,
  scene: null,
  svg: null,
  hoveredObject: null,
  banner: null,
  mutationCounter: 0,
};

/** User events and (authoritative) server-response events. */
export type UiEvent =
  | { kind: "prompt_submitted"; description: string }
  | { kind: "session_created"; sessionId: string; description: string }
  | { kind: "candidates_received"; round: number; candidates: Candidate[] }
  | { kind: "box_drawn"; box: UserBox }
  | { kind: "candidate_clicked"; candidateId: string }
  | { kind: "selection_confirmed"; layout: LayoutDoc; objectSeeds: number[] }
  | { kind: "redraw_clicked"; objectIndex: number }
  | { kind: "resketch_confirmed"; objectIndex: number; objectSeeds: number[] }
  | { kind: "scene_received"; scene: SceneDoc; svg: string }
  | { kind: "more_candidates_clicked" }
  | { kind: "object_hovered"; objectIndex: number | null }
  | { kind: "request_failed"; message: string };

/** HTTP work the transition asks for; executed by the controller. */
export type Command =
  | { kind: "create_session"; description: string; requestId: string }
  | { kind: "fetch_candidates"; k: number }
  | { kind: "post_autocomplete"; box: UserBox; k: number; requestId: string }
  | { kind: "post_select"; candidateId: string; requestId: string }
  | { kind: "post_resketch"; objectIndex: number; requestId: string }
  | { kind: "fetch_scene" };

export interface Transition {
  state: UiState;
  commands: Command[];
}

const DEFAULT_K = 4;

function unchanged(state: UiState): Transition {
  return { state, commands: [] };
}

function boxInCanvas(box: UserBox): boolean {
  return (
    box.x >= 0 &&
    box.x <= 1 &&
    box.y >= 0 &&
    box.y <= 1 &&
    box.w > 0 &&
    box.w <= 1 &&
    box.h > 0 &&
    box.h <= 1
  );
}

function stampMutation(state: UiState): { state: UiState; requestId: string } {
  const counter = state.mutationCounter + 1;
  return {
    state: { ...state, mutationCounter: counter },
    requestId: `m${counter}`,
  };
}

export function reduce(state: UiState, event: UiEvent): Transition {
  switch (event.kind) {
    case "prompt_submitted": {
      const description = event.description.trim();
      if (description === "" || state.phase === "creating") {
        return unchanged(state); // submit is disabled for empty prompts
      }
      const { state: stamped, requestId } = stampMutation(state);
      return {
        state: {
          ...initialState,
          mutationCounter: stamped.mutationCounter,
          phase: "creating",
          description,
        },
        commands: [{ kind: "create_session", description, requestId }],
      };
    }

    case "session_created":
      return {
        state: {
          ...state,
          phase: "choosing",
          sessionId: event.sessionId,
          description: event.description,
          banner: null,
        },
        commands: [{ kind: "fetch_candidates", k: DEFAULT_K }],
      };

    case "candidates_received":
      return {
        state: {
          ...state,
          phase: "choosing",
          round: event.round,
          candidates: event.candidates,
          banner: null,
        },
        commands: [],
      };

    case "box_drawn": {
      if (state.sessionId === null || !boxInCanvas(event.box)) {
        return unchanged(state);
      }
      const { state: stamped, requestId } = stampMutation(state);
      return {
        state: {
          ...stamped,
          phase: "choosing",
          userBox: event.box,
          candidates: null,
          round: null,
        },
        commands: [
          { kind: "post_autocomplete", box: event.box, k: DEFAULT_K, requestId },
        ],
      };
    }

    case "candidate_clicked": {
      const issued = state.candidates ?? [];
      if (!issued.some((c) => c.candidate_id === event.candidateId)) {
        return unchanged(state); // only the current round is selectable
      }
      const { state: stamped, requestId } = stampMutation(state);
      return {
        state: stamped,
        commands: [
          { kind: "post_select", candidateId: event.candidateId, requestId },
        ],
      };
    }

    case "selection_confirmed":
      return {
        state: {
          ...state,
          phase: "selected",
          selection: { layout: event.layout, objectSeeds: event.objectSeeds },
          candidates: null,
          round: null,
          scene: null,
          svg: null,
          banner: null,
        },
        commands: [{ kind: "fetch_scene" }],
      };

    case "redraw_clicked": {
      const objects = state.selection?.layout.objects ?? [];
      if (
        state.phase !== "selected" ||
        event.objectIndex < 0 ||
        event.objectIndex >= objects.length
      ) {
        return unchanged(state);
      }
      const { state: stamped, requestId } = stampMutation(state);
      return {
        state: stamped,
        commands: [
          { kind: "post_resketch", objectIndex: event.objectIndex, requestId },
        ],
      };
    }

    case "resketch_confirmed": {
      if (state.selection === null) return unchanged(state);
      return {
        state: {
          ...state,
          selection: { ...state.selection, objectSeeds: event.objectSeeds },
          scene: null,
          svg: null,
          banner: null,
        },
        commands: [{ kind: "fetch_scene" }],
      };
    }

    case "scene_received":
      return {
        state: { ...state, scene: event.scene, svg: event.svg, banner: null },
        commands: [],
      };

    case "more_candidates_clicked":
      if (state.sessionId === null || state.phase !== "choosing") {
        return unchanged(state);
      }
      return {
        state: { ...state, candidates: null, round: null },
        commands: [{ kind: "fetch_candidates", k: DEFAULT_K }],
      };

    case "object_hovered":
      return { state: { ...state, hoveredObject: event.objectIndex }, commands: [] };

    case "request_failed":
      // Server-side failure: show a retry banner, mutate nothing else.
      return {
        state: {
          ...state,
          phase: state.phase === "creating" ? "idle" : state.phase,
          banner: event.message,
        },
        commands: [],
      };

    default: {
      const exhaustive: never = event;
      return unchanged(exhaustive as UiState & never);
    }
  }
}

/** Fold an event log from scratch; the request sequence falls out of it. */
export function replayLog(events: UiEvent[]): {
  state: UiState;
  requests: Command[];
} {
  let state = initialState;
  const requests: Command[] = [];
  for (const event of events) {
    const transition = reduce(state, event);
    state = transition.state;
    requests.push(...transition.commands);
  }
  return { state, requests };
}
