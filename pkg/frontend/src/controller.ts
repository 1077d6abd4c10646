/** Connects the pure state machine to the HTTP client.
 *
 * Dispatching an event runs the reducer, appends the event to the log,
 * and executes the commands the transition emitted.  Mutation commands
 * (POSTs) are serialized: at most one is in flight per session, the rest
 * wait in a local FIFO queue.  Reads (GETs) run immediately.  Every
 * server response is fed back in as another event, so the log alone
 * reproduces the session (see `replayLog` in state.ts).
 */

import { ApiClient } from "./api.js";
import type { Command, Transition, UiEvent, UiState } from "./state.js";
import { initialState, reduce } from "./state.js";

const MUTATIONS = new Set<Command["kind"]>([
  "create_session",
  "post_autocomplete",
  "post_select",
  "post_resketch",
]);

export class UiController {
  state: UiState = initialState;
  readonly eventLog: UiEvent[] = [];
  /** Every command executed, in order - the outgoing request sequence. */
  readonly requestLog: Command[] = [];

  private readonly queue: Command[] = [];
  private mutationInFlight = false;
  private readonly listeners: Array<(state: UiState) => void> = [];

  constructor(private readonly api: ApiClient) {}

  subscribe(listener: (state: UiState) => void): void {
    this.listeners.push(listener);
  }

  dispatch(event: UiEvent): void {
    this.eventLog.push(event);
    const transition: Transition = reduce(this.state, event);
    this.state = transition.state;
    for (const listener of this.listeners) listener(this.state);
    for (const command of transition.commands) {
      if (MUTATIONS.has(command.kind)) {
        this.queue.push(command);
        this.pumpQueue();
      } else {
        void this.execute(command);
      }
    }
  }

  /** Resolves once no mutation is in flight and the queue is drained. */
  async idle(): Promise<void> {
    while (this.mutationInFlight || this.queue.length > 0 || this.reads > 0) {
      await new Promise((resolve) => setTimeout(resolve, 1));
    }
  }

  private reads = 0;

  private pumpQueue(): void {
    if (this.mutationInFlight) return;
    const command = this.queue.shift();
    if (command === undefined) return;
    this.mutationInFlight = true;
    void this.execute(command).finally(() => {
      this.mutationInFlight = false;
      this.pumpQueue();
    });
  }

  private async execute(command: Command): Promise<void> {
    this.requestLog.push(command);
    const isRead = !MUTATIONS.has(command.kind);
    if (isRead) this.reads += 1;
    try {
      await this.run(command);
    } catch (error) {
      this.dispatch({
        kind: "request_failed",
        message: error instanceof Error ? error.message : String(error),
      });
    } finally {
      if (isRead) this.reads -= 1;
    }
  }

  private sessionId(): string {
    const id = this.state.sessionId;
    if (id === null) throw new Error("no active session");
    return id;
  }

  private async run(command: Command): Promise<void> {
    switch (command.kind) {
      case "create_session": {
        const created = await this.api.createSession(
          command.description,
          command.requestId,
        );
        this.dispatch({
          kind: "session_created",
          sessionId: created.session_id,
          description: created.description,
        });
        return;
      }
      case "fetch_candidates": {
        const response = await this.api.getCandidates(
          this.sessionId(),
          command.k,
        );
        this.dispatch({
          kind: "candidates_received",
          round: response.round,
          candidates: response.candidates,
        });
        return;
      }
      case "post_autocomplete": {
        const response = await this.api.autocomplete(
          this.sessionId(),
          command.box,
          command.k,
          command.requestId,
        );
        this.dispatch({
          kind: "candidates_received",
          round: response.round,
          candidates: response.candidates,
        });
        return;
      }
      case "post_select": {
        const response = await this.api.select(
          this.sessionId(),
          command.candidateId,
          command.requestId,
        );
        this.dispatch({
          kind: "selection_confirmed",
          layout: response.selected,
          objectSeeds: response.object_seeds,
        });
        return;
      }
      case "post_resketch": {
        const response = await this.api.resketch(
          this.sessionId(),
          command.objectIndex,
          command.requestId,
        );
        this.dispatch({
          kind: "resketch_confirmed",
          objectIndex: response.object_index,
          objectSeeds: response.object_seeds,
        });
        return;
      }
      case "fetch_scene": {
        const id = this.sessionId();
        const [sceneDoc, svg] = await Promise.all([
          this.api.renderJson(id),
          this.api.renderSvg(id),
        ]);
        this.dispatch({
          kind: "scene_received",
          scene: sceneDoc.scene,
          svg,
        });
        return;
      }
      default: {
        const exhaustive: never = command;
        throw new Error(`unknown command ${JSON.stringify(exhaustive)}`);
      }
    }
  }
}
