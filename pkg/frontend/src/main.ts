/** DOM wiring: renders UiState into the page and turns DOM events into
 * state-machine events.  All logic lives in state.ts / controller.ts;
 * this file only reads state and pokes the DOM.
 */

import { ApiClient } from "./api.js";
import { applyOps, HIGHLIGHT, sceneDrawOps } from "./canvas.js";
import { UiController } from "./controller.js";
import type { UiState } from "./state.js";
import type { Candidate } from "./types.js";

const PREVIEW_PX = 192;
const SCENE_PX = 512;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

function context(canvas: HTMLCanvasElement): CanvasRenderingContext2D {
  const ctx = canvas.getContext("2d");
  if (ctx === null) throw new Error("canvas 2d context unavailable");
  return ctx;
}

function main(): void {
  const api = new ApiClient(window.location.origin);
  const controller = new UiController(api);

  const promptInput = el<HTMLInputElement>("prompt");
  const submitButton = el<HTMLButtonElement>("submit");
  const banner = el<HTMLDivElement>("banner");
  const candidateGrid = el<HTMLDivElement>("candidates");
  const moreButton = el<HTMLButtonElement>("more");
  const sceneCanvas = el<HTMLCanvasElement>("scene");
  const objectButtons = el<HTMLDivElement>("objects");
  const downloadLink = el<HTMLAnchorElement>("download");
  const classPicker = el<HTMLSelectElement>("box-class");
  const seedCanvas = el<HTMLCanvasElement>("seed");
  const seedHint = el<HTMLDivElement>("seed-hint");

  promptInput.addEventListener("input", () => {
    submitButton.disabled = promptInput.value.trim() === "";
  });
  submitButton.disabled = true;
  submitButton.addEventListener("click", () => {
    controller.dispatch({
      kind: "prompt_submitted",
      description: promptInput.value,
    });
  });
  moreButton.addEventListener("click", () => {
    controller.dispatch({ kind: "more_candidates_clicked" });
  });

  void api
    .healthz()
    .then((health) => {
      for (const label of health.classes) {
        const option = document.createElement("option");
        option.value = label;
        option.textContent = label;
        classPicker.appendChild(option);
      }
    })
    .catch(() => {
      seedHint.textContent = "service unreachable; seed boxes disabled";
    });

  // Drag a rectangle on the seed canvas to request an autocompletion.
  let dragStart: [number, number] | null = null;
  const seedCtx = context(seedCanvas);
  seedCanvas.addEventListener("mousedown", (event) => {
    const rect = seedCanvas.getBoundingClientRect();
    dragStart = [event.clientX - rect.left, event.clientY - rect.top];
  });
  seedCanvas.addEventListener("mousemove", (event) => {
    if (dragStart === null) return;
    const rect = seedCanvas.getBoundingClientRect();
    const x = event.clientX - rect.left;
    const y = event.clientY - rect.top;
    seedCtx.clearRect(0, 0, seedCanvas.width, seedCanvas.height);
    seedCtx.strokeStyle = HIGHLIGHT;
    seedCtx.lineWidth = 2;
    seedCtx.strokeRect(
      Math.min(dragStart[0], x),
      Math.min(dragStart[1], y),
      Math.abs(x - dragStart[0]),
      Math.abs(y - dragStart[1]),
    );
  });
  seedCanvas.addEventListener("mouseup", (event) => {
    if (dragStart === null) return;
    const rect = seedCanvas.getBoundingClientRect();
    const x = event.clientX - rect.left;
    const y = event.clientY - rect.top;
    const size = seedCanvas.width;
    const box = {
      class: classPicker.value,
      x: (dragStart[0] + x) / 2 / size,
      y: (dragStart[1] + y) / 2 / size,
      w: Math.abs(x - dragStart[0]) / size,
      h: Math.abs(y - dragStart[1]) / size,
    };
    dragStart = null;
    seedCtx.clearRect(0, 0, seedCanvas.width, seedCanvas.height);
    if (box.w > 0 && box.h > 0) {
      controller.dispatch({ kind: "box_drawn", box });
    }
  });

  function renderCandidates(state: UiState): void {
    candidateGrid.replaceChildren();
    for (const candidate of state.candidates ?? []) {
      const tile = document.createElement("div");
      tile.className = "tile";
      const canvas = document.createElement("canvas");
      canvas.width = PREVIEW_PX;
      canvas.height = PREVIEW_PX;
      applyOps(
        context(canvas),
        sceneDrawOps(candidate.preview, PREVIEW_PX, {
          highlightBox: state.userBox ?? undefined,
        }),
      );
      canvas.addEventListener("click", () => {
        controller.dispatch({
          kind: "candidate_clicked",
          candidateId: candidate.candidate_id,
        });
      });
      const caption = document.createElement("div");
      caption.textContent = candidate.candidate_id;
      tile.append(canvas, caption);
      candidateGrid.appendChild(tile);
    }
  }

  function renderScene(state: UiState): void {
    const ctx = context(sceneCanvas);
    if (state.scene === null) {
      ctx.clearRect(0, 0, SCENE_PX, SCENE_PX);
    } else {
      applyOps(
        ctx,
        sceneDrawOps(state.scene, SCENE_PX, {
          highlightObject: state.hoveredObject ?? undefined,
        }),
      );
    }

    objectButtons.replaceChildren();
    const objects = state.selection?.layout.objects ?? [];
    objects.forEach((object, index) => {
      const button = document.createElement("button");
      button.textContent = `redraw ${object.class}`;
      button.addEventListener("click", () => {
        controller.dispatch({ kind: "redraw_clicked", objectIndex: index });
      });
      button.addEventListener("mouseenter", () => {
        controller.dispatch({ kind: "object_hovered", objectIndex: index });
      });
      button.addEventListener("mouseleave", () => {
        controller.dispatch({ kind: "object_hovered", objectIndex: null });
      });
      objectButtons.appendChild(button);
    });

    if (state.svg !== null) {
      downloadLink.href = URL.createObjectURL(
        new Blob([state.svg], { type: "image/svg+xml" }),
      );
      downloadLink.download = "scene.svg";
      downloadLink.hidden = false;
    } else {
      downloadLink.hidden = true;
    }
  }

  controller.subscribe((state) => {
    banner.textContent = state.banner ?? "";
    banner.hidden = state.banner === null;
    moreButton.hidden = state.phase !== "choosing";
    renderCandidates(state);
    renderScene(state);
  });
}

main();
