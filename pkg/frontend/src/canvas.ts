/** Canvas drawing as data.
 *
 * `sceneDrawOps` turns a server scene into a flat list of drawing
 * operations — exactly the polylines the server sent, scaled to the
 * target surface, nothing invented client-side.  `applyOps` plays a list
 * onto a real 2D context.  Keeping ops as data makes rendering testable
 * without a DOM.
 */

import type { SceneDoc, UserBox } from "./types.js";

export type DrawOp =
  | { op: "clear"; size: number }
  | {
      op: "polyline";
      points: Array<[number, number]>;
      color: string;
      width: number;
    }
  | {
      op: "rect";
      x: number;
      y: number;
      w: number;
      h: number;
      color: string;
      width: number;
    };

export interface SceneDrawOptions {
  /** Highlight this unit-canvas box (the user's seed box). */
  highlightBox?: UserBox;
  /** Emphasize one object's strokes (hover state). */
  highlightObject?: number;
}

export const INK = "#1a1a1a";
export const INK_FADED = "#9a9a9a";
export const HIGHLIGHT = "#c8401a";

/** Ops to draw a server scene onto a square surface of `size` pixels. */
export function sceneDrawOps(
  scene: SceneDoc,
  size: number,
  options: SceneDrawOptions = {},
): DrawOp[] {
  // Polylines arrive in unit-canvas coordinates; canvas_px is only the
  // server's suggested raster size, which we use to keep stroke widths
  // visually consistent across surface sizes.
  const strokePx = size / scene.canvas_px;
  const ops: DrawOp[] = [{ op: "clear", size }];
  const objects = [...scene.objects].sort((a, b) => a.layer - b.layer);
  for (const object of objects) {
    const emphasized =
      options.highlightObject === undefined ||
      object.layer === options.highlightObject;
    for (const line of object.polylines) {
      ops.push({
        op: "polyline",
        points: line.map(
          (point) => [point[0]! * size, point[1]! * size] as [number, number],
        ),
        color: emphasized ? INK : INK_FADED,
        width: emphasized ? 2 * strokePx : 1.5 * strokePx,
      });
    }
  }
  if (options.highlightBox !== undefined) {
    const box = options.highlightBox;
    ops.push({
      op: "rect",
      x: (box.x - box.w / 2) * size,
      y: (box.y - box.h / 2) * size,
      w: box.w * size,
      h: box.h * size,
      color: HIGHLIGHT,
      width: 2,
    });
  }
  return ops;
}

/** Minimal slice of CanvasRenderingContext2D that `applyOps` needs. */
export interface Context2dLike {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  lineCap: string;
  lineJoin: string;
}

export function applyOps(ctx: Context2dLike, ops: DrawOp[]): void {
  ctx.lineCap = "round";
  ctx.lineJoin = "round";
  for (const op of ops) {
    switch (op.op) {
      case "clear":
        ctx.clearRect(0, 0, op.size, op.size);
        break;
      case "polyline": {
        if (op.points.length < 2) break;
        ctx.strokeStyle = op.color;
        ctx.lineWidth = op.width;
        ctx.beginPath();
        const [first, ...rest] = op.points;
        ctx.moveTo(first![0], first![1]);
        for (const point of rest) ctx.lineTo(point[0], point[1]);
        ctx.stroke();
        break;
      }
      case "rect":
        ctx.strokeStyle = op.color;
        ctx.lineWidth = op.width;
        ctx.strokeRect(op.x, op.y, op.w, op.h);
        break;
    }
  }
}
