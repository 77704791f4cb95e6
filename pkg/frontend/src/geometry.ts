/** Coordinate math between normalized box space and canvas pixels.
 *
 * A box with normalized (cx, cy, w, h) is drawn at the pixel rect
 * ((cx - w/2) * W, (cy - h/2) * H, w * W, h * H) for whatever canvas
 * size W x H is in effect; zooming only changes W and H.
 */

import type { Box } from "./types.js";
import { clamp01 } from "./format.js";

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export type Handle = "nw" | "ne" | "sw" | "se" | "n" | "s" | "e" | "w" | "move";

export function boxToCanvasRect(box: Box, canvasW: number, canvasH: number): Rect {
  return {
    x: (box.cx - box.w / 2) * canvasW,
    y: (box.cy - box.h / 2) * canvasH,
    w: box.w * canvasW,
    h: box.h * canvasH,
  };
}

export function canvasPointToNormalized(
  px: number,
  py: number,
  canvasW: number,
  canvasH: number,
): { x: number; y: number } {
  return { x: clamp01(px / canvasW), y: clamp01(py / canvasH) };
}

/** Normalized box from two drag corners, clamped to the image. */
export function boxFromCorners(
  a: { x: number; y: number },
  b: { x: number; y: number },
  classId = 0,
): Box {
  const x0 = clamp01(Math.min(a.x, b.x));
  const x1 = clamp01(Math.max(a.x, b.x));
  const y0 = clamp01(Math.min(a.y, b.y));
  const y1 = clamp01(Math.max(a.y, b.y));
  return {
    class_id: classId,
    cx: (x0 + x1) / 2,
    cy: (y0 + y1) / 2,
    w: x1 - x0,
    h: y1 - y0,
  };
}

/** Keep a box's corners inside [0, 1] after a move or resize. */
export function clampBox(box: Box): Box {
  let x0 = box.cx - box.w / 2;
  let y0 = box.cy - box.h / 2;
  let x1 = box.cx + box.w / 2;
  let y1 = box.cy + box.h / 2;
  if (x0 < 0) {
    x1 -= x0;
    x0 = 0;
  }
  if (y0 < 0) {
    y1 -= y0;
    y0 = 0;
  }
  if (x1 > 1) {
    x0 -= x1 - 1;
    x1 = 1;
  }
  if (y1 > 1) {
    y0 -= y1 - 1;
    y1 = 1;
  }
  x0 = clamp01(x0);
  y0 = clamp01(y0);
  return {
    class_id: box.class_id,
    cx: (x0 + x1) / 2,
    cy: (y0 + y1) / 2,
    w: x1 - x0,
    h: y1 - y0,
  };
}

const HANDLE_PX = 6;

/** Which part of which box a canvas point grabs, topmost box first. */
export function hitTest(
  boxes: Box[],
  px: number,
  py: number,
  canvasW: number,
  canvasH: number,
): { index: number; handle: Handle } | null {
  for (let i = boxes.length - 1; i >= 0; i--) {
    const r = boxToCanvasRect(boxes[i], canvasW, canvasH);
    const nearL = Math.abs(px - r.x) <= HANDLE_PX;
    const nearR = Math.abs(px - (r.x + r.w)) <= HANDLE_PX;
    const nearT = Math.abs(py - r.y) <= HANDLE_PX;
    const nearB = Math.abs(py - (r.y + r.h)) <= HANDLE_PX;
    const insideX = px >= r.x - HANDLE_PX && px <= r.x + r.w + HANDLE_PX;
    const insideY = py >= r.y - HANDLE_PX && py <= r.y + r.h + HANDLE_PX;
    if (!insideX || !insideY) continue;
    if (nearT && nearL) return { index: i, handle: "nw" };
    if (nearT && nearR) return { index: i, handle: "ne" };
    if (nearB && nearL) return { index: i, handle: "sw" };
    if (nearB && nearR) return { index: i, handle: "se" };
    if (nearT) return { index: i, handle: "n" };
    if (nearB) return { index: i, handle: "s" };
    if (nearL) return { index: i, handle: "w" };
    if (nearR) return { index: i, handle: "e" };
    if (px >= r.x && px <= r.x + r.w && py >= r.y && py <= r.y + r.h) {
      return { index: i, handle: "move" };
    }
  }
  return null;
}

/** Apply a pointer drag (normalized deltas) to a box via a handle. */
export function dragBox(box: Box, handle: Handle, dx: number, dy: number): Box {
  if (handle === "move") {
    return clampBox({ ...box, cx: box.cx + dx, cy: box.cy + dy });
  }
  let x0 = box.cx - box.w / 2;
  let y0 = box.cy - box.h / 2;
  let x1 = box.cx + box.w / 2;
  let y1 = box.cy + box.h / 2;
  if (handle.includes("w")) x0 += dx;
  if (handle.includes("e")) x1 += dx;
  if (handle.includes("n")) y0 += dy;
  if (handle.includes("s")) y1 += dy;
  const lo = 0.001; // never collapse below a thousandth of the image
  return clampBox({
    class_id: box.class_id,
    cx: (Math.min(x0, x1 - lo) + Math.max(x1, x0 + lo)) / 2,
    cy: (Math.min(y0, y1 - lo) + Math.max(y1, y0 + lo)) / 2,
    w: Math.max(x1 - x0, lo),
    h: Math.max(y1 - y0, lo),
  });
}
