/** Canonical label-file text: `class cx cy w h`, six decimals, one
 * line per box.  Mirrors the server-side writer byte for byte so the
 * client can preview exactly what will land on disk. */

import type { Box } from "./types.js";

export function clamp01(v: number): number {
  return Math.min(Math.max(v, 0), 1);
}

export function formatCoord(v: number): string {
  return clamp01(v).toFixed(6);
}

export function formatLabelText(boxes: Box[]): string {
  if (boxes.length === 0) return "";
  return (
    boxes
      .map(
        (b) =>
          `${b.class_id} ${formatCoord(b.cx)} ${formatCoord(b.cy)} ` +
          `${formatCoord(b.w)} ${formatCoord(b.h)}`,
      )
      .join("\n") + "\n"
  );
}
