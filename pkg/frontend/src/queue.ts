/** Review queue: which image to look at next.
 *
 * Unreviewed images come first (lowest id first), then the rest; an
 * optional score band keeps only images whose best pseudo-label score
 * falls inside [lo, hi).  Background images (no boxes) always pass the
 * band filter so they can be accepted quickly.
 */

import type { ImageEntry, Stats } from "./types.js";

export interface ScoreBand {
  lo: number;
  hi: number;
}

export function orderQueue(entries: ImageEntry[], band?: ScoreBand): ImageEntry[] {
  const inBand = (e: ImageEntry) =>
    !band || e.n_boxes === 0 || (e.max_score >= band.lo && e.max_score < band.hi);
  const unreviewed = entries.filter((e) => e.state === "unreviewed" && inBand(e));
  const reviewed = entries.filter((e) => e.state !== "unreviewed" && inBand(e));
  return [...unreviewed, ...reviewed];
}

export function pendingCount(entries: ImageEntry[], band?: ScoreBand): number {
  return orderQueue(entries, band).filter((e) => e.state === "unreviewed").length;
}

export function nextUnreviewed(
  entries: ImageEntry[],
  afterId: number,
  band?: ScoreBand,
): ImageEntry | null {
  const queue = orderQueue(entries, band).filter((e) => e.state === "unreviewed");
  if (queue.length === 0) return null;
  const later = queue.find((e) => e.id > afterId);
  return later ?? queue[0];
}

export function progressLabel(stats: Stats): string {
  const done = (stats.by_state["accepted"] ?? 0) + (stats.by_state["corrected"] ?? 0);
  return `${done} / ${stats.total} reviewed`;
}
