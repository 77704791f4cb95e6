/** JSON shapes of the review API. */

export interface Box {
  class_id: number;
  cx: number;
  cy: number;
  w: number;
  h: number;
}

export interface ImageEntry {
  id: number;
  image: string;
  label: string;
  state: "unreviewed" | "accepted" | "corrected";
  revision: number;
  split: string;
  n_boxes: number;
  max_score: number;
}

export interface ImagePage {
  total: number;
  page: number;
  page_size: number;
  images: ImageEntry[];
}

export interface LabelsDoc {
  id: number;
  boxes: Box[];
  revision: number;
  state: string;
}

export interface Stats {
  total: number;
  by_state: Record<string, number>;
  score_histogram: number[];
}

export interface SaveResult {
  ok: boolean;
  conflict: boolean;
  revision: number;
}
