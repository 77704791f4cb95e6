/** Editable state of the box editor for one image.
 *
 * Invariant: after a successful save, the local boxes equal the server
 * state at the recorded revision; `dirty` is set exactly when local
 * edits have not been saved.
 */

import type { Box } from "./types.js";

export class EditorState {
  imageId = -1;
  boxes: Box[] = [];
  selection = -1;
  dirty = false;
  revision = 0;
  /** review state last acknowledged by the server */
  savedState = "unreviewed";

  load(imageId: number, boxes: Box[], revision: number, state: string): void {
    this.imageId = imageId;
    this.boxes = boxes.map((b) => ({ ...b }));
    this.revision = revision;
    this.savedState = state;
    this.selection = -1;
    this.dirty = false;
  }

  addBox(box: Box): void {
    this.boxes.push(box);
    this.selection = this.boxes.length - 1;
    this.dirty = true;
  }

  replaceBox(index: number, box: Box): void {
    this.boxes[index] = box;
    this.dirty = true;
  }

  deleteSelected(): void {
    if (this.selection < 0) return;
    this.boxes.splice(this.selection, 1);
    this.selection = -1;
    this.dirty = true;
  }

  setClass(classId: number): void {
    if (this.selection < 0) return;
    this.boxes[this.selection] = { ...this.boxes[this.selection], class_id: classId };
    this.dirty = true;
  }

  /** Does saving under `state` need a round-trip at all? */
  needsSave(state: "accepted" | "corrected"): boolean {
    return this.dirty || this.savedState !== state;
  }

  markSaved(revision: number, state: string): void {
    this.revision = revision;
    this.savedState = state;
    this.dirty = false;
  }
}
