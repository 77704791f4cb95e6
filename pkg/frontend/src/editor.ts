/** Canvas-based box editor: one canvas draws the raster and an overlay
 * of every box, which stays responsive with hundreds of boxes per
 * frame.  Pointer gestures draw, move and resize; saving PUTs the
 * boxes with the revision we loaded, and a 409 reloads and informs.
 */

import { ReviewApi } from "./api.js";
import {
  Handle,
  boxFromCorners,
  boxToCanvasRect,
  canvasPointToNormalized,
  dragBox,
  hitTest,
} from "./geometry.js";
import { EditorState } from "./state.js";
import type { Box } from "./types.js";

interface Ctx2dLike {
  clearRect(x: number, y: number, w: number, h: number): void;
  drawImage(img: CanvasImageSource, x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
}

export interface EditorOptions {
  ctx?: Ctx2dLike; // injectable for tests; defaults to the canvas 2d context
  onStatus?: (message: string) => void;
  onSaved?: () => void;
  loadImage?: (url: string) => Promise<CanvasImageSource | null>;
}

type Gesture =
  | { kind: "draw"; anchor: { x: number; y: number } }
  | { kind: "edit"; index: number; handle: Handle; lastX: number; lastY: number }
  | null;

async function defaultLoadImage(url: string): Promise<CanvasImageSource | null> {
  return new Promise((resolve) => {
    const img = new Image();
    img.onload = () => resolve(img);
    img.onerror = () => resolve(null);
    img.src = url;
  });
}

export class BoxEditor {
  readonly state = new EditorState();
  private ctx: Ctx2dLike;
  private image: CanvasImageSource | null = null;
  private gesture: Gesture = null;
  private saveInFlight = false;
  private opts: EditorOptions;

  constructor(
    private canvas: HTMLCanvasElement,
    private api: ReviewApi,
    opts: EditorOptions = {},
  ) {
    this.opts = opts;
    this.ctx = opts.ctx ?? (canvas.getContext("2d") as unknown as Ctx2dLike);
    canvas.addEventListener("pointerdown", (e) => this.pointerDown(e));
    canvas.addEventListener("pointermove", (e) => this.pointerMove(e));
    canvas.addEventListener("pointerup", (e) => this.pointerUp(e));
  }

  private status(message: string): void {
    this.opts.onStatus?.(message);
  }

  async open(imageId: number): Promise<void> {
    const doc = await this.api.getLabels(imageId);
    this.state.load(imageId, doc.boxes, doc.revision, doc.state);
    const load = this.opts.loadImage ?? defaultLoadImage;
    this.image = await load(this.api.rasterUrl(imageId));
    this.draw();
  }

  async reload(): Promise<void> {
    const doc = await this.api.getLabels(this.state.imageId);
    this.state.load(this.state.imageId, doc.boxes, doc.revision, doc.state);
    this.draw();
  }

  draw(): void {
    const { width, height } = this.canvas;
    this.ctx.clearRect(0, 0, width, height);
    if (this.image) {
      this.ctx.drawImage(this.image, 0, 0, width, height);
    }
    this.state.boxes.forEach((box, i) => {
      const r = boxToCanvasRect(box, width, height);
      this.ctx.lineWidth = i === this.state.selection ? 3 : 2;
      this.ctx.strokeStyle = i === this.state.selection ? "#ffd24a" : "#4ae38b";
      this.ctx.strokeRect(r.x, r.y, r.w, r.h);
      if (i === this.state.selection) {
        this.ctx.fillStyle = "#ffd24a";
        for (const [hx, hy] of [
          [r.x, r.y],
          [r.x + r.w, r.y],
          [r.x, r.y + r.h],
          [r.x + r.w, r.y + r.h],
        ]) {
          this.ctx.fillRect(hx - 3, hy - 3, 6, 6);
        }
      }
    });
  }

  private canvasPoint(e: PointerEvent): { px: number; py: number } {
    const rect = this.canvas.getBoundingClientRect();
    const scaleX = rect.width ? this.canvas.width / rect.width : 1;
    const scaleY = rect.height ? this.canvas.height / rect.height : 1;
    return { px: (e.clientX - rect.left) * scaleX, py: (e.clientY - rect.top) * scaleY };
  }

  pointerDown(e: PointerEvent): void {
    const { px, py } = this.canvasPoint(e);
    const hit = hitTest(this.state.boxes, px, py, this.canvas.width, this.canvas.height);
    if (hit) {
      this.state.selection = hit.index;
      this.gesture = { kind: "edit", index: hit.index, handle: hit.handle, lastX: px, lastY: py };
    } else {
      this.state.selection = -1;
      const anchor = canvasPointToNormalized(px, py, this.canvas.width, this.canvas.height);
      this.gesture = { kind: "draw", anchor };
    }
    this.draw();
  }

  pointerMove(e: PointerEvent): void {
    if (!this.gesture) return;
    const { px, py } = this.canvasPoint(e);
    if (this.gesture.kind === "edit") {
      const dx = (px - this.gesture.lastX) / this.canvas.width;
      const dy = (py - this.gesture.lastY) / this.canvas.height;
      this.gesture.lastX = px;
      this.gesture.lastY = py;
      const updated = dragBox(this.state.boxes[this.gesture.index], this.gesture.handle, dx, dy);
      this.state.replaceBox(this.gesture.index, updated);
      this.draw();
    }
  }

  pointerUp(e: PointerEvent): void {
    if (!this.gesture) return;
    const { px, py } = this.canvasPoint(e);
    if (this.gesture.kind === "draw") {
      const here = canvasPointToNormalized(px, py, this.canvas.width, this.canvas.height);
      const box = boxFromCorners(this.gesture.anchor, here);
      if (box.w > 0.004 && box.h > 0.004) {
        this.state.addBox(box); // drag outside the image is already clamped
      }
    }
    this.gesture = null;
    this.draw();
  }

  deleteSelected(): void {
    this.state.deleteSelected();
    this.draw();
  }

  /** Save boxes under the given review state.  Skips the round-trip
   * when nothing changed; at most one save is in flight at a time. */
  async save(state: "accepted" | "corrected"): Promise<boolean> {
    if (!this.state.needsSave(state)) return true;
    if (this.saveInFlight) return false;
    this.saveInFlight = true;
    try {
      const result = await this.api.putLabels(
        this.state.imageId,
        this.state.boxes.map((b: Box) => ({ ...b })),
        this.state.revision,
        state,
      );
      if (result.conflict) {
        this.status("Server copy changed (stale revision); reloaded the latest boxes.");
        await this.reload();
        return false;
      }
      this.state.markSaved(result.revision, state);
      this.status(state === "accepted" ? "Accepted." : "Saved corrections.");
      this.opts.onSaved?.();
      return true;
    } finally {
      this.saveInFlight = false;
    }
  }
}
