/** App bootstrap: queue on the left, canvas editor in the middle,
 * keyboard-first workflow.
 *
 *   arrows / j k   previous, next image
 *   a              accept as-is and advance
 *   s              save corrections
 *   x / Delete     delete the selected box
 *   0-9            set the selected box's class
 */

import { ReviewApi, withBackoff } from "./api.js";
import { BoxEditor } from "./editor.js";
import { nextUnreviewed, orderQueue, pendingCount, progressLabel } from "./queue.js";
import type { ImageEntry } from "./types.js";

const api = new ReviewApi("");

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

async function boot(): Promise<void> {
  const canvas = el<HTMLCanvasElement>("editor-canvas");
  const statusLine = el<HTMLDivElement>("status");
  const listPane = el<HTMLUListElement>("image-list");
  const progress = el<HTMLDivElement>("progress");
  const banner = el<HTMLDivElement>("banner");

  let entries: ImageEntry[] = [];
  let currentId = -1;

  const editor = new BoxEditor(canvas, api, {
    onStatus: (m) => (statusLine.textContent = m),
    onSaved: () => void refreshEntries(),
  });

  async function refreshEntries(): Promise<void> {
    const page = await withBackoff(() => api.listImages());
    entries = page.images;
    const stats = await withBackoff(() => api.getStats());
    progress.textContent = progressLabel(stats);
    banner.hidden = pendingCount(entries) !== 0;
    renderList();
  }

  function renderList(): void {
    listPane.innerHTML = "";
    for (const entry of orderQueue(entries)) {
      const item = document.createElement("li");
      item.textContent = `#${entry.id} ${entry.state} (${entry.n_boxes} boxes)`;
      item.className = entry.state + (entry.id === currentId ? " current" : "");
      item.onclick = () => void show(entry.id);
      listPane.appendChild(item);
    }
  }

  async function show(id: number): Promise<void> {
    if (editor.state.dirty && !window.confirm("Discard unsaved edits?")) return;
    currentId = id;
    await editor.open(id);
    statusLine.textContent = `image #${id}`;
    renderList();
  }

  async function advance(): Promise<void> {
    const next = nextUnreviewed(entries, currentId);
    if (next) {
      await show(next.id);
    } else {
      banner.hidden = false;
      statusLine.textContent = "Queue empty.";
    }
  }

  document.addEventListener("keydown", (e) => {
    if (e.target instanceof HTMLInputElement) return;
    switch (e.key) {
      case "ArrowRight":
      case "j":
        void advance();
        break;
      case "ArrowLeft":
      case "k": {
        const idx = entries.findIndex((x) => x.id === currentId);
        if (idx > 0) void show(entries[idx - 1].id);
        break;
      }
      case "a":
        void editor.save("accepted").then((ok) => {
          if (ok) void advance();
        });
        break;
      case "s":
        void editor.save("corrected");
        break;
      case "x":
      case "Delete":
      case "Backspace":
        editor.deleteSelected();
        break;
      default:
        if (/^[0-9]$/.test(e.key)) editor.state.setClass(Number(e.key));
    }
  });

  window.addEventListener("beforeunload", (e) => {
    if (editor.state.dirty) e.preventDefault();
  });

  el<HTMLButtonElement>("btn-accept").onclick = () =>
    void editor.save("accepted").then((ok) => {
          if (ok) void advance();
        });
  el<HTMLButtonElement>("btn-save").onclick = () => void editor.save("corrected");
  el<HTMLButtonElement>("btn-delete").onclick = () => editor.deleteSelected();

  await refreshEntries();
  await advance();
}

window.addEventListener("DOMContentLoaded", () => void boot());
