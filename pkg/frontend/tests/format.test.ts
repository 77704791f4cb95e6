import { readFileSync } from "fs";
import { describe, expect, it } from "vitest";

import { formatLabelText } from "../src/format.js";
import type { Box } from "../src/types.js";

describe("canonical label text", () => {
  it("is byte-identical to the backend writer for the frozen fixture", () => {
    // fixture pair generated by the backend's own label writer
    const boxes = JSON.parse(
      readFileSync("tests/fixtures/labels_boxes.json", "utf-8"),
    ) as Box[];
    const expected = readFileSync("tests/fixtures/labels_expected.txt", "utf-8");
    expect(formatLabelText(boxes)).toBe(expected);
  });

  it("yields an empty file for zero boxes (background image)", () => {
    expect(formatLabelText([])).toBe("");
  });

  it("clamps stray coordinates into [0, 1]", () => {
    const text = formatLabelText([{ class_id: 0, cx: 1.2, cy: -0.1, w: 0.5, h: 0.5 }]);
    expect(text).toBe("0 1.000000 0.000000 0.500000 0.500000\n");
  });
});
