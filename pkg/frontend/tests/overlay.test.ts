import { describe, expect, it } from "vitest";

import { viewTransform } from "../src/coords.js";
import { boxOpacity, drawAttention, OPACITY_FLOOR, RectDrawer } from "../src/overlay.js";
import type { AttentionBox } from "../src/types.js";

class RecordingContext implements RectDrawer {
  globalAlpha = 1;
  fillStyle: string = "";
  strokeStyle: string = "";
  lineWidth = 1;
  fills: { x: number; y: number; w: number; h: number; alpha: number }[] = [];
  strokes: number = 0;

  save(): void {}
  restore(): void {}
  fillRect(x: number, y: number, w: number, h: number): void {
    this.fills.push({ x, y, w, h, alpha: this.globalAlpha });
  }
  strokeRect(): void {
    this.strokes++;
  }
}

const BOXES: AttentionBox[] = [
  { box: { x: 0, y: 0, w: 10, h: 10 }, weight: 0.6 },
  { box: { x: 20, y: 0, w: 10, h: 10 }, weight: 0.3 },
  { box: { x: 40, y: 0, w: 10, h: 10 }, weight: 0.1 },
  { box: { x: 60, y: 0, w: 10, h: 10 }, weight: 0.001 },
];

describe("attention overlay", () => {
  it("renders every returned box", () => {
    const ctx = new RecordingContext();
    drawAttention(ctx, viewTransform(100, 100, 100, 100), BOXES, "#f00");
    expect(ctx.fills).toHaveLength(BOXES.length);
    expect(ctx.strokes).toBe(BOXES.length);
  });

  it("opacity is monotone in weight with a visibility floor", () => {
    const ctx = new RecordingContext();
    drawAttention(ctx, viewTransform(100, 100, 100, 100), BOXES, "#f00");
    const alphas = ctx.fills.map((f) => f.alpha);
    for (let i = 1; i < alphas.length; i++) {
      expect(alphas[i]).toBeLessThanOrEqual(alphas[i - 1]);
    }
    expect(alphas[0]).toBe(1); // max weight box at full opacity
    expect(alphas[alphas.length - 1]).toBe(OPACITY_FLOOR);
    expect(boxOpacity(0.5, 0.5)).toBe(1);
    expect(boxOpacity(0, 0.5)).toBe(OPACITY_FLOOR);
  });

  it("scales boxes into display coordinates", () => {
    const ctx = new RecordingContext();
    const view = viewTransform(200, 200, 100, 100); // 0.5x
    drawAttention(ctx, view, [BOXES[0]], "#f00");
    expect(ctx.fills[0]).toMatchObject({ x: 0, y: 0, w: 5, h: 5 });
  });
});
