/**
 * Attention overlay: semi-transparent boxes whose opacity tracks the
 * attention weight (floored so even faint boxes stay visible).
 */

import type { AttentionBox } from "./types.js";
import type { ViewTransform } from "./coords.js";

export const OPACITY_FLOOR = 0.08;

export function boxOpacity(weight: number, maxWeight: number): number {
  if (maxWeight <= 0) return OPACITY_FLOOR;
  return Math.max(OPACITY_FLOOR, weight / maxWeight);
}

/** Minimal slice of CanvasRenderingContext2D the overlay needs; tests
 * substitute a recorder. */
export interface RectDrawer {
  save(): void;
  restore(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  globalAlpha: number;
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
}

export function drawAttention(
  ctx: RectDrawer,
  view: ViewTransform,
  boxes: AttentionBox[],
  color: string,
): void {
  if (boxes.length === 0) return;
  const maxWeight = Math.max(...boxes.map((b) => b.weight));
  ctx.save();
  for (const entry of boxes) {
    const { box, weight } = entry;
    const x = view.offsetX + box.x * view.scale;
    const y = view.offsetY + box.y * view.scale;
    const w = box.w * view.scale;
    const h = box.h * view.scale;
    ctx.globalAlpha = boxOpacity(weight, maxWeight);
    ctx.fillStyle = color;
    ctx.fillRect(x, y, w, h);
    ctx.globalAlpha = 1;
    ctx.strokeStyle = color;
    ctx.lineWidth = 1;
    ctx.strokeRect(x, y, w, h);
  }
  ctx.restore();
}
