import { describe, expect, it } from "vitest";

import { displayToImage, imageToDisplay, viewTransform } from "../src/coords.js";

describe("coordinate mapping", () => {
  it("maps a 2x-downscaled click to the source pixel", () => {
    const view = viewTransform(640, 480, 320, 240);
    expect(view.scale).toBe(0.5);
    expect(displayToImage(view, 100, 60)).toEqual({ x: 200, y: 120 });
  });

  it("rejects letterbox clicks", () => {
    // 640x480 image centered in a 320x300 canvas: 30px bars top and bottom
    const view = viewTransform(640, 480, 320, 300);
    expect(view.offsetY).toBe(30);
    expect(displayToImage(view, 100, 10)).toBeNull();
    expect(displayToImage(view, 100, 295)).toBeNull();
    expect(displayToImage(view, 100, 60)).not.toBeNull();
  });

  it("rejects clicks past the right/bottom image edge", () => {
    const view = viewTransform(100, 100, 200, 200);
    expect(displayToImage(view, 200, 50)).toBeNull();
    expect(displayToImage(view, 199.9, 50)).toEqual({ x: 99, y: 25 });
  });

  it("round trips within one display pixel across scales", () => {
    const cases: [number, number, number, number][] = [
      [640, 480, 320, 240], // 0.5x
      [640, 480, 160, 120], // 0.25x
      [640, 480, 640, 480], // 1x
      [320, 240, 640, 480], // 2x
      [500, 300, 410, 410], // letterboxed, non-integer scale
    ];
    let checked = 0;
    for (const [iw, ih, cw, ch] of cases) {
      const view = viewTransform(iw, ih, cw, ch);
      for (let trial = 0; trial < 200; trial++) {
        const clickX = view.offsetX + Math.random() * iw * view.scale;
        const clickY = view.offsetY + Math.random() * ih * view.scale;
        const point = displayToImage(view, clickX, clickY);
        expect(point).not.toBeNull();
        const back = imageToDisplay(view, point!.x, point!.y);
        expect(Math.abs(back.x - clickX)).toBeLessThanOrEqual(1);
        expect(Math.abs(back.y - clickY)).toBeLessThanOrEqual(1);
        checked++;
      }
    }
    expect(checked).toBe(1000);
  });

  it("never produces out-of-bounds points", () => {
    const view = viewTransform(37, 53, 400, 300);
    for (let trial = 0; trial < 500; trial++) {
      const point = displayToImage(view, Math.random() * 400, Math.random() * 300);
      if (point !== null) {
        expect(point.x).toBeGreaterThanOrEqual(0);
        expect(point.y).toBeGreaterThanOrEqual(0);
        expect(point.x).toBeLessThan(37);
        expect(point.y).toBeLessThan(53);
      }
    }
  });
});
