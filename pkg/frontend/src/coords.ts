/**
 * Display <-> image coordinate mapping for a letterboxed canvas.
 *
 * The image is drawn at scale s = min(cw/iw, ch/ih), centered; clicks on
 * the letterbox margins map to null and must never produce a request.
 * Image points are integer pixel indices, so the display round trip is
 * exact to within one display pixel for scales up to 2x.
 */

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
  imageWidth: number;
  imageHeight: number;
}

export function viewTransform(
  imageWidth: number,
  imageHeight: number,
  canvasWidth: number,
  canvasHeight: number,
): ViewTransform {
  const scale = Math.min(canvasWidth / imageWidth, canvasHeight / imageHeight);
  return {
    scale,
    offsetX: (canvasWidth - imageWidth * scale) / 2,
    offsetY: (canvasHeight - imageHeight * scale) / 2,
    imageWidth,
    imageHeight,
  };
}

/** Map a canvas click to integer image pixel coordinates, or null when
 * the click lands on the letterbox margin. */
export function displayToImage(
  view: ViewTransform,
  clickX: number,
  clickY: number,
): { x: number; y: number } | null {
  const x = Math.floor((clickX - view.offsetX) / view.scale);
  const y = Math.floor((clickY - view.offsetY) / view.scale);
  if (x < 0 || y < 0 || x >= view.imageWidth || y >= view.imageHeight) {
    return null;
  }
  return { x, y };
}

/** Center of an image pixel in display coordinates. */
export function imageToDisplay(
  view: ViewTransform,
  x: number,
  y: number,
): { x: number; y: number } {
  return {
    x: view.offsetX + (x + 0.5) * view.scale,
    y: view.offsetY + (y + 0.5) * view.scale,
  };
}
