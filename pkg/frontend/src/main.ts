/** DOM bootstrap: ties the canvas, question box, overlay toggles, and
 * history list to the session controller. */

import { ApiClient } from "./api.js";
import { PointingApp } from "./app.js";
import { ImageBrowser } from "./browser.js";
import { imageToDisplay, ViewTransform } from "./coords.js";
import { SessionHistory } from "./history.js";
import { drawAttention } from "./overlay.js";
import type { ImageDetail, SessionEntry } from "./types.js";

function baseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return (
    params.get("service") ??
    (window as unknown as { POINTQA_BASE_URL?: string }).POINTQA_BASE_URL ??
    "http://127.0.0.1:8080"
  );
}

const api = new ApiClient(baseUrl());
const history = new SessionHistory(window.localStorage);

const canvas = document.getElementById("canvas") as HTMLCanvasElement;
const ctx = canvas.getContext("2d");
const questionInput = document.getElementById("question") as HTMLInputElement;
const answerBox = document.getElementById("answer") as HTMLElement;
const errorBanner = document.getElementById("error") as HTMLElement;
const historyList = document.getElementById("history") as HTMLElement;
const grid = document.getElementById("grid") as HTMLElement;
const pageLabel = document.getElementById("page-label") as HTMLElement;
const showLocal = document.getElementById("show-local") as HTMLInputElement;
const showGlobal = document.getElementById("show-global") as HTMLInputElement;

let currentImage: ImageDetail | null = null;
let currentBitmap: HTMLImageElement | null = null;
let lastEntry: SessionEntry | null = null;
let lastMarker: { x: number; y: number } | null = null;

function redraw(view: ViewTransform | null): void {
  if (!ctx || !view) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (currentBitmap) {
    ctx.drawImage(
      currentBitmap,
      view.offsetX,
      view.offsetY,
      view.imageWidth * view.scale,
      view.imageHeight * view.scale,
    );
  }
  if (lastEntry) {
    if (showGlobal.checked && lastEntry.attention.global) {
      drawAttention(ctx, view, lastEntry.attention.global, "#2b6cb0");
    }
    if (showLocal.checked && lastEntry.attention.local) {
      drawAttention(ctx, view, lastEntry.attention.local, "#c53030");
    }
  }
  if (lastMarker) {
    ctx.save();
    ctx.fillStyle = "#e53e3e";
    ctx.beginPath();
    ctx.arc(lastMarker.x, lastMarker.y, 5, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = "white";
    ctx.lineWidth = 2;
    ctx.stroke();
    ctx.restore();
  }
}

const app = new PointingApp(api, history, {
  renderAnswer(entry) {
    lastEntry = entry;
    const scores = entry.scores
      .slice(0, 5)
      .map((s) => `<li>${s.label}: ${(s.prob * 100).toFixed(1)}%</li>`)
      .join("");
    answerBox.innerHTML = `<strong>${entry.answer}</strong><ul>${scores}</ul>`;
    redraw(app.currentView);
  },
  renderHistory(entries) {
    historyList.innerHTML = entries
      .slice()
      .reverse()
      .map(
        (e) =>
          `<li>(${e.click.x}, ${e.click.y}) ${e.question} &rarr; <strong>${e.answer}</strong></li>`,
      )
      .join("");
  },
  renderError(message) {
    errorBanner.textContent = message;
    errorBanner.hidden = false;
    window.setTimeout(() => (errorBanner.hidden = true), 4000);
  },
  renderMarker(x, y) {
    lastMarker = { x, y };
    lastEntry = null;
    redraw(app.currentView);
  },
});

const browser = new ImageBrowser(api, {
  renderPage(listing) {
    pageLabel.textContent = `page ${listing.page} / ${listing.pages}`;
    grid.innerHTML = "";
    for (const image of listing.images) {
      const tile = document.createElement("button");
      tile.className = "tile";
      tile.textContent = `${image.image_id} (${image.width}×${image.height})`;
      tile.addEventListener("click", () => selectImage(image.image_id));
      grid.appendChild(tile);
    }
  },
  renderError(message) {
    errorBanner.textContent = message;
    errorBanner.hidden = false;
    const retry = document.createElement("button");
    retry.textContent = "retry";
    retry.addEventListener("click", () => {
      errorBanner.hidden = true;
      void browser.load();
    });
    errorBanner.appendChild(retry);
  },
});

async function selectImage(imageId: string): Promise<void> {
  const detail = await api.getImage(imageId);
  currentImage = detail;
  lastEntry = null;
  lastMarker = null;
  const view = app.loadImageView(imageId, detail.width, detail.height, canvas.width, canvas.height);
  if (detail.png_base64 || detail.image_uri) {
    const img = new Image();
    img.onload = () => {
      currentBitmap = img;
      redraw(view);
    };
    img.src = detail.png_base64
      ? `data:image/png;base64,${detail.png_base64}`
      : detail.image_uri!;
  }
  redraw(view);
}

canvas.addEventListener("click", (event) => {
  const rect = canvas.getBoundingClientRect();
  const x = ((event.clientX - rect.left) / rect.width) * canvas.width;
  const y = ((event.clientY - rect.top) / rect.height) * canvas.height;
  void app.handleClick(x, y);
});

questionInput.addEventListener("input", () => {
  app.question = questionInput.value;
});
showLocal.addEventListener("change", () => redraw(app.currentView));
showGlobal.addEventListener("change", () => redraw(app.currentView));

document.getElementById("prev")!.addEventListener("click", () => void browser.previous());
document.getElementById("next")!.addEventListener("click", () => void browser.next());

void browser.load();

export { app, browser, selectImage, imageToDisplay, currentImage };
