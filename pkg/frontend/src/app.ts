/**
 * Pointing session controller: converts canvas clicks to image pixels,
 * sends the question, and hands results to the view layer.  A new click
 * cancels any in-flight request.
 */

import { ApiClient, ApiError } from "./api.js";
import { displayToImage, ViewTransform, viewTransform } from "./coords.js";
import { SessionHistory } from "./history.js";
import type { AnswerResponse, SessionEntry } from "./types.js";

export interface AppView {
  renderAnswer(entry: SessionEntry): void;
  renderHistory(entries: SessionEntry[]): void;
  renderError(message: string): void;
  renderMarker(displayX: number, displayY: number): void;
}

export class PointingApp {
  private view: ViewTransform | null = null;
  private imageId: string | null = null;
  private inflight: AbortController | null = null;
  question = "";

  constructor(
    private api: ApiClient,
    private history: SessionHistory,
    private ui: AppView,
    private now: () => number = () => Date.now(),
  ) {}

  loadImageView(
    imageId: string,
    imageWidth: number,
    imageHeight: number,
    canvasWidth: number,
    canvasHeight: number,
  ): ViewTransform {
    this.imageId = imageId;
    this.view = viewTransform(imageWidth, imageHeight, canvasWidth, canvasHeight);
    this.ui.renderHistory(this.history.load(imageId));
    return this.view;
  }

  get currentView(): ViewTransform | null {
    return this.view;
  }

  /**
   * Handle a click at canvas coordinates.  Returns the image point when a
   * request was issued, null when the click was ignored (letterbox margin,
   * no image, or empty question).
   */
  async handleClick(clickX: number, clickY: number): Promise<{ x: number; y: number } | null> {
    if (!this.view || !this.imageId) return null;
    if (!this.question.trim()) {
      this.ui.renderError("Type a question before pointing.");
      return null;
    }
    const point = displayToImage(this.view, clickX, clickY);
    if (point === null) return null;

    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    this.ui.renderMarker(clickX, clickY);

    let response: AnswerResponse;
    try {
      response = await this.api.ask(this.imageId, point, this.question, controller.signal);
    } catch (err) {
      if (controller.signal.aborted) return point;
      if (err instanceof ApiError) {
        this.ui.renderError(`Service rejected the request: ${err.message}`);
      } else {
        this.ui.renderError("Service unreachable.");
      }
      return point;
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }

    const entry: SessionEntry = {
      imageId: this.imageId,
      click: point,
      question: this.question,
      answer: response.answer,
      scores: response.scores,
      attention: response.attention,
      timestamp: this.now(),
    };
    const entries = this.history.append(entry);
    this.ui.renderAnswer(entry);
    this.ui.renderHistory(entries);
    return point;
  }
}
