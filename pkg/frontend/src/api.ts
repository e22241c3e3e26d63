/** Thin typed client for the inference service. */

import type { AnswerResponse, ImageDetail, ImageListPage } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (...args) => globalThis.fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = `HTTP ${response.status}`;
      try {
        const body = await response.json();
        detail = body?.detail?.error ?? body?.error ?? detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listImages(page: number, size: number): Promise<ImageListPage> {
    return this.request(`/v1/images?page=${page}&size=${size}`);
  }

  getImage(imageId: string): Promise<ImageDetail> {
    return this.request(`/v1/images/${encodeURIComponent(imageId)}`);
  }

  ask(
    imageId: string,
    point: { x: number; y: number },
    question: string,
    signal?: AbortSignal,
  ): Promise<AnswerResponse> {
    return this.request("/v1/answer", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ image_id: imageId, point, question }),
      signal,
    });
  }
}
