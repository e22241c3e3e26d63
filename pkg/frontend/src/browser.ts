/** Paginated image grid backed by GET /v1/images. */

import { ApiClient } from "./api.js";
import type { ImageListPage } from "./types.js";

export interface BrowserView {
  renderPage(page: ImageListPage): void;
  renderError(message: string): void;
}

export class ImageBrowser {
  page = 1;
  pages = 1;

  constructor(
    private api: ApiClient,
    private ui: BrowserView,
    private pageSize = 12,
  ) {}

  async load(page = this.page): Promise<void> {
    try {
      const listing = await this.api.listImages(page, this.pageSize);
      this.page = listing.page;
      this.pages = listing.pages;
      this.ui.renderPage(listing);
    } catch {
      this.ui.renderError("Could not reach the inference service.");
    }
  }

  next(): Promise<void> {
    return this.load(Math.min(this.page + 1, this.pages));
  }

  previous(): Promise<void> {
    return this.load(Math.max(this.page - 1, 1));
  }
}
