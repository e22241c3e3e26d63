import { describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { ImageBrowser } from "../src/browser.js";
import type { ImageListPage } from "../src/types.js";

function page(n: number, pages: number): ImageListPage {
  return {
    images: [{ image_id: `img${n}`, width: 10, height: 10, thumbnail_uri: null }],
    page: n,
    pages,
    total: pages,
  };
}

describe("image browser", () => {
  it("pages forward and backward within bounds", async () => {
    const fetchImpl = vi.fn(async (url: string) => {
      const requested = Number(new URL(url).searchParams.get("page"));
      return new Response(JSON.stringify(page(requested, 3)), { status: 200 });
    });
    const rendered: number[] = [];
    const browser = new ImageBrowser(new ApiClient("http://svc", fetchImpl), {
      renderPage: (p) => rendered.push(p.page),
      renderError: () => {},
    });
    await browser.load();
    await browser.next();
    await browser.next();
    await browser.next(); // clamped at the last page
    await browser.previous();
    expect(rendered).toEqual([1, 2, 3, 3, 2]);
  });

  it("shows an error banner when the service is unreachable", async () => {
    const fetchImpl = vi.fn(async () => {
      throw new TypeError("network down");
    });
    const errors: string[] = [];
    const browser = new ImageBrowser(new ApiClient("http://svc", fetchImpl), {
      renderPage: () => {
        throw new Error("should not render");
      },
      renderError: (m) => errors.push(m),
    });
    await browser.load();
    expect(errors).toHaveLength(1);
    expect(errors[0]).toMatch(/service/i);
  });
});
