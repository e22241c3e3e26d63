/** Per-image session history persisted in browser storage. */

import type { SessionEntry } from "./types.js";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const KEY_PREFIX = "pointqa-history:";

export class SessionHistory {
  constructor(private storage: StorageLike) {}

  load(imageId: string): SessionEntry[] {
    const raw = this.storage.getItem(KEY_PREFIX + imageId);
    if (!raw) return [];
    try {
      const entries = JSON.parse(raw) as SessionEntry[];
      return entries.sort((a, b) => a.timestamp - b.timestamp);
    } catch {
      return [];
    }
  }

  append(entry: SessionEntry): SessionEntry[] {
    const entries = this.load(entry.imageId);
    entries.push(entry);
    this.storage.setItem(KEY_PREFIX + entry.imageId, JSON.stringify(entries));
    return entries;
  }
}
