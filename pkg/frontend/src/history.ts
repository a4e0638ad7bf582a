/** Navigable request history, newest last, capped at 10 entries. */

export const HISTORY_CAPACITY = 10;

export class History<T> {
  private entries: T[] = [];
  private cursor = -1;

  /** Record a new entry; anything forward of the cursor is discarded. */
  push(entry: T): void {
    this.entries = this.entries.slice(0, this.cursor + 1);
    this.entries.push(entry);
    if (this.entries.length > HISTORY_CAPACITY) {
      this.entries.shift();
    }
    this.cursor = this.entries.length - 1;
  }

  current(): T | null {
    return this.cursor >= 0 ? this.entries[this.cursor]! : null;
  }

  canBack(): boolean {
    return this.cursor > 0;
  }

  canForward(): boolean {
    return this.cursor < this.entries.length - 1;
  }

  back(): T | null {
    if (!this.canBack()) return null;
    this.cursor -= 1;
    return this.entries[this.cursor]!;
  }

  forward(): T | null {
    if (!this.canForward()) return null;
    this.cursor += 1;
    return this.entries[this.cursor]!;
  }

  size(): number {
    return this.entries.length;
  }

  list(): readonly T[] {
    return this.entries;
  }
}
