import { describe, expect, it } from "vitest";

import { HISTORY_CAPACITY, History } from "../src/history.js";

describe("History", () => {
  it("starts empty", () => {
    const h = new History<number>();
    expect(h.size()).toBe(0);
    expect(h.current()).toBeNull();
    expect(h.canBack()).toBe(false);
    expect(h.canForward()).toBe(false);
  });

  it("tracks the newest entry as current", () => {
    const h = new History<number>();
    h.push(1);
    h.push(2);
    expect(h.current()).toBe(2);
    expect(h.size()).toBe(2);
  });

  it("walks back and forward over entries", () => {
    const h = new History<number>();
    h.push(1);
    h.push(2);
    h.push(3);
    expect(h.back()).toBe(2);
    expect(h.back()).toBe(1);
    expect(h.back()).toBeNull();
    expect(h.forward()).toBe(2);
    expect(h.forward()).toBe(3);
    expect(h.forward()).toBeNull();
  });

  it("discards forward entries when pushing after back", () => {
    const h = new History<number>();
    h.push(1);
    h.push(2);
    h.push(3);
    h.back();
    h.back();
    h.push(9);
    expect(h.list()).toEqual([1, 9]);
    expect(h.current()).toBe(9);
    expect(h.canForward()).toBe(false);
  });

  it("caps at ten entries, dropping the oldest", () => {
    const h = new History<number>();
    for (let i = 0; i < 15; i++) h.push(i);
    expect(h.size()).toBe(HISTORY_CAPACITY);
    expect(h.list()).toEqual([5, 6, 7, 8, 9, 10, 11, 12, 13, 14]);
    expect(h.current()).toBe(14);
  });

  it("can still walk the full window after overflow", () => {
    const h = new History<number>();
    for (let i = 0; i < 12; i++) h.push(i);
    let steps = 0;
    while (h.canBack()) {
      h.back();
      steps++;
    }
    expect(steps).toBe(HISTORY_CAPACITY - 1);
    expect(h.current()).toBe(2);
  });
});
