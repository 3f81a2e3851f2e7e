import { describe, expect, it } from "vitest";

import { mleLoss } from "../../src/loss.js";

describe("mleLoss", () => {
  it("is zero when the model is certain and right", () => {
    const dist = [
      [1, 0, 0, 0],
      [0, 1, 0, 0],
      [0, 0, 0, 1],
    ];
    expect(mleLoss(dist, [0, 1, 3])).toBe(0);
  });

  it("matches the closed form for uniform distributions", () => {
    const uniform = [0.25, 0.25, 0.25, 0.25];
    const loss = mleLoss([uniform, uniform, uniform], [0, 2, 3]);
    expect(loss).toBeCloseTo(3 * Math.log(4), 6);
  });

  it("is zero on an empty target", () => {
    expect(mleLoss([], [])).toBe(0);
  });

  it("stays finite at zero probability via the floor", () => {
    const loss = mleLoss([[0, 1]], [0]);
    expect(Number.isFinite(loss)).toBe(true);
    expect(loss).toBeCloseTo(-Math.log(1e-9), 6);
  });

  it("is never negative", () => {
    for (let trial = 0; trial < 50; trial++) {
      const raw = Array.from({ length: 5 }, () => Math.random());
      const sum = raw.reduce((a, b) => a + b, 0);
      const dist = raw.map((x) => x / sum);
      expect(mleLoss([dist], [trial % 5])).toBeGreaterThanOrEqual(0);
    }
  });

  it("rejects distributions that do not sum to one", () => {
    expect(() => mleLoss([[0.5, 0.4]], [0])).toThrow(/sums to/);
  });

  it("rejects mismatched lengths", () => {
    expect(() => mleLoss([[1, 0]], [0, 1])).toThrow(/one distribution per/);
  });
});
