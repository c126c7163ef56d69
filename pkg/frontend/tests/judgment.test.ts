import { describe, expect, it } from "vitest";

import {
  JudgmentMatrix,
  SAATY_OPTIONS,
  consistencyVerdict,
  isSaatyValue,
  saatyLabel,
} from "../src/judgment.js";

describe("saaty scale", () => {
  it("covers 1..9 and reciprocals once each", () => {
    expect(SAATY_OPTIONS).toHaveLength(17);
    const labels = SAATY_OPTIONS.map((o) => o.label);
    expect(labels[0]).toBe("9");
    expect(labels[8]).toBe("1");
    expect(labels[16]).toBe("1/9");
    expect(new Set(labels).size).toBe(17);
  });

  it("accepts members and rejects everything else", () => {
    expect(isSaatyValue(7)).toBe(true);
    expect(isSaatyValue(1 / 7)).toBe(true);
    expect(isSaatyValue(2.5)).toBe(false);
    expect(isSaatyValue(0)).toBe(false);
    expect(isSaatyValue(-3)).toBe(false);
  });

  it("labels reciprocals as fractions", () => {
    expect(saatyLabel(1 / 4)).toBe("1/4");
    expect(saatyLabel(5)).toBe("5");
  });
});

describe("judgment matrix", () => {
  it("starts as all ones", () => {
    const m = new JudgmentMatrix(3);
    expect(m.rows()).toEqual([
      [1, 1, 1],
      [1, 1, 1],
      [1, 1, 1],
    ]);
    expect(m.isIdentityOfOnes()).toBe(true);
  });

  it("keeps reciprocity by construction", () => {
    const m = new JudgmentMatrix(3);
    m.set(0, 1, 3);
    m.set(1, 2, 1 / 5);
    expect(m.get(1, 0)).toBeCloseTo(1 / 3, 12);
    expect(m.get(2, 1)).toBeCloseTo(5, 12);
    expect(m.isIdentityOfOnes()).toBe(false);
  });

  it("rejects diagonal edits and off-scale values", () => {
    const m = new JudgmentMatrix(3);
    expect(() => m.set(1, 1, 3)).toThrow(/diagonal/);
    expect(() => m.set(0, 1, 2.5)).toThrow(/scale/);
    expect(() => m.set(0, 1, 0)).toThrow(/scale/);
  });

  it("round-trips through rows()", () => {
    const m = new JudgmentMatrix(4);
    m.set(0, 1, 2);
    m.set(0, 3, 9);
    m.set(2, 3, 1 / 2);
    const back = JudgmentMatrix.fromRows(m.rows());
    expect(back.rows()).toEqual(m.rows());
  });

  it("rejects non-reciprocal and non-square input", () => {
    expect(() =>
      JudgmentMatrix.fromRows([
        [1, 3],
        [3, 1],
      ]),
    ).toThrow(/reciprocal/);
    expect(() => JudgmentMatrix.fromRows([[1, 2]])).toThrow(/square/);
    expect(() =>
      JudgmentMatrix.fromRows([
        [2, 1],
        [1, 2],
      ]),
    ).toThrow(/diagonal/);
  });

  it("rows() returns copies, not live references", () => {
    const m = new JudgmentMatrix(3);
    const rows = m.rows();
    rows[0]![1] = 99;
    expect(m.get(0, 1)).toBe(1);
  });
});

describe("consistency verdict", () => {
  it("summarizes a pass", () => {
    const verdict = consistencyVerdict({ cr: 0.0048, pass: true, n: 3 });
    expect(verdict.ok).toBe(true);
    expect(verdict.text).toContain("CR 0.0048");
  });

  it("summarizes a failure with guidance", () => {
    const verdict = consistencyVerdict({ cr: 0.52, pass: false, n: 4 });
    expect(verdict.ok).toBe(false);
    expect(verdict.text).toMatch(/adjust/);
  });
});
