import { describe, expect, it } from "vitest";

import { rankChart, renderLineChart, scoreChart, segments } from "../src/charts.js";

function circleCys(svg: string): number[] {
  return [...svg.matchAll(/<circle[^>]*cy="([-0-9.]+)"/g)].map((m) => Number(m[1]));
}

describe("segments", () => {
  it("splits runs at nulls and drops isolated points", () => {
    expect(segments([1, 2, null, 3, 4, 5])).toEqual([
      [0, 1],
      [3, 4, 5],
    ]);
    expect(segments([null, 7, null])).toEqual([]);
    expect(segments([1, 2])).toEqual([[0, 1]]);
  });
});

describe("rank chart", () => {
  it("puts rank 1 above rank 2", () => {
    const svg = rankChart(
      ["2021-05-17", "2021-05-24"],
      { A: [1, 1], B: [2, 2] },
      ["A", "B"],
    );
    const cys = circleCys(svg);
    expect(cys).toHaveLength(4);
    const [a1, , b1] = cys;
    expect(a1!).toBeLessThan(b1!);
  });

  it("keeps a protocol with a gap visible as points", () => {
    const svg = rankChart(
      ["d1", "d2", "d3"],
      { A: [1, null, 1], B: [2, 1, 2] },
      ["A", "B"],
    );
    // A's isolated points draw no line segments, but stay visible
    expect(circleCys(svg)).toHaveLength(5);
    const polylines = [...svg.matchAll(/<polyline/g)];
    expect(polylines).toHaveLength(1); // only B has a continuous run
  });

  it("labels integer ticks only", () => {
    const svg = rankChart(["d1"], { A: [1], B: [2], C: [3] }, ["A", "B", "C"]);
    const ticks = [...svg.matchAll(/class="tick">([^<]+)</g)].map((m) => m[1]);
    expect(ticks).toContain("1");
    expect(ticks).toContain("3");
    expect(ticks.every((t) => t === "d1" || Number.isInteger(Number(t)))).toBe(true);
  });
});

describe("score chart", () => {
  it("keeps the verbatim decimal strings in tooltips", () => {
    const exact = "0.5954631661272765";
    const svg = scoreChart(
      ["2021-05-17"],
      { A: [exact], B: ["0.40453683387272346"] },
      ["A", "B"],
    );
    expect(svg).toContain(`A 2021-05-17: ${exact}`);
  });

  it("treats missing scores as gaps", () => {
    const svg = scoreChart(
      ["d1", "d2"],
      { A: ["0.5", "0.6"], G: [null, "0.1"] },
      ["A", "G"],
    );
    expect(circleCys(svg)).toHaveLength(3);
  });

  it("renders an empty note when nothing has data", () => {
    const svg = renderLineChart({ dates: ["d1"], series: [{ name: "A", values: [null] }] });
    expect(svg).toContain("no data");
  });

  it("escapes markup in names and labels", () => {
    const svg = scoreChart(["d1"], { "<X&Y>": ["0.5"] }, ["<X&Y>"]);
    expect(svg).not.toContain("<X&Y>");
    expect(svg).toContain("&lt;X&amp;Y&gt;");
  });
});
