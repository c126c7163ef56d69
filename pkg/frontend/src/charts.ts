// Hand-rolled SVG line charts. Pure string builders with no DOM access,
// so geometry is unit-testable and output is deterministic. Rank charts
// invert the y axis (rank 1 on top); score charts scale parsed copies of
// the decimal strings but tooltips keep the original text.

export interface ChartSeries {
  name: string;
  values: (number | null)[];
  labels?: (string | null)[];
}

export interface ChartOptions {
  dates: string[];
  series: ChartSeries[];
  invertY?: boolean;
  integerTicks?: boolean;
  width?: number;
  height?: number;
}

export const PALETTE = [
  "#4c9be8",
  "#e8884c",
  "#5fba7d",
  "#c75fba",
  "#baa75f",
  "#5f9eba",
  "#e85c6e",
  "#8a7de8",
];

export function seriesColor(index: number): string {
  return PALETTE[index % PALETTE.length]!;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

interface Frame {
  x: (i: number) => number;
  y: (v: number) => number;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

function frame(opts: Required<Pick<ChartOptions, "width" | "height">> & {
  count: number;
  lo: number;
  hi: number;
  invertY: boolean;
}): Frame {
  const left = 46;
  const right = opts.width - 14;
  const top = 12;
  const bottom = opts.height - 26;
  const span = opts.hi - opts.lo || 1;
  const x = (i: number) =>
    opts.count <= 1 ? (left + right) / 2 : left + (i * (right - left)) / (opts.count - 1);
  const y = (v: number) => {
    const t = (v - opts.lo) / span;
    const u = opts.invertY ? t : 1 - t;
    return top + u * (bottom - top);
  };
  return { x, y, left, right, top, bottom };
}

function round2(v: number): number {
  return Math.round(v * 100) / 100;
}

// Consecutive non-null runs become polyline segments; isolated points
// stay visible as their circles.
export function segments(values: (number | null)[]): number[][] {
  const runs: number[][] = [];
  let current: number[] = [];
  values.forEach((v, i) => {
    if (v === null) {
      if (current.length > 1) runs.push(current);
      current = [];
    } else {
      current.push(i);
    }
  });
  if (current.length > 1) runs.push(current);
  return runs;
}

export function renderLineChart(opts: ChartOptions): string {
  const width = opts.width ?? 760;
  const height = opts.height ?? 300;
  const invertY = opts.invertY ?? false;
  const all: number[] = [];
  for (const s of opts.series) for (const v of s.values) if (v !== null) all.push(v);
  if (all.length === 0) {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
      `class="chart"><text x="${width / 2}" y="${height / 2}" ` +
      `text-anchor="middle" class="chart-empty">no data</text></svg>`
    );
  }
  let lo = Math.min(...all);
  let hi = Math.max(...all);
  if (opts.integerTicks) {
    lo = Math.min(lo, 1);
    hi = Math.max(hi, 2);
  } else if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const f = frame({ width, height, count: opts.dates.length, lo, hi, invertY });
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" class="chart">`,
  ];

  const ticks: number[] = [];
  if (opts.integerTicks) {
    for (let t = Math.ceil(lo); t <= hi; t++) ticks.push(t);
  } else {
    for (let k = 0; k <= 4; k++) ticks.push(lo + ((hi - lo) * k) / 4);
  }
  for (const t of ticks) {
    const y = round2(f.y(t));
    const label = opts.integerTicks ? String(t) : Number(t.toPrecision(3)).toString();
    parts.push(
      `<line x1="${f.left}" y1="${y}" x2="${f.right}" y2="${y}" class="grid"/>`,
      `<text x="${f.left - 6}" y="${y + 4}" text-anchor="end" class="tick">${label}</text>`,
    );
  }

  const step = Math.max(1, Math.ceil(opts.dates.length / 8));
  opts.dates.forEach((d, i) => {
    if (i % step !== 0 && i !== opts.dates.length - 1) return;
    parts.push(
      `<text x="${round2(f.x(i))}" y="${height - 8}" text-anchor="middle" class="tick">` +
        `${escapeXml(d)}</text>`,
    );
  });

  opts.series.forEach((s, si) => {
    const color = seriesColor(si);
    for (const run of segments(s.values)) {
      const points = run
        .map((i) => `${round2(f.x(i))},${round2(f.y(s.values[i] as number))}`)
        .join(" ");
      parts.push(`<polyline fill="none" stroke="${color}" points="${points}"/>`);
    }
    s.values.forEach((v, i) => {
      if (v === null) return;
      const label = s.labels?.[i] ?? String(v);
      parts.push(
        `<circle cx="${round2(f.x(i))}" cy="${round2(f.y(v))}" r="3" fill="${color}">` +
          `<title>${escapeXml(`${s.name} ${opts.dates[i] ?? ""}: ${label}`)}</title></circle>`,
      );
    });
  });

  parts.push("</svg>");
  return parts.join("");
}

export function rankChart(
  dates: string[],
  ranks: Record<string, (number | null)[]>,
  protocols: string[],
): string {
  return renderLineChart({
    dates,
    series: protocols.map((p) => ({ name: p, values: ranks[p] ?? [] })),
    invertY: true,
    integerTicks: true,
  });
}

export function scoreChart(
  dates: string[],
  scores: Record<string, (string | null)[]>,
  protocols: string[],
): string {
  return renderLineChart({
    dates,
    series: protocols.map((p) => {
      const raw = scores[p] ?? [];
      return {
        name: p,
        values: raw.map((v) => (v === null ? null : Number(v))),
        labels: raw,
      };
    }),
  });
}
