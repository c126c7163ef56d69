// Pairwise judgment matrix model for the editor. Reciprocity holds by
// construction: writing a_ij also writes a_ji = 1/a_ij, the diagonal is
// pinned to 1, and cell values are restricted to the 9-level comparison
// scale (integers 1..9 and their reciprocals).

export interface SaatyOption {
  label: string;
  value: number;
}

export const SAATY_OPTIONS: SaatyOption[] = (() => {
  const options: SaatyOption[] = [];
  for (let k = 9; k >= 2; k--) options.push({ label: String(k), value: k });
  options.push({ label: "1", value: 1 });
  for (let k = 2; k <= 9; k++) options.push({ label: `1/${k}`, value: 1 / k });
  return options;
})();

const TOL = 1e-9;

export function isSaatyValue(value: number): boolean {
  return SAATY_OPTIONS.some((o) => Math.abs(o.value - value) <= TOL);
}

export function saatyLabel(value: number): string {
  const hit = SAATY_OPTIONS.find((o) => Math.abs(o.value - value) <= TOL);
  return hit ? hit.label : String(value);
}

export class JudgmentMatrix {
  private cells: number[][];

  constructor(readonly n: number) {
    if (!Number.isInteger(n) || n < 2) {
      throw new Error(`matrix size must be an integer >= 2, got ${n}`);
    }
    this.cells = Array.from({ length: n }, () => Array(n).fill(1));
  }

  get(i: number, j: number): number {
    this.check(i, j);
    return this.cells[i]![j]!;
  }

  // Sets a_ij and its reciprocal. Editing the diagonal is rejected, as
  // is any value outside the scale.
  set(i: number, j: number, value: number): void {
    this.check(i, j);
    if (i === j) throw new Error("diagonal entries are fixed at 1");
    if (!(value > 0) || !isSaatyValue(value)) {
      throw new Error(`not a 9-level scale value: ${value}`);
    }
    this.cells[i]![j] = value;
    this.cells[j]![i] = 1 / value;
  }

  rows(): number[][] {
    return this.cells.map((row) => row.slice());
  }

  isIdentityOfOnes(): boolean {
    return this.cells.every((row) => row.every((v) => v === 1));
  }

  static fromRows(rows: number[][]): JudgmentMatrix {
    const n = rows.length;
    if (rows.some((row) => row.length !== n)) {
      throw new Error("matrix must be square");
    }
    const m = new JudgmentMatrix(n);
    for (let i = 0; i < n; i++) {
      if (Math.abs(rows[i]![i]! - 1) > TOL) {
        throw new Error(`diagonal entry [${i}][${i}] must be 1`);
      }
      for (let j = i + 1; j < n; j++) {
        const upper = rows[i]![j]!;
        const lower = rows[j]![i]!;
        if (Math.abs(upper * lower - 1) > 1e-6) {
          throw new Error(`entries [${i}][${j}] and [${j}][${i}] are not reciprocal`);
        }
        m.set(i, j, upper);
      }
    }
    return m;
  }

  private check(i: number, j: number): void {
    if (i < 0 || j < 0 || i >= this.n || j >= this.n) {
      throw new Error(`index out of range: (${i}, ${j})`);
    }
  }
}

// Verdict line for the consistency badge.
export function consistencyVerdict(report: {
  cr: number;
  pass: boolean;
  n: number;
}): { ok: boolean; text: string } {
  const cr = report.n <= 2 ? "0" : report.cr.toFixed(4);
  return report.pass
    ? { ok: true, text: `consistent (CR ${cr})` }
    : { ok: false, text: `inconsistent (CR ${cr} >= 0.1), adjust the judgments` };
}
