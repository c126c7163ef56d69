import { api, ApiError } from "./api.js";
import type { ScoresResponse, WhatIfResponse, RunSummary } from "./api.js";
import { sameScores } from "./api.js";
import { rankChart, scoreChart, seriesColor } from "./charts.js";
import { JudgmentMatrix, SAATY_OPTIONS, consistencyVerdict, saatyLabel } from "./judgment.js";
import {
  CRITERIA,
  INDICATORS,
  buildPayload,
  debounce,
  emptyState,
  isUntouched,
  type WhatIfState,
} from "./whatif.js";

const $ = (id: string): HTMLElement => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
};

function el(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: (Node | string)[]
): HTMLElement {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  node.append(...children);
  return node;
}

interface ViewState {
  runs: RunSummary[];
  runId: string | null;
  granularity: string | null;
  ordinate: "rank" | "score";
  stored: ScoresResponse | null;
  whatIf: WhatIfResponse | null;
  edits: WhatIfState;
}

const state: ViewState = {
  runs: [],
  runId: null,
  granularity: null,
  ordinate: "rank",
  stored: null,
  whatIf: null,
  edits: emptyState(),
};

function showError(message: string): void {
  const banner = $("error");
  banner.textContent = message;
  banner.hidden = false;
}

function clearError(): void {
  $("error").hidden = true;
}

async function guard<T>(work: () => Promise<T>): Promise<T | null> {
  try {
    clearError();
    return await work();
  } catch (err) {
    if (err instanceof ApiError) showError(`${err.code}: ${err.message}`);
    else showError(String(err));
    return null;
  }
}

// ---------------------------------------------------------------- charts

function renderChart(): void {
  const source = state.whatIf ?? state.stored;
  if (!source) return;
  const { dates, protocols } = source;
  const svg =
    state.ordinate === "rank"
      ? rankChart(dates, source.ranks ?? {}, protocols)
      : scoreChart(dates, source.scores ?? {}, protocols);
  $("chart").innerHTML = svg;

  const legend = $("legend");
  legend.replaceChildren(
    ...protocols.map((p, i) =>
      el(
        "span",
        { class: "legend-item" },
        el("span", { class: "swatch", style: `background:${seriesColor(i)}` }),
        p,
      ),
    ),
  );

  const note = $("chart-note");
  if (state.whatIf && state.stored && sameScores(state.stored.scores, state.whatIf.scores)) {
    note.textContent = "what-if matches the stored run exactly";
    note.className = "ok";
  } else if (state.whatIf) {
    note.textContent = "showing what-if recomputation (stored run unchanged)";
    note.className = "warn";
  } else {
    note.textContent = "showing stored run";
    note.className = "";
  }
}

function renderDetails(): void {
  const stored = state.stored;
  const table = $("latest");
  table.replaceChildren();
  if (!stored || stored.dates.length === 0) return;
  const last = stored.dates.length - 1;
  const source = state.whatIf ?? stored;
  const header = el(
    "tr",
    {},
    el("th", {}, "protocol"),
    el("th", {}, "rank"),
    el("th", {}, "score"),
    el("th", {}, "flags"),
  );
  const rows = stored.protocols.map((p) => {
    const rank = source.ranks?.[p]?.[last];
    const score = source.scores?.[p]?.[last];
    const flags = stored.flags[p]?.[last] ?? [];
    return el(
      "tr",
      {},
      el("td", {}, p),
      el("td", {}, rank === null || rank === undefined ? "-" : String(rank)),
      el("td", { class: "mono" }, score ?? "-"),
      el("td", { class: "flags" }, flags.join(", ")),
    );
  });
  table.replaceChildren(header, ...rows);
  $("latest-date").textContent = `as of ${stored.dates[last]}`;
}

// ------------------------------------------------------------- judgments

let criteriaMatrix = new JudgmentMatrix(CRITERIA.length);

const liveConsistency = debounce(async () => {
  const badge = $("criteria-consistency");
  const result = await guard(() => api.consistency(criteriaMatrix.rows()));
  if (!result) return;
  const verdict = consistencyVerdict(result);
  badge.textContent = verdict.text;
  badge.className = verdict.ok ? "badge ok" : "badge fail";
}, 200);

function renderJudgmentEditor(): void {
  const grid = $("criteria-judgment");
  grid.replaceChildren();
  const names = CRITERIA.map((c) => c.replace("_", " "));
  grid.append(el("span", { class: "cell head" }));
  names.forEach((name) => grid.append(el("span", { class: "cell head" }, name)));
  for (let i = 0; i < criteriaMatrix.n; i++) {
    grid.append(el("span", { class: "cell head" }, names[i] ?? ""));
    for (let j = 0; j < criteriaMatrix.n; j++) {
      if (i === j) {
        grid.append(el("span", { class: "cell fixed" }, "1"));
      } else if (i > j) {
        grid.append(
          el("span", { class: "cell mirror" }, saatyLabel(criteriaMatrix.get(i, j))),
        );
      } else {
        const select = el("select", { class: "cell" }) as HTMLSelectElement;
        for (const option of SAATY_OPTIONS) {
          const node = el("option", { value: String(option.value) }, option.label);
          if (Math.abs(option.value - criteriaMatrix.get(i, j)) < 1e-9) {
            node.setAttribute("selected", "");
          }
          select.append(node);
        }
        select.addEventListener("change", () => {
          criteriaMatrix.set(i, j, Number(select.value));
          state.edits.criteriaJudgment = criteriaMatrix;
          state.edits.criterionWeights = null;
          renderJudgmentEditor();
          liveConsistency();
          scheduleWhatIf();
        });
        grid.append(select);
      }
    }
  }
}

// --------------------------------------------------------------- weights

function renderWeightSliders(): void {
  const box = $("criterion-weights");
  box.replaceChildren();
  for (const crit of CRITERIA) {
    const current = state.edits.criterionWeights?.[crit] ?? 1;
    const label = el("label", {}, `${crit.replace("_", " ")} `);
    const value = el("span", { class: "mono" }, current.toFixed(2));
    const slider = el("input", {
      type: "range",
      min: "0.1",
      max: "9",
      step: "0.1",
      value: String(current),
    }) as HTMLInputElement;
    slider.addEventListener("input", () => {
      const weights = state.edits.criterionWeights ?? {
        market_share: 1,
        valuation: 1,
        decentralization: 1,
      };
      weights[crit] = Number(slider.value);
      state.edits.criterionWeights = weights;
      state.edits.criteriaJudgment = null;
      state.edits.criteriaJudgmentCleared = false;
      value.textContent = Number(slider.value).toFixed(2);
      scheduleWhatIf();
    });
    box.append(el("div", { class: "slider-row" }, label, slider, value));
  }

  const indicators = $("indicator-weights");
  indicators.replaceChildren();
  for (const crit of CRITERIA) {
    const group = el("div", { class: "indicator-group" }, el("h4", {}, crit.replace("_", " ")));
    for (const code of INDICATORS[crit]) {
      const current = state.edits.indicatorWeights?.[code] ?? 1;
      const input = el("input", {
        type: "number",
        min: "0.1",
        step: "0.1",
        value: String(current),
      }) as HTMLInputElement;
      input.addEventListener("change", () => {
        const parsed = Number(input.value);
        if (!(parsed > 0)) return;
        const weights = state.edits.indicatorWeights ?? {};
        weights[code] = parsed;
        state.edits.indicatorWeights = weights;
        scheduleWhatIf();
      });
      group.append(el("label", { class: "indicator-row" }, `${code} `, input));
    }
    indicators.append(group);
  }
}

function renderDerived(): void {
  const box = $("derived-weights");
  box.replaceChildren();
  if (!state.whatIf) return;
  const { criteria } = state.whatIf.weights;
  box.append(
    el(
      "div",
      {},
      "criterion weights: ",
      el(
        "span",
        { class: "mono" },
        Object.entries(criteria)
          .map(([k, v]) => `${k}=${v}`)
          .join("  "),
      ),
    ),
  );
  const failing = Object.entries(state.whatIf.consistency).filter(([, r]) => !r.pass);
  if (failing.length > 0) {
    box.append(
      el(
        "div",
        { class: "fail" },
        `failing consistency: ${failing.map(([k, r]) => `${k} (CR ${r.cr.toFixed(3)})`).join(", ")}`,
      ),
    );
  }
  for (const warning of state.whatIf.warnings) {
    box.append(el("div", { class: "warn" }, warning));
  }
}

// ---------------------------------------------------------------- what-if

async function postWhatIf(): Promise<void> {
  if (!state.runId || !state.granularity) return;
  const payload = buildPayload(state.edits, state.granularity);
  const result = await guard(() => api.whatIf(state.runId!, payload));
  if (!result) return;
  state.whatIf = result;
  renderChart();
  renderDetails();
  renderDerived();
}

const scheduleWhatIf = debounce(() => void postWhatIf(), 300);

// ------------------------------------------------------------------ runs

async function selectRun(runId: string): Promise<void> {
  state.runId = runId;
  state.edits = emptyState();
  state.whatIf = null;
  criteriaMatrix = new JudgmentMatrix(CRITERIA.length);
  const run = state.runs.find((r) => r.run_id === runId);
  const granularities = run?.granularities ?? [];
  state.granularity = granularities[0] ?? null;

  const picker = $("granularity") as unknown as HTMLSelectElement;
  picker.replaceChildren(
    ...granularities.map((g) => el("option", { value: g }, g) as HTMLOptionElement),
  );
  picker.value = state.granularity ?? "";
  picker.hidden = granularities.length <= 1;

  await reloadStored();
  renderJudgmentEditor();
  renderWeightSliders();
  $("criteria-consistency").textContent = "";
  $("criteria-consistency").className = "badge";
  // verify the identity property against the live service on every load
  await postWhatIf();
}

async function reloadStored(): Promise<void> {
  if (!state.runId || !state.granularity) return;
  const stored = await guard(() =>
    api.scores(state.runId!, { granularity: state.granularity! }),
  );
  if (!stored) return;
  state.stored = stored;
  renderChart();
  renderDetails();
}

async function boot(): Promise<void> {
  const meta = await guard(() => api.meta());
  if (meta) $("backend").textContent = `backend: ${meta.backend}`;

  const runs = await guard(() => api.runs());
  if (!runs) return;
  state.runs = runs;
  const picker = $("run") as unknown as HTMLSelectElement;
  picker.replaceChildren(
    ...runs.map((r) => el("option", { value: r.run_id }, r.run_id) as HTMLOptionElement),
  );
  picker.addEventListener("change", () => void selectRun(picker.value));
  $("granularity").addEventListener("change", () => {
    state.granularity = ($("granularity") as unknown as HTMLSelectElement).value;
    state.whatIf = null;
    void reloadStored().then(() => void postWhatIf());
  });
  for (const radio of document.querySelectorAll<HTMLInputElement>("input[name=ordinate]")) {
    radio.addEventListener("change", () => {
      if (radio.checked) {
        state.ordinate = radio.value as "rank" | "score";
        renderChart();
        renderDetails();
      }
    });
  }
  $("reset").addEventListener("click", () => {
    if (!state.runId) return;
    void selectRun(state.runId);
  });

  if (runs.length > 0) await selectRun(runs[0]!.run_id);
  else showError("no stored runs; evaluate one first");
}

void boot();
