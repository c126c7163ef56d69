// What-if editor state and its request payload. Only mechanisms the
// user has touched are sent; the server clears the competing mechanism
// at the same level, so an untouched editor produces an empty payload
// and the response must equal the stored run string for string.

import type { WhatIfRequest } from "./api.js";
import { JudgmentMatrix } from "./judgment.js";

export const CRITERIA = ["market_share", "valuation", "decentralization"] as const;
export type Criterion = (typeof CRITERIA)[number];

export const INDICATORS: Record<Criterion, string[]> = {
  market_share: ["I11", "I12", "I13", "I14"],
  valuation: ["I21", "I22", "I23"],
  decentralization: ["I31", "I32", "I33"],
};

export interface WhatIfState {
  criterionWeights: Record<string, number> | null;
  indicatorWeights: Record<string, number> | null;
  criteriaJudgment: JudgmentMatrix | null;
  criteriaJudgmentCleared: boolean;
  indicatorJudgments: Record<string, JudgmentMatrix | null>;
}

export function emptyState(): WhatIfState {
  return {
    criterionWeights: null,
    indicatorWeights: null,
    criteriaJudgment: null,
    criteriaJudgmentCleared: false,
    indicatorJudgments: {},
  };
}

export function isUntouched(state: WhatIfState): boolean {
  return (
    state.criterionWeights === null &&
    state.indicatorWeights === null &&
    state.criteriaJudgment === null &&
    !state.criteriaJudgmentCleared &&
    Object.keys(state.indicatorJudgments).length === 0
  );
}

export function buildPayload(state: WhatIfState, granularity?: string): WhatIfRequest {
  const payload: WhatIfRequest = {};
  if (granularity) payload.granularity = granularity;
  if (state.criterionWeights) payload.criterion_weights = { ...state.criterionWeights };
  if (state.indicatorWeights) payload.indicator_weights = { ...state.indicatorWeights };
  if (state.criteriaJudgment) {
    payload.criteria_judgment = state.criteriaJudgment.rows();
  } else if (state.criteriaJudgmentCleared) {
    payload.criteria_judgment = null;
  }
  const judgments: Record<string, number[][] | null> = {};
  for (const [crit, matrix] of Object.entries(state.indicatorJudgments)) {
    judgments[crit] = matrix ? matrix.rows() : null;
  }
  if (Object.keys(judgments).length > 0) payload.indicator_judgments = judgments;
  return payload;
}

// Trailing-edge debounce; the pending call resets on every invocation.
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  delayMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = undefined;
      fn(...args);
    }, delayMs);
  };
}
