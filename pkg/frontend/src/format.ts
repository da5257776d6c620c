/** Display helpers. The service computes all numbers; these only arrange them. */

import type { OutcomeRendering, TransitionObj } from "./types.js";

/**
 * Odds label for one outcome: the exact percentage when the weight's
 * denominator divides 100, otherwise the rounded percentage with the
 * exact fraction alongside.
 */
export function oddsLabel(outcome: OutcomeRendering): string {
  if (outcome.percent_exact) {
    return outcome.percent;
  }
  return `${outcome.percent} (exactly ${outcome.weight})`;
}

export function transitionLabel(t: TransitionObj): string {
  return t[1] === null ? t[0] : `${t[0]}·${t[1]}`;
}

/** Render a service-reported number verbatim (full precision). */
export function numberLabel(value: number | null): string {
  return value === null ? "—" : String(value);
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
