/**
 * Pure view layer: wire payloads in, HTML strings out.
 *
 * Keeping this DOM-free lets the headless end-to-end test assert on the
 * exact markup a browser would show, and guarantees the UI never computes
 * its own numbers: every figure below is lifted verbatim from a service
 * response.
 */

import { escapeHtml, numberLabel, oddsLabel, transitionLabel } from "./format.js";
import type {
  HistoryObj,
  Inconsistency,
  LotteryObj,
  LotteryView,
  PendingQuery,
  SessionResult,
  SessionView,
  WitnessComparison,
} from "./types.js";

export function historyLabel(history: HistoryObj): string {
  if (history.length === 0) {
    return "ε";
  }
  return history.map(transitionLabel).join(" ");
}

function lotterySummary(lottery: LotteryObj): string {
  return lottery.weights
    .map(([history, weight]) => `${weight} on [${historyLabel(history)}]`)
    .join(", ");
}

export function renderGambleCard(view: LotteryView, title: string): string {
  const rows = view.rendering.outcomes
    .map(
      (outcome) => `
      <li class="outcome">
        <span class="odds">${escapeHtml(oddsLabel(outcome))}</span>
        <span class="history">${escapeHtml(outcome.history)}</span>
      </li>`,
    )
    .join("");
  return `
  <section class="gamble-card" data-card="${escapeHtml(title)}">
    <h3>${escapeHtml(title)}</h3>
    <ul>${rows}</ul>
  </section>`;
}

export function renderQuery(
  query: PendingQuery,
  answered: number,
  estimatedTotal: number,
): string {
  return `
  <div class="query" data-query-index="${query.index}">
    <p class="progress">Answered ${answered} of about ${estimatedTotal} comparisons</p>
    <div class="cards">
      ${renderGambleCard(query.left, "Gamble A")}
      ${renderGambleCard(query.right, "Gamble B")}
    </div>
    <p class="prompt">Which gamble do you prefer?</p>
    <div class="answers">
      <button data-verdict="strictly-less">Prefer B</button>
      <button data-verdict="indifferent">Indifferent</button>
      <button data-verdict="strictly-greater">Prefer A</button>
    </div>
  </div>`;
}

function renderWitnessRow(comparison: WitnessComparison): string {
  return `
    <li class="witness-row" data-query-index="${comparison.query_index}">
      <span class="replay">answer #${comparison.query_index}</span>
      ${escapeHtml(lotterySummary(comparison.left))}
      <strong>${escapeHtml(comparison.verdict)}</strong>
      ${escapeHtml(lotterySummary(comparison.right))}
    </li>`;
}

export function renderInconsistency(inconsistency: Inconsistency): string {
  const witness = Array.isArray(inconsistency.witness)
    ? `<ul class="witness">${inconsistency.witness.map(renderWitnessRow).join("")}</ul>`
    : "";
  return `
  <div class="inconsistency-panel">
    <h3>Inconsistent answers</h3>
    <p>${escapeHtml(inconsistency.message)}</p>
    ${witness}
  </div>`;
}

export function renderResult(result: SessionResult): string {
  const identifiable = new Map(
    result.reward_spec.identifiable.map(([t, flag]) => [transitionLabel(t), flag]),
  );
  const discounts = new Map(
    result.reward_spec.discounts.map(([t, value]) => [transitionLabel(t), value]),
  );
  const rows = result.reward_spec.rewards
    .map(([t, reward]) => {
      const label = transitionLabel(t);
      const flag = identifiable.get(label) ?? true;
      const badge = flag
        ? '<span class="badge identifiable">identified</span>'
        : '<span class="badge conventional">conventional</span>';
      return `
      <tr data-transition="${escapeHtml(label)}">
        <td>${escapeHtml(label)}</td>
        <td class="reward">${escapeHtml(numberLabel(reward))}</td>
        <td class="discount">${escapeHtml(numberLabel(discounts.get(label) ?? null))}</td>
        <td>${badge}</td>
      </tr>`;
    })
    .join("");
  const scale =
    result.diagnostics.scale === null
      ? ""
      : `<p class="scale">Scale vs reference: ${escapeHtml(numberLabel(result.diagnostics.scale))}</p>`;
  return `
  <div class="result-view">
    <h3>Recovered reward and discount</h3>
    <table class="reward-table">
      <thead><tr><th>transition</th><th>reward</th><th>discount</th><th></th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
    ${scale}
    <p class="comparisons">${result.diagnostics.comparisons} comparisons answered</p>
  </div>`;
}

export function renderSession(view: SessionView): string {
  const parts: string[] = [`<div class="session" data-status="${view.status}">`];
  if (view.inconsistency) {
    parts.push(renderInconsistency(view.inconsistency));
  }
  if (view.status === "complete" && view.result) {
    parts.push(renderResult(view.result));
  } else if (view.pending_query) {
    parts.push(renderQuery(view.pending_query, view.answered, view.estimated_total));
  }
  parts.push("</div>");
  return parts.join("\n");
}
