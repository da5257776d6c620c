/**
 * Contract tests against recorded service responses: the view layer must
 * surface exactly the numbers the service sent, with no local arithmetic.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { renderInconsistency, renderQuery, renderResult, renderSession } from "../src/render.js";
import type { ResultResponse, SessionView } from "../src/types.js";

const fixturesDir = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(fixturesDir, name), "utf8")) as T;
}

describe("query rendering", () => {
  const created = fixture<{ pending_query: NonNullable<SessionView["pending_query"]> }>(
    "create-session.json",
  );

  it("renders both gamble cards with service-provided odds", () => {
    const html = renderQuery(created.pending_query, 0, 92);
    expect(html).toContain("Gamble A");
    expect(html).toContain("Gamble B");
    for (const side of [created.pending_query.left, created.pending_query.right]) {
      for (const outcome of side.rendering.outcomes) {
        expect(html).toContain(outcome.percent);
        expect(html).toContain(outcome.history);
      }
    }
  });

  it("offers exactly the three verdict buttons", () => {
    const html = renderQuery(created.pending_query, 3, 92);
    expect(html.match(/data-verdict=/g)).toHaveLength(3);
    expect(html).toContain('data-verdict="strictly-less"');
    expect(html).toContain('data-verdict="indifferent"');
    expect(html).toContain('data-verdict="strictly-greater"');
  });

  it("shows progress from the session view", () => {
    const view = fixture<SessionView>("mid-session.json");
    const html = renderSession(view);
    expect(html).toContain(`Answered ${view.answered} of about ${view.estimated_total}`);
    expect(html).toContain(`data-query-index="${view.pending_query!.index}"`);
  });
});

describe("result rendering", () => {
  const result = fixture<Extract<ResultResponse, { status: "complete" }>>("result.json");

  it("renders every reward and discount verbatim", () => {
    const html = renderResult(result);
    for (const [, reward] of result.reward_spec.rewards) {
      expect(html).toContain(`>${String(reward)}<`);
    }
    for (const [, discount] of result.reward_spec.discounts) {
      expect(html).toContain(`>${String(discount)}<`);
    }
    expect(html).toContain(`${result.diagnostics.comparisons} comparisons answered`);
  });

  it("badges identifiability per transition", () => {
    const html = renderResult(result);
    const identified = result.reward_spec.identifiable.filter(([, flag]) => flag).length;
    expect(html.match(/badge identifiable/g) ?? []).toHaveLength(identified);
  });

  it("renders the complete session view with the table", () => {
    const view = fixture<SessionView>("complete-session.json");
    const html = renderSession(view);
    expect(html).toContain('data-status="complete"');
    expect(html).toContain("reward-table");
  });
});

describe("inconsistency rendering", () => {
  const view = fixture<SessionView>("inconsistent-session.json");

  it("lists the witness comparisons with their replay indices", () => {
    const html = renderInconsistency(view.inconsistency!);
    expect(html).toContain("Inconsistent answers");
    const witness = view.inconsistency!.witness as Array<{ query_index: number }>;
    for (const row of witness) {
      expect(html).toContain(`data-query-index="${row.query_index}"`);
    }
  });

  it("keeps offering the same query below the panel", () => {
    const html = renderSession(view);
    expect(html).toContain("inconsistency-panel");
    expect(html).toContain(`data-query-index="${view.pending_query!.index}"`);
    expect(html.match(/data-verdict=/g)).toHaveLength(3);
  });
});
