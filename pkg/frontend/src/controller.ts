/**
 * Session flow: create, answer, re-query on inconsistency, show result.
 *
 * The controller holds no lottery state of its own; it re-renders from
 * the latest service view after every round trip, and an in-flight guard
 * ensures each query's answer is sent exactly once.
 */

import type { ApiClient } from "./api.js";
import { renderSession } from "./render.js";
import type { AlphabetObj, SessionView, Verdict } from "./types.js";

export interface RenderTarget {
  innerHTML: string;
}

export class SessionController {
  private view: SessionView | null = null;
  private inFlight = false;

  constructor(
    private readonly client: ApiClient,
    private readonly target: RenderTarget,
  ) {}

  get sessionView(): SessionView | null {
    return this.view;
  }

  get sessionId(): string | null {
    return this.view?.id ?? null;
  }

  async start(alphabet: AlphabetObj, epsilon: number): Promise<SessionView> {
    const created = await this.client.createSession(alphabet, epsilon);
    this.view = await this.client.getSession(created.id);
    this.renderCurrent();
    return this.view;
  }

  async resume(sessionId: string): Promise<SessionView> {
    this.view = await this.client.getSession(sessionId);
    this.renderCurrent();
    return this.view;
  }

  async answer(verdict: Verdict): Promise<SessionView> {
    if (!this.view) {
      throw new Error("no active session");
    }
    if (this.inFlight) {
      return this.view;
    }
    if (!this.view.pending_query) {
      throw new Error("no pending query to answer");
    }
    this.inFlight = true;
    try {
      this.view = await this.client.submitAnswer(this.view.id, verdict);
    } finally {
      this.inFlight = false;
    }
    this.renderCurrent();
    return this.view;
  }

  /** Wire answer buttons through event delegation on a real DOM element. */
  mount(element: RenderTarget & EventTarget): void {
    element.addEventListener("click", (event) => {
      const target = event.target as Element | null;
      const button = target?.closest?.("[data-verdict]");
      const verdict = button?.getAttribute("data-verdict") as Verdict | null;
      if (verdict) {
        void this.answer(verdict);
      }
    });
  }

  private renderCurrent(): void {
    if (this.view) {
      this.target.innerHTML = renderSession(this.view);
    }
  }
}
