// Annotation state machine. Everything shown on screen derives from the
// latest service responses held here; the controller never decides cluster
// membership itself.

import {
  ApiError,
  ExportBundle,
  PendingQuery,
  SessionApi,
  SessionState,
} from "./api.js";

export type Phase =
  | "loading"
  | "answering"
  | "repairing"
  | "waiting"
  | "labeling"
  | "exported"
  | "escalated"
  | "error";

export interface PanelView {
  phase: Phase;
  banner: string;
  session: SessionState | null;
  query: PendingQuery | null;
  // labeling inputs, keyed by block index as the service expects
  labelDraft: Record<string, string>;
  labelError: string | null;
  exported: ExportBundle | null;
  busy: boolean;
  lastError: string | null;
}

type Listener = (view: PanelView) => void;

const BANNERS: Record<Phase, string> = {
  loading: "Loading session…",
  answering: "Are these two the same?",
  repairing: "Conflicting answers detected - please re-check this pair",
  waiting: "Waiting for a query (another annotator may hold the next one)",
  labeling: "All pairs resolved - name each cluster",
  exported: "Labels saved - session is read-only",
  escalated: "Session needs manual review and is closed",
  error: "Session unavailable",
};

export class AnnotatorController {
  private session: SessionState | null = null;
  private query: PendingQuery | null = null;
  private exported: ExportBundle | null = null;
  private labelDraft: Record<string, string> = {};
  private labelError: string | null = null;
  private lastError: string | null = null;
  private failed = false;
  private busy = false;
  private timer: ReturnType<typeof setInterval> | null = null;
  private listeners: Listener[] = [];

  constructor(
    private readonly client: SessionApi,
    private readonly sessionId: string,
    private readonly annotator: string,
  ) {}

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  view(): PanelView {
    const phase = this.phase();
    return {
      phase,
      banner: BANNERS[phase],
      session: this.session,
      query: this.query,
      labelDraft: { ...this.labelDraft },
      labelError: this.labelError,
      exported: this.exported,
      busy: this.busy,
      lastError: this.lastError,
    };
  }

  private phase(): Phase {
    if (this.failed) return "error";
    if (!this.session) return "loading";
    switch (this.session.status) {
      case "escalated":
        return "escalated";
      case "resolved":
        return this.session.labels || this.exported ? "exported" : "labeling";
      default:
        if (!this.query) return "waiting";
        return this.query.repair ? "repairing" : "answering";
    }
  }

  private notify(): void {
    const view = this.view();
    for (const listener of this.listeners) listener(view);
  }

  start(intervalMs = 1000): void {
    if (this.timer) return;
    void this.refresh();
    this.timer = setInterval(() => {
      if (!this.busy && !this.failed) void this.refresh();
    }, intervalMs);
  }

  stop(): void {
    if (this.timer) clearInterval(this.timer);
    this.timer = null;
  }

  async refresh(): Promise<void> {
    try {
      this.session = await this.client.getSession(this.sessionId);
      if (
        this.session.status === "active" ||
        this.session.status === "repairing"
      ) {
        const next = await this.client.nextQuery(this.sessionId, this.annotator);
        this.query = next.query;
      } else {
        this.query = null;
        if (this.session.labels && !this.exported) {
          this.exported = await this.client.fetchExport(this.sessionId);
        }
      }
      this.lastError = null;
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.failed = true;
      }
      this.lastError = err instanceof Error ? err.message : String(err);
    }
    this.notify();
  }

  // One click: submit, wait for the acknowledgment, then fetch the next
  // query. Never shows the next pair optimistically. On a network failure
  // the answer may or may not have landed; the follow-up refresh re-fetches
  // idempotently and either re-serves the same pair or moves on.
  async answer(positive: boolean): Promise<void> {
    if (this.busy || !this.query || !this.session) return;
    const { u, v } = this.query;
    this.busy = true;
    this.notify();
    try {
      await this.client.submitAnswer(this.sessionId, u, v, positive);
      this.lastError = null;
    } catch (err) {
      const stale = err instanceof ApiError && err.code === "stale_query";
      const droppedOnWire = err instanceof ApiError && err.code === "network";
      if (!stale && !droppedOnWire) {
        this.lastError = err instanceof Error ? err.message : String(err);
      }
    } finally {
      this.busy = false;
    }
    await this.refresh();
  }

  setLabel(blockIndex: number, name: string): void {
    this.labelDraft[String(blockIndex)] = name;
    this.labelError = null;
    this.notify();
  }

  // Finalize labels; blocked client-side while any cluster is unnamed.
  async finalize(): Promise<void> {
    if (this.busy || !this.session || this.session.status !== "resolved") {
      return;
    }
    const blocks = this.session.blocks.length;
    for (let i = 0; i < blocks; i += 1) {
      if (!(this.labelDraft[String(i)] ?? "").trim()) {
        this.labelError = `cluster ${i + 1} still needs a name`;
        this.notify();
        return;
      }
    }
    this.busy = true;
    this.notify();
    try {
      this.exported = await this.client.setLabels(
        this.sessionId,
        this.labelDraft,
      );
      this.labelError = null;
    } catch (err) {
      this.labelError = err instanceof Error ? err.message : String(err);
    } finally {
      this.busy = false;
    }
    await this.refresh();
  }

  // Progress estimate for the banner; display-only, derived from the
  // service's exact-mean hint.
  progress(): { answered: number; expected: number | null } {
    if (!this.session) return { answered: 0, expected: null };
    const hint = this.session.expected_queries;
    return {
      answered: this.session.answered,
      expected: hint === null ? null : Math.max(hint, this.session.answered),
    };
  }
}
