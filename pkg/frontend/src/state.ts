/**
 * View-model for the chat client.
 *
 * ViewState is a pure function of the latest server snapshot plus local
 * in-flight form state (override draft, transient system notices, compare
 * selection). The controller never predicts server state: every mutation
 * round-trips, then re-reads the snapshot, so a page refresh reconstructs
 * the same view from GET /sessions/{id} alone.
 */

import { ApiClient, ApiError, ProposalPayload, SessionSnapshot } from "./api.js";
import { parseCommand } from "./grammar.js";

export type GateSource = "generate" | "utterance" | "concept";

export interface TokenBadge {
  token: string;
  /** Server-reported provenance: which channel contributed the token most. */
  source: GateSource;
  /** The 3-way selection-gate weights [generate, utterance, concept]. */
  weights: [number, number, number];
}

export interface ProposalView {
  commandText: string;
  valid: boolean;
  tokens: TokenBadge[];
}

export interface Message {
  role: "user" | "assistant" | "system";
  text: string;
}

export interface HistoryItem {
  index: number;
  url: string;
  command: string;
}

export interface CompareView {
  /** Image before the selected command ran; null for the first image. */
  leftIndex: number | null;
  leftUrl: string | null;
  rightIndex: number;
  rightUrl: string;
  command: string;
}

export interface ViewState {
  sessionId: string | null;
  messages: Message[];
  history: HistoryItem[];
  currentImageUrl: string | null;
  pending: ProposalView | null;
  compare: CompareView | null;
  compareEnabled: boolean;
  busy: boolean;
  overrideDraft: string;
  overrideError: string | null;
}

export interface LocalState {
  systemNotices: Message[];
  compareIndex: number | null;
  busy: boolean;
  overrideDraft: string;
  overrideError: string | null;
}

export function initialLocalState(): LocalState {
  return {
    systemNotices: [],
    compareIndex: null,
    busy: false,
    overrideDraft: "",
    overrideError: null,
  };
}

export function proposalView(p: ProposalPayload): ProposalView {
  const tokens = p.proposed_command.replace(/^\[|\]$/g, "").split(/\s+/).filter(Boolean);
  return {
    commandText: p.proposed_command,
    valid: p.valid,
    tokens: tokens.map((token, i) => ({
      token,
      source: (p.token_sources[i] ?? "generate") as GateSource,
      weights: [
        p.gate_trace[i]?.[0] ?? 0,
        p.gate_trace[i]?.[1] ?? 0,
        p.gate_trace[i]?.[2] ?? 0,
      ],
    })),
  };
}

/** Interleave server utterances with local system notices (notices last). */
function messages(snapshot: SessionSnapshot | null, local: LocalState): Message[] {
  const fromServer: Message[] = (snapshot?.utterances ?? []).map((u) => ({
    role: u.speaker,
    text: u.tokens.join(" "),
  }));
  return [...fromServer, ...local.systemNotices];
}

export function buildViewState(
  api: ApiClient,
  snapshot: SessionSnapshot | null,
  local: LocalState,
): ViewState {
  const sessionId = snapshot?.session_id ?? null;
  const history: HistoryItem[] = (snapshot?.images ?? []).map((img, i) => ({
    index: img.index,
    url: sessionId ? api.imageUrl(sessionId, img.index) : "",
    command: snapshot?.commands[i] ?? "",
  }));
  const last = history.length > 0 ? history[history.length - 1] : null;

  let compare: CompareView | null = null;
  if (
    sessionId &&
    local.compareIndex !== null &&
    local.compareIndex >= 0 &&
    local.compareIndex < history.length
  ) {
    const right = history[local.compareIndex];
    const left = local.compareIndex > 0 ? history[local.compareIndex - 1] : null;
    compare = {
      leftIndex: left ? left.index : null,
      leftUrl: left ? left.url : null,
      rightIndex: right.index,
      rightUrl: right.url,
      command: right.command,
    };
  }

  return {
    sessionId,
    messages: messages(snapshot, local),
    history,
    currentImageUrl: last ? last.url : null,
    // The card renders iff the server reports a pending proposal.
    pending: snapshot?.pending ? proposalView(snapshot.pending) : null,
    compare,
    compareEnabled: history.length > 0,
    busy: local.busy,
    overrideDraft: local.overrideDraft,
    overrideError: local.overrideError,
  };
}

/**
 * Drives one session against the service and exposes ViewState to a
 * renderer. This is the layer the end-to-end test exercises directly —
 * the DOM renderer is a pure projection of ViewState.
 */
export class SessionController {
  private snapshot: SessionSnapshot | null = null;
  private local: LocalState = initialLocalState();
  private listeners: Array<(s: ViewState) => void> = [];

  constructor(private readonly api: ApiClient) {}

  get state(): ViewState {
    return buildViewState(this.api, this.snapshot, this.local);
  }

  onChange(fn: (s: ViewState) => void): void {
    this.listeners.push(fn);
  }

  private emit(): void {
    const s = this.state;
    for (const fn of this.listeners) fn(s);
  }

  private notice(text: string): void {
    this.local.systemNotices.push({ role: "system", text });
  }

  /** Create a fresh session, or re-attach to an existing one (refresh). */
  async start(sessionId?: string): Promise<void> {
    const id = sessionId ?? (await this.api.createSession());
    this.snapshot = await this.api.getSnapshot(id);
    this.local = initialLocalState();
    this.emit();
  }

  async refresh(): Promise<void> {
    if (!this.snapshot) return;
    this.snapshot = await this.api.getSnapshot(this.snapshot.session_id);
    this.emit();
  }

  /** Send the user's words; the server answers with a pending proposal. */
  async sendUtterance(text: string): Promise<void> {
    if (!this.snapshot) throw new Error("no session");
    await this.withBusy(async () => {
      try {
        await this.api.sendUtterance(this.snapshot!.session_id, text);
      } catch (err) {
        this.surface(err);
      }
      await this.reload();
    });
  }

  /** Accept the pending proposal as-is. */
  async accept(): Promise<void> {
    if (!this.snapshot) throw new Error("no session");
    await this.withBusy(async () => {
      try {
        await this.api.accept(this.snapshot!.session_id);
        this.local.overrideDraft = "";
        this.local.overrideError = null;
      } catch (err) {
        this.surface(err);
      }
      await this.reload();
    });
  }

  /**
   * Validate the override locally first — an unparseable command never
   * leaves the browser — then resolve with it.
   */
  async override(commandText: string): Promise<void> {
    if (!this.snapshot) throw new Error("no session");
    const parsed = parseCommand(commandText);
    if (!parsed.ok) {
      this.local.overrideDraft = commandText;
      this.local.overrideError = `${parsed.error}: ${parsed.message}`;
      this.emit();
      return;
    }
    await this.withBusy(async () => {
      try {
        await this.api.override(this.snapshot!.session_id, commandText);
        this.local.overrideDraft = "";
        this.local.overrideError = null;
      } catch (err) {
        this.surface(err);
      }
      await this.reload();
    });
  }

  setOverrideDraft(text: string): void {
    this.local.overrideDraft = text;
    this.local.overrideError = null;
    this.emit();
  }

  /** Select a history thumbnail for before/after compare (null clears). */
  setCompareIndex(index: number | null): void {
    this.local.compareIndex = index;
    this.emit();
  }

  /** Surface a server error as an inline system message.
   *
   * A 422 means the command was valid but execution failed (cutout with no
   * subject/background split, search with no hits, ...); the server keeps
   * the proposal pending, so after reload the card is still there to retry
   * or override — exactly the behavior the message describes.
   */
  private surface(err: unknown): void {
    if (err instanceof ApiError) {
      this.notice(
        err.status === 422
          ? `command failed: ${err.kind} — ${err.detail} (proposal kept; retry or override)`
          : `${err.status} ${err.kind}: ${err.detail}`,
      );
    } else {
      this.notice(`request failed: ${String(err)}`);
    }
  }

  private async reload(): Promise<void> {
    this.snapshot = await this.api.getSnapshot(this.snapshot!.session_id);
  }

  private async withBusy(op: () => Promise<void>): Promise<void> {
    this.local.busy = true;
    this.emit();
    try {
      await op();
    } finally {
      this.local.busy = false;
      this.emit();
    }
  }
}
