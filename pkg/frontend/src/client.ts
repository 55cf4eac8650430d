/** Session client: REST calls plus an ordered event feed.
 *
 * The feed prefers the WebSocket stream and falls back to long-polling the
 * events endpoint; both paths resume from the last seen sequence number, so
 * reconnects produce no gaps and no duplicates (stale events are dropped by
 * the fold).
 */

import type {
  CommandAccepted,
  CommandRejection,
  WireEvent,
} from "./wire.js";

export interface SessionInfo {
  id: string;
  seed: number;
  mode: string;
  scene: unknown;
}

export type CommandResult =
  | { ok: true; body: CommandAccepted }
  | { ok: false; rejection: CommandRejection };

export class SessionClient {
  readonly base: string;
  session: SessionInfo | null = null;
  lastSeq = 0;
  busy = false;
  onEvent: (e: WireEvent) => void = () => {};
  private pollTimer: ReturnType<typeof setTimeout> | null = null;
  private ws: WebSocket | null = null;
  private stopped = false;

  constructor(base: string) {
    this.base = base.replace(/\/$/, "");
  }

  async createSession(
    seed: number,
    mode: string = "ground_truth",
    objectCount: number = 0,
  ): Promise<SessionInfo> {
    const r = await fetch(`${this.base}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ seed, mode, object_count: objectCount }),
    });
    if (!r.ok) throw new Error(`create session failed: ${r.status}`);
    this.session = (await r.json()) as SessionInfo;
    this.lastSeq = 0;
    return this.session;
  }

  async submitCommand(text: string): Promise<CommandResult> {
    if (!this.session) throw new Error("no session");
    const r = await fetch(
      `${this.base}/sessions/${this.session.id}/command`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ text }),
      },
    );
    const body = await r.json();
    if (r.ok) return { ok: true, body: body as CommandAccepted };
    return { ok: false, rejection: body.detail as CommandRejection };
  }

  /** Start the event feed. Uses WebSocket when the runtime provides one,
   * otherwise polls. Events are delivered in order via `onEvent`. */
  start(): void {
    this.stopped = false;
    if (typeof WebSocket !== "undefined" && this.base.startsWith("http")) {
      this.startWebSocket();
    } else {
      this.schedulePoll(0);
    }
  }

  stop(): void {
    this.stopped = true;
    if (this.pollTimer) clearTimeout(this.pollTimer);
    this.pollTimer = null;
    if (this.ws) this.ws.close();
    this.ws = null;
  }

  private deliver(e: WireEvent): void {
    if (e.kind !== "heartbeat" && e.seq > this.lastSeq) {
      this.lastSeq = e.seq;
      this.onEvent(e);
    }
  }

  private startWebSocket(): void {
    if (!this.session || this.stopped) return;
    const url =
      this.base.replace(/^http/, "ws") +
      `/sessions/${this.session.id}/stream?after=${this.lastSeq}`;
    try {
      this.ws = new WebSocket(url);
    } catch {
      this.schedulePoll(0);
      return;
    }
    let opened = false;
    this.ws.onopen = () => {
      opened = true;
    };
    this.ws.onmessage = (msg) => {
      this.deliver(JSON.parse(String(msg.data)) as WireEvent);
    };
    this.ws.onclose = () => {
      this.ws = null;
      if (this.stopped) return;
      if (opened) {
        setTimeout(() => this.startWebSocket(), 500); // resume from lastSeq
      } else {
        this.schedulePoll(0); // transport unavailable: poll instead
      }
    };
    this.ws.onerror = () => this.ws?.close();
  }

  private schedulePoll(delayMs: number): void {
    if (this.stopped) return;
    this.pollTimer = setTimeout(() => void this.pollOnce(), delayMs);
  }

  private async pollOnce(): Promise<void> {
    if (!this.session || this.stopped) return;
    try {
      const r = await fetch(
        `${this.base}/sessions/${this.session.id}/events?after=${this.lastSeq}`,
      );
      if (r.ok) {
        const body = await r.json();
        this.busy = Boolean(body.busy);
        for (const e of body.events as WireEvent[]) this.deliver(e);
      }
    } catch {
      // transient network error: keep polling
    }
    this.schedulePoll(this.busy ? 60 : 250);
  }
}
