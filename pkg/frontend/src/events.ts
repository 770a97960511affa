/**
 * WebSocket subscription to the controller's state push channel, with
 * automatic reconnect. Sockets are created through an injectable factory
 * so tests can substitute a scripted fake.
 */

export interface StateMessage {
  type: string;
  selected: number | null;
  source: string;
}

/** The handler-property subset of the WebSocket API this module uses. */
export interface SocketLike {
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface EventStreamOptions {
  factory?: SocketFactory;
  /** Consecutive failed attempts tolerated before giving up. */
  maxRetries?: number;
  baseDelayMs?: number;
  maxDelayMs?: number;
  onState: (msg: StateMessage) => void;
  onConnection?: (connection: "ok" | "lost") => void;
  /** Fired on every successful (re)open; callers refetch authoritative state here. */
  onResync?: () => void;
}

const DEFAULT_MAX_RETRIES = 5;
const DEFAULT_BASE_DELAY_MS = 250;
const DEFAULT_MAX_DELAY_MS = 4000;

export class EventStream {
  private readonly url: string;
  private readonly opts: EventStreamOptions;
  private socket: SocketLike | null = null;
  private retries = 0;
  private stopped = true;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(url: string, opts: EventStreamOptions) {
    this.url = url;
    this.opts = opts;
  }

  start(): void {
    this.stopped = false;
    this.retries = 0;
    this.open();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.socket !== null) {
      const sock = this.socket;
      this.socket = null;
      // neutralize handlers so the close does not look like a dropout
      sock.onclose = null;
      sock.onerror = null;
      sock.close();
    }
  }

  private open(): void {
    const factory: SocketFactory =
      this.opts.factory ?? ((url) => new WebSocket(url) as unknown as SocketLike);
    let sock: SocketLike;
    try {
      sock = factory(this.url);
    } catch {
      this.scheduleRetry();
      return;
    }
    this.socket = sock;
    sock.onopen = () => {
      this.retries = 0;
      this.opts.onConnection?.("ok");
      this.opts.onResync?.();
    };
    sock.onmessage = (ev) => {
      let msg: unknown;
      try {
        msg = JSON.parse(String(ev.data));
      } catch {
        return;
      }
      if (typeof msg === "object" && msg !== null && (msg as StateMessage).type === "state") {
        this.opts.onState(msg as StateMessage);
      }
    };
    sock.onclose = () => {
      this.socket = null;
      if (!this.stopped) {
        this.scheduleRetry();
      }
    };
    sock.onerror = () => {
      // onclose follows and drives the retry; nothing to do here
    };
  }

  private scheduleRetry(): void {
    const budget = this.opts.maxRetries ?? DEFAULT_MAX_RETRIES;
    if (this.retries >= budget) {
      this.opts.onConnection?.("lost");
      return;
    }
    const base = this.opts.baseDelayMs ?? DEFAULT_BASE_DELAY_MS;
    const cap = this.opts.maxDelayMs ?? DEFAULT_MAX_DELAY_MS;
    const delay = Math.min(base * 2 ** this.retries, cap);
    this.retries += 1;
    this.timer = setTimeout(() => {
      this.timer = null;
      if (!this.stopped) {
        this.open();
      }
    }, delay);
  }
}
