import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { EventStream, SocketLike, StateMessage } from "../src/events.js";

class FakeSocket implements SocketLike {
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  closedByClient = false;

  constructor(readonly url: string) {}

  close(): void {
    this.closedByClient = true;
  }

  open(): void {
    this.onopen?.();
  }

  message(data: string): void {
    this.onmessage?.({ data });
  }

  drop(): void {
    this.onclose?.();
  }
}

interface Rig {
  sockets: FakeSocket[];
  states: Array<number | null>;
  connections: Array<"ok" | "lost">;
  resyncs: number;
  stream: EventStream;
}

function makeRig(opts: { maxRetries?: number; baseDelayMs?: number; maxDelayMs?: number } = {}): Rig {
  const rig: Rig = {
    sockets: [],
    states: [],
    connections: [],
    resyncs: 0,
    stream: undefined as unknown as EventStream,
  };
  rig.stream = new EventStream("ws://dev.example/events", {
    factory: (url) => {
      const sock = new FakeSocket(url);
      rig.sockets.push(sock);
      return sock;
    },
    onState: (msg: StateMessage) => rig.states.push(msg.selected),
    onConnection: (c) => rig.connections.push(c),
    onResync: () => {
      rig.resyncs += 1;
    },
    ...opts,
  });
  return rig;
}

beforeEach(() => {
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe("EventStream message handling", () => {
  it("applies state messages in arrival order", () => {
    const rig = makeRig();
    rig.stream.start();
    const sock = rig.sockets[0];
    sock.open();
    sock.message(JSON.stringify({ type: "state", selected: 2, source: "queried" }));
    sock.message(JSON.stringify({ type: "state", selected: 7, source: "queried" }));
    sock.message(JSON.stringify({ type: "state", selected: null, source: "shadow" }));
    expect(rig.states).toEqual([2, 7, null]);
  });

  it("ignores unknown message types and unparseable frames", () => {
    const rig = makeRig();
    rig.stream.start();
    const sock = rig.sockets[0];
    sock.open();
    sock.message(JSON.stringify({ type: "hello" }));
    sock.message("not json at all");
    sock.message("42");
    sock.message(JSON.stringify({ type: "state", selected: 1, source: "queried" }));
    expect(rig.states).toEqual([1]);
  });

  it("reports ok and requests a resync on every open", () => {
    const rig = makeRig();
    rig.stream.start();
    rig.sockets[0].open();
    expect(rig.connections).toEqual(["ok"]);
    expect(rig.resyncs).toBe(1);
  });
});

describe("EventStream reconnect", () => {
  it("reopens after a drop with the base delay", () => {
    const rig = makeRig({ baseDelayMs: 250 });
    rig.stream.start();
    rig.sockets[0].open();
    rig.sockets[0].drop();
    expect(rig.sockets).toHaveLength(1);
    vi.advanceTimersByTime(249);
    expect(rig.sockets).toHaveLength(1);
    vi.advanceTimersByTime(1);
    expect(rig.sockets).toHaveLength(2);
    rig.sockets[1].open();
    expect(rig.resyncs).toBe(2);
    expect(rig.connections).toEqual(["ok", "ok"]);
  });

  it("backs off exponentially between consecutive failures", () => {
    const rig = makeRig({ baseDelayMs: 100, maxDelayMs: 10000 });
    rig.stream.start();
    // never opens; each attempt drops straight away
    rig.sockets[0].drop();
    vi.advanceTimersByTime(100);
    expect(rig.sockets).toHaveLength(2);
    rig.sockets[1].drop();
    vi.advanceTimersByTime(199);
    expect(rig.sockets).toHaveLength(2);
    vi.advanceTimersByTime(1);
    expect(rig.sockets).toHaveLength(3);
    rig.sockets[2].drop();
    vi.advanceTimersByTime(399);
    expect(rig.sockets).toHaveLength(3);
    vi.advanceTimersByTime(1);
    expect(rig.sockets).toHaveLength(4);
  });

  it("caps the delay at maxDelayMs", () => {
    const rig = makeRig({ baseDelayMs: 100, maxDelayMs: 150 });
    rig.stream.start();
    rig.sockets[0].drop();
    vi.advanceTimersByTime(100);
    rig.sockets[1].drop();
    vi.advanceTimersByTime(150);
    expect(rig.sockets).toHaveLength(3);
    rig.sockets[2].drop();
    vi.advanceTimersByTime(150);
    expect(rig.sockets).toHaveLength(4);
  });

  it("declares the connection lost once the retry budget is spent", () => {
    const rig = makeRig({ maxRetries: 3, baseDelayMs: 10 });
    rig.stream.start();
    rig.sockets[0].drop();
    for (let i = 0; i < 3; i++) {
      vi.advanceTimersByTime(10 * 2 ** i);
      rig.sockets[rig.sockets.length - 1].drop();
    }
    expect(rig.sockets).toHaveLength(4);
    expect(rig.connections).toEqual(["lost"]);
    // no further attempts are scheduled
    vi.advanceTimersByTime(60000);
    expect(rig.sockets).toHaveLength(4);
  });

  it("resets the budget after a successful open", () => {
    const rig = makeRig({ maxRetries: 2, baseDelayMs: 10 });
    rig.stream.start();
    rig.sockets[0].drop();
    vi.advanceTimersByTime(10);
    rig.sockets[1].open();
    rig.sockets[1].drop();
    vi.advanceTimersByTime(10);
    expect(rig.sockets).toHaveLength(3);
    expect(rig.connections).toEqual(["ok"]);
  });

  it("treats a factory that throws as a failed attempt", () => {
    let calls = 0;
    const states: Array<number | null> = [];
    const connections: string[] = [];
    const stream = new EventStream("ws://dev.example/events", {
      factory: () => {
        calls += 1;
        throw new Error("refused");
      },
      maxRetries: 2,
      baseDelayMs: 5,
      onState: (m) => states.push(m.selected),
      onConnection: (c) => connections.push(c),
    });
    stream.start();
    vi.advanceTimersByTime(1000);
    expect(calls).toBe(3);
    expect(connections).toEqual(["lost"]);
  });
});

describe("EventStream.stop", () => {
  it("closes the socket and suppresses reconnect", () => {
    const rig = makeRig();
    rig.stream.start();
    rig.sockets[0].open();
    rig.stream.stop();
    expect(rig.sockets[0].closedByClient).toBe(true);
    vi.advanceTimersByTime(60000);
    expect(rig.sockets).toHaveLength(1);
    expect(rig.connections).toEqual(["ok"]);
  });

  it("cancels a pending retry timer", () => {
    const rig = makeRig({ baseDelayMs: 50 });
    rig.stream.start();
    rig.sockets[0].drop();
    rig.stream.stop();
    vi.advanceTimersByTime(60000);
    expect(rig.sockets).toHaveLength(1);
  });
});
