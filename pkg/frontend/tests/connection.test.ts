import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { Connection, ConnectionStatus, SocketLike } from "../src/connection";
import { ServerMessage, Snapshot } from "../src/protocol";
import fixture from "./fixtures/snapshots.json";

const frames = fixture.frames as unknown as Snapshot[];
const SNAPSHOT_PERIOD_MS = fixture.snapshot_period_s * 1000;

class FakeSocket implements SocketLike {
  sent: string[] = [];
  closed = false;
  onopen: (() => void) | null = null;
  onmessage: ((event: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closed = true;
    this.onclose?.();
  }

  serverSend(message: unknown): void {
    this.onmessage?.({ data: JSON.stringify(message) });
  }

  dropConnection(): void {
    this.onclose?.();
  }
}

describe("Connection", () => {
  let sockets: FakeSocket[];
  let messages: ServerMessage[];
  let statuses: ConnectionStatus[];

  const makeConnection = (reconnectDelayMs = SNAPSHOT_PERIOD_MS) =>
    new Connection("ws://test/ws", {
      factory: () => {
        const socket = new FakeSocket();
        sockets.push(socket);
        return socket;
      },
      reconnectDelayMs,
      onMessage: (m) => messages.push(m),
      onStatus: (s) => statuses.push(s),
    });

  beforeEach(() => {
    vi.useFakeTimers();
    sockets = [];
    messages = [];
    statuses = [];
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("delivers parsed snapshots and gates sends on openness", () => {
    const conn = makeConnection();
    conn.connect();
    expect(conn.send({ name: "calibrate" })).toBe(false);
    sockets[0].onopen?.();
    expect(statuses).toContain("open");
    sockets[0].serverSend(frames[0]);
    expect(messages).toHaveLength(1);
    expect((messages[0] as Snapshot).tick).toBe(frames[0].tick);
    expect(conn.send({ name: "calibrate" })).toBe(true);
    expect(JSON.parse(sockets[0].sent[0]).name).toBe("calibrate");
  });

  it("ignores malformed frames without dying", () => {
    const conn = makeConnection();
    conn.connect();
    sockets[0].onopen?.();
    sockets[0].onmessage?.({ data: "{garbage" });
    sockets[0].serverSend(frames[1]);
    expect(messages).toHaveLength(1);
  });

  it("reconnects and resumes rendering within two snapshot periods", () => {
    const conn = makeConnection();
    conn.connect();
    sockets[0].onopen?.();
    sockets[0].serverSend(frames[0]);
    expect(messages).toHaveLength(1);

    sockets[0].dropConnection();
    expect(statuses).toContain("reconnecting");

    // within two snapshot periods the new socket must exist, be open,
    // and deliver the next snapshot
    vi.advanceTimersByTime(SNAPSHOT_PERIOD_MS * 2);
    expect(sockets).toHaveLength(2);
    sockets[1].onopen?.();
    sockets[1].serverSend(frames[1]);
    expect(messages).toHaveLength(2);
    expect((messages[1] as Snapshot).tick).toBeGreaterThan((messages[0] as Snapshot).tick);
    expect(conn.isOpen).toBe(true);
  });

  it("stays closed after an explicit close", () => {
    const conn = makeConnection();
    conn.connect();
    sockets[0].onopen?.();
    conn.close();
    vi.advanceTimersByTime(SNAPSHOT_PERIOD_MS * 10);
    expect(sockets).toHaveLength(1);
    expect(statuses[statuses.length - 1]).toBe("closed");
  });
});
