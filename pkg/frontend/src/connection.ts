// Reconnecting websocket wrapper. The socket factory is injectable so
// tests can drive the whole lifecycle without a network.

import { Command, encodeCommand, parseServerMessage, ServerMessage } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "reconnecting" | "closed";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ConnectionOptions {
  onMessage: (message: ServerMessage) => void;
  onStatus?: (status: ConnectionStatus) => void;
  factory?: SocketFactory;
  reconnectDelayMs?: number;
}

const browserFactory: SocketFactory = (url) =>
  new WebSocket(url) as unknown as SocketLike;

export class Connection {
  private socket: SocketLike | null = null;
  private open = false;
  private stopped = false;
  attempts = 0;

  constructor(private url: string, private opts: ConnectionOptions) {}

  get isOpen(): boolean {
    return this.open;
  }

  connect(): void {
    this.stopped = false;
    this.attempts += 1;
    this.opts.onStatus?.(this.attempts > 1 ? "reconnecting" : "connecting");
    const factory = this.opts.factory ?? browserFactory;
    const socket = factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.open = true;
      this.opts.onStatus?.("open");
    };
    socket.onmessage = (event) => {
      let message: ServerMessage;
      try {
        message = parseServerMessage(event.data);
      } catch {
        return; // ignore malformed frames; the stream self-heals
      }
      this.opts.onMessage(message);
    };
    socket.onerror = () => {
      // close follows; reconnect handled there
    };
    socket.onclose = () => {
      this.open = false;
      if (this.stopped) {
        this.opts.onStatus?.("closed");
        return;
      }
      this.opts.onStatus?.("reconnecting");
      setTimeout(() => {
        if (!this.stopped) {
          this.connect();
        }
      }, this.opts.reconnectDelayMs ?? 500);
    };
  }

  send(command: Command): boolean {
    if (!this.open || !this.socket) {
      return false;
    }
    this.socket.send(encodeCommand(command));
    return true;
  }

  close(): void {
    this.stopped = true;
    this.socket?.close();
  }
}
