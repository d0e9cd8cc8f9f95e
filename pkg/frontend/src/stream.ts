// WebSocket frame stream with reconnect backoff. One connection at a
// time; toggling the IQ view reconnects with ?iq=1 so full I/Q data is
// only shipped when something renders it.

import type { FrameEvent } from "./types";

export interface StreamCallbacks {
  onFrame(event: FrameEvent): void;
  onStatus(status: "connecting" | "live" | "closed"): void;
}

type SocketFactory = (url: string) => WebSocket;

const BACKOFF_START_MS = 1000;
const BACKOFF_MAX_MS = 10000;

export class FrameStream {
  private socket: WebSocket | null = null;
  private includeIq = false;
  private backoffMs = BACKOFF_START_MS;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private closedByUs = false;

  constructor(
    private baseUrl: string,
    private callbacks: StreamCallbacks,
    private factory: SocketFactory = (url) => new WebSocket(url),
  ) {}

  url(): string {
    return `${this.baseUrl}/ws/csi${this.includeIq ? "?iq=1" : ""}`;
  }

  connect(): void {
    this.closedByUs = false;
    this.callbacks.onStatus("connecting");
    const socket = this.factory(this.url());
    this.socket = socket;

    socket.onopen = () => {
      this.backoffMs = BACKOFF_START_MS;
      this.callbacks.onStatus("live");
    };
    socket.onmessage = (msg) => {
      let event: FrameEvent;
      try {
        event = JSON.parse(String(msg.data));
      } catch {
        return; // not a frame event
      }
      this.callbacks.onFrame(event);
    };
    socket.onclose = () => {
      this.socket = null;
      if (this.closedByUs) return;
      this.callbacks.onStatus("closed");
      this.scheduleReconnect();
    };
    socket.onerror = () => {
      socket.close();
    };
  }

  private scheduleReconnect(): void {
    if (this.reconnectTimer !== null) return;
    const wait = this.backoffMs;
    this.backoffMs = Math.min(this.backoffMs * 2, BACKOFF_MAX_MS);
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      this.connect();
    }, wait);
  }

  setIncludeIq(include: boolean): void {
    if (include === this.includeIq) return;
    this.includeIq = include;
    if (this.socket !== null || this.reconnectTimer !== null) {
      this.close();
      this.connect();
    }
  }

  close(): void {
    this.closedByUs = true;
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    if (this.socket !== null) {
      this.socket.close();
      this.socket = null;
    }
  }
}
