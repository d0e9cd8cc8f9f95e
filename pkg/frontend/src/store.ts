// Single store with a reducer-style update loop. All UI state changes
// flow through dispatch(); subscribers redraw from whole snapshots.

import type {
  Banner,
  ConsoleState,
  ConnectionStatus,
  FrameEvent,
  StatsSnapshot,
  ViewKind,
} from "./types";

export const FRAME_RING_CAPACITY = 64;
export const STALE_AFTER_MS = 2000;

export type Action =
  | { type: "connection"; status: ConnectionStatus }
  | { type: "frame"; event: FrameEvent; nowMs: number }
  | { type: "stats"; stats: StatsSnapshot }
  | { type: "view"; view: ViewKind }
  | { type: "banner"; banner: Banner | null }
  | { type: "session-started"; band: string; filters: string[]; targetIp: string }
  | { type: "session-stopped" };

export function initialState(): ConsoleState {
  return {
    connection: "connecting",
    session: null,
    frames: [],
    stats: null,
    view: "magnitude",
    banner: null,
    lastEventAtMs: null,
  };
}

export function update(state: ConsoleState, action: Action): ConsoleState {
  switch (action.type) {
    case "connection":
      return { ...state, connection: action.status };
    case "frame": {
      const frames = state.frames.concat([action.event]);
      if (frames.length > FRAME_RING_CAPACITY) {
        frames.splice(0, frames.length - FRAME_RING_CAPACITY);
      }
      return { ...state, frames, connection: "live", lastEventAtMs: action.nowMs };
    }
    case "stats":
      return { ...state, stats: action.stats };
    case "view":
      return { ...state, view: action.view };
    case "banner":
      return { ...state, banner: action.banner };
    case "session-started":
      return {
        ...state,
        banner: null,
        session: {
          band: action.band,
          filters: action.filters,
          targetIp: action.targetIp,
        },
      };
    case "session-stopped":
      return { ...state, session: null };
  }
}

export class Store {
  private state: ConsoleState = initialState();
  private listeners: Array<(s: ConsoleState) => void> = [];

  get(): ConsoleState {
    return this.state;
  }

  dispatch(action: Action): void {
    this.state = update(this.state, action);
    for (const fn of this.listeners) fn(this.state);
  }

  subscribe(fn: (s: ConsoleState) => void): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((f) => f !== fn);
    };
  }
}

// Derived models for the statistics pane.

export interface StatsRow {
  label: string;
  count: number;
}

export function bandwidthRows(stats: StatsSnapshot): StatsRow[] {
  return Object.entries(stats.frames_by_bandwidth)
    .map(([code, count]) => ({ label: bandwidthLabel(Number(code)), count }))
    .sort((a, b) => a.label.localeCompare(b.label));
}

export function mcsRows(stats: StatsSnapshot): StatsRow[] {
  return Object.entries(stats.frames_by_mcs)
    .map(([mcs, count]) => ({ label: `MCS ${mcs}`, count }))
    .sort((a, b) => Number(a.label.slice(4)) - Number(b.label.slice(4)));
}

export function bandwidthLabel(code: number): string {
  const mhz: Record<number, string> = {
    0: "20 MHz",
    1: "40 MHz",
    2: "80 MHz",
    3: "160 MHz",
    4: "80+80 MHz",
  };
  return mhz[code] ?? `code ${code}`;
}

// The pane shows these sums next to the total; they must always agree.
export function sumCounts(rows: StatsRow[]): number {
  return rows.reduce((acc, r) => acc + r.count, 0);
}

export function activeChains(stats: StatsSnapshot): Array<{ chain: number; rssi: number }> {
  return stats.avg_rssi_per_chain
    .map((rssi, chain) => ({ chain, rssi }))
    .filter((entry) => entry.rssi !== 0);
}

export function isStale(state: ConsoleState, nowMs: number): boolean {
  if (state.lastEventAtMs === null) return false;
  return nowMs - state.lastEventAtMs > STALE_AFTER_MS;
}
