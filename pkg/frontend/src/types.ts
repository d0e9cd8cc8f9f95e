// Wire-facing types, mirroring the live-service JSON schemas.

export interface FrameEvent {
  received_at_us: number;
  peer_addr: string;
  bw_code: number;
  bw_mhz: number | null;
  mcs: number;
  rssi: number[];
  csi_cnt: number;
  subcarriers: number[];
  magnitude: number[];
  phase: number[];
  i?: number[];
  q?: number[];
}

export interface StatsSnapshot {
  total_frames: number;
  frames_by_bandwidth: Record<string, number>;
  frames_by_mcs: Record<string, number>;
  avg_rssi_per_chain: number[];
  frames_per_second: number;
  decode_errors: number;
}

export interface SessionForm {
  band: "2.4g" | "5g";
  apAddress: string;
  reportTargetIp: string;
  frameType: number;
  staFilters: string[];
}

export type ViewKind = "magnitude" | "phase" | "iq";

export type ConnectionStatus = "connecting" | "live" | "stale" | "closed";

export interface Banner {
  kind: "error" | "info";
  text: string;
}

export interface ConsoleState {
  connection: ConnectionStatus;
  session: { band: string; filters: string[]; targetIp: string } | null;
  frames: FrameEvent[]; // ring of most recent events, newest last
  stats: StatsSnapshot | null;
  view: ViewKind;
  banner: Banner | null;
  lastEventAtMs: number | null;
}
