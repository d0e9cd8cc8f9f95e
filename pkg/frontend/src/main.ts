// DOM wiring: configuration form, live chart, statistics pane.

import { ApiClient, ApiError } from "./api";
import { TraceChart } from "./charts";
import {
  Store,
  activeChains,
  bandwidthRows,
  isStale,
  mcsRows,
  sumCounts,
} from "./store";
import { FrameStream } from "./stream";
import type { ConsoleState, ViewKind } from "./types";
import { parseFrameType, splitFilters, validateForm } from "./validate";

const REDRAW_MIN_INTERVAL_MS = 1000 / 30;
const STATS_POLL_MS = 1000;

const TRACE_COLORS: Record<ViewKind, string> = {
  magnitude: "#53b4f5",
  phase: "#f5a953",
  iq: "#6ef08c",
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function setText(id: string, text: string): void {
  el(id).textContent = text;
}

export function startConsole(): void {
  const store = new Store();
  const api = new ApiClient("");
  const wsBase = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}`;
  const stream = new FrameStream(wsBase, {
    onFrame: (event) => store.dispatch({ type: "frame", event, nowMs: Date.now() }),
    onStatus: (status) => store.dispatch({ type: "connection", status }),
  });

  const chart = new TraceChart(el<HTMLCanvasElement>("chart"));
  const form = el<HTMLFormElement>("session-form");
  const banner = el<HTMLDivElement>("banner");
  const errorsBox = el<HTMLDivElement>("form-errors");

  // --- configuration pane -------------------------------------------------

  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const fields = {
      apAddress: el<HTMLInputElement>("ap-address").value,
      reportTargetIp: el<HTMLInputElement>("target-ip").value,
      frameType: el<HTMLInputElement>("frame-type").value,
      staFilters: splitFilters(el<HTMLInputElement>("sta-filters").value),
    };
    const errors = validateForm(fields);
    errorsBox.textContent = Object.values(errors).join("; ");
    if (Object.keys(errors).length > 0) return; // inline error, no request

    const band = el<HTMLSelectElement>("band").value as "2.4g" | "5g";
    try {
      await api.startSession({
        band,
        apAddress: fields.apAddress,
        reportTargetIp: fields.reportTargetIp,
        frameType: parseFrameType(fields.frameType)!,
        staFilters: fields.staFilters,
      });
      store.dispatch({
        type: "session-started",
        band,
        filters: fields.staFilters,
        targetIp: fields.reportTargetIp,
      });
    } catch (err) {
      const text =
        err instanceof ApiError ? err.message : `request failed: ${err}`;
      store.dispatch({ type: "banner", banner: { kind: "error", text } });
    }
  });

  el<HTMLButtonElement>("stop-button").addEventListener("click", async () => {
    try {
      await api.stopSession();
      store.dispatch({ type: "session-stopped" });
      store.dispatch({
        type: "banner",
        banner: { kind: "info", text: "reporting stopped" },
      });
    } catch (err) {
      const text =
        err instanceof ApiError ? err.message : `request failed: ${err}`;
      store.dispatch({ type: "banner", banner: { kind: "error", text } });
    }
  });

  // --- view selector ----------------------------------------------------------

  for (const view of ["magnitude", "phase", "iq"] as ViewKind[]) {
    el<HTMLButtonElement>(`view-${view}`).addEventListener("click", () => {
      store.dispatch({ type: "view", view });
      stream.setIncludeIq(view === "iq");
    });
  }

  // --- statistics polling --------------------------------------------------------

  async function pollStats(): Promise<void> {
    try {
      store.dispatch({ type: "stats", stats: await api.stats() });
    } catch {
      // stats pane keeps the previous snapshot while the service is away
    }
  }
  setInterval(pollStats, STATS_POLL_MS);
  void pollStats();

  // --- render loop ------------------------------------------------------------

  let lastDrawMs = 0;
  let needsDraw = true;
  store.subscribe(() => {
    needsDraw = true;
  });

  function render(state: ConsoleState): void {
    const stale = isStale(state, Date.now());
    const status = stale && state.connection === "live" ? "stale" : state.connection;
    const badge = el<HTMLSpanElement>("status-badge");
    badge.textContent = status;
    badge.className = `badge badge-${status}`;

    banner.hidden = state.banner === null;
    if (state.banner) {
      banner.textContent = state.banner.text;
      banner.className = `banner banner-${state.banner.kind}`;
    }

    setText(
      "session-info",
      state.session
        ? `session: ${state.session.band} -> ${state.session.targetIp}` +
            (state.session.filters.length
              ? ` (filters: ${state.session.filters.join(", ")})`
              : "")
        : "no active session",
    );

    const latest = state.frames[state.frames.length - 1];
    if (!latest) {
      chart.clear("no frames yet — configure a session to start the stream");
      setText("frame-info", "");
      setText("readout", "");
    } else {
      const color = TRACE_COLORS[state.view];
      if (state.view === "magnitude") {
        chart.drawLine(latest.subcarriers, latest.magnitude, color);
        const mid = latest.magnitude[Math.floor(latest.magnitude.length / 2)];
        setText("readout", `mid-band magnitude: ${mid.toFixed(1)}`);
      } else if (state.view === "phase") {
        chart.drawLine(latest.subcarriers, latest.phase, color, {
          min: -Math.PI,
          max: Math.PI,
        });
        setText("readout", "phase (rad) vs subcarrier");
      } else if (latest.i && latest.q) {
        chart.drawScatter(latest.i, latest.q, color);
        setText("readout", "I/Q constellation");
      } else {
        chart.clear("waiting for I/Q samples…");
        setText("readout", "");
      }
      setText(
        "frame-info",
        `${latest.peer_addr} | ${latest.bw_mhz ?? "?"} MHz | MCS ${latest.mcs} | ` +
          `${latest.csi_cnt} subcarriers`,
      );
    }

    renderStats(state);
  }

  function renderStats(state: ConsoleState): void {
    const stats = state.stats;
    if (!stats) return;
    setText("stat-total", String(stats.total_frames));
    setText("stat-fps", stats.frames_per_second.toFixed(1));
    setText("stat-errors", String(stats.decode_errors));

    const bw = bandwidthRows(stats);
    const mcs = mcsRows(stats);
    // Displayed invariant: per-bandwidth and per-MCS sums match the total.
    setText("stat-bw-sum", String(sumCounts(bw)));
    setText("stat-mcs-sum", String(sumCounts(mcs)));

    const fill = (tbodyId: string, rows: Array<{ label: string; count: number }>) => {
      const tbody = el<HTMLTableSectionElement>(tbodyId);
      tbody.innerHTML = "";
      for (const row of rows) {
        const tr = document.createElement("tr");
        const name = document.createElement("td");
        name.textContent = row.label;
        const count = document.createElement("td");
        count.textContent = String(row.count);
        tr.append(name, count);
        tbody.append(tr);
      }
    };
    fill("bw-rows", bw);
    fill("mcs-rows", mcs);
    fill(
      "rssi-rows",
      activeChains(stats).map(({ chain, rssi }) => ({
        label: `chain ${chain}`,
        count: Number(rssi.toFixed(1)),
      })),
    );
  }

  function tick(nowMs: number): void {
    if (needsDraw && nowMs - lastDrawMs >= REDRAW_MIN_INTERVAL_MS) {
      needsDraw = false;
      lastDrawMs = nowMs;
      render(store.get());
    }
    requestAnimationFrame(tick);
  }
  requestAnimationFrame(tick);
  setInterval(() => {
    needsDraw = true; // keep badges fresh even without new frames
  }, 500);

  stream.connect();
}

startConsole();
