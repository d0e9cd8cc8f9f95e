// HTTP client for the live service (/api/v1).

import type { SessionForm, StatsSnapshot } from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public reason: string,
    message?: string,
  ) {
    super(message ?? `${reason} (HTTP ${status})`);
  }
}

export const BAND_LOCKED_HINT =
  "AP is locked to the other band — reboot the emulator/AP, then retry.";

async function errorFrom(resp: Response): Promise<ApiError> {
  let reason = "error";
  let detail = "";

  try {
    const body = await resp.json();
    reason = body.reason ?? reason;
    detail = typeof body.detail === "string" ? body.detail : "";
  } catch {
    // non-JSON error body; keep defaults
  }
  if (reason === "band_locked") {
    return new ApiError(resp.status, reason, BAND_LOCKED_HINT);
  }
  return new ApiError(resp.status, reason, detail || undefined);
}

export class ApiClient {
  constructor(private base: string = "") {}

  private url(path: string): string {
    return `${this.base}/api/v1${path}`;
  }

  async health(): Promise<{ status: string }> {
    const resp = await fetch(this.url("/health"));
    if (!resp.ok) throw await errorFrom(resp);
    return resp.json();
  }

  async stats(): Promise<StatsSnapshot> {
    const resp = await fetch(this.url("/stats"));
    if (!resp.ok) throw await errorFrom(resp);
    return resp.json();
  }

  async startSession(form: SessionForm): Promise<{ state: string; band: string }> {
    const resp = await fetch(this.url("/session"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        band: form.band,
        ap_address: form.apAddress,
        report_target_ip: form.reportTargetIp,
        frame_type: form.frameType,
        sta_filters: form.staFilters,
      }),
    });
    if (!resp.ok) throw await errorFrom(resp);
    return resp.json();
  }

  async stopSession(): Promise<{ state: string }> {
    const resp = await fetch(this.url("/session"), { method: "DELETE" });
    if (!resp.ok) throw await errorFrom(resp);
    return resp.json();
  }
}
