import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError, BAND_LOCKED_HINT } from "../src/api";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

const form = {
  band: "5g" as const,
  apAddress: "127.0.0.1",
  reportTargetIp: "127.0.0.1",
  frameType: 0x22,
  staFilters: ["01:02:03:04:05:06"],
};

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ApiClient.startSession", () => {
  it("posts the wire-format body to /api/v1/session", async () => {
    const fetchMock = vi.fn(async () =>
      jsonResponse(200, { state: "reporting", band: "5g" }),
    );
    vi.stubGlobal("fetch", fetchMock);

    const result = await new ApiClient().startSession(form);
    expect(result.state).toBe("reporting");
    expect(fetchMock).toHaveBeenCalledOnce();
    const [url, init] = fetchMock.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("/api/v1/session");
    expect(init.method).toBe("POST");
    expect(JSON.parse(String(init.body))).toEqual({
      band: "5g",
      ap_address: "127.0.0.1",
      report_target_ip: "127.0.0.1",
      frame_type: 34,
      sta_filters: ["01:02:03:04:05:06"],
    });
  });

  it("surfaces 409 band_locked with the reboot hint", async () => {
    vi.stubGlobal("fetch", async () =>
      jsonResponse(409, { reason: "band_locked", detail: "locked to 5g" }),
    );
    const err = await new ApiClient().startSession(form).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.reason).toBe("band_locked");
    expect(err.message).toBe(BAND_LOCKED_HINT);
  });

  it("surfaces 502 transport failures", async () => {
    vi.stubGlobal("fetch", async () =>
      jsonResponse(502, { reason: "transport", detail: "send failed" }),
    );
    const err = await new ApiClient().startSession(form).catch((e) => e);
    expect(err.status).toBe(502);
    expect(err.reason).toBe("transport");
  });

  it("handles non-JSON error bodies", async () => {
    vi.stubGlobal("fetch", async () => new Response("oops", { status: 500 }));
    const err = await new ApiClient().startSession(form).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.reason).toBe("error");
  });
});

describe("ApiClient.stopSession", () => {
  it("issues DELETE and returns the state", async () => {
    const fetchMock = vi.fn(async () => jsonResponse(200, { state: "stopped" }));
    vi.stubGlobal("fetch", fetchMock);
    const result = await new ApiClient().stopSession();
    expect(result.state).toBe("stopped");
    const [url, init] = fetchMock.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe("/api/v1/session");
    expect(init.method).toBe("DELETE");
  });
});

describe("ApiClient.stats", () => {
  it("fetches the snapshot", async () => {
    vi.stubGlobal("fetch", async () =>
      jsonResponse(200, {
        total_frames: 5,
        frames_by_bandwidth: { "2": 5 },
        frames_by_mcs: { "9": 5 },
        avg_rssi_per_chain: new Array(16).fill(0),
        frames_per_second: 1,
        decode_errors: 0,
      }),
    );
    const stats = await new ApiClient().stats();
    expect(stats.total_frames).toBe(5);
    expect(stats.frames_by_bandwidth["2"]).toBe(5);
  });
});
