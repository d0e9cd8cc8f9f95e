"""HTTP/WebSocket front end over the collector and controller.

Routes (JSON, versioned under /api/v1):

    GET    /api/v1/health          service liveness + kernel backend
    GET    /api/v1/stats           statistics snapshot
    GET    /api/v1/frames/latest   last n frame events (?n=, ?iq=1)
    POST   /api/v1/session         run the configuration sequence
    DELETE /api/v1/session         stop the active session
    WS     /ws/csi                 frame events, at most 30/s, newest wins

Session conflicts (band lock, concurrent operation) map to 409 with a
machine-readable reason; controller transport failures map to 502;
malformed requests to 400. The stream never applies backpressure to the
collector: a slow consumer just sees fewer events (drop counter grows).
"""

import asyncio
import queue
import threading
from dataclasses import dataclass

from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, field_validator

from . import _kernels, wire
from .analysis import decimate_indices, to_spectrum
from .controller import (
    BandLockedError,
    BusyError,
    Controller,
    ControllerConfig,
    SessionPlan,
    StateError,
    TransportError,
)

API_PREFIX = "/api/v1"
STREAM_PATH = "/ws/csi"
MAX_PLOT_POINTS = 256
STREAM_EVENTS_PER_S = 30.0


@dataclass(frozen=True)
class ServiceConfig:
    command_port: int = 8021
    inter_command_delay: float = 0.5
    max_plot_points: int = MAX_PLOT_POINTS
    stream_events_per_s: float = STREAM_EVENTS_PER_S


class SessionRequest(BaseModel):
    band: str
    ap_address: str
    report_target_ip: str
    frame_type: int = Field(default=wire.FRAME_TYPE_QOS_DATA, ge=0, le=255)
    sta_filters: list = Field(default_factory=list, max_length=5)

    @field_validator("band")
    @classmethod
    def _band(cls, v):
        wire.Band.from_str(v)
        return v

    @field_validator("ap_address", "report_target_ip")
    @classmethod
    def _ip(cls, v):
        wire.parse_ipv4(v)
        return v

    @field_validator("sta_filters")
    @classmethod
    def _macs(cls, v):
        for mac in v:
            wire.parse_mac(mac)
        return v


def frame_event(record, max_points=MAX_PLOT_POINTS, include_iq=False):
    """Stream/REST representation of one CSI record (decimated plots)."""
    frame = record.frame
    view = to_spectrum(frame)
    idx = decimate_indices(frame.csi_cnt, max_points)
    try:
        bw_mhz = frame.bandwidth.mhz
    except ValueError:
        bw_mhz = None
    event = {
        "received_at_us": record.received_at_us,
        "peer_addr": wire.format_mac(frame.peer_addr),
        "bw_code": int(frame.bw),
        "bw_mhz": bw_mhz,
        "mcs": int(frame.mcs),
        "rssi": [int(v) for v in frame.rssi],
        "csi_cnt": int(frame.csi_cnt),
        "subcarriers": idx,
        "magnitude": [float(view.magnitude[k]) for k in idx],
        "phase": [float(view.phase_rad[k]) for k in idx],
    }
    if include_iq:
        event["i"] = [int(frame.csi_i[k]) for k in idx]
        event["q"] = [int(frame.csi_q[k]) for k in idx]
    return event


def create_app(collector, config=None, controller_factory=Controller):
    """Build the service around a running Collector."""
    cfg = config or ServiceConfig()
    app = FastAPI(title="axcsi live service")
    app.state.collector = collector
    app.state.config = cfg
    app.state.controllers = {}
    app.state.active = None  # {"ap_address": ..., "band": ...}
    app.state.stream_drops = 0
    app.state.session_lock = threading.Lock()

    @app.exception_handler(RequestValidationError)
    async def invalid_request(request: Request, exc):
        detail = [{"loc": list(e.get("loc", ())), "msg": str(e.get("msg", ""))}
                  for e in exc.errors()]
        return JSONResponse(status_code=400,
                            content={"reason": "invalid_request",
                                     "detail": detail})

    def get_controller(ap_address):
        ctl = app.state.controllers.get(ap_address)
        if ctl is None:
            ctl = controller_factory(ControllerConfig(
                ap_address=ap_address,
                command_port=cfg.command_port,
                inter_command_delay=cfg.inter_command_delay))
            app.state.controllers[ap_address] = ctl
        return ctl

    @app.get(f"{API_PREFIX}/health")
    def health():
        return {"status": "ok", "kernel_backend": _kernels.BACKEND}

    @app.get(f"{API_PREFIX}/stats")
    def stats():
        return collector.stats_snapshot().to_dict()

    @app.get(f"{API_PREFIX}/frames/latest")
    def latest_frames(n: int = 10, iq: bool = False):
        n = max(0, min(n, collector.config.window_capacity))
        return [frame_event(rec, cfg.max_plot_points, include_iq=iq)
                for rec in collector.latest(n)]

    @app.post(f"{API_PREFIX}/session")
    def start_session(request: SessionRequest):
        if not app.state.session_lock.acquire(blocking=False):
            return JSONResponse(status_code=409, content={"reason": "busy"})
        try:
            plan = SessionPlan(
                band=wire.Band.from_str(request.band),
                report_target_ip=request.report_target_ip,
                frame_type=request.frame_type,
                sta_filters=tuple(request.sta_filters))
            ctl = get_controller(request.ap_address)
            try:
                state = ctl.start_session(plan)
            except BandLockedError as exc:
                return JSONResponse(status_code=409,
                                    content={"reason": "band_locked",
                                             "detail": str(exc)})
            except BusyError:
                return JSONResponse(status_code=409, content={"reason": "busy"})
            except TransportError as exc:
                return JSONResponse(status_code=502,
                                    content={"reason": "transport",
                                             "detail": str(exc)})
            app.state.active = {"ap_address": request.ap_address,
                                "band": request.band}
            return {"state": state.phase.value,
                    "band": str(state.locked_band),
                    "ap_address": request.ap_address}
        finally:
            app.state.session_lock.release()

    @app.delete(f"{API_PREFIX}/session")
    def stop_session():
        if not app.state.session_lock.acquire(blocking=False):
            return JSONResponse(status_code=409, content={"reason": "busy"})
        try:
            active = app.state.active
            if active is None:
                return JSONResponse(status_code=409,
                                    content={"reason": "no_active_session"})
            ctl = get_controller(active["ap_address"])
            try:
                state = ctl.stop_session()
            except StateError as exc:
                return JSONResponse(status_code=409,
                                    content={"reason": "not_reporting",
                                             "detail": str(exc)})
            except TransportError as exc:
                return JSONResponse(status_code=502,
                                    content={"reason": "transport",
                                             "detail": str(exc)})
            app.state.active = None
            return {"state": state.phase.value}
        finally:
            app.state.session_lock.release()

    @app.websocket(STREAM_PATH)
    async def ws_csi(websocket: WebSocket):
        include_iq = websocket.query_params.get("iq") in ("1", "true")
        await websocket.accept()
        sub = collector.subscribe()
        interval = 1.0 / cfg.stream_events_per_s
        try:
            while True:
                await asyncio.sleep(interval)
                newest = None
                skipped = -1
                while True:  # drain; only the newest event is sent
                    try:
                        newest = sub.get_nowait()
                        skipped += 1
                    except queue.Empty:
                        break
                if newest is None:
                    continue
                app.state.stream_drops += max(0, skipped)
                await websocket.send_json(
                    frame_event(newest, cfg.max_plot_points, include_iq))
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            collector.unsubscribe(sub)

    return app
