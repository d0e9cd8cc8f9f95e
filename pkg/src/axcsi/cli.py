"""Command-line entry point for every workflow.

Subcommands: probe, start, stop, capture, parse, stats, replay, emulate,
serve. Exit codes: 0 success, 1 usage error, 2 protocol/transport error,
3 data error. Diagnostics go to stderr; --json switches stdout to
machine-readable output.

Port defaults follow the device protocol (commands 8021, reports to
8023 from source 8024) and can be overridden per-flag or via the
AXCSI_COMMAND_PORT / AXCSI_LISTEN_PORT / AXCSI_REPORT_SOURCE_PORT /
AXCSI_HTTP_PORT environment variables.
"""

import argparse
import csv
import json
import os
import signal
import sys
import time

from . import __version__, _kernels, analysis, capture, wire
from .collector import Collector, CollectorConfig
from .controller import Controller, ControllerConfig, ControllerError, SessionPlan
from .emulator import (
    ChannelModel,
    Emulator,
    EmulatorConfig,
    FlatChannel,
    MultipathChannel,
    Station,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PROTOCOL = 2
EXIT_DATA = 3


def _env_port(name, default):
    value = os.environ.get(name)
    return int(value) if value else default


class CliParser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_int(text):
    """Accept decimal or 0x-prefixed hex (frame types, ports)."""
    return int(text, 0)


def build_parser():
    parser = CliParser(prog="axcsi",
                       description="CSI capture toolkit for AX3000 APs")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="{probe,start,stop,capture,parse,stats,replay,emulate,serve}")

    def add_ap_flags(p):
        p.add_argument("--ap", required=True, metavar="IP",
                       help="AP gateway address")
        p.add_argument("--port", type=parse_int,
                       default=_env_port("AXCSI_COMMAND_PORT", 8021),
                       help="AP command port (default 8021)")

    p = sub.add_parser("probe", help="check whether the AP answers")
    add_ap_flags(p)
    p.add_argument("--timeout", type=float, default=2.0)
    p.add_argument("--retries", type=int, default=3)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("start", help="run the session configuration sequence")
    add_ap_flags(p)
    p.add_argument("--band", required=True, choices=["2.4g", "5g"])
    p.add_argument("--frame-type", type=parse_int, default=wire.FRAME_TYPE_QOS_DATA,
                   help="packed PPDU type byte, hex or decimal (default 0x22)")
    p.add_argument("--filter", action="append", default=[], metavar="MAC",
                   help="STA filter entry, repeatable up to 5")
    p.add_argument("--target-ip", required=True,
                   help="where the AP should send CSI reports")
    p.add_argument("--delay", type=float, default=0.5,
                   help="inter-command delay in seconds (>= 0.5)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_start)

    p = sub.add_parser("stop", help="disable CSI reporting")
    add_ap_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stop)

    p = sub.add_parser("capture", help="collect CSI reports into a file")
    p.add_argument("--bind", default="0.0.0.0")
    p.add_argument("--port", type=parse_int,
                   default=_env_port("AXCSI_LISTEN_PORT", 8023))
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--filter", action="append", default=[], metavar="MAC",
                   help="only keep reports from these peers")
    p.add_argument("--duration", type=float, default=None,
                   help="stop after N seconds (default: until interrupted)")
    p.add_argument("--window", type=int, default=4096)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_capture)

    p = sub.add_parser("parse", help="convert a capture file to CSV or JSON")
    p.add_argument("--in", dest="infile", required=True, metavar="PATH")
    p.add_argument("--out", default="-", metavar="PATH",
                   help="output path (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default=None,
                   help="default: by --out extension, else csv")
    p.add_argument("--json", action="store_true",
                   help="shorthand for --format json")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("stats", help="statistics of a capture file")
    p.add_argument("--in", dest="infile", required=True, metavar="PATH")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("replay", help="re-send a capture to a collector")
    p.add_argument("--in", dest="infile", required=True, metavar="PATH")
    p.add_argument("--target-ip", default="127.0.0.1")
    p.add_argument("--port", type=parse_int,
                   default=_env_port("AXCSI_LISTEN_PORT", 8023))
    p.add_argument("--rate", type=float, default=1.0,
                   help="speed factor (1.0 = original timing)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("emulate", help="run the AP emulator")
    p.add_argument("--bind", default="0.0.0.0")
    p.add_argument("--port", type=parse_int,
                   default=_env_port("AXCSI_COMMAND_PORT", 8021))
    p.add_argument("--report-source-port", type=parse_int,
                   default=_env_port("AXCSI_REPORT_SOURCE_PORT", 8024))
    p.add_argument("--report-port", type=parse_int,
                   default=_env_port("AXCSI_LISTEN_PORT", 8023))
    p.add_argument("--station", action="append", default=[], metavar="MAC",
                   help="synthetic STA MAC, repeatable (default one STA)")
    p.add_argument("--bw", type=int, default=3, choices=range(5),
                   help="bandwidth code for synthetic stations")
    p.add_argument("--mcs", type=int, default=9)
    p.add_argument("--frame-rate", type=float, default=50.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gain", type=float, default=1000.0,
                   help="flat channel gain (ignored when --tap is given)")
    p.add_argument("--tap", action="append", default=[], metavar="DELAY:AMP",
                   help="multipath tap, repeatable, e.g. 4:1000 or 4:800+60j")
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--lenient", action="store_true",
                   help="accept out-of-order commands")
    p.add_argument("--duration", type=float, default=None)
    p.set_defaults(func=cmd_emulate)

    p = sub.add_parser("serve", help="run the HTTP/WebSocket live service")
    p.add_argument("--bind", default="127.0.0.1", help="HTTP listen address")
    p.add_argument("--http-port", type=parse_int,
                   default=_env_port("AXCSI_HTTP_PORT", 8080))
    p.add_argument("--listen", default="0.0.0.0", help="collector bind address")
    p.add_argument("--listen-port", type=parse_int,
                   default=_env_port("AXCSI_LISTEN_PORT", 8023))
    p.add_argument("--command-port", type=parse_int,
                   default=_env_port("AXCSI_COMMAND_PORT", 8021))
    p.add_argument("--capture", default=None, metavar="PATH",
                   help="also append received reports to a capture file")
    p.add_argument("--console", default=None, metavar="DIR",
                   help="serve a built web console from this directory")
    p.set_defaults(func=cmd_serve)

    return parser


def emit(args, human, payload):
    if getattr(args, "json", False):
        print(json.dumps(payload))
    else:
        print(human)


# --- subcommand bodies -------------------------------------------------------

def cmd_probe(args):
    config = ControllerConfig(ap_address=args.ap, command_port=args.port,
                              availability_timeout=args.timeout,
                              availability_retries=args.retries)
    with Controller(config) as ctl:
        available = ctl.check_availability()
    emit(args, "OK" if available else "unavailable",
         {"available": available, "ap": args.ap})
    return EXIT_OK if available else EXIT_PROTOCOL


def cmd_start(args):
    if len(args.filter) > 5:
        print("axcsi start: error: at most 5 --filter entries", file=sys.stderr)
        return EXIT_USAGE
    config = ControllerConfig(ap_address=args.ap, command_port=args.port,
                              inter_command_delay=args.delay)
    plan = SessionPlan(band=wire.Band.from_str(args.band),
                       report_target_ip=args.target_ip,
                       frame_type=args.frame_type,
                       sta_filters=tuple(args.filter))
    with Controller(config) as ctl:
        state = ctl.start_session(plan)
    emit(args, f"session started: band {args.band}, reporting to {args.target_ip}",
         {"state": state.phase.value, "band": args.band})
    return EXIT_OK


def cmd_stop(args):
    # One-shot invocation has no session state: just send the disable
    # command directly.
    config = ControllerConfig(ap_address=args.ap, command_port=args.port)
    with Controller(config) as ctl:
        ctl.send_raw(wire.CommandFrame.wrap(wire.ReportEnable(0)))
    emit(args, "report disabled", {"state": "stopped"})
    return EXIT_OK


def cmd_capture(args):
    config = CollectorConfig(
        bind_address=args.bind, listen_port=args.port,
        window_capacity=args.window,
        mac_allowlist=frozenset(args.filter) if args.filter else None,
        capture_path=args.out)
    collector = Collector(config)
    collector.start()
    print(f"listening on {args.bind}:{collector.address[1]}, writing {args.out} "
          "(Ctrl-C to stop)", file=sys.stderr)
    try:
        deadline = None if args.duration is None else time.monotonic() + args.duration
        while deadline is None or time.monotonic() < deadline:
            time.sleep(0.2)
    except KeyboardInterrupt:
        pass
    finally:
        collector.stop()
    snap = collector.stats_snapshot()
    if collector.capture_warning:
        print(collector.capture_warning, file=sys.stderr)
    emit(args, f"captured {collector.received} frames "
               f"({snap.decode_errors} decode errors)",
         {"frames": collector.received, "decode_errors": snap.decode_errors,
          "path": args.out})
    return EXIT_OK


def _frame_json(record):
    frame = record.frame
    return {
        "received_at_us": record.received_at_us,
        "source_ip": record.source[0],
        "source_port": record.source[1],
        "raw_hex": record.raw.hex(),
        "frame": {
            "magic": frame.magic,
            "vendor": frame.vendor,
            "chip_id": frame.chip_id,
            "timestamp_us": frame.timestamp_us,
            "bw": frame.bw,
            "phy_mode": frame.phy_mode,
            "peer_addr": wire.format_mac(frame.peer_addr),
            "rssi": [int(v) for v in frame.rssi],
            "agc_gain": [int(v) for v in frame.agc_gain],
            "mcs": frame.mcs,
            "gi_type": frame.gi_type,
            "coding": frame.coding,
            "stbc": frame.stbc,
            "dcm": frame.dcm,
            "csi_cnt": frame.csi_cnt,
            "csi_i": [int(v) for v in frame.csi_i[:frame.csi_cnt]],
            "csi_q": [int(v) for v in frame.csi_q[:frame.csi_cnt]],
        },
    }


def cmd_parse(args):
    fmt = args.format or ("json" if args.json or str(args.out).endswith(".json")
                          else "csv")
    records = capture.read_capture(args.infile)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    count = 0
    try:
        if fmt == "csv":
            writer = csv.writer(out)
            writer.writerow(["received_at_us", "source_ip", "source_port",
                             "timestamp_us", "peer_addr", "bw_code", "bw_mhz",
                             "mcs", "csi_cnt"])
            for rec in records:
                frame = rec.frame
                try:
                    mhz = frame.bandwidth.mhz
                except ValueError:
                    mhz = ""
                writer.writerow([rec.received_at_us, rec.source[0], rec.source[1],
                                 frame.timestamp_us,
                                 wire.format_mac(frame.peer_addr),
                                 frame.bw, mhz, frame.mcs, frame.csi_cnt])
                count += 1
        else:
            payload = {"version": 1, "records": []}
            for rec in records:
                payload["records"].append(_frame_json(rec))
                count += 1
            json.dump(payload, out)
            out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()
    print(f"parsed {count} records", file=sys.stderr)
    return EXIT_OK


def cmd_stats(args):
    acc = analysis.StatsAccumulator()
    for rec in capture.read_capture(args.infile):
        acc.accumulate(rec)
    snap = acc.snapshot()
    if args.json:
        print(snap.to_json())
        return EXIT_OK
    by_bw = ", ".join(
        f"{wire.Bandwidth(code).mhz}MHz(code {code})={n}"
        if 0 <= code <= 4 else f"code {code}={n}"
        for code, n in sorted(snap.frames_by_bandwidth.items()))
    by_mcs = ", ".join(f"mcs{m}={n}"
                       for m, n in sorted(snap.frames_by_mcs.items()))
    active = [(c, v) for c, v in enumerate(snap.avg_rssi_per_chain) if v != 0.0]
    by_chain = ", ".join(f"chain{c}={v:.1f}" for c, v in active)
    print(f"total frames      : {snap.total_frames}")
    print(f"frames per second : {snap.frames_per_second:.2f} (5 s window)")
    print(f"decode errors     : {snap.decode_errors}")
    print(f"by bandwidth      : {by_bw or '-'}")
    print(f"by MCS            : {by_mcs or '-'}")
    print(f"avg RSSI per chain: {by_chain or '-'}")
    return EXIT_OK


def cmd_replay(args):
    sent = capture.replay_capture(args.infile, (args.target_ip, args.port),
                                  rate=args.rate)
    emit(args, f"replayed {sent} datagrams to {args.target_ip}:{args.port}",
         {"sent": sent, "target": f"{args.target_ip}:{args.port}"})
    return EXIT_OK


def _parse_tap(text):
    delay, _, amp = text.partition(":")
    return int(delay), complex(amp or "1")


def cmd_emulate(args):
    macs = args.station or ["02:00:00:00:00:01"]
    stations = tuple(Station(mac, bandwidth=args.bw, mcs=args.mcs) for mac in macs)
    if args.tap:
        shape = MultipathChannel(tuple(_parse_tap(t) for t in args.tap))
    else:
        shape = FlatChannel(args.gain)
    config = EmulatorConfig(
        bind_address=args.bind, command_port=args.port,
        report_source_port=args.report_source_port,
        report_port=args.report_port,
        strict_ordering=not args.lenient,
        stations=stations, frame_rate_hz=args.frame_rate,
        channel=ChannelModel(shape, noise_sigma=args.noise_sigma),
        rng_seed=args.seed)
    emu = Emulator(config)
    emu.start()
    print(f"emulated AP on {args.bind}:{emu.command_address[1]} "
          f"({len(stations)} station(s), {args.frame_rate} Hz, "
          f"kernel backend {_kernels.BACKEND}; Ctrl-C to stop)", file=sys.stderr)
    try:
        deadline = None if args.duration is None else time.monotonic() + args.duration
        while deadline is None or time.monotonic() < deadline:
            time.sleep(0.2)
    except KeyboardInterrupt:
        pass
    finally:
        emu.stop()
    print(f"emitted {emu.frames_sent} frames, "
          f"{emu.rejections} rejected commands", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args):
    import uvicorn

    from .service import ServiceConfig, create_app

    collector = Collector(CollectorConfig(
        bind_address=args.listen, listen_port=args.listen_port,
        capture_path=args.capture))
    collector.start()
    app = create_app(collector, ServiceConfig(command_port=args.command_port))
    if args.console:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=args.console, html=True),
                  name="console")
    try:
        uvicorn.run(app, host=args.bind, port=args.http_port, log_level="warning")
    except KeyboardInterrupt:
        pass
    finally:
        collector.stop()
    return EXIT_OK


def main(argv=None):
    # Default SIGINT handling so Ctrl-C in long-running subcommands is a
    # clean KeyboardInterrupt even under exotic parents.
    try:
        signal.signal(signal.SIGINT, signal.default_int_handler)
    except ValueError:
        pass  # not on the main thread (tests)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (wire.WireError, capture.CaptureError) as exc:
        print(f"axcsi {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"axcsi {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ControllerError as exc:
        print(f"axcsi {args.command}: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except OSError as exc:
        print(f"axcsi {args.command}: transport error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except ValueError as exc:
        print(f"axcsi {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
