"""Command-line entry points.

    telemon api        serve the HTTP API
    telemon ingest     run the telemetry ingest loop against a broker
    telemon simulate   publish simulated bracelet telemetry
    telemon replay     republish a JSONL capture
    telemon fit-server run the bundled fitness-cloud fixture server
    telemon demo       full in-process pipeline walkthrough (no broker needed)

``--broker mqtt://host[:port]`` needs the optional paho-mqtt dependency;
``--broker local`` uses the in-process broker (demo/simulation in one
process).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from urllib.parse import urlparse

from .bus import InProcessBroker, MqttConnector
from .crypto import FieldCipher
from .fitserver import FitFixtureServer, FixtureDataset
from .ingest import IngestService, alert_hook
from .simulator import SimProfile, replay_log, run_sim
from .store import Store


def _broker_from_url(url: str):
    if url == "local":
        return InProcessBroker()
    parsed = urlparse(url)
    if parsed.scheme != "mqtt":
        raise SystemExit(f"unsupported broker url {url!r}; use mqtt://host[:port] or local")
    return MqttConnector(parsed.hostname or "localhost", parsed.port or 1883,
                         parsed.username, parsed.password)


def _open_store(args) -> Store:
    return Store(args.db, FieldCipher.from_config(args.key))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--db", default="telemon.db", help="storage location (SQLite path)")
    parser.add_argument("--key", default=None, help="base64 encryption key (default: env)")
    parser.add_argument("--log-level", default="INFO")


def cmd_api(args) -> int:
    import uvicorn

    from .api import ApiConfig, create_app

    store = _open_store(args)
    app = create_app(store, ApiConfig(port=args.port))
    uvicorn.run(
        app,
        host=args.host,
        port=args.port,
        ssl_certfile=args.tls_cert,
        ssl_keyfile=args.tls_key,
    )
    return 0


def cmd_ingest(args) -> int:
    store = _open_store(args)
    broker = _broker_from_url(args.broker)
    service = IngestService(broker, store, on_sample=alert_hook(store)).start()
    print(f"ingesting from {args.broker}; Ctrl+C to stop")
    try:
        while True:
            time.sleep(10)
            print(json.dumps(service.stats()))
    except KeyboardInterrupt:
        service.stop()
    return 0


def cmd_simulate(args) -> int:
    profile = SimProfile.load(args.profile)
    if args.seed is not None:
        profile = dataclasses.replace(profile, seed=args.seed)
    broker = _broker_from_url(args.broker)
    connection = broker.connect(f"sim-{profile.device_id}")
    report = run_sim(profile, connection, args.duration, realtime=not args.fast)
    print(json.dumps({"published": report.published, "total": report.total}))
    return 0


def cmd_replay(args) -> int:
    broker = _broker_from_url(args.broker)
    connection = broker.connect("replay")
    report = replay_log(args.log, connection, speed=args.speed)
    print(json.dumps({
        "published": report.published,
        "skipped_lines": report.skipped_lines,
    }))
    return 0


def cmd_fit_server(args) -> int:
    dataset = FixtureDataset.load(args.dataset)
    server = FitFixtureServer(dataset, port=args.port).start()
    print(f"fixture server on {server.base_url}; Ctrl+C to stop")
    try:
        while True:
            time.sleep(60)
    except KeyboardInterrupt:
        server.stop()
    return 0


def cmd_demo(args) -> int:
    """Simulator -> broker -> ingest -> storage, all in one process."""
    from .model import ParameterKind

    store = _open_store(args)
    broker = InProcessBroker()
    service = IngestService(broker, store, on_sample=alert_hook(store)).start()

    device_id = "brc-demo1"
    if store.device_owner(device_id) is None:
        store.add_device(device_id, "pat-demo", device_id, 0)
    profile = SimProfile(device_id=device_id, seed=7)
    connection = broker.connect("sim")
    report = run_sim(profile, connection, duration_s=args.duration)
    print(f"published {report.total} messages: {report.published}")
    print(f"ingest counters: {json.dumps(service.stats())}")
    window = store.query_window(
        "pat-demo", ParameterKind.HEART_RATE, 0, 2**62
    )
    print(f"heart-rate samples stored: {len(window)}; latest value {window[-1].value}")
    service.stop()
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="telemon")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("api", help="serve the HTTP API")
    _add_common(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--tls-cert", default=None)
    p.add_argument("--tls-key", default=None)
    p.set_defaults(func=cmd_api)

    p = sub.add_parser("ingest", help="run the telemetry ingest loop")
    _add_common(p)
    p.add_argument("--broker", default="mqtt://localhost")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("simulate", help="publish simulated telemetry")
    p.add_argument("--profile", required=True, help="profile JSON path")
    p.add_argument("--broker", default="mqtt://localhost")
    p.add_argument("--duration", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=None, help="override the profile seed")
    p.add_argument("--fast", action="store_true", help="publish without pacing")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="republish a JSONL capture")
    p.add_argument("--log", required=True)
    p.add_argument("--broker", default="mqtt://localhost")
    p.add_argument("--speed", type=float, default=1.0)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("fit-server", help="run the fitness fixture server")
    p.add_argument("--dataset", required=True, help="fixture dataset JSON")
    p.add_argument("--port", type=int, default=9443)
    p.set_defaults(func=cmd_fit_server)

    p = sub.add_parser("demo", help="in-process pipeline walkthrough")
    _add_common(p)
    p.add_argument("--duration", type=float, default=10.0)
    p.set_defaults(func=cmd_demo)

    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(args, "log_level", "INFO"))
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
