"""Command-line entry point.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 network error.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import geo as geomod
from . import ghx
from .dataflow import EvaluationEngine
from .errors import DataError, NetworkError
from .geometry import export_obj, to_render_coords
from .relay import SessionConfig, Strategy
from .wire import Role


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _load_graph(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}")
    return ghx.parse_document(text)


def _cmd_parse(args) -> int:
    graph, warnings = _load_graph(args.file)
    print(f"vertices: {len(graph.vertices)}")
    print(f"components: {len(graph.components())}")
    print(f"edges: {len(graph.edges)} ({len(graph.structural_edges)} structural)")
    print(f"groups: {len(graph.groups)}")
    for warning in warnings:
        print(f"warning: {warning}")
    return 0


def _cmd_validate(args) -> int:
    graph, _ = _load_graph(args.file)
    violations = graph.validate()
    for violation in violations:
        print(violation)
    if violations:
        return 2
    print("ok")
    return 0


def _apply_sets(engine: EvaluationEngine, assignments) -> None:
    for assignment in assignments or ():
        key, _, raw = assignment.partition("=")
        if not _:
            raise DataError(f"--set needs guid=value, got {assignment!r}")
        descriptor = engine.descriptor(key)
        if descriptor is None:
            matches = [d for d in engine.parameters() if d.name == key]
            if len(matches) != 1:
                raise DataError(f"no parameter {key!r}")
            descriptor = matches[0]
        value: object
        if raw.lower() in ("true", "false"):
            value = raw.lower() == "true"
        else:
            try:
                value = float(raw)
            except ValueError:
                raise DataError(f"bad value {raw!r} for {key!r}")
        engine.set_parameter(descriptor.guid, value)


def _cmd_eval(args) -> int:
    graph, warnings = _load_graph(args.file)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    engine = EvaluationEngine(graph)
    _apply_sets(engine, args.set)
    result = engine.solve()
    for issue in result.errors:
        print(f"error at {issue.vertex_id}: {issue.message}", file=sys.stderr)
    print(f"meshes: {len(result.meshes)}")
    total = sum(len(m.vertices) for m in result.meshes)
    print(f"vertices: {total}")
    if args.out:
        rendered = [to_render_coords(m) for m in result.meshes]
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(export_obj(rendered))
        print(f"wrote {args.out}")
    return 0


def _cmd_serve(args) -> int:
    from .server import RelayServer, parse_bind

    graph, warnings = _load_graph(args.file)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    engine = EvaluationEngine(graph, coalesce_window_ms=args.coalesce_ms)
    config = SessionConfig(
        strategy=Strategy.parse(args.strategy),
        min_interval_ms=args.rate_limit_ms,
        max_presence_queue=args.max_presence_queue)
    anchor = None
    if args.geo:
        from .geometry import GeoAnchor

        try:
            lat, lon, heading = (float(v) for v in args.geo.split(","))
        except ValueError:
            raise DataError(f"--geo needs LAT,LON,HEADING, got {args.geo!r}")
        anchor = GeoAnchor(lat=lat, lon=lon, heading=heading)
    try:
        ws_bind = parse_bind(args.ws_bind) if args.ws_bind else None
        server = RelayServer(
            engine, config, bind=parse_bind(args.bind), ws_bind=ws_bind,
            web_root=args.web_root,
            definition_id=os.path.basename(args.file), geo_anchor=anchor)
        server.start()
    except OSError as exc:
        raise NetworkError(f"cannot listen: {exc}")
    print(f"listening on port {server.port}", flush=True)
    if server.ws_port is not None:
        print(f"websocket on port {server.ws_port}", flush=True)
    try:
        import threading

        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


def _cmd_client(args) -> int:
    from .client import HeadlessClient, run_script
    from .server import parse_bind

    host, port = parse_bind(args.connect)
    role = Role.DESIGNER if args.role == "designer" else Role.VIEWER
    client = HeadlessClient(host, port, role)
    try:
        if args.script:
            if args.script == "-":
                lines = sys.stdin.read().splitlines()
            else:
                with open(args.script, "r", encoding="utf-8") as fh:
                    lines = fh.read().splitlines()
            run_script(client, lines, out=lambda s: print(s, flush=True))
        else:
            message = client.wait_for(object, timeout=5.0)
            from . import wire as wiremod

            print(wiremod.encode_text(message), flush=True)
    finally:
        client.close()
    return 0


def _cmd_speech(args) -> int:
    from .speech import apply_command, parse_command

    command = parse_command(args.command)
    graph, _ = _load_graph(args.file)
    vid = apply_command(graph, command)
    with open(args.file, "w", encoding="utf-8") as fh:
        fh.write(ghx.serialize_document(graph))
    print(vid)
    return 0


def _cmd_geo(args) -> int:
    if args.geo_op == "to3857":
        merc = geomod.to_web_mercator(geomod.LatLon(args.a, args.b))
        print(f"{merc.x!r} {merc.y!r}")
    elif args.geo_op == "to4326":
        pos = geomod.from_web_mercator(geomod.MercatorXY(args.a, args.b))
        print(f"{pos.lat!r} {pos.lon!r}")
    else:
        d = geomod.haversine_distance(geomod.LatLon(args.a, args.b),
                                      geomod.LatLon(args.c, args.d))
        print(f"{d!r}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="adflow",
                     description="headless algorithmic-design engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="summarize a definition file")
    p.add_argument("file")
    p.set_defaults(fn=_cmd_parse)

    p = sub.add_parser("validate", help="check a definition file")
    p.add_argument("file")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("eval", help="evaluate a definition into geometry")
    p.add_argument("file")
    p.add_argument("--set", action="append", metavar="GUID=VALUE")
    p.add_argument("--out", help="write render-space OBJ here")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("serve", help="run the engine + relay loop")
    p.add_argument("file")
    p.add_argument("--bind", default="127.0.0.1:7464")
    p.add_argument("--strategy", default="overwrite")
    p.add_argument("--rate-limit-ms", type=float, default=100.0)
    p.add_argument("--max-presence-queue", type=int, default=64)
    p.add_argument("--coalesce-ms", type=float, default=100.0)
    p.add_argument("--ws-bind", default=None,
                   help="optional host:port browser listener")
    p.add_argument("--geo", default=None, metavar="LAT,LON,HEADING",
                   help="anchor broadcast geometry at this location")
    p.add_argument("--web-root", default=None,
                   help="static files served from the browser listener")
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("client", help="headless scripted client")
    p.add_argument("--connect", required=True, metavar="HOST:PORT")
    p.add_argument("--role", choices=("designer", "viewer"),
                   default="designer")
    p.add_argument("--script", help="script file ('-' for stdin)")
    p.set_defaults(fn=_cmd_client)

    p = sub.add_parser("speech", help="apply a text command to a file")
    p.add_argument("command")
    p.add_argument("--file", required=True)
    p.set_defaults(fn=_cmd_speech)

    p = sub.add_parser("geo", help="geodesic conversions")
    geo_sub = p.add_subparsers(dest="geo_op", required=True)
    for name, arity in (("to3857", 2), ("to4326", 2), ("dist", 4)):
        q = geo_sub.add_parser(name)
        for arg in "abcd"[:arity]:
            q.add_argument(arg, type=float)
        q.set_defaults(fn=_cmd_geo)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("ADFLOW_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except NetworkError as exc:
        print(f"network error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
