"""Process entry point: serve the API, run headless simulations, execute queries.

Exit codes: 0 success, 1 operational error (port taken, server unreachable,
unwritable directory), 2 user-input error (bad flags, bad SQL).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import schema
from .factory import default_master_data
from .pipeline import Pipeline
from .sensors import SensorConfigError, parse_config
from .store import ColumnStore
from .query import PlanError, SqlSyntaxError, run_sql

DEFAULT_PORT = 8080
DEFAULT_SEED = 42
PORT_ENV_VAR = "PLANTPULSE_PORT"


class CliError(Exception):
    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _default_port() -> int:
    raw = os.environ.get(PORT_ENV_VAR)
    if raw is None:
        return DEFAULT_PORT
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{PORT_ENV_VAR} must be an integer, got {raw!r}", 2) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plantpulse",
        description="Factory demo: simulated business + sensor streams with SQL analytics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="start the HTTP server (zero-config defaults)")
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--seed", type=int, default=DEFAULT_SEED)
    serve.add_argument("--scale", type=float, default=1.0,
                       help="virtual ms per wall ms (realtime mode)")
    serve.add_argument("--clock", choices=["realtime", "stepped"], default="realtime")
    serve.add_argument("--sensor-config", metavar="PATH", default=None)
    serve.add_argument("--max-rows", type=int, default=None, metavar="N")

    run = sub.add_parser("run", help="headless stepped simulation with CSV export")
    run.add_argument("--duration", type=int, required=True, metavar="SECONDS")
    run.add_argument("--seed", type=int, default=DEFAULT_SEED)
    run.add_argument("--export-dir", required=True, metavar="PATH")

    query = sub.add_parser("query", help="execute one query and print the result")
    query.add_argument("--url", default=None, help="server base URL, e.g. http://localhost:8080")
    query.add_argument("--export-dir", default=None, metavar="PATH",
                       help="offline mode: re-ingest CSV exports and query locally")
    query.add_argument("--csv", action="store_true", help="print RFC-4180 CSV")
    query.add_argument("--file", default=None, metavar="PATH", help="read SQL from a file")
    query.add_argument("sql", nargs="?", default=None)

    return parser


# -- serve ---------------------------------------------------------------------


def cmd_serve(args) -> int:
    from .server import AppServer

    port = args.port if args.port is not None else _default_port()
    if not 1 <= port <= 65535:
        raise CliError(f"port must be in [1, 65535], got {port}", 2)
    if args.scale <= 0:
        raise CliError("scale must be positive", 2)

    sensor_config = None
    if args.sensor_config is not None:
        try:
            text = Path(args.sensor_config).read_text(encoding="utf-8")
        except OSError as err:
            raise CliError(f"cannot read sensor config: {err}", 1) from None
        try:
            workplaces = {w.id for w in default_master_data().workplaces}
            sensor_config = parse_config(text, workplaces)
        except SensorConfigError as err:
            raise CliError(
                "invalid sensor config:\n  " + "\n  ".join(err.errors), 2
            ) from None

    kwargs = {}
    if args.max_rows is not None:
        if args.max_rows < 1:
            raise CliError("--max-rows must be positive", 2)
        kwargs["max_rows"] = args.max_rows
    pipeline = Pipeline(
        seed=args.seed,
        sensor_config=sensor_config,
        clock_mode=args.clock,
        scale=args.scale,
        **kwargs,
    )
    static_dir = _find_static_dir()
    try:
        server = AppServer(pipeline, port=port, static_dir=static_dir)
    except OSError as err:
        raise CliError(f"cannot bind port {port}: {err}", 1) from None
    print(f"plantpulse serving on http://127.0.0.1:{port} (seed {args.seed})")
    if static_dir:
        print(f"ui assets: {static_dir}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def _find_static_dir():
    candidate = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    return candidate if (candidate / "index.html").is_file() else None


# -- run -------------------------------------------------------------------------


def cmd_run(args) -> int:
    if args.duration <= 0:
        raise CliError("--duration must be a positive number of seconds", 2)
    export_dir = Path(args.export_dir)
    try:
        export_dir.mkdir(parents=True, exist_ok=True)
        probe = export_dir / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as err:
        raise CliError(f"export dir not writable: {err}", 1) from None

    pipeline = Pipeline(seed=args.seed, clock_mode="stepped")
    pipeline.start()
    total_ms = args.duration * 1000
    done = 0
    while done < total_ms:
        step = min(100, total_ms - done)
        pipeline.step(step)
        done += step
    snap = pipeline.store.snapshot()
    for table in schema.TABLE_ORDER:
        path = export_dir / f"{table}.csv"
        with path.open("w", encoding="utf-8", newline="") as fh:
            pipeline.store.export_csv(snap, table, fh)
        print(f"{table}: {snap.row_count(table)} rows")
    return 0


# -- query -------------------------------------------------------------------------


def cmd_query(args) -> int:
    if (args.url is None) == (args.export_dir is None):
        raise CliError("query needs exactly one of --url or --export-dir", 2)
    if (args.sql is None) == (args.file is None):
        raise CliError("query needs exactly one of SQL text or --file", 2)
    sql = args.sql
    if args.file is not None:
        try:
            sql = Path(args.file).read_text(encoding="utf-8")
        except OSError as err:
            raise CliError(f"cannot read {args.file}: {err}", 1) from None

    if args.url is not None:
        columns, rows = _query_server(args.url, sql)
    else:
        columns, rows = _query_offline(Path(args.export_dir), sql)
    _print_result(columns, rows, as_csv=args.csv)
    return 0


def _query_server(url: str, sql: str):
    import urllib.error
    import urllib.request

    body = json.dumps({"sql": sql}).encode("utf-8")
    request = urllib.request.Request(
        url.rstrip("/") + "/api/query",
        data=body,
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(request, timeout=35) as response:
            payload = json.loads(response.read().decode("utf-8"))
    except urllib.error.HTTPError as err:
        detail = err.read().decode("utf-8", "replace")
        try:
            parsed = json.loads(detail)
            message = parsed.get("error", detail)
            offset = parsed.get("offset")
            where = f" (offset {offset})" if offset is not None else ""
            raise CliError(f"query failed: {message}{where}", 2) from None
        except json.JSONDecodeError:
            raise CliError(f"query failed: {detail}", 2) from None
    except urllib.error.URLError as err:
        raise CliError(f"server unreachable: {err.reason}", 1) from None
    columns = [(c["name"], c["type"]) for c in payload["columns"]]
    return columns, [tuple(r) for r in payload["rows"]]


def _query_offline(export_dir: Path, sql: str):
    if not export_dir.is_dir():
        raise CliError(f"no such export dir: {export_dir}", 1)
    store = _reingest(export_dir)
    try:
        result = run_sql(sql, store.snapshot())
    except SqlSyntaxError as err:
        raise CliError(f"syntax error: {err.message} (offset {err.offset})", 2) from None
    except PlanError as err:
        raise CliError(f"semantic error: {err.message}", 2) from None
    return result.columns, result.rows


def _reingest(export_dir: Path) -> ColumnStore:
    """Load a `run` export back into a fresh store; one query path for all modes."""
    import csv as csv_mod

    store = ColumnStore.with_catalog()
    for table in schema.TABLE_ORDER:
        path = export_dir / f"{table}.csv"
        if not path.is_file():
            continue
        with path.open("r", encoding="utf-8", newline="") as fh:
            reader = csv_mod.reader(fh)
            header = next(reader, None)
            if header is None:
                continue
            specs = store.schema_of(table)
            assert [s.name for s in specs] == header, f"{table}: unexpected header"
            rows = []
            for record in reader:
                row = []
                for spec, field in zip(specs, record):
                    if field == "":
                        row.append(None)
                    elif spec.type in (schema.INT64, schema.TIMESTAMP):
                        row.append(int(field))
                    elif spec.type == schema.DECIMAL64:
                        row.append(float(field))
                    else:
                        row.append(field)
                rows.append(tuple(row))
            if rows:
                store.append(table, rows)
    return store


def _print_result(columns, rows, as_csv: bool):
    import csv as csv_mod

    if as_csv:
        writer = csv_mod.writer(sys.stdout)
        writer.writerow([name for name, _ in columns])
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])
        return
    names = [name for name, _ in columns]
    rendered = [["NULL" if v is None else str(v) for v in row] for row in rows]
    widths = [
        max(len(names[i]), *(len(r[i]) for r in rendered)) if rendered else len(names[i])
        for i in range(len(names))
    ]
    print("  ".join(name.ljust(widths[i]) for i, name in enumerate(names)))
    print("  ".join("-" * widths[i] for i in range(len(names))))
    for row in rendered:
        print("  ".join(row[i].ljust(widths[i]) for i in range(len(names))))
    print(f"({len(rows)} row{'s' if len(rows) != 1 else ''})")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return cmd_serve(args)
        if args.command == "run":
            return cmd_run(args)
        return cmd_query(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
