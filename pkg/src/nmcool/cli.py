"""Command-line front end.

Thin client over the HTTP service: by default the requests run in-process
against the ASGI app (no socket, no server process), `--server URL` points
the same client at a remote instance instead.  File output happens
client-side so the service stays stateless.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys

import httpx
import yaml

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise SystemExit(_fail(f"config file not found: {path}", EXIT_CONFIG))
    except yaml.YAMLError as exc:
        raise SystemExit(_fail(f"config parse error: {exc}", EXIT_CONFIG))
    if not isinstance(raw, dict):
        raise SystemExit(_fail("config root must be a mapping", EXIT_CONFIG))
    return raw


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


class _InProcessTransport(httpx.BaseTransport):
    """Sync bridge into the ASGI app: no socket, no server process."""

    def __init__(self, app) -> None:
        self._asgi = httpx.ASGITransport(app=app, raise_app_exceptions=False)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        async def _dispatch() -> httpx.Response:
            response = await self._asgi.handle_async_request(request)
            await response.aread()
            return response

        response = asyncio.run(_dispatch())
        return httpx.Response(
            status_code=response.status_code,
            headers=response.headers,
            content=response.content,
        )


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=None)
    from .service.app import app

    return httpx.Client(
        transport=_InProcessTransport(app), base_url="http://nmcool.internal", timeout=None
    )


def _detail(resp: httpx.Response) -> str:
    try:
        detail = resp.json().get("detail")
    except Exception:
        return resp.text
    if isinstance(detail, dict):
        path = detail.get("path")
        msg = detail.get("message", "")
        return f"{path}: {msg}" if path else str(msg)
    return str(detail)


def cmd_run(args: argparse.Namespace) -> int:
    raw = _load_config(args.config)
    with _client(args.server) as client:
        resp = client.post("/run", json={"config": raw, "jobs": args.jobs})
    if resp.status_code == 400:
        return _fail(f"config rejected: {_detail(resp)}", EXIT_CONFIG)
    if resp.status_code != 200:
        return _fail(f"solver failure: {_detail(resp)}", EXIT_SOLVER)

    from .output import stamp, write_experiment
    from .runner import ExperimentResult, Table

    body = resp.json()
    result = ExperimentResult(
        mode=body["mode"],
        tables=[Table(t["name"], t["header"], t["rows"]) for t in body["tables"]],
        metadata=stamp(body["metadata"]),
        summary=body["summary"],
    )
    written = write_experiment(result, args.out, body["output_prefix"])
    for path in written:
        print(path)
    print(json.dumps(body["summary"], sort_keys=True))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    raw = _load_config(args.config)
    with _client(args.server) as client:
        resp = client.post("/validate", json={"config": raw})
    if resp.status_code != 200:
        return _fail(f"validation service failure: {_detail(resp)}", EXIT_SOLVER)
    report = resp.json()
    for v in report["violations"]:
        print(f"violation: {v['path']}: {v['message']}")
    for w in report["warnings"]:
        print(f"warning: {w}")
    if report["ok"]:
        print("config ok")
        return EXIT_OK
    return EXIT_CONFIG


def cmd_params(args: argparse.Namespace) -> int:
    raw = _load_config(args.config)
    with _client(args.server) as client:
        resp = client.post("/params", json={"config": raw})
    if resp.status_code == 400:
        return _fail(f"config rejected: {_detail(resp)}", EXIT_CONFIG)
    if resp.status_code != 200:
        return _fail(f"service failure: {_detail(resp)}", EXIT_SOLVER)
    body = resp.json()
    for name in ("omega_0", "detuning", "G_h", "kappa_0", "kappa_h", "n_th"):
        prov = body["provenance"].get(name, "")
        print(f"{name:10s} {body['params'][name]!r:>26s}  [{prov}]")
    print(json.dumps(body["summary"], sort_keys=True))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nmcool", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config, write CSV/JSON outputs")
    p_run.add_argument("config", help="YAML config file")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel workers for sweeps")
    p_run.add_argument("--out", default=".", help="output directory (default: cwd)")
    p_run.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    p_val.add_argument("--server", default=None)
    p_val.set_defaults(func=cmd_validate)

    p_par = sub.add_parser("params", help="derive effective parameters and print them")
    p_par.add_argument("config")
    p_par.add_argument("--server", default=None)
    p_par.set_defaults(func=cmd_params)

    p_srv = sub.add_parser("serve", help="run the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8410)
    p_srv.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:  # _load_config signals through SystemExit
        code = exc.code
        return code if isinstance(code, int) else EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
