"""Thin command-line client for the ethlab service.

Every subcommand issues HTTP requests against the FastAPI app; by default the
app runs in-process over an ASGI transport (no server needed), and --server
points the same client at a remote instance.  File outputs are written by the
client from CSV payloads in the responses.

Exit codes: 0 success, 1 usage error, 2 numerical error, 3 identity-check
failure.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

USAGE_EXIT = 1
NUMERICAL_EXIT = 2
IDENTITY_EXIT = 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class ServiceClient:
    """POST JSON to the service, either remotely or through the in-process app."""

    def __init__(self, server: str | None = None):
        self.server = server
        self._app = None
        if server is None:
            from .service.app import create_app

            self._app = create_app()

    def post(self, path: str, payload: dict) -> dict:
        if self.server is not None:
            with httpx.Client(base_url=self.server.rstrip("/"), timeout=None) as client:
                resp = client.post(path, json=payload)
        else:
            resp = asyncio.run(self._post_asgi(path, payload))
        return self._handle(resp)

    async def _post_asgi(self, path: str, payload: dict) -> httpx.Response:
        transport = httpx.ASGITransport(app=self._app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://ethlab.internal", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    @staticmethod
    def _handle(resp: httpx.Response) -> dict:
        if resp.status_code == 422:
            raise CliError(f"invalid request: {resp.text}", USAGE_EXIT)
        if resp.status_code == 400:
            body = resp.json()
            code = USAGE_EXIT if body.get("family") == "usage" else NUMERICAL_EXIT
            raise CliError(f"{body.get('error')}: {body.get('message')}", code)
        if resp.status_code != 200:
            raise CliError(f"service error {resp.status_code}: {resp.text}", NUMERICAL_EXIT)
        return resp.json()


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; we reserve 2 for numerics
        raise CliError(message, USAGE_EXIT)


def _parse_n_list(args) -> list[int]:
    if args.n is not None:
        return [int(x) for x in str(args.n).split(",") if x.strip()]
    if args.n_min is not None and args.n_max is not None:
        return list(range(args.n_min, args.n_max + 1))
    raise CliError("provide --n (single or comma list) or --n-min/--n-max", USAGE_EXIT)


def _add_chain_flags(p: argparse.ArgumentParser, n_list: bool = False):
    if n_list:
        p.add_argument("--n", help="site count, or comma list for sweeps")
        p.add_argument("--n-min", type=int)
        p.add_argument("--n-max", type=int)
    else:
        p.add_argument("--n", type=int, required=True)
    p.add_argument("--g", type=float, default=1.05)
    p.add_argument("--h", type=float, default=0.1)


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--nb1", type=int, default=1, help="base block size")
    p.add_argument(
        "--ensemble",
        default="canonical,microcanonical:beta-energy,microcanonical:zero",
        help="comma list: uniform, canonical, microcanonical:zero, microcanonical:beta-energy, pure",
    )
    p.add_argument("--shell-center", choices=["zero", "beta-energy"], default="beta-energy")
    p.add_argument("--shell-width", type=float, default=0.2, help="width factor")
    p.add_argument("--width-mode", choices=["per_site", "absolute"], default="per_site")
    p.add_argument("--rank-policy", choices=["strict", "pseudo"], default="strict")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--allow-residual", action="store_true")


def build_parser() -> _Parser:
    parser = _Parser(prog="ethlab", description=__doc__)
    parser.add_argument("--server", help="base URL of a running ethlab service")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="diagonalize one chain and report the spectrum")
    _add_chain_flags(p)
    p.add_argument("--table", action="store_true", help="also write eigenvalue table CSV")
    p.add_argument("--out", default=".")

    p = sub.add_parser("measures", help="per-eigenstate measures for one (N, ensemble)")
    _add_chain_flags(p)
    _add_run_flags(p)
    p.add_argument("--out", default=".")

    p = sub.add_parser("sweep", help="full sweep over N and ensembles; writes CSVs")
    _add_chain_flags(p, n_list=True)
    _add_run_flags(p)
    p.add_argument("--config", help="key=value config file; flags override")
    p.add_argument("--out", default=".")

    p = sub.add_parser("check-identities", help="run the exact-identity suite")
    _add_chain_flags(p)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--nb1", type=int, default=1)
    p.add_argument("--rank-policy", choices=["strict", "pseudo"], default="strict")
    p.add_argument("--out")

    p = sub.add_parser("fit", help="decay-constant fit of ln(column) vs N from a summary CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--column", required=True)
    p.add_argument("--ensemble", required=True)
    p.add_argument("--out")

    p = sub.add_parser("diagnostics", help="density of states, E(beta), mutual information tables")
    _add_chain_flags(p)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--out", default=".")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _write(out_dir: str, name: str, text: str) -> Path:
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / name
    target.write_text(text)
    return target


def _sweep_payload(args, n_list: list[int]) -> dict:
    return {
        "n_list": n_list,
        "g": args.g,
        "h": args.h,
        "beta": args.beta,
        "n_b1": args.nb1,
        "ensembles": [x.strip() for x in args.ensemble.split(",") if x.strip()],
        "shell_center": args.shell_center,
        "shell_width_factor": args.shell_width,
        "width_mode": args.width_mode,
        "rank_policy": args.rank_policy,
        "workers": args.workers,
        "allow_residual": args.allow_residual,
    }


def _apply_config_file(args) -> None:
    from .experiments import parse_config_text

    data = parse_config_text(Path(args.config).read_text())
    mapping = {
        "n_list": "n",
        "g": "g",
        "h": "h",
        "beta": "beta",
        "n_b1": "nb1",
        "ensembles": "ensemble",
        "shell_center": "shell_center",
        "shell_width_factor": "shell_width",
        "width_mode": "width_mode",
        "rank_policy": "rank_policy",
        "workers": "workers",
        "out_dir": "out",
    }
    defaults = build_parser().parse_args(["sweep"])
    for key, attr in mapping.items():
        if key not in data:
            continue
        # flags win: only fill values the user left at their defaults
        if getattr(args, attr, None) in (None, getattr(defaults, attr, None)):
            value = data[key]
            if attr in ("beta", "g", "h", "shell_width"):
                value = float(value)
            elif attr in ("nb1", "workers"):
                value = int(value)
            setattr(args, attr, value)
    if "allow_residual" in data and not args.allow_residual:
        args.allow_residual = str(data["allow_residual"]).lower() in ("1", "true", "yes")


def run(args) -> int:
    client = ServiceClient(args.server)

    if args.command == "spectrum":
        body = client.post(
            "/api/spectrum",
            {"n": args.n, "g": args.g, "h": args.h, "include_table": args.table},
        )
        table = body.pop("table_csv", None)
        if table:
            path = _write(args.out, "spectrum.csv", table)
            body["table"] = str(path)
        print(json.dumps(body, indent=2))
        return 0

    if args.command in ("measures", "sweep"):
        if args.command == "sweep" and args.config:
            _apply_config_file(args)
        n_list = [args.n] if args.command == "measures" else _parse_n_list(args)
        n_list = [int(x) for x in n_list]
        body = client.post("/api/sweep", _sweep_payload(args, n_list))
        rec = _write(args.out, "records.csv", body["records_csv"])
        summ = _write(args.out, "summary.csv", body["summary_csv"])
        print(json.dumps({"records": str(rec), "summary": str(summ)}, indent=2))
        return 0

    if args.command == "check-identities":
        body = client.post(
            "/api/identities",
            {
                "n": args.n,
                "g": args.g,
                "h": args.h,
                "beta": args.beta,
                "n_b1": args.nb1,
                "rank_policy": args.rank_policy,
            },
        )
        text = json.dumps(body, indent=2)
        if args.out:
            Path(args.out).write_text(text + "\n")
        print(text)
        return 0 if body["passed"] else IDENTITY_EXIT

    if args.command == "fit":
        csv_text = Path(args.infile).read_text()
        body = client.post(
            "/api/fit",
            {"summary_csv": csv_text, "column": args.column, "ensemble": args.ensemble},
        )
        text = json.dumps(body, indent=2)
        if args.out:
            Path(args.out).write_text(text + "\n")
        print(text)
        return 0

    if args.command == "diagnostics":
        body = client.post(
            "/api/diagnostics",
            {"n": args.n, "g": args.g, "h": args.h, "beta": args.beta, "bins": args.bins},
        )
        paths = {}
        for key, name in (
            ("dos_csv", "dos.csv"),
            ("canonical_csv", "canonical_hist.csv"),
            ("e_beta_csv", "e_beta.csv"),
            ("mi_csv", "mutual_information.csv"),
        ):
            paths[name] = str(_write(args.out, name, body[key]))
        print(json.dumps(paths, indent=2))
        return 0

    if args.command == "serve":
        import uvicorn

        from .service.app import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    raise CliError(f"unknown command {args.command!r}", USAGE_EXIT)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return run(args)
    except CliError as exc:
        print(f"ethlab: {exc}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"ethlab: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
