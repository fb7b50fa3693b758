"""Command-line entry point: a thin client of the HTTP service.

Without --server the app runs in-process (same filesystem, no daemon
needed); with --server URL the same requests go to a remote instance.
Dataset and report contents travel in the message bodies, so files are
always written on the client side.

Exit codes: 0 success, 2 usage/config error, 3 partial sweep failure,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from . import __version__
from .config import RunConfig, parse_grid_spec

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARTIAL = 3
EXIT_NUMERICAL = 4


class ServiceClient:
    """POSTs to a remote server, or to an in-process app when server is None."""

    def __init__(self, server: str | None = None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app())

    def post(self, path: str, payload: dict) -> tuple[int, dict]:
        resp = self._client.post(path, json=payload)
        try:
            body = resp.json()
        except ValueError:
            body = {"error": "BadResponse", "message": resp.text}
        return resp.status_code, body


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _error_exit(status: int, body: dict) -> int:
    if status == 422:
        return _fail(EXIT_USAGE, f"invalid request: {json.dumps(body.get('detail', body))}")
    kind = body.get("kind", "usage")
    code = EXIT_NUMERICAL if kind == "numerical" else EXIT_USAGE
    return _fail(code, f"{body.get('error', 'Error')}: {body.get('message', body)}")


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _parse_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_config(args) -> RunConfig:
    data: dict = {}
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if getattr(args, "model", None):
        data.setdefault("model", {})["kind"] = args.model
    if getattr(args, "jprime", None):
        data.setdefault("model", {})["j_prime"] = _parse_floats(args.jprime)
    if getattr(args, "sizes", None):
        data.setdefault("model", {})["sizes"] = _parse_ints(args.sizes)
    if getattr(args, "grid", None):
        data["grid"] = {"spec": args.grid, "values": None}
    if getattr(args, "measure", None):
        data.setdefault("analysis", {})["measures"] = [args.measure]
        data.setdefault("analysis", {})["measure"] = args.measure
    if getattr(args, "gc_policy", None):
        data.setdefault("analysis", {})["gc_policy"] = args.gc_policy
    if getattr(args, "seed", None) is not None:
        data.setdefault("solver", {})["seed"] = args.seed
    if getattr(args, "workers", None):
        data.setdefault("solver", {})["workers"] = args.workers
    if getattr(args, "out", None):
        data.setdefault("io", {})["out_dir"] = args.out
    return RunConfig.model_validate(data)


def cmd_sweep(args) -> int:
    try:
        config = build_config(args)
    except (ValidationError, ValueError, OSError) as exc:
        return _fail(EXIT_USAGE, str(exc))
    client = ServiceClient(args.server)
    status, body = client.post("/sweep", {"config": config.model_dump()})
    if status != 200:
        return _error_exit(status, body)
    out_dir = Path(config.io.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"sweep_{config.model.kind}.csv"
    csv_path.write_text(body["csv"], encoding="utf-8")
    meta_path = out_dir / f"sweep_{config.model.kind}.meta.json"
    meta_path.write_text(json.dumps(body["metadata"], indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    print(f"wrote {csv_path} ({body['n_records']} records, {body['n_failed']} failed)")
    print(f"wrote {meta_path}")
    if body["n_failed"] > 0:
        return _fail(EXIT_PARTIAL, f"{body['n_failed']} grid points failed (see CSV)")
    return EXIT_OK


def cmd_fit(args) -> int:
    payload: dict = {
        "mode": args.mode,
        "measure": args.measure,
        "gc_policy": args.gc_policy,
        "restarts": args.restarts,
    }
    try:
        if args.mode == "identity":
            payload["report"] = json.loads(Path(args.dataset).read_text(encoding="utf-8"))
        else:
            payload["csv"] = Path(args.dataset).read_text(encoding="utf-8")
    except OSError as exc:
        return _fail(EXIT_USAGE, str(exc))
    except json.JSONDecodeError as exc:
        return _fail(EXIT_USAGE, f"{args.dataset}: {exc}")
    client = ServiceClient(args.server)
    status, body = client.post("/fit", payload)
    if status != 200:
        return _error_exit(status, body)
    report = body["report"]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / f"fit_{args.mode}_{args.measure}.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                           encoding="utf-8")
    print(json.dumps(report, indent=2, sort_keys=True))
    print(f"wrote {report_path}")
    if body.get("rescaled_csv"):
        rescaled_path = out_dir / f"fit_collapse_{args.measure}_rescaled.csv"
        rescaled_path.write_text(body["rescaled_csv"], encoding="utf-8")
        print(f"wrote {rescaled_path}")
    return EXIT_OK


def cmd_synth(args) -> int:
    params: dict = {}
    for item in args.param or []:
        if "=" not in item:
            return _fail(EXIT_USAGE, f"--param needs key=value, got {item!r}")
        key, value = item.split("=", 1)
        try:
            params[key] = float(value)
        except ValueError:
            params[key] = value
    try:
        grid = list(parse_grid_spec(args.grid)) if ":" in args.grid else _parse_floats(args.grid)
        sizes = _parse_floats(args.sizes)
    except ValueError as exc:
        return _fail(EXIT_USAGE, str(exc))
    payload = {
        "kind": args.kind, "params": params, "sizes": sizes, "grid": grid,
        "noise": args.noise, "seed": args.seed, "measure": args.measure,
        "model": args.model, "j_prime": args.jprime,
    }
    client = ServiceClient(args.server)
    status, body = client.post("/synth", payload)
    if status != 200:
        return _error_exit(status, body)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(body["csv"], encoding="utf-8")
    meta = out.with_name(out.stem + ".meta.json")
    meta.write_text(json.dumps(body["metadata"], indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    print(f"wrote {out}")
    print(f"wrote {meta}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    try:
        config = build_config(args)
    except (ValidationError, ValueError, OSError) as exc:
        return _fail(EXIT_USAGE, str(exc))
    payload = {
        "n_configs": args.n_configs,
        "seed": config.solver.seed,
        "dense_cap": config.solver.dense_oracle_cap,
        "corrupt_matrix_element": args.corrupt,
    }
    client = ServiceClient(args.server)
    status, body = client.post("/oracle-check", payload)
    if status != 200:
        return _error_exit(status, body)
    checks = body["checks"]
    failed = [c for c in checks if not c["passed"]]
    for c in failed:
        print(f"FAIL {c['name']}: {c['detail']}")
    print(f"oracle-check: {len(checks) - len(failed)}/{len(checks)} checks passed")
    if failed:
        return _fail(EXIT_NUMERICAL, f"{len(failed)} oracle checks disagreed")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kondotri",
        description="Kondo-chain tripartite entanglement: sweeps, fits, and cross-checks.",
    )
    parser.add_argument("--version", action="version", version=f"kondotri {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_config=True):
        p.add_argument("--server", default=None,
                       help="URL of a running service (default: run in-process)")
        if with_config:
            p.add_argument("--config", default=None, help="JSON config file")

    p_sweep = sub.add_parser("sweep", help="run a (g, N) sweep and write the dataset CSV")
    add_common(p_sweep)
    p_sweep.add_argument("--model", choices=["2ikm", "2ckm"])
    p_sweep.add_argument("--jprime", help="comma list of J' values")
    p_sweep.add_argument("--sizes", help="comma list of total sizes N")
    p_sweep.add_argument("--grid", help="control grid spec min:max:count[:log]")
    p_sweep.add_argument("--measure", choices=["e1", "e2"])
    p_sweep.add_argument("--gc-policy", dest="gc_policy")
    p_sweep.add_argument("--out", help="output directory")
    p_sweep.add_argument("--seed", type=int)
    p_sweep.add_argument("--workers", type=int)
    p_sweep.set_defaults(func=cmd_sweep)

    p_fit = sub.add_parser("fit", help="fit exponents from a dataset CSV (or report, for identity)")
    add_common(p_fit, with_config=False)
    p_fit.add_argument("dataset", help="dataset CSV path (fit-report JSON for --mode identity)")
    p_fit.add_argument("--mode", required=True, choices=["power", "collapse", "ansatz", "identity"])
    p_fit.add_argument("--measure", default="e1", choices=["e1", "e2"])
    p_fit.add_argument("--gc-policy", dest="gc_policy", default="peak",
                       help="peak | fit | fixed=VALUE")
    p_fit.add_argument("--restarts", type=int, default=8)
    p_fit.add_argument("--out", default="runs")
    p_fit.set_defaults(func=cmd_fit)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset from a closed form")
    add_common(p_synth, with_config=False)
    p_synth.add_argument("--kind", required=True, choices=["ansatz6", "collapse7"])
    p_synth.add_argument("--param", action="append",
                         help="key=value (ansatz6: a b beta lam g_c; collapse7: nu beta g_c [shape amplitude])")
    p_synth.add_argument("--sizes", required=True, help="comma list of sizes")
    p_synth.add_argument("--grid", required=True,
                         help="grid spec min:max:count[:log] or comma list "
                              "(g values for ansatz6, master-curve x values for collapse7)")
    p_synth.add_argument("--noise", type=float, default=0.0)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--measure", default="e1", choices=["e1", "e2"])
    p_synth.add_argument("--model", default="2ikm", choices=["2ikm", "2ckm"])
    p_synth.add_argument("--jprime", type=float, default=0.4)
    p_synth.add_argument("--out", required=True, help="output CSV path")
    p_synth.set_defaults(func=cmd_synth)

    p_oracle = sub.add_parser("oracle-check", help="dense-vs-Lanczos and Schmidt-vs-PPT battery")
    add_common(p_oracle)
    p_oracle.add_argument("--n-configs", dest="n_configs", type=int, default=20)
    p_oracle.add_argument("--seed", type=int)
    p_oracle.add_argument("--corrupt", action="store_true",
                          help="fault-injection test hook: corrupt one matrix element")
    p_oracle.set_defaults(func=cmd_oracle_check)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
