"""Command-line entry point.

A thin client over the service handlers: by default every command runs
in-process (no network); pass ``--server URL`` to route the same request
through a running HTTP service instead.  Figure commands write one CSV
per sweep plus a provenance JSON capturing the exact scenario.

Exit codes: 0 success, 2 configuration error, 3 numeric/domain error,
4 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .errors import ConfigError, UdneeError
from .params import emit_config
from .service import handlers


def _parse_set(values) -> dict:
    overrides = {}
    for item in values or []:
        if "=" not in item:
            raise ConfigError("expected KEY=VALUE", item)
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    return overrides


def _post(server: str, route: str, payload: dict) -> dict:
    import httpx

    response = httpx.post(server.rstrip("/") + route, json=payload, timeout=None)
    if response.status_code != 200:
        detail = response.json().get("detail", {})
        if isinstance(detail, dict) and "exit_code" in detail:
            err = UdneeError(detail.get("message", "service error"))
            err.exit_code = int(detail["exit_code"])
            raise err
        raise UdneeError(f"service error {response.status_code}: {response.text}")
    return response.json()


def _write_sweeps(payloads: list, out_dir: str) -> list:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for sweep in payloads:
        path = os.path.join(out_dir, f"{sweep['name']}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(sweep["columns"])
            writer.writerows(sweep["rows"])
        written.append(path)
        prov = os.path.join(out_dir, f"{sweep['name']}_params.json")
        with open(prov, "w", encoding="utf-8") as fh:
            json.dump({"scenario": sweep["scenario"], "notes": sweep["notes"]},
                      fh, indent=2, sort_keys=True)
        written.append(prov)
    return written


def _print_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, default=float))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="udnee",
        description="Energy-efficiency analytics and simulation for "
                    "ultra-dense cellular networks.")
    parser.add_argument("--config", help="YAML/JSON file of dotted-key overrides")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="inline override, e.g. --set channel.eta=0.5")
    parser.add_argument("--server", help="base URL of a running service; "
                                         "default is in-process execution")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytics", help="print the closed-form EE report as JSON")
    p.add_argument("--t", type=float, default=None, help="evaluation time")

    p = sub.add_parser("check", help="print the MF-validity diagnostic")
    p.add_argument("--threshold", type=float, default=100.0)

    p = sub.add_parser("episode", help="run one Monte Carlo episode")
    p.add_argument("--variant", default="mf-window",
                   choices=["full-comparison", "mf-window", "fixed-baseline"])
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--fixed-power", type=float, default=0.25,
                   help="transmit power of the fixed baseline")
    p.add_argument("--fading-mode", default="dynamic",
                   choices=["dynamic", "stationary"])
    p.add_argument("--trace", default=None, metavar="PATH",
                   help="write the event trace as JSON lines")

    for fig in ("fig3", "fig4", "fig5"):
        p = sub.add_parser(fig, help=f"reproduce {fig} and write its CSV")
        p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("fig6", help="long-term proposed-vs-baseline comparison")
    p.add_argument("--out", default=None)
    p.add_argument("--seeds", type=int, default=20, help="number of seeds")
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--fading-modes", default="dynamic",
                   help="comma list from {dynamic, stationary}")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    p = sub.add_parser("emit-config", help="write the resolved scenario to a file")
    p.add_argument("path")
    return parser


def _dispatch(args) -> int:
    overrides = _parse_set(args.set)
    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    if args.command == "emit-config":
        params = handlers.resolve_params(overrides, args.config)
        emit_config(params, args.path)
        print(f"wrote {args.path}")
        return 0

    if args.command == "analytics":
        if args.server:
            payload = _post(args.server, "/analytics",
                            {"overrides": overrides, "t": args.t})
        else:
            params = handlers.resolve_params(overrides, args.config)
            payload = handlers.handle_analytics(params, t=args.t)
        _print_json(payload)
        return 0

    if args.command == "check":
        if args.server:
            payload = _post(args.server, "/check",
                            {"overrides": overrides, "threshold": args.threshold})
        else:
            params = handlers.resolve_params(overrides, args.config)
            payload = handlers.handle_check(params, threshold=args.threshold)
        _print_json(payload)
        return 0

    if args.command == "episode":
        record_trace = args.trace is not None
        if args.server:
            payload = _post(args.server, "/episode", {
                "overrides": overrides, "variant": args.variant,
                "horizon": args.horizon, "seed": args.seed,
                "fixed_tx_power": args.fixed_power,
                "fading_mode": args.fading_mode, "record_trace": record_trace})
        else:
            params = handlers.resolve_params(overrides, args.config)
            payload = handlers.handle_episode(
                params, variant=args.variant, horizon=args.horizon,
                seed=args.seed, fixed_tx_power=args.fixed_power,
                fading_mode=args.fading_mode, record_trace=record_trace)
        if record_trace:
            trace = payload.pop("trace", [])
            with open(args.trace, "w", encoding="utf-8") as fh:
                for record in trace:
                    fh.write(json.dumps(record) + "\n")
            print(f"wrote {args.trace}")
        _print_json(payload)
        return 0

    if args.command in handlers.FIGURES:
        request = {"overrides": overrides}
        if args.command == "fig6":
            request["seeds"] = list(range(args.seeds))
            request["horizon"] = args.horizon
            request["fading_modes"] = [m.strip()
                                       for m in args.fading_modes.split(",") if m.strip()]
        if args.server:
            payload = _post(args.server, f"/figures/{args.command}", request)
        else:
            params = handlers.resolve_params(overrides, args.config)
            payload = handlers.handle_figure(
                params, args.command, seeds=request.get("seeds"),
                horizon=request.get("horizon"),
                fading_modes=tuple(request.get("fading_modes", ["dynamic"])))
        out_dir = args.out or handlers.resolve_params(overrides, args.config).run.out_dir
        written = _write_sweeps(payload["results"], out_dir)
        for path in written:
            print(f"wrote {path}")
        if args.command == "fig6":
            print(json.dumps({k: payload[k] for k in
                              ("ratio", "proposed_longterm", "baseline_longterm")},
                             indent=2))
        return 0

    raise ConfigError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except UdneeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
