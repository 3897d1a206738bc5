"""Command-line front end.

Every subcommand is a thin client of the HTTP API: by default the FastAPI
app is invoked in-process (no server needed), and ``--server URL`` points
the same requests at a remote instance.  Exit codes: 0 success, 1 usage,
2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import asyncio
import datetime
import os
import sys

import httpx

from . import __version__
from .errors import InputError
from .matrixio import file_digest, format_sig, load_keyvalues, save_manifest

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class ApiClient:
    """POSTs to a remote server when given, otherwise calls the app in-process."""

    def __init__(self, server: str | None = None):
        self.server = server

    def post(self, path: str, payload: dict) -> dict:
        if self.server:
            resp = httpx.post(self.server.rstrip("/") + path, json=payload, timeout=None)
        else:
            resp = asyncio.run(self._post_inprocess(path, payload))
        return self._unwrap(resp)

    async def _post_inprocess(self, path: str, payload: dict):
        from .service.app import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, base_url="http://densub") as client:
            return await client.post(path, json=payload, timeout=None)

    @staticmethod
    def _unwrap(resp) -> dict:
        if resp.status_code == 200:
            return resp.json()
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        if resp.status_code == 422:
            raise InputError(str(detail))
        raise RuntimeError(str(detail))


def parse_index_list(text: str) -> list[int]:
    """1-based indices: '1 2 3', '1,2,3', or ranges like '5-9'."""
    out: list[int] = []
    for token in text.replace(",", " ").split():
        if "-" in token[1:]:
            lo, hi = token.split("-", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise InputError(f"bad index range {token!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(token))
    if not out or min(out) < 1:
        raise InputError(f"index list {text!r} must contain 1-based indices")
    return out


def _read_text(path: str) -> str:
    if not os.path.exists(path):
        raise InputError(f"no such file: {path}")
    with open(path) as fh:
        return fh.read()


def _write_manifest(path, args, inputs: list, extra: dict | None = None):
    entries = {
        "command": args.command,
        "argv": " ".join(sys.argv[1:]),
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    if getattr(args, "seed", None) is not None:
        entries["seed"] = args.seed
    for p in inputs:
        entries[f"sha256:{os.path.basename(p)}"] = file_digest(p)
    if extra:
        entries.update(extra)
    save_manifest(path, entries)


def build_parser() -> _Parser:
    parser = _Parser(prog="densub", description="Densest submatrix recovery via convex relaxation")
    parser.add_argument("--server", default=None, help="remote API URL (default: in-process)")
    parser.add_argument("--version", action="version", version=f"densub {__version__}")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("sample", help="sample a planted-model matrix")
    p.add_argument("--spec", required=True, help="model spec file (key = value)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="matrix output path")
    p.add_argument("--truth", default=None, help="ground-truth manifest path")
    p.add_argument("--manifest", default=None)

    p = sub.add_parser("solve", help="solve the relaxation on a matrix file")
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--gamma-rule", default=None, help="experiment-heuristic|theorem-interval|adversarial")
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--p-ref", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--delta-tilde", type=float, default=None)
    p.add_argument("--c2", type=float, default=6.0)
    p.add_argument("--tau", type=float, default=2.0)
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--maxiter", type=int, default=2000)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--output-x", default=None)
    p.add_argument("--output-y", default=None)
    p.add_argument("--manifest", default=None)

    p = sub.add_parser("certify", help="build and verify a dual certificate")
    p.add_argument("--input", required=True)
    p.add_argument("--rows", required=True, help="candidate block rows (1-based, ranges allowed)")
    p.add_argument("--cols", required=True)
    p.add_argument("--mode", choices=("random", "adversarial"), default="random")
    p.add_argument("--spec", default=None, help="model spec file (random mode)")
    p.add_argument("--budget", default=None, help="budget file (adversarial mode)")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--c-tau", type=float, default=6.0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--manifest", default=None)

    p = sub.add_parser("grid", help="run a phase-transition grid")
    p.add_argument("--config", required=True, help="grid config file (key = value)")
    p.add_argument("--records", required=True, help="per-trial CSV output")
    p.add_argument("--counts", default=None, help="aggregate CSV output")
    p.add_argument("--pgm", default=None, help="heatmap output")
    p.add_argument("--resume", action="store_true", help="skip trials already present in the records CSV")
    p.add_argument("--jobs", type=int, default=None, help="worker count (default: DENSUB_JOBS or 1)")
    p.add_argument("--seed", type=int, default=None, help="override master seed")
    p.add_argument("--manifest", default=None)

    p = sub.add_parser("clique", help="max-clique pipeline on an edge list")
    p.add_argument("--edges", required=True)
    p.add_argument("--m", type=int, required=True, help="clique size to look for")
    p.add_argument("--threshold", type=float, default=0.0, help="keep edges with weight > t")
    p.add_argument("--two-walk", action="store_true", help="apply length-2 walk closure")
    p.add_argument("--gamma", type=float, default=None, help="default 12/m")
    p.add_argument("--tau", type=float, default=2.0)
    p.add_argument("--epsilon", type=float, default=1e-4)
    p.add_argument("--maxiter", type=int, default=2000)
    p.add_argument("--output-x", default=None)
    p.add_argument("--manifest", default=None)

    p = sub.add_parser("conditions", help="evaluate the recovery-condition predicates")
    p.add_argument("--variant", choices=("random", "balanced", "adversarial"), default="random")
    p.add_argument("--spec", default=None)
    p.add_argument("--budget", default=None)
    p.add_argument("--m1", type=int, default=None)
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--constant", type=float, default=1.0)

    p = sub.add_parser("oracle", help="exact densest submatrix by brute force")
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tie-cap", type=int, default=64)

    return parser


def _cmd_sample(client: ApiClient, args) -> int:
    spec = load_keyvalues(args.spec)
    out = client.post("/sample", {"spec": spec, "seed": args.seed})
    with open(args.output, "w") as fh:
        fh.write(out["matrix"])
    if args.truth:
        save_manifest(args.truth, out["truth"])
    if args.manifest:
        _write_manifest(args.manifest, args, [args.spec], {"output": args.output})
    print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_solve(client: ApiClient, args) -> int:
    payload = {
        "matrix": _read_text(args.input),
        "m": args.m,
        "n": args.n,
        "gamma": args.gamma,
        "tau": args.tau,
        "epsilon": args.epsilon,
        "maxiter": args.maxiter,
        "time_limit": args.time_limit,
        "return_x": bool(args.output_x),
        "return_y": bool(args.output_y),
    }
    if args.gamma is None and args.gamma_rule:
        rule = {"kind": args.gamma_rule, "m": str(args.m), "n": str(args.n), "c2": str(args.c2)}
        for key, value in (("q", args.q), ("p_ref", args.p_ref), ("delta", args.delta), ("delta_tilde", args.delta_tilde)):
            if value is not None:
                rule[key] = str(value)
        payload["gamma_rule"] = rule
    out = client.post("/solve", payload)
    for key in ("iterations", "converged", "seconds", "gamma", "primal_residual", "dual_residual", "objective", "nuclear_norm", "support_count"):
        print(f"{key} = {format_sig(out[key])}")
    print("support_rows =", " ".join(str(i) for i in out["support_rows"]))
    print("support_cols =", " ".join(str(j) for j in out["support_cols"]))
    if args.output_x and out.get("X"):
        with open(args.output_x, "w") as fh:
            fh.write(out["X"])
    if args.output_y and out.get("Y"):
        with open(args.output_y, "w") as fh:
            fh.write(out["Y"])
    if args.manifest:
        _write_manifest(args.manifest, args, [args.input])
    return EXIT_OK


def _cmd_certify(client: ApiClient, args) -> int:
    payload = {
        "matrix": _read_text(args.input),
        "rows": parse_index_list(args.rows),
        "cols": parse_index_list(args.cols),
        "mode": args.mode,
        "gamma": args.gamma,
        "c_tau": args.c_tau,
        "tol": args.tol,
    }
    inputs = [args.input]
    if args.spec:
        payload["spec"] = load_keyvalues(args.spec)
        inputs.append(args.spec)
    if args.budget:
        payload["budget"] = load_keyvalues(args.budget)
        inputs.append(args.budget)
    out = client.post("/certify", payload)
    for line in out["report"]:
        print(line)
    print(f"lambda = {format_sig(out['lam'])}")
    print(f"gamma = {format_sig(out['gamma'])}")
    if args.manifest:
        _write_manifest(args.manifest, args, inputs, {"passed": out["passed"]})
    return EXIT_OK


def _cmd_grid(client: ApiClient, args) -> int:
    from .experiments import (
        RecoveryGrid,
        grid_config_from_keyvalues,
        read_records_csv,
        write_counts_csv,
        write_pgm,
        write_records_csv,
    )

    entries = load_keyvalues(args.config)
    if args.seed is not None:
        entries["master_seed"] = str(args.seed)
    config = grid_config_from_keyvalues(entries)
    jobs = args.jobs
    if jobs is None:
        jobs = int(os.environ.get("DENSUB_JOBS", "1"))
    existing = []
    if args.resume and os.path.exists(args.records):
        existing = read_records_csv(args.records)
    done = [[r["q"], r["m"], r["trial"]] for r in existing]
    out = client.post("/grid", {"config": entries, "jobs": jobs, "done": done})
    new_records = out["records"]
    write_records_csv(args.records, new_records, append=bool(existing))
    merged = sorted(
        existing + new_records, key=lambda r: (r["q"], r["m"], r["trial"])
    )
    grid = RecoveryGrid(config=config, records=merged)
    if args.counts:
        write_counts_csv(args.counts, grid)
    if args.pgm:
        write_pgm(args.pgm, grid)
    total = sum(int(r["recovered"]) for r in merged)
    print(f"trials = {len(merged)}")
    print(f"recovered = {total}")
    if args.manifest:
        _write_manifest(args.manifest, args, [args.config], {"records": args.records})
    return EXIT_OK


def _cmd_clique(client: ApiClient, args) -> int:
    payload = {
        "edges": _read_text(args.edges),
        "m": args.m,
        "threshold": args.threshold,
        "two_walk": args.two_walk,
        "gamma": args.gamma,
        "tau": args.tau,
        "epsilon": args.epsilon,
        "maxiter": args.maxiter,
        "return_x": bool(args.output_x),
    }
    out = client.post("/clique", payload)
    print("members =", " ".join(out["members"]))
    print(f"verified = {format_sig(out['verified'])}")
    print(f"iterations = {format_sig(out['iterations'])}")
    if args.output_x and out.get("X"):
        with open(args.output_x, "w") as fh:
            fh.write(out["X"])
    if args.manifest:
        _write_manifest(args.manifest, args, [args.edges])
    return EXIT_OK


def _cmd_conditions(client: ApiClient, args) -> int:
    payload = {"variant": args.variant, "constant": args.constant, "m1": args.m1, "n1": args.n1}
    if args.spec:
        payload["spec"] = load_keyvalues(args.spec)
    if args.budget:
        payload["budget"] = load_keyvalues(args.budget)
    out = client.post("/conditions", payload)
    for line in out["report"]:
        print(line)
    return EXIT_OK


def _cmd_oracle(client: ApiClient, args) -> int:
    out = client.post(
        "/oracle",
        {"matrix": _read_text(args.input), "m": args.m, "n": args.n, "tie_cap": args.tie_cap},
    )
    print("best_rows =", " ".join(str(i) for i in out["best_rows"]))
    print("best_cols =", " ".join(str(j) for j in out["best_cols"]))
    print(f"best_count = {format_sig(out['best_count'])}")
    print(f"ties = {format_sig(out['ties'])}")
    return EXIT_OK


_COMMANDS = {
    "sample": _cmd_sample,
    "solve": _cmd_solve,
    "certify": _cmd_certify,
    "grid": _cmd_grid,
    "clique": _cmd_clique,
    "conditions": _cmd_conditions,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --version / --help
        return int(exc.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    client = ApiClient(args.server)
    try:
        return _COMMANDS[args.command](client, args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RuntimeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
