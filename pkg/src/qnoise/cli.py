"""Command-line client for the simulation service.

The CLI is a thin layer over the same handler functions the HTTP
service exposes: by default it calls them in-process, with ``--server
URL`` it proxies the request to a running service.  Reports are JSON
with floats at 17 significant digits, written atomically
(write-then-rename) so errors never leave partial files.

Exit codes: 0 success, 2 circuit/graph parse error, 3 validation error
(bad flags or parameters), 4 resource limit exceeded.
"""

from __future__ import annotations

import argparse
import sys

from .errors import (
    CircuitSyntaxError,
    QnoiseError,
    ResourceLimitError,
    ValidationError,
)
from .reporting import dumps_json, write_atomic
from .service import handlers, models

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_RESOURCE = 4

_EXIT_BY_KIND = {
    "parse": EXIT_PARSE,
    "validation": EXIT_VALIDATION,
    "resource": EXIT_RESOURCE,
    "internal": 1,
}


class _RemoteError(QnoiseError):
    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _read_file(path: str, what: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise ValidationError(f"cannot read {what} file {path!r}: {e}") from None


def _dispatch(server: str | None, endpoint: str, req, resp_model):
    if not server:
        fn = getattr(handlers, f"run_{endpoint}")
        return fn(req)
    import httpx

    url = server.rstrip("/") + "/" + endpoint
    try:
        r = httpx.post(url, json=req.model_dump(), timeout=None)
    except httpx.HTTPError as e:
        raise _RemoteError("internal", f"request to {url} failed: {e}") from None
    if r.status_code >= 400:
        try:
            err = r.json().get("error", {})
            raise _RemoteError(
                err.get("kind", "internal"), err.get("message", r.text)
            )
        except ValueError:
            raise _RemoteError("internal", f"{url} returned {r.status_code}: {r.text}")
    return resp_model.model_validate(r.json())


def _write_report(model, out: str | None) -> None:
    text = dumps_json(model.model_dump(by_alias=True)) + "\n"
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _write_text(text: str, out: str | None) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _add_shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="random seed (echoed in reports)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: QNOISE_WORKERS or all cores)")
    p.add_argument("--mem-budget", type=int, default=None, dest="mem_budget",
                   help="largest allowed intermediate tensor, in complex entries")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--server", default=None, help="run against a service at this URL")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qnoise", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="noisy simulation of one circuit")
    sim.add_argument("--circuit", required=True, help="circuit file")
    sim.add_argument("--psi", default="zeros", help="input product state (e.g. 0101, zeros)")
    sim.add_argument("--v", default="ideal", help="measurement state (tokens or 'ideal')")
    sim.add_argument("--mode", default="exact",
                     choices=["exact", "approx", "dense", "kraus-sum", "trajectories"])
    sim.add_argument("--level", type=int, default=1, help="approximation level l")
    sim.add_argument("--samples", type=int, default=None, help="trajectory sample count")
    sim.add_argument("--delta", type=float, default=None,
                     help="accuracy target; samples from Hoeffding if --samples absent")
    _add_shared(sim)

    eq = sub.add_parser("eqcheck", help="approximate equivalence check")
    eq.add_argument("--ideal", required=True, help="ideal (noiseless) circuit file")
    eq.add_argument("--circuit", required=True, help="noisy circuit file")
    eq.add_argument("--mode", default="exact", choices=["exact", "approx", "dense"])
    eq.add_argument("--level", type=int, default=1)
    eq.add_argument("--threshold", type=float, default=None,
                    help="report equivalent_within = (F >= 1 - threshold)")
    _add_shared(eq)

    dec = sub.add_parser("decompose", help="factor a noise channel's matrix")
    dec.add_argument("--channel", required=True,
                     help="channel spec, e.g. 'depolarizing(0.01)'")
    _add_shared(dec)

    gen = sub.add_parser("gen", help="generate a benchmark circuit")
    gen.add_argument("family", choices=["bv", "qft", "qaoa", "inst"])
    gen.add_argument("--n", type=int, default=None)
    gen.add_argument("--secret", default=None, help="bv secret bitstring")
    gen.add_argument("--edges", default=None,
                     help="qaoa edges: 'linear', 'ring', or '0-1,1-2,...'")
    gen.add_argument("--layers", type=int, default=1)
    gen.add_argument("--gammas", default=None, help="comma-separated qaoa gammas")
    gen.add_argument("--betas", default=None, help="comma-separated qaoa betas")
    gen.add_argument("--rows", type=int, default=None)
    gen.add_argument("--cols", type=int, default=None)
    gen.add_argument("--depth", type=int, default=None)
    gen.add_argument("--policy", default=None,
                     help="noise policy, e.g. 'random-k:20:depolarizing(0.001):seed=7'")
    gen.add_argument("--graph", default=None, help="coupling graph file (crosstalk)")
    _add_shared(gen)

    bench = sub.add_parser("bench", help="level sweep of the approximation")
    bench.add_argument("--circuit", required=True)
    bench.add_argument("--ideal", default=None)
    bench.add_argument("--task", default="simulate", choices=["simulate", "eqcheck", "both"])
    bench.add_argument("--levels", default="0,1", help="comma-separated levels")
    bench.add_argument("--psi", default="zeros")
    bench.add_argument("--v", default="ideal")
    _add_shared(bench)

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    return p


def _parse_floats(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"bad float list {text!r}") from None


def _cmd_simulate(args) -> int:
    req = models.SimulateRequest(
        circuit=_read_file(args.circuit, "circuit"),
        psi=args.psi,
        v=args.v,
        mode=args.mode,
        level=args.level,
        samples=args.samples,
        delta=args.delta,
        seed=args.seed,
        workers=args.workers,
        mem_budget=args.mem_budget,
    )
    report = _dispatch(args.server, "simulate", req, models.SimulateReport)
    _write_report(report, args.out)
    return EXIT_OK


def _cmd_eqcheck(args) -> int:
    req = models.EqcheckRequest(
        ideal=_read_file(args.ideal, "ideal circuit"),
        circuit=_read_file(args.circuit, "circuit"),
        mode=args.mode,
        level=args.level,
        threshold=args.threshold,
        seed=args.seed,
        workers=args.workers,
        mem_budget=args.mem_budget,
    )
    report = _dispatch(args.server, "eqcheck", req, models.EqcheckReport)
    _write_report(report, args.out)
    return EXIT_OK


def _cmd_decompose(args) -> int:
    req = models.DecomposeRequest(channel=args.channel)
    report = _dispatch(args.server, "decompose", req, models.DecomposeReport)
    _write_report(report, args.out)
    return EXIT_OK


def _cmd_gen(args) -> int:
    req = models.GenRequest(
        family=args.family,
        n=args.n,
        secret=args.secret,
        edges=args.edges,
        layers=args.layers,
        gammas=_parse_floats(args.gammas),
        betas=_parse_floats(args.betas),
        rows=args.rows,
        cols=args.cols,
        depth=args.depth,
        seed=args.seed,
        policy=args.policy,
        graph=_read_file(args.graph, "coupling graph") if args.graph else None,
    )
    resp = _dispatch(args.server, "gen", req, models.GenResponse)
    _write_text(resp.circuit, args.out)
    return EXIT_OK


def _cmd_bench(args) -> int:
    try:
        levels = [int(x) for x in args.levels.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"bad level list {args.levels!r}") from None
    req = models.BenchRequest(
        circuit=_read_file(args.circuit, "circuit"),
        ideal=_read_file(args.ideal, "ideal circuit") if args.ideal else None,
        task=args.task,
        levels=levels,
        psi=args.psi,
        v=args.v,
        seed=args.seed,
        workers=args.workers,
        mem_budget=args.mem_budget,
    )
    report = _dispatch(args.server, "bench", req, models.BenchReport)
    _write_report(report, args.out)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "eqcheck": _cmd_eqcheck,
    "decompose": _cmd_decompose,
    "gen": _cmd_gen,
    "bench": _cmd_bench,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _RemoteError as e:
        print(f"error ({e.kind}): {e}", file=sys.stderr)
        return _EXIT_BY_KIND.get(e.kind, 1)
    except CircuitSyntaxError as e:
        print(f"error (parse): {e}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceLimitError as e:
        print(f"error (resource): {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValidationError as e:
        print(f"error (validation): {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except QnoiseError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
