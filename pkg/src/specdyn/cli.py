"""Single entry point exposing every module, as a thin client of the service
layer: each subcommand builds the request model and either calls the handler
in-process (default) or POSTs it to a running server (--server).

Exit codes: 0 success (all assertions passing), 1 assertion/partition
failures, 2 usage or input errors, 3 arithmetic ambiguity surfaced.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone

from . import schemas as S
from . import service
from .errors import AmbiguityError, SpecdynError
from .windows import WindowSet, load_window, window_to_text

EXIT_OK, EXIT_ASSERT, EXIT_USAGE, EXIT_AMBIGUOUS = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specdyn",
        description="certified spectra, largeness detectors, return-time scans")
    parser.add_argument("--server", help="base URL of a running specdyn service")
    parser.add_argument("--format", choices=("plain", "json", "csv"), default="plain")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--no-timestamp", action="store_true",
                        help="omit timestamps and timings for byte-stable output")
    parser.add_argument("--output", help="write output to this path instead of stdout")
    groups = parser.add_subparsers(dest="group", required=True)

    spectra = groups.add_parser("spectra").add_subparsers(dest="cmd", required=True)
    gen = spectra.add_parser("gen", help="emit the spectrum image, one integer per line")
    gen.add_argument("--alpha", required=True)
    gen.add_argument("--gamma", default="0")
    gen.add_argument("--horizon", type=int, required=True)
    gen.add_argument("--set", dest="set_file", help="apply to this window-set file")
    beatty = spectra.add_parser("beatty", help="two-sequence complementarity report")
    beatty.add_argument("--alpha", required=True)
    beatty.add_argument("--beta", required=True)
    beatty.add_argument("--horizon", type=int, required=True)

    families = groups.add_parser("families").add_subparsers(dest="cmd", required=True)
    detect = families.add_parser("detect", help="run one largeness detector")
    detect.add_argument("--family", required=True)
    detect.add_argument("--set", dest="set_file", required=True)
    detect.add_argument("--ell", type=int)
    detect.add_argument("--m", type=int)
    detect.add_argument("--w", type=int)
    detect.add_argument("--threshold")
    detect.add_argument("--k", type=int)
    detect.add_argument("--bound", type=int)
    detect.add_argument("--min-length", type=int, dest="min_length")
    detect.add_argument("--min-count", type=int, dest="min_count")
    detect.add_argument("--seqs", help="semicolon-separated comma lists")
    detect.add_argument("--r-bound", type=int, dest="r_bound")
    detect.add_argument("--f-bound", type=int, dest="f_bound")
    ramsey = families.add_parser("ramsey", help="random-partition Ramsey check")
    ramsey.add_argument("--family", required=True)
    ramsey.add_argument("--set", dest="set_file", required=True)
    ramsey.add_argument("--parts", type=int, default=2)
    ramsey.add_argument("--trials", type=int, default=20)
    ramsey.add_argument("--threshold")
    ramsey.add_argument("--ell", type=int)
    ramsey.add_argument("--m", type=int)
    ramsey.add_argument("--w", type=int)
    ramsey.add_argument("--min-length", type=int, dest="min_length")
    ramsey.add_argument("--min-count", type=int, dest="min_count")
    fs = families.add_parser("fs-chain", help="decreasing shifted-chain check")
    fs.add_argument("--set", dest="set_file", required=True)
    fs.add_argument("--chain", action="append", required=True,
                    help="chain member set file (repeatable, decreasing order)")

    dyn = groups.add_parser("dyn").add_subparsers(dest="cmd", required=True)
    drt = dyn.add_parser("return-times", help="orbit return times into a neighborhood")
    _add_system_args(drt)
    drt.add_argument("--x", required=True)
    drt.add_argument("--horizon", type=int, required=True)
    dprt = dyn.add_parser("pair-return-times", help="joint return times of a pair")
    _add_system_args(dprt)
    dprt.add_argument("--x", required=True)
    dprt.add_argument("--y", required=True)
    dprt.add_argument("--horizon", type=int, required=True)
    prox = dyn.add_parser("proximal", help="eps-ladder proximality diagnostic")
    prox.add_argument("--system", required=True)
    prox.add_argument("--x", required=True)
    prox.add_argument("--y", required=True)
    prox.add_argument("--eps-ladder", dest="eps_ladder",
                      help="comma list, strictly decreasing (default 1/2..1/1024)")
    prox.add_argument("--horizon", type=int, required=True)

    susp = groups.add_parser("susp").add_subparsers(dest="cmd", required=True)
    srt = susp.add_parser("return-times", help="suspension pair return times")
    srt.add_argument("--system", required=True)
    srt.add_argument("--alpha", required=True)
    srt.add_argument("--x", required=True)
    srt.add_argument("--y", required=True)
    srt.add_argument("--gamma0", required=True)
    srt.add_argument("--band", required=True, help="lo,hi inside (0,1)")
    srt.add_argument("--ball", required=True, help="center,radius")
    srt.add_argument("--horizon", type=int, required=True)
    lift = susp.add_parser("lift-search", help="per-gamma0 lift evidence")
    lift.add_argument("--system", required=True)
    lift.add_argument("--alpha", required=True)
    lift.add_argument("--x", required=True)
    lift.add_argument("--y", required=True)
    lift.add_argument("--ball", required=True, help="center,radius")
    lift.add_argument("--eps", required=True)
    lift.add_argument("--gamma-grid", dest="gamma_grid", default="auto",
                      help='"auto" or a comma list in (0,1)')
    lift.add_argument("--horizon", type=int, required=True)

    theorems = groups.add_parser("theorems").add_subparsers(dest="cmd", required=True)
    run = theorems.add_parser("run", help="run one experiment from a config file")
    run.add_argument("--experiment", required=True)
    run.add_argument("--config", required=True)
    theorems.add_parser("suite", help="run every shipped frozen corpus")

    serve = groups.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _add_system_args(sub) -> None:
    sub.add_argument("--system", required=True,
                     help="rotation:<expr> | sturmian:<expr> | periodic:<word> | prefix:<w>:<w>")
    sub.add_argument("--ball", help="center,radius")
    sub.add_argument("--cylinder", help="word[,offset]")


def _split_pair(raw: str, what: str) -> tuple[str, str]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 2:
        raise SpecdynError(f"{what} must be two comma-separated values, got {raw!r}")
    return parts[0], parts[1]


def _ball_model(raw: str) -> S.BallModel:
    center, radius = _split_pair(raw, "--ball")
    return S.BallModel(center=center, radius=radius)


def _neighborhood_args(args) -> dict:
    out: dict = {"ball": None, "cylinder": None}
    if getattr(args, "ball", None):
        out["ball"] = _ball_model(args.ball)
    elif getattr(args, "cylinder", None):
        parts = [p.strip() for p in args.cylinder.split(",")]
        out["cylinder"] = S.CylinderModel(word=parts[0],
                                          offset=int(parts[1]) if len(parts) > 1 else 0)
    else:
        raise SpecdynError("need --ball or --cylinder")
    return out


def _detector_params(args) -> dict:
    params = {}
    for key in ("ell", "m", "w", "threshold", "k", "bound", "min_length",
                "min_count", "r_bound", "f_bound"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if getattr(args, "seqs", None):
        params["seqs"] = [[int(tok) for tok in part.split(",") if tok.strip()]
                          for part in args.seqs.split(";") if part.strip()]
    return params


class Client:
    """Dispatches requests to the in-process handlers or a remote server."""

    def __init__(self, server: str | None):
        self.server = server.rstrip("/") if server else None

    def call(self, path: str, handler, request) -> dict:
        if self.server is None:
            response = handler(request) if request is not None else handler()
            return response.model_dump()
        import httpx
        body = request.model_dump() if request is not None else {}
        resp = httpx.post(self.server + path, json=body, timeout=600.0)
        if resp.status_code == 409:
            raise AmbiguityError(resp.json().get("detail", "ambiguous"))
        if resp.status_code >= 400:
            raise SpecdynError(f"server error {resp.status_code}: {resp.text}")
        return resp.json()


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: (0.0 if k == "wall_time_ms" else _strip_timing(v))
                for k, v in obj.items()}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


def _envelope(args, payload: dict) -> dict:
    out = dict(payload)
    out["seed"] = args.seed
    if args.no_timestamp:
        out = _strip_timing(out)
    else:
        out["timestamp"] = datetime.now(timezone.utc).isoformat()
    return out


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _emit_report(args, payload: dict) -> None:
    _emit(args, _dump(_envelope(args, payload)))


def _emit_window(args, payload: dict) -> None:
    if args.format == "json":
        _emit_report(args, payload)
        return
    elements = payload["elements"]
    if args.format == "csv":
        _emit(args, ",".join(str(v) for v in elements))
        return
    ws = WindowSet.of(elements, payload["horizon"])
    text = window_to_text(ws)
    for n in payload.get("ambiguous", []):
        text += f"#ambiguous {n}\n"
    _emit(args, text)


# -- command implementations --------------------------------------------------

def _cmd_spectra_gen(args, client: Client) -> int:
    elements = None
    if args.set_file:
        ws = load_window(args.set_file)
        elements = list(ws.elements)
    req = S.SpectrumGenRequest(alpha=args.alpha, gamma=args.gamma,
                               horizon=args.horizon, elements=elements)
    payload = client.call("/spectra/gen", service.handle_spectra_gen, req)
    if args.format == "json":
        _emit_report(args, payload)
    elif args.format == "csv":
        _emit(args, ",".join(str(v) for v in payload["values"]))
    else:
        _emit(args, "\n".join(str(v) for v in payload["values"]))
    return EXIT_OK


def _cmd_spectra_beatty(args, client: Client) -> int:
    req = S.BeattyRequest(alpha=args.alpha, beta=args.beta, horizon=args.horizon)
    payload = client.call("/spectra/beatty", service.handle_beatty, req)
    _emit_report(args, payload)
    return EXIT_OK if payload["partition"] else EXIT_ASSERT


def _cmd_families_detect(args, client: Client) -> int:
    ws = load_window(args.set_file)
    req = S.FamilyDetectRequest(family=args.family, elements=list(ws.elements),
                                horizon=ws.horizon, params=_detector_params(args))
    payload = client.call("/families/detect", service.handle_family_detect, req)
    _emit_report(args, payload)
    return EXIT_OK


def _cmd_families_ramsey(args, client: Client) -> int:
    ws = load_window(args.set_file)
    req = S.RamseySplitRequest(family=args.family, elements=list(ws.elements),
                               horizon=ws.horizon, parts=args.parts,
                               trials=args.trials, seed=args.seed,
                               params=_detector_params(args))
    payload = client.call("/families/ramsey-split", service.handle_ramsey_split, req)
    _emit_report(args, payload)
    return EXIT_OK if payload["passed"] else EXIT_ASSERT


def _cmd_families_fs_chain(args, client: Client) -> int:
    base = load_window(args.set_file)
    chains = [load_window(p) for p in args.chain]
    req = S.FsChainRequest(
        base=S.WindowModel(elements=list(base.elements), horizon=base.horizon),
        chains=[S.WindowModel(elements=list(c.elements), horizon=c.horizon)
                for c in chains])
    payload = client.call("/families/fs-chain", service.handle_fs_chain, req)
    _emit_report(args, payload)
    return EXIT_OK if payload["passed"] else EXIT_ASSERT


def _cmd_dyn_return_times(args, client: Client) -> int:
    req = S.ReturnTimesRequest(system=args.system, x=args.x,
                               horizon=args.horizon, **_neighborhood_args(args))
    payload = client.call("/dyn/return-times", service.handle_return_times, req)
    _emit_window(args, payload)
    return EXIT_OK


def _cmd_dyn_pair_return_times(args, client: Client) -> int:
    req = S.PairReturnTimesRequest(system=args.system, x=args.x, y=args.y,
                                   horizon=args.horizon, **_neighborhood_args(args))
    payload = client.call("/dyn/pair-return-times",
                          service.handle_pair_return_times, req)
    _emit_window(args, payload)
    return EXIT_OK


def _cmd_dyn_proximal(args, client: Client) -> int:
    ladder = [tok.strip() for tok in args.eps_ladder.split(",")] \
        if args.eps_ladder else []
    req = S.ProximalRequest(system=args.system, x=args.x, y=args.y,
                            eps_ladder=ladder, horizon=args.horizon)
    payload = client.call("/dyn/proximal", service.handle_proximal, req)
    _emit_report(args, payload)
    return EXIT_OK


def _cmd_susp_return_times(args, client: Client) -> int:
    lo, hi = _split_pair(args.band, "--band")
    req = S.SuspReturnTimesRequest(system=args.system, alpha=args.alpha,
                                   x=args.x, y=args.y, gamma0=args.gamma0,
                                   band_lo=lo, band_hi=hi,
                                   ball=_ball_model(args.ball),
                                   horizon=args.horizon)
    payload = client.call("/susp/return-times",
                          service.handle_susp_return_times, req)
    _emit_window(args, payload)
    return EXIT_OK


def _cmd_susp_lift_search(args, client: Client) -> int:
    grid = None
    if args.gamma_grid and args.gamma_grid != "auto":
        grid = [tok.strip() for tok in args.gamma_grid.split(",")]
    req = S.LiftSearchRequest(system=args.system, alpha=args.alpha,
                              x=args.x, y=args.y, ball=_ball_model(args.ball),
                              eps=args.eps, gamma_grid=grid, horizon=args.horizon)
    payload = client.call("/susp/lift-search", service.handle_lift_search, req)
    lines = [_dump(_envelope(args, entry)) for entry in payload["entries"]]
    _emit(args, "\n".join(lines))
    return EXIT_OK


def _cmd_theorems_run(args, client: Client) -> int:
    from .corpus import load_config
    name, values = load_config(args.config)
    if name != args.experiment:
        raise SpecdynError(
            f"config section [{name}] does not match --experiment {args.experiment}")
    req = S.TheoremsRunRequest(experiment=args.experiment, config=values)
    payload = client.call("/theorems/run", service.handle_theorems_run, req)
    return _emit_experiment_bundle(args, payload)


def _cmd_theorems_suite(args, client: Client) -> int:
    payload = client.call("/theorems/suite",
                          lambda: service.handle_theorems_suite(), None)
    return _emit_experiment_bundle(args, payload)


def _emit_experiment_bundle(args, payload: dict) -> int:
    lines = [_dump(_envelope(args, rep)) for rep in payload["reports"]]
    summary = {"suite_passed": payload["passed"],
               "hypothesis_failures": payload["hypothesis_failures"],
               "reports": len(payload["reports"])}
    lines.append(_dump(_envelope(args, summary)))
    _emit(args, "\n".join(lines))
    return EXIT_OK if payload["passed"] else EXIT_ASSERT


def _cmd_serve(args, _client: Client) -> int:
    import uvicorn
    uvicorn.run("specdyn.service:app", host=args.host, port=args.port)
    return EXIT_OK


_COMMANDS = {
    ("spectra", "gen"): _cmd_spectra_gen,
    ("spectra", "beatty"): _cmd_spectra_beatty,
    ("families", "detect"): _cmd_families_detect,
    ("families", "ramsey"): _cmd_families_ramsey,
    ("families", "fs-chain"): _cmd_families_fs_chain,
    ("dyn", "return-times"): _cmd_dyn_return_times,
    ("dyn", "pair-return-times"): _cmd_dyn_pair_return_times,
    ("dyn", "proximal"): _cmd_dyn_proximal,
    ("susp", "return-times"): _cmd_susp_return_times,
    ("susp", "lift-search"): _cmd_susp_lift_search,
    ("theorems", "run"): _cmd_theorems_run,
    ("theorems", "suite"): _cmd_theorems_suite,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.group == "serve":
        return _cmd_serve(args, Client(None))
    command = _COMMANDS[(args.group, args.cmd)]
    client = Client(args.server)
    try:
        return command(args, client)
    except AmbiguityError as exc:
        print(f"ambiguous: {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except (SpecdynError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
