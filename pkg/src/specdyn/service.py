"""FastAPI service wrapping the core package.

Each endpoint is a thin decorator over a handler that maps request models
onto the library; the CLI imports the same handlers, so local and remote
runs share one code path.  Domain errors map onto HTTP statuses: ambiguity
(an undecidable floor, comparison, or boundary membership) is 409, bad
parameters and malformed inputs are 422.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .corpus import run_experiment_config, run_full_suite, EXPERIMENT_NAMES
from .dynamics import (Ball, Cylinder, parse_system, parse_state,
                       proximality_diagnostic, scan_pair_return_times,
                       scan_return_times)
from .errors import AmbiguityError, ConfigError, SpecdynError
from .exact import parse_real
from .families import detect, fs_chain_check, ramsey_split_check
from .spectra import SpectrumMap, beatty_complement_check, image_of_range, image_set
from .suspension import SuspensionPoint, lift_search, scan_suspension_pair
from .windows import WindowSet
from . import schemas as S

DEFAULT_EPS_LADDER = [f"1/{2 ** k}" for k in range(1, 11)]


# -- handlers (shared by HTTP endpoints and the CLI) ---------------------------

def handle_spectra_gen(req: S.SpectrumGenRequest) -> S.SpectrumGenResponse:
    spectrum = SpectrumMap(parse_real(req.alpha), parse_real(req.gamma))
    if req.elements is None:
        image = image_of_range(spectrum, req.horizon)
    else:
        A = WindowSet.of(req.elements, req.horizon)
        image = image_set(spectrum, A)
    return S.SpectrumGenResponse(values=list(image.elements), horizon=image.horizon)


def handle_beatty(req: S.BeattyRequest) -> S.BeattyResponse:
    report = beatty_complement_check(parse_real(req.alpha), parse_real(req.beta),
                                     req.horizon)
    return S.BeattyResponse(**report.to_payload())


def _window_from(elements: list[int], horizon: int | None) -> WindowSet:
    return WindowSet.of(elements, horizon)


def handle_family_detect(req: S.FamilyDetectRequest) -> S.FamilyReportModel:
    A = _window_from(req.elements, req.horizon)
    report = detect(req.family, A, **req.params)
    return S.FamilyReportModel(**report.to_payload())


def handle_ramsey_split(req: S.RamseySplitRequest) -> S.CheckReportModel:
    A = _window_from(req.elements, req.horizon)
    report = ramsey_split_check(req.family, A, req.parts, req.trials, req.seed,
                                **req.params)
    return S.CheckReportModel(**report.to_payload())


def handle_fs_chain(req: S.FsChainRequest) -> S.CheckReportModel:
    A = WindowSet.of(req.base.elements, req.base.horizon)
    chains = [WindowSet.of(c.elements, c.horizon) for c in req.chains]
    return S.CheckReportModel(**fs_chain_check(A, chains).to_payload())


def _neighborhood_from(req) -> object:
    if req.ball is not None:
        return Ball(parse_real(req.ball.center), parse_real(req.ball.radius))
    if req.cylinder is not None:
        word = tuple(int(ch) for ch in req.cylinder.word)
        return Cylinder(word, req.cylinder.offset)
    raise ValueError("request needs a ball or a cylinder neighborhood")


def handle_return_times(req: S.ReturnTimesRequest) -> S.ReturnTimesResponse:
    sys = parse_system(req.system)
    x = parse_state(req.system, sys, req.x)
    scan = scan_return_times(sys, x, _neighborhood_from(req), req.horizon)
    return S.ReturnTimesResponse(elements=list(scan.times.elements),
                                 horizon=scan.times.horizon,
                                 ambiguous=list(scan.ambiguous))


def handle_pair_return_times(req: S.PairReturnTimesRequest) -> S.ReturnTimesResponse:
    sys = parse_system(req.system)
    x = parse_state(req.system, sys, req.x)
    y = parse_state(req.system, sys, req.y)
    scan = scan_pair_return_times(sys, x, y, _neighborhood_from(req), req.horizon)
    return S.ReturnTimesResponse(elements=list(scan.times.elements),
                                 horizon=scan.times.horizon,
                                 ambiguous=list(scan.ambiguous))


def handle_proximal(req: S.ProximalRequest) -> S.ProximalResponse:
    sys = parse_system(req.system)
    x = parse_state(req.system, sys, req.x)
    y = parse_state(req.system, sys, req.y)
    ladder = [parse_real(e) for e in (req.eps_ladder or DEFAULT_EPS_LADDER)]
    kwargs = {}
    if req.families:
        kwargs["families"] = tuple(req.families)
    report = proximality_diagnostic(sys, x, y, ladder, req.horizon, **kwargs)
    return S.ProximalResponse(**report.to_payload())


def handle_susp_return_times(req: S.SuspReturnTimesRequest) -> S.ReturnTimesResponse:
    sys = parse_system(req.system)
    x = parse_state(req.system, sys, req.x)
    y = parse_state(req.system, sys, req.y)
    alpha = parse_real(req.alpha)
    if alpha.sign() <= 0:
        raise ValueError("alpha must be positive")
    s = 1 / alpha
    gamma0 = parse_real(req.gamma0)
    p = SuspensionPoint(x, gamma0)
    q = SuspensionPoint(y, gamma0)
    U = Ball(parse_real(req.ball.center), parse_real(req.ball.radius))
    band = (parse_real(req.band_lo), parse_real(req.band_hi))
    scan = scan_suspension_pair(sys, s, p, q, U, band, req.horizon)
    return S.ReturnTimesResponse(elements=list(scan.times.elements),
                                 horizon=scan.times.horizon,
                                 ambiguous=list(scan.ambiguous))


def handle_lift_search(req: S.LiftSearchRequest) -> S.LiftSearchResponse:
    sys = parse_system(req.system)
    x = parse_state(req.system, sys, req.x)
    y = parse_state(req.system, sys, req.y)
    U = Ball(parse_real(req.ball.center), parse_real(req.ball.radius))
    grid = [parse_real(g) for g in req.gamma_grid] if req.gamma_grid else None
    report = lift_search(sys, parse_real(req.alpha), x, y, U,
                         parse_real(req.eps), grid, req.horizon)
    return S.LiftSearchResponse(**report.to_payload())


def handle_theorems_run(req: S.TheoremsRunRequest) -> S.TheoremsRunResponse:
    if req.experiment not in EXPERIMENT_NAMES:
        raise ConfigError(f"unknown experiment {req.experiment!r}")
    reports = run_experiment_config(req.experiment, dict(req.config))
    return _bundle_reports(reports)


def handle_theorems_suite() -> S.TheoremsRunResponse:
    return _bundle_reports(run_full_suite())


def _bundle_reports(reports) -> S.TheoremsRunResponse:
    models = [S.ExperimentReportModel(**r.to_payload()) for r in reports]
    solid = [r for r in reports if not r.hypothesis_failed]
    return S.TheoremsRunResponse(
        reports=models,
        passed=all(r.passed for r in solid),
        hypothesis_failures=sum(1 for r in reports if r.hypothesis_failed),
    )


# -- app -----------------------------------------------------------------------

def create_app() -> FastAPI:
    app = FastAPI(title="specdyn", version=__version__)

    @app.exception_handler(AmbiguityError)
    async def _ambiguity(_: Request, exc: AmbiguityError) -> JSONResponse:
        return JSONResponse(status_code=409,
                            content={"error": "ambiguous", "detail": str(exc)})

    @app.exception_handler(SpecdynError)
    async def _domain(_: Request, exc: SpecdynError) -> JSONResponse:
        return JSONResponse(status_code=422,
                            content={"error": type(exc).__name__, "detail": str(exc)})

    @app.exception_handler(ValueError)
    async def _value(_: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(status_code=422,
                            content={"error": "invalid", "detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/spectra/gen", response_model=S.SpectrumGenResponse)
    def spectra_gen(req: S.SpectrumGenRequest):
        return handle_spectra_gen(req)

    @app.post("/spectra/beatty", response_model=S.BeattyResponse)
    def spectra_beatty(req: S.BeattyRequest):
        return handle_beatty(req)

    @app.post("/families/detect", response_model=S.FamilyReportModel)
    def families_detect(req: S.FamilyDetectRequest):
        return handle_family_detect(req)

    @app.post("/families/ramsey-split", response_model=S.CheckReportModel)
    def families_ramsey(req: S.RamseySplitRequest):
        return handle_ramsey_split(req)

    @app.post("/families/fs-chain", response_model=S.CheckReportModel)
    def families_fs_chain(req: S.FsChainRequest):
        return handle_fs_chain(req)

    @app.post("/dyn/return-times", response_model=S.ReturnTimesResponse)
    def dyn_return_times(req: S.ReturnTimesRequest):
        return handle_return_times(req)

    @app.post("/dyn/pair-return-times", response_model=S.ReturnTimesResponse)
    def dyn_pair_return_times(req: S.PairReturnTimesRequest):
        return handle_pair_return_times(req)

    @app.post("/dyn/proximal", response_model=S.ProximalResponse)
    def dyn_proximal(req: S.ProximalRequest):
        return handle_proximal(req)

    @app.post("/susp/return-times", response_model=S.ReturnTimesResponse)
    def susp_return_times(req: S.SuspReturnTimesRequest):
        return handle_susp_return_times(req)

    @app.post("/susp/lift-search", response_model=S.LiftSearchResponse)
    def susp_lift_search(req: S.LiftSearchRequest):
        return handle_lift_search(req)

    @app.post("/theorems/run", response_model=S.TheoremsRunResponse)
    def theorems_run(req: S.TheoremsRunRequest):
        return handle_theorems_run(req)

    @app.post("/theorems/suite", response_model=S.TheoremsRunResponse)
    def theorems_suite():
        return handle_theorems_suite()

    return app


app = create_app()
