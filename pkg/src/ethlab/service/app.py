"""FastAPI service exposing the ethlab computations.

The service is a thin shell over the core package: endpoints validate with
pydantic, translate to domain calls, and return JSON (CSV payloads ride along
as strings; clients decide where files land).  Domain errors map to HTTP 400
with the exception class name in the body, so thin clients can recover the
usage/numerical distinction.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import EthLabError, InvalidSpec, UsageError
from ..experiments import (
    RunConfig,
    check_identities,
    diagnostics,
    fit_decay,
    get_spectrum,
    run_sweep,
    shell_width,
    spectrum_table,
)
from ..avgobs import avg_tradeoff_report
from ..measures import (
    d2_measure,
    ensemble_local_state,
    tradeoff_report,
    v_measure,
)
from ..reduced import BlockSpec, reduce_transition
from ..spectral import energy_shell, make_ensemble, mean_energy, solve_beta_for_energy
from . import models as m


def _build_ensemble(spectrum, params: m.EnsembleParams, n: int):
    if params.kind == "uniform":
        return make_ensemble(spectrum, "uniform")
    if params.kind == "canonical":
        if params.beta is None:
            raise InvalidSpec("canonical ensemble requires beta")
        return make_ensemble(spectrum, "canonical", beta=params.beta)
    if params.kind == "pure":
        if params.state_index is None:
            raise InvalidSpec("pure ensemble requires state_index")
        return make_ensemble(spectrum, "pure", state_index=params.state_index)
    if params.beta is None:
        raise InvalidSpec("microcanonical beta-energy centering requires beta")
    center = 0.0 if params.center == "zero" else mean_energy(spectrum, params.beta)
    width = params.width_factor * (n if params.width_mode == "per_site" else 1.0)
    shell = energy_shell(spectrum, center, width)
    return make_ensemble(spectrum, "microcanonical", shell=shell)


def create_app() -> FastAPI:
    app = FastAPI(title="ethlab", version=__version__)

    @app.exception_handler(EthLabError)
    async def _domain_error(request: Request, exc: EthLabError):
        return JSONResponse(
            status_code=400,
            content={
                "error": type(exc).__name__,
                "family": "usage" if isinstance(exc, UsageError) else "numerical",
                "message": str(exc),
            },
        )

    @app.get("/health", response_model=m.HealthResponse)
    def health():
        return m.HealthResponse(status="ok", version=__version__)

    @app.post("/api/spectrum", response_model=m.SpectrumResponse)
    def spectrum_endpoint(req: m.SpectrumRequest):
        sp = get_spectrum(req.n, req.g, req.h)
        return m.SpectrumResponse(
            n=req.n,
            dim=sp.dim,
            e_min=float(sp.energies[0]),
            e_max=float(sp.energies[-1]),
            energy_sum=float(sp.energies.sum()),
            table_csv=spectrum_table(req.n, req.g, req.h) if req.include_table else None,
        )

    @app.post("/api/measures/pair", response_model=m.PairResponse)
    def pair_endpoint(req: m.PairRequest):
        sp = get_spectrum(req.n, req.g, req.h)
        ens = _build_ensemble(sp, req.ensemble, req.n)
        blk = BlockSpec(tuple(range(1, req.n_b1 + 1)))
        ls = ensemble_local_state(sp, ens, blk, req.rank_policy)
        v = v_measure(sp, ens, req.i, req.j, blk, req.rank_policy, rho=ls)
        sigma = reduce_transition(sp, req.i, req.j, blk)
        d2 = d2_measure(sigma.matrix, ls.matrix, diagonal=(req.i == req.j))
        return m.PairResponse(v=v, d2=d2, d3=math.sqrt(v), diagonal=req.i == req.j)

    @app.post("/api/tradeoff", response_model=m.TradeoffResponse)
    def tradeoff_endpoint(req: m.TradeoffRequest):
        sp = get_spectrum(req.n, req.g, req.h)
        ens = _build_ensemble(sp, req.ensemble, req.n)
        blk = BlockSpec(tuple(range(1, req.n_b1 + 1)))
        if req.averaged:
            rep = avg_tradeoff_report(sp, ens, req.i, blk, req.rank_policy)
            return m.TradeoffResponse(
                lhs=rep.lhs,
                rhs=rep.rhs,
                residual=rep.residual,
                rhs_local=rep.rhs_local,
                rhs_corr=rep.rhs_corr,
            )
        rep = tradeoff_report(sp, ens, req.i, blk, req.rank_policy)
        return m.TradeoffResponse(lhs=rep.lhs, rhs=rep.rhs, residual=rep.residual)

    @app.post("/api/beta-solve", response_model=m.BetaSolveResponse)
    def beta_solve_endpoint(req: m.BetaSolveRequest):
        sp = get_spectrum(req.n, req.g, req.h)
        beta = solve_beta_for_energy(sp, req.e_target)
        return m.BetaSolveResponse(beta=beta, energy=mean_energy(sp, beta))

    @app.post("/api/sweep", response_model=m.SweepResponse)
    def sweep_endpoint(req: m.SweepRequest):
        config = RunConfig(
            n_list=tuple(req.n_list),
            g=req.g,
            h=req.h,
            beta=req.beta,
            n_b1=req.n_b1,
            ensembles=tuple(req.ensembles),
            shell_center=req.shell_center,
            shell_width_factor=req.shell_width_factor,
            width_mode=req.width_mode,
            rank_policy=req.rank_policy,
            workers=req.workers,
            allow_residual=req.allow_residual,
        )
        result = run_sweep(config, write=False)
        return m.SweepResponse(records_csv=result.records_csv, summary_csv=result.summary_csv)

    @app.post("/api/identities", response_model=m.IdentitiesResponse)
    def identities_endpoint(req: m.IdentitiesRequest):
        report = check_identities(
            n=req.n,
            g=req.g,
            h=req.h,
            beta=req.beta,
            n_b1=req.n_b1,
            rank_policy=req.rank_policy,
            seed=req.seed,
        )
        return m.IdentitiesResponse(**report.to_dict())

    @app.post("/api/fit", response_model=m.FitResponse)
    def fit_endpoint(req: m.FitRequest):
        if req.points is not None:
            fit = fit_decay(req.points)
        else:
            if not (req.summary_csv and req.column and req.ensemble):
                raise InvalidSpec("fit needs either points or (summary_csv, column, ensemble)")
            fit = fit_decay(select_fit_points(req.summary_csv, req.column, req.ensemble))
        return m.FitResponse(
            slope=fit.slope,
            intercept=fit.intercept,
            r_squared=fit.r_squared,
            points=list(fit.points),
        )

    @app.post("/api/diagnostics", response_model=m.DiagnosticsResponse)
    def diagnostics_endpoint(req: m.DiagnosticsRequest):
        d = diagnostics(n=req.n, g=req.g, h=req.h, beta=req.beta, bins=req.bins)
        return m.DiagnosticsResponse(
            dos_csv=d.dos_csv,
            canonical_csv=d.canonical_csv,
            e_beta_csv=d.e_beta_csv,
            mi_csv=d.mi_csv,
        )

    return app


def select_fit_points(summary_csv: str, column: str, ensemble: str) -> list[tuple[float, float]]:
    """Pull (N, column) pairs for one ensemble out of a summary CSV."""
    lines = [ln for ln in summary_csv.splitlines() if ln and not ln.startswith("#")]
    if not lines:
        raise InvalidSpec("summary CSV has no data")
    header = lines[0].split(",")
    try:
        n_col = header.index("N")
        ens_col = header.index("ensemble")
        val_col = header.index(column)
    except ValueError as exc:
        raise InvalidSpec(f"summary CSV lacks required column: {exc}") from exc
    points = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if parts[ens_col] != ensemble:
            continue
        value = parts[val_col]
        if value == "":
            raise InvalidSpec(f"column {column} is empty for ensemble {ensemble}")
        points.append((float(parts[n_col]), float(value)))
    if not points:
        raise InvalidSpec(f"no rows for ensemble {ensemble!r} in summary CSV")
    return points


app = create_app()
