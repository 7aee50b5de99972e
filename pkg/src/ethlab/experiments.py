"""Experiment driver: sweep configuration, identity reports, fits, diagnostics.

Output contract: `run_sweep` emits two CSV files.  `records.csv` has one row
per (N, ensemble, eigenstate) with the full measure record; `summary.csv` has
one row per (N, ensemble) with shell statistics, typicality averages and the
averaged-observable correlation term.  Floats are written with repr (shortest
round-trip decimal), metadata lives in leading '#' comment lines, and rows are
emitted in a fixed order so re-runs are byte-identical for a given config
regardless of the worker count.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .avgobs import (
    avg_tradeoff_report,
    avg_typicality,
    correlation_term,
    d1_avg_equality_check,
)
from .errors import InternalConsistencyError, InvalidSpec, SingularLocalState
from .measures import (
    LocalState,
    MeasureRecord,
    d1_measure,
    d2_measure,
    dod_reconstruction,
    ensemble_local_state,
    local_state,
    measure_record,
    offdiag_stats,
    typicality,
    v_measure,
    v_rows,
)
from .reduced import BlockSpec, mutual_information, reduce_transition
from .spectral import (
    EnergyShell,
    EnsembleState,
    Spectrum,
    diagonalize_chain,
    energy_shell,
    make_ensemble,
    mean_energy,
    spectral_histogram,
)
from .spinchain import ChainSpec, DEFAULT_SITE_LIMIT

RESIDUAL_RTOL = 1e-8

RECORD_COLUMNS = (
    "N,g,h,ensemble,beta,shell_center,shell_width,i,E_i,v_dg,v_off_sum,"
    "v_off_avg,f_ratio,d2_dg,tradeoff_lhs,tradeoff_rhs,tradeoff_residual"
)
SUMMARY_COLUMNS = (
    "N,g,h,ensemble,beta,shell_center,shell_width,d_M,tradeoff_rhs,"
    "vbar_dg,vbar_off,v_dg_max,v_off_max,avg_corr_term,typ_dg,typ_off,typ_residual"
)

ENSEMBLE_CHOICES = (
    "uniform",
    "canonical",
    "microcanonical:zero",
    "microcanonical:beta-energy",
    "pure",
)

_BATCH = 64  # fixed row batch so results never depend on the worker count


@dataclass(frozen=True)
class RunConfig:
    """Sweep parameters; defaults sit at the standard nonintegrable point
    (g=1.05, h=0.1) with beta=0.1 and single-site blocks."""

    n_list: tuple[int, ...]
    g: float = 1.05
    h: float = 0.1
    beta: float = 0.1
    n_b1: int = 1
    ensembles: tuple[str, ...] = ("canonical", "microcanonical:beta-energy", "microcanonical:zero")
    shell_center: str = "beta-energy"
    shell_width_factor: float = 0.2
    width_mode: str = "per_site"
    rank_policy: str = "strict"
    workers: int = 1
    out_dir: str = "."
    allow_residual: bool = False

    def __post_init__(self):
        if len(self.n_list) == 0:
            raise InvalidSpec("n_list must not be empty")
        for n in self.n_list:
            if n < 2 or n > DEFAULT_SITE_LIMIT:
                raise InvalidSpec(f"n={n} outside [2, {DEFAULT_SITE_LIMIT}]")
        if self.shell_width_factor <= 0:
            raise InvalidSpec("shell_width_factor must be positive")
        if self.width_mode not in ("per_site", "absolute"):
            raise InvalidSpec(f"width_mode must be per_site or absolute, got {self.width_mode!r}")
        if self.shell_center not in ("zero", "beta-energy"):
            raise InvalidSpec(f"shell_center must be zero or beta-energy, got {self.shell_center!r}")
        for ens in self.ensembles:
            if ens not in ENSEMBLE_CHOICES:
                raise InvalidSpec(f"unknown ensemble {ens!r}; choices: {ENSEMBLE_CHOICES}")
        if self.n_b1 < 1:
            raise InvalidSpec("n_b1 must be >= 1")
        if self.workers < 1:
            raise InvalidSpec("workers must be >= 1")


def parse_config_text(text: str) -> dict:
    """Flat key=value config format; '#' starts a comment."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidSpec(f"config line {lineno} is not key=value: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def config_from_mapping(data: dict) -> RunConfig:
    kw: dict = {}
    if "n_list" in data:
        kw["n_list"] = tuple(int(x) for x in str(data["n_list"]).split(",") if x.strip())
    for key in ("g", "h", "beta", "shell_width_factor"):
        if key in data:
            kw[key] = float(data[key])
    for key in ("n_b1", "workers"):
        if key in data:
            kw[key] = int(data[key])
    for key in ("shell_center", "width_mode", "rank_policy", "out_dir"):
        if key in data:
            kw[key] = str(data[key])
    if "ensembles" in data:
        kw["ensembles"] = tuple(x.strip() for x in str(data["ensembles"]).split(",") if x.strip())
    if "allow_residual" in data:
        kw["allow_residual"] = str(data["allow_residual"]).lower() in ("1", "true", "yes")
    if "n_list" not in kw:
        raise InvalidSpec("config must define n_list")
    return RunConfig(**kw)


# ---------------------------------------------------------------------------
# spectrum cache

_SPECTRA: dict[tuple[int, float, float], Spectrum] = {}
_SPECTRA_LOCK = threading.Lock()


def get_spectrum(n: int, g: float, h: float) -> Spectrum:
    """Diagonalize once per (n, g, h); safe to share across threads."""
    key = (int(n), float(g), float(h))
    with _SPECTRA_LOCK:
        sp = _SPECTRA.get(key)
    if sp is not None:
        return sp
    sp = diagonalize_chain(ChainSpec(key[0], key[1], key[2]))
    with _SPECTRA_LOCK:
        return _SPECTRA.setdefault(key, sp)


def clear_spectrum_cache() -> None:
    with _SPECTRA_LOCK:
        _SPECTRA.clear()


# ---------------------------------------------------------------------------
# sweep machinery


def shell_width(config: RunConfig, n: int) -> float:
    if config.width_mode == "per_site":
        return config.shell_width_factor * n
    return config.shell_width_factor


def _shell_center(spectrum: Spectrum, mode: str, beta: float) -> float:
    if mode == "zero":
        return 0.0
    return mean_energy(spectrum, beta)


def resolve_item(
    spectrum: Spectrum, config: RunConfig, choice: str
) -> tuple[EnsembleState | None, EnergyShell | None]:
    """Ensemble and row-defining shell for one sweep item.

    uniform and pure items have no shell: their rows run over every
    eigenstate.  The pure item returns ensemble None because each row supplies
    its own reference state.
    """
    width = shell_width(config, spectrum.n_sites)
    if choice == "uniform":
        return make_ensemble(spectrum, "uniform"), None
    if choice == "pure":
        return None, None
    if choice == "canonical":
        center = _shell_center(spectrum, config.shell_center, config.beta)
        shell = energy_shell(spectrum, center, width)
        return make_ensemble(spectrum, "canonical", beta=config.beta), shell
    mode = choice.split(":", 1)[1]
    center = _shell_center(spectrum, mode, config.beta)
    shell = energy_shell(spectrum, center, width)
    return make_ensemble(spectrum, "microcanonical", shell=shell), shell


@dataclass(frozen=True)
class RowData:
    """A measure record plus the raw row aggregates the summary needs."""

    record: MeasureRecord
    off_max: float
    off_argmax: int
    diag_raw: float
    off_sum_raw: float


def _rows_batch(
    spectrum: Spectrum,
    ls: LocalState,
    idx: np.ndarray,
    blk: BlockSpec,
) -> list[RowData]:
    rows = v_rows(spectrum, ls, idx, blk, batch=_BATCH)
    out = []
    for local, i in enumerate(idx):
        row = rows[local]
        rec = measure_record(spectrum, None, int(i), blk, rho=ls, row=row)
        masked = row.copy()
        masked[i] = -math.inf
        j = int(np.argmax(masked))
        out.append(
            RowData(
                record=rec,
                off_max=float(max(masked[j], 0.0)),
                off_argmax=j,
                diag_raw=float(row[i]),
                off_sum_raw=float(math.fsum(row.tolist()) - row[i]),
            )
        )
    return out


def _pure_row(spectrum: Spectrum, i: int, blk: BlockSpec, rank_policy: str) -> RowData:
    sigma = reduce_transition(spectrum, i, i, blk).matrix
    ls = local_state(sigma, rank_policy)
    return _rows_batch(spectrum, ls, np.asarray([i]), blk)[0]


@dataclass(frozen=True)
class ItemResult:
    n: int
    choice: str
    beta: float | None
    shell: EnergyShell | None
    rows: list[RowData]
    tradeoff_rhs: float | None
    vbar_dg: float
    vbar_off: float
    v_dg_max: float
    v_off_max: float
    corr_term: float | None
    typ_dg: float | None
    typ_off: float | None
    typ_residual: float | None


def sweep_item(spectrum: Spectrum, config: RunConfig, choice: str) -> ItemResult:
    """All rows and the summary for one (N, ensemble) pair."""
    blk = BlockSpec(tuple(range(1, config.n_b1 + 1)))
    ensemble, shell = resolve_item(spectrum, config, choice)
    members = shell.members if shell is not None else np.arange(spectrum.dim)
    beta = config.beta if choice in ("canonical", "microcanonical:beta-energy") else None

    if choice == "pure":
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            rows = list(
                pool.map(lambda i: _pure_row(spectrum, int(i), blk, config.rank_policy), members)
            )
        rhs = None
        corr = typ_dg = typ_off = typ_res = None
    else:
        ls = ensemble_local_state(spectrum, ensemble, blk, config.rank_policy)
        batches = [members[k : k + _BATCH] for k in range(0, len(members), _BATCH)]
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(lambda b: _rows_batch(spectrum, ls, b, blk), batches))
        rows = [rd for chunk in chunks for rd in chunk]
        rhs = ls.tradeoff_rhs()
        corr = correlation_term(spectrum, ensemble, blk, config.rank_policy, rho_bar=None)
        if choice == "uniform" or choice.startswith("microcanonical"):
            # ensemble weights are uniform on exactly the row set, so the
            # probability-weighted averages come from the computed rows
            p = 1.0 / len(rows)
            typ_dg = math.fsum(p * max(rd.diag_raw, 0.0) for rd in rows)
            typ_off = math.fsum(p * max(rd.off_sum_raw, 0.0) for rd in rows) / (spectrum.dim - 1)
            typ_res = math.fsum(p * (rd.diag_raw + rd.off_sum_raw) for rd in rows) - rhs
        else:
            typ = typicality(spectrum, ensemble, blk, config.rank_policy, rho=ls)
            typ_dg, typ_off, typ_res = typ.v_dg_mean, typ.v_off_mean, typ.identity_residual

    m = len(rows)
    vbar_dg = math.fsum(rd.record.v_dg for rd in rows) / m
    vbar_off = math.fsum(rd.record.v_off_avg for rd in rows) / m
    v_dg_max = max(rd.record.v_dg for rd in rows)
    v_off_max = max(rd.off_max for rd in rows)
    return ItemResult(
        n=spectrum.n_sites,
        choice=choice,
        beta=beta,
        shell=shell,
        rows=rows,
        tradeoff_rhs=rhs,
        vbar_dg=vbar_dg,
        vbar_off=vbar_off,
        v_dg_max=v_dg_max,
        v_off_max=v_off_max,
        corr_term=corr,
        typ_dg=typ_dg,
        typ_off=typ_off,
        typ_residual=typ_res,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return repr(value)
    return str(value)


def _gate_residual(rd: RowData, config: RunConfig, n: int, choice: str) -> None:
    rec = rd.record
    if abs(rec.tradeoff_residual) > RESIDUAL_RTOL * max(1.0, rec.tradeoff_rhs):
        if not config.allow_residual:
            raise InternalConsistencyError(
                f"row (N={n}, {choice}, i={rec.i}) has trade-off residual "
                f"{rec.tradeoff_residual:.3e} above threshold; "
                "pass allow_residual to emit anyway"
            )


@dataclass(frozen=True)
class SweepResult:
    records_csv: str
    summary_csv: str
    items: list[ItemResult]


def run_sweep(config: RunConfig, write: bool = True) -> SweepResult:
    """Run every (N, ensemble) item and render both CSV files.

    Output is assembled fully in memory and written at the end, so a failure
    partway leaves no partial files behind.
    """
    meta = (
        f"# ethlab sweep\n"
        f"# g={_fmt(config.g)} h={_fmt(config.h)} beta={_fmt(config.beta)} "
        f"n_b1={config.n_b1} rank_policy={config.rank_policy} "
        f"width_mode={config.width_mode} shell_width_factor={_fmt(config.shell_width_factor)} "
        f"shell_center={config.shell_center}\n"
    )
    rec_lines = [meta + RECORD_COLUMNS]
    sum_lines = [meta + SUMMARY_COLUMNS]
    items = []
    for n in config.n_list:
        spectrum = get_spectrum(n, config.g, config.h)
        for choice in config.ensembles:
            item = sweep_item(spectrum, config, choice)
            items.append(item)
            center = _fmt(item.shell.center if item.shell else None)
            width = _fmt(item.shell.width if item.shell else None)
            for rd in item.rows:
                _gate_residual(rd, config, n, choice)
                rec = rd.record
                rec_lines.append(
                    ",".join(
                        (
                            str(n),
                            _fmt(config.g),
                            _fmt(config.h),
                            choice,
                            _fmt(item.beta),
                            center,
                            width,
                            str(rec.i),
                            _fmt(rec.energy),
                            _fmt(rec.v_dg),
                            _fmt(rec.v_off_sum),
                            _fmt(rec.v_off_avg),
                            _fmt(rec.f_ratio),
                            _fmt(rec.d2_dg),
                            _fmt(rec.tradeoff_lhs),
                            _fmt(rec.tradeoff_rhs),
                            _fmt(rec.tradeoff_residual),
                        )
                    )
                )
            sum_lines.append(
                ",".join(
                    (
                        str(n),
                        _fmt(config.g),
                        _fmt(config.h),
                        choice,
                        _fmt(item.beta),
                        center,
                        width,
                        str(len(item.rows)),
                        _fmt(item.tradeoff_rhs),
                        _fmt(item.vbar_dg),
                        _fmt(item.vbar_off),
                        _fmt(item.v_dg_max),
                        _fmt(item.v_off_max),
                        _fmt(item.corr_term),
                        _fmt(item.typ_dg),
                        _fmt(item.typ_off),
                        _fmt(item.typ_residual),
                    )
                )
            )
    records_csv = "\n".join(rec_lines) + "\n"
    summary_csv = "\n".join(sum_lines) + "\n"
    if write:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "records.csv").write_text(records_csv)
        (out / "summary.csv").write_text(summary_csv)
    return SweepResult(records_csv=records_csv, summary_csv=summary_csv, items=items)


# ---------------------------------------------------------------------------
# decay fits


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    points: tuple[tuple[float, float], ...]


def fit_decay(points) -> FitResult:
    """Least-squares slope of ln(value) versus N.

    Needs at least 3 strictly positive points; slope is the per-site log decay
    rate (negative for decaying quantities).
    """
    pts = [(float(n), float(v)) for n, v in points]
    if len(pts) < 3:
        raise InvalidSpec(f"decay fit needs >= 3 points, got {len(pts)}")
    if any(v <= 0 or not math.isfinite(v) for _, v in pts):
        raise InvalidSpec("decay fit requires strictly positive finite values")
    x = np.array([n for n, _ in pts])
    y = np.log([v for _, v in pts])
    xc = x - x.mean()
    slope = float((xc @ (y - y.mean())) / (xc @ xc))
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    total = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if total == 0 else 1.0 - float((resid**2).sum()) / total
    return FitResult(slope=slope, intercept=intercept, r_squared=r2, points=tuple(pts))


# ---------------------------------------------------------------------------
# identity report


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    max_residual: float
    threshold: float
    passed: bool
    cases: int
    detail: str = ""


@dataclass(frozen=True)
class IdentityReport:
    checks: tuple[IdentityCheck, ...]
    expected_errors: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [c.__dict__ for c in self.checks],
            "expected_errors": list(self.expected_errors),
        }


def _random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.standard_normal((dim, dim))
    return (a + a.T) / 2


def check_identities(
    n: int = 6,
    g: float = 1.05,
    h: float = 0.1,
    beta: float = 0.1,
    n_b1: int = 1,
    rank_policy: str = "strict",
    seed: int = 1234,
) -> IdentityReport:
    """Exercise every exact identity and inequality at one chain size.

    Failing checks stay in the report rather than raising; the expected-error
    section records that the strict rank policy rejects a singular local state
    from a product eigenstate.
    """
    spectrum = get_spectrum(n, g, h)
    dim = spectrum.dim
    blk = BlockSpec(tuple(range(1, n_b1 + 1)))
    rng = np.random.default_rng(seed)
    width = 0.2 * n
    shell = energy_shell(spectrum, 0.0, width)
    ensembles = {
        "uniform": make_ensemble(spectrum, "uniform"),
        "canonical": make_ensemble(spectrum, "canonical", beta=beta),
        "microcanonical": make_ensemble(spectrum, "microcanonical", shell=shell),
    }
    checks: list[IdentityCheck] = []

    # per-state trade-off identity, all i, every ensemble
    worst = 0.0
    cases = 0
    for ens in ensembles.values():
        ls = ensemble_local_state(spectrum, ens, blk, rank_policy)
        rows = v_rows(spectrum, ls, np.arange(dim), blk)
        rhs = ls.tradeoff_rhs()
        for i in range(dim):
            res = abs(math.fsum(rows[i].tolist()) - rhs) / max(1.0, rhs)
            worst = max(worst, res)
            cases += 1
    checks.append(IdentityCheck("tradeoff_per_state", worst, RESIDUAL_RTOL, worst <= RESIDUAL_RTOL, cases))

    # pure-state identity: reference is the eigenstate itself
    worst = 0.0
    cases = 0
    for i in range(dim):
        ls = local_state(reduce_transition(spectrum, i, i, blk).matrix, rank_policy)
        row = v_rows(spectrum, ls, [i], blk)[0]
        rhs = ls.tradeoff_rhs()
        res = abs(math.fsum(row.tolist()) - rhs) / max(1.0, rhs)
        worst = max(worst, res)
        cases += 1
    checks.append(IdentityCheck("pure_state_identity", worst, RESIDUAL_RTOL, worst <= RESIDUAL_RTOL, cases))

    # probability-weighted identity
    worst = 0.0
    for ens in ensembles.values():
        rep = typicality(spectrum, ens, blk, rank_policy)
        worst = max(worst, abs(rep.identity_residual))
    checks.append(IdentityCheck("typicality_identity", worst, RESIDUAL_RTOL, worst <= RESIDUAL_RTOL, len(ensembles)))

    # averaged-observable identity, all i
    base = blk
    worst = 0.0
    cases = 0
    for ens in ensembles.values():
        for i in range(dim):
            rep = avg_tradeoff_report(spectrum, ens, i, base, rank_policy)
            res = abs(rep.residual) / max(1.0, abs(rep.rhs))
            worst = max(worst, res)
            cases += 1
    checks.append(IdentityCheck("avg_tradeoff_per_state", worst, RESIDUAL_RTOL, worst <= RESIDUAL_RTOL, cases))

    # averaged typicality identity
    worst = 0.0
    for ens in ensembles.values():
        rep = avg_typicality(spectrum, ens, base, rank_policy)
        worst = max(worst, abs(rep.identity_residual))
    checks.append(IdentityCheck("avg_typicality_identity", worst, RESIDUAL_RTOL, worst <= RESIDUAL_RTOL, len(ensembles)))

    # Hoelder chain 2 d2 <= d3 over the shell plus random column partners
    ens = ensembles["canonical"]
    ls = ensemble_local_state(spectrum, ens, blk, rank_policy)
    worst_slack = 0.0
    cases = 0
    for i in shell.members:
        partners = [int(i)] + [int(x) for x in rng.integers(0, dim, 3)]
        for j in partners:
            sigma = reduce_transition(spectrum, int(i), j, blk).matrix
            d2 = d2_measure(sigma, ls.matrix, diagonal=(i == j))
            d3 = math.sqrt(v_measure(spectrum, ens, int(i), j, blk, rank_policy, rho=ls))
            worst_slack = max(worst_slack, 2 * d2 - d3)
            cases += 1
    checks.append(IdentityCheck("holder_2d2_le_d3", worst_slack, 1e-10, worst_slack <= 1e-10, cases))

    # d1 bounded by d3 * operator norm, random observables
    worst_slack = 0.0
    cases = 0
    observables = [_random_hermitian(rng, blk.dim) for _ in range(10)]
    for a in observables:
        norm = float(np.linalg.norm(a, 2))
        for i in shell.members[:: max(1, len(shell.members) // 8)]:
            j = int(rng.integers(0, dim))
            d1 = d1_measure(spectrum, ens, int(i), j, a, blk)
            v = v_measure(spectrum, ens, int(i), j, blk, rank_policy, rho=ls)
            worst_slack = max(worst_slack, d1**2 - v * norm**2)
            cases += 1
    checks.append(IdentityCheck("d1_sq_le_v_normsq", worst_slack, 1e-10, worst_slack <= 1e-10, cases))

    # diagonal d1 bound via trace norm and second moment
    worst_slack = 0.0
    cases = 0
    for a in observables:
        for i in shell.members[:: max(1, len(shell.members) // 8)]:
            sigma = reduce_transition(spectrum, int(i), int(i), blk).matrix
            d1 = abs(complex(np.trace(a @ (sigma - ls.matrix))))
            tn = float(np.linalg.svd(sigma - ls.matrix, compute_uv=False).sum())
            second = complex(np.trace((sigma + ls.matrix) @ (a @ a))).real
            bound = math.sqrt(max(tn * second, 0.0))
            worst_slack = max(worst_slack, d1 - bound)
            cases += 1
    checks.append(IdentityCheck("diag_d1_trace_norm_bound", worst_slack, 1e-10, worst_slack <= 1e-10, cases))

    # averaged-observable d1 computed two ways
    worst = 0.0
    cases = 0
    for a in observables[:5]:
        i, j = (int(x) for x in rng.integers(0, dim, 2))
        _, _, diff = d1_avg_equality_check(spectrum, ens, i, j, a, base)
        worst = max(worst, diff)
        cases += 1
    checks.append(IdentityCheck("avg_d1_two_ways", worst, 1e-10, worst <= 1e-10, cases))

    # ratio reconstruction of the diagonal element
    worst = 0.0
    cases = 0
    for i in shell.members[:: max(1, len(shell.members) // 16)]:
        stats = offdiag_stats(spectrum, ens, int(i), blk, rank_policy, rho=ls)
        rhs = ls.tradeoff_rhs()
        rebuilt = dod_reconstruction(stats, rhs, dim)
        res = abs(rebuilt - stats.v_dg) / max(stats.v_dg, 1e-300)
        worst = max(worst, res)
        cases += 1
    checks.append(IdentityCheck("ratio_reconstruction", worst, RESIDUAL_RTOL, worst <= RESIDUAL_RTOL, cases))

    # strict policy must reject the singular local state of a product eigenstate
    expected: list[str] = []
    aux = get_spectrum(4, 0.0, 0.0)
    try:
        local_state(reduce_transition(aux, 0, 0, BlockSpec((1,))).matrix, "strict")
        checks.append(IdentityCheck("singular_strict_rejected", 1.0, 0.0, False, 1, "no error raised"))
    except SingularLocalState as exc:
        expected.append(f"SingularLocalState: {exc}")

    return IdentityReport(checks=tuple(checks), expected_errors=tuple(expected))


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class Diagnostics:
    dos_csv: str
    canonical_csv: str
    e_beta_csv: str
    mi_csv: str


def diagnostics(
    n: int = 12,
    g: float = 1.05,
    h: float = 0.1,
    beta: float = 0.1,
    bins: int = 60,
    beta_max: float = 5.0,
    beta_steps: int = 51,
) -> Diagnostics:
    """Model sanity tables: density of states, canonical energy distribution,
    the energy-temperature curve, and two-site mutual information vs distance."""
    spectrum = get_spectrum(n, g, h)
    meta = f"# ethlab diagnostics n={n} g={_fmt(g)} h={_fmt(h)} beta={_fmt(beta)}\n"

    hist = spectral_histogram(spectrum, bins)
    lines = [meta + "bin_left,bin_right,count"]
    for k in range(bins):
        lines.append(f"{_fmt(float(hist.edges[k]))},{_fmt(float(hist.edges[k + 1]))},{_fmt(float(hist.values[k]))}")
    dos_csv = "\n".join(lines) + "\n"

    ens = make_ensemble(spectrum, "canonical", beta=beta)
    whist = spectral_histogram(spectrum, bins, weights=ens)
    lines = [meta + "bin_left,bin_right,mass"]
    for k in range(bins):
        lines.append(f"{_fmt(float(whist.edges[k]))},{_fmt(float(whist.edges[k + 1]))},{_fmt(float(whist.values[k]))}")
    canonical_csv = "\n".join(lines) + "\n"

    lines = [meta + "beta,energy"]
    for b in np.linspace(0.0, beta_max, beta_steps):
        lines.append(f"{_fmt(float(b))},{_fmt(mean_energy(spectrum, float(b)))}")
    e_beta_csv = "\n".join(lines) + "\n"

    lines = [meta + "distance,mutual_information"]
    for d in range(1, n // 2 + 1):
        mi = mutual_information(spectrum, ens, BlockSpec((1,)), BlockSpec((1 + d,)))
        lines.append(f"{d},{_fmt(mi)}")
    mi_csv = "\n".join(lines) + "\n"

    return Diagnostics(dos_csv=dos_csv, canonical_csv=canonical_csv, e_beta_csv=e_beta_csv, mi_csv=mi_csv)


def spectrum_table(n: int, g: float, h: float) -> str:
    spectrum = get_spectrum(n, g, h)
    lines = [f"# ethlab spectrum n={n} g={_fmt(g)} h={_fmt(h)}\ni,E_i"]
    for i, e in enumerate(spectrum.energies):
        lines.append(f"{i},{_fmt(float(e))}")
    return "\n".join(lines) + "\n"
