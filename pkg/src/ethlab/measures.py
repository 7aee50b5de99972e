"""Distinguishability measures between eigenstates and reference ensembles.

Central objects, all evaluated on a block B with reference local state
rho_B = Tr_rest(rho):

  * v(i, j)   variance-based measure: Tr(sigma^{ij} rho_B^{-1} sigma^{ij,dag}) - delta_ij.
              Its square root is the measurement-independent distinguishability.
  * d1        |Tr[A (sigma^{ij} - delta_ij rho_B)]| for an observable A on the block.
  * d2        half the trace norm of sigma^{ij} - delta_ij rho_B.

The exact trade-off identity pins the full row sum of v to a purely local
quantity:  v(i,i) + sum_{j != i} v(i,j) = Tr(rho_B^{-1}) - 1.  The row sweep
here always runs over every j explicitly (exactly summed via math.fsum), so
identity checks never lean on the identity itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionLimit, InternalConsistencyError, InvalidSpec, SingularLocalState
from .reduced import (
    BlockSpec,
    TransitionBlock,
    reduce_ensemble,
    reduce_transition,
    site_order_gather,
    transition_diag,
    transition_rows,
    _full_order,
)
from .spectral import EnsembleState, Spectrum

RANK_POLICIES = ("strict", "pseudo")

# results mathematically >= 0 may round off slightly negative
NEGATIVE_TOL = 1e-10

# relative rank cutoff: block_dim * double eps
_EPS = 2.2e-16

BRUTEFORCE_LIMIT = 8


@dataclass(frozen=True)
class LocalState:
    """Eigendecomposition of a reference local state with its rank policy.

    `p` holds the kept eigenvalues (ascending), `basis` the matching
    eigenvectors; `dropped` counts zero modes projected out under the pseudo
    policy.
    """

    matrix: np.ndarray
    p: np.ndarray
    basis: np.ndarray
    dropped: int
    policy: str

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def warned(self) -> bool:
        return self.dropped > 0

    def inverse(self) -> np.ndarray:
        return (self.basis / self.p) @ self.basis.conj().T

    def tradeoff_rhs(self) -> float:
        """Tr(rho^{-1}) - 1, the local side of the trade-off identity."""
        return math.fsum((1.0 / self.p).tolist()) - 1.0


def local_state(rho: np.ndarray, rank_policy: str = "strict") -> LocalState:
    """Diagonalize a local density matrix, enforcing the rank policy.

    Cutoff is dim * eps * max eigenvalue; below it the state counts as
    singular: `strict` raises, `pseudo` projects the zero modes out.
    """
    if rank_policy not in RANK_POLICIES:
        raise InvalidSpec(f"rank policy must be one of {RANK_POLICIES}, got {rank_policy!r}")
    rho = np.asarray(rho)
    lam, u = np.linalg.eigh(rho)
    cutoff = rho.shape[0] * _EPS * max(lam[-1], 0.0)
    if lam[0] < cutoff:
        if rank_policy == "strict":
            raise SingularLocalState(
                f"local state eigenvalue {lam[0]:.3e} below cutoff {cutoff:.3e}; "
                "use rank_policy='pseudo' to project out zero modes"
            )
        keep = lam >= cutoff
        return LocalState(rho, lam[keep], u[:, keep], int((~keep).sum()), rank_policy)
    return LocalState(rho, lam, u, 0, rank_policy)


def ensemble_local_state(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    blk: BlockSpec,
    rank_policy: str = "strict",
) -> LocalState:
    return local_state(reduce_ensemble(spectrum, ensemble, blk), rank_policy)


@dataclass(frozen=True)
class RescaledObservable:
    """O_ij = rho^{-1/2} sigma^{ij} rho^{-1/2}, stored in rho's eigenbasis."""

    matrix: np.ndarray
    i: int
    j: int
    state: LocalState

    @property
    def warned(self) -> bool:
        return self.state.warned

    def to_site_basis(self) -> np.ndarray:
        u = self.state.basis
        return u @ self.matrix @ u.conj().T

    def unscale(self) -> np.ndarray:
        """Apply the forward rescaling (conjugation by rho^{1/2}); recovers sigma."""
        u = self.state.basis
        sp = np.sqrt(self.state.p)
        return u @ (self.matrix * np.outer(sp, sp)) @ u.conj().T


def rescaled_observable(
    sigma: TransitionBlock,
    rho: np.ndarray | LocalState,
    rank_policy: str = "strict",
) -> RescaledObservable:
    ls = rho if isinstance(rho, LocalState) else local_state(rho, rank_policy)
    u = ls.basis
    isp = 1.0 / np.sqrt(ls.p)
    tilde = (u.conj().T @ sigma.matrix @ u) * np.outer(isp, isp)
    return RescaledObservable(matrix=tilde, i=sigma.i, j=sigma.j, state=ls)


def _v_from_sigma(sigma_mat: np.ndarray, ls: LocalState, diagonal: bool) -> float:
    """v = sum_{a,b} |<a|sigma|b>|^2 / p_b - delta, in the local eigenbasis."""
    tilde = ls.basis.conj().T @ sigma_mat @ ls.basis
    val = float(np.sum((tilde.real**2 + tilde.imag**2) / ls.p[None, :]))
    return val - (1.0 if diagonal else 0.0)


def _checked(value: float, what: str) -> float:
    if value < -NEGATIVE_TOL:
        raise InternalConsistencyError(f"{what} = {value:.3e} violates nonnegativity")
    return max(value, 0.0)


def v_measure(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    i: int,
    j: int,
    blk: BlockSpec,
    rank_policy: str = "strict",
    rho: LocalState | None = None,
) -> float:
    """Closed-form variance measure for one (i, j) pair, clamped at zero."""
    ls = rho or ensemble_local_state(spectrum, ensemble, blk, rank_policy)
    sigma = reduce_transition(spectrum, i, j, blk)
    return _checked(_v_from_sigma(sigma.matrix, ls, i == j), f"v({i},{j})")


def v_rows(
    spectrum: Spectrum,
    ls: LocalState,
    i_list,
    blk: BlockSpec,
    batch: int = 64,
) -> np.ndarray:
    """Raw v(i, j) for each i in i_list against every j; shape (len(i_list), dim).

    Values are *not* clamped: row sums feed the identity checks, and clamping
    would bias them by up to dim * NEGATIVE_TOL.
    """
    i_list = np.asarray(i_list, dtype=np.intp)
    u = ls.basis
    inv_p = 1.0 / ls.p
    out = np.empty((len(i_list), spectrum.dim))
    for lo in range(0, len(i_list), batch):
        idx = i_list[lo : lo + batch]
        rows = transition_rows(spectrum, idx, blk)  # (m, dim, db, db)
        tilde = np.matmul(u.conj().T, np.matmul(rows, u))
        vals = np.einsum("mjab,b->mj", tilde.real**2 + tilde.imag**2, inv_p)
        vals[np.arange(len(idx)), idx] -= 1.0
        out[lo : lo + batch] = vals
    low = out.min()
    if low < -NEGATIVE_TOL:
        raise InternalConsistencyError(f"v sweep produced {low:.3e} < -{NEGATIVE_TOL}")
    return out


def v_measure_bruteforce(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    i: int,
    j: int,
    blk: BlockSpec,
    rank_policy: str = "strict",
) -> float:
    """Definitional oracle: embed O_ij on the block and evaluate the variance
    Tr[(A - <A>)^dag rho (A - <A>)] on the full Hilbert space.

    Deliberately independent of the closed form used by v_measure; restricted
    to small chains because it materializes dim x dim matrices.
    """
    n = spectrum.n_sites
    if n > BRUTEFORCE_LIMIT:
        raise DimensionLimit(f"brute-force variance is limited to n <= {BRUTEFORCE_LIMIT}")
    ls = ensemble_local_state(spectrum, ensemble, blk, rank_policy)
    sigma = reduce_transition(spectrum, i, j, blk)
    o_site = rescaled_observable(sigma, ls).to_site_basis()
    a_full = embed_block_operator(o_site, blk, n)
    rho_full = (spectrum.vectors * ensemble.weights) @ spectrum.vectors.conj().T
    mean = np.trace(a_full @ rho_full)
    shifted = a_full - mean * np.eye(len(a_full))
    return float(np.trace(shifted.conj().T @ rho_full @ shifted).real)


def embed_block_operator(op: np.ndarray, blk: BlockSpec, n: int) -> np.ndarray:
    """Dense embedding of a block operator against identity elsewhere (oracle scale)."""
    if n > 10:
        raise DimensionLimit("dense block embedding is reserved for n <= 10")
    blk.validate(n)
    g = site_order_gather(n, _full_order(n, blk.sites))
    rest = (1 << n) // blk.dim
    k = np.kron(op, np.eye(rest))
    full = np.zeros((1 << n, 1 << n), dtype=k.dtype)
    full[np.ix_(g, g)] = k
    return full


def d1_measure(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    i: int,
    j: int,
    observable: np.ndarray,
    blk: BlockSpec,
) -> float:
    """|Tr[A (sigma^{ij} - delta_ij rho_B)]| for a Hermitian block observable."""
    sigma = reduce_transition(spectrum, i, j, blk)
    delta = sigma.matrix.copy()
    if i == j:
        delta -= reduce_ensemble(spectrum, ensemble, blk)
    return abs(complex(np.trace(observable @ delta)))


def d2_measure(sigma_mat: np.ndarray, rho_mat: np.ndarray, diagonal: bool) -> float:
    """Half trace norm of sigma - delta * rho (half the sum of singular values)."""
    delta = sigma_mat - rho_mat if diagonal else sigma_mat
    return 0.5 * float(np.linalg.svd(delta, compute_uv=False).sum())


def d3_measure(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    i: int,
    j: int,
    blk: BlockSpec,
    rank_policy: str = "strict",
) -> float:
    return math.sqrt(v_measure(spectrum, ensemble, i, j, blk, rank_policy))


def tradeoff_rhs(rho: np.ndarray | LocalState, rank_policy: str = "strict") -> float:
    ls = rho if isinstance(rho, LocalState) else local_state(rho, rank_policy)
    return ls.tradeoff_rhs()


@dataclass(frozen=True)
class TradeoffReport:
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs

    def within(self, rtol: float = 1e-8) -> bool:
        return abs(self.residual) <= rtol * max(1.0, self.rhs)


def tradeoff_report(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    i: int,
    blk: BlockSpec,
    rank_policy: str = "strict",
    rho: LocalState | None = None,
) -> TradeoffReport:
    """Exact-identity check: explicit row sweep against Tr(rho_B^{-1}) - 1."""
    ls = rho or ensemble_local_state(spectrum, ensemble, blk, rank_policy)
    row = v_rows(spectrum, ls, [i], blk)[0]
    return TradeoffReport(lhs=math.fsum(row.tolist()), rhs=ls.tradeoff_rhs())


@dataclass(frozen=True)
class OffdiagStats:
    v_dg: float
    v_off_sum: float
    v_off_avg: float
    f_ratio: float


def _offdiag_from_row(row: np.ndarray, i: int) -> OffdiagStats:
    dim = len(row)
    v_dg = max(row[i], 0.0)
    off_sum = max(math.fsum(row.tolist()) - row[i], 0.0)
    off_avg = off_sum / (dim - 1)
    f = math.inf if off_avg == 0.0 else v_dg / off_avg
    return OffdiagStats(v_dg=float(v_dg), v_off_sum=float(off_sum), v_off_avg=float(off_avg), f_ratio=float(f))


def offdiag_stats(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    i: int,
    blk: BlockSpec,
    rank_policy: str = "strict",
    rho: LocalState | None = None,
) -> OffdiagStats:
    """Off-diagonal row statistics: sum, average, and the diagonal/average ratio.

    f_ratio is +inf when the off-diagonal average vanishes (pure reference on
    its own state); callers exclude those entries from fits.
    """
    ls = rho or ensemble_local_state(spectrum, ensemble, blk, rank_policy)
    row = v_rows(spectrum, ls, [i], blk)[0]
    return _offdiag_from_row(row, i)


def dod_reconstruction(stats: OffdiagStats, rhs: float, dim: int) -> float:
    """Reconstruct v_dg from the ratio f and the identity's right side.

    Exact algebra from v_dg + (dim-1) v_off = rhs with f = v_dg / v_off:
    v_dg = f / (f + dim - 1) * rhs.
    """
    f = stats.f_ratio
    if math.isinf(f):
        return rhs
    return f / (f + dim - 1) * rhs


@dataclass(frozen=True)
class MeasureRecord:
    """Everything the per-eigenstate sweep emits for one row."""

    i: int
    energy: float
    v_dg: float
    v_off_sum: float
    v_off_avg: float
    f_ratio: float
    d2_dg: float
    d3_dg: float
    tradeoff_lhs: float
    tradeoff_rhs: float
    tradeoff_residual: float
    d1: float | None = None


def measure_record(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    i: int,
    blk: BlockSpec,
    rank_policy: str = "strict",
    observable: np.ndarray | None = None,
    rho: LocalState | None = None,
    row: np.ndarray | None = None,
) -> MeasureRecord:
    """Assemble the full per-eigenstate record from a single row sweep."""
    ls = rho or ensemble_local_state(spectrum, ensemble, blk, rank_policy)
    if row is None:
        row = v_rows(spectrum, ls, [i], blk)[0]
    stats = _offdiag_from_row(row, i)
    lhs = math.fsum(row.tolist())
    rhs = ls.tradeoff_rhs()
    sigma = reduce_transition(spectrum, i, i, blk)
    d2 = d2_measure(sigma.matrix, ls.matrix, diagonal=True)
    d1 = None
    if observable is not None:
        d1 = abs(complex(np.trace(observable @ (sigma.matrix - ls.matrix))))
    return MeasureRecord(
        i=int(i),
        energy=float(spectrum.energies[i]),
        v_dg=stats.v_dg,
        v_off_sum=stats.v_off_sum,
        v_off_avg=stats.v_off_avg,
        f_ratio=stats.f_ratio,
        d2_dg=d2,
        d3_dg=math.sqrt(stats.v_dg),
        tradeoff_lhs=lhs,
        tradeoff_rhs=rhs,
        tradeoff_residual=lhs - rhs,
        d1=d1,
    )


@dataclass(frozen=True)
class TypicalityReport:
    v_dg_mean: float
    v_off_mean: float
    identity_residual: float


def typicality(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    blk: BlockSpec,
    rank_policy: str = "strict",
    rho: LocalState | None = None,
) -> TypicalityReport:
    """Probability-weighted averages <V_dg> and <V_off> with their identity residual.

    residual = <V_dg> + (dim-1) <V_off> - (Tr(rho_B^{-1}) - 1), which vanishes
    exactly because the trade-off identity holds row by row.
    """
    ls = rho or ensemble_local_state(spectrum, ensemble, blk, rank_policy)
    support = ensemble.support
    p = ensemble.weights[support]
    rows = v_rows(spectrum, ls, support, blk)
    dim = spectrum.dim
    diag = rows[np.arange(len(support)), support]
    off_sum = np.array([math.fsum(r.tolist()) - r[i] for r, i in zip(rows, support)])
    v_dg_mean = math.fsum((p * np.maximum(diag, 0.0)).tolist())
    v_off_mean = math.fsum((p * np.maximum(off_sum, 0.0)).tolist()) / (dim - 1)
    lhs_rows = off_sum + diag
    lhs = math.fsum((p * lhs_rows).tolist())
    return TypicalityReport(
        v_dg_mean=v_dg_mean,
        v_off_mean=v_off_mean,
        identity_residual=lhs - ls.tradeoff_rhs(),
    )


@dataclass(frozen=True)
class WeakEthReport:
    """Concentration data for d1 over an ensemble (discrete weights).

    `delta` is the weighted second moment of the diagonal d1 values.  Two tail
    bounds are reported: `squared` follows the stated form delta^2/eps^2,
    `second_moment` the standard Chebyshev/Markov form delta/eps^2 (delta is
    already a second moment).  The empirical tail is the weight of states with
    d1 >= eps.
    """

    delta: float
    d1_values: np.ndarray
    weights: np.ndarray

    def bound_squared(self, eps: float) -> float:
        return self.delta**2 / eps**2

    def bound_second_moment(self, eps: float) -> float:
        return self.delta / eps**2

    def empirical_tail(self, eps: float) -> float:
        return float(self.weights[self.d1_values >= eps].sum())


def weak_eth_delta(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    observable: np.ndarray,
    blk: BlockSpec,
) -> WeakEthReport:
    """Delta = sum_i p_i d1(i, i; A)^2 over the ensemble's support."""
    support = ensemble.support
    p = ensemble.weights[support]
    sig = transition_diag(spectrum, support, blk)
    rho = reduce_ensemble(spectrum, ensemble, blk)
    mean = complex(np.trace(observable @ rho))
    traces = np.einsum("ab,mba->m", observable, sig)
    d1 = np.abs(traces - mean)
    delta = math.fsum((p * d1**2).tolist())
    return WeakEthReport(delta=delta, d1_values=d1, weights=p)


@dataclass(frozen=True)
class ShellStats:
    vbar_dg: float
    vbar_off: float
    v_dg_max: float
    v_off_max: float
    argmax_dg: int
    argmax_off: tuple[int, int]


def shell_stats(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    members: np.ndarray,
    blk: BlockSpec,
    rank_policy: str = "strict",
    rho: LocalState | None = None,
    p_weighted: bool = False,
) -> ShellStats:
    """Averages and maxima of the measure over an index set.

    Averages weigh shell members uniformly by default; `p_weighted` switches
    to ensemble-probability weights (renormalized on the set).  The
    off-diagonal maximum scans every j for each member i.
    """
    members = np.asarray(members, dtype=np.intp)
    ls = rho or ensemble_local_state(spectrum, ensemble, blk, rank_policy)
    rows = v_rows(spectrum, ls, members, blk)
    m = len(members)
    if p_weighted:
        w = ensemble.weights[members]
        total = w.sum()
        if total <= 0:
            raise InvalidSpec("p-weighted shell stats need ensemble support on the shell")
        w = w / total
    else:
        w = np.full(m, 1.0 / m)
    diag = np.maximum(rows[np.arange(m), members], 0.0)
    off_masked = rows.copy()
    off_masked[np.arange(m), members] = -np.inf
    off_avg = np.array(
        [max(math.fsum(r.tolist()) - r[i], 0.0) for r, i in zip(rows, members)]
    ) / (spectrum.dim - 1)
    vbar_dg = math.fsum((w * diag).tolist())
    vbar_off = math.fsum((w * off_avg).tolist())
    k_dg = int(np.argmax(diag))
    flat = int(np.argmax(off_masked))
    k_off, j_off = divmod(flat, spectrum.dim)
    return ShellStats(
        vbar_dg=vbar_dg,
        vbar_off=vbar_off,
        v_dg_max=float(diag[k_dg]),
        v_off_max=float(max(off_masked[k_off, j_off], 0.0)),
        argmax_dg=int(members[k_dg]),
        argmax_off=(int(members[k_off]), int(j_off)),
    )
