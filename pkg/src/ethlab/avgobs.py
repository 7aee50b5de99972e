"""Translation-averaged observables and their trade-off identity.

The chain splits into C = n / n_b1 contiguous blocks, each a translated copy
of the base block.  Averaging the rescaled transition operators over the C
copies suppresses spatial fluctuations; the price is a correlation term in the
trade-off identity:

    v_avg(i,i) + sum_{j != i} v_avg(i,j)
        = (Tr(rho_bar^{-1}) - 1) / C + rhs_corr(i),

where rho_bar is the block average of the ensemble's reduced states and
rhs_corr couples pairs of distinct blocks through the joint reduced states.

Because a cyclic shift preserves the relative order of sites inside a
contiguous block, the reduced matrix over block k (sites ascending) *is* the
base-frame translational copy; no extra basis bookkeeping is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, InvalidSpec
from .measures import LocalState, local_state
from .reduced import (
    BlockSpec,
    reduce_ensemble,
    reduce_joint,
    reduce_transition,
    transition_rows,
)
from .spectral import EnsembleState, Spectrum

TRANSLATION_INVARIANT_KINDS = ("canonical", "microcanonical", "uniform")


def chain_blocks(n: int, base: BlockSpec) -> list[BlockSpec]:
    """The C translated copies of the base block tiling the chain."""
    sites = base.sites
    nb = len(sites)
    if sites != tuple(range(1, nb + 1)):
        raise InvalidSpec(f"base block must be the contiguous sites 1..{nb}, got {sites}")
    if n % nb != 0:
        raise InvalidSpec(f"chain of {n} sites is not divisible into blocks of {nb}")
    return [BlockSpec(tuple(range(k * nb + 1, (k + 1) * nb + 1))) for k in range(n // nb)]


def _require_invariant(ensemble: EnsembleState, allow_noninvariant: bool) -> None:
    if ensemble.kind not in TRANSLATION_INVARIANT_KINDS and not allow_noninvariant:
        raise InvalidSpec(
            f"averaged-observable runs expect a translation-invariant ensemble; "
            f"got kind {ensemble.kind!r} (pass allow_noninvariant=True to override)"
        )


def averaged_local_state(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    base: BlockSpec,
    rank_policy: str = "strict",
) -> LocalState:
    """rho_bar = (1/C) sum_k rho_{B_k}; equals rho_{B_1} for invariant ensembles."""
    blocks = chain_blocks(spectrum.n_sites, base)
    acc = reduce_ensemble(spectrum, ensemble, blocks[0])
    for blk in blocks[1:]:
        acc = acc + reduce_ensemble(spectrum, ensemble, blk)
    return local_state(acc / len(blocks), rank_policy)


@dataclass(frozen=True)
class AveragedTransition:
    """Translated transition blocks and their averaged rescaled observable."""

    i: int
    j: int
    sigma_k: list[np.ndarray]
    state: LocalState
    o_bar: np.ndarray  # site basis, on the base block

    @property
    def copies(self) -> int:
        return len(self.sigma_k)

    def sigma_bar(self) -> np.ndarray:
        return sum(self.sigma_k) / self.copies


def averaged_transition(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    i: int,
    j: int,
    base: BlockSpec,
    rank_policy: str = "strict",
    allow_noninvariant: bool = False,
) -> AveragedTransition:
    _require_invariant(ensemble, allow_noninvariant)
    blocks = chain_blocks(spectrum.n_sites, base)
    sigma_k = [reduce_transition(spectrum, i, j, blk).matrix for blk in blocks]
    ls = averaged_local_state(spectrum, ensemble, base, rank_policy)
    u = ls.basis
    isp = 1.0 / np.sqrt(ls.p)
    sig_bar = sum(sigma_k) / len(blocks)
    tilde = (u.conj().T @ sig_bar @ u) * np.outer(isp, isp)
    return AveragedTransition(i=i, j=j, sigma_k=sigma_k, state=ls, o_bar=u @ tilde @ u.conj().T)


def _v_avg_from_sum(sigma_sum: np.ndarray, ls: LocalState, copies: int, diagonal: bool) -> float:
    tilde = ls.basis.conj().T @ sigma_sum @ ls.basis
    val = float(np.sum((tilde.real**2 + tilde.imag**2) / ls.p[None, :])) / copies**2
    return val - (1.0 if diagonal else 0.0)


def v_avg(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    i: int,
    j: int,
    base: BlockSpec,
    rank_policy: str = "strict",
    rho_bar: LocalState | None = None,
    allow_noninvariant: bool = False,
) -> float:
    """Variance measure of the averaged rescaled observable, clamped at zero."""
    _require_invariant(ensemble, allow_noninvariant)
    blocks = chain_blocks(spectrum.n_sites, base)
    ls = rho_bar or averaged_local_state(spectrum, ensemble, base, rank_policy)
    sigma_sum = sum(reduce_transition(spectrum, i, j, blk).matrix for blk in blocks)
    val = _v_avg_from_sum(sigma_sum, ls, len(blocks), i == j)
    if val < -1e-10:
        raise InternalConsistencyError(f"v_avg({i},{j}) = {val:.3e} violates nonnegativity")
    return max(val, 0.0)


def v_avg_bruteforce(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    i: int,
    j: int,
    base: BlockSpec,
    rank_policy: str = "strict",
) -> float:
    """Definitional oracle for v_avg: embed the averaged rescaled operator on
    the base block and evaluate the full-space variance literally.

    Note the averaged operator lives on the base block; translation averaging
    happens when the operator is assembled, not by summing embedded copies
    (a full-space copy sum has genuinely different cross-block moments).
    """
    from .measures import embed_block_operator

    n = spectrum.n_sites
    if n > 8:
        raise InvalidSpec("averaged brute force is limited to n <= 8")
    avg = averaged_transition(spectrum, ensemble, i, j, base, rank_policy)
    a_full = embed_block_operator(avg.o_bar, base, n)
    rho_full = (spectrum.vectors * ensemble.weights) @ spectrum.vectors.conj().T
    mean = np.trace(a_full @ rho_full)
    shifted = a_full - mean * np.eye(len(a_full))
    return float(np.trace(shifted.conj().T @ rho_full @ shifted).real)


def v_avg_rows(
    spectrum: Spectrum,
    ls: LocalState,
    i_list,
    base: BlockSpec,
    batch: int = 64,
) -> np.ndarray:
    """Raw v_avg(i, j) for each i in i_list against every j (unclamped)."""
    blocks = chain_blocks(spectrum.n_sites, base)
    i_list = np.asarray(i_list, dtype=np.intp)
    copies = len(blocks)
    u = ls.basis
    inv_p = 1.0 / ls.p
    out = np.empty((len(i_list), spectrum.dim))
    for lo in range(0, len(i_list), batch):
        idx = i_list[lo : lo + batch]
        acc = None
        for blk in blocks:
            rows = transition_rows(spectrum, idx, blk)
            acc = rows if acc is None else acc + rows
        tilde = np.matmul(u.conj().T, np.matmul(acc, u))
        vals = np.einsum("mjab,b->mj", tilde.real**2 + tilde.imag**2, inv_p) / copies**2
        vals[np.arange(len(idx)), idx] -= 1.0
        out[lo : lo + batch] = vals
    return out


def _pair_contrib(t_joint: np.ndarray, ls: LocalState) -> float:
    """sum_{a,b} <ab|T|ba> / p_b in the averaged state's eigenbasis."""
    u2 = np.kron(ls.basis, ls.basis)
    tt = u2.conj().T @ t_joint @ u2
    db = ls.dim
    core = np.einsum("abba->ab", tt.reshape(db, db, db, db))
    return float((core / ls.p[None, :]).sum().real)


def avg_tradeoff_rhs_corr(
    spectrum: Spectrum,
    ensemble_or_index: EnsembleState | int,
    base: BlockSpec,
    ls: LocalState,
    *,
    use_translation_symmetry: bool = False,
) -> float:
    """The block-pair coupling term of the averaged trade-off identity.

    For an eigenstate index i the pair term couples sigma^{ii} across blocks;
    for an ensemble it couples the ensemble's joint reduced states (the
    correlation term).  With `use_translation_symmetry` the ordered k != l
    double loop collapses to the C-1 distinct separations, each weighted C.
    """
    blocks = chain_blocks(spectrum.n_sites, base)
    copies = len(blocks)
    if copies == 1:
        return 0.0

    def pair(k: int, l: int) -> float:
        joint = reduce_joint(spectrum, ensemble_or_index, blocks[k], blocks[l])
        if isinstance(ensemble_or_index, EnsembleState):
            left = reduce_ensemble(spectrum, ensemble_or_index, blocks[k])
        else:
            left = reduce_transition(
                spectrum, ensemble_or_index, ensemble_or_index, blocks[k]
            ).matrix
        return _pair_contrib(joint - np.kron(left, ls.matrix), ls)

    if use_translation_symmetry:
        total = math.fsum(pair(0, s) for s in range(1, copies))
        return total / copies
    total = math.fsum(pair(k, l) for k in range(copies) for l in range(copies) if k != l)
    return total / copies**2


@dataclass(frozen=True)
class AvgTradeoffReport:
    lhs: float
    rhs_local: float
    rhs_corr: float

    @property
    def rhs(self) -> float:
        return self.rhs_local + self.rhs_corr

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs

    def within(self, rtol: float = 1e-8) -> bool:
        return abs(self.residual) <= rtol * max(1.0, abs(self.rhs))


def avg_tradeoff_report(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    i: int,
    base: BlockSpec,
    rank_policy: str = "strict",
    rho_bar: LocalState | None = None,
    allow_noninvariant: bool = False,
) -> AvgTradeoffReport:
    """Averaged-observable trade-off: full j sweep vs local + pair terms."""
    _require_invariant(ensemble, allow_noninvariant)
    copies = spectrum.n_sites // len(base.sites)
    ls = rho_bar or averaged_local_state(spectrum, ensemble, base, rank_policy)
    row = v_avg_rows(spectrum, ls, [i], base)[0]
    lhs = math.fsum(row.tolist())
    rhs_local = ls.tradeoff_rhs() / copies
    rhs_corr = avg_tradeoff_rhs_corr(spectrum, i, base, ls)
    return AvgTradeoffReport(lhs=lhs, rhs_local=rhs_local, rhs_corr=rhs_corr)


def correlation_term(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    base: BlockSpec,
    rank_policy: str = "strict",
    rho_bar: LocalState | None = None,
    use_translation_symmetry: bool = True,
    allow_noninvariant: bool = False,
) -> float:
    """V_cor: how ensemble spatial correlations shift the averaged identity."""
    _require_invariant(ensemble, allow_noninvariant)
    ls = rho_bar or averaged_local_state(spectrum, ensemble, base, rank_policy)
    return avg_tradeoff_rhs_corr(
        spectrum, ensemble, base, ls, use_translation_symmetry=use_translation_symmetry
    )


@dataclass(frozen=True)
class AvgTypicalityReport:
    v_dg_mean: float
    v_off_mean: float
    rhs_local: float
    rhs_corr: float
    identity_residual: float


def avg_typicality(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    base: BlockSpec,
    rank_policy: str = "strict",
    rho_bar: LocalState | None = None,
    allow_noninvariant: bool = False,
) -> AvgTypicalityReport:
    """Probability-weighted averaged measures and their trade-off residual."""
    _require_invariant(ensemble, allow_noninvariant)
    copies = spectrum.n_sites // len(base.sites)
    ls = rho_bar or averaged_local_state(spectrum, ensemble, base, rank_policy)
    support = ensemble.support
    p = ensemble.weights[support]
    rows = v_avg_rows(spectrum, ls, support, base)
    dim = spectrum.dim
    diag = rows[np.arange(len(support)), support]
    off_sum = np.array([math.fsum(r.tolist()) - r[i] for r, i in zip(rows, support)])
    v_dg_mean = math.fsum((p * np.maximum(diag, 0.0)).tolist())
    v_off_mean = math.fsum((p * np.maximum(off_sum, 0.0)).tolist()) / (dim - 1)
    lhs = math.fsum((p * (diag + off_sum)).tolist())
    rhs_local = ls.tradeoff_rhs() / copies
    rhs_corr = correlation_term(
        spectrum, ensemble, base, rank_policy, rho_bar=ls, allow_noninvariant=allow_noninvariant
    )
    return AvgTypicalityReport(
        v_dg_mean=v_dg_mean,
        v_off_mean=v_off_mean,
        rhs_local=rhs_local,
        rhs_corr=rhs_corr,
        identity_residual=lhs - rhs_local - rhs_corr,
    )


def d1_avg_equality_check(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    i: int,
    j: int,
    observable: np.ndarray,
    base: BlockSpec,
) -> tuple[float, float, float]:
    """d1 with the averaged observable, computed two independent ways.

    lhs works block by block on the full chain (matrix elements of each
    translated copy); rhs works entirely on the base block with the averaged
    transition matrix and averaged local state.  The two are equal by the
    translation identity; returns (lhs, rhs, |lhs - rhs|).
    """
    blocks = chain_blocks(spectrum.n_sites, base)
    copies = len(blocks)
    delta = 1.0 if i == j else 0.0
    terms = []
    sig_sum = None
    rho_sum = None
    for blk in blocks:
        sig = reduce_transition(spectrum, i, j, blk).matrix
        rho = reduce_ensemble(spectrum, ensemble, blk)
        terms.append(complex(np.trace(observable @ sig)) - delta * complex(np.trace(observable @ rho)))
        sig_sum = sig if sig_sum is None else sig_sum + sig
        rho_sum = rho if rho_sum is None else rho_sum + rho
    lhs = abs(sum(terms) / copies)
    rhs = abs(complex(np.trace(observable @ (sig_sum / copies - delta * rho_sum / copies))))
    return float(lhs), float(rhs), float(abs(lhs - rhs))
