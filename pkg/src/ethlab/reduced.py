"""Partial traces: transition blocks, reduced ensembles, joint blocks, entropies.

Everything here avoids the dense outer product |E_i><E_j|.  A transition block
sigma^{ij} = Tr_rest |E_i><E_j| is computed as M_i M_j^dag where M_i is the
eigenvector reshaped to (block, rest) after permuting the block's sites to the
most significant bit positions.  That single matrix product costs
O(dim * block_dim) per pair, which is what makes full sweeps over all j
feasible at dim = 4096.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, InvalidSpec
from .spectral import EnsembleState, Spectrum

# Permuted eigenvector copies kept per spectrum before eviction (bytes).
HEAVY_CACHE_BUDGET = 800_000_000

ENTROPY_CUTOFF = 1e-14
PSD_FLOOR = -1e-12


@dataclass(frozen=True)
class BlockSpec:
    """A subset of chain sites (1-based, strictly increasing)."""

    sites: tuple[int, ...]

    def __post_init__(self):
        s = self.sites
        if len(s) == 0:
            raise InvalidSpec("block must contain at least one site")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise InvalidSpec(f"block sites must be strictly increasing, got {s}")
        if s[0] < 1:
            raise InvalidSpec(f"sites are 1-based, got {s}")

    @property
    def dim(self) -> int:
        return 1 << len(self.sites)

    def validate(self, n: int) -> None:
        if self.sites[-1] > n:
            raise InvalidSpec(f"block {self.sites} does not fit a chain of {n} sites")


def block(*sites: int) -> BlockSpec:
    return BlockSpec(tuple(sites))


@dataclass(frozen=True)
class TransitionBlock:
    """sigma^{ij} = Tr_rest |E_i><E_j| on a block."""

    matrix: np.ndarray
    i: int
    j: int
    block: BlockSpec


def site_order_gather(n: int, order: tuple[int, ...]) -> np.ndarray:
    """Index array g with (psi[g])[p] = psi amplitude of the reordered basis.

    `order` lists all n sites with the block sites first; bit q (from the MSB)
    of the new index p is the spin of site order[q].
    """
    if sorted(order) != list(range(1, n + 1)):
        raise InvalidSpec(f"order must be a permutation of 1..{n}, got {order}")
    p = np.arange(1 << n)
    g = np.zeros(1 << n, dtype=np.intp)
    for q, site in enumerate(order):
        g |= ((p >> (n - 1 - q)) & 1).astype(np.intp) << (n - site)
    return g


def _full_order(n: int, front: tuple[int, ...]) -> tuple[int, ...]:
    rest = tuple(s for s in range(1, n + 1) if s not in front)
    return front + rest


def _gather(spectrum: Spectrum, front: tuple[int, ...]) -> np.ndarray:
    key = front
    g = spectrum._gather_cache.get(key)
    if g is None:
        g = site_order_gather(spectrum.n_sites, _full_order(spectrum.n_sites, front))
        spectrum._gather_cache[key] = g
    return g


def _heavy(spectrum: Spectrum, key: tuple, builder) -> np.ndarray:
    """Insert-or-get into the byte-budgeted cache of permuted eigenvector copies."""
    cache = spectrum._heavy_cache
    if key in cache:
        return cache[key]
    arr = builder()
    # evict oldest entries first; always admit the newest
    while cache and spectrum._heavy_bytes + arr.nbytes > HEAVY_CACHE_BUDGET:
        old = cache.pop(next(iter(cache)))
        spectrum._heavy_bytes -= old.nbytes
    cache[key] = arr
    spectrum._heavy_bytes += arr.nbytes
    return arr


def permuted_vectors(spectrum: Spectrum, front: tuple[int, ...]) -> np.ndarray:
    """Eigenvector matrix with rows reordered so `front` sites are most significant."""
    g = _gather(spectrum, front)
    return _heavy(spectrum, ("perm", front), lambda: spectrum.vectors[g])


def row_kernel(spectrum: Spectrum, front: tuple[int, ...]) -> np.ndarray:
    """(rest_dim, block_dim * dim) matrix K with K[c, (b, j)] = conj psi_j[(b, c)].

    One dgemm against this kernel yields sigma^{ij} for a batch of i and all j.
    """
    db = 1 << len(front)
    dim = spectrum.dim

    def build():
        vp = permuted_vectors(spectrum, front)
        return np.ascontiguousarray(
            vp.reshape(db, dim // db, dim).transpose(1, 0, 2).reshape(dim // db, db * dim).conj()
        )

    return _heavy(spectrum, ("rows", front), build)


def reduce_transition(spectrum: Spectrum, i: int, j: int, blk: BlockSpec) -> TransitionBlock:
    """sigma^{ij} on `blk`; trace is delta_ij, and sigma^{ii} is Hermitian PSD."""
    blk.validate(spectrum.n_sites)
    dim = spectrum.dim
    if not (0 <= i < dim and 0 <= j < dim):
        raise InvalidSpec(f"eigenstate indices ({i}, {j}) outside [0, {dim})")
    g = _gather(spectrum, blk.sites)
    db = blk.dim
    mi = spectrum.vectors[g, i].reshape(db, -1)
    mj = spectrum.vectors[g, j].reshape(db, -1)
    return TransitionBlock(matrix=mi @ mj.conj().T, i=i, j=j, block=blk)


def transition_rows(spectrum: Spectrum, i_list, blk: BlockSpec) -> np.ndarray:
    """sigma^{ij} for every i in i_list and every j, shape (len(i_list), dim, db, db).

    Returned as rows[i_loc, j] = sigma^{i j}; the contraction over the traced
    sites runs through a single dgemm per call.
    """
    blk.validate(spectrum.n_sites)
    i_list = np.asarray(i_list, dtype=np.intp)
    dim = spectrum.dim
    db = blk.dim
    rest = dim // db
    kern = row_kernel(spectrum, blk.sites)
    vp = permuted_vectors(spectrum, blk.sites)
    m = vp[:, i_list].reshape(db, rest, len(i_list)).transpose(2, 0, 1).reshape(-1, rest)
    k = m @ kern  # (m * db, db * dim)
    return k.reshape(len(i_list), db, db, dim).transpose(0, 3, 1, 2)


def transition_diag(spectrum: Spectrum, i_list, blk: BlockSpec) -> np.ndarray:
    """sigma^{ii} for every i in i_list, shape (len(i_list), db, db)."""
    blk.validate(spectrum.n_sites)
    i_list = np.asarray(i_list, dtype=np.intp)
    db = blk.dim
    vp = permuted_vectors(spectrum, blk.sites)
    m = vp[:, i_list].reshape(db, spectrum.dim // db, len(i_list))
    return np.einsum("acm,bcm->mab", m, m.conj())


def reduce_ensemble(spectrum: Spectrum, ensemble: EnsembleState, blk: BlockSpec) -> np.ndarray:
    """rho_block = sum_i p_i sigma^{ii} restricted to the ensemble's support."""
    blk.validate(spectrum.n_sites)
    cols = ensemble.support
    vp = permuted_vectors(spectrum, blk.sites)
    w = vp[:, cols] * np.sqrt(ensemble.weights[cols])
    a = w.reshape(blk.dim, -1)
    return a @ a.conj().T


def reduce_pure(spectrum: Spectrum, i: int, blk: BlockSpec) -> np.ndarray:
    return reduce_transition(spectrum, i, i, blk).matrix


def reduce_joint(
    spectrum: Spectrum,
    source: EnsembleState | int,
    block_a: BlockSpec,
    block_b: BlockSpec,
) -> np.ndarray:
    """Joint reduced state on block_a (+) block_b, block_a axes first.

    `source` is either an ensemble or an eigenstate index.  The tensor slot
    order is fixed to (block_a, block_b) regardless of site positions, so
    kron(X_a, Y_b) composes with the output directly.
    """
    if set(block_a.sites) & set(block_b.sites):
        raise InvalidSpec(f"blocks {block_a.sites} and {block_b.sites} overlap")
    block_a.validate(spectrum.n_sites)
    block_b.validate(spectrum.n_sites)
    front = block_a.sites + block_b.sites
    dj = 1 << len(front)
    g = _gather(spectrum, front)
    if isinstance(source, EnsembleState):
        vp = permuted_vectors(spectrum, front)
        cols = source.support
        w = vp[:, cols] * np.sqrt(source.weights[cols])
        a = w.reshape(dj, -1)
        return a @ a.conj().T
    wi = spectrum.vectors[g, source].reshape(dj, -1)
    return wi @ wi.conj().T


def von_neumann_entropy(rho: np.ndarray) -> float:
    """S(rho) = -sum lam ln lam over eigenvalues above the cutoff (natural log)."""
    rho = np.asarray(rho)
    tr = complex(np.trace(rho)).real
    if abs(tr - 1.0) > 1e-8:
        raise InvalidSpec(f"density matrix trace {tr} deviates from 1 beyond 1e-8")
    lam = np.linalg.eigvalsh(rho)
    if lam[0] < PSD_FLOOR:
        raise InvalidSpec(f"density matrix has eigenvalue {lam[0]:.3e} below the PSD floor")
    lam = np.clip(lam, 0.0, None)
    lam = lam[lam >= ENTROPY_CUTOFF]
    return float(-np.sum(lam * np.log(lam)))


def mutual_information(
    spectrum: Spectrum,
    ensemble: EnsembleState,
    block_a: BlockSpec,
    block_b: BlockSpec,
) -> float:
    """I(A:B) = S(A) + S(B) - S(AB) for the ensemble's reduced states."""
    s_a = von_neumann_entropy(reduce_ensemble(spectrum, ensemble, block_a))
    s_b = von_neumann_entropy(reduce_ensemble(spectrum, ensemble, block_b))
    s_ab = von_neumann_entropy(reduce_joint(spectrum, ensemble, block_a, block_b))
    mi = s_a + s_b - s_ab
    if mi < -1e-10:
        raise InternalConsistencyError(f"mutual information {mi:.3e} < -1e-10")
    return max(mi, 0.0)


def trace_of(block_mat: np.ndarray) -> float:
    return float(np.trace(block_mat).real)


def hermiticity_defect(mat: np.ndarray) -> float:
    return float(np.abs(mat - mat.conj().T).max())


def assert_density_matrix(rho: np.ndarray, *, tol: float = 1e-10) -> None:
    """Validate Hermitian / PSD (to the floor) / unit trace, for tests and guards."""
    if hermiticity_defect(rho) > tol:
        raise InternalConsistencyError("reduced state is not Hermitian")
    tr = complex(np.trace(rho)).real
    if abs(tr - 1.0) > tol:
        raise InternalConsistencyError(f"reduced state trace {tr} != 1")
    lam = np.linalg.eigvalsh(rho)
    if lam[0] < PSD_FLOOR:
        raise InternalConsistencyError(f"reduced state eigenvalue {lam[0]:.3e} below PSD floor")
