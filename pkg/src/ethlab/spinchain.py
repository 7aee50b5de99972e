"""Ising chain construction: Hamiltonian, Pauli embeddings, lattice translation.

The chain is a ring of N spin-1/2 sites with

    H = sum_k ( -sz_k sz_{k+1} + g * sx_k + h * sz_k ),      site N+1 == 1.

Basis convention (fixed so emitted tables are bit-reproducible): computational
basis indexed by the integer whose bit at position N-k (0 = LSB) encodes site
k, i.e. site 1 is the most significant bit; bit value 0 means spin up
(sz eigenvalue +1).  All entries of H are real in this basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionLimit, InvalidSpec

# Hard default: dense eigenvector sets above 2^14 are not worth holding in RAM.
DEFAULT_SITE_LIMIT = 14

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
PAULI_I = np.eye(2)


@dataclass(frozen=True)
class ChainSpec:
    """Defining parameters of the periodic Ising chain."""

    n: int
    g: float
    h: float
    boundary: str = "periodic"

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise InvalidSpec(f"chain needs at least 2 sites, got n={self.n}")
        if self.boundary != "periodic":
            raise InvalidSpec(f"only periodic boundary supported, got {self.boundary!r}")
        if not (np.isfinite(self.g) and np.isfinite(self.h)):
            raise InvalidSpec(f"couplings must be finite, got g={self.g}, h={self.h}")

    @property
    def dim(self) -> int:
        return 1 << self.n


@dataclass(frozen=True)
class SiteOperator:
    """A single-site operator placed at one chain site (1-based)."""

    matrix: np.ndarray
    site: int

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape != (2, 2) or not np.all(np.isfinite(m)):
            raise InvalidSpec("site operator must be a finite 2x2 matrix")
        if self.site < 1:
            raise InvalidSpec(f"site index must be >= 1, got {self.site}")


def site_z_values(n: int, site: int) -> np.ndarray:
    """sz eigenvalue (+1/-1) of `site` for every basis index."""
    b = np.arange(1 << n)
    return 1.0 - 2.0 * ((b >> (n - site)) & 1)


def build_hamiltonian(spec: ChainSpec, *, allow_large: bool = False) -> np.ndarray:
    """Dense real-symmetric Hamiltonian of the chain.

    Raises DimensionLimit for n > DEFAULT_SITE_LIMIT unless `allow_large`.
    Note the n=2 ring has two (identical) bond terms: the sum over k is taken
    literally, so the single bond is counted twice.
    """
    n = spec.n
    if n > DEFAULT_SITE_LIMIT and not allow_large:
        raise DimensionLimit(
            f"n={n} exceeds the default limit of {DEFAULT_SITE_LIMIT} sites; "
            "pass allow_large=True to override"
        )
    dim = spec.dim
    b = np.arange(dim)
    sz = np.empty((n, dim))
    for k in range(1, n + 1):
        sz[k - 1] = site_z_values(n, k)

    diag = np.zeros(dim)
    for k in range(n):
        diag -= sz[k] * sz[(k + 1) % n]
    diag += spec.h * sz.sum(axis=0)

    ham = np.zeros((dim, dim))
    ham[b, b] = diag
    for k in range(1, n + 1):
        flipped = b ^ (1 << (n - k))
        ham[b, flipped] += spec.g
    return ham


def check_hermitian(matrix: np.ndarray, rtol: float = 1e-12) -> None:
    """Raise InvalidSpec unless matrix == matrix^dagger within rtol * max|entry|."""
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidSpec(f"expected a square matrix, got shape {m.shape}")
    scale = max(np.abs(m).max(), 1e-300)
    dev = np.abs(m - m.conj().T).max()
    if dev > rtol * scale:
        raise InvalidSpec(f"matrix is not Hermitian: max deviation {dev:.3e} vs scale {scale:.3e}")


def translation_operator(n: int) -> np.ndarray:
    """Permutation t realizing the one-site cyclic shift.

    t[b] is the basis index of |s_N s_1 ... s_{N-1}> when b indexes
    |s_1 ... s_N>, i.e. the translation P maps basis state b to t[b].
    Applying the shift n times is the identity.
    """
    if n < 2:
        raise InvalidSpec(f"translation needs n >= 2, got {n}")
    b = np.arange(1 << n)
    return (b >> 1) | ((b & 1) << (n - 1))


def translate_state(vec: np.ndarray, perm: np.ndarray, times: int = 1) -> np.ndarray:
    """Apply the translation (P^times) to a state vector.

    P e_b = e_{perm[b]}, so (P psi)[perm] = psi.
    """
    out = np.asarray(vec)
    for _ in range(times % _cycle(perm)):
        nxt = np.empty_like(out)
        nxt[perm] = out
        out = nxt
    return out


def _cycle(perm: np.ndarray) -> int:
    # one-site shift on n sites has order n
    return int(np.log2(len(perm)) + 0.5)


@dataclass
class EmbeddedSiteOperator:
    """Matrix-free view of O acting on one site, identity elsewhere.

    Never materializes the 2^n x 2^n matrix; elements come from bit tests.
    """

    op: SiteOperator
    n: int
    _mask: int = field(init=False, repr=False)

    def __post_init__(self):
        if not (1 <= self.op.site <= self.n):
            raise InvalidSpec(f"site {self.op.site} outside chain of {self.n} sites")
        object.__setattr__(self, "_mask", (1 << self.n) - 1 - (1 << (self.n - self.op.site)))

    @property
    def dim(self) -> int:
        return 1 << self.n

    def element(self, a: int, b: int) -> complex:
        """<a|O^(site)|b>, nonzero only when a and b agree off-site."""
        if (a & self._mask) != (b & self._mask):
            return 0.0
        shift = self.n - self.op.site
        return self.op.matrix[(a >> shift) & 1, (b >> shift) & 1]

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """O |vec> without building the dense matrix.

        Column b contributes m[bit,bit] on the diagonal and m[1-bit,bit] on the
        spin-flipped row; `flipped` is a bijection so fancy indexing is safe.
        """
        vec = np.asarray(vec)
        shift = self.n - self.op.site
        b = np.arange(self.dim)
        bits = (b >> shift) & 1
        flipped = b ^ (1 << shift)
        m = self.op.matrix
        res = np.zeros(self.dim, dtype=np.result_type(m, vec))
        res += m[bits, bits] * vec
        res[flipped] += m[1 - bits, bits] * vec
        return res

    def dense(self) -> np.ndarray:
        """Explicit matrix, for oracle comparisons at small n only."""
        if self.n > 10:
            raise DimensionLimit("dense embedding is reserved for n <= 10")
        mats = [self.op.matrix if k == self.op.site else PAULI_I for k in range(1, self.n + 1)]
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out


def embed_site_operator(op: SiteOperator, n: int) -> EmbeddedSiteOperator:
    """Accessor for O at `op.site` tensored with identity elsewhere."""
    return EmbeddedSiteOperator(op, n)
