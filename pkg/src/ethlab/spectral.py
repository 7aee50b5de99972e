"""Full eigendecomposition, ensembles, energy shells and spectral histograms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure, InvalidSpec, ShellEmpty
from .spinchain import ChainSpec, build_hamiltonian, check_hermitian

WEIGHT_SUM_TOL = 1e-12


@dataclass
class Spectrum:
    """Complete eigendecomposition of a chain Hamiltonian.

    energies is ascending; column i of `vectors` is the i-th eigenstate.  The
    two cache dicts hold block-permutation index arrays and permuted
    eigenvector copies keyed by site order; they are filled lazily by the
    reduction routines and shared read-only.
    """

    energies: np.ndarray
    vectors: np.ndarray
    chain: ChainSpec | None = None
    _gather_cache: dict = field(default_factory=dict, repr=False, compare=False)
    _heavy_cache: dict = field(default_factory=dict, repr=False, compare=False)
    _heavy_bytes: int = field(default=0, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.energies)

    @property
    def n_sites(self) -> int:
        n = int(round(math.log2(self.dim)))
        if (1 << n) != self.dim:
            raise InvalidSpec(f"spectrum dimension {self.dim} is not a power of 2")
        return n

    @property
    def span(self) -> float:
        return float(self.energies[-1] - self.energies[0])


def diagonalize(ham: np.ndarray, chain: ChainSpec | None = None) -> Spectrum:
    """Eigendecompose a dense Hermitian matrix into a Spectrum.

    Real-symmetric input stays in real arithmetic (the Ising chain in the
    computational basis is real), complex input goes through the Hermitian
    solver.
    """
    ham = np.asarray(ham)
    check_hermitian(ham)
    if np.iscomplexobj(ham):
        if np.abs(ham.imag).max() <= 1e-14 * max(np.abs(ham).max(), 1e-300):
            ham = ham.real
    try:
        energies, vectors = np.linalg.eigh(ham)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise ConvergenceFailure(f"eigensolver did not converge: {exc}") from exc
    return Spectrum(energies=energies, vectors=vectors, chain=chain)


def diagonalize_chain(spec: ChainSpec, *, allow_large: bool = False) -> Spectrum:
    return diagonalize(build_hamiltonian(spec, allow_large=allow_large), chain=spec)


@dataclass(frozen=True)
class EnergyShell:
    """Closed energy window [center - width/2, center + width/2]."""

    center: float
    width: float
    members: np.ndarray

    @property
    def size(self) -> int:
        return len(self.members)


def energy_shell(spectrum: Spectrum, center: float, width: float) -> EnergyShell:
    """Eigenstate indices inside the closed window around `center`."""
    if width <= 0:
        raise InvalidSpec(f"shell width must be positive, got {width}")
    half = 0.5 * width
    members = np.flatnonzero(np.abs(spectrum.energies - center) <= half)
    if len(members) == 0:
        raise ShellEmpty(f"no eigenstates within {half} of E={center}")
    return EnergyShell(center=float(center), width=float(width), members=members)


@dataclass(frozen=True)
class EnsembleState:
    """Density operator diagonal in the energy eigenbasis, as a weight vector."""

    weights: np.ndarray
    kind: str
    beta: float | None = None
    shell: EnergyShell | None = None
    state_index: int | None = None

    def __post_init__(self):
        w = self.weights
        if np.any(w < 0):
            raise InvalidSpec("ensemble weights must be nonnegative")
        total = math.fsum(w.tolist())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidSpec(f"ensemble weights sum to {total}, expected 1")

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    def label(self) -> str:
        if self.kind == "canonical":
            return f"canonical(beta={self.beta:g})"
        if self.kind == "microcanonical":
            return f"microcanonical(E={self.shell.center:g},dE={self.shell.width:g})"
        if self.kind == "pure":
            return f"pure({self.state_index})"
        return self.kind


def canonical_weights(energies: np.ndarray, beta: float) -> np.ndarray:
    """Boltzmann weights, max-shifted so the largest exponent is exactly 0.

    The shift makes the weights literally invariant under a constant energy
    offset and keeps exp() away from overflow at any finite beta.
    """
    if not np.isfinite(beta):
        raise InvalidSpec(f"beta must be finite, got {beta}")
    x = -beta * energies
    w = np.exp(x - x.max())
    return w / w.sum()


def make_ensemble(
    spectrum: Spectrum,
    kind: str,
    *,
    beta: float | None = None,
    shell: EnergyShell | None = None,
    state_index: int | None = None,
) -> EnsembleState:
    """Build canonical(beta) / microcanonical(shell) / uniform / pure(i) weights."""
    dim = spectrum.dim
    if kind == "canonical":
        if beta is None:
            raise InvalidSpec("canonical ensemble requires beta")
        w = canonical_weights(spectrum.energies, beta)
        return EnsembleState(weights=w, kind=kind, beta=float(beta))
    if kind == "microcanonical":
        if shell is None:
            raise InvalidSpec("microcanonical ensemble requires an energy shell")
        if shell.size == 0:
            raise ShellEmpty("microcanonical shell has no members")
        w = np.zeros(dim)
        w[shell.members] = 1.0 / shell.size
        return EnsembleState(weights=w, kind=kind, shell=shell)
    if kind == "uniform":
        return EnsembleState(weights=np.full(dim, 1.0 / dim), kind=kind)
    if kind == "pure":
        if state_index is None or not (0 <= state_index < dim):
            raise InvalidSpec(f"pure ensemble needs a state index in [0, {dim})")
        w = np.zeros(dim)
        w[state_index] = 1.0
        return EnsembleState(weights=w, kind=kind, state_index=int(state_index))
    raise InvalidSpec(f"unknown ensemble kind {kind!r}")


def mean_energy(spectrum: Spectrum, beta: float) -> float:
    """E(beta) = <H> in the canonical ensemble."""
    w = canonical_weights(spectrum.energies, beta)
    return float(w @ spectrum.energies)


def solve_beta_for_energy(
    spectrum: Spectrum,
    e_target: float,
    *,
    beta_hi: float = 50.0,
    rtol: float = 1e-9,
) -> float:
    """Invert the monotone map beta -> E(beta) by bisection.

    E(beta) is strictly decreasing (dE/dbeta = -Var(H) < 0), so a sign change
    of E(beta) - e_target over [-beta_hi, beta_hi] pins the root.  Tolerance
    is rtol * spectral span on the energy residual.
    """
    e_min, e_max = float(spectrum.energies[0]), float(spectrum.energies[-1])
    if not (e_min < e_target < e_max):
        raise InvalidSpec(
            f"target energy {e_target} outside the open spectral range ({e_min}, {e_max})"
        )
    span = e_max - e_min
    tol = rtol * span
    lo, hi = -beta_hi, beta_hi
    f_lo = mean_energy(spectrum, lo) - e_target
    f_hi = mean_energy(spectrum, hi) - e_target
    # E(-beta_hi) ~ e_max and E(beta_hi) ~ e_min; f_lo > 0 > f_hi when bracketed
    if not (f_lo > 0 > f_hi):
        raise ConvergenceFailure(
            f"bracket [-{beta_hi}, {beta_hi}] does not straddle E={e_target}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = mean_energy(spectrum, mid) - e_target
        if abs(f_mid) <= tol:
            return mid
        if f_mid > 0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceFailure("beta bisection exhausted its iteration budget")


@dataclass(frozen=True)
class SpectralHistogram:
    """Binned spectral data; `first_moment[b]` is sum of weight*E over bin b.

    Keeping the per-bin first moment lets consumers recover the exact weighted
    mean energy instead of a bin-center approximation.
    """

    edges: np.ndarray
    values: np.ndarray
    first_moment: np.ndarray

    def mean(self) -> float:
        total = math.fsum(self.values.tolist())
        return math.fsum(self.first_moment.tolist()) / total


def spectral_histogram(
    spectrum: Spectrum,
    bins: int,
    weights: EnsembleState | None = None,
) -> SpectralHistogram:
    """Histogram of the spectrum; counts when unweighted, masses when weighted."""
    if bins < 1:
        raise InvalidSpec(f"bins must be >= 1, got {bins}")
    e = spectrum.energies
    w = None if weights is None else weights.weights
    values, edges = np.histogram(e, bins=bins, weights=w)
    if w is None:
        values = values.astype(float)
        moment, _ = np.histogram(e, bins=edges, weights=e)
    else:
        moment, _ = np.histogram(e, bins=edges, weights=w * e)
    return SpectralHistogram(edges=edges, values=values, first_moment=moment)
