import numpy as np
import pytest

from ethlab.experiments import get_spectrum


@pytest.fixture(scope="session")
def sp4():
    return get_spectrum(4, 1.05, 0.1)


@pytest.fixture(scope="session")
def sp6():
    return get_spectrum(6, 1.05, 0.1)


@pytest.fixture(scope="session")
def sp6_h0():
    return get_spectrum(6, 1.05, 0.0)


@pytest.fixture(scope="session")
def sp8():
    return get_spectrum(8, 1.05, 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def assemble_index(n: int, front_sites, front_bits: int, rest_sites, rest_bits: int) -> int:
    """Build a computational-basis index from separate block/rest bit groups.

    Fully independent of the package's reshape machinery: places each bit at
    position n - site (site 1 = most significant bit).
    """
    idx = 0
    for q, site in enumerate(front_sites):
        bit = (front_bits >> (len(front_sites) - 1 - q)) & 1
        idx |= bit << (n - site)
    for q, site in enumerate(rest_sites):
        bit = (rest_bits >> (len(rest_sites) - 1 - q)) & 1
        idx |= bit << (n - site)
    return idx


def dense_partial_trace(psi_i, psi_j, n: int, keep_sites) -> np.ndarray:
    """Oracle partial trace of |psi_i><psi_j| by explicit index summation."""
    keep = list(keep_sites)
    rest = [s for s in range(1, n + 1) if s not in keep]
    db = 1 << len(keep)
    dr = 1 << len(rest)
    out = np.zeros((db, db), dtype=complex)
    for a in range(db):
        for b in range(db):
            acc = 0.0 + 0.0j
            for c in range(dr):
                ia = assemble_index(n, keep, a, rest, c)
                ib = assemble_index(n, keep, b, rest, c)
                acc += psi_i[ia] * np.conj(psi_j[ib])
            out[a, b] = acc
    return out
