import math

import numpy as np
import pytest

from ethlab import (
    ChainSpec,
    ConvergenceFailure,
    InvalidSpec,
    ShellEmpty,
    build_hamiltonian,
    diagonalize,
    energy_shell,
    make_ensemble,
    mean_energy,
    solve_beta_for_energy,
    spectral_histogram,
)
from ethlab.spectral import canonical_weights


class TestDiagonalize:
    def test_n2_longitudinal_energies(self):
        sp = diagonalize(build_hamiltonian(ChainSpec(2, 0.0, 1.0)))
        assert np.allclose(sp.energies, [-4, 0, 2, 2])

    def test_trace_identity(self, sp6):
        ham = build_hamiltonian(ChainSpec(6, 1.05, 0.1))
        scale = max(1.0, abs(np.trace(ham)))
        assert abs(sp6.energies.sum() - np.trace(ham)) < 1e-9 * scale

    def test_reconstruction(self, sp6):
        ham = build_hamiltonian(ChainSpec(6, 1.05, 0.1))
        rebuilt = (sp6.vectors * sp6.energies) @ sp6.vectors.conj().T
        norm = np.abs(sp6.energies).max()
        assert np.abs(rebuilt - ham).max() < 1e-9 * norm

    def test_orthonormality_and_residuals(self, sp6):
        v = sp6.vectors
        gram = v.conj().T @ v
        assert np.abs(gram - np.eye(sp6.dim)).max() < 1e-10
        ham = build_hamiltonian(ChainSpec(6, 1.05, 0.1))
        res = ham @ v - v * sp6.energies
        hnorm = np.abs(sp6.energies).max()
        assert np.linalg.norm(res, axis=0).max() < 1e-9 * hnorm

    def test_energies_sorted(self, sp8):
        assert np.all(np.diff(sp8.energies) >= 0)

    def test_rejects_nonhermitian(self):
        with pytest.raises(InvalidSpec):
            diagonalize(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestEnsembles:
    def test_beta_zero_is_uniform(self, sp6):
        ens = make_ensemble(sp6, "canonical", beta=0.0)
        assert np.allclose(ens.weights, 1.0 / sp6.dim)

    def test_low_temperature_selects_ground_state(self, sp4):
        ens = make_ensemble(sp4, "canonical", beta=1e6)
        assert ens.weights[0] == pytest.approx(1.0)
        assert ens.weights[1:].max() < 1e-12

    def test_energy_shift_invariance(self, sp6):
        # the max-shift implementation makes this literal, not approximate
        w1 = canonical_weights(sp6.energies, 0.37)
        w2 = canonical_weights(sp6.energies + 11.0, 0.37)
        assert np.abs(w1 - w2).max() < 1e-12

    def test_microcanonical_support(self, sp6):
        shell = energy_shell(sp6, 0.0, 0.2 * 6)
        ens = make_ensemble(sp6, "microcanonical", shell=shell)
        assert math.fsum(ens.weights.tolist()) == pytest.approx(1.0, abs=1e-12)
        assert np.array_equal(ens.support, shell.members)
        outside = np.setdiff1d(np.arange(sp6.dim), shell.members)
        assert np.all(ens.weights[outside] == 0)

    def test_pure(self, sp6):
        ens = make_ensemble(sp6, "pure", state_index=5)
        assert ens.weights[5] == 1.0
        assert ens.support.tolist() == [5]

    def test_unknown_kind(self, sp6):
        with pytest.raises(InvalidSpec):
            make_ensemble(sp6, "grandcanonical")


class TestBetaSolver:
    def test_mean_energy_gives_beta_zero(self, sp8):
        target = float(sp8.energies.mean())
        assert abs(solve_beta_for_energy(sp8, target)) < 1e-9

    def test_below_mean_positive_beta(self, sp8):
        target = float(sp8.energies.mean()) - 0.5
        assert solve_beta_for_energy(sp8, target) > 0

    def test_round_trip(self, sp8):
        e = mean_energy(sp8, 0.1)
        assert solve_beta_for_energy(sp8, e) == pytest.approx(0.1, abs=1e-8)

    def test_monotone_decreasing(self, sp6):
        grid = [mean_energy(sp6, b) for b in np.linspace(-2, 2, 21)]
        assert all(a > b for a, b in zip(grid, grid[1:]))

    def test_out_of_range(self, sp6):
        with pytest.raises(InvalidSpec):
            solve_beta_for_energy(sp6, float(sp6.energies[-1]) + 1.0)

    def test_bracket_failure(self, sp6):
        # a huge beta is needed to pin energies this close to the ground state
        target = float(sp6.energies[0]) + 1e-12
        with pytest.raises((ConvergenceFailure, InvalidSpec)):
            solve_beta_for_energy(sp6, target, beta_hi=1.0)


class TestShells:
    def test_full_span(self, sp6):
        shell = energy_shell(sp6, float(sp6.energies.mean()), 10 * sp6.span)
        assert len(shell.members) == sp6.dim

    def test_ground_state_only(self, sp6):
        gap = float(sp6.energies[1] - sp6.energies[0])
        shell = energy_shell(sp6, float(sp6.energies[0]), gap * 0.5)
        assert shell.members.tolist() == [0]

    def test_scan_oracle(self, sp8):
        center, width = 0.0, 0.2 * 8
        shell = energy_shell(sp8, center, width)
        manual = [i for i, e in enumerate(sp8.energies) if abs(e - center) <= width / 2]
        assert shell.members.tolist() == manual

    def test_empty(self, sp6):
        with pytest.raises(ShellEmpty):
            energy_shell(sp6, float(sp6.energies[-1]) + 100.0, 0.1)

    def test_bad_width(self, sp6):
        with pytest.raises(InvalidSpec):
            energy_shell(sp6, 0.0, -1.0)


class TestHistogram:
    def test_single_bin_counts(self, sp6):
        hist = spectral_histogram(sp6, 1)
        assert hist.values.sum() == sp6.dim

    def test_uniform_single_bin_mass(self, sp6):
        ens = make_ensemble(sp6, "uniform")
        hist = spectral_histogram(sp6, 1, weights=ens)
        assert hist.values.sum() == pytest.approx(1.0, abs=1e-12)

    def test_weighted_mean_moment_consistency(self, sp8):
        ens = make_ensemble(sp8, "canonical", beta=0.1)
        hist = spectral_histogram(sp8, 60, weights=ens)
        exact = math.fsum((ens.weights * sp8.energies).tolist())
        assert hist.mean() == pytest.approx(exact, abs=1e-9)

    def test_bad_bins(self, sp6):
        with pytest.raises(InvalidSpec):
            spectral_histogram(sp6, 0)
