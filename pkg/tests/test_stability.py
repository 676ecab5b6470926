import math

import numpy as np
import pytest

from oimsim import (
    NumericalError,
    OimParams,
    base_spectrum,
    critical_ks,
    energy_level_stats,
    index_to_config,
    is_equilibrium,
    ising_energy,
    jacobian,
    jacobian_binarized,
    largest_lyapunov,
    lyapunov_energy,
    stability_sweep,
    symmetric_eigenvalues,
)
from oimsim.enumeration import num_configs
from oimsim.stability import STABILITY_MARGIN, base_beta1_all, is_stable_lambda
from oimsim.verify import finite_difference_hessian

from conftest import random_coupling, random_spins


class TestJacobian:
    def test_edge_antiphase(self, edge_w):
        p = OimParams(k=1.0, ks=0.5)
        j = jacobian(edge_w, p, [0.0, math.pi])
        assert np.allclose(j, [[-2.0, 1.0], [1.0, -2.0]], atol=1e-12)

    def test_edge_inphase(self, edge_w):
        p = OimParams(k=1.0, ks=0.5)
        j = jacobian(edge_w, p, [0.0, 0.0])
        assert np.allclose(j, [[0.0, -1.0], [-1.0, 0.0]], atol=1e-12)

    def test_isolated_node(self):
        from oimsim import CouplingMatrix

        w = CouplingMatrix(np.zeros((1, 1)))
        p = OimParams(k=1.0, ks=0.7)
        j = jacobian(w, p, [0.0])
        assert j == pytest.approx(np.array([[-1.4]]), abs=1e-15)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_matches_half_hessian(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        w = random_coupling(n, min(n * (n - 1) // 2, 2 * n), seed + 3)
        p = OimParams(k=1.1, ks=0.4)
        th = rng.uniform(0, 2 * math.pi, n)
        j = jacobian(w, p, th)
        hess = finite_difference_hessian(lambda x: lyapunov_energy(w, p, x), th)
        scale = max(1.0, float(np.max(np.abs(j))))
        assert np.max(np.abs(j + 0.5 * hess)) / scale < 1e-5


class TestJacobianBinarized:
    def test_triangle_ground(self, triangle_w):
        p = OimParams(k=1.0, ks=0.0)
        j = jacobian_binarized(triangle_w, p, [1, 1, -1])
        assert np.array_equal(j, [[0, -1, 1], [-1, 0, 1], [1, 1, -2]])

    def test_triangle_uniform(self, triangle_w):
        p = OimParams(k=1.0, ks=0.0)
        j = jacobian_binarized(triangle_w, p, [1, 1, 1])
        assert np.array_equal(j, [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])

    def test_row_sums_equal_minus_2ks(self):
        rng = np.random.default_rng(7)
        w = random_coupling(9, 18, seed=2)
        for ks in (0.0, 0.8, 2.5):
            p = OimParams(k=1.7, ks=ks)
            s = random_spins(rng, 9)
            j = jacobian_binarized(w, p, s)
            assert np.allclose(j.sum(axis=1), -2.0 * ks, atol=1e-12)

    def test_agrees_with_general_jacobian(self):
        rng = np.random.default_rng(3)
        w = random_coupling(7, 12, seed=5)
        p = OimParams(k=1.3, ks=0.9)
        s = random_spins(rng, 7)
        th = np.where(s > 0, 0.0, math.pi)
        assert np.allclose(
            jacobian_binarized(w, p, s), jacobian(w, p, th), atol=1e-12
        )


class TestSymmetricEigenvalues:
    def test_two_by_two_closed_form(self):
        vals = symmetric_eigenvalues(np.array([[-2.0, 1.0], [1.0, -2.0]]))
        assert vals == pytest.approx([-1.0, -3.0], abs=1e-12)

    def test_diagonal(self):
        vals = symmetric_eigenvalues(np.diag([3.0, 0.0, -1.0]))
        assert vals.tolist() == [3.0, 0.0, -1.0]

    def test_triangle_ground_characteristic(self, triangle_w):
        j = jacobian_binarized(triangle_w, OimParams(k=1.0), [1, 1, -1])
        assert symmetric_eigenvalues(j) == pytest.approx([1.0, 0.0, -3.0], abs=1e-9)

    def test_asymmetry_rejected(self):
        with pytest.raises(NumericalError, match="asymmetry"):
            symmetric_eigenvalues(np.array([[0.0, 1.0], [0.5, 0.0]]))

    def test_non_finite_rejected(self):
        with pytest.raises(NumericalError, match="non-finite"):
            symmetric_eigenvalues(np.array([[np.nan, 0.0], [0.0, 1.0]]))

    def test_trace_identity(self):
        rng = np.random.default_rng(11)
        for seed in range(5):
            w = random_coupling(10, 20, seed)
            s = random_spins(rng, 10)
            j = jacobian_binarized(w, OimParams(k=1.0, ks=0.6), s)
            vals = symmetric_eigenvalues(j)
            scale = max(1.0, float(np.max(np.abs(j))))
            assert abs(np.trace(j) - vals.sum()) <= 1e-9 * 10 * scale


class TestBaseSpectrum:
    def test_edge_ground(self, edge_w):
        assert base_spectrum(edge_w, [1, -1]) == pytest.approx([0.0, -2.0], abs=1e-9)

    def test_edge_uncut(self, edge_w):
        assert base_spectrum(edge_w, [1, 1]) == pytest.approx([2.0, 0.0], abs=1e-9)

    def test_triangle_ground(self, triangle_w):
        assert base_spectrum(triangle_w, [1, 1, -1]) == pytest.approx(
            [1.0, 0.0, -3.0], abs=1e-9
        )

    def test_contains_zero_mode(self):
        rng = np.random.default_rng(4)
        for seed in range(4):
            w = random_coupling(8, 14, seed)
            beta = base_spectrum(w, random_spins(rng, 8))
            assert np.min(np.abs(beta)) < 1e-9

    def test_mirror_invariance_exact(self):
        rng = np.random.default_rng(9)
        w = random_coupling(8, 16, seed=6)
        s = random_spins(rng, 8)
        assert np.array_equal(base_spectrum(w, s), base_spectrum(w, -s))


class TestLargestLyapunovAndCriticalKs:
    def test_triangle_values(self, triangle_w):
        s = [1, 1, -1]
        assert largest_lyapunov(
            triangle_w, OimParams(k=1.0, ks=0.8), s
        ) == pytest.approx(-0.6, abs=1e-9)
        assert largest_lyapunov(
            triangle_w, OimParams(k=1.0, ks=0.5), s
        ) == pytest.approx(0.0, abs=1e-9)

    def test_edge_ground_any_ks(self, edge_w):
        for ks in (0.0, 0.3, 2.0):
            assert largest_lyapunov(
                edge_w, OimParams(k=1.0, ks=ks), [1, -1]
            ) == pytest.approx(-2.0 * ks, abs=1e-9)

    def test_critical_values(self, edge_w, triangle_w):
        assert critical_ks(triangle_w, [1, 1, -1], 1.0) == pytest.approx(0.5, abs=1e-9)
        assert critical_ks(edge_w, [1, -1], 1.0) == pytest.approx(0.0, abs=1e-9)
        assert critical_ks(edge_w, [1, 1], 1.0) == pytest.approx(1.0, abs=1e-9)

    def test_k_scaling(self, triangle_w):
        assert critical_ks(triangle_w, [1, 1, -1], 2.0) == pytest.approx(1.0, abs=1e-9)

    def test_agrees_with_direct_jacobian_top_eigenvalue(self):
        rng = np.random.default_rng(13)
        for seed in range(5):
            w = random_coupling(9, 18, seed)
            s = random_spins(rng, 9)
            p = OimParams(k=1.4, ks=0.7)
            lam = largest_lyapunov(w, p, s)
            direct = symmetric_eigenvalues(jacobian_binarized(w, p, s))[0]
            assert lam == pytest.approx(direct, abs=1e-9)


def test_spectral_shift_law():
    rng = np.random.default_rng(2)
    for seed in range(6):
        n = int(rng.integers(4, 13))
        w = random_coupling(n, min(n * (n - 1) // 2, 2 * n), seed + 20)
        for _ in range(3):
            s = random_spins(rng, n)
            base = base_spectrum(w, s)
            for k in (0.5, 1.0, 2.0):
                for ks in (0.0, 0.4, 1.3):
                    direct = symmetric_eigenvalues(
                        jacobian_binarized(w, OimParams(k=k, ks=ks), s)
                    )
                    assert np.max(np.abs(direct - (k * base - 2 * ks))) < 1e-9


def test_stable_set_monotone_in_ks():
    for seed in (1, 5):
        w = random_coupling(10, 24, seed)
        _, beta = base_beta1_all(w, threads=1)
        previous = None
        for ks in (0.2, 0.5, 1.0, 2.0):
            stable = set(np.nonzero(beta - 2 * ks < -STABILITY_MARGIN)[0].tolist())
            if previous is not None:
                assert previous <= stable
            previous = stable


class TestStabilitySweep:
    def test_triangle_all(self, triangle_w):
        rows = list(stability_sweep(triangle_w, 1.0, [0.1, 0.8]))
        assert len(rows) == 8
        assert [r[0] for r in rows] == [0, 0, 1, 1, 2, 2, 3, 3]
        by_cfg = {(r[0], r[2]): r[3] for r in rows}
        assert by_cfg[(1, 0.1)] == pytest.approx(0.8, abs=1e-9)
        assert by_cfg[(1, 0.8)] == pytest.approx(-0.6, abs=1e-9)
        assert by_cfg[(0, 0.1)] == pytest.approx(2.8, abs=1e-9)
        assert by_cfg[(0, 0.8)] == pytest.approx(1.4, abs=1e-9)

    def test_affine_shift_between_rows(self, triangle_w):
        a, b = 0.15, 0.9
        rows = list(stability_sweep(triangle_w, 1.0, [a, b]))
        for i in range(0, len(rows), 2):
            assert rows[i + 1][3] - rows[i][3] == pytest.approx(
                -2.0 * (b - a), abs=1e-12
            )

    def test_single_edge_ks_zero(self, edge_w):
        rows = list(stability_sweep(edge_w, 1.0, [0.0]))
        assert rows[0][3] == pytest.approx(2.0, abs=1e-9)  # uncut, idx 0
        assert rows[1][3] == pytest.approx(0.0, abs=1e-9)  # ground, idx 1

    def test_explicit_config_list_sorted(self, triangle_w):
        rows = list(stability_sweep(triangle_w, 1.0, [0.5], configs=[3, 0]))
        assert [r[0] for r in rows] == [0, 3]
        assert rows[0][1] == 3.0 and rows[1][1] == -1.0

    def test_empty_grid_rejected(self, triangle_w):
        with pytest.raises(ValueError, match="empty"):
            list(stability_sweep(triangle_w, 1.0, []))

    def test_agrees_with_direct_eigensolve_spot_check(self):
        w = random_coupling(12, 30, seed=14)
        ks = 0.65
        rows = {r[0]: r for r in stability_sweep(w, 1.0, [ks])}
        rng = np.random.default_rng(0)
        for idx in rng.integers(0, num_configs(12), 12):
            s = index_to_config(int(idx), 12)
            direct = largest_lyapunov(w, OimParams(k=1.0, ks=ks), s)
            assert rows[int(idx)][3] == pytest.approx(direct, abs=1e-9)
            assert rows[int(idx)][1] == ising_energy(w, s)


class TestEnergyLevelStats:
    def test_triangle_at_08(self, triangle_w):
        levels = energy_level_stats(triangle_w, 1.0, 0.8)
        assert len(levels) == 2
        ground, excited = levels
        assert ground.h == -1.0 and ground.count == 3
        assert ground.lambda_min == pytest.approx(-0.6, abs=1e-9)
        assert ground.lambda_max == pytest.approx(-0.6, abs=1e-9)
        assert ground.n_stable == 3
        assert excited.h == 3.0 and excited.count == 1
        assert excited.lambda_min == pytest.approx(1.4, abs=1e-9)
        assert excited.n_stable == 0

    def test_marginal_counts_unstable(self, triangle_w):
        levels = energy_level_stats(triangle_w, 1.0, 1.5)
        excited = [lv for lv in levels if lv.h == 3.0][0]
        assert excited.lambda_max == pytest.approx(0.0, abs=1e-9)
        assert excited.n_stable == 0

    def test_empty_graph_single_level(self):
        from oimsim import CouplingMatrix

        w = CouplingMatrix(np.zeros((2, 2)))
        levels = energy_level_stats(w, 1.0, 0.3)
        assert len(levels) == 1
        lv = levels[0]
        assert lv.h == 0.0 and lv.count == 2
        assert lv.lambda_min == pytest.approx(-0.6, abs=1e-12)
        assert lv.lambda_max == pytest.approx(-0.6, abs=1e-12)

    def test_counts_cover_all_configs(self):
        w = random_coupling(11, 26, seed=3)
        levels = energy_level_stats(w, 1.0, 0.9)
        assert sum(lv.count for lv in levels) == num_configs(11)
        for lv in levels:
            assert lv.lambda_min <= lv.lambda_max
            assert 0 <= lv.n_stable <= lv.count

    def test_threads_identical(self):
        w = random_coupling(12, 28, seed=8)
        assert energy_level_stats(w, 1.0, 0.7, threads=1) == energy_level_stats(
            w, 1.0, 0.7, threads=3
        )


class TestIsEquilibrium:
    def test_binarized(self, triangle_w):
        p = OimParams(k=1.0, ks=0.8)
        th = np.array([0.0, math.pi, 0.0])
        assert is_equilibrium(triangle_w, p, th, 1e-9)

    def test_quarter_turn_not_equilibrium(self, edge_w):
        p = OimParams(k=1.0, ks=1.0)
        assert not is_equilibrium(edge_w, p, [0.0, math.pi / 2], 1e-3)

    def test_half_pi_lattice(self):
        w = random_coupling(6, 10, seed=2)
        p = OimParams(k=1.0, ks=0.5)
        th = np.full(6, math.pi / 2)
        assert is_equilibrium(w, p, th, 1e-9)


def test_is_stable_lambda_margin():
    assert is_stable_lambda(-1.0)
    assert not is_stable_lambda(0.0)
    assert not is_stable_lambda(-0.5e-9)  # marginal band counts unstable
    assert not is_stable_lambda(1e-3)
    assert is_stable_lambda(-2e-9)
