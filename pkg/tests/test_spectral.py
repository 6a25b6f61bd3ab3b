import numpy as np
import pytest
import scipy.linalg

from edgefilter import (
    NegativeOverride,
    UnsupportedConfigurationError,
    UsageError,
    WeightParams,
    apply_overrides,
    bilateral_weights,
    build_laplacian,
    dct_reference_modes,
    eig_generalized,
    eig_smallest,
    flatness_profile,
    localization_width,
)
from edgefilter.harness.experiments import EIG_EDGE, figure_laplacian
from edgefilter.spectral import dct_reference_eigenvalues, edge_jump, is_constant
from edgefilter.weights import WeightMatrix

from conftest import random_tridiagonal

NO_SPATIAL = WeightParams(spatial_term_enabled=False)


def align(v, ref):
    return v if v @ ref >= 0 else -v


class TestEigSmallest:
    def test_constant_guide_is_dct(self):
        n = 100
        gl = build_laplacian(bilateral_weights(np.zeros(n), NO_SPATIAL))
        eigs = eig_smallest(gl, 5)
        np.testing.assert_allclose(eigs.values, 2 - 2 * np.cos(np.pi * np.arange(5) / n), rtol=0, atol=1e-12)
        ref = dct_reference_modes(n, 5)
        for j in range(5):
            assert np.abs(align(eigs.mode(j), ref[:, j]) - ref[:, j]).max() <= 1e-8

    def test_zero_eigenvalue_constant_vector(self, rng):
        gl = build_laplacian(random_tridiagonal(rng, 25))
        eigs = eig_smallest(gl, 1)
        assert abs(eigs.values[0]) < 1e-13
        np.testing.assert_allclose(eigs.mode(0), 1 / 5.0, rtol=0, atol=1e-12)

    def test_matches_dense_oracle(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 31))
            gl = build_laplacian(random_tridiagonal(rng, n))
            k = int(rng.integers(1, n + 1))
            eigs = eig_smallest(gl, k)
            lam, V = np.linalg.eigh(gl.to_dense())
            np.testing.assert_allclose(eigs.values, lam[:k], rtol=0, atol=1e-9)
            for j in range(k):
                np.testing.assert_allclose(align(eigs.mode(j), V[:, j]), V[:, j], rtol=0, atol=1e-9)

    def test_sign_convention_and_determinism(self, rng):
        gl = build_laplacian(random_tridiagonal(rng, 30))
        a, b = eig_smallest(gl, 6), eig_smallest(gl, 6)
        assert a.vectors.tobytes() == b.vectors.tobytes()
        for j in range(6):
            v = a.mode(j)
            assert v[np.flatnonzero(np.abs(v) > 1e-10 * np.abs(v).max())[0]] > 0

    def test_degenerate_blocks_compare_subspaces(self):
        # Two identical disconnected paths: every eigenvalue is doubled.
        bands = np.zeros((2, 20))
        bands[0] = 1.0
        bands[1, :19] = 1.0
        bands[1, 9] = 0.0
        eigs = eig_smallest(build_laplacian(WeightMatrix(bands)), 4)
        block = dct_reference_modes(10, 2)
        expect = np.zeros((20, 4))
        expect[:10, 0] = expect[10:, 1] = block[:, 0]
        expect[:10, 2] = expect[10:, 3] = block[:, 1]
        assert scipy.linalg.subspace_angles(eigs.vectors, expect).max() <= 1e-8

    def test_indefinite_with_negative_weight(self):
        _, gl = figure_laplacian("fig3")
        eigs = eig_smallest(gl, 5)
        assert eigs.values[0] < 0
        assert is_constant(eigs.mode(1))

    def test_bad_k(self, rng):
        gl = build_laplacian(random_tridiagonal(rng, 5))
        for k in (0, 6):
            with pytest.raises(UsageError):
                eig_smallest(gl, k)

    def test_csv_layout(self, tmp_path):
        gl = build_laplacian(bilateral_weights(np.zeros(4), NO_SPATIAL))
        eig_smallest(gl, 2).to_csv(tmp_path / "e.csv")
        lines = (tmp_path / "e.csv").read_text().splitlines()
        assert lines[0] == "mode_index,eigenvalue,component_0,component_1,component_2,component_3"
        assert len(lines) == 3 and lines[1].startswith("0,")


class TestEigGeneralized:
    def test_trivial_pair(self, rng):
        gl = build_laplacian(random_tridiagonal(rng, 12))
        eigs = eig_generalized(gl, 3)
        assert eigs.values[0] == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(eigs.mode(0), 1 / np.sqrt(gl.d.sum()), rtol=0, atol=1e-12)
        assert np.all(np.diff(np.abs(eigs.values)) <= 1e-15)

    def test_identity_degree_matches_standard(self):
        # Zero diagonal weight makes d = 1 everywhere on a path with unit ends.
        n = 8
        bands = np.zeros((2, n))
        bands[1, : n - 1] = 0.5
        bands[0] = 1.0 - WeightMatrix(bands).row_sums()
        gl = build_laplacian(WeightMatrix(bands))
        np.testing.assert_allclose(gl.d, 1.0, rtol=0, atol=1e-15)
        gen = eig_generalized(gl, n)
        std = eig_smallest(gl, n)
        order = np.argsort(1 - gen.values)
        np.testing.assert_allclose(1 - gen.values[order], std.values, rtol=0, atol=1e-12)
        for j in range(n):
            v = gen.mode(order[j])
            np.testing.assert_allclose(align(v, std.mode(j)), std.mode(j), rtol=0, atol=1e-9)

    def test_matches_dense_oracle(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 31))
            gl = build_laplacian(random_tridiagonal(rng, n))
            W = gl.w.to_dense()
            mu, V = scipy.linalg.eigh(W, np.diag(gl.d))
            order = np.argsort(-np.abs(mu), kind="stable")
            eigs = eig_generalized(gl, n)
            np.testing.assert_allclose(eigs.values, mu[order], rtol=0, atol=1e-9)
            for j in range(n):
                ref = V[:, order[j]]
                np.testing.assert_allclose(align(eigs.mode(j), ref), ref, rtol=0, atol=1e-9)
            np.testing.assert_allclose(eigs.vectors.T @ np.diag(gl.d) @ eigs.vectors, np.eye(n), atol=1e-10)

    def test_rejects_nonpositive_degree(self):
        gl = build_laplacian(WeightMatrix([[1.0, 1.0, 1.0], [0.5, -3.0, 0.0]]))
        with pytest.raises(UnsupportedConfigurationError):
            eig_generalized(gl, 2)


class TestDctReference:
    def test_first_modes(self):
        modes = dct_reference_modes(7, 2)
        np.testing.assert_allclose(modes[:, 0], 1 / np.sqrt(7), rtol=0, atol=1e-15)
        two = dct_reference_modes(2, 2)
        np.testing.assert_allclose(two[:, 1], [1 / np.sqrt(2), -1 / np.sqrt(2)], atol=1e-15)

    @pytest.mark.parametrize("n", [2, 5, 64, 100])
    def test_exact_eigenvectors(self, n):
        L = build_laplacian(bilateral_weights(np.zeros(n), NO_SPATIAL)).to_dense()
        k = min(n, 6)
        modes = dct_reference_modes(n, k)
        lam = dct_reference_eigenvalues(n, k)
        assert np.abs(L @ modes - modes * lam).max() <= 1e-12


class TestDiagnostics:
    def test_flatness_constant(self):
        assert flatness_profile(np.ones(20), 10, 3) == (0.0, 0.0)

    def test_flatness_ramp(self):
        assert flatness_profile(np.arange(20.0), 10, 2) == (1.0, 1.0)

    def test_flatness_excludes_edge(self):
        v = np.r_[np.zeros(10), np.ones(10)]
        assert flatness_profile(v, 9, 4) == (0.0, 0.0)
        assert edge_jump(v, 9) == 1.0

    @pytest.mark.parametrize("edge, margin", [(2, 3), (15, 5), (5, 0)])
    def test_flatness_window_bounds(self, edge, margin):
        with pytest.raises(UsageError):
            flatness_profile(np.ones(20), edge, margin)

    def test_localization(self):
        assert localization_width(np.ones(10)) == pytest.approx(1.0)
        assert localization_width(np.eye(10)[3]) == pytest.approx(0.1)
        with pytest.raises(UsageError):
            localization_width(np.zeros(4))

    def test_fig2_flat_on_both_sides(self):
        _, gl = figure_laplacian("fig2")
        eigs = eig_smallest(gl, 5)
        for j in range(5):
            left, right = flatness_profile(eigs.mode(j), EIG_EDGE, 5)
            assert max(left, right) <= 0.1 * edge_jump(eigs.mode(j), EIG_EDGE)

    def test_fig2_near_decoupling(self):
        _, gl = figure_laplacian("fig2")
        w_edge = gl.w[EIG_EDGE, EIG_EDGE + 1]
        assert 0 < w_edge < 1e-3
        assert eig_smallest(gl, 2).values[1] < 10 * w_edge

    def test_fig3_repulsion_inequality(self):
        _, gl = figure_laplacian("fig3")
        eigs = eig_smallest(gl, 5)
        for j in range(5):
            v = eigs.mode(j)
            if is_constant(v):
                continue
            left, right = flatness_profile(v, EIG_EDGE, 5)
            assert edge_jump(v, EIG_EDGE) > max(left, right)

    def test_narrowing_layer(self):
        widths = []
        for which in ("fig3", "fig4"):
            _, gl = figure_laplacian(which)
            eigs = eig_smallest(gl, 5)
            lead = next(j for j in range(5) if not is_constant(eigs.mode(j)))
            widths.append(localization_width(eigs.mode(lead)))
        assert widths[1] < widths[0]
