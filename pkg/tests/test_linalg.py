import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from tylerscale import errors
from tylerscale.linalg import (
    PDMatrix,
    error_frob,
    error_op,
    geodesic_log_distance,
    geodesic_point,
    mat_sqrt,
    normalize,
)

from conftest import rand_pd, rand_traceless


class TestPDMatrix:
    def test_validates_symmetry(self):
        with pytest.raises(errors.NotPositiveDefinite):
            PDMatrix([[1.0, 0.5], [0.0, 1.0]])

    def test_rejects_indefinite(self):
        with pytest.raises(errors.NotPositiveDefinite):
            PDMatrix([[1.0, 0.0], [0.0, -1.0]])

    def test_rejects_near_singular(self):
        with pytest.raises(errors.NotPositiveDefinite):
            PDMatrix(np.diag([1.0, 1e-14]))

    def test_tag_validation(self):
        PDMatrix(np.eye(3), "trace_p")
        PDMatrix(np.eye(3), "det_1")
        with pytest.raises(errors.NotPositiveDefinite):
            PDMatrix(2 * np.eye(3), "trace_p")
        with pytest.raises(errors.NotPositiveDefinite):
            PDMatrix(2 * np.eye(3), "det_1")

    def test_immutable(self):
        a = PDMatrix(np.eye(2))
        with pytest.raises(AttributeError):
            a.normalization = "det_1"
        with pytest.raises(ValueError):
            a.entries[0, 0] = 5.0


class TestMatSqrt:
    def test_identity(self):
        assert np.allclose(mat_sqrt(np.eye(3)).entries, np.eye(3))

    def test_diagonal(self):
        assert np.allclose(mat_sqrt(np.diag([4.0, 9.0])).entries, np.diag([2.0, 3.0]))

    def test_random_residual_and_oracle(self, rng):
        for _ in range(10):
            a = rand_pd(5, rng, spread=2.0)
            r = mat_sqrt(a).entries
            assert np.linalg.norm(r @ r - a) <= 1e-10 * np.linalg.norm(a)
            assert np.allclose(r, scipy.linalg.sqrtm(a).real, atol=1e-9)

    def test_rejects_non_pd(self):
        with pytest.raises(errors.NotPositiveDefinite):
            mat_sqrt(np.diag([1.0, 0.0]))


class TestErrorMetrics:
    def test_identity_pairs(self):
        assert error_op(np.eye(4), np.eye(4)) == pytest.approx(0.0, abs=1e-14)
        assert error_frob(np.eye(4), np.eye(4)) == pytest.approx(0.0, abs=1e-14)

    def test_scalar_case(self):
        assert error_op(2 * np.eye(2), np.eye(2)) == pytest.approx(1.0)
        assert error_frob(2 * np.eye(2), np.eye(2)) == pytest.approx(np.sqrt(2.0))

    def test_diagonal_case(self):
        assert error_op(np.eye(2), np.diag([2.0, 1.0])) == pytest.approx(0.5)

    def test_dim_mismatch(self):
        with pytest.raises(errors.DimMismatch):
            error_op(np.eye(2), np.eye(3))

    def test_frob_sandwich(self, rng):
        # error_op <= error_frob <= sqrt(p) * error_op, via direct eigensolve.
        for _ in range(20):
            p = int(rng.integers(2, 7))
            a, b = rand_pd(p, rng), rand_pd(p, rng)
            eo, ef = error_op(a, b), error_frob(a, b)
            assert eo <= ef + 1e-12
            assert ef <= np.sqrt(p) * eo + 1e-12
            mu = np.linalg.eigvals(np.linalg.solve(b, a)).real
            assert eo == pytest.approx(np.max(np.abs(1 - mu)), rel=1e-9)


def _pair_with_error(a, eps_matrix):
    """B such that error_op(A, B) equals the operator norm of eps_matrix."""
    ra = mat_sqrt(a).entries
    inner = np.linalg.inv(np.eye(a.shape[0]) + eps_matrix)
    return ra @ (inner + inner.T) / 2 @ ra


class TestErrorMetricLemmas:
    """Randomized checks of the approximate metric axioms.

    The multiplicative constants (threshold 0.05, factors 3 and 5) are
    testing conventions fixed here, validated by this randomized search.
    """

    def test_approximate_triangle(self, rng):
        for _ in range(50):
            p = int(rng.integers(2, 6))
            a = rand_pd(p, rng)
            e1 = rand_traceless(p, rng) * rng.uniform(0.0, 0.05)
            b = _pair_with_error(a, e1)
            e2 = rand_traceless(p, rng) * rng.uniform(0.0, 0.05)
            c = _pair_with_error(b, e2)
            dab, dbc = error_op(a, b), error_op(b, c)
            if max(dab, dbc) <= 0.05:
                assert error_op(a, c) <= 3.0 * (dab + dbc) + 1e-12

    def test_near_symmetry(self, rng):
        for _ in range(50):
            p = int(rng.integers(2, 6))
            a = rand_pd(p, rng)
            b = _pair_with_error(a, rand_traceless(p, rng) * rng.uniform(0.0, 0.05))
            d = error_op(a, b)
            if d <= 0.05:
                assert error_op(b, a) <= 3.0 * d + 1e-12

    def test_inversion_stability(self, rng):
        for _ in range(50):
            p = int(rng.integers(2, 6))
            a = rand_pd(p, rng)
            b = _pair_with_error(a, rand_traceless(p, rng) * rng.uniform(0.0, 0.05))
            d = error_op(a, b)
            if d <= 0.05:
                assert error_op(np.linalg.inv(a), np.linalg.inv(b)) <= 3.0 * d + 1e-12

    def test_trace_det_compatibility(self, rng):
        for _ in range(50):
            p = int(rng.integers(2, 6))
            a = normalize(rand_pd(p, rng), "trace_p")
            b = normalize(_pair_with_error(a.entries, rand_traceless(p, rng) * 0.04), "trace_p")
            a1, b1 = normalize(a, "det_1"), normalize(b, "det_1")
            d1 = error_op(a1, b1)
            if d1 <= 0.05:
                assert error_op(a, b) <= 5.0 * d1 + 1e-12


class TestNormalize:
    def test_trace_p(self):
        out = normalize(3 * np.eye(2), "trace_p")
        assert np.allclose(out.entries, np.eye(2))
        assert out.normalization == "trace_p"

    def test_det_1_fixed_point(self):
        out = normalize(np.diag([2.0, 0.5]), "det_1")
        assert np.allclose(out.entries, np.diag([2.0, 0.5]))

    def test_det_1_rescale(self):
        out = normalize(np.diag([4.0, 1.0]), "det_1")
        assert np.allclose(out.entries, np.diag([2.0, 0.5]))

    @given(st.lists(st.floats(min_value=0.1, max_value=10.0), min_size=2, max_size=6))
    @settings(max_examples=30, deadline=None)
    def test_tags_hold(self, diag):
        a = np.diag(diag)
        p = len(diag)
        tp = normalize(a, "trace_p")
        assert abs(np.trace(tp.entries) - p) <= 1e-9 * p
        d1 = normalize(a, "det_1")
        assert abs(np.linalg.slogdet(d1.entries)[1]) <= 1e-9


class TestGeodesicPoint:
    def test_at_zero(self):
        z = geodesic_point(np.eye(3), np.diag([1.0, -1.0, 0.0]), 0.0)
        assert np.allclose(z.entries, np.eye(3))

    def test_commuting_diagonal(self):
        z = geodesic_point(np.eye(2), np.diag([1.0, -1.0]), 0.7)
        assert np.allclose(z.entries, np.diag([np.exp(0.7), np.exp(-0.7)]))

    def test_matrix_exponential_oracle(self, rng):
        for _ in range(10):
            p = int(rng.integers(2, 6))
            z = rand_pd(p, rng)
            x = rand_traceless(p, rng)
            t = rng.uniform(-1.0, 1.0)
            expected = mat_sqrt(z).entries @ scipy.linalg.expm(t * x) @ mat_sqrt(z).entries
            got = geodesic_point(z, x, t).entries
            assert np.allclose(got, expected, rtol=1e-10, atol=1e-12)


def test_geodesic_log_distance_matches_direct(rng):
    for _ in range(10):
        p = int(rng.integers(2, 6))
        a, b = rand_pd(p, rng), rand_pd(p, rng)
        ra_inv = np.linalg.inv(mat_sqrt(a).entries)
        inner = ra_inv @ b @ ra_inv
        expected = np.linalg.norm(scipy.linalg.logm(inner).real)
        assert geodesic_log_distance(a, b) == pytest.approx(expected, rel=1e-9)
