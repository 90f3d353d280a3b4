import numpy as np
import pytest

from racos.errors import InvalidInput
from racos.linalg import (
    CompactSVD,
    ObservationMask,
    alpha_from_energy_fraction,
    apply_mask,
    column_incoherence,
    column_residuals,
    compact_svd,
    hard_threshold_svd,
    norms,
    project_complement,
    row_incoherence,
)


def make_svd(sigma, n1=6, n2=7, seed=0):
    """CompactSVD with prescribed spectrum and random orthonormal factors."""
    rng = np.random.default_rng(seed)
    sigma = np.asarray(sigma, dtype=float)
    r = sigma.size
    u, _ = np.linalg.qr(rng.normal(size=(n1, r)))
    v, _ = np.linalg.qr(rng.normal(size=(n2, r)))
    return CompactSVD(u=u, sigma=sigma, v=v)


class TestCompactSVD:
    def test_identity(self):
        svd = compact_svd(np.eye(3), 0.0)
        assert np.allclose(svd.sigma, [1.0, 1.0, 1.0])
        svd.validate()

    def test_rank_one_outer_product(self):
        a = np.array([2.0, 0.0, 0.0])
        b = np.array([0.0, 3.0, 0.0, 0.0])
        svd = compact_svd(np.outer(a, b))
        assert svd.rank == 1
        assert np.isclose(svd.sigma[0], 6.0)

    def test_reconstruction_residual(self):
        rng = np.random.default_rng(3)
        m = rng.normal(size=(5, 8))
        svd = compact_svd(m)
        spec = np.linalg.svd(m, compute_uv=False)[0]
        assert np.abs(svd.reconstruct() - m).max() <= 1e-8 * spec
        svd.validate()

    def test_rank_tolerance_drops_small_values(self):
        m = make_svd([10.0, 1.0, 1e-6]).reconstruct()
        assert compact_svd(m, rank_tolerance=1e-3).rank == 2

    def test_zero_matrix(self):
        svd = compact_svd(np.zeros((3, 4)))
        assert svd.rank == 0
        assert svd.reconstruct().shape == (3, 4)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInput):
            compact_svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


class TestNorms:
    def test_identity(self):
        n = norms(np.eye(2))
        assert n.nuclear == pytest.approx(2.0)
        assert n.spectral == pytest.approx(1.0)
        assert n.l12 == pytest.approx(2.0)
        assert n.linf2 == pytest.approx(1.0)

    def test_zero(self):
        n = norms(np.zeros((3, 3)))
        assert (n.nuclear, n.spectral, n.l12, n.linf2, n.frobenius) == (0, 0, 0, 0, 0)

    def test_three_four_five(self):
        n = norms(np.diag([3.0, 4.0]))
        assert n.nuclear == pytest.approx(7.0)
        assert n.spectral == pytest.approx(4.0)
        assert n.frobenius == pytest.approx(5.0)


class TestHardThreshold:
    def test_keeps_values_above_alpha(self):
        svd = make_svd([5.0, 3.0, 1.0])
        out = np.linalg.svd(hard_threshold_svd(svd, 2.0), compute_uv=False)
        assert np.allclose(out[:2], [5.0, 3.0])
        assert np.all(out[2:] < 1e-10)

    def test_alpha_zero_is_identity(self):
        svd = make_svd([5.0, 3.0, 1.0])
        assert np.allclose(hard_threshold_svd(svd, 0.0), svd.reconstruct())

    def test_tie_at_alpha_dropped(self):
        svd = make_svd([5.0, 2.0])
        out = hard_threshold_svd(svd, 2.0)
        assert np.linalg.matrix_rank(out) == 1

    def test_never_increases_norms(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            m = rng.normal(size=(6, 9))
            svd = compact_svd(m)
            alpha = rng.uniform(0, svd.sigma[0] * 1.2)
            before, after = norms(m), norms(hard_threshold_svd(svd, alpha))
            assert after.nuclear <= before.nuclear + 1e-10
            assert after.spectral <= before.spectral + 1e-10
            assert after.frobenius <= before.frobenius + 1e-10


class TestAlphaFromEnergy:
    def test_single_dominant_value(self):
        assert alpha_from_energy_fraction(make_svd([100.0, 1.0]), 0.99) == pytest.approx(50.5)

    def test_all_values_needed(self):
        assert alpha_from_energy_fraction(make_svd([10.0, 5.0, 1.0]), 0.99) == 0.0

    def test_fraction_one(self):
        assert alpha_from_energy_fraction(make_svd([9.0, 4.0, 2.0]), 1.0) == 0.0

    def test_threshold_reproduces_kept_set(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            sigma = np.sort(rng.uniform(0.1, 10, size=5))[::-1]
            svd = make_svd(sigma)
            frac = rng.uniform(0.5, 0.999)
            alpha = alpha_from_energy_fraction(svd, frac)
            kept = sigma[sigma > alpha]
            assert kept.sum() >= frac * sigma.sum() - 1e-9
            if kept.size > 1:
                assert kept[:-1].sum() < frac * sigma.sum()

    def test_fraction_out_of_range(self):
        with pytest.raises(InvalidInput):
            alpha_from_energy_fraction(make_svd([1.0]), 0.0)


class TestProjectComplement:
    def test_canonical(self):
        u = np.array([[1.0], [0.0], [0.0]])
        e2 = np.array([[0.0], [1.0], [0.0]])
        out = project_complement(u, e2)
        assert np.allclose(out, e2)

    def test_in_span_maps_to_zero(self):
        rng = np.random.default_rng(7)
        u, _ = np.linalg.qr(rng.normal(size=(6, 2)))
        x = u @ rng.normal(size=(2, 3))
        assert np.abs(project_complement(u, x)).max() < 1e-12

    def test_output_orthogonal_to_span(self):
        rng = np.random.default_rng(8)
        u, _ = np.linalg.qr(rng.normal(size=(8, 3)))
        x = rng.normal(size=(8, 5))
        out = project_complement(u, x)
        assert np.abs(u.T @ out).max() < 1e-10

    def test_idempotent_and_self_adjoint(self):
        rng = np.random.default_rng(9)
        u, _ = np.linalg.qr(rng.normal(size=(7, 2)))
        x = rng.normal(size=(7, 4))
        y = rng.normal(size=(7, 4))
        px = project_complement(u, x)
        assert np.abs(project_complement(u, px) - px).max() < 1e-10
        lhs = float(np.sum(px * y))
        rhs = float(np.sum(x * project_complement(u, y)))
        assert abs(lhs - rhs) < 1e-10

    def test_empty_basis_is_identity(self):
        x = np.arange(6.0).reshape(3, 2)
        assert np.array_equal(project_complement(np.zeros((3, 0)), x), x)

    def test_non_orthonormal_rejected(self):
        with pytest.raises(InvalidInput):
            project_complement(np.array([[1.0], [1.0]]), np.eye(2))


class TestColumnResiduals:
    def test_columns_in_span(self):
        rng = np.random.default_rng(10)
        u, _ = np.linalg.qr(rng.normal(size=(6, 2)))
        m = u @ rng.normal(size=(2, 5))
        assert np.all(column_residuals(m, u) < 1e-12)

    def test_single_orthogonal_outlier(self):
        u = np.eye(4)[:, :2]
        m = np.zeros((4, 3))
        m[:, 0] = u[:, 0]
        m[3, 2] = 7.0
        z = column_residuals(m, u)
        assert np.allclose(z, [0.0, 0.0, 7.0], atol=1e-12)

    def test_matches_least_squares_oracle(self):
        rng = np.random.default_rng(12)
        u, _ = np.linalg.qr(rng.normal(size=(9, 3)))
        m = rng.normal(size=(9, 6))
        z = column_residuals(m, u)
        for j in range(6):
            _, res, _, _ = np.linalg.lstsq(u, m[:, j], rcond=None)
            oracle = np.sqrt(res[0]) if res.size else 0.0
            assert z[j] == pytest.approx(oracle, abs=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInput):
            column_residuals(np.eye(3), np.eye(4)[:, :1])


class TestIncoherence:
    def test_identical_columns(self):
        a = np.ones((4, 5))
        inc = column_incoherence(a)
        assert inc.mu_v == pytest.approx(1.0)
        assert inc.r == 1 and inc.n_l == 5

    def test_two_repeats_one_orthogonal(self):
        a = np.zeros((4, 3))
        a[0, 0] = a[0, 1] = 1.0
        a[1, 2] = 1.0
        inc = column_incoherence(a)
        assert inc.r == 2 and inc.n_l == 3
        assert inc.mu_v == pytest.approx(1.5)

    def test_single_canonical_column(self):
        a = np.zeros((4, 6))
        a[0, 0] = 1.0
        inc = column_incoherence(a)
        assert (inc.mu_v, inc.r, inc.n_l) == (pytest.approx(1.0), 1, 1)

    def test_identical_rows(self):
        inc = row_incoherence(np.ones((5, 4)))
        assert inc.mu_u == pytest.approx(1.0)

    def test_spiked_row(self):
        a = np.zeros((4, 4))
        a[0, 0] = 1.0
        inc = row_incoherence(a)
        assert inc.mu_u == pytest.approx(4.0)
        assert inc.r == 1 and inc.n1 == 4

    def test_bounds_hold_on_random_low_rank(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            n1, n2, r = 12, 15, 3
            l = rng.normal(size=(n1, r)) @ rng.normal(size=(r, n2))
            ci, ri = column_incoherence(l), row_incoherence(l)
            assert 1.0 - 1e-9 <= ci.mu_v <= n2 / r + 1e-9
            assert 1.0 - 1e-9 <= ri.mu_u <= n1 / r + 1e-9

    def test_zero_matrix_rejected(self):
        with pytest.raises(InvalidInput):
            column_incoherence(np.zeros((3, 3)))


class TestApplyMask:
    def test_full_mask(self):
        m = np.arange(6.0).reshape(2, 3)
        out = apply_mask(m, ObservationMask.full(2, 3))
        assert np.array_equal(out.values, m)

    def test_empty_mask(self):
        m = np.ones((2, 3))
        out = apply_mask(m, ObservationMask(np.zeros((2, 3), dtype=bool)))
        assert not out.values.any()

    def test_half_mask_preserves_count(self):
        rng = np.random.default_rng(14)
        m = rng.normal(size=(6, 6)) + 10.0
        obs = rng.random((6, 6)) < 0.5
        out = apply_mask(m, ObservationMask(obs))
        assert np.count_nonzero(out.values) == obs.sum()
        assert np.array_equal(out.values[obs], m[obs])

    def test_idempotent(self):
        rng = np.random.default_rng(15)
        m = rng.normal(size=(4, 4))
        mask = ObservationMask(rng.random((4, 4)) < 0.4)
        once = apply_mask(m, mask)
        twice = apply_mask(once.values, mask)
        assert np.array_equal(once.values, twice.values)

    def test_dim_mismatch(self):
        with pytest.raises(InvalidInput):
            apply_mask(np.eye(3), ObservationMask.full(2, 3))


class TestPerturbationBounds:
    def test_singular_value_shifts_bounded_by_spectral_norm(self):
        rng = np.random.default_rng(16)
        for _ in range(200):
            n1 = int(rng.integers(2, 21))
            n2 = int(rng.integers(2, 21))
            a = rng.normal(size=(n1, n2))
            e = rng.normal(size=(n1, n2)) * rng.uniform(0.01, 2.0)
            sa = np.linalg.svd(a, compute_uv=False)
            sae = np.linalg.svd(a + e, compute_uv=False)
            bound = np.linalg.norm(e, 2) + 1e-10
            assert np.abs(sae - sa).max() <= bound

    def test_projector_shift_bounded(self):
        rng = np.random.default_rng(17)
        checked = 0
        for _ in range(100):
            n1, n2, r = 10, 12, 3
            x = rng.normal(size=(n1, r))
            y = rng.normal(size=(n2, r))
            a = x @ y.T
            at = (x + 0.05 * rng.normal(size=(n1, r))) @ (y + 0.05 * rng.normal(size=(n2, r))).T
            e = at - a
            sa = compact_svd(a)
            sat = compact_svd(at)
            assert sa.rank == r and sat.rank == r
            p_a = sa.u @ sa.u.T
            p_at = sat.u @ sat.u.T
            dist = np.linalg.norm(p_at - p_a, 2)
            u2_e = e - sa.u @ (sa.u.T @ e)
            bound = min(
                1.0,
                np.linalg.norm(e @ sa.v, 2) / sa.sigma[-1],
                np.linalg.norm(u2_e, 2) / sat.sigma[-1],
            )
            assert dist <= bound + 1e-8
            checked += 1
        assert checked == 100
