import dataclasses

import numpy as np
import pytest

from panelmetrics.errors import ConfigError, DomainError
from panelmetrics.simulate import (
    OBSERVED_RHO_MEAN,
    OBSERVED_RHO_SD,
    UniverseConfig,
    b_grid_scan,
    fit_exponent_b,
    generate_universe,
    mean_offdiag_correlation,
    panel_precision_scan,
    regress_b_on_rho,
    sample_target_rho_like_observed,
    BGridRow,
)
from panelmetrics.streams import SeededStream, TailTransform

# small enough to keep the suite quick, large enough to be meaningful
SMALL = dict(n_ais=20, m_candidates=400)


class TestUniverseConfig:
    def test_defaults_are_paper_scale(self):
        cfg = UniverseConfig(target_rho=0.5)
        assert (cfg.n_ais, cfg.m_candidates) == (100, 2000)
        assert (cfg.sig_rho, cfg.rho_sig_corr) == (0.05, 0.78)
        assert (cfg.scale_min, cfg.scale_max, cfg.scale_sd) == (0.2, 1.2, 0.2)
        assert cfg.t_mean == 7.0
        assert cfg.tail == TailTransform(kink=1.6, boost=0.0, sharpness=3.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(target_rho=0.0),
            dict(target_rho=1.0),
            dict(target_rho=0.5, n_ais=1),
            dict(target_rho=0.5, scale_min=1.2, scale_max=0.2),
            dict(target_rho=0.5, rho_sig_corr=1.5),
            dict(target_rho=0.5, sig_rho=-0.1),
        ],
    )
    def test_invalid_configs_rejected(self, kwargs):
        with pytest.raises(ConfigError):
            UniverseConfig(**kwargs)


class TestGenerateUniverse:
    def test_shapes_and_truth_consistency(self):
        cfg = UniverseConfig(target_rho=0.5, **SMALL)
        u = generate_universe(cfg, SeededStream(1))
        assert u.scores.shape == (400, 20)
        assert np.max(np.abs(u.y_true - u.scores.mean(axis=1))) < 1e-12
        assert -1.0 < u.measured_rho < 1.0

    def test_column_scales_respect_bounds(self):
        cfg = UniverseConfig(target_rho=0.5, **SMALL)
        u = generate_universe(cfg, SeededStream(2))
        sds = u.scores.std(axis=0)
        assert np.all(sds >= cfg.scale_min - 1e-9)
        assert np.all(sds <= cfg.scale_max + 1e-9)

    def test_tight_spread_hits_target_rho(self):
        # with no per-scorer spread the factor model pins the pairwise
        # correlation at the target
        cfg = UniverseConfig(target_rho=0.6, sig_rho=0.0)
        u = generate_universe(cfg, SeededStream(3))
        assert u.measured_rho == pytest.approx(0.6, abs=0.02)

    def test_deterministic(self):
        cfg = UniverseConfig(target_rho=0.4, **SMALL)
        a = generate_universe(cfg, SeededStream(9))
        b = generate_universe(cfg, SeededStream(9))
        assert np.array_equal(a.scores, b.scores)
        assert a.measured_rho == b.measured_rho

    def test_boost_changes_scores_not_center(self):
        cfg = UniverseConfig(target_rho=0.5, **SMALL)
        boosted = dataclasses.replace(cfg, tail=TailTransform(boost=1.0))
        a = generate_universe(cfg, SeededStream(4))
        b = generate_universe(boosted, SeededStream(4))
        assert not np.array_equal(a.scores, b.scores)
        assert b.scores.mean() == pytest.approx(cfg.t_mean, abs=1e-9)


class TestMeanOffdiagCorrelation:
    def test_identical_columns(self):
        col = np.arange(10.0)
        assert mean_offdiag_correlation(np.column_stack([col, col])) == pytest.approx(1.0)

    def test_negated_column(self):
        col = np.arange(10.0)
        assert mean_offdiag_correlation(np.column_stack([col, -col])) == pytest.approx(
            -1.0
        )

    def test_three_column_hand_case(self):
        g = SeededStream(5).generator()
        mat = g.standard_normal((50, 3))
        c = np.corrcoef(mat, rowvar=False)
        expected = (c[0, 1] + c[0, 2] + c[1, 2]) / 3
        assert mean_offdiag_correlation(mat) == pytest.approx(expected, abs=1e-12)

    def test_constant_column_rejected(self):
        with pytest.raises(DomainError):
            mean_offdiag_correlation(np.column_stack([np.ones(5), np.arange(5.0)]))


@pytest.fixture(scope="module")
def small_universe():
    return generate_universe(UniverseConfig(target_rho=0.5, **SMALL), SeededStream(20))


class TestPanelPrecisionScan:
    def test_full_panel_is_exact(self, small_universe):
        scan = panel_precision_scan(
            small_universe, 0.2, SeededStream(21), sizes=[20], samples_per_size=10
        )
        assert scan.avg_precisions[0] == 1.0

    def test_roughly_monotone_in_size(self, small_universe):
        scan = panel_precision_scan(
            small_universe,
            0.2,
            SeededStream(22),
            sizes=range(1, 16),
            samples_per_size=600,
        )
        p = scan.avg_precisions
        assert np.all(np.diff(p) > -0.01)
        assert p[-1] > p[0]

    def test_deterministic(self, small_universe):
        a = panel_precision_scan(
            small_universe, 0.2, SeededStream(23), sizes=[2, 5], samples_per_size=50
        )
        b = panel_precision_scan(
            small_universe, 0.2, SeededStream(23), sizes=[2, 5], samples_per_size=50
        )
        assert np.array_equal(a.avg_precisions, b.avg_precisions)
        assert a.fitted_b == b.fitted_b

    def test_size_bounds_checked(self, small_universe):
        with pytest.raises(DomainError):
            panel_precision_scan(small_universe, 0.2, SeededStream(0), sizes=[0])
        with pytest.raises(DomainError):
            panel_precision_scan(small_universe, 0.2, SeededStream(0), sizes=[21])


class TestFitExponentB:
    def _law(self, k, b, rho, q):
        nb = k**b
        return (nb * rho + q * (1 - rho)) / (1 + (nb - 1) * rho)

    def test_roundtrip_recovery(self):
        sizes = np.arange(1, 31)
        for b_true in (0.3, 0.7, 1.2):
            p = self._law(sizes.astype(float), b_true, 0.5, 0.2)
            assert fit_exponent_b(sizes, p, 0.5, 0.2) == pytest.approx(b_true, abs=1e-3)

    def test_flat_precisions_drive_b_to_floor(self):
        sizes = np.arange(1, 31)
        p = np.full(sizes.size, 0.5 + 0.2 * (1 - 0.5))
        assert fit_exponent_b(sizes, p, 0.5, 0.2) < 0.05

    def test_misaligned_rejected(self):
        with pytest.raises(DomainError):
            fit_exponent_b([1, 2, 3], [0.5, 0.6], 0.5, 0.2)

    def test_rho_domain(self):
        with pytest.raises(DomainError):
            fit_exponent_b([1, 2], [0.5, 0.6], 1.0, 0.2)


class TestBGridScan:
    def _cfg(self):
        return UniverseConfig(target_rho=0.5, **SMALL)

    def _scan(self, threads):
        return b_grid_scan(
            [0.1, 0.2],
            [0.4, 0.6],
            self._cfg(),
            base_seed=77,
            sizes=range(1, 9),
            samples_per_size=120,
            threads=threads,
        )

    def test_row_layout(self):
        rows = self._scan(1)
        assert [(r.q, r.target_rho) for r in rows] == [
            (0.1, 0.4),
            (0.1, 0.6),
            (0.2, 0.4),
            (0.2, 0.6),
        ]

    def test_identical_across_runs_and_threads(self):
        assert self._scan(1) == self._scan(1)
        assert self._scan(1) == self._scan(4)

    def test_empty_grid_rejected(self):
        with pytest.raises(DomainError):
            b_grid_scan([], [0.5], self._cfg(), 0)


class TestRegressBOnRho:
    def test_exact_line(self):
        rows = [
            BGridRow(q=0.2, target_rho=r, measured_rho=r, best_b=1.0 - 0.8 * r)
            for r in (0.3, 0.5, 0.7, 0.9)
        ]
        reg = regress_b_on_rho(rows)
        assert reg.slope == pytest.approx(-0.8, abs=1e-12)
        assert reg.intercept == pytest.approx(1.0, abs=1e-12)
        assert reg.r_squared == pytest.approx(1.0)

    def test_two_points_fit_perfectly(self):
        rows = [
            BGridRow(q=0.1, target_rho=0.3, measured_rho=0.3, best_b=0.9),
            BGridRow(q=0.1, target_rho=0.7, measured_rho=0.7, best_b=0.5),
        ]
        assert regress_b_on_rho(rows).r_squared == pytest.approx(1.0)

    def test_degenerate_spread_rejected(self):
        rows = [
            BGridRow(q=0.2, target_rho=0.5, measured_rho=0.5, best_b=0.6),
            BGridRow(q=0.2, target_rho=0.5, measured_rho=0.5, best_b=0.7),
        ]
        with pytest.raises(DomainError):
            regress_b_on_rho(rows)

    def test_mixed_q_rejected(self):
        rows = [
            BGridRow(q=0.1, target_rho=0.3, measured_rho=0.3, best_b=0.9),
            BGridRow(q=0.2, target_rho=0.7, measured_rho=0.7, best_b=0.5),
        ]
        with pytest.raises(DomainError):
            regress_b_on_rho(rows)


class TestSampleTargetRho:
    def test_matches_observed_distribution(self):
        draws = sample_target_rho_like_observed(200000, SeededStream(31))
        assert draws.mean() == pytest.approx(OBSERVED_RHO_MEAN, abs=0.01)
        assert draws.std() == pytest.approx(OBSERVED_RHO_SD, abs=0.01)

    def test_clipped_into_open_unit_interval(self):
        draws = sample_target_rho_like_observed(50000, SeededStream(32))
        assert draws.min() >= 0.01
        assert draws.max() <= 0.999

    def test_count_domain(self):
        with pytest.raises(DomainError):
            sample_target_rho_like_observed(0, SeededStream(0))
