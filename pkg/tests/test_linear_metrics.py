import numpy as np
import pytest
from hypothesis import given, strategies as st

from lifeladder import variables as V
from lifeladder.errors import ParameterError, SingularSystemError, ZeroVarianceError
from lifeladder.linear import fit_linear, select_ridge_lambda
from lifeladder.metrics import MetricReport, score, write_metrics_csv
from lifeladder.pipeline import FeatureRow, FeatureTable


def _table(x, y):
    rows = tuple(
        FeatureRow(
            country=f"c{i}",
            year=2016,
            values={**{v: float(val) for v, val in zip(V.PREDICTORS, row)},
                    V.LIFE_LADDER: float(t)},
        )
        for i, (row, t) in enumerate(zip(x, y))
    )
    return FeatureTable(rows=rows)


def _linear_data(seed=0, n=60, noise=0.0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 12))
    w = rng.normal(size=12)
    y = x @ w + 1.7 + noise * rng.normal(size=n)
    return x, y, w


class TestFitLinear:
    def test_exact_fit_when_truly_linear(self):
        x, y, w = _linear_data()
        model = fit_linear(_table(x, y), ridge_lambda=0.0)
        residuals = y - model.predict(x)
        assert np.max(np.abs(residuals)) < 1e-9
        assert score(model.predict(x), y).r2 == pytest.approx(1.0, abs=1e-12)
        assert model.weights == pytest.approx(w, abs=1e-9)

    def test_huge_penalty_shrinks_to_mean(self):
        x, y, _ = _linear_data(noise=0.3)
        model = fit_linear(_table(x, y), ridge_lambda=1e12)
        assert np.max(np.abs(model.weights)) < 1e-6
        assert model.predict(x) == pytest.approx(np.full(len(y), y.mean()), abs=1e-4)

    def test_rank_deficient_ols_rejected_but_ridge_works(self):
        x, y, _ = _linear_data()
        x[:, 5] = x[:, 4]  # duplicated predictor
        with pytest.raises(SingularSystemError, match="ridge"):
            fit_linear(_table(x, y), ridge_lambda=0.0)
        model = fit_linear(_table(x, y), ridge_lambda=0.1)
        assert np.all(np.isfinite(model.weights))

    def test_negative_penalty_rejected(self):
        x, y, _ = _linear_data()
        with pytest.raises(ParameterError):
            fit_linear(_table(x, y), ridge_lambda=-1.0)

    def test_ols_residuals_orthogonal_to_predictors(self, train_test):
        train, _ = train_test
        model = fit_linear(train, ridge_lambda=0.0)
        x = train.matrix(V.PREDICTORS)
        residuals = train.target() - model.predict(x)
        z = (x - x.mean(axis=0)) / x.std(axis=0)
        assert np.max(np.abs(z.T @ residuals)) < 1e-8

    def test_constant_column_is_rank_deficient_for_ols(self):
        x, y, _ = _linear_data()
        x[:, 2] = 3.0
        with pytest.raises(SingularSystemError):
            fit_linear(_table(x, y), ridge_lambda=0.0)


class TestSelectRidge:
    def test_returns_grid_member_deterministically(self, train_test):
        train, _ = train_test
        grid = [1e-3, 1e-1, 10.0]
        lam1, scores1 = select_ridge_lambda(train, grid=grid, k=4, seed=2)
        lam2, scores2 = select_ridge_lambda(train, grid=grid, k=4, seed=2)
        assert lam1 == lam2 and scores1 == scores2
        assert lam1 in grid

    def test_empty_grid_rejected(self, train_test):
        train, _ = train_test
        with pytest.raises(ParameterError):
            select_ridge_lambda(train, grid=[])

    def test_heavy_noise_prefers_regularization(self):
        # 13 rows, 12 predictors, pure-noise target: the near-unpenalized
        # fit memorizes noise, so CV must select a larger penalty.
        rng = np.random.default_rng(8)
        x = rng.normal(size=(13, 12))
        y = rng.normal(size=13)
        lam, _ = select_ridge_lambda(_table(x, y), grid=[1e-6, 1e3], k=3)
        assert lam == 1e3


class TestScore:
    def test_perfect_predictions(self):
        report = score([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], model_name="m")
        assert report == MetricReport(model_name="m", r2=1.0, mae=0.0, mse=0.0)

    def test_constant_mean_prediction_gives_zero_r2(self):
        actuals = np.array([1.0, 2.0, 3.0, 6.0])
        report = score(np.full(4, actuals.mean()), actuals)
        assert report.r2 == pytest.approx(0.0, abs=1e-15)

    def test_hand_case(self):
        # errors (1, -1): mae = 1, mse = 1, ss_res = 2, ss_tot = 2 -> r2 = 0
        report = score([2.0, 3.0], [1.0, 4.0])
        assert report.mae == pytest.approx(1.0)
        assert report.mse == pytest.approx(1.0)
        assert report.r2 == pytest.approx(1.0 - 2.0 / 4.5)

    def test_zero_variance_actuals(self):
        with pytest.raises(ZeroVarianceError):
            score([1.0, 2.0], [3.0, 3.0])

    def test_length_mismatch(self):
        with pytest.raises(ParameterError):
            score([1.0], [1.0, 2.0])
        with pytest.raises(ParameterError):
            score([], [])

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        pred, act = rng.normal(size=30), rng.normal(size=30)
        perm = rng.permutation(30)
        a = score(pred, act)
        b = score(pred[perm], act[perm])
        assert (a.r2, a.mae, a.mse) == pytest.approx((b.r2, b.mae, b.mse))

    @given(
        st.lists(
            st.tuples(
                st.floats(-1e3, 1e3),
                st.floats(-1e3, 1e3),
            ),
            min_size=2,
            max_size=40,
        )
    )
    def test_mse_dominates_squared_mae(self, pairs):
        pred = np.array([p for p, _ in pairs])
        act = np.array([a for _, a in pairs])
        if ((act - act.mean()) ** 2).sum() == 0:
            return
        report = score(pred, act)
        assert report.mse >= report.mae**2 - 1e-9


class TestMetricsCsv:
    def test_table_layout(self, tmp_path):
        path = tmp_path / "metrics.csv"
        write_metrics_csv(
            [
                MetricReport("GRNN", 0.88, 0.29, 0.15),
                MetricReport("OLS", 0.75, 0.43, 0.31),
            ],
            path,
            provenance="config=feed",
        )
        lines = path.read_text().splitlines()
        assert lines[0] == "# config=feed"
        assert lines[1] == "model,r2,mae,mse"
        assert lines[2] == "GRNN,0.880000,0.290000,0.150000"
        assert lines[3].startswith("OLS,0.750000")
