import numpy as np
import pytest
from scipy.special import expit, logit
from scipy.stats import norm

from atrisk.errors import SingleClassError, SingularityError
from atrisk.learners import (
    GBTModel, GBTParams, LogisticModel, fit_gbt, fit_logistic, fit_probit, fit_probit_encompassing, importance,
    load_model, log_odds, model_from_json, model_to_json, penalized_gradient, penalized_loglik, predict_logistic,
    save_model,
)

from .oracles import gbt_leaf_weights


def toy(seed=0, n=200, m=3, scale=1.0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, m))
    beta = np.linspace(1.0, -1.0, m) * scale
    y = (rng.random(n) < expit(-0.5 + x @ beta)).astype(int)
    return x, y


class TestLogisticObjective:
    def test_gradient_matches_central_differences(self):
        x, y = toy(1, n=60, m=4)
        a = np.hstack([np.ones((60, 1)), x])
        rng = np.random.default_rng(2)
        eps = 1e-5
        for _ in range(10):
            theta = rng.normal(size=5)
            g = penalized_gradient(theta, a, y, 0.7)
            fd = np.array([
                (penalized_loglik(theta + eps * e, a, y, 0.7) - penalized_loglik(theta - eps * e, a, y, 0.7)) / (2 * eps)
                for e in np.eye(5)
            ])
            assert np.max(np.abs(g - fd)) / np.max(np.abs(g)) < 1e-6

    def test_optimum_is_grid_best(self):
        x, y = toy(3, n=20, m=3)
        model = fit_logistic(x, y, C=1.0)
        a = np.hstack([np.ones((20, 1)), x])
        theta = np.r_[model.intercept, model.coef]
        best = penalized_loglik(theta, a, y, 1.0)
        offsets = np.arange(-0.5, 0.5001, 0.01)
        for j in range(4):
            for d in offsets:
                probe = theta.copy()
                probe[j] += d
                assert penalized_loglik(probe, a, y, 1.0) <= best + 1e-12
        assert np.max(np.abs(penalized_gradient(theta, a, y, 1.0))) < 1e-6


class TestFitLogistic:
    def test_intercept_only_limit(self):
        x, y = toy(4)
        model = fit_logistic(x, y, C=1e-10)
        assert np.max(np.abs(model.coef)) < 1e-6
        assert model.intercept == pytest.approx(logit(y.mean()), abs=1e-6)

    def test_separable_data_stays_finite(self):
        x = np.array([[-2.0], [-1.0], [1.0], [2.0]])
        model = fit_logistic(x, [0, 0, 1, 1], C=1.0)
        assert np.isfinite(model.coef).all() and model.coef[0] > 0

    def test_norm_path_monotone(self):
        x, y = toy(5, m=5)
        norms = [np.linalg.norm(fit_logistic(x, y, C=c).coef) for c in np.logspace(-3, 1, 10)]
        assert all(a <= b + 1e-12 for a, b in zip(norms, norms[1:]))

    def test_objective_never_decreases(self):
        x, y = toy(6, m=6)
        path = fit_logistic(x, y, C=5.0).objective_path
        assert all(b >= a for a, b in zip(path, path[1:]))

    def test_row_permutation_invariance(self):
        x, y = toy(7)
        perm = np.random.default_rng(0).permutation(len(y))
        a, b = fit_logistic(x, y, 0.3), fit_logistic(x[perm], y[perm], 0.3)
        np.testing.assert_allclose(a.coef, b.coef, atol=1e-8)

    def test_single_class(self):
        with pytest.raises(SingleClassError):
            fit_logistic(np.zeros((5, 1)), np.zeros(5), C=1.0)

    def test_non_finite(self):
        with pytest.raises(ValueError):
            fit_logistic(np.array([[np.nan], [1.0]]), [0, 1], C=1.0)

    def test_standardize_uses_training_moments(self):
        x, y = toy(8)
        x = x * [1, 100, 0.01] + [5, -3, 0]
        model = fit_logistic(x, y, C=1.0, standardize=True)
        np.testing.assert_allclose(model.means, x.mean(axis=0))
        np.testing.assert_allclose(model.scales, x.std(axis=0))
        raw = fit_logistic((x - model.means) / model.scales, y, C=1.0)
        np.testing.assert_allclose(model.predict_proba(x), raw.predict_proba((x - model.means) / model.scales))

    def test_constant_column_scale_one(self):
        x = np.column_stack([np.random.default_rng(0).normal(size=30), np.ones(30)])
        model = fit_logistic(x, np.r_[np.zeros(15), np.ones(15)], C=1.0, standardize=True)
        assert model.scales[1] == 1.0


class TestPredictLogistic:
    def test_zero_model(self):
        m = LogisticModel(0.0, np.zeros(3), 1.0)
        assert predict_logistic(m, np.random.default_rng(0).normal(size=(4, 3))).tolist() == [0.5] * 4

    def test_log_odds_round_trip(self):
        p = np.random.default_rng(0).uniform(0.001, 0.999, 50)
        np.testing.assert_allclose(expit(log_odds(p)), p, atol=1e-12)

    def test_monotone_in_feature(self):
        x, y = toy(9)
        model = fit_logistic(x, y, 1.0)
        j = int(np.argmax(model.coef))
        lo = np.zeros((1, 3))
        hi = lo.copy()
        hi[0, j] = 1.0
        assert model.predict_proba(hi)[0] > model.predict_proba(lo)[0]

    def test_column_mismatch(self):
        with pytest.raises(ValueError):
            LogisticModel(0.0, np.zeros(3), 1.0).predict_proba(np.zeros((2, 2)))

    def test_serialisation_bit_identical(self, tmp_path):
        x, y = toy(10)
        model = fit_logistic(x, y, 0.5, standardize=True, labels=[("A", 0), ("B", 3), ("C", 0)])
        save_model(model, tmp_path / "m.json")
        back = load_model(tmp_path / "m.json")
        assert back.labels == model.labels
        assert back.predict_proba(x).tobytes() == model.predict_proba(x).tobytes()


class TestProbit:
    def test_matches_statsmodels(self):
        sm = pytest.importorskip("statsmodels.api")
        rng = np.random.default_rng(12)
        x = rng.normal(size=(300, 2))
        y = (rng.random(300) < norm.cdf(0.3 + x @ [0.8, -0.5])).astype(int)
        ours = fit_probit(x, y)
        ref = sm.Probit(y, sm.add_constant(x)).fit(disp=0, method="newton")
        np.testing.assert_allclose(ours.params, ref.params, atol=1e-7)
        np.testing.assert_allclose(ours.bse, ref.bse, rtol=1e-5)
        np.testing.assert_allclose(ours.pvalues, ref.pvalues, rtol=1e-4, atol=1e-12)
        assert ours.loglik == pytest.approx(ref.llf, rel=1e-10)

    def test_covariance_symmetric_psd(self):
        rng = np.random.default_rng(13)
        x = rng.normal(size=(200, 2))
        y = (rng.random(200) < 0.4).astype(int)
        cov = fit_probit(x, y).cov
        np.testing.assert_array_equal(cov, cov.T)
        assert np.linalg.eigvalsh(cov).min() > 0

    def test_encompassing_names_and_values(self):
        rng = np.random.default_rng(14)
        pa = expit(rng.normal(-1.5, 1.5, 420))
        y = (rng.random(420) < norm.cdf(log_odds(pa))).astype(int)
        pb = expit(rng.normal(size=420))
        fit = fit_probit_encompassing(pa, pb, y)
        assert fit.names == ("const", "beta_A", "beta_B")
        assert abs(fit.params[1] - 1) < 3 * fit.bse[1]

    def test_identical_forecasts_are_singular(self):
        p = np.linspace(0.1, 0.9, 50)
        with pytest.raises(SingularityError):
            fit_probit_encompassing(p, p, (p > 0.5).astype(int))

    def test_clamping_keeps_log_odds_finite(self):
        assert np.isfinite(log_odds([0.0, 1.0])).all()

    def test_serialisation(self):
        rng = np.random.default_rng(15)
        x = rng.normal(size=(100, 1))
        fit = fit_probit(x, (x[:, 0] + rng.normal(size=100) > 0).astype(int))
        back = model_from_json(model_to_json(fit))
        assert back.pvalues.tobytes() == fit.pvalues.tobytes()


class TestGBT:
    def test_stump_picks_perfect_feature(self):
        rng = np.random.default_rng(16)
        y = rng.integers(0, 2, 40)
        x = np.column_stack([rng.integers(0, 2, 40), y, rng.normal(size=40)])
        model = fit_gbt(x, y, GBTParams(rounds=1, max_depth=1))
        assert model.trees[0].feature[0] == 1
        assert 0 < model.trees[0].threshold[0] < 1

    def test_zero_rounds_is_base_rate(self):
        y = np.array([0, 0, 0, 1])
        model = fit_gbt(np.zeros((4, 1)), y, GBTParams(rounds=0))
        assert model.base_score == pytest.approx(logit(0.25))
        np.testing.assert_allclose(model.predict_proba(np.ones((3, 1))), 0.25)

    def test_leaf_weights_match_formula(self):
        rng = np.random.default_rng(17)
        x = rng.normal(size=(30, 2))
        y = (x[:, 0] + 0.5 * rng.normal(size=30) > 0).astype(int)
        params = GBTParams(rounds=3, max_depth=2)
        model = fit_gbt(x, y, params)
        for tree, weights in zip(model.trees, gbt_leaf_weights(x, y, model, params.leaf_l2)):
            for leaf, w in weights.items():
                assert tree.feature[leaf] == -1
                assert tree.weight[leaf] == pytest.approx(w, abs=1e-12)

    def test_depth_respected_and_loss_monotone(self):
        rng = np.random.default_rng(18)
        x = rng.normal(size=(150, 5))
        y = (np.sin(2 * x[:, 0]) + x[:, 1] ** 2 + rng.normal(size=150) > 1).astype(int)
        model = fit_gbt(x, y, GBTParams(rounds=30, max_depth=3))
        assert all(t.max_depth <= 3 for t in model.trees)
        assert all(np.isfinite(t.weight).all() for t in model.trees)
        loss = model.train_loss
        assert all(b <= a + 1e-12 for a, b in zip(loss, loss[1:]))

    def test_split_gain_formula(self):
        rng = np.random.default_rng(19)
        x = rng.normal(size=(50, 1))
        y = (x[:, 0] > 0.2).astype(int)
        model = fit_gbt(x, y, GBTParams(rounds=1, max_depth=1))
        tree = model.trees[0]
        p = np.full(50, y.mean())
        g, h = p - y, p * (1 - p)
        left = x[:, 0] < tree.threshold[0]

        def score(mask):
            return g[mask].sum() ** 2 / (h[mask].sum() + 1.0)

        expected = 0.5 * (score(left) + score(~left) - score(np.ones(50, bool)))
        assert tree.gain[0] == pytest.approx(expected, rel=1e-12)

    def test_serialisation_bit_identical(self):
        rng = np.random.default_rng(20)
        x = rng.normal(size=(80, 3))
        y = (x[:, 0] > 0).astype(int)
        model = fit_gbt(x, y, GBTParams(rounds=5, max_depth=2), labels=[("A", 0), ("A", 3), ("B", 0)])
        back = model_from_json(model_to_json(model))
        assert isinstance(back, GBTModel)
        assert back.predict_proba(x).tobytes() == model.predict_proba(x).tobytes()

    def test_single_class(self):
        with pytest.raises(SingleClassError):
            fit_gbt(np.zeros((4, 1)), np.ones(4))


class TestImportance:
    def test_logistic_single_nonzero(self):
        m = LogisticModel(0.0, np.array([0.0, -2.0, 0.0, 0.0]), 1.0, labels=(("A", 0), ("B", 0), ("A", 3), ("B", 3)))
        scores = importance(m)
        assert max(scores, key=scores.get) == "B"
        assert scores == {"A": 0.0, "B": 1.0}

    def test_logistic_mean_over_lags(self):
        coef = np.array([0.5, -1.0, 2.0, 0.25, -0.75, 0.0])
        labels = tuple((sid, lag) for lag in (0, 3) for sid in ("A", "B", "C"))
        scores = importance(LogisticModel(0.0, coef, 1.0, labels=labels))
        assert scores == {"A": (0.5 + 0.25) / 2, "B": (1.0 + 0.75) / 2, "C": (2.0 + 0.0) / 2}

    def test_gbt_mean_gain_and_unused_zero(self):
        rng = np.random.default_rng(21)
        x = rng.normal(size=(100, 3))
        y = (x[:, 0] > 0).astype(int)
        model = fit_gbt(x, y, GBTParams(rounds=4, max_depth=2), labels=[("A", 0), ("A", 3), ("Z", 0)])
        gains = {"A": [], "Z": []}
        for t in model.trees:
            for f, g in zip(t.feature, t.gain):
                if f >= 0:
                    gains[model.labels[f][0]].append(g)
        scores = importance(model)
        assert scores["A"] == pytest.approx(np.mean(gains["A"]))
        assert scores["Z"] == (np.mean(gains["Z"]) if gains["Z"] else 0.0)

    def test_gbt_duplicate_column_keeps_gain_on_first_copy(self):
        rng = np.random.default_rng(22)
        x = rng.normal(size=(100, 1))
        y = (x[:, 0] > 0).astype(int)
        one = fit_gbt(x, y, GBTParams(rounds=3, max_depth=1), labels=["A"])
        two = fit_gbt(np.hstack([x, x]), y, GBTParams(rounds=3, max_depth=1), labels=["A", "A2"])
        # ties resolve to the first column, so the copy is never used
        assert importance(two)["A2"] == 0.0
        assert importance(two)["A"] == pytest.approx(importance(one)["A"])
