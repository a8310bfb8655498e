import numpy as np
import pytest

from oracles import harrell_loop, ipcw_score_loop, random_prediction, uno_loop
from survbench import SurvivalPrediction, task_from_columns
from survbench.errors import (
    ConfigError,
    DegenerateCensoring,
    DegenerateLP,
    EmptyGrid,
    MissingCrank,
    MissingDistr,
    MissingLP,
    NoComparablePairs,
)
from survbench.learners import fit_coxph, fit_kaplan_meier
from survbench.measures import (
    CensoringEstimate,
    calib_curve,
    graf_score,
    harrell_c,
    houwelingen_beta,
    int_logloss,
    make_measure,
    schmid_score,
    uno_c,
)


def _pred(time, status, **kw):
    return SurvivalPrediction(np.asarray(time, float), np.asarray(status, bool), **kw)


def _sharp(time, status):
    time = np.asarray(time, float)
    grid = np.unique(time)
    surv = (grid[None, :] < time[:, None]).astype(float)
    return _pred(time, status, grid=grid, surv=surv)


def _constant(time, status, value):
    grid = np.unique(np.asarray(time, float))
    return _pred(time, status, grid=grid, surv=np.full((len(time), grid.size), value))


def _km_fixture():
    time = np.array([1, 2, 2, 3, 4, 4, 5, 6, 7, 8], float)
    status = np.array([1, 0, 1, 1, 0, 1, 0, 1, 0, 1], bool)
    km = fit_kaplan_meier(task_from_columns(np.empty((10, 0)), time, status))
    return km.predict(task_from_columns(np.empty((10, 0)), time, status))


# --------------------------------------------------------------------------- censoring weights


def test_censoring_estimate_left_and_right():
    cens = CensoringEstimate([1, 2, 3], [1, 0, 1])
    np.testing.assert_allclose(cens.at([1.0, 2.0, 3.0]), [1.0, 0.5, 0.5])
    np.testing.assert_allclose(cens.left([1.0, 2.0, 3.0]), [1.0, 1.0, 0.5])
    g, mask = cens.floored(np.array([0.5, 1e-6]))
    assert g.tolist() == [0.5, 1e-4] and mask.tolist() == [False, True]


# --------------------------------------------------------------------------- concordance


def test_harrell_examples():
    assert harrell_c(_pred([1, 2, 3], [1, 1, 1], crank=[3, 2, 1])) == 1.0
    assert harrell_c(_pred([1, 2, 3], [1, 1, 1], crank=[1, 2, 3])) == 0.0
    assert harrell_c(_pred([1, 2, 3, 4], [1, 0, 1, 1], crank=[4, 1, 3, 2])) == 1.0
    # hand count: pairs (1,2) (1,3) (1,4) (3,4); only (1,2) concordant
    pred = _pred([1, 2, 3, 4], [1, 0, 1, 1], crank=[2, 1, 3, 4])
    assert harrell_c(pred) == 0.25 == harrell_loop(pred.time, pred.status, pred.crank)


def test_harrell_event_censored_tie_is_comparable():
    pred = _pred([2, 2], [1, 0], crank=[1.0, 0.0])
    assert harrell_c(pred) == 1.0


def test_uno_examples():
    pred = _pred([1, 2, 3, 4], [1, 0, 1, 1], crank=[4, 1, 3, 2])
    assert uno_c(pred, 4.0) == 1.0
    pred = _pred([1, 2, 3, 4], [1, 0, 1, 1], crank=[2, 1, 3, 4])
    # weights: G(1-) = 1 on three pairs, G(3-) = 2/3 on one pair
    expected = 1.0 / (3.0 + 9.0 / 4.0)
    assert abs(uno_c(pred, 4.0) - expected) < 1e-15
    assert abs(uno_c(pred, 4.0) - uno_loop(pred.time, pred.status, pred.crank, 4.0)) < 1e-15


def test_uno_perfect_ranking_with_censoring():
    rng = np.random.default_rng(0)
    time = rng.uniform(1, 10, 50)
    status = rng.uniform(size=50) < 0.6
    assert uno_c(_pred(time, status, crank=-time), tau=9.0) == 1.0


def test_concordance_errors():
    with pytest.raises(MissingCrank):
        harrell_c(_pred([1, 2], [1, 1], lp=[0.1, 0.2]))
    with pytest.raises(NoComparablePairs):
        harrell_c(_pred([1, 2], [0, 0], crank=[0, 1]))
    with pytest.raises(NoComparablePairs):
        uno_c(_pred([1, 2], [1, 1], crank=[0, 1]), tau=0.5)


def test_uno_flags_degenerate_censoring():
    # long censored run leaves G(t-) = 2/n < 1e-4 for the only comparable pair
    n = 21_000
    time = np.arange(1, n + 1, dtype=float)
    status = np.zeros(n, bool)
    status[-2] = True
    with pytest.raises(DegenerateCensoring, match="1 of 1"):
        uno_c(_pred(time, status, crank=-time), tau=float(n + 1))


def test_concordance_small_oracle_sweep():
    rng = np.random.default_rng(12)
    for _ in range(50):
        p = random_prediction(rng, int(rng.integers(2, 25)), 4)
        crank = np.round(p.crank, 1)  # introduce crank ties
        q = p.replace(crank=crank)
        try:
            h = harrell_c(q)
        except NoComparablePairs:
            continue
        assert h == pytest.approx(harrell_loop(q.time, q.status, crank), abs=1e-15)
        tau = float(np.max(q.time))
        try:
            u = uno_c(q, tau)
        except NoComparablePairs:
            continue
        assert u == pytest.approx(uno_loop(q.time, q.status, crank, tau), abs=1e-12)


# --------------------------------------------------------------------------- scoring rules


def test_sharp_forecast_scores():
    time = [1, 2, 3, 5, 8]
    status = [1] * 5
    assert graf_score(_sharp(time, status)) == 0.0
    assert schmid_score(_sharp(time, status)) == 0.0
    assert int_logloss(_sharp(time, status)) < 1e-10


def test_constant_half_scores():
    time, status = [1, 2, 3, 5, 8], [1] * 5
    half = _constant(time, status, 0.5)
    assert graf_score(half) == pytest.approx(0.25, abs=1e-15)
    assert schmid_score(half) == pytest.approx(0.5, abs=1e-15)
    assert int_logloss(half) == pytest.approx(np.log(2.0), abs=1e-15)


def test_km_fixture_against_loop_oracle():
    pred = _km_fixture()
    rules = [
        (graf_score, lambda s: s**2, lambda s: (1 - s) ** 2),
        (schmid_score, abs, lambda s: abs(1 - s)),
        (int_logloss, lambda s: -np.log(1 - np.clip(s, 1e-15, 1 - 1e-15)),
         lambda s: -np.log(np.clip(s, 1e-15, 1 - 1e-15))),
    ]
    for fn, le, ls in rules:
        for tau in (None, 4.0, 1.0):
            ref = ipcw_score_loop(pred.time, pred.status, pred.grid, pred.surv, le, ls, tau=tau)
            assert abs(fn(pred, tau) - ref) < 1e-10


def test_scores_permutation_invariant():
    rng = np.random.default_rng(8)
    for _ in range(25):
        p = random_prediction(rng, 30, 6, censor_p=0.5)
        perm = rng.permutation(p.n)
        q = p.subset(perm)
        for fn in (graf_score, int_logloss, schmid_score):
            assert fn(p) == fn(q)


def test_sharp_forecast_beats_competitors():
    rng = np.random.default_rng(21)
    time = rng.integers(1, 15, size=25).astype(float)
    status = np.ones(25, bool)
    best = graf_score(_sharp(time, status))
    for _ in range(100):
        grid = np.unique(time)
        surv = np.sort(rng.uniform(size=(25, grid.size)), axis=1)[:, ::-1]
        assert best <= graf_score(_pred(time, status, grid=grid, surv=surv))


def test_scoring_errors():
    with pytest.raises(MissingDistr):
        graf_score(_pred([1, 2], [1, 1], crank=[0, 1]))
    with pytest.raises(EmptyGrid):
        graf_score(_constant([1, 2], [0, 1], 0.5), tau=1.5)


def test_single_point_grid_returns_pointwise_value():
    pred = _constant([1, 2, 3], [1, 0, 0], 0.25)
    # t = 1: subject 1 failed (G = 1), two survivors with G(1) = 1
    expected = (0.25**2 + 2 * 0.75**2) / 3
    assert graf_score(pred) == pytest.approx(expected, abs=1e-15)


# --------------------------------------------------------------------------- calibration


@pytest.fixture(scope="module")
def cox_on_ph11(ph42, ph11):
    return fit_coxph(ph42).predict(ph11)


def test_houwelingen_well_specified(cox_on_ph11):
    beta = houwelingen_beta(cox_on_ph11)
    assert 0.85 <= beta <= 1.15
    # golden value, first verified run
    assert beta == pytest.approx(1.0165, abs=1e-4)


def test_houwelingen_scaling(cox_on_ph11):
    beta = houwelingen_beta(cox_on_ph11)
    doubled = houwelingen_beta(cox_on_ph11.replace(lp=2.0 * cox_on_ph11.lp))
    assert abs(doubled - beta / 2.0) < 1e-6


def test_houwelingen_errors():
    with pytest.raises(DegenerateLP):
        houwelingen_beta(_pred([1, 2, 3], [1, 1, 0], lp=[0.3, 0.3, 0.3]))
    with pytest.raises(MissingLP):
        houwelingen_beta(_pred([1, 2, 3], [1, 1, 0], crank=[0.3, 0.2, 0.3]))


def test_calib_curve_self_calibration():
    curve = calib_curve(_km_fixture())
    np.testing.assert_allclose(curve.mean_pred_surv, curve.km_surv, atol=1e-12)


def test_calib_curve_constant_one():
    curve = calib_curve(_constant([1, 2, 3, 4], [1, 1, 0, 1], 1.0))
    assert np.all(curve.mean_pred_surv == 1.0)
    assert curve.km_surv[-1] < 1.0


def test_calib_curve_cox(cox_on_ph11, tmp_path):
    curve = calib_curve(cox_on_ph11)
    assert curve.max_gap() < 0.05
    # golden value, first verified run
    assert curve.max_gap() == pytest.approx(0.0357, abs=1e-4)
    curve.to_csv(tmp_path / "c.csv")
    header = (tmp_path / "c.csv").read_text().splitlines()[0]
    assert header == "t,mean_pred_surv,km_surv"


# --------------------------------------------------------------------------- registry


def test_make_measure():
    assert make_measure("uno_c(tau=5)").tau == 5.0
    assert make_measure("graf").direction == "minimize"
    assert make_measure("harrell_c").requires == "crank"
    assert make_measure("intlogloss(tau=2.5)").describe() == "intlogloss(tau=2.5)"
    for bad in ["uno_c", "auc", "graf(tau=-1)", "intlogloss(eps=0.1)", "graf(foo=1)"]:
        with pytest.raises(ConfigError):
            make_measure(bad)
