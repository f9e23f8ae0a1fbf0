import math

import numpy as np
import pytest

from mlphillips import fitting, models
from mlphillips.dataio import DataSet, EconRecord, bin_average
from mlphillips.fitting import (
    PENALTY,
    FitError,
    default_starts,
    evaluate_published,
    fit_model,
    make_objective,
    reproduce_tables,
    synthetic_demo,
)
from mlphillips.models import ExpParams, MLModelParams, ModelKind, evaluator, sse
from mlphillips.optimizer import SimplexConfig

ML = ModelKind.MITTAG_LEFFLER


def test_default_starts(datasets):
    avg = bin_average(datasets["france"])
    ml = default_starts(ML, avg)
    assert len(ml) == 12
    y_max = max(p.mean_inflation for p in avg)
    assert {s[2] for s in ml} == {-0.3} and {s[3] for s in ml} == {y_max}
    power = default_starts(ModelKind.POWER, avg)
    assert power[-1] == (0.0, y_max, -1.0)
    assert power[0][0] == 0.0 and power[0][2] < 0
    exp = default_starts(ModelKind.EXPONENTIAL, avg)
    assert exp[-1] == (0.0, y_max, -0.5)


def test_default_starts_need_three_points():
    with pytest.raises(FitError):
        default_starts(ModelKind.POWER, [(1.0, 2.0), (2.0, 1.0)])


def test_objective_penalises_infeasible_shape(datasets):
    f = make_objective(ML, bin_average(datasets["france"]))
    assert f(np.array([-0.5, 1.0, -0.3, 10.0])) == PENALTY + 0.5
    assert f(np.array([-0.5, -2.0, -0.3, 10.0])) == PENALTY + 2.5
    assert f(np.array([1.5, 1.9, -0.3, 10.0])) < PENALTY


def test_objective_penalises_numeric_failure(datasets):
    f = make_objective(ML, bin_average(datasets["france"]))
    # a * x**alpha far beyond the series guard
    assert f(np.array([3.0, 1.0, -5.0, 1.0])) == PENALTY
    g = make_objective(ModelKind.EXPONENTIAL, bin_average(datasets["france"]))
    assert g(np.array([0.0, 1.0, 500.0])) == PENALTY


def test_fit_report_invariants(datasets):
    data = datasets["germany"]
    rep = fit_model(ModelKind.EXPONENTIAL, data)
    avg = [p.point for p in bin_average(data)]
    model = evaluator(ModelKind.EXPONENTIAL)
    assert abs(sse(model, rep.params, avg) - rep.sse_average) <= 1e-12
    assert rep.sse_original == sse(model, rep.params, data.points)
    assert rep.n_original == 32 and rep.n_average == 9
    assert rep.dataset_label == "germany"
    assert rep.converged
    # never worse than any declared start
    f = make_objective(ModelKind.EXPONENTIAL, bin_average(data))
    assert all(rep.sse_average <= f(np.array(s)) for s in default_starts(ModelKind.EXPONENTIAL, avg))


def test_fitted_cells_never_worse_than_starts(datasets, fitted):
    reports, _ = fitted
    for (country, kind), rep in reports.items():
        avg = bin_average(datasets[country])
        f = make_objective(kind, avg)
        starts = default_starts(kind, avg)
        assert all(rep.sse_average <= f(np.array(s)) for s in starts), (country, kind)
        model = evaluator(kind, fitting.FIT_POLICY)
        assert abs(sse(model, rep.params, [p.point for p in avg]) - rep.sse_average) <= 1e-12


def test_france_ml_fit_meets_slack(fitted):
    reports, _ = fitted
    assert reports[("france", ML)].sse_average <= 1.2080


def test_rounded_averages_switch(datasets):
    full = fit_model(ModelKind.POWER, datasets["germany"])
    rounded = fit_model(ModelKind.POWER, datasets["germany"], use_rounded_averages=True)
    assert full.sse_average != rounded.sse_average
    assert rounded.sse_average == pytest.approx(full.sse_average, rel=1e-2)


def test_evaluate_published_is_optimisation_free(datasets, monkeypatch):
    calls = []
    real = fitting.evaluator

    def counting(kind, policy=fitting.FIT_POLICY):
        inner = real(kind, policy)

        def f(params, x):
            calls.append(np.size(x))
            return inner(params, x)

        return f

    def no_optimiser(*args, **kwargs):
        raise AssertionError("optimiser called")

    monkeypatch.setattr(fitting, "evaluator", counting)
    monkeypatch.setattr(fitting, "multi_start", no_optimiser)
    data = datasets["france"]
    params = fitting.PUBLISHED[("france", ML)][0]
    evaluate_published(ML, params, data)
    assert sum(calls) == len(bin_average(data)) + len(data) == 6 + 32


def test_published_france_ml_values(datasets):
    params = fitting.PUBLISHED[("france", ML)][0]
    avg, orig = evaluate_published(ML, params, datasets["france"])
    assert avg == pytest.approx(1.1843, rel=0.02)
    assert orig == pytest.approx(189.1845, rel=0.02)


def _shifted(datasets, delta):
    out = {}
    for label, ds in datasets.items():
        out[label] = DataSet(label, tuple(EconRecord(r.year, r.unemployment, r.inflation + delta) for r in ds.records))
    return out


def test_reproduce_flags_wrong_data(datasets):
    quick = SimplexConfig(max_iter=100, restarts=0)
    report = reproduce_tables(quick, datasets=_shifted(datasets, 3.0))
    assert len(report.cells) == 12
    assert not report.all_passed
    assert not any(c.passed for c in report.cells if c.source == "published")
    order = [(c.country, c.kind, c.source) for c in report.cells]
    assert order[:2] == [("france", ML, "fitted"), ("france", ML, "published")]
    assert order[-1] == ("germany", ModelKind.POWER, "published")
    with pytest.raises(KeyError):
        report.cell("spain", ML, "fitted")


def test_reproduce_records_cell_errors(datasets, monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("boom")

    monkeypatch.setattr(fitting, "fit_model", boom)
    monkeypatch.setattr(fitting, "evaluate_published", boom)
    report = reproduce_tables(datasets=datasets)
    assert all(c.error == "RuntimeError: boom" and not c.passed for c in report.cells)


# --- synthetic demos ---------------------------------------------------------------


def test_demo_grid_and_targets():
    x = fitting.demo_grid((0.0, 10.0), 30)
    assert x[0] > 0 and x[-1] == 10.0 and len(x) == 30
    assert np.allclose(np.diff(x), 10 / 30)
    assert fitting.demo_grid((0.1, 5.0), 8)[0] == 0.1
    f = fitting.demo_target("exp-erfc")
    assert f(np.array([4.0]))[0] == pytest.approx(math.exp(4.0) * math.erfc(2.0), rel=1e-14)
    g = fitting.demo_target("damped_cos", 0.5, 3.0)
    assert g(np.array([2.0]))[0] == pytest.approx(math.exp(-1.0) * math.cos(6.0), rel=1e-15)
    with pytest.raises(ValueError):
        fitting.demo_target("tangent")


def test_demo_needs_eight_points():
    with pytest.raises(ValueError):
        synthetic_demo("sine", n_points=7)


def test_demo_reports(demos):
    for target, (rep, x, y) in demos.items():
        assert rep.model_kind is ML
        assert rep.dataset_label == f"demo:{target}"
        assert rep.n_average == len(x) == 30
        pts = list(zip(x.tolist(), y.tolist()))
        recomputed = sse(evaluator(ML, fitting.DEMO_POLICY), rep.params, pts)
        assert abs(recomputed - rep.sse_average) <= 1e-12


def test_exp_erfc_fit_is_decreasing(demos):
    rep, x, _ = demos["exp_erfc"]
    xs, ys = fitting.curve_samples(ML, rep.params, 0.1, 5.0, 200, fitting.DEMO_POLICY)
    assert np.all(np.diff(ys) < 0)


def test_damped_cos_converges(demos):
    assert demos["damped_cos"][0].converged


def test_curve_samples_clip_left_end():
    x, y = fitting.curve_samples(ModelKind.EXPONENTIAL, ExpParams(0, 1, -1), -1.0, 2.0, 5)
    assert x[0] > 0 and len(y) == 5


def test_make_params_matches_models():
    p = models.make_params(ML, [1, 2, 3, 4])
    assert p == MLModelParams(1.0, 2.0, 3.0, 4.0)
