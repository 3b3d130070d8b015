import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qneuron.anneal import (
    AnnealConfig,
    TrainingSet,
    accept_probability,
    error_functional,
    max_deviation,
    restart_seeds,
    train,
    train_restarts,
)


class Line:
    """Toy model ``p0 + p1 * x`` for checking the trainer in isolation."""

    arity = 1

    def __init__(self, p):
        self.p = np.asarray(p, dtype=float)

    def parameters(self):
        return self.p.copy()

    def with_parameters(self, v):
        return Line(v)

    def outputs(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.p[0] + self.p[1] * x[:, 0]


LINE_DATA = TrainingSet([[0.0], [1.0], [2.0]], [0.2, 0.5, 0.8])


def test_training_set_validation():
    with pytest.raises(ValueError):
        TrainingSet([[1.0], [2.0]], [0.0])
    with pytest.raises(ValueError):
        TrainingSet([[1.0]], [float("nan")])
    ts = TrainingSet.from_pairs([((1, 2), 0.5), ((3, 4), 1.0)])
    assert ts.arity == 2 and len(ts) == 2


def test_csv_round_trip(tmp_path):
    ts = TrainingSet([[1.0, 5 / 3], [5 / 3, 1.0]], [1.0, 0.0])
    path = tmp_path / "d.csv"
    ts.write_csv(path)
    assert path.read_text().splitlines()[0] == "x1,x2,target"
    again = TrainingSet.read_csv(path)
    np.testing.assert_allclose(again.inputs, ts.inputs, rtol=1e-11)
    np.testing.assert_array_equal(again.targets, ts.targets)


def test_csv_requires_header(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("1,1,0\n")
    with pytest.raises(ValueError):
        TrainingSet.read_csv(path)
    path.write_text("x1,x2,t\n1,2,0\n1,2\n")
    with pytest.raises(ValueError):
        TrainingSet.read_csv(path)


def test_error_functional_examples():
    assert error_functional(Line([0.2, 0.3]), LINE_DATA) == pytest.approx(0.0, abs=1e-30)
    single = TrainingSet([[3.0]], [0.0])
    assert error_functional(Line([0.5, 0.0]), single) == 0.25


def test_error_functional_matches_loop():
    rng = np.random.default_rng(0)
    data = TrainingSet(rng.uniform(size=(7, 1)), rng.uniform(size=7))
    m = Line(rng.normal(size=2))
    expected = sum((m.p[0] + m.p[1] * x[0] - t) ** 2 for x, t in zip(data.inputs, data.targets))
    assert error_functional(m, data) == pytest.approx(expected, rel=1e-13)


def test_arity_mismatch():
    with pytest.raises(ValueError):
        error_functional(Line([0, 0]), TrainingSet([[1.0, 2.0]], [0.0]))


def test_accept_probability_examples():
    assert accept_probability(-0.1, 1.0) == 1.0
    assert accept_probability(0.0, 1.0) == 1.0
    assert accept_probability(1.0, 1.0) == pytest.approx(0.367879, abs=1e-6)
    with pytest.raises(ValueError):
        accept_probability(1.0, 0.0)


@given(st.floats(0, 100), st.floats(0, 100), st.floats(1e-3, 1e3))
def test_accept_probability_monotone_in_delta(a, b, t):
    lo, hi = sorted((a, b))
    assert accept_probability(hi, t) <= accept_probability(lo, t)


@given(st.floats(1e-6, 100), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_accept_probability_monotone_in_temperature(d, a, b):
    lo, hi = sorted((a, b))
    assert accept_probability(d, lo) <= accept_probability(d, hi)


def test_config_validation_and_dict():
    with pytest.raises(ValueError):
        AnnealConfig(beta=0.0)
    with pytest.raises(ValueError):
        AnnealConfig(steps_per_epoch=0)
    with pytest.raises(ValueError):
        AnnealConfig(initial_temperature=-1.0)
    with pytest.raises(ValueError):
        AnnealConfig.from_dict({"bogus": 1})
    cfg = AnnealConfig(beta=0.5, rng_seed=9)
    assert AnnealConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


def test_zero_error_start_returns_immediately():
    model, report = train(Line([0.2, 0.3]), LINE_DATA)
    assert report.epochs == 0 and report.steps == 0
    assert report.converged and report.error_trace
    np.testing.assert_array_equal(model.p, [0.2, 0.3])


def test_training_reduces_error_and_best_trace_monotone():
    start = Line([1.0, -1.0])
    e0 = error_functional(start, LINE_DATA)
    cfg = AnnealConfig(steps_per_epoch=100, max_epochs=30, step_scale=0.01, beta=0.01)
    model, report = train(start, LINE_DATA, cfg)
    assert report.final_error <= e0
    assert report.final_error == pytest.approx(error_functional(model, LINE_DATA))
    assert all(b <= a for a, b in zip(report.best_trace, report.best_trace[1:]))
    assert report.final_error < 0.01
    assert report.max_deviation == pytest.approx(max_deviation(model, LINE_DATA))


def test_determinism():
    cfg = AnnealConfig(steps_per_epoch=50, max_epochs=10, rng_seed=42)
    a = train(Line([1.0, -1.0]), LINE_DATA, cfg)
    b = train(Line([1.0, -1.0]), LINE_DATA, cfg)
    assert a[1] == b[1]
    np.testing.assert_array_equal(a[0].p, b[0].p)
    c = train(Line([1.0, -1.0]), LINE_DATA, AnnealConfig(steps_per_epoch=50, max_epochs=10,
                                                         rng_seed=43))
    assert c[1].error_trace != a[1].error_trace


@given(st.integers(0, 2**31))
def test_cold_chain_never_goes_uphill(seed):
    cfg = AnnealConfig(initial_temperature=1e-250, beta=1e-250, steps_per_epoch=20,
                       max_epochs=5, rng_seed=seed)
    _, report = train(Line([0.7, 0.1]), LINE_DATA, cfg)
    trace = report.error_trace
    assert all(b <= a for a, b in zip(trace, trace[1:]))


def test_temperature_underflow():
    cfg = AnnealConfig(beta=1e-300, steps_per_epoch=10, max_epochs=50)
    _, report = train(Line([1.0, 1.0]), LINE_DATA, cfg)
    assert report.stop_reason == "temperature underflow"
    assert not report.converged


def test_stability_stop():
    # huge parameters make every +/- step a tiny relative change
    data = TrainingSet([[0.0]], [0.0])
    cfg = AnnealConfig(steps_per_epoch=5, max_epochs=100, step_scale=1e-3)
    _, report = train(Line([1e6, 1e6]), data, cfg)
    assert report.stop_reason == "parameters stable"
    assert report.epochs == cfg.stability_window


def test_max_epochs():
    cfg = AnnealConfig(steps_per_epoch=5, max_epochs=3, stability_tolerance=1e-30)
    _, report = train(Line([1.0, 1.0]), LINE_DATA, cfg)
    assert report.epochs == 3 and report.steps == 15
    assert report.stop_reason == "max epochs reached"
    assert len(report.error_trace) == 4


def test_full_vector_moves_every_coordinate():
    cfg = AnnealConfig(steps_per_epoch=1, max_epochs=1, full_vector=True,
                       initial_temperature=1e6)
    start = Line([0.0, 0.0])
    model, report = train(start, TrainingSet([[1.0]], [10.0]), cfg)
    assert report.accepted == 1
    np.testing.assert_allclose(np.abs(model.p), 0.05)


def test_penalty_counts_toward_error():
    penalty = lambda m: 100.0 * m.p[1] ** 2
    cfg = AnnealConfig(steps_per_epoch=200, max_epochs=20, step_scale=0.01)
    model, _ = train(Line([0.0, 0.5]), LINE_DATA, cfg, penalty)
    assert abs(model.p[1]) < 0.1


def test_restart_seeds():
    a = restart_seeds(0, 3, count=5)
    assert a == restart_seeds(0, 3, count=5)
    assert len(set(a)) == 5
    assert a != restart_seeds(0, 4, count=5)
    assert a != restart_seeds(1, 3, count=5)


def test_train_restarts_stops_on_success():
    calls = []

    def factory(rng):
        calls.append(1)
        return Line(rng.uniform(-1, 1, 2))

    cfg = AnnealConfig(steps_per_epoch=100, max_epochs=20, step_scale=0.01)
    result = train_restarts(factory, LINE_DATA, cfg, restarts=5, tolerance=0.1, master_seed=1)
    assert result.success and result.restarts == len(calls) == len(result.seeds)
    assert result.report.max_deviation < 0.1


def test_train_restarts_reports_best_failure():
    cfg = AnnealConfig(steps_per_epoch=2, max_epochs=1)
    result = train_restarts(lambda rng: Line(rng.uniform(5, 6, 2)), LINE_DATA, cfg,
                            restarts=3, tolerance=1e-9)
    assert not result.success and result.restarts == 3
