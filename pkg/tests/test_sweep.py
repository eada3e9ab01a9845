import json

import pytest

from kextract.core import SweepSpec, sweep
from kextract.core.metrics import MetricReport
from kextract.errors import KextractError


def report(value: float) -> MetricReport:
    return MetricReport(precision=value, recall=value, f1=value, support=1)


def quadratic(config, _seed):
    # closed-form objective with a known argmax at lr = 0.3
    lr = config["lr"]
    return report(1.0 - (lr - 0.3) ** 2)


def test_budget_one_wins_trivially():
    spec = SweepSpec({"lr": {"choice": [0.5]}}, budget=1, seed=0)
    result = sweep(spec, quadratic)
    assert result.best.config == {"lr": 0.5}
    assert len(result.leaderboard) == 1


def test_same_seed_identical_trials():
    spec = SweepSpec({"lr": {"low": 0.01, "high": 1.0}}, budget=10, seed=4)
    a = sweep(spec, quadratic)
    b = sweep(spec, quadratic)
    assert [t.config for t in a.leaderboard] == [t.config for t in b.leaderboard]
    assert [t.objective for t in a.leaderboard] == [t.objective for t in b.leaderboard]


def test_recovers_argmax_over_sampled_points():
    choices = [0.05, 0.1, 0.2, 0.3, 0.45, 0.6, 0.8, 1.0]
    spec = SweepSpec({"lr": {"choice": choices}}, budget=20, seed=1)
    result = sweep(spec, quadratic)
    sampled = {t.config["lr"] for t in result.leaderboard}
    best_sampled = max(sampled, key=lambda lr: 1.0 - (lr - 0.3) ** 2)
    assert result.best.config["lr"] == best_sampled
    assert result.best.config["lr"] == 0.3  # global argmax is in the sampled set


def test_ties_break_by_trial_index():
    spec = SweepSpec({"x": {"choice": [1, 2]}}, budget=6, seed=0)
    result = sweep(spec, lambda cfg, _s: report(0.5))
    assert result.best.index == 0
    indices = [t.index for t in result.leaderboard]
    assert indices == sorted(indices)


def test_objective_never_produced():
    spec = SweepSpec({"x": {"choice": [1]}}, budget=3, seed=0)

    def broken(cfg, _s):
        raise RuntimeError("exploded")

    with pytest.raises(KextractError, match="trial 0"):
        sweep(spec, broken)


def test_log_range_and_int_sampling():
    spec = SweepSpec(
        {"lr": {"low": 1e-4, "high": 1.0, "log": True}, "dim": {"low": 4, "high": 64, "int": True}},
        budget=25,
        seed=2,
    )
    result = sweep(spec, lambda cfg, _s: report(cfg["lr"]))
    for t in result.leaderboard:
        assert 1e-4 <= t.config["lr"] <= 1.0
        assert isinstance(t.config["dim"], int)


def test_trials_persisted(tmp_path):
    path = tmp_path / "trials.jsonl"
    spec = SweepSpec({"x": {"choice": [1, 2, 3]}}, budget=5, seed=0)
    sweep(spec, lambda cfg, _s: report(cfg["x"] / 3), trials_path=path)
    lines = [json.loads(l) for l in path.read_text().splitlines()]
    assert len(lines) == 5
    assert all({"trial", "config", "objective"} <= set(l) for l in lines)


def test_budget_validation():
    with pytest.raises(ValueError):
        SweepSpec({"x": {"choice": [1]}}, budget=0)
    with pytest.raises(ValueError):
        SweepSpec({"x": {"choice": [1]}}, budget=1, objective="accuracy")
