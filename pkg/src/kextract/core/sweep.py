"""Seeded random-search hyper-parameter sweep."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from kextract.errors import KextractError


@dataclass(frozen=True)
class SweepSpec:
    """Search space: per key either {"choice": [...]} or
    {"low": x, "high": y, "log": bool, "int": bool}."""

    space: dict[str, dict]
    budget: int
    objective: str = "f1"
    seed: int = 0

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.objective not in ("precision", "recall", "f1"):
            raise ValueError(f"objective {self.objective!r} not a metric key")
        for key, desc in self.space.items():
            if "choice" in desc:
                if not desc["choice"]:
                    raise ValueError(f"{key}: empty choice list")
            elif not {"low", "high"} <= set(desc):
                raise ValueError(f"{key}: need a choice list or a low/high range")


@dataclass(frozen=True)
class Trial:
    index: int
    config: dict
    objective: float


@dataclass
class SweepResult:
    best: Trial
    leaderboard: list[Trial] = field(default_factory=list)


def _sample(space: dict[str, dict], rng: random.Random) -> dict:
    config = {}
    for key in sorted(space):
        desc = space[key]
        if "choice" in desc:
            config[key] = rng.choice(list(desc["choice"]))
            continue
        low, high = float(desc["low"]), float(desc["high"])
        if desc.get("log"):
            value = math.exp(rng.uniform(math.log(low), math.log(high)))
        else:
            value = rng.uniform(low, high)
        config[key] = int(round(value)) if desc.get("int") else value
    return config


def sweep(
    spec: SweepSpec,
    evaluate,
    trials_path: str | Path | None = None,
) -> SweepResult:
    """Run ``budget`` random trials of ``evaluate(config, trial_seed)``.

    ``evaluate`` returns a MetricReport (or anything with ``.get(key)``).
    Per-trial seeds derive from (sweep seed, trial index) so trials may run
    in any order; the leaderboard sorts by objective, ties to the earlier
    trial. Every trial's full config is persisted when a path is given.
    """
    trials: list[Trial] = []
    failures: list[tuple[int, str]] = []
    for index in range(spec.budget):
        trial_seed = (spec.seed * 1_000_003 + index) % (2**31)
        rng = random.Random(trial_seed)
        config = _sample(spec.space, rng)
        try:
            report = evaluate(config, trial_seed)
            objective = float(report.get(spec.objective))
        except Exception as exc:  # a failed trial is recorded, not fatal
            failures.append((index, str(exc)))
            continue
        trials.append(Trial(index, config, objective))
    if not trials:
        detail = "; ".join(f"trial {i}: {msg}" for i, msg in failures)
        raise KextractError(f"objective never produced: {detail}")
    if trials_path is not None:
        path = Path(trials_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for t in trials:
                fh.write(
                    json.dumps(
                        {"trial": t.index, "config": t.config, "objective": t.objective}
                    )
                    + "\n"
                )
    leaderboard = sorted(trials, key=lambda t: (-t.objective, t.index))
    return SweepResult(best=leaderboard[0], leaderboard=leaderboard)
