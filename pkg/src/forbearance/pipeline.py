"""Generate -> fit -> compare, repeated over seeds."""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .econometrics import PatternReport, RegressionResult, check_pattern, fit_fixed_effects, \
    fit_observations_glm
from .paneldata import REGRESSORS, ObservationTable, generate_table
from .presets import Preset
from .rng import check_seed


def fit_table(table: ObservationTable, estimator: str, columns=REGRESSORS) -> RegressionResult:
    if estimator == "fe":
        return fit_fixed_effects(table, columns)
    return fit_observations_glm(table, columns)


@dataclass(frozen=True)
class SeedOutcome:
    seed: int
    report: PatternReport


@dataclass(frozen=True)
class ReplicationSummary:
    preset: str
    outcomes: tuple[SeedOutcome, ...]
    threshold: float

    @property
    def pass_fraction(self) -> float:
        return sum(o.report.passed for o in self.outcomes) / len(self.outcomes)

    @property
    def passed(self) -> bool:
        return self.pass_fraction >= self.threshold

    def failure_counts(self) -> dict[str, int]:
        counts = Counter(name for o in self.outcomes for name in o.report.failures())
        return dict(sorted(counts.items()))


def run_seed(preset: Preset, seed: int) -> SeedOutcome:
    table = generate_table(preset.spec.with_seed(seed))
    result = fit_table(table, preset.estimator)
    return SeedOutcome(seed, check_pattern(result, preset.pattern))


def replicate(preset: Preset, n_seeds: int, start_seed: int | None = None,
              workers: int = 1) -> ReplicationSummary:
    """Pattern check on seeds ``start, start+1, ..., start+n_seeds-1``.

    Outcomes are kept in seed order whatever the completion order.
    """
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    start = preset.base_seed if start_seed is None else start_seed
    seeds = [check_seed(start + i) for i in range(n_seeds)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda s: run_seed(preset, s), seeds))
    else:
        outcomes = [run_seed(preset, s) for s in seeds]
    return ReplicationSummary(preset.name, tuple(outcomes), preset.pass_threshold)
