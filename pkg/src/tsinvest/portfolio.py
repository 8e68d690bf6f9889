"""Monte-Carlo portfolio simulation: how many of a random draw of truly
good companies does each model endorse, as a function of portfolio size.

The candidate pool is exactly the positively labeled test companies. The
same company draws are reused across models within a repeat (paired
sampling) so model curves can be compared with less noise; raw repeat
values are kept for unpaired analysis.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InfeasibleSizeError, ValidationError
from .evaluation import DEFAULT_THRESHOLD
from .numerics.rng import Rng


@dataclass
class SimConfig:
    portfolio_sizes: list[int] = field(default_factory=lambda: [10, 25, 50, 100])
    n_repeats: int = 100
    seed: int = 0
    threshold: float = DEFAULT_THRESHOLD
    # optional overlay constants for plots, e.g. published fund success
    # rates; emitted verbatim, never computed
    reference_benchmarks: list[dict] = field(default_factory=list)

    def validate(self) -> None:
        if any(s < 1 for s in self.portfolio_sizes):
            raise ValidationError("portfolio sizes must be >= 1")
        if self.n_repeats < 1:
            raise ValidationError("n_repeats must be >= 1")


@dataclass
class SimResult:
    # (model, size) -> raw per-repeat success rates
    raw: dict = field(default_factory=dict)
    reference_benchmarks: list[dict] = field(default_factory=list)

    def mean(self, model: str, size: int) -> float:
        return float(np.mean(self.raw[(model, size)]))

    def std(self, model: str, size: int) -> float:
        values = self.raw[(model, size)]
        return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0

    def models(self) -> list[str]:
        return list(dict.fromkeys(m for m, _ in self.raw))

    def sizes(self) -> list[int]:
        return sorted({s for _, s in self.raw})


def simulate(scores_by_model: dict[str, np.ndarray], labels: np.ndarray,
             config: SimConfig) -> SimResult:
    """scores_by_model maps model name -> class-1 scores over the full test
    set; labels are the test ground truth. Success rate per repeat is the
    fraction of drawn (positively labeled) companies scored >= threshold."""
    config.validate()
    labels = np.asarray(labels)
    pool = np.nonzero(labels == 1)[0]
    if pool.size == 0:
        raise InfeasibleSizeError("simulate: no positively labeled companies")
    for size in config.portfolio_sizes:
        if size > pool.size:
            raise InfeasibleSizeError(
                f"portfolio size {size} exceeds pool of {pool.size} positives")
    endorsed = {name: np.asarray(scores)[pool] >= config.threshold
                for name, scores in scores_by_model.items()}

    result = SimResult(reference_benchmarks=list(config.reference_benchmarks))
    rng = Rng(config.seed)
    for size in config.portfolio_sizes:
        draws = [rng.choice(pool.size, size=size, replace=False)
                 for _ in range(config.n_repeats)]
        for name in scores_by_model:
            rates = [float(np.mean(endorsed[name][draw])) for draw in draws]
            result.raw[(name, size)] = rates
    return result


def export_sim_csv(result: SimResult, path) -> None:
    """CSV rows model,portfolio_size,mean,std in deterministic order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "portfolio_size", "mean", "std"])
        for model in result.models():
            for size in result.sizes():
                writer.writerow([model, size, repr(result.mean(model, size)),
                                 repr(result.std(model, size))])


def export_sim_json(result: SimResult, path) -> None:
    """Raw repeat values plus any reference overlay constants."""
    payload = {
        "results": [
            {"model": model, "portfolio_size": size,
             "mean": result.mean(model, size), "std": result.std(model, size),
             "rates": result.raw[(model, size)]}
            for model in result.models() for size in result.sizes()
        ],
        "reference_benchmarks": result.reference_benchmarks,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
