"""Accuracy, precision, AUC-ROC, ROC curves, and multi-seed aggregation."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DegenerateBatchError, UndefinedMetricError

DEFAULT_THRESHOLD = 0.5


def accuracy_precision(scores, labels, threshold: float = DEFAULT_THRESHOLD
                       ) -> tuple[float, float | None]:
    """Threshold at `threshold` (predict 1 iff score >= threshold).

    Precision is None (undefined) when there are no positive predictions.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.size == 0:
        raise DegenerateBatchError("accuracy_precision: empty input")
    preds = scores >= threshold
    accuracy = float(np.mean(preds == (labels == 1)))
    n_pred_pos = int(preds.sum())
    if n_pred_pos == 0:
        return accuracy, None
    precision = float(np.sum(preds & (labels == 1)) / n_pred_pos)
    return accuracy, precision


def _rank_average_ties(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auc_roc(scores, labels) -> float:
    """Probability a random positive outranks a random negative (ties 1/2),
    via the rank statistic; identical to the trapezoidal ROC area."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            f"auc_roc: needs both classes, got {n_pos} positives / {n_neg} negatives")
    ranks = _rank_average_ties(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def roc_curve(scores, labels) -> list[tuple[float, float, float]]:
    """(fpr, tpr, threshold) points: the (0,0) / (1,1) endpoints plus one
    point per distinct score threshold (predict 1 iff score >= threshold)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("roc_curve: needs both classes present")
    order = np.argsort(-scores, kind="mergesort")
    sorted_pos = pos[order].astype(np.float64)
    sorted_scores = scores[order]
    tp = np.cumsum(sorted_pos)
    fp = np.cumsum(1.0 - sorted_pos)
    distinct = np.nonzero(np.diff(sorted_scores, append=-np.inf))[0]
    points = [(0.0, 0.0, float("inf"))]
    for i in distinct:
        points.append((float(fp[i] / n_neg), float(tp[i] / n_pos),
                       float(sorted_scores[i])))
    points.append((1.0, 1.0, float("-inf")))
    return points


def roc_auc_trapezoid(points) -> float:
    """Trapezoidal area under an roc_curve() result."""
    fpr = np.array([p[0] for p in points])
    tpr = np.array([p[1] for p in points])
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1])) / 2.0)


def export_roc_csv(points, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fpr", "tpr", "threshold"])
        for fpr, tpr, thr in points:
            writer.writerow([repr(fpr), repr(tpr), repr(thr)])


@dataclass
class MetricsReport:
    accuracy: float
    precision: float | None
    auc_roc: float
    accuracy_std: float = 0.0
    precision_std: float = 0.0
    auc_roc_std: float = 0.0
    n_test: int = 0
    n_positive: int = 0
    threshold: float = DEFAULT_THRESHOLD
    per_seed: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return dict(self.__dict__)

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1, sort_keys=True)


def _sample_std(values: list[float]) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def evaluate_runs(run: Callable[[int], tuple[np.ndarray, np.ndarray]],
                  n_seeds: int, threshold: float = DEFAULT_THRESHOLD
                  ) -> MetricsReport:
    """Run `run(seed) -> (scores, labels)` across seeds; aggregate metrics
    as mean with sample standard deviation."""
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    rows = []
    for seed in range(n_seeds):
        scores, labels = run(seed)
        acc, prec = accuracy_precision(scores, labels, threshold)
        auc = auc_roc(scores, labels)
        rows.append({"seed": seed, "accuracy": acc, "precision": prec,
                     "auc_roc": auc, "n_test": int(len(labels)),
                     "n_positive": int(np.sum(np.asarray(labels) == 1))})
    defined_prec = [r["precision"] for r in rows if r["precision"] is not None]
    return MetricsReport(
        accuracy=float(np.mean([r["accuracy"] for r in rows])),
        precision=float(np.mean(defined_prec)) if defined_prec else None,
        auc_roc=float(np.mean([r["auc_roc"] for r in rows])),
        accuracy_std=_sample_std([r["accuracy"] for r in rows]),
        precision_std=_sample_std(defined_prec),
        auc_roc_std=_sample_std([r["auc_roc"] for r in rows]),
        n_test=rows[-1]["n_test"],
        n_positive=rows[-1]["n_positive"],
        threshold=threshold,
        per_seed=rows,
    )
