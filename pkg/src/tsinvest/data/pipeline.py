"""Preprocessing: monthly alignment, imputation, log scaling, sentinel
filling, fixed-length padding, and short-series filtering.

Pinned order of operations: align -> impute -> log-scale observed values
-> sentinel fill -> pad/truncate. The sentinel (-1) never passes through
the log transform.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import EmptyRecordError, NumericInputError, ValidationError
from .records import CompanyPanel, RawCompanyRecord, month_index
from .schema import (CATEGORICAL_COLUMN, CATEGORICAL_FEATURE, FEATURE_NAMES,
                     LOG_FEATURES, MIN_OBSERVED_MONTHS, PANEL_LENGTH, SENTINEL)
from .vocab import MISSING_INDEX, CategoryVocabulary


def align_monthly(record: RawCompanyRecord) -> dict:
    """One slot per calendar month from first to last observation; months
    without data are missing (None) for every feature."""
    if not record.observations:
        raise EmptyRecordError(f"company {record.company_id}: no observations")
    indices = [month_index(m) for m, _ in record.observations]
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise ValidationError(
            f"company {record.company_id}: observation months not strictly increasing")
    first, last = indices[0], indices[-1]
    length = last - first + 1
    grid = {name: [None] * length for name in FEATURE_NAMES}
    for idx, (_, features) in zip(indices, record.observations):
        slot = idx - first
        for name, value in features.items():
            grid[name][slot] = value
    return grid


def impute_total_funding(series: list) -> list:
    """Missing slots take the previous month's (post-imputation) value,
    or 0 when there is none yet. Idempotent."""
    out = []
    prev = 0.0
    for v in series:
        if v is None:
            v = prev
        out.append(v)
        prev = v
    return out


def impute_valuation(valuation: list, total_funding: list) -> list:
    """Missing valuation is approximated by the (already imputed)
    cumulative funding of the same month."""
    return [tf if v is None else v for v, tf in zip(valuation, total_funding)]


def log_scale(x: float) -> float:
    """ln(1 + x); keeps 0 in-domain. Only for observed values."""
    if x < 0:
        raise NumericInputError(f"log_scale: negative input {x}")
    return math.log1p(x)


def filter_short_series(records: list[RawCompanyRecord]) -> list[RawCompanyRecord]:
    """Drop a record only when every feature series has fewer than
    MIN_OBSERVED_MONTHS observed months."""
    kept = []
    for record in records:
        counts = {name: 0 for name in FEATURE_NAMES}
        for _, features in record.observations:
            for name, value in features.items():
                if value is not None:
                    counts[name] += 1
        if any(c >= MIN_OBSERVED_MONTHS for c in counts.values()):
            kept.append(record)
    return kept


def fill_sentinel_and_pad(grid: dict, t_len: int = PANEL_LENGTH
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Build the fixed-length panel matrix and its step mask.

    `grid` maps feature name -> list of values-or-None, where the
    categorical column already holds integer ids (or None). Remaining
    missing numeric cells become the -1 sentinel, missing categorical cells
    the MISSING id. Longer series keep the most recent `t_len` months;
    shorter ones are left-padded so the final row stays the newest month.
    The mask marks steps carrying at least one observed feature; padded
    rows and all-missing months are 0.
    """
    length = len(next(iter(grid.values())))
    x = np.full((t_len, len(FEATURE_NAMES)), SENTINEL)
    x[:, CATEGORICAL_COLUMN] = MISSING_INDEX
    mask = np.zeros(t_len)
    src_lo = max(0, length - t_len)          # truncate to most recent months
    dst_lo = max(0, t_len - length)          # left-pad shorter series
    for col, name in enumerate(FEATURE_NAMES):
        series = grid[name]
        for i, v in enumerate(series[src_lo:]):
            if v is not None:
                x[dst_lo + i, col] = v
                mask[dst_lo + i] = 1.0
    return x, mask


def build_panel(record: RawCompanyRecord, vocab: CategoryVocabulary,
                task: str) -> CompanyPanel:
    """Full preprocessing of one record into a model-ready panel."""
    grid = align_monthly(record)
    observed = {name: [v is not None for v in grid[name]] for name in FEATURE_NAMES}
    grid["total_funding"] = impute_total_funding(grid["total_funding"])
    grid["valuation"] = impute_valuation(grid["valuation"], grid["total_funding"])
    # imputed cells count as observed from here on
    observed["total_funding"] = [True] * len(grid["total_funding"])
    observed["valuation"] = [True] * len(grid["valuation"])
    for name in FEATURE_NAMES:
        if name == CATEGORICAL_FEATURE:
            grid[name] = [vocab.encode(v) if obs else None
                          for v, obs in zip(grid[name], observed[name])]
        elif name in LOG_FEATURES:
            grid[name] = [log_scale(v) if obs else None
                          for v, obs in zip(grid[name], observed[name])]
        else:
            grid[name] = [v if obs else None
                          for v, obs in zip(grid[name], observed[name])]
    x, mask = fill_sentinel_and_pad(grid)
    label = record.label_vc if task == "vc" else record.label_gc
    return CompanyPanel(record.company_id, record.investor_group_id,
                        x, mask, int(label))


def build_panels(records: list[RawCompanyRecord], vocab: CategoryVocabulary,
                 task: str) -> list[CompanyPanel]:
    return [build_panel(r, vocab, task) for r in filter_short_series(records)]


def training_vocabulary(records: list[RawCompanyRecord]) -> CategoryVocabulary:
    """round_type vocabulary from (training-split) records."""
    values = (features.get(CATEGORICAL_FEATURE)
              for r in records for _, features in r.observations)
    return CategoryVocabulary.build(CATEGORICAL_FEATURE, values)
