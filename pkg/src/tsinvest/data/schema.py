"""The 16 monthly company features and their preprocessing flags."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

SENTINEL = -1.0
PANEL_LENGTH = 24
MIN_OBSERVED_MONTHS = 6


@dataclass(frozen=True)
class FeatureDescriptor:
    name: str
    kind: str                 # "numeric" | "categorical"
    category: str             # funding | founder | team | investor | web | context
    value_range: tuple[float, float] | None
    log_transform: bool


# Order is the column order of every company panel. round_type is the single
# categorical feature; log scaling applies to all numerics except
# cu_popularity and n_employee.
FEATURES: tuple[FeatureDescriptor, ...] = (
    FeatureDescriptor("round_type", "categorical", "funding", None, False),
    FeatureDescriptor("total_funding", "numeric", "funding", (1, 2e11), True),
    FeatureDescriptor("valuation", "numeric", "funding", (1, 1e12), True),
    FeatureDescriptor("n_founder", "numeric", "founder", (0, 38), True),
    FeatureDescriptor("n_employee", "numeric", "team", (1, 113_757), False),
    FeatureDescriptor("n_investor", "numeric", "investor", (1, 240), True),
    FeatureDescriptor("growth_investor_rate", "numeric", "investor", (0, 1), True),
    FeatureDescriptor("average_cagr", "numeric", "investor", (0, None), True),
    FeatureDescriptor("2x_cagr_rate", "numeric", "investor", (0, 1), True),
    FeatureDescriptor("cu_popularity", "numeric", "web", (1, None), False),
    FeatureDescriptor("sw_global_rank", "numeric", "web", (1, None), True),
    FeatureDescriptor("n_desktop_visitor", "numeric", "web", (0, None), True),
    FeatureDescriptor("n_mobile_visitor", "numeric", "web", (0, None), True),
    FeatureDescriptor("n_news", "numeric", "web", (1, 389), True),
    FeatureDescriptor("n_regional_seed_round", "numeric", "context", (0, None), True),
    FeatureDescriptor("n_regional_series_ab", "numeric", "context", (0, None), True),
)

FEATURE_NAMES = tuple(f.name for f in FEATURES)
NUMERIC_FEATURES = tuple(f.name for f in FEATURES if f.kind == "numeric")
CATEGORICAL_FEATURE = "round_type"
CATEGORICAL_COLUMN = FEATURE_NAMES.index(CATEGORICAL_FEATURE)
LOG_FEATURES = tuple(f.name for f in FEATURES if f.log_transform)

assert len(FEATURES) == 16
assert len(LOG_FEATURES) == 13


def schema_hash() -> str:
    """Stable digest of the feature schema, stored in checkpoints so a
    model is never evaluated against differently-built panels."""
    payload = json.dumps(
        [[f.name, f.kind, f.category, f.log_transform] for f in FEATURES])
    return hashlib.sha256(payload.encode()).hexdigest()[:16]
