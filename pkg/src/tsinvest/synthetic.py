"""Class-conditional generator of plausible company records.

Stands in for the proprietary datasets: each company gets a latent quality
q ~ N(0,1) that drives upward drift in funding, headcount, web traffic and
investor-track-record features. Task labels are Bernoulli with

    P(y = 1) = sigmoid(signal_strength * LABEL_SCALE * (q - threshold)),

so signal_strength=0 makes labels fair coins independent of all features,
while signal_strength=1 gives a Bayes AUC of ~0.97 on q (LABEL_SCALE was
calibrated with calibrate_label_scale below). The threshold is solved per
task so the expected positive rate matches the configured class balance
(unattainable at signal_strength=0, where the rate is 0.5 by construction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data.records import RawCompanyRecord
from .errors import NumericInputError, ValidationError
from .numerics.rng import Rng

LABEL_SCALE = 5.5365  # sigmoid slope on q giving Bayes AUC ~0.97 at signal 1

ROUND_STAGES = (
    "Pre-Seed", "Seed", "Series A", "Series B", "Series C", "Series D",
    "Series E", "Series F", "Growth Round", "Private Equity Round",
    "Secondary", "IPO",
)


def compute_cagr(start_value: float, exit_value: float, years: float) -> float:
    """Compound annual growth rate: (EV/SV)^(1/Y) - 1."""
    if start_value <= 0 or exit_value <= 0 or years <= 0:
        raise NumericInputError(
            f"compute_cagr: arguments must be positive, got "
            f"({start_value}, {exit_value}, {years})")
    return (exit_value / start_value) ** (1.0 / years) - 1.0


@dataclass
class SynthConfig:
    n_companies: int = 1000
    seed: int = 0
    class_balance: dict = field(default_factory=lambda: {"vc": 0.5, "gc": 0.5})
    signal_strength: float = 1.0
    missing_rate: float = 0.1
    min_months: int = 6
    max_months: int = 36
    n_round_stages: int = 12

    def validate(self) -> None:
        if self.n_companies < 1:
            raise ValidationError("n_companies must be >= 1")
        if not 0.0 <= self.signal_strength <= 1.0:
            raise ValidationError("signal_strength must be in [0, 1]")
        if not 0.0 <= self.missing_rate < 1.0:
            raise ValidationError("missing_rate must be in [0, 1)")
        for task, b in self.class_balance.items():
            if not 0.0 < b < 1.0:
                raise ValidationError(f"class_balance[{task}] must be in (0, 1)")
        if not 1 <= self.min_months <= self.max_months <= 36:
            raise ValidationError("month range must satisfy 1 <= min <= max <= 36")
        if not 2 <= self.n_round_stages <= len(ROUND_STAGES):
            raise ValidationError(
                f"n_round_stages must be in [2, {len(ROUND_STAGES)}]")


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def bayes_auc(scale: float) -> float:
    """AUC of the latent quality itself when labels are Bernoulli(sigmoid
    (scale*q)); the calibration oracle behind LABEL_SCALE."""
    q = np.linspace(-8, 8, 20001)
    w = np.exp(-q * q / 2) / math.sqrt(2 * math.pi) * (q[1] - q[0])
    p = _sigmoid(scale * q)
    p1 = (w * p).sum()
    cum = np.cumsum(w * p)
    num = (w * (1 - p) * (cum[-1] - cum)).sum()
    return num / (p1 * (1 - p1))


def calibrate_label_scale(target_auc: float = 0.97) -> float:
    """Bisection on bayes_auc; reproduces LABEL_SCALE for target 0.97."""
    lo, hi = 0.1, 50.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if bayes_auc(mid) < target_auc:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _solve_threshold(slope: float, balance: float) -> float:
    """Threshold with E_q[sigmoid(slope*(q-th))] = balance (q ~ N(0,1))."""
    if slope == 0.0:
        return 0.0  # rate is 0.5 regardless; balance not controllable
    q = np.linspace(-8, 8, 4001)
    w = np.exp(-q * q / 2) / math.sqrt(2 * math.pi) * (q[1] - q[0])
    lo, hi = -8.0, 8.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if (w * _sigmoid(slope * (q - mid))).sum() > balance:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _investor_track_record(q: float, rng: Rng) -> tuple[float, float]:
    """average_cagr and 2x_cagr_rate from synthetic exited deals of the
    company's investor pool, derived through compute_cagr."""
    n_deals = int(rng.integers(5, 21))
    cagrs = []
    multiples = []
    for _ in range(n_deals):
        years = float(rng.uniform(1.0, 8.0))
        growth = max(0.0, 0.25 + 0.35 * q + rng.normal(scale=0.45))
        exit_value = (1.0 + growth) ** years  # SV = 1
        multiples.append(exit_value)
        cagrs.append(compute_cagr(1.0, exit_value, years))
    avg = float(np.mean(cagrs))
    rate_2x = float(np.mean([mult >= 2.0 for mult in multiples]))
    return avg, rate_2x


def _generate_company(index: int, config: SynthConfig, thresholds: dict,
                      rng: Rng) -> RawCompanyRecord:
    q = float(rng.normal())
    n_months = int(rng.integers(config.min_months, config.max_months + 1))
    start_year = int(rng.integers(2012, 2022))
    start_mon = int(rng.integers(1, 13))

    growth = 0.06 + 0.10 * q                      # monthly log-growth of funding
    funding0 = math.exp(rng.normal(11.0, 1.0))
    employees0 = math.exp(rng.normal(1.5, 0.7))
    visitors0 = math.exp(rng.normal(6.0, 1.0))
    n_founder = int(np.clip(rng.integers(1, 6), 0, 38))
    avg_cagr, rate_2x = _investor_track_record(q, rng)
    gi_rate = float(np.clip(_sigmoid(0.8 * q + rng.normal(scale=0.5)), 0.0, 1.0))
    n_stages = config.n_round_stages
    # funding stage advances faster for high-quality companies
    stage_speed = max(0.05, 0.18 + 0.08 * q)

    months = []
    n_investor = 1
    n_news = 1
    for m in range(n_months):
        year = start_year + (start_mon - 1 + m) // 12
        mon = (start_mon - 1 + m) % 12 + 1
        funding = min(funding0 * math.exp(max(growth, 0.0) * m), 2e11)
        valuation = min(funding * float(rng.uniform(2.0, 8.0)), 1e12)
        employees = float(np.clip(
            employees0 * math.exp(max(0.0, 0.04 + 0.06 * q) * m), 1, 113_757))
        visitors = visitors0 * math.exp(max(0.0, 0.05 + 0.08 * q) * m
                                        + rng.normal(scale=0.2))
        if rng.uniform() < 0.25:
            n_investor = min(n_investor + 1 + (q > 0), 240)
        if rng.uniform() < _sigmoid(0.5 * q):
            n_news = min(n_news + 1, 389)
        stage = min(n_stages - 1, int(stage_speed * m))
        features = {
            "round_type": ROUND_STAGES[stage],
            "total_funding": max(1.0, funding),
            "valuation": max(1.0, valuation),
            "n_founder": float(n_founder),
            "n_employee": float(round(employees)),
            "n_investor": float(n_investor),
            "growth_investor_rate": gi_rate,
            "average_cagr": avg_cagr,
            "2x_cagr_rate": rate_2x,
            "cu_popularity": float(np.clip(
                50.0 + 12.0 * q + rng.normal(scale=15.0), 1.0, 100.0)),
            "sw_global_rank": max(1.0, visitors * 1.7),
            "n_desktop_visitor": max(0.0, round(visitors * 0.6)),
            "n_mobile_visitor": max(0.0, round(visitors * 0.4)),
            "n_news": float(n_news),
            "n_regional_seed_round": float(rng.integers(0, 40)),
            "n_regional_series_ab": float(rng.integers(0, 15)),
        }
        if config.missing_rate > 0:
            drop = rng.uniform(size=len(features)) < config.missing_rate
            features = {k: v for (k, v), d in zip(features.items(), drop) if not d}
        months.append((f"{year:04d}-{mon:02d}", features))

    labels = {}
    for task in ("vc", "gc"):
        p = _sigmoid(config.signal_strength * LABEL_SCALE * (q - thresholds[task]))
        labels[task] = int(rng.uniform() < p)
    return RawCompanyRecord(
        company_id=f"synth-{index:06d}",
        investor_group_id=f"group-{index % max(1, config.n_companies // 4):05d}",
        label_vc=labels["vc"],
        label_gc=labels["gc"],
        observations=months,
    )


def generate(config: SynthConfig) -> list[RawCompanyRecord]:
    """Deterministic synthetic dataset; same config + seed gives identical
    records. Investor groups bundle ~4 companies each."""
    config.validate()
    slope = config.signal_strength * LABEL_SCALE
    thresholds = {task: _solve_threshold(slope, b)
                  for task, b in config.class_balance.items()}
    root = Rng(config.seed)
    records = []
    for i in range(config.n_companies):
        records.append(_generate_company(i, config, thresholds, root.spawn(i)))
    return records
