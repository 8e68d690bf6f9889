"""Raw company records, panels, and their JSONL serialization."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ParseError, ValidationError
from .schema import CATEGORICAL_FEATURE, FEATURE_NAMES, PANEL_LENGTH

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


def month_index(month: str) -> int:
    """'YYYY-MM' -> absolute month number; validates the calendar month."""
    m = _MONTH_RE.match(month)
    if not m:
        raise ValidationError(f"month: bad format {month!r}, expected YYYY-MM")
    year, mon = int(m.group(1)), int(m.group(2))
    if not 1 <= mon <= 12:
        raise ValidationError(f"month: {month!r} is not a calendar month")
    return year * 12 + (mon - 1)


@dataclass
class RawCompanyRecord:
    company_id: str
    investor_group_id: str
    label_vc: int
    label_gc: int
    # list of (month "YYYY-MM", {feature name -> value or None})
    observations: list[tuple[str, dict]] = field(default_factory=list)

    def validate(self) -> None:
        if not self.company_id:
            raise ValidationError("company_id: missing or empty")
        if not self.investor_group_id:
            raise ValidationError("investor_group_id: missing or empty")
        for name, label in (("label_vc", self.label_vc), ("label_gc", self.label_gc)):
            if label not in (0, 1):
                raise ValidationError(f"{name}: must be 0 or 1, got {label!r}")
        prev = None
        for month, features in self.observations:
            idx = month_index(month)
            if prev is not None and idx <= prev:
                raise ValidationError(
                    f"observations: months not strictly increasing at {month}")
            prev = idx
            for fname, value in features.items():
                if fname not in FEATURE_NAMES:
                    raise ValidationError(f"features: unknown feature {fname!r}")
                if value is None:
                    continue
                if fname == CATEGORICAL_FEATURE:
                    if not isinstance(value, str):
                        raise ValidationError(
                            f"{fname}: expected string, got {value!r}")
                elif not isinstance(value, (int, float)) or isinstance(value, bool) \
                        or value < 0:
                    raise ValidationError(
                        f"{fname}: expected non-negative number, got {value!r}")

    def to_json(self) -> dict:
        return {
            "company_id": self.company_id,
            "investor_group_id": self.investor_group_id,
            "label_vc": self.label_vc,
            "label_gc": self.label_gc,
            "observations": [
                {"month": month, "features": features}
                for month, features in self.observations
            ],
        }

    @staticmethod
    def from_json(obj: dict) -> "RawCompanyRecord":
        try:
            record = RawCompanyRecord(
                company_id=obj["company_id"],
                investor_group_id=obj["investor_group_id"],
                label_vc=obj["label_vc"],
                label_gc=obj["label_gc"],
                observations=[(o["month"], dict(o.get("features", {})))
                              for o in obj.get("observations", [])],
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"record: missing field {exc}") from exc
        record.validate()
        return record


@dataclass
class CompanyPanel:
    company_id: str
    investor_group_id: str
    x: np.ndarray          # (24, 16) float64; round_type column holds category ids
    step_mask: np.ndarray  # (24,) float64, 1.0 = observed step
    y: int                 # label for the active task

    def to_json(self) -> dict:
        return {
            "company_id": self.company_id,
            "investor_group_id": self.investor_group_id,
            "x": [[float(v) for v in row] for row in self.x],
            "mask": [float(v) for v in self.step_mask],
            "y": int(self.y),
        }

    @staticmethod
    def from_json(obj: dict) -> "CompanyPanel":
        try:
            panel = CompanyPanel(
                company_id=obj["company_id"],
                investor_group_id=obj["investor_group_id"],
                x=np.asarray(obj["x"], dtype=np.float64),
                step_mask=np.asarray(obj["mask"], dtype=np.float64),
                y=int(obj["y"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"panel: bad or missing field ({exc})") from exc
        if panel.x.shape != (PANEL_LENGTH, len(FEATURE_NAMES)):
            raise ValidationError(f"panel x: expected shape "
                                  f"({PANEL_LENGTH}, {len(FEATURE_NAMES)}), got {panel.x.shape}")
        if panel.step_mask.shape != (PANEL_LENGTH,):
            raise ValidationError(f"panel mask: expected {PANEL_LENGTH} entries")
        return panel


def _load_jsonl(path, from_json):
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from exc
            try:
                items.append(from_json(obj))
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    return items


def _save_jsonl(path, items) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item.to_json(), sort_keys=True) + "\n")


def load_dataset(path) -> list[RawCompanyRecord]:
    """Read a JSONL dataset of raw company records."""
    return _load_jsonl(path, RawCompanyRecord.from_json)


def save_dataset(path, records: list[RawCompanyRecord]) -> None:
    _save_jsonl(path, records)


def load_panels(path) -> list[CompanyPanel]:
    return _load_jsonl(path, CompanyPanel.from_json)


def save_panels(path, panels: list[CompanyPanel]) -> None:
    _save_jsonl(path, panels)
