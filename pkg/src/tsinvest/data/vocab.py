"""Category vocabulary for round_type, built from the training split only."""

from __future__ import annotations

from dataclasses import dataclass, field

UNKNOWN_INDEX = 0
MISSING_INDEX = 1
N_RESERVED = 2


@dataclass
class CategoryVocabulary:
    feature: str
    categories: list[str] = field(default_factory=list)
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {c: i + N_RESERVED for i, c in enumerate(self.categories)}

    @staticmethod
    def build(feature: str, values) -> "CategoryVocabulary":
        """Vocabulary from observed training values, first-seen order."""
        seen: dict = {}
        for v in values:
            if v is not None and v not in seen:
                seen[v] = True
        return CategoryVocabulary(feature, list(seen))

    @property
    def size(self) -> int:
        return len(self.categories) + N_RESERVED

    def encode(self, value) -> int:
        if value is None:
            return MISSING_INDEX
        return self._index.get(value, UNKNOWN_INDEX)

    def to_json(self) -> dict:
        return {"feature": self.feature, "categories": list(self.categories)}

    @staticmethod
    def from_json(obj: dict) -> "CategoryVocabulary":
        return CategoryVocabulary(obj["feature"], list(obj["categories"]))
