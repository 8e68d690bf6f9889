"""Investor-centric dataset split: companies sharing an investor group
never straddle split parts, preventing leakage between train and test."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import SplitInfeasibleError, ValidationError
from ..numerics.rng import Rng


@dataclass
class DatasetSplit:
    train: list
    validation: list
    test: list
    split_seed: int

    parts = ("train", "validation", "test")

    def part(self, name: str) -> list:
        return getattr(self, name)


def investor_centric_split(items: list, fractions: tuple[float, float, float],
                           seed: int) -> DatasetSplit:
    """Partition `items` (anything with .investor_group_id) whole-group.

    Groups are shuffled with the seed, then each group goes to the part
    with the largest remaining sample deficit, so realized fractions track
    the targets as closely as whole groups allow.
    """
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValidationError(f"split fractions must sum to 1, got {fractions}")
    if any(f < 0 for f in fractions):
        raise ValidationError(f"split fractions must be non-negative, got {fractions}")
    groups: dict[str, list] = {}
    for item in items:
        groups.setdefault(item.investor_group_id, []).append(item)
    keys = sorted(groups)
    nonzero = [i for i, f in enumerate(fractions) if f > 0]
    if len(keys) < len(nonzero):
        raise SplitInfeasibleError(
            f"{len(keys)} investor groups cannot fill {len(nonzero)} split parts")

    order = Rng(seed).permutation(len(keys))
    n_total = len(items)
    targets = [f * n_total for f in fractions]
    assigned = [0, 0, 0]
    parts: list[list] = [[], [], []]
    for gi in order:
        members = groups[keys[gi]]
        deficits = [targets[i] - assigned[i] for i in range(3)]
        dest = max(nonzero, key=lambda i: (deficits[i], -i))
        parts[dest].extend(members)
        assigned[dest] += len(members)
    return DatasetSplit(parts[0], parts[1], parts[2], seed)
