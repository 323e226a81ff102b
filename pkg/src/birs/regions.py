"""Half-open index intervals over variants and interval-set arithmetic.

A ``Region`` [start, end) is the unit of detection output.  All helpers
treat lists of regions as sets of variant indices; ``merge_regions``
produces the canonical sorted, disjoint, separated representation
(adjacent or overlapping intervals are coalesced, gaps of one or more
indices are preserved).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Region:
    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid region [{self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start

    def contains(self, index: int) -> bool:
        return self.start <= index < self.end

    def overlaps(self, other: "Region") -> bool:
        return self.start < other.end and other.start < self.end


def merge_regions(regions: list[Region]) -> list[Region]:
    """Coalesce overlapping or exactly adjacent regions.

    Regions separated by a gap of at least one index stay separate.
    """
    if not regions:
        return []
    ordered = sorted(regions)
    merged = [ordered[0]]
    for reg in ordered[1:]:
        last = merged[-1]
        if reg.start <= last.end:
            if reg.end > last.end:
                merged[-1] = Region(last.start, reg.end)
        else:
            merged.append(reg)
    return merged


def total_length(regions: list[Region]) -> int:
    """Number of distinct variant indices covered."""
    return sum(r.length for r in merge_regions(regions))


def intersect_length(a: list[Region], b: list[Region]) -> int:
    """Number of variant indices covered by both region sets."""
    am = merge_regions(a)
    bm = merge_regions(b)
    total = 0
    i = j = 0
    while i < len(am) and j < len(bm):
        lo = max(am[i].start, bm[j].start)
        hi = min(am[i].end, bm[j].end)
        if lo < hi:
            total += hi - lo
        if am[i].end <= bm[j].end:
            i += 1
        else:
            j += 1
    return total


def union_length(a: list[Region], b: list[Region]) -> int:
    return total_length(list(a) + list(b))
