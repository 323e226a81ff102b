"""Binary re-search detection over a score vector.

Given observed scores and bootstrap pseudo-scores, the detector first
runs the global max-abs test.  On rejection it performs a binary search
in which every level tests all surviving segments against a threshold
computed over their union, so thresholds shrink as segments are
discarded.  Segments at or below the truncation length are emitted
whole.  Detected entries are then zeroed in the observed and bootstrap
scores and the search repeats until the global test no longer rejects.
Finally, adjacent or overlapping detections are merged into maximal
runs separated by at least one index.

All comparisons are strict (ties fail to reject).  A search pass after
a passing global test always emits at least one region (the segment
chain containing the arg-max survives every level), so the re-search
loop makes progress; a stall guard is kept anyway for safety.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyRegion
from .regions import Region, merge_regions
from .scores import ScoreSet, boot_max_abs, boot_max_abs_union, max_abs, percentile_threshold

# Counters for the dynamic-threshold monotonicity check; every search
# performed anywhere in the process is tallied here.
THRESHOLD_MONITOR = {"runs": 0, "violations": 0}


@dataclass
class SbirsConfig:
    alpha: float
    truncation_s: int = 0
    max_research_rounds: int | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.truncation_s < 0:
            raise ValueError("truncation_s must be non-negative")
        if self.max_research_rounds is not None and self.max_research_rounds < 1:
            raise ValueError("max_research_rounds must be positive when set")

    @property
    def truncation_length(self) -> int:
        return 2**self.truncation_s


@dataclass
class DetectionResult:
    """Detected regions with the statistics that admitted them.

    ``regions`` are sorted, disjoint, and separated by at least one
    index; ``region_stats[i]`` is the observed max-abs score of region
    i and ``region_thresholds[i]`` the largest threshold it was held to.
    ``rounds`` counts search passes (0 when the global test fails);
    ``stalled`` flags termination while the global test still rejected
    (round cap or a no-progress pass).
    """

    regions: list[Region]
    region_stats: list[float]
    region_thresholds: list[float]
    global_stat: float
    global_threshold: float
    rounds: int
    stalled: bool = False
    threshold_history: list[list[float]] = field(default_factory=list)
    c_min: float | None = None
    significant_blocks: list[int] | None = None

    @property
    def rejected(self) -> bool:
        return bool(self.regions)


@dataclass
class _Emission:
    region: Region
    stat: float
    threshold: float


def global_test(
    scores: ScoreSet, domain: Region, alpha: float
) -> tuple[float, float, bool]:
    """Max-abs test of the no-signal hypothesis over ``domain``.

    Returns (observed stat, bootstrap threshold, reject flag); the
    rejection is strict.
    """
    if domain.end > scores.n_variants:
        raise EmptyRegion(f"domain {domain} outside score vector")
    stat = max_abs(scores.u, domain)
    c_hat = percentile_threshold(boot_max_abs(scores.boot, domain), alpha)
    return stat, c_hat, stat > c_hat


def _record_thresholds(levels: list[float]) -> None:
    THRESHOLD_MONITOR["runs"] += 1
    for prev, cur in zip(levels, levels[1:]):
        if cur > prev:
            THRESHOLD_MONITOR["violations"] += 1
            raise RuntimeError(
                f"dynamic thresholds increased across levels: {prev} -> {cur}"
            )


def _binary_search(
    u: np.ndarray,
    boot: np.ndarray,
    candidates: list[Region],
    alpha: float,
    truncation_length: int,
    fixed_threshold: float | None = None,
) -> tuple[list[_Emission], list[float]]:
    """One search pass.  Does not mutate its inputs."""
    level = sorted(candidates)
    emissions: list[_Emission] = []
    level_thresholds: list[float] = []
    while level:
        if fixed_threshold is None:
            c_level = percentile_threshold(boot_max_abs_union(boot, level), alpha)
        else:
            c_level = fixed_threshold
        level_thresholds.append(c_level)
        next_level: list[Region] = []
        for seg in level:
            stat = max_abs(u, seg)
            if stat <= c_level:
                continue
            if seg.length <= truncation_length:
                emissions.append(_Emission(seg, stat, c_level))
            else:
                mid = seg.start + seg.length // 2
                next_level.append(Region(seg.start, mid))
                next_level.append(Region(mid, seg.end))
        level = next_level
    if fixed_threshold is None:
        _record_thresholds(level_thresholds)
    return emissions, level_thresholds


def binary_search(
    scores: ScoreSet, candidates: list[Region], config: SbirsConfig
) -> list[Region]:
    """Run one binary-search pass over disjoint candidate regions.

    Thresholds at each level are computed over the union of all
    segments still under test.  Returns the emitted regions, unmerged.
    """
    ordered = sorted(candidates)
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.start < prev.end:
            raise ValueError("candidate regions must be disjoint")
    emissions, _ = _binary_search(
        scores.u, scores.boot, candidates, config.alpha, config.truncation_length
    )
    return [em.region for em in emissions]


def _rearranged(emissions: list[_Emission]) -> tuple[list[Region], list[float], list[float]]:
    """Merge emitted regions into maximal runs, carrying stats along."""
    merged = merge_regions([em.region for em in emissions])
    stats = []
    thresholds = []
    for reg in merged:
        members = [em for em in emissions if reg.start <= em.region.start < reg.end]
        stats.append(max(em.stat for em in members))
        thresholds.append(max(em.threshold for em in members))
    return merged, stats, thresholds


def run_sbirs(
    scores: ScoreSet,
    domain: Region,
    config: SbirsConfig,
    fixed_threshold: float | None = None,
) -> DetectionResult:
    """Full detection pass over ``domain``: global test, binary search,
    re-search with zeroing, rearrangement.

    The caller's score set is never mutated; zeroing happens on working
    copies.  When ``fixed_threshold`` is given, every test (including
    the global one) uses that constant instead of dynamic bootstrap
    thresholds; this exists only for the fixed-threshold baseline.
    """
    local = scores.slice_region(domain)
    full = local.domain
    global_stat = max_abs(local.u, full)
    if fixed_threshold is None:
        global_c = percentile_threshold(boot_max_abs(local.boot, full), config.alpha)
    else:
        global_c = fixed_threshold
    if not global_stat > global_c:
        return DetectionResult(
            regions=[],
            region_stats=[],
            region_thresholds=[],
            global_stat=global_stat,
            global_threshold=global_c,
            rounds=0,
        )

    u_w = local.u.copy()
    boot_w = local.boot.copy()
    emissions: list[_Emission] = []
    history: list[list[float]] = []
    rounds = 0
    stalled = False
    cur_stat, cur_c = global_stat, global_c
    while cur_stat > cur_c:
        if (
            config.max_research_rounds is not None
            and rounds >= config.max_research_rounds
        ):
            stalled = True
            break
        found, level_thresholds = _binary_search(
            u_w, boot_w, [full], config.alpha, config.truncation_length, fixed_threshold
        )
        rounds += 1
        history.append([cur_c] + level_thresholds)
        if fixed_threshold is None and level_thresholds and level_thresholds[0] > cur_c:
            THRESHOLD_MONITOR["violations"] += 1
            raise RuntimeError(
                f"first level threshold {level_thresholds[0]} exceeds global {cur_c}"
            )
        if not found:
            stalled = True
            break
        for em in found:
            u_w[em.region.start : em.region.end] = 0.0
            boot_w[:, em.region.start : em.region.end] = 0.0
        emissions.extend(found)
        prev_c = cur_c
        cur_stat = max_abs(u_w, full)
        if fixed_threshold is None:
            cur_c = percentile_threshold(boot_max_abs(boot_w, full), config.alpha)
            if cur_c > prev_c:
                THRESHOLD_MONITOR["violations"] += 1
                raise RuntimeError(
                    f"re-search threshold increased after zeroing: {prev_c} -> {cur_c}"
                )

    merged, stats, thresholds = _rearranged(emissions)
    offset = domain.start
    return DetectionResult(
        regions=[Region(r.start + offset, r.end + offset) for r in merged],
        region_stats=stats,
        region_thresholds=thresholds,
        global_stat=global_stat,
        global_threshold=global_c,
        rounds=rounds,
        stalled=stalled,
        threshold_history=history,
    )
