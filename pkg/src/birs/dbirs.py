"""Block-distributed detection with central aggregation.

The variant axis is split into contiguous blocks.  Each worker runs the
single-machine detector on its block and ships back only a compact
block result: the detected regions with their stats, the block max-abs
stat, and two length-N bootstrap vectors (block maxima and maxima over
the union of the block's detections).  The central stage treats blocks
as points, reruns the detector on the K-dimensional block-maxima
problem to pick significant blocks, then filters the surviving blocks'
regions against a final threshold computed from detection-union maxima.

Because bootstrap multipliers are keyed by (seed, replicate), every
block sees the same replicate b, which is what makes block maxima
jointly comparable at the central stage.  The orchestration is
schedule-independent: block results are keyed by block id and
aggregated in id order, so worker count never changes the output.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentBlocks
from .null_model import NullModel
from .regions import Region, merge_regions
from .scores import (
    GenotypeMatrix,
    ScoreSet,
    boot_max_abs,
    boot_max_abs_union,
    multiplier_matrix,
    percentile_threshold,
)
from .sbirs import DetectionResult, SbirsConfig, run_sbirs


@dataclass
class DbirsConfig:
    alpha: float
    truncation_s: int
    block_size: int
    n_boot: int
    seed: int

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.truncation_s < 0:
            raise ValueError("truncation_s must be non-negative")
        if self.block_size < 2**self.truncation_s:
            raise ValueError(
                f"block_size {self.block_size} smaller than truncation length "
                f"{2 ** self.truncation_s}"
            )
        if self.n_boot < 1:
            raise ValueError("n_boot must be positive")

    def sbirs_config(self, alpha: float | None = None) -> SbirsConfig:
        return SbirsConfig(
            alpha=self.alpha if alpha is None else alpha,
            truncation_s=self.truncation_s,
        )


@dataclass
class BlockResult:
    """Everything a worker ships to the central stage for one block.

    ``detected`` regions are in genome coordinates.  ``m_vec[b]`` is the
    bootstrap max over the whole block for replicate b; ``l_vec[b]`` the
    max over the union of detected regions (zeros when nothing was
    detected), from the same replicates.
    """

    block_id: int
    block_region: Region
    detected: list[Region]
    detected_stats: list[float]
    detected_thresholds: list[float]
    block_stat: float
    m_vec: np.ndarray
    l_vec: np.ndarray
    n_boot: int
    seed: int


def split_blocks(p: int, block_size: int) -> list[Region]:
    """Contiguous covering blocks of ``block_size`` variants.

    A remainder of at most half a block is merged into the final block,
    so the last block has length in [block_size/2, 1.5*block_size].
    """
    if block_size < 1:
        raise ValueError("block_size must be positive")
    if p < 1:
        raise ValueError("p must be positive")
    if block_size >= p:
        return [Region(0, p)]
    n_full = p // block_size
    rem = p % block_size
    bounds = [k * block_size for k in range(n_full + 1)]
    if rem:
        if rem <= block_size // 2:
            bounds[-1] = p
        else:
            bounds.append(p)
    return [Region(a, b) for a, b in zip(bounds, bounds[1:])]


def run_block(
    block_scores: ScoreSet, block: Region, config: DbirsConfig, block_id: int = 0
) -> BlockResult:
    """Run the detector on one block and assemble its result payload.

    ``block_scores`` holds exactly the block's slice of scores; the
    returned regions are translated back to genome coordinates.
    """
    if block_scores.n_variants != block.length:
        raise InconsistentBlocks(
            f"score slice length {block_scores.n_variants} != block length {block.length}"
        )
    local_domain = block_scores.domain
    det = run_sbirs(block_scores, local_domain, config.sbirs_config())
    m_vec = boot_max_abs(block_scores.boot, local_domain)
    if det.regions:
        l_vec = boot_max_abs_union(block_scores.boot, det.regions)
    else:
        l_vec = np.zeros(config.n_boot)
    offset = block.start
    return BlockResult(
        block_id=block_id,
        block_region=block,
        detected=[Region(r.start + offset, r.end + offset) for r in det.regions],
        detected_stats=list(det.region_stats),
        detected_thresholds=list(det.region_thresholds),
        block_stat=det.global_stat,
        m_vec=m_vec,
        l_vec=l_vec,
        n_boot=config.n_boot,
        seed=config.seed,
    )


def _validate_blocks(blocks: list[BlockResult]) -> list[BlockResult]:
    if not blocks:
        raise InconsistentBlocks("no block results")
    ordered = sorted(blocks, key=lambda b: b.block_region.start)
    seeds = {b.seed for b in ordered}
    boots = {b.n_boot for b in ordered}
    if len(seeds) != 1 or len(boots) != 1:
        raise InconsistentBlocks(f"blocks disagree on seed ({seeds}) or n_boot ({boots})")
    n_boot = ordered[0].n_boot
    for blk in ordered:
        if blk.m_vec.shape != (n_boot,) or blk.l_vec.shape != (n_boot,):
            raise InconsistentBlocks("bootstrap vectors have wrong length")
    pos = ordered[0].block_region.start
    if pos != 0:
        raise InconsistentBlocks("blocks do not start at variant 0")
    for blk in ordered:
        if blk.block_region.start != pos:
            raise InconsistentBlocks("blocks do not tile the genome contiguously")
        pos = blk.block_region.end
    return ordered


def central_aggregate(blocks: list[BlockResult], config: DbirsConfig) -> DetectionResult:
    """Select significant blocks and filter their regions.

    Block max stats form a K-dimensional score vector whose bootstrap
    rows are the per-block bootstrap maxima; the detector runs on it
    with truncation 0.  Regions inside significant blocks survive iff
    their stored stat exceeds the percentile threshold of per-replicate
    maxima over the significant blocks' detection unions.  The central
    stage only ever removes regions, then merges survivors across block
    boundaries.
    """
    ordered = _validate_blocks(blocks)
    k = len(ordered)
    u_tilde = np.array([b.block_stat for b in ordered])
    boot_tilde = np.column_stack([b.m_vec for b in ordered])
    central_scores = ScoreSet(
        u=u_tilde, boot=boot_tilde, n_boot=ordered[0].n_boot, seed=ordered[0].seed
    )
    central = run_sbirs(
        central_scores,
        Region(0, k),
        SbirsConfig(alpha=config.alpha, truncation_s=0),
    )
    significant = sorted(
        idx for reg in central.regions for idx in range(reg.start, reg.end)
    )
    empty = DetectionResult(
        regions=[],
        region_stats=[],
        region_thresholds=[],
        global_stat=central.global_stat,
        global_threshold=central.global_threshold,
        rounds=central.rounds,
        significant_blocks=significant,
    )
    if not significant:
        return empty

    l_stack = np.max(np.stack([ordered[j].l_vec for j in significant]), axis=0)
    c_min = percentile_threshold(l_stack, config.alpha)
    if c_min > central.global_threshold:
        raise RuntimeError(
            f"c_min {c_min} exceeds the central global threshold "
            f"{central.global_threshold}"
        )

    kept: list[tuple[Region, float, float]] = []
    for j in significant:
        blk = ordered[j]
        for reg, stat, thr in zip(blk.detected, blk.detected_stats, blk.detected_thresholds):
            if stat > c_min:
                kept.append((reg, stat, thr))
    if not kept:
        empty.c_min = c_min
        return empty

    merged = merge_regions([reg for reg, _, _ in kept])
    stats, thresholds = [], []
    for run in merged:
        members = [(s, t) for reg, s, t in kept if run.start <= reg.start < run.end]
        stats.append(max(s for s, _ in members))
        thresholds.append(max(max(t for _, t in members), c_min))
    return DetectionResult(
        regions=merged,
        region_stats=stats,
        region_thresholds=thresholds,
        global_stat=central.global_stat,
        global_threshold=central.global_threshold,
        rounds=central.rounds,
        c_min=c_min,
        significant_blocks=significant,
    )


def _map_blocks(tasks, workers: int):
    if workers <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(task) for task in tasks]
        return [f.result() for f in futures]


def run_dbirs_on_scores(
    scores: ScoreSet, config: DbirsConfig, workers: int = 1
) -> DetectionResult:
    """Distributed detection over a fully materialized score set."""
    blocks = split_blocks(scores.n_variants, config.block_size)

    def make_task(idx: int, blk: Region):
        return lambda: run_block(scores.slice_region(blk), blk, config, block_id=idx)

    results = _map_blocks(
        [make_task(i, b) for i, b in enumerate(blocks)], workers
    )
    return central_aggregate(results, config)


def _block_scoreset(
    g: GenotypeMatrix, model: NullModel, me: np.ndarray, blk: Region, config: DbirsConfig
) -> ScoreSet:
    # me is the factored multiplier matrix (n x N), shared read-only.
    sub = g.dosages[:, blk.start : blk.end]
    root_n = np.sqrt(g.n_samples)
    return ScoreSet(
        u=(model.residuals @ sub) / root_n,
        boot=(me.T @ sub) / root_n,
        n_boot=config.n_boot,
        seed=config.seed,
    )


def run_dbirs(
    g: GenotypeMatrix, model: NullModel, config: DbirsConfig, workers: int = 1
) -> DetectionResult:
    """Distributed detection from genotypes: split, per-block scores and
    search on workers, central aggregation.

    Output depends only on the inputs and seed, never on ``workers``.
    """
    blocks = split_blocks(g.n_variants, config.block_size)
    e = multiplier_matrix(model.n, config.n_boot, config.seed)
    me = model.boot_factor.apply(e)

    def make_task(idx: int, blk: Region):
        return lambda: run_block(
            _block_scoreset(g, model, me, blk, config), blk, config, block_id=idx
        )

    results = _map_blocks(
        [make_task(i, b) for i, b in enumerate(blocks)], workers
    )
    return central_aggregate(results, config)


def _union_result(
    per_block: list[DetectionResult], blocks: list[Region]
) -> DetectionResult:
    emissions: list[tuple[Region, float, float]] = []
    for det, blk in zip(per_block, blocks):
        for reg, stat, thr in zip(det.regions, det.region_stats, det.region_thresholds):
            emissions.append((Region(reg.start + blk.start, reg.end + blk.start), stat, thr))
    merged = merge_regions([reg for reg, _, _ in emissions])
    stats, thresholds = [], []
    for run in merged:
        members = [(s, t) for reg, s, t in emissions if run.start <= reg.start < run.end]
        stats.append(max(s for s, _ in members))
        thresholds.append(max(t for _, t in members))
    return DetectionResult(
        regions=merged,
        region_stats=stats,
        region_thresholds=thresholds,
        global_stat=max(det.global_stat for det in per_block),
        global_threshold=max(det.global_threshold for det in per_block),
        rounds=max(det.rounds for det in per_block),
    )


def run_bonferroni_on_scores(
    scores: ScoreSet, config: DbirsConfig, workers: int = 1
) -> DetectionResult:
    """Baseline: per-block detection at level alpha/K, simple union."""
    blocks = split_blocks(scores.n_variants, config.block_size)
    adj = config.sbirs_config(alpha=config.alpha / len(blocks))

    def make_task(blk: Region):
        return lambda: run_sbirs(scores.slice_region(blk), Region(0, blk.length), adj)

    per_block = _map_blocks([make_task(b) for b in blocks], workers)
    return _union_result(per_block, blocks)


def run_fixed_threshold_on_scores(
    scores: ScoreSet, config: DbirsConfig, workers: int = 1
) -> DetectionResult:
    """Baseline: per-block detection against the one genome-wide
    bootstrap threshold, simple union."""
    blocks = split_blocks(scores.n_variants, config.block_size)
    genome_max = boot_max_abs(scores.boot, scores.domain)
    c_global = percentile_threshold(genome_max, config.alpha)
    cfg = config.sbirs_config()

    def make_task(blk: Region):
        return lambda: run_sbirs(
            scores.slice_region(blk), Region(0, blk.length), cfg, fixed_threshold=c_global
        )

    per_block = _map_blocks([make_task(b) for b in blocks], workers)
    result = _union_result(per_block, blocks)
    result.global_threshold = c_global
    return result
