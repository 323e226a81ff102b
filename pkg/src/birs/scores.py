"""Marginal scores, multiplier-bootstrap pseudo-scores, and thresholds.

The observed score for variant j is g_j' (y - eta0) / sqrt(n).  Its
null distribution is approximated by pseudo-scores g_j' M e_b / sqrt(n)
with e_b standard normal and M the null model's residual factor.  Each
e_b comes from a counter-based generator keyed by (seed, b), so any
worker can regenerate replicate b for its own slice of variants and
block-wise maxima stay jointly comparable across machines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, EmptyInput, EmptyRegion
from .null_model import NullModel
from .regions import Region

MIN_BOOTSTRAP = 100


@dataclass
class GenotypeMatrix:
    """Variant dosages with per-variant position and MAF metadata."""

    dosages: np.ndarray  # n x p, entries in [0, 2]
    positions: np.ndarray  # length p, strictly increasing base pairs
    maf: np.ndarray  # length p, in [0, 0.5]

    def __post_init__(self):
        self.dosages = np.asarray(self.dosages, dtype=np.float64)
        self.positions = np.asarray(self.positions, dtype=np.int64)
        self.maf = np.asarray(self.maf, dtype=np.float64)
        n, p = self.dosages.shape
        if self.positions.shape != (p,) or self.maf.shape != (p,):
            raise DimensionMismatch("positions/maf must have one entry per variant")
        if p > 1 and not np.all(np.diff(self.positions) > 0):
            raise ValueError("positions must be strictly increasing")
        if np.min(self.dosages, initial=0.0) < 0.0 or np.max(self.dosages, initial=0.0) > 2.0:
            raise ValueError("dosages must lie in [0, 2]")
        if np.any(self.maf < 0.0) or np.any(self.maf > 0.5):
            raise ValueError("maf must lie in [0, 0.5]")

    @property
    def n_samples(self) -> int:
        return self.dosages.shape[0]

    @property
    def n_variants(self) -> int:
        return self.dosages.shape[1]

    def recompute_maf(self) -> np.ndarray:
        """Empirical minor-allele frequency per column, from the dosages."""
        af = self.dosages.mean(axis=0) / 2.0
        return np.minimum(af, 1.0 - af)

    def slice_region(self, region: Region) -> "GenotypeMatrix":
        return GenotypeMatrix(
            dosages=self.dosages[:, region.start : region.end],
            positions=self.positions[region.start : region.end],
            maf=self.maf[region.start : region.end],
        )


@dataclass
class ScoreSet:
    """Observed scores plus the bootstrap pseudo-score matrix.

    ``boot`` rows are replicates; row b is reproducible from (seed, b)
    alone.  Slicing a region returns views, not copies.
    """

    u: np.ndarray  # length p
    boot: np.ndarray  # n_boot x p
    n_boot: int
    seed: int

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.float64)
        self.boot = np.asarray(self.boot, dtype=np.float64)
        if self.boot.ndim != 2 or self.boot.shape[1] != self.u.shape[0]:
            raise DimensionMismatch(
                f"boot shape {self.boot.shape} incompatible with {self.u.shape[0]} scores"
            )
        if self.boot.shape[0] != self.n_boot:
            raise DimensionMismatch("n_boot does not match bootstrap rows")

    @property
    def n_variants(self) -> int:
        return self.u.shape[0]

    @property
    def domain(self) -> Region:
        return Region(0, self.n_variants)

    def slice_region(self, region: Region) -> "ScoreSet":
        if region.end > self.n_variants:
            raise EmptyRegion(f"region {region} outside score vector")
        return ScoreSet(
            u=self.u[region.start : region.end],
            boot=self.boot[:, region.start : region.end],
            n_boot=self.n_boot,
            seed=self.seed,
        )


def multiplier_matrix(n: int, n_boot: int, seed: int) -> np.ndarray:
    """Standard-normal multipliers, one column per bootstrap replicate.

    Column b is the first n draws of a Philox stream keyed by (seed, b),
    independent of the variant slice a worker holds.
    """
    e = np.empty((n, n_boot))
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    for b in range(n_boot):
        gen = np.random.Generator(
            np.random.Philox(key=np.array([seed, b], dtype=np.uint64))
        )
        e[:, b] = gen.standard_normal(n)
    return e


def compute_scores(g: GenotypeMatrix, model: NullModel) -> np.ndarray:
    """Observed marginal scores u_j = g_j' (y - eta0) / sqrt(n)."""
    if g.n_samples != model.n:
        raise DimensionMismatch(
            f"genotype rows {g.n_samples} != model samples {model.n}"
        )
    return (model.residuals @ g.dosages) / np.sqrt(g.n_samples)


def compute_bootstrap(
    g: GenotypeMatrix, model: NullModel, n_boot: int, seed: int
) -> np.ndarray:
    """Pseudo-score matrix with one replicate per row.

    Deterministic in (g, model, n_boot, seed) regardless of the worker
    or variant slice on which it is evaluated.
    """
    if g.n_samples != model.n:
        raise DimensionMismatch(
            f"genotype rows {g.n_samples} != model samples {model.n}"
        )
    if n_boot < MIN_BOOTSTRAP:
        raise ValueError(f"n_boot must be at least {MIN_BOOTSTRAP}, got {n_boot}")
    e = multiplier_matrix(model.n, n_boot, seed)
    me = model.boot_factor.apply(e)
    return (me.T @ g.dosages) / np.sqrt(g.n_samples)


def compute_scoreset(
    g: GenotypeMatrix, model: NullModel, n_boot: int, seed: int
) -> ScoreSet:
    return ScoreSet(
        u=compute_scores(g, model),
        boot=compute_bootstrap(g, model, n_boot, seed),
        n_boot=n_boot,
        seed=seed,
    )


def percentile_threshold(values: np.ndarray, alpha: float) -> float:
    """The ceil((1-alpha) N)-th ascending order statistic.

    Inverse-CDF convention; conservative on ties and exactly
    reproducible.  Monotone non-increasing in alpha and non-decreasing
    under element-wise domination of ``values``.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise EmptyInput("percentile of an empty vector")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    n = values.size
    # Nudge guards against float wobble when (1-alpha)*n is an exact integer.
    k = int(np.ceil((1.0 - alpha) * n - 1e-9))
    k = min(max(k, 1), n)
    return float(np.partition(values, k - 1)[k - 1])


def max_abs(scores: np.ndarray, region: Region) -> float:
    """Max absolute score over a region."""
    scores = np.asarray(scores, dtype=np.float64)
    if region.end > scores.shape[0]:
        raise EmptyRegion(f"region {region} outside score vector")
    return float(_kernels.range_max_abs(scores, region.start, region.end))


def boot_max_abs(boot: np.ndarray, region: Region) -> np.ndarray:
    """Per-replicate max absolute pseudo-score over a region."""
    if region.end > boot.shape[1]:
        raise EmptyRegion(f"region {region} outside bootstrap matrix")
    return np.asarray(_kernels.rows_range_max_abs(boot, region.start, region.end))


def boot_max_abs_union(boot: np.ndarray, regions: list[Region]) -> np.ndarray:
    """Per-replicate max absolute pseudo-score over a union of regions."""
    if not regions:
        raise EmptyRegion("union of zero regions")
    starts = np.array([r.start for r in regions], dtype=np.int64)
    ends = np.array([r.end for r in regions], dtype=np.int64)
    if np.max(ends) > boot.shape[1]:
        raise EmptyRegion("region union outside bootstrap matrix")
    return np.asarray(_kernels.rows_segments_max_abs(boot, starts, ends))
