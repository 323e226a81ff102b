"""Synthetic genotypes, planted signal windows, and phenotypes.

Genotypes come from a latent-Gaussian model: each sample carries two
independent AR(1) latent haplotype tracks (lag-1 correlation
``ld_rho``); a track's value below the normal quantile of a variant's
target MAF contributes one minor allele, so dosages land in {0, 1, 2}
with tunable linkage disequilibrium and MAF spectrum.  Variant
positions sit on a fixed 100 bp grid.

Causal windows of ``window_bp`` base pairs are placed disjointly with a
minimum gap of twice the window width.  Within a window a fraction of
variants is causal with effect size magnitude effect_c * |log10(MAF)|
and random sign.  Phenotypes follow

    continuous:   y = 0.5 x1 + 0.5 x2 + G beta + eps,  eps ~ N(0, 1)
    dichotomous:  logit P(y = 1) = 0.5 x1 + 0.5 x2 + G beta

with x1 standard normal and x2 Bernoulli(1/2).  Everything is a pure
function of the config, bitwise stable under the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from .errors import WindowsDontFit
from .regions import Region
from .scores import GenotypeMatrix

GRID_SPACING_BP = 100

_GENO_STREAM = 0
_TRUTH_STREAM = 1
_PHENO_STREAM = 2

TRAITS = ("continuous", "dichotomous")


@dataclass
class SimConfig:
    n: int
    p: int
    ld_rho: float = 0.5
    maf_range: tuple[float, float] = (0.001, 0.5)
    n_causal_windows: int = 4
    window_bp: int = 5_000
    causal_fraction: float = 0.1
    effect_c: float = 0.15
    trait: str = "continuous"
    seed: int = 0

    def __post_init__(self):
        if self.n < 2 or self.p < 1:
            raise ValueError("need n >= 2 and p >= 1")
        if not 0.0 <= self.ld_rho < 1.0:
            raise ValueError("ld_rho must lie in [0, 1)")
        lo, hi = self.maf_range
        if not (0.0 < lo <= hi <= 0.5):
            raise ValueError("maf_range must satisfy 0 < low <= high <= 0.5")
        if not 0.0 < self.causal_fraction <= 1.0:
            raise ValueError("causal_fraction must lie in (0, 1]")
        if self.effect_c <= 0.0:
            raise ValueError("effect_c must be positive")
        if self.trait not in TRAITS:
            raise ValueError(f"trait must be one of {TRAITS}")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "ld_rho": self.ld_rho,
            "maf_range": list(self.maf_range),
            "n_causal_windows": self.n_causal_windows,
            "window_bp": self.window_bp,
            "causal_fraction": self.causal_fraction,
            "effect_c": self.effect_c,
            "trait": self.trait,
            "seed": self.seed,
        }


@dataclass
class TruthSet:
    """Planted causal windows and the effect vector they induce."""

    causal_windows: list[Region]
    causal_indices: np.ndarray
    beta: np.ndarray

    @classmethod
    def null(cls, p: int) -> "TruthSet":
        return cls(
            causal_windows=[],
            causal_indices=np.empty(0, dtype=np.int64),
            beta=np.zeros(p),
        )

    @property
    def is_null(self) -> bool:
        return len(self.causal_windows) == 0


def _stream(config: SimConfig, stream: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=config.seed, spawn_key=(stream,))
    )


def gen_genotypes(config: SimConfig) -> GenotypeMatrix:
    """Sample the dosage matrix from the latent AR(1) threshold model."""
    rng = _stream(config, _GENO_STREAM)
    lo, hi = config.maf_range
    maf = np.exp(rng.uniform(np.log(lo), np.log(hi), size=config.p))
    cutoff = norm.ppf(maf)
    n_hap = 2 * config.n
    innovation = np.sqrt(1.0 - config.ld_rho**2)
    dosages = np.empty((config.n, config.p))
    latent = rng.standard_normal(n_hap)
    for j in range(config.p):
        if j > 0:
            latent = config.ld_rho * latent + innovation * rng.standard_normal(n_hap)
        minor = (latent < cutoff[j]).view(np.int8)
        dosages[:, j] = minor[: config.n] + minor[config.n :]
    positions = np.arange(config.p, dtype=np.int64) * GRID_SPACING_BP
    return GenotypeMatrix(dosages=dosages, positions=positions, maf=maf)


def window_variant_count(config: SimConfig) -> int:
    return max(1, config.window_bp // GRID_SPACING_BP)


def plant_truth(g: GenotypeMatrix, config: SimConfig) -> TruthSet:
    """Place disjoint causal windows and draw effect sizes.

    Windows are rejection-sampled with a minimum gap of two window
    widths between any pair.  Raises WindowsDontFit if placement fails.
    """
    rng = _stream(config, _TRUTH_STREAM)
    p = g.n_variants
    width = window_variant_count(config)
    if width > p:
        raise WindowsDontFit(f"window needs {width} variants, only {p} available")
    min_separation = 3 * width  # width + gap of two window widths
    starts: list[int] = []
    attempts = 0
    max_attempts = 1_000 * max(1, config.n_causal_windows)
    while len(starts) < config.n_causal_windows:
        attempts += 1
        if attempts > max_attempts:
            raise WindowsDontFit(
                f"placed {len(starts)}/{config.n_causal_windows} windows "
                f"after {max_attempts} attempts"
            )
        cand = int(rng.integers(0, p - width + 1))
        if all(abs(cand - s) >= min_separation for s in starts):
            starts.append(cand)
    windows = [Region(s, s + width) for s in sorted(starts)]

    n_causal = max(1, round(config.causal_fraction * width))
    beta = np.zeros(p)
    causal: list[int] = []
    for win in windows:
        picks = rng.choice(np.arange(win.start, win.end), size=n_causal, replace=False)
        signs = rng.integers(0, 2, size=n_causal) * 2 - 1
        for j, sign in zip(np.sort(picks), signs):
            beta[j] = sign * config.effect_c * abs(np.log10(g.maf[j]))
            causal.append(int(j))
    return TruthSet(
        causal_windows=windows,
        causal_indices=np.array(sorted(causal), dtype=np.int64),
        beta=beta,
    )


def gen_phenotype(
    g: GenotypeMatrix, truth: TruthSet, config: SimConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Draw (outcome, covariate matrix) for one replicate.

    The covariate matrix has columns [intercept, x1, x2].  A null
    replicate is simply ``truth = TruthSet.null(p)``.
    """
    rng = _stream(config, _PHENO_STREAM)
    n = g.n_samples
    x1 = rng.standard_normal(n)
    x2 = rng.integers(0, 2, size=n).astype(np.float64)
    covariates = np.column_stack([np.ones(n), x1, x2])
    linpred = 0.5 * x1 + 0.5 * x2
    if truth.causal_indices.size:
        linpred = linpred + g.dosages[:, truth.causal_indices] @ truth.beta[
            truth.causal_indices
        ]
    if config.trait == "continuous":
        y = linpred + rng.standard_normal(n)
    else:
        y = (rng.random(n) < expit(linpred)).astype(np.float64)
    return y, covariates
