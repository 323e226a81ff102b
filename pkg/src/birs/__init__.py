"""Signal-region detection for genome-scale score vectors.

Marginal GLM score statistics, Gaussian multiplier-bootstrap
thresholds, binary re-search localization, and a block-distributed
variant with central aggregation, plus the simulation and evaluation
harness used to validate them.
"""

from ._kernels import IMPLEMENTATION as kernel_implementation
from .dbirs import (
    BlockResult,
    DbirsConfig,
    central_aggregate,
    run_block,
    run_dbirs,
    run_dbirs_on_scores,
    split_blocks,
)
from .evaluate import (
    MetricsReport,
    aggregate_replicates,
    detection_rate,
    fdr_at_distance,
    jaccard,
    true_positive_rate,
)
from .null_model import Family, NullModel, apply_boot_factor, fit_null
from .regions import Region, merge_regions
from .sbirs import (
    DetectionResult,
    SbirsConfig,
    binary_search,
    global_test,
    run_sbirs,
)
from .scores import (
    GenotypeMatrix,
    ScoreSet,
    compute_bootstrap,
    compute_scores,
    compute_scoreset,
    max_abs,
    percentile_threshold,
)
from .simulate import SimConfig, TruthSet, gen_genotypes, gen_phenotype, plant_truth

__version__ = "0.1.0"

__all__ = [
    "BlockResult",
    "DbirsConfig",
    "DetectionResult",
    "Family",
    "GenotypeMatrix",
    "MetricsReport",
    "NullModel",
    "Region",
    "SbirsConfig",
    "ScoreSet",
    "SimConfig",
    "TruthSet",
    "aggregate_replicates",
    "apply_boot_factor",
    "binary_search",
    "central_aggregate",
    "compute_bootstrap",
    "compute_scores",
    "compute_scoreset",
    "detection_rate",
    "fdr_at_distance",
    "fit_null",
    "gen_genotypes",
    "gen_phenotype",
    "global_test",
    "jaccard",
    "kernel_implementation",
    "max_abs",
    "merge_regions",
    "percentile_threshold",
    "plant_truth",
    "run_block",
    "run_dbirs",
    "run_dbirs_on_scores",
    "run_sbirs",
    "split_blocks",
    "true_positive_rate",
    "__version__",
]
