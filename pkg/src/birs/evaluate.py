"""Detection metrics over replicate outputs against planted truth.

DR is the fraction of true windows touched by any detection, TPR the
fraction of true-window variants recovered, and FDR(h) the fraction of
detected variants lying at least h kilobases from every true window
(0 by convention when nothing is detected).  FWER is estimated as the
fraction of null replicates with any detection at all.  The Jaccard
index on variant sets quantifies agreement between two region sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NoTruth
from .regions import Region, intersect_length, merge_regions, total_length, union_length
from .simulate import TruthSet

DEFAULT_H_KB = (25, 50, 75)


@dataclass
class MetricsReport:
    fwer: float
    dr: float
    tpr: float
    fdr_h: dict[int, float]
    sd_dr: float
    sd_tpr: float
    sd_fdr_h: dict[int, float]
    selection_prob: np.ndarray
    n_replicates: int
    n_null_replicates: int
    n_signal_replicates: int

    def to_dict(self) -> dict:
        return {
            "fwer": self.fwer,
            "dr": self.dr,
            "tpr": self.tpr,
            "fdr_h": {str(h): v for h, v in self.fdr_h.items()},
            "sd_dr": self.sd_dr,
            "sd_tpr": self.sd_tpr,
            "sd_fdr_h": {str(h): v for h, v in self.sd_fdr_h.items()},
            "n_replicates": self.n_replicates,
            "n_null_replicates": self.n_null_replicates,
            "n_signal_replicates": self.n_signal_replicates,
        }


def detection_rate(truth: TruthSet, detected: list[Region]) -> float:
    """Fraction of true windows intersected by the detected union."""
    if not truth.causal_windows:
        raise NoTruth("detection rate needs at least one true window")
    if not detected:
        return 0.0
    hit = sum(
        1 for win in truth.causal_windows if intersect_length([win], detected) > 0
    )
    return hit / len(truth.causal_windows)


def true_positive_rate(truth: TruthSet, detected: list[Region]) -> float:
    """Shared variant count between truth and detections over truth size."""
    if not truth.causal_windows:
        raise NoTruth("true positive rate needs at least one true window")
    return intersect_length(truth.causal_windows, detected) / total_length(
        truth.causal_windows
    )


def fdr_at_distance(
    truth: TruthSet,
    detected: list[Region],
    h_kb: float,
    positions: np.ndarray,
) -> float:
    """Fraction of detected variants at least h kb from every true window.

    Distances are in base pairs via ``positions``; an empty detection
    set has FDR 0 by convention.
    """
    merged = merge_regions(detected)
    if not merged:
        return 0.0
    positions = np.asarray(positions)
    if merged[-1].end > positions.shape[0]:
        raise DimensionMismatch("detected regions extend past the position vector")
    detected_idx = np.concatenate([np.arange(r.start, r.end) for r in merged])
    pos = positions[detected_idx].astype(np.float64)
    dist = np.full(pos.shape, np.inf)
    for win in truth.causal_windows:
        lo = positions[win.start]
        hi = positions[win.end - 1]
        np.minimum(dist, np.maximum(0.0, np.maximum(lo - pos, pos - hi)), out=dist)
    return float(np.mean(dist >= h_kb * 1_000.0))


def jaccard(a: list[Region], b: list[Region]) -> float:
    """Jaccard index of two region sets on variant indices.

    Both empty gives 1 by convention.
    """
    union = union_length(a, b)
    if union == 0:
        return 1.0
    return intersect_length(a, b) / union


def _sd(values: list[float]) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1))


def aggregate_replicates(
    detections: list[list[Region]],
    truths: list[TruthSet],
    positions: np.ndarray,
    h_kb: tuple[int, ...] = DEFAULT_H_KB,
) -> MetricsReport:
    """Summarize per-replicate detections into one report.

    Replicates with no true windows contribute to FWER; the rest to
    DR/TPR/FDR(h).  Standard deviations use the n-1 divisor (0 when a
    single replicate is available).  Selection probability of variant j
    is the fraction of all replicates whose detections cover j.
    """
    if not detections:
        raise ValueError("need at least one replicate")
    if len(detections) != len(truths):
        raise DimensionMismatch("detections and truths must align")
    positions = np.asarray(positions)
    p = positions.shape[0]
    counts = np.zeros(p)
    dr_vals: list[float] = []
    tpr_vals: list[float] = []
    fdr_vals: dict[int, list[float]] = {h: [] for h in h_kb}
    n_null = 0
    null_hits = 0
    for detected, truth in zip(detections, truths):
        for reg in merge_regions(detected):
            counts[reg.start : reg.end] += 1.0
        if truth.is_null:
            n_null += 1
            null_hits += bool(detected)
            continue
        dr_vals.append(detection_rate(truth, detected))
        tpr_vals.append(true_positive_rate(truth, detected))
        for h in h_kb:
            fdr_vals[h].append(fdr_at_distance(truth, detected, h, positions))
    n_signal = len(detections) - n_null
    return MetricsReport(
        fwer=null_hits / n_null if n_null else 0.0,
        dr=float(np.mean(dr_vals)) if dr_vals else 0.0,
        tpr=float(np.mean(tpr_vals)) if tpr_vals else 0.0,
        fdr_h={h: float(np.mean(v)) if v else 0.0 for h, v in fdr_vals.items()},
        sd_dr=_sd(dr_vals),
        sd_tpr=_sd(tpr_vals),
        sd_fdr_h={h: _sd(v) for h, v in fdr_vals.items()},
        selection_prob=counts / len(detections),
        n_replicates=len(detections),
        n_null_replicates=n_null,
        n_signal_replicates=n_signal,
    )
