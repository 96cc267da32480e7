"""Evaluation metrics: per-mask IoU, corpus cIoU/gIoU, Acc@0.5, centroid distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Point, box_iou, mask_bbox


@dataclass(frozen=True)
class SamplePair:
    """One prediction/ground-truth mask pair on a shared grid."""

    pred: np.ndarray
    gt: np.ndarray

    def __post_init__(self):
        if self.pred.shape != self.gt.shape:
            raise ValueError(
                f"pred/gt size mismatch: {self.pred.shape} vs {self.gt.shape}")


@dataclass(frozen=True)
class CorpusScores:
    ciou: float
    giou: float
    acc_at_05: float
    n_samples: int
    n_parse_failures: int = 0


def mask_iou(pred: np.ndarray, gt: np.ndarray) -> float:
    """Intersection over union of two same-size masks.

    Two empty masks score 1.0 (a correct "no object" answer); exactly
    one empty mask scores 0.0.
    """
    if pred.shape != gt.shape:
        raise ValueError(f"size mismatch: {pred.shape} vs {gt.shape}")
    inter = int(np.logical_and(pred, gt).sum())
    union = int(np.logical_or(pred, gt).sum())
    if union == 0:
        return 1.0
    return inter / union


def _box_hit(pred: np.ndarray, gt: np.ndarray) -> bool:
    # boxes are derived from the masks via min/max; an empty mask has no
    # box and counts as a miss
    if not pred.any() or not gt.any():
        return False
    return box_iou(mask_bbox(pred), mask_bbox(gt)) >= 0.5


def aggregate(pairs: list[SamplePair], n_parse_failures: int = 0) -> CorpusScores:
    """Corpus scores over sample pairs.

    cIoU is the summed intersection over the summed union, gIoU the mean
    of per-sample IoUs, and Acc@0.5 the fraction of samples whose
    mask-derived boxes overlap with IoU >= 0.5.
    """
    if not pairs:
        raise ValueError("aggregate needs at least one sample pair")
    inter_sum = 0
    union_sum = 0
    iou_sum = 0.0
    hits = 0
    for p in pairs:
        inter_sum += int(np.logical_and(p.pred, p.gt).sum())
        union_sum += int(np.logical_or(p.pred, p.gt).sum())
        iou_sum += mask_iou(p.pred, p.gt)
        hits += _box_hit(p.pred, p.gt)
    n = len(pairs)
    ciou = inter_sum / union_sum if union_sum > 0 else 1.0
    return CorpusScores(
        ciou=ciou,
        giou=iou_sum / n,
        acc_at_05=hits / n,
        n_samples=n,
        n_parse_failures=n_parse_failures,
    )


def centroid_sq_dist(pred_centroid: Point, gt_centroid: Point, mean: bool = True) -> float:
    """Squared distance between two normalized centroids.

    With ``mean=True`` (default) this is the mean over the two squared
    coordinate deltas, bounded by 1.0 on the unit square; ``mean=False``
    selects the plain squared Euclidean distance (sum instead of mean).
    """
    dx = pred_centroid[0] - gt_centroid[0]
    dy = pred_centroid[1] - gt_centroid[1]
    s = dx * dx + dy * dy
    return s / 2.0 if mean else s
