"""In-process bindings for training loops.

Exposes the reward, codec, grammar, and metrics kernels with
array-protocol signatures so an RL loop can score rollouts without
spawning a process per sample: masks cross the boundary as contiguous
row-major boolean/uint8 buffers with (height, width) shape, configs as
plain mappings, and results as plain dicts/lists.  Outputs are
bit-identical to the primary library (they are computed by it), and
grammar violations surface as ``trajseg.ParseError`` carrying the error
kind and byte offset.

All functions are stateless and safe to call from thread or process
pools; the heavy kernels run inside numpy, which releases the
interpreter lock for bulk array work.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

import trajseg as _t

__version__ = _t.__version__

__all__ = [
    "total_reward",
    "group_advantages",
    "encode",
    "decode",
    "mask_iou",
    "aggregate",
    "__version__",
]


def _as_mask(arr, name: str = "mask") -> np.ndarray:
    mask = np.ascontiguousarray(arr)
    if mask.ndim != 2:
        raise ValueError(f"{name} must be a 2-D (height, width) array")
    if mask.dtype != np.bool_:
        mask = mask != 0
    return mask


def _config_from(cfg: Mapping | None) -> _t.RewardConfig:
    if cfg is None:
        return _t.RewardConfig()
    if isinstance(cfg, _t.RewardConfig):
        return cfg
    fields = dict(cfg)
    lam = fields.pop("length_lambda", None)
    budget = fields.pop("length_budget", None)
    if (lam is None) != (budget is None):
        raise ValueError("length_lambda and length_budget go together")
    if lam is not None:
        fields["length_penalty"] = _t.LengthPenalty(float(lam), int(budget))
    return _t.RewardConfig(**fields)


def total_reward(text: str, gt_mask, cfg: Mapping | None = None) -> dict:
    """Score one response text against a ground-truth mask array.

    Returns a dict with the breakdown fields: format_ok, r_iou, r_dist,
    r_len, total, iou_value.
    """
    breakdown = _t.total_reward(text, _as_mask(gt_mask, "gt_mask"),
                                _config_from(cfg))
    return breakdown.to_dict()


def group_advantages(rewards: Sequence[float]) -> list[float]:
    """Group-relative advantages of a reward sequence, as plain floats."""
    return [float(a) for a in _t.group_advantages(list(rewards))]


def encode(mask, epsilon: float = 0.0, decimals: int = 3) -> str:
    """Mask array to trajectory text.

    Raises:
        trajseg.EmptyMaskError: the mask has no foreground.
    """
    m = _as_mask(mask)
    if not m.any():
        raise _t.EmptyMaskError("mask has no foreground pixels")
    h, w = m.shape
    rings = [_t.simplify(r, epsilon) for r in _t.trace_contours(m)]
    return _t.serialize(rings, _t.ImageSize(w, h), decimals)


def decode(text: str, width: int, height: int) -> np.ndarray:
    """Trajectory text to a (height, width) boolean mask array.

    Raises:
        trajseg.ParseError: grammar violation, with kind and byte offset.
    """
    parsed = _t.parse(text, (_t.ShapeKind.POLYGON, _t.ShapeKind.MULTIPOLYGON))
    size = _t.ImageSize(width, height)
    return _t.rasterize(_t.denormalize(parsed, size), size)


def mask_iou(pred, gt) -> float:
    return _t.mask_iou(_as_mask(pred, "pred"), _as_mask(gt, "gt"))


def aggregate(pairs: Iterable) -> dict:
    """Corpus scores over (pred, gt) mask-array pairs, as a plain dict."""
    sample_pairs = [_t.SamplePair(_as_mask(p, "pred"), _as_mask(g, "gt"))
                    for p, g in pairs]
    scores = _t.aggregate(sample_pairs)
    return {
        "ciou": scores.ciou,
        "giou": scores.giou,
        "acc_at_05": scores.acc_at_05,
        "n_samples": scores.n_samples,
        "n_parse_failures": scores.n_parse_failures,
    }
