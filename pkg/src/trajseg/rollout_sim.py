"""Model-free rollout generation: perturb ground-truth trajectories into
candidate responses so the reward/advantage pipeline can be exercised
end to end without a trained model.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import grammar
from ._rng import CounterRng
from .geometry import ImageSize
from .reward import RewardConfig, group_advantages, total_reward


class PerturbKind(enum.Enum):
    JITTER = "jitter"
    VERTEX_DROPOUT = "vertex_dropout"
    DUPLICATE_VERTICES = "duplicate_vertices"
    SHUFFLE_ORDER = "shuffle_order"
    TRUNCATE = "truncate"
    CORRUPT_FORMAT = "corrupt_format"


@dataclass(frozen=True)
class PerturbSpec:
    """One way of degrading a ground-truth response.

    sigma is the jitter std in normalized coordinates, p the per-vertex
    probability for dropout/duplication, fraction the kept prefix for
    truncation.  Identical (spec, text) inputs always produce identical
    output.
    """

    kind: PerturbKind
    seed: int = 0
    sigma: float = 0.0
    p: float = 0.0
    fraction: float = 0.5

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must be in [0, 1]")
        if not 0.0 < self.fraction <= 1.0:
            raise ValueError("fraction must be in (0, 1]")


@dataclass(frozen=True)
class RolloutGroup:
    instance_id: str
    responses: list[str]
    rewards: np.ndarray
    advantages: np.ndarray


def _rings_of(parsed) -> list[list[tuple[float, float]]]:
    if isinstance(parsed, grammar.PolygonText):
        return [list(parsed.vertices)]
    return [list(p.vertices) for p in parsed.polygons]


def _emit(rings: list[list[tuple[float, float]]], decimals: int) -> str:
    def ring_text(ring):
        return "[" + ", ".join(
            f"[{grammar.quantize(x, decimals)}, {grammar.quantize(y, decimals)}]"
            for x, y in ring) + "]"

    if len(rings) == 1:
        return ring_text(rings[0])
    return "[" + ", ".join(ring_text(r) for r in rings) + "]"


def perturb(gt_text: str, spec: PerturbSpec, size: ImageSize,
            decimals: int = grammar.DEFAULT_DECIMALS) -> str:
    """Apply one perturbation to a ground-truth polygon text.

    Coordinate-level kinds re-serialize through the grammar quantizer, so
    Jitter(sigma=0) reproduces the quantized input byte for byte.
    Text-level kinds (truncate, bracket corruption) operate on the raw
    string and generally break parseability.

    Raises:
        grammar.ParseError: gt_text is not valid polygon text.
    """
    parsed = grammar.parse(
        gt_text, (grammar.ShapeKind.POLYGON, grammar.ShapeKind.MULTIPOLYGON))
    rng = CounterRng(spec.seed)

    if spec.kind is PerturbKind.TRUNCATE:
        return gt_text[:int(len(gt_text) * spec.fraction)]
    if spec.kind is PerturbKind.CORRUPT_FORMAT:
        slots = [i for i, c in enumerate(gt_text) if c in "[]"]
        drop = slots[rng.below(len(slots))]
        return gt_text[:drop] + gt_text[drop + 1:]

    rings = _rings_of(parsed)
    if spec.kind is PerturbKind.JITTER:
        out = []
        for ring in rings:
            jittered = []
            for x, y in ring:
                nx = min(max(x + spec.sigma * rng.gauss(), 0.0), 1.0)
                ny = min(max(y + spec.sigma * rng.gauss(), 0.0), 1.0)
                jittered.append((nx, ny))
            out.append(jittered)
        rings = out
    elif spec.kind is PerturbKind.VERTEX_DROPOUT:
        out = []
        for ring in rings:
            kept = []
            for i, v in enumerate(ring):
                remaining = len(ring) - i - 1
                can_drop = len(kept) + remaining >= 3
                if can_drop and rng.uniform() < spec.p:
                    continue
                kept.append(v)
            out.append(kept)
        rings = out
    elif spec.kind is PerturbKind.DUPLICATE_VERTICES:
        out = []
        for ring in rings:
            dup = []
            for v in ring:
                dup.append(v)
                if rng.uniform() < spec.p:
                    dup.append(v)
            out.append(dup)
        rings = out
    elif spec.kind is PerturbKind.SHUFFLE_ORDER:
        out = []
        for ring in rings:
            ring = list(ring)
            rng.shuffle(ring)
            out.append(ring)
        rings = out
    else:
        raise ValueError(f"unhandled perturbation kind {spec.kind!r}")
    return _emit(rings, decimals)


def gen_group(instance_id: str, gt_text: str, gt_mask: np.ndarray,
              specs: list[PerturbSpec], cfg: RewardConfig = RewardConfig(),
              decimals: int = grammar.DEFAULT_DECIMALS) -> RolloutGroup:
    """Perturb, score, and normalize one rollout group.

    Raises:
        ValueError: the number of specs does not match cfg.group_size.
    """
    if len(specs) != cfg.group_size:
        raise ValueError(
            f"got {len(specs)} specs for group_size {cfg.group_size}")
    h, w = gt_mask.shape
    size = ImageSize(w, h)
    responses = [perturb(gt_text, s, size, decimals) for s in specs]
    rewards = np.array(
        [total_reward(t, gt_mask, cfg).total for t in responses], dtype=np.float64)
    return RolloutGroup(instance_id, responses, rewards, group_advantages(rewards))
