"""Scoring of model prediction files against ground truth, and the
tolerance-density sweep that trades vertex count against fidelity."""

from __future__ import annotations

import functools
import json
from dataclasses import asdict, dataclass

import numpy as np

from . import codec, dataset, grammar, metrics
from ._parallel import parallel_map
from .geometry import box_iou, mask_bbox

_MASK_SHAPES = (grammar.ShapeKind.POLYGON, grammar.ShapeKind.MULTIPOLYGON)


@dataclass(frozen=True)
class PredictionRecord:
    id: str
    text: str


@dataclass(frozen=True)
class PerSample:
    id: str
    iou: float
    box_iou: float
    parse_ok: bool
    inter: int
    union: int


@dataclass(frozen=True)
class EvalReport:
    corpus: metrics.CorpusScores
    per_sample: list[PerSample]
    config: dict

    def to_json(self) -> str:
        return json.dumps({
            "corpus": asdict(self.corpus),
            "per_sample": [asdict(r) for r in self.per_sample],
            "config": self.config,
        }, ensure_ascii=False, indent=2)


def _score_one(item: tuple[dataset.Instance, str | None]) -> tuple:
    inst, text = item
    gt = dataset.load_mask(inst)
    h, w = gt.shape
    pred = np.zeros_like(gt)
    parse_ok = False
    if text is not None:
        try:
            parsed = grammar.parse(text, _MASK_SHAPES)
            pred = codec.rasterize(grammar.denormalize(parsed, inst.size), inst.size)
            parse_ok = True
        except grammar.ParseError:
            pass
    iou = metrics.mask_iou(pred, gt)
    if pred.any() and gt.any():
        b_iou = box_iou(mask_bbox(pred), mask_bbox(gt))
    else:
        b_iou = 0.0
    inter = int(np.logical_and(pred, gt).sum())
    union = int(np.logical_or(pred, gt).sum())
    hit = pred.any() and gt.any() and b_iou >= 0.5
    return (inst.id, iou, b_iou, parse_ok, inter, union, bool(hit))


def evaluate(preds, gts, jobs: int = 1) -> EvalReport:
    """Score prediction records against ground-truth instances.

    Every GT instance yields one row; predictions with missing ids or
    unparseable text count as parse failures and score zero.  Permuting
    the prediction records leaves the report unchanged.

    Raises:
        ValueError: duplicate GT id.
    """
    by_id: dict[str, str] = {}
    for p in preds:
        rec = p if isinstance(p, PredictionRecord) else PredictionRecord(**p)
        by_id[rec.id] = rec.text
    instances = list(gts)
    seen = set()
    for inst in instances:
        if inst.id in seen:
            raise ValueError(f"duplicate ground-truth id {inst.id!r}")
        seen.add(inst.id)
    if not instances:
        raise ValueError("no ground-truth instances")

    items = [(inst, by_id.get(inst.id)) for inst in instances]
    rows = parallel_map(_score_one, items, jobs)

    per_sample = [PerSample(*r[:6]) for r in rows]
    n = len(rows)
    inter_sum = sum(r[4] for r in rows)
    union_sum = sum(r[5] for r in rows)
    corpus = metrics.CorpusScores(
        ciou=inter_sum / union_sum if union_sum > 0 else 1.0,
        giou=sum(r[1] for r in rows) / n,
        acc_at_05=sum(r[6] for r in rows) / n,
        n_samples=n,
        n_parse_failures=sum(0 if r[3] else 1 for r in rows),
    )
    return EvalReport(corpus, per_sample, {"jobs": jobs, "n_gt": n})


@dataclass(frozen=True)
class SweepRow:
    epsilon_rel: float
    mean_vertices: float
    mean_chars: float
    mean_roundtrip_iou: float


def _sweep_one(item: dataset.Instance, eps_list: tuple, decimals: int):
    gt = dataset.load_mask(item)
    if not gt.any():
        return None
    rings = codec.trace_contours(gt)
    out = []
    for eps in eps_list:
        simplified = [codec.simplify(r, eps) for r in rings]
        text = grammar.serialize(simplified, item.size, decimals)
        rendered = codec.rasterize(simplified, item.size)
        out.append((sum(len(r) for r in simplified), len(text),
                    metrics.mask_iou(rendered, gt)))
    return out


def epsilon_sweep(gts, eps_list, decimals: int = grammar.DEFAULT_DECIMALS,
                  jobs: int = 1, counts_out: dict | None = None) -> list[SweepRow]:
    """Vertex count, character count, and round-trip IoU per tolerance.

    eps_list must be nonempty and ascending.  Empty-mask instances are
    skipped; pass a dict as counts_out to receive {"skipped": n,
    "used": n}.
    """
    eps_values = [codec._coerce_tol(e) for e in eps_list]
    if not eps_values:
        raise ValueError("eps_list must be nonempty")
    if any(b < a for a, b in zip(eps_values, eps_values[1:])):
        raise ValueError("eps_list must be ascending")

    instances = list(gts)
    worker = functools.partial(_sweep_one, eps_list=tuple(eps_values),
                               decimals=decimals)
    results = parallel_map(worker, instances, jobs)
    used = [r for r in results if r is not None]
    if counts_out is not None:
        counts_out["skipped"] = len(results) - len(used)
        counts_out["used"] = len(used)
    if not used:
        raise ValueError("no nonempty instances to sweep")

    rows = []
    n = len(used)
    for k, eps in enumerate(eps_values):
        verts = sum(r[k][0] for r in used)
        chars = sum(r[k][1] for r in used)
        ious = sum(r[k][2] for r in used)
        rows.append(SweepRow(eps, verts / n, chars / n, ious / n))
    return rows


def sweep_to_csv(rows: list[SweepRow]) -> str:
    lines = ["epsilon,mean_vertices,mean_chars,mean_roundtrip_iou"]
    for r in rows:
        lines.append(f"{r.epsilon_rel!r},{r.mean_vertices!r},"
                     f"{r.mean_chars!r},{r.mean_roundtrip_iou!r}")
    return "\n".join(lines) + "\n"
