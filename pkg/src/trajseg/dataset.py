"""Instance ingestion and unified query-pair instruction data.

Annotations arrive as COCO-style JSON (polygon or RLE segmentations) or
as id-named PNG masks; each instance yields mechanically derived weak
labels (centroid point, min/max box, traced polygon text) that are
recombined into (input -> output) task pairs over the
{text, point, bbox, mask} element set and emitted as JSONL.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
from PIL import Image

from . import codec, grammar
from ._rng import derive_seed
from .geometry import BBox, EmptyMaskError, ImageSize, Point, mask_bbox, mask_centroid


class RleFormatError(ValueError):
    """Malformed RLE payload; carries the offending position."""

    def __init__(self, detail: str, offset: int = 0):
        super().__init__(f"{detail} (at {offset})")
        self.offset = offset


# ---------------------------------------------------------------------------
# COCO run-length codec (column-major scan, background-first runs)
# ---------------------------------------------------------------------------

def decode_rle(counts, size: ImageSize) -> np.ndarray:
    """Decode uncompressed counts or a compressed count string to a mask.

    The scan order is column-major (index = column * height + row) and
    runs alternate background/foreground starting with background; a
    leading zero-length run encodes a mask that starts with foreground.

    Raises:
        RleFormatError: run sum does not match the grid, or the
        compressed string is malformed.
    """
    w, h = int(size[0]), int(size[1])
    if isinstance(counts, (str, bytes)):
        counts = rle_from_string(counts)
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise RleFormatError("negative run length")
    total = sum(counts)
    if total != w * h:
        raise RleFormatError(f"run sum {total} != {w}x{h} pixels", len(counts))
    flat = np.zeros(w * h, dtype=bool)
    pos = 0
    value = False
    for c in counts:
        if value:
            flat[pos:pos + c] = True
        pos += c
        value = not value
    return flat.reshape((w, h)).T


def encode_rle(mask: np.ndarray) -> list[int]:
    """Uncompressed column-major counts; inverse of decode_rle.

    Canonical form: no zero-length interior runs, and a leading 0 only
    when the first pixel is foreground.
    """
    flat = np.asarray(mask, dtype=bool).T.reshape(-1)
    counts: list[int] = []
    if len(flat) == 0:
        return [0]
    changes = np.nonzero(np.diff(flat))[0] + 1
    bounds = np.concatenate([[0], changes, [len(flat)]])
    runs = np.diff(bounds).tolist()
    if flat[0]:
        counts.append(0)
    counts.extend(int(r) for r in runs)
    return counts


def rle_to_string(counts: Iterable[int]) -> str:
    """Pack counts into the COCO char string (6 bits/char, offset 48).

    Each count is emitted low bits first, 5 payload bits per char with
    bit 0x20 as the continuation flag; counts from the 4th on are stored
    as signed deltas against the count two places back.
    """
    counts = [int(c) for c in counts]
    out = []
    for i, c in enumerate(counts):
        x = c - counts[i - 2] if i > 2 else c
        more = True
        while more:
            ch = x & 0x1F
            x >>= 5
            more = (x != -1) if (ch & 0x10) else (x != 0)
            if more:
                ch |= 0x20
            out.append(chr(ch + 48))
    return "".join(out)


def rle_from_string(s) -> list[int]:
    """Unpack a COCO char string into counts.

    Raises:
        RleFormatError: character outside the packed alphabet, truncated
        continuation, or a negative reconstructed count.
    """
    if isinstance(s, bytes):
        s = s.decode("ascii", errors="replace")
    counts: list[int] = []
    p = 0
    n = len(s)
    while p < n:
        x = 0
        k = 0
        start = p
        while True:
            if p >= n:
                raise RleFormatError("truncated count", start)
            ch = ord(s[p]) - 48
            if not 0 <= ch < 64:
                raise RleFormatError(f"invalid character {s[p]!r}", p)
            x |= (ch & 0x1F) << (5 * k)
            p += 1
            k += 1
            if not ch & 0x20:
                if ch & 0x10:
                    x |= -1 << (5 * k)
                break
        if len(counts) > 2:
            x += counts[-2]
        if x < 0:
            raise RleFormatError(f"negative count {x}", start)
        counts.append(x)
    return counts


# ---------------------------------------------------------------------------
# Instances
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolygonSource:
    """Pixel-coordinate rings, COCO ``segmentation`` polygon style."""

    rings: tuple

    @classmethod
    def from_flat(cls, flat_lists) -> "PolygonSource":
        rings = []
        for flat in flat_lists:
            arr = np.asarray(flat, dtype=np.float64)
            if arr.ndim == 1:
                arr = arr.reshape(-1, 2)
            rings.append(arr)
        return cls(tuple(rings))


@dataclass(frozen=True)
class RleSource:
    counts: tuple | str
    size: tuple  # (height, width), COCO order


@dataclass(frozen=True)
class MaskFileSource:
    path: str


@dataclass(frozen=True)
class Instance:
    id: str
    image_ref: str
    size: ImageSize
    mask_source: PolygonSource | RleSource | MaskFileSource
    caption: str | None = None


def load_mask(inst: Instance) -> np.ndarray:
    """Materialize the instance's binary mask on its image grid."""
    src = inst.mask_source
    if isinstance(src, PolygonSource):
        return codec.rasterize(list(src.rings), inst.size)
    if isinstance(src, RleSource):
        counts = src.counts if isinstance(src.counts, str) else list(src.counts)
        return decode_rle(counts, ImageSize(src.size[1], src.size[0]))
    if isinstance(src, MaskFileSource):
        return load_mask_png(src.path)
    raise TypeError(f"unknown mask source {src!r}")


def load_mask_png(path) -> np.ndarray:
    """Single-channel PNG: 0 is background, >= 128 is foreground."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"))
    return arr >= 128


def save_mask_png(mask: np.ndarray, path) -> None:
    Image.fromarray(np.asarray(mask, dtype=bool).astype(np.uint8) * 255).save(
        path, format="PNG")


def load_coco(path) -> Iterator[Instance]:
    """Instances from COCO-style annotation JSON (images[], annotations[])."""
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    images = {img["id"]: img for img in doc.get("images", [])}
    for ann in doc.get("annotations", []):
        img = images.get(ann["image_id"])
        if img is None:
            raise KeyError(f"annotation {ann.get('id')} references unknown image "
                           f"{ann['image_id']}")
        size = ImageSize(int(img["width"]), int(img["height"]))
        seg = ann["segmentation"]
        if isinstance(seg, dict):
            counts = seg["counts"]
            source: PolygonSource | RleSource = RleSource(
                counts if isinstance(counts, str) else tuple(counts),
                tuple(seg["size"]))
        else:
            source = PolygonSource.from_flat(seg)
        yield Instance(
            id=str(ann.get("id", f"{ann['image_id']}-{len(images)}")),
            image_ref=str(img.get("file_name", img["id"])),
            size=size,
            mask_source=source,
            caption=ann.get("caption"),
        )


def load_mask_dir(directory, captions: dict | None = None) -> Iterator[Instance]:
    """Instances from a directory of id-named PNG masks."""
    captions = captions or {}
    for path in sorted(Path(directory).glob("*.png")):
        mask = load_mask_png(path)
        h, w = mask.shape
        yield Instance(
            id=path.stem,
            image_ref=str(path),
            size=ImageSize(w, h),
            mask_source=MaskFileSource(str(path)),
            caption=captions.get(path.stem),
        )


# ---------------------------------------------------------------------------
# Task kinds and templates
# ---------------------------------------------------------------------------

class TaskKind(enum.Enum):
    """(input -> output) pairs over {text, point, bbox, mask}.

    Text is never an output: captions come from upstream annotators, not
    from this toolkit.
    """

    TEXT_TO_POINT = "text->point"
    TEXT_TO_BBOX = "text->bbox"
    TEXT_TO_MASK = "text->mask"
    POINT_TO_BBOX = "point->bbox"
    POINT_TO_MASK = "point->mask"
    BBOX_TO_POINT = "bbox->point"
    BBOX_TO_MASK = "bbox->mask"
    MASK_TO_POINT = "mask->point"
    MASK_TO_BBOX = "mask->bbox"

    @property
    def input(self) -> str:
        return self.value.split("->")[0]

    @property
    def output(self) -> str:
        return self.value.split("->")[1]


ALL_TASKS = tuple(TaskKind)

DEFAULT_TEMPLATES: dict[TaskKind, list[str]] = {
    TaskKind.TEXT_TO_POINT: [
        "Point to {target}.",
        "Give the point coordinates of {target}.",
    ],
    TaskKind.TEXT_TO_BBOX: [
        "Give the bounding box of {target}.",
        "Where is {target}? Answer with a bounding box.",
    ],
    TaskKind.TEXT_TO_MASK: [
        "Give the polygon outlining {target}.",
        "Trace the contour of {target}.",
    ],
    TaskKind.POINT_TO_BBOX: ["Give the bounding box of the object at {target}."],
    TaskKind.POINT_TO_MASK: ["Give the polygon of the object at {target}."],
    TaskKind.BBOX_TO_POINT: ["Give a point on the object inside {target}."],
    TaskKind.BBOX_TO_MASK: ["Give the polygon of the object inside {target}."],
    TaskKind.MASK_TO_POINT: ["Give a point on the object outlined by {target}."],
    TaskKind.MASK_TO_BBOX: ["Give the bounding box of the object outlined by {target}."],
}


def load_templates(path) -> dict[TaskKind, list[str]]:
    """Line-oriented template file: ``[task->kind]`` headers, one template
    per following line, ``{target}`` as the input placeholder."""
    templates: dict[TaskKind, list[str]] = {}
    current: TaskKind | None = None
    by_value = {t.value: t for t in TaskKind}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            stripped = line.strip()
            if stripped.startswith("[") and stripped.endswith("]"):
                name = stripped[1:-1].strip()
                if name not in by_value:
                    raise ValueError(f"{path}:{lineno}: unknown task kind {name!r}")
                current = by_value[name]
                templates.setdefault(current, [])
            elif current is None:
                raise ValueError(f"{path}:{lineno}: template before any [task] header")
            else:
                templates[current].append(stripped)
    return templates


# ---------------------------------------------------------------------------
# Weak labels and query pairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TargetBundle:
    """Serialized weak labels shared by all tasks of one instance."""

    caption: str | None
    point: Point
    bbox: BBox
    point_text: str
    bbox_text: str
    polygon_text: str
    mask: np.ndarray


@dataclass(frozen=True)
class QueryPair:
    instance_id: str
    image_ref: str
    task: TaskKind
    prompt: str
    response: str

    def to_json_line(self) -> str:
        return json.dumps({
            "id": self.instance_id,
            "image": self.image_ref,
            "task": self.task.value,
            "prompt": self.prompt,
            "response": self.response,
        }, ensure_ascii=False)


def derive_targets(inst: Instance, tol=0.0,
                   decimals: int = grammar.DEFAULT_DECIMALS) -> TargetBundle:
    """Materialize the mask and derive point/box/polygon targets.

    Raises:
        EmptyMaskError: decoded mask has no foreground (skip the record).
        RleFormatError: undecodable mask source.
    """
    mask = load_mask(inst)
    if not mask.any():
        raise EmptyMaskError(f"instance {inst.id}: empty mask")
    point = mask_centroid(mask)
    bbox = mask_bbox(mask)
    rings = [codec.simplify(r, tol) for r in codec.trace_contours(mask)]
    return TargetBundle(
        caption=inst.caption,
        point=point,
        bbox=bbox,
        point_text=grammar.serialize(point, inst.size, decimals),
        bbox_text=grammar.serialize(bbox, inst.size, decimals),
        polygon_text=grammar.serialize(rings, inst.size, decimals),
        mask=mask,
    )


def _input_text(bundle: TargetBundle, task: TaskKind) -> str | None:
    return {
        "text": bundle.caption,
        "point": bundle.point_text,
        "bbox": bundle.bbox_text,
        "mask": bundle.polygon_text,
    }[task.input]


def _output_text(bundle: TargetBundle, task: TaskKind) -> str:
    return {
        "point": bundle.point_text,
        "bbox": bundle.bbox_text,
        "mask": bundle.polygon_text,
    }[task.output]


def generate_pairs(inst: Instance, tasks: Iterable[TaskKind] = ALL_TASKS,
                   templates: dict[TaskKind, list[str]] | None = None,
                   tol=0.0, seed: int = 0,
                   decimals: int = grammar.DEFAULT_DECIMALS) -> list[QueryPair]:
    """One QueryPair per satisfiable task for one instance.

    Template choice among alternatives is uniform under a generator
    keyed on (seed, instance id, task kind), so output is byte-identical
    across runs.  Tasks whose input is unavailable (no caption) are
    skipped.
    """
    templates = templates if templates is not None else DEFAULT_TEMPLATES
    bundle = derive_targets(inst, tol, decimals)
    pairs: list[QueryPair] = []
    for task in tasks:
        target = _input_text(bundle, task)
        if target is None:
            continue
        options = templates.get(task)
        if not options:
            raise ValueError(f"no templates for task {task.value}")
        pick = derive_seed(seed, inst.id, task.value) % len(options)
        prompt = options[pick].replace("{target}", target)
        pairs.append(QueryPair(inst.id, inst.image_ref, task, prompt,
                               _output_text(bundle, task)))
    return pairs
