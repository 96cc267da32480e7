"""Core geometric types and exact primitive computations.

Conventions used throughout the package:

* Image coordinates: x grows rightward, y grows downward.
* A polygon is an (V, 2) float array of ``[x, y]`` vertices forming an
  implicitly closed ring (last vertex connects back to the first).
* Orientation: the shoelace sum is positive for clockwise rings under
  the y-down convention above.  This sign convention is normative for
  the whole package.
* A binary mask is a (height, width) boolean array; pixel (x, y) is the
  unit square centered on the integer lattice point (x, y).
* Bounding boxes denote inclusive pixel ranges, so a box covering a
  single pixel has width x2 - x1 + 1 = 1.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


class Point(NamedTuple):
    x: float
    y: float


class ImageSize(NamedTuple):
    width: int
    height: int


class BBox(NamedTuple):
    x1: float
    y1: float
    x2: float
    y2: float


class EmptyMaskError(ValueError):
    """Raised when an operation needs at least one foreground pixel."""


def size_of(mask: np.ndarray) -> ImageSize:
    """Image size of a (height, width) boolean mask."""
    h, w = mask.shape
    return ImageSize(int(w), int(h))


def as_polygon(vertices) -> np.ndarray:
    """Coerce vertex data to an (V, 2) float64 array and validate it.

    Args:
        vertices: anything ``np.asarray`` accepts with shape (V, 2).

    Returns:
        (V, 2) float64 array.

    Raises:
        ValueError: wrong shape, or non-finite coordinates.
    """
    pts = np.asarray(vertices, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"polygon must have shape (V, 2), got {pts.shape}")
    if not np.isfinite(pts).all():
        raise ValueError("polygon vertices must be finite")
    return pts


def signed_area(poly) -> float:
    """Signed shoelace area of a closed ring.

    Positive for clockwise rings in y-down image coordinates.  The edge
    terms are combined with a correctly-rounded sum, so reversing the
    vertex order negates the result exactly.

    Raises:
        ValueError: fewer than 3 vertices.
    """
    pts = as_polygon(poly)
    if len(pts) < 3:
        raise ValueError("signed_area needs at least 3 vertices")
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * math.fsum((x * yn - xn * y).tolist())


def is_clockwise(poly) -> bool:
    """True iff the ring is clockwise (positive shoelace area).

    Zero-area rings report False.
    """
    return signed_area(poly) > 0.0


def polygon_centroid(poly) -> Point:
    """Area-weighted centroid of a closed ring (shoelace centroid formula).

    Raises:
        ValueError: zero-area polygon.  Callers that must stay defined on
        degenerate rings should fall back to the vertex mean.
    """
    pts = as_polygon(poly)
    area = signed_area(pts)
    if area == 0.0:
        raise ValueError("centroid of zero-area polygon is undefined")
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    cx = float(np.sum((x + xn) * cross) / (6.0 * area))
    cy = float(np.sum((y + yn) * cross) / (6.0 * area))
    return Point(cx, cy)


def vertex_mean(poly) -> Point:
    """Arithmetic mean of the vertices (fallback centroid for degenerate rings)."""
    pts = as_polygon(poly)
    if len(pts) == 0:
        raise ValueError("vertex_mean of empty vertex list")
    return Point(float(pts[:, 0].mean()), float(pts[:, 1].mean()))


def mask_bbox(mask: np.ndarray) -> BBox:
    """Tightest integer box over the foreground pixels (min/max of x and y).

    Raises:
        EmptyMaskError: no foreground pixels.
    """
    ys, xs = np.nonzero(mask)
    if len(xs) == 0:
        raise EmptyMaskError("mask has no foreground pixels")
    return BBox(int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))


def mask_centroid(mask: np.ndarray) -> Point:
    """Mean foreground coordinate, snapped onto the object if necessary.

    If the pixel containing the raw mean is background (concave or
    multi-part masks), the result snaps to the nearest foreground pixel
    center; ties break on smaller y, then smaller x, so derived point
    prompts are reproducible and always lie on the object.

    Raises:
        EmptyMaskError: no foreground pixels.
    """
    ys, xs = np.nonzero(mask)
    if len(xs) == 0:
        raise EmptyMaskError("mask has no foreground pixels")
    cx = float(xs.mean())
    cy = float(ys.mean())
    h, w = mask.shape
    px = int(np.floor(cx + 0.5))
    py = int(np.floor(cy + 0.5))
    if 0 <= px < w and 0 <= py < h and mask[py, px]:
        return Point(cx, cy)
    d2 = (xs - cx) ** 2 + (ys - cy) ** 2
    best = np.lexsort((xs, ys, d2))[0]
    return Point(float(xs[best]), float(ys[best]))


def box_iou(a: BBox, b: BBox) -> float:
    """IoU of two boxes using inclusive integer-pixel extents (x2 - x1 + 1)."""
    iw = min(a.x2, b.x2) - max(a.x1, b.x1) + 1
    ih = min(a.y2, b.y2) - max(a.y1, b.y1) + 1
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    area_a = (a.x2 - a.x1 + 1) * (a.y2 - a.y1 + 1)
    area_b = (b.x2 - b.x1 + 1) * (b.y2 - b.y1 + 1)
    return float(inter / (area_a + area_b - inter))
