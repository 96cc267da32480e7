"""Bidirectional mask <-> point-trajectory conversion.

A mask becomes an ordered list of contour rings (border-pixel centers,
clockwise, canonical start at the top-most then left-most border pixel),
optionally sparsified with a perimeter-relative tolerance; rings render
back to a mask with an even-odd, boundary-inclusive scanline fill over
pixel centers.  For hole-free single-component masks the round trip at
zero tolerance is pixel-exact.

Holes are intentionally dropped: only outer borders are traced, so a
mask with interior holes round-trips to its filled silhouette.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .geometry import ImageSize, as_polygon, signed_area

# 8-neighborhood in clockwise screen order (y grows downward).
_DIRS = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))
_DIR_INDEX = {d: i for i, d in enumerate(_DIRS)}
_W = 4  # index of the West direction


@dataclass(frozen=True)
class SimplifyTolerance:
    """Relative simplification tolerance.

    The absolute pixel tolerance applied to a ring is
    ``epsilon_rel * ring perimeter``, which makes the same epsilon_rel
    behave comparably across image resolutions.
    """

    epsilon_rel: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon_rel) and self.epsilon_rel >= 0.0):
            raise ValueError("epsilon_rel must be finite and >= 0")


def _coerce_tol(tol) -> float:
    if isinstance(tol, SimplifyTolerance):
        return tol.epsilon_rel
    return SimplifyTolerance(float(tol)).epsilon_rel


def _trace_border(buf: bytes, stride: int, sx: int, sy: int) -> list[tuple[int, int]]:
    """Follow the outer border of one 8-connected component.

    ``buf`` is a zero-padded row-major byte grid; (sx, sy) is the
    component's top-most then left-most pixel in unpadded coordinates.
    Walks the Moore neighborhood clockwise starting just after the
    backtrack direction; the walk is a deterministic function of the
    (pixel, backtrack) state, so the ring is the cycle of that orbit.
    """
    deltas = [dx + dy * stride for dx, dy in _DIRS]
    back_from_delta = {dx + dy * stride: _DIR_INDEX[(dx, dy)] for dx, dy in _DIRS}

    start = (sy + 1) * stride + (sx + 1)
    state = (start, _W)
    seen: dict[tuple[int, int], int] = {}
    ring_flat: list[int] = []
    while state not in seen:
        seen[state] = len(ring_flat)
        cur, back = state
        ring_flat.append(cur)
        nxt = -1
        last_bg = cur + deltas[(back + 0) % 8]
        for k in range(1, 9):
            cand = cur + deltas[(back + k) % 8]
            if buf[cand]:
                nxt = cand
                break
            last_bg = cand
        if nxt < 0:
            # isolated pixel: degenerate single-vertex ring
            return [(sx, sy)]
        state = (nxt, back_from_delta[last_bg - nxt])
    cycle = ring_flat[seen[state]:]
    return [(p % stride - 1, p // stride - 1) for p in cycle]


def _canonicalize(ring: list[tuple[int, int]]) -> np.ndarray:
    """Rotate to the top-most/left-most vertex and force clockwise order."""
    start = min(range(len(ring)), key=lambda i: (ring[i][1], ring[i][0]))
    ring = ring[start:] + ring[:start]
    pts = np.asarray(ring, dtype=np.float64)
    if len(pts) >= 3 and signed_area(pts) < 0.0:
        pts = np.concatenate([pts[:1], pts[1:][::-1]])
    return pts


def trace_contours(mask: np.ndarray) -> list[np.ndarray]:
    """Extract one clockwise outer-border ring per 8-connected component.

    Vertices are border-pixel centers in traversal order; each ring
    starts at its component's top-most then left-most pixel.  Rings are
    sorted by descending absolute area (ties keep discovery order).
    Holes are not traced.  An empty mask yields an empty list.

    Single-pixel components yield a degenerate one-vertex ring and thin
    (width-1) parts appear as out-and-back vertex runs; both rasterize
    back to exactly their pixels via boundary inclusion.
    """
    mask = np.ascontiguousarray(np.asarray(mask, dtype=bool))
    if mask.ndim != 2:
        raise ValueError("mask must be 2-D (height, width)")
    if not mask.any():
        return []
    labels, n = ndimage.label(mask, structure=np.ones((3, 3), dtype=int))
    padded = np.zeros((mask.shape[0] + 2, mask.shape[1] + 2), dtype=np.uint8)
    stride = padded.shape[1]
    rings: list[np.ndarray] = []
    for comp in range(1, n + 1):
        comp_mask = labels == comp
        ys, xs = np.nonzero(comp_mask)
        first = np.lexsort((xs, ys))[0]
        padded[1:-1, 1:-1] = comp_mask
        ring = _trace_border(padded.tobytes(), stride, int(xs[first]), int(ys[first]))
        rings.append(_canonicalize(ring))
        padded[1:-1, 1:-1] = 0

    def ring_area(pts: np.ndarray) -> float:
        return abs(signed_area(pts)) if len(pts) >= 3 else 0.0

    order = sorted(range(len(rings)), key=lambda i: (-ring_area(rings[i]), i))
    return [rings[i] for i in order]


def _line_distances(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Perpendicular distance of each point to the line through a and b."""
    ab = b - a
    norm = math.hypot(ab[0], ab[1])
    if norm == 0.0:
        return np.hypot(pts[:, 0] - a[0], pts[:, 1] - a[1])
    cross = (pts[:, 0] - a[0]) * ab[1] - (pts[:, 1] - a[1]) * ab[0]
    return np.abs(cross) / norm


def _dp_chain(xs: list, ys: list, lo: int, hi: int, tol: float, keep) -> None:
    """Douglas-Peucker on the open chain [lo..hi]; marks kept indices.

    Plain-float inner loop: the chains shrink fast, so scalar math beats
    per-call array overhead at contour scale.
    """
    stack = [(lo, hi)]
    while stack:
        i, j = stack.pop()
        if j - i < 2:
            continue
        ax, ay = xs[i], ys[i]
        dx, dy = xs[j] - ax, ys[j] - ay
        norm = math.hypot(dx, dy)
        dmax = -1.0
        k = -1
        if norm == 0.0:
            for m in range(i + 1, j):
                d = math.hypot(xs[m] - ax, ys[m] - ay)
                if d > dmax:
                    dmax, k = d, m
        else:
            for m in range(i + 1, j):
                d = abs((xs[m] - ax) * dy - (ys[m] - ay) * dx)
                if d > dmax:
                    dmax, k = d, m
            dmax /= norm
        if dmax > tol:
            keep[k] = True
            stack.append((i, k))
            stack.append((k, j))


def simplify(poly, tol) -> np.ndarray:
    """Sparsify a closed ring with Douglas-Peucker.

    The ring is split at its two most mutually distant vertices, each
    open chain is simplified with absolute tolerance
    ``epsilon_rel * perimeter`` (a vertex survives only when its offset
    from the chord is strictly greater than the tolerance), and the
    chains are rejoined.  Output vertices are a subset of the input in
    ring order; at least 3 survive.  The input's start vertex stays
    first when it survives, otherwise the output starts at its top-most
    then left-most vertex.  Degenerate rings (< 3 vertices) pass through
    unchanged.
    """
    eps = _coerce_tol(tol)
    pts = as_polygon(poly)
    n = len(pts)
    if n < 3:
        return pts.copy()

    perimeter = float(np.hypot(*(np.roll(pts, -1, axis=0) - pts).T).sum())
    tol_abs = eps * perimeter

    # diameter pair: argmax over the pairwise distance matrix, first hit
    # in C-order for a deterministic tie-break
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = (diff ** 2).sum(axis=2)
    i, j = np.unravel_index(int(np.argmax(d2)), d2.shape)
    if i > j:
        i, j = j, i

    keep = np.zeros(n, dtype=bool)
    keep[i] = keep[j] = True
    xs, ys = pts[:, 0].tolist(), pts[:, 1].tolist()
    _dp_chain(xs, ys, i, j, tol_abs, keep)
    # wrap-around chain j..i laid out on a rolled copy sharing indices mod n
    rolled = np.roll(pts, -j, axis=0)
    keep_r = np.zeros(n, dtype=bool)
    _dp_chain(rolled[:, 0].tolist(), rolled[:, 1].tolist(), 0, (i - j) % n,
              tol_abs, keep_r)
    keep |= np.roll(keep_r, j)

    if keep.sum() < 3:
        # everything was within tolerance of the diameter chord; retain
        # the farthest offender to keep a ring
        d = _line_distances(pts, pts[i], pts[j])
        d[i] = d[j] = -1.0
        keep[int(np.argmax(d))] = True

    order = np.arange(n)
    kept = order[keep]
    if keep[0]:
        first = 0
    else:
        cand = kept[np.lexsort((pts[kept, 0], pts[kept, 1]))]
        first = int(cand[0])
    kept = np.concatenate([kept[kept >= first], kept[kept < first]])
    return pts[kept]


def _rings_list(rings) -> list[np.ndarray]:
    if isinstance(rings, np.ndarray) and rings.ndim == 2:
        return [as_polygon(rings)]
    return [as_polygon(r) for r in rings]


def rasterize(rings, size: ImageSize) -> np.ndarray:
    """Scanline even-odd fill over pixel centers, boundary inclusive.

    A pixel is foreground iff its center is strictly inside the union of
    rings under the even-odd rule, or lies exactly on any ring edge or
    vertex.  Geometry outside the grid is clipped.  Degenerate rings
    (< 3 distinct vertices) contribute boundary pixels only.
    """
    w, h = int(size[0]), int(size[1])
    if w <= 0 or h <= 0:
        raise ValueError(f"image size must be positive, got {w}x{h}")
    out = np.zeros((h, w), dtype=bool)
    polys = _rings_list(rings)
    if not polys:
        return out

    ex0, ey0, ex1, ey1 = [], [], [], []
    for pts in polys:
        if len(pts) == 0:
            continue
        closed = np.concatenate([pts, pts[:1]])
        ex0.append(closed[:-1, 0])
        ey0.append(closed[:-1, 1])
        ex1.append(closed[1:, 0])
        ey1.append(closed[1:, 1])
        # vertices that coincide with an in-grid pixel center are boundary
        vx, vy = pts[:, 0], pts[:, 1]
        on = (vx == np.round(vx)) & (vy == np.round(vy))
        on &= (vx >= 0) & (vx <= w - 1) & (vy >= 0) & (vy <= h - 1)
        if on.any():
            out[vy[on].astype(int), vx[on].astype(int)] = True
    x0 = np.concatenate(ex0)
    y0 = np.concatenate(ey0)
    x1 = np.concatenate(ex1)
    y1 = np.concatenate(ey1)

    _fill_parity(out, x0, y0, x1, y1, w, h)
    _mark_boundary(out, x0, y0, x1, y1, w, h)
    return out


def _edge_rows(ylo: np.ndarray, yhi: np.ndarray, h: int):
    """Flat (edge_index, row) pairs for integer rows in [ylo, yhi) per edge."""
    lo = np.maximum(np.ceil(ylo), 0.0)
    hi = np.minimum(np.ceil(yhi), float(h))
    counts = np.maximum(hi - lo, 0.0).astype(np.int64)
    total = int(counts.sum())
    if total == 0:
        return None, None
    idx = np.repeat(np.arange(len(counts)), counts)
    starts = np.repeat(lo.astype(np.int64), counts)
    offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    return idx, (starts + offs).astype(np.int64)


def _fill_parity(out, x0, y0, x1, y1, w, h) -> None:
    non_horiz = y0 != y1
    if not non_horiz.any():
        return
    bx0, by0 = x0[non_horiz], y0[non_horiz]
    bx1, by1 = x1[non_horiz], y1[non_horiz]
    ylo = np.minimum(by0, by1)
    yhi = np.maximum(by0, by1)
    idx, rows = _edge_rows(ylo, yhi, h)
    if idx is None:
        return
    xs = bx0[idx] + (rows - by0[idx]) * (bx1[idx] - bx0[idx]) / (by1[idx] - by0[idx])
    # pixel px is interior iff the number of crossings with x <= px is odd
    cols = np.ceil(xs)
    valid = cols <= w - 1
    cols = np.clip(cols[valid], 0, w - 1).astype(np.int64)
    rows = rows[valid]
    toggles = np.bincount(rows * w + cols, minlength=h * w).reshape(h, w)
    out |= np.cumsum(toggles, axis=1) % 2 == 1


def _mark_boundary(out, x0, y0, x1, y1, w, h) -> None:
    # horizontal edges lying exactly on a pixel row
    horiz = (y0 == y1) & (y0 == np.round(y0)) & (y0 >= 0) & (y0 <= h - 1)
    for e in np.nonzero(horiz)[0]:
        lo = int(np.ceil(min(x0[e], x1[e])))
        hi = int(np.floor(max(x0[e], x1[e])))
        if hi >= 0 and lo <= w - 1:
            out[int(y0[e]), max(lo, 0):min(hi, w - 1) + 1] = True
    # non-horizontal edges: lattice points where the exact x at an integer
    # row is itself an integer (exact for integer-vertex contours)
    non_horiz = y0 != y1
    if not non_horiz.any():
        return
    bx0, by0 = x0[non_horiz], y0[non_horiz]
    bx1, by1 = x1[non_horiz], y1[non_horiz]
    ylo = np.minimum(by0, by1)
    yhi = np.maximum(by0, by1) + 1.0  # closed range: include the top endpoint row
    idx, rows = _edge_rows(ylo, yhi, h)
    if idx is None:
        return
    inside = rows <= np.maximum(by0, by1)[idx]
    idx, rows = idx[inside], rows[inside]
    xs = bx0[idx] + (rows - by0[idx]) * (bx1[idx] - bx0[idx]) / (by1[idx] - by0[idx])
    hit = (xs == np.round(xs)) & (xs >= 0) & (xs <= w - 1)
    out[rows[hit], xs[hit].astype(np.int64)] = True


def rasterize_like(rings, mask: np.ndarray) -> np.ndarray:
    """Rasterize onto the grid of an existing mask."""
    h, w = mask.shape
    return rasterize(rings, ImageSize(w, h))


def roundtrip(mask: np.ndarray, tol) -> np.ndarray:
    """trace -> simplify -> rasterize composition on the mask's own grid."""
    mask = np.asarray(mask, dtype=bool)
    rings = [simplify(r, tol) for r in trace_contours(mask)]
    h, w = mask.shape
    return rasterize(rings, ImageSize(w, h))
