"""Serialization and strict parsing of the coordinate text grammar.

Wire format (normative byte layout, coordinates normalized to [0, 1]):

* point         ``[0.200, 0.200]``
* bbox          ``[0.200, 0.200, 0.600, 0.600]``
* polygon       ``[[0.200, 0.200], [0.600, 0.200], [0.600, 0.600]]``
* multipolygon  ``[[[...], ...], [[...], ...]]`` (one extra nesting
  level, emitted only when a contour set has more than one ring)

Elements are separated by a comma plus a single space, values carry a
fixed number of decimals, and there is no other padding.  The parser is
tolerant of arbitrary ASCII whitespace between tokens but rejects every
other deviation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .geometry import BBox, ImageSize, Point, as_polygon

DEFAULT_DECIMALS = 3

_ASCII_WS = " \t\n\r\f\v"
_DIGITS = "0123456789"


class ShapeKind(enum.Enum):
    POINT = "point"
    BBOX = "bbox"
    POLYGON = "polygon"
    MULTIPOLYGON = "multipolygon"


class ParseErrorKind(enum.Enum):
    MALFORMED = "Malformed"
    ODD_TUPLE = "OddTuple"
    OUT_OF_RANGE = "OutOfRange"
    TOO_FEW_VERTICES = "TooFewVertices"
    TRAILING_GARBAGE = "TrailingGarbage"
    WRONG_SHAPE = "WrongShape"


class ParseError(ValueError):
    """Grammar violation with kind and position of the offending byte."""

    def __init__(self, kind: ParseErrorKind, byte_offset: int, detail: str):
        super().__init__(f"{kind.value} at byte {byte_offset}: {detail}")
        self.kind = kind
        self.byte_offset = byte_offset
        self.detail = detail


@dataclass(frozen=True)
class PointText:
    x: float
    y: float

    kind = ShapeKind.POINT


@dataclass(frozen=True)
class BBoxText:
    x1: float
    y1: float
    x2: float
    y2: float

    kind = ShapeKind.BBOX


@dataclass(frozen=True)
class PolygonText:
    vertices: tuple[tuple[float, float], ...]

    kind = ShapeKind.POLYGON


@dataclass(frozen=True)
class MultiPolygonText:
    polygons: tuple[PolygonText, ...]

    kind = ShapeKind.MULTIPOLYGON


TargetText = PointText | BBoxText | PolygonText | MultiPolygonText


def quantize(value: float, decimals: int) -> str:
    """Fixed-decimal text for a normalized coordinate.

    Rounds half away from zero and clamps to [0, 1]; the result always
    prints with exactly ``decimals`` fractional digits.
    """
    scale = 10 ** decimals
    v = value * scale
    f = int(v)
    if v < 0 and v != f:
        f -= 1
    q = f + 1 if v - f >= 0.5 else f
    q = min(max(q, 0), scale)
    return f"{q // scale}.{q % scale:0{decimals}d}"


def _check_decimals(decimals: int) -> None:
    if not isinstance(decimals, int) or not 1 <= decimals <= 6:
        raise ValueError(f"decimals must be an int in [1, 6], got {decimals!r}")


def _check_size(size: ImageSize) -> None:
    if size[0] <= 0 or size[1] <= 0:
        raise ValueError(f"image size must be positive, got {size[0]}x{size[1]}")


def _pair(x: float, y: float, size: ImageSize, decimals: int) -> str:
    return f"[{quantize(x / size[0], decimals)}, {quantize(y / size[1], decimals)}]"


def _ring_text(pts: np.ndarray, size: ImageSize, decimals: int) -> str:
    if len(pts) == 0:
        raise ValueError("cannot serialize an empty ring")
    # degenerate rings (single pixels, width-1 slivers) pad to the 3-pair
    # grammar minimum by repeating the last vertex; the padding is
    # zero-area and rasterizes identically via boundary inclusion
    vertices = [tuple(v) for v in pts]
    while len(vertices) < 3:
        vertices.append(vertices[-1])
    return "[" + ", ".join(_pair(x, y, size, decimals) for x, y in vertices) + "]"


def serialize(geom, size: ImageSize, decimals: int = DEFAULT_DECIMALS) -> str:
    """Serialize a Point, BBox, polygon array, or list of rings.

    Pixel coordinates are normalized by width/height, quantized to
    ``decimals`` places (half away from zero), and clamped to [0, 1].
    A list of rings serializes as a nested multipolygon only when it has
    more than one ring; a single ring serializes as a plain polygon.
    """
    _check_decimals(decimals)
    _check_size(size)
    if isinstance(geom, Point):
        return _pair(geom.x, geom.y, size, decimals)
    if isinstance(geom, BBox):
        qx1 = quantize(geom.x1 / size[0], decimals)
        qy1 = quantize(geom.y1 / size[1], decimals)
        qx2 = quantize(geom.x2 / size[0], decimals)
        qy2 = quantize(geom.y2 / size[1], decimals)
        return f"[{qx1}, {qy1}, {qx2}, {qy2}]"
    if isinstance(geom, np.ndarray) and geom.ndim == 2:
        return _ring_text(as_polygon(geom), size, decimals)
    rings = [as_polygon(r) for r in geom]
    if len(rings) == 0:
        raise ValueError("cannot serialize an empty contour set")
    if len(rings) == 1:
        return _ring_text(rings[0], size, decimals)
    return "[" + ", ".join(_ring_text(r, size, decimals) for r in rings) + "]"


class _Scanner:
    """Cursor over the input with byte-exact error positions."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def byte_offset(self, pos: int | None = None) -> int:
        p = self.pos if pos is None else pos
        return len(self.text[:p].encode("utf-8"))

    def error(self, kind: ParseErrorKind, detail: str, pos: int | None = None):
        raise ParseError(kind, self.byte_offset(pos), detail)

    def skip_ws(self) -> None:
        t, n = self.text, len(self.text)
        while self.pos < n and t[self.pos] in _ASCII_WS:
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            got = self.peek() or "end of input"
            self.error(ParseErrorKind.MALFORMED, f"expected {ch!r}, got {got!r}")
        self.pos += 1

    def number(self) -> float:
        start = self.pos
        t, n = self.text, len(self.text)
        while self.pos < n and t[self.pos] in _DIGITS:
            self.pos += 1
        if self.pos < n and t[self.pos] == ".":
            self.pos += 1
            frac_start = self.pos
            while self.pos < n and t[self.pos] in _DIGITS:
                self.pos += 1
            if self.pos == frac_start:
                self.error(ParseErrorKind.MALFORMED, "digits required after '.'", start)
        if self.pos == start:
            got = self.peek() or "end of input"
            self.error(ParseErrorKind.MALFORMED, f"expected a number, got {got!r}")
        value = float(t[start:self.pos])
        if value > 1.0:
            self.error(ParseErrorKind.OUT_OF_RANGE, f"{t[start:self.pos]} outside [0, 1]", start)
        return value


def _parse_flat(sc: _Scanner) -> PointText | BBoxText:
    # opening '[' already consumed; first number is next
    nums: list[float] = []
    starts: list[int] = []
    while True:
        sc.skip_ws()
        starts.append(sc.pos)
        if len(nums) == 4:
            sc.error(ParseErrorKind.MALFORMED, "flat list may have 2 or 4 numbers")
        nums.append(sc.number())
        sc.skip_ws()
        if sc.peek() == ",":
            sc.pos += 1
            continue
        if sc.peek() == "]":
            sc.pos += 1
            break
        got = sc.peek() or "end of input"
        sc.error(ParseErrorKind.MALFORMED, f"expected ',' or ']', got {got!r}")
    if len(nums) == 2:
        return PointText(nums[0], nums[1])
    if len(nums) == 4:
        x1, y1, x2, y2 = nums
        if x1 > x2 or y1 > y2:
            sc.error(ParseErrorKind.MALFORMED, "bbox corners out of order", starts[0])
        return BBoxText(x1, y1, x2, y2)
    sc.error(ParseErrorKind.MALFORMED,
             f"flat list may have 2 or 4 numbers, got {len(nums)}", sc.pos - 1)


def _parse_number_pair(sc: _Scanner) -> tuple[float, float]:
    # consumes '[x, y]'; anything but exactly two numbers is an OddTuple
    sc.expect("[")
    nums: list[float] = []
    while True:
        sc.skip_ws()
        if len(nums) == 2:
            sc.error(ParseErrorKind.ODD_TUPLE, "coordinate pair has more than 2 numbers")
        nums.append(sc.number())
        sc.skip_ws()
        if sc.peek() == ",":
            sc.pos += 1
            continue
        if sc.peek() == "]":
            if len(nums) != 2:
                sc.error(ParseErrorKind.ODD_TUPLE,
                         f"coordinate pair has {len(nums)} number(s)")
            sc.pos += 1
            return nums[0], nums[1]
        got = sc.peek() or "end of input"
        sc.error(ParseErrorKind.MALFORMED, f"expected ',' or ']', got {got!r}")


def _parse_ring(sc: _Scanner) -> PolygonText:
    # opening '[' consumed; next non-ws char is '[' of the first pair
    vertices: list[tuple[float, float]] = []
    while True:
        sc.skip_ws()
        vertices.append(_parse_number_pair(sc))
        sc.skip_ws()
        if sc.peek() == ",":
            sc.pos += 1
            sc.skip_ws()
            if sc.peek() != "[":
                got = sc.peek() or "end of input"
                sc.error(ParseErrorKind.MALFORMED, f"expected '[', got {got!r}")
            continue
        if sc.peek() == "]":
            if len(vertices) < 3:
                sc.error(ParseErrorKind.TOO_FEW_VERTICES,
                         f"polygon has {len(vertices)} vertex pair(s), needs >= 3")
            sc.pos += 1
            return PolygonText(tuple(vertices))
        got = sc.peek() or "end of input"
        sc.error(ParseErrorKind.MALFORMED, f"expected ',' or ']', got {got!r}")


def _parse_multi(sc: _Scanner) -> MultiPolygonText:
    # opening '[' consumed; next non-ws char is '[' of the first ring
    rings: list[PolygonText] = []
    while True:
        sc.skip_ws()
        sc.expect("[")
        sc.skip_ws()
        if sc.peek() != "[":
            got = sc.peek() or "end of input"
            sc.error(ParseErrorKind.MALFORMED, f"expected '[', got {got!r}")
        rings.append(_parse_ring(sc))
        sc.skip_ws()
        if sc.peek() == ",":
            sc.pos += 1
            continue
        if sc.peek() == "]":
            sc.pos += 1
            return MultiPolygonText(tuple(rings))
        got = sc.peek() or "end of input"
        sc.error(ParseErrorKind.MALFORMED, f"expected ',' or ']', got {got!r}")


def _shape_set(expected) -> set[ShapeKind] | None:
    if expected is None:
        return None
    if isinstance(expected, ShapeKind):
        return {expected}
    return set(expected)


def parse(text: str, expected=None) -> TargetText:
    """Parse grammar text into its shape, strictly.

    Shape is inferred from structure: 2 flat numbers give a point, 4 a
    bbox, a list of pairs a polygon, a list of lists of pairs a
    multipolygon.  ``expected`` (a ShapeKind or collection of them)
    turns a structurally valid but differently shaped value into a
    WrongShape error.

    Raises:
        ParseError: with kind, byte offset, and detail on any violation.
    """
    sc = _Scanner(text)
    sc.skip_ws()
    sc.expect("[")
    sc.skip_ws()
    ch = sc.peek()
    if ch == "[":
        # [[ ... : polygon or multipolygon, decided by the third bracket
        probe = sc.pos + 1
        while probe < len(text) and text[probe] in _ASCII_WS:
            probe += 1
        if probe < len(text) and text[probe] == "[":
            result: TargetText = _parse_multi(sc)
        else:
            result = _parse_ring(sc)
    elif ch in _DIGITS or ch == ".":
        result = _parse_flat(sc)
    else:
        got = ch or "end of input"
        sc.error(ParseErrorKind.MALFORMED, f"expected '[' or a number, got {got!r}")
    sc.skip_ws()
    if sc.pos < len(text):
        sc.error(ParseErrorKind.TRAILING_GARBAGE,
                 f"unexpected {sc.peek()!r} after value")
    allowed = _shape_set(expected)
    if allowed is not None and result.kind not in allowed:
        want = "/".join(sorted(k.value for k in allowed))
        raise ParseError(ParseErrorKind.WRONG_SHAPE, 0,
                         f"expected {want}, got {result.kind.value}")
    return result


def denormalize(t: TargetText, size: ImageSize):
    """Map normalized text values back to continuous pixel coordinates.

    No rounding is applied; the rasterizer consumes floats directly.
    Returns a Point, BBox, (V, 2) array, or list of arrays matching the
    input variant.
    """
    w, h = float(size[0]), float(size[1])
    if isinstance(t, PointText):
        return Point(t.x * w, t.y * h)
    if isinstance(t, BBoxText):
        return BBox(t.x1 * w, t.y1 * h, t.x2 * w, t.y2 * h)
    if isinstance(t, PolygonText):
        pts = np.asarray(t.vertices, dtype=np.float64)
        return pts * np.array([w, h])
    if isinstance(t, MultiPolygonText):
        return [denormalize(p, size) for p in t.polygons]
    raise TypeError(f"not a TargetText: {t!r}")
