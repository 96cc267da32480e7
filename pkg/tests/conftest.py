"""Shared fixtures and seeded generators for the test suite."""

import numpy as np
import pytest
from scipy import ndimage

from trajseg import ImageSize, rasterize

EIGHT_CONN = np.ones((3, 3), dtype=int)


def random_blob_mask(rng: np.random.Generator, n: int = 32) -> np.ndarray | None:
    """Random hole-free single-component mask: smoothed-noise threshold,
    holes filled, largest 8-connected component kept."""
    noise = rng.random((n, n))
    smooth = ndimage.gaussian_filter(noise, sigma=rng.uniform(1.0, 4.0))
    mask = smooth > np.quantile(smooth, rng.uniform(0.55, 0.9))
    mask = ndimage.binary_fill_holes(mask)
    labels, k = ndimage.label(mask, structure=EIGHT_CONN)
    if k == 0:
        return None
    sizes = ndimage.sum(mask, labels, range(1, k + 1))
    mask = labels == (1 + int(np.argmax(sizes)))
    return ndimage.binary_fill_holes(mask)


def random_blob_masks(seed: int, count: int, n: int = 32) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        m = random_blob_mask(rng, n)
        if m is not None and m.any():
            out.append(m)
    return out


def random_mask(rng: np.random.Generator, n: int = 16) -> np.ndarray:
    """Unconstrained random mask (may be empty, multi-part, with holes)."""
    return rng.random((n, n)) < rng.uniform(0.2, 0.8)


def random_convex_mask(rng: np.random.Generator, n: int = 40) -> np.ndarray:
    """Convex mask: rasterized hull of random integer points."""
    from scipy.spatial import ConvexHull

    while True:
        pts = rng.integers(3, n - 3, size=(rng.integers(6, 14), 2)).astype(float)
        try:
            hull = ConvexHull(pts)
        except Exception:
            continue
        ring = pts[hull.vertices]
        mask = rasterize(ring, ImageSize(n, n))
        if mask.sum() >= 12:
            return mask


@pytest.fixture
def square_mask_5x5() -> np.ndarray:
    """3x3 foreground block at rows/cols 1..3 of a 5x5 grid."""
    m = np.zeros((5, 5), dtype=bool)
    m[1:4, 1:4] = True
    return m


@pytest.fixture
def square_ring() -> np.ndarray:
    return np.array([[1.0, 1.0], [3.0, 1.0], [3.0, 3.0], [1.0, 3.0]])
