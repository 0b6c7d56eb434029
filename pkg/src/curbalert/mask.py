"""Curb mask post-processing: contours, orientation, closest pixel, distance.

Masks are instance-labeled uint8 images (0 = background, k >= 1 = curb
instance k). The lower contour is the bottom-most labeled pixel per column;
its fitted line gives the curb's image-plane orientation, and back-projecting
that line onto the ground gives the angle the user must turn to face the curb
squarely.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import (
    AlertZoneConfig,
    CameraModel,
    _ground_from_pixels,
    resolve_sector_center,
    row_to_ground_distance,
)

__all__ = [
    "EmptyInstance",
    "NoCurb",
    "DegenerateContour",
    "CurbMask",
    "LowerContour",
    "OrientationEstimate",
    "lower_contour",
    "average_slope",
    "closest_pixel",
    "select_closest_curb",
    "curb_distance_cm",
    "contour_turn_angle",
    "round_to_five",
    "read_pgm",
    "write_pgm",
]


class EmptyInstance(ValueError):
    """No pixel carries the requested instance label."""


class NoCurb(ValueError):
    """Mask is all background."""


class DegenerateContour(ValueError):
    """Contour spans fewer than two columns; orientation is undefined."""


@dataclass(frozen=True)
class CurbMask:
    """Instance-labeled segmentation mask, shape (height, width), dtype uint8."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {px.shape}")
        if px.dtype != np.uint8:
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", px)

    @property
    def width_px(self) -> int:
        return self.pixels.shape[1]

    @property
    def height_px(self) -> int:
        return self.pixels.shape[0]

    def labels(self) -> list[int]:
        """Instance labels present, ascending."""
        top = int(self.pixels.max(initial=0))
        if top <= 1:
            return [1] if top == 1 else []
        counts = np.bincount(self.pixels.ravel(), minlength=top + 1)
        return [int(v) for v in np.flatnonzero(counts) if v != 0]

    def is_empty(self) -> bool:
        return not bool(self.pixels.any())


@dataclass(frozen=True)
class LowerContour:
    """Bottom edge of one instance: one (col, row) point per occupied column.

    Columns are strictly increasing. Rows are pixel rows (floats allowed for
    synthetic contours built directly in tests).
    """

    points: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        cols = [p[0] for p in self.points]
        if any(c2 <= c1 for c1, c2 in zip(cols, cols[1:])):
            raise ValueError("contour columns must be strictly increasing")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def cols(self) -> np.ndarray:
        return np.array([p[0] for p in self.points], float)

    @property
    def rows(self) -> np.ndarray:
        return np.array([p[1] for p in self.points], float)


@dataclass(frozen=True)
class OrientationEstimate:
    """Image-plane angle of the fitted contour line, y-axis up, CCW positive."""

    angle_deg: float
    rounded_deg: int


def round_to_five(angle_deg: float) -> int:
    """Round to the nearest multiple of 5, halves away from zero."""
    return int(math.copysign(5.0 * math.floor(abs(angle_deg) / 5.0 + 0.5), angle_deg))


def lower_contour(mask: CurbMask, instance: int) -> LowerContour:
    """Bottom-most pixel of ``instance`` in every column that contains one."""
    if instance < 1:
        raise ValueError(f"instance labels start at 1, got {instance}")
    hits = mask.pixels == instance
    if not hits.any():
        raise EmptyInstance(f"no pixel carries label {instance}")
    occupied = hits.any(axis=0)
    # argmax on the flipped mask finds the bottom-most hit per column
    bottom = (mask.height_px - 1) - np.argmax(hits[::-1, :], axis=0)
    cols = np.flatnonzero(occupied)
    return LowerContour(tuple((int(c), int(bottom[c])) for c in cols))


def _fit_line(contour: LowerContour) -> tuple[float, float]:
    """Least-squares row = intercept + slope*col over the contour points."""
    if len(contour) < 2:
        raise DegenerateContour("need at least two contour columns to fit a line")
    slope, intercept = np.polyfit(contour.cols, contour.rows, 1)
    return float(slope), float(intercept)


def average_slope(contour: LowerContour) -> OrientationEstimate:
    """Orientation of the contour's least-squares line.

    Angle is measured with the y-axis up (image rows negated), counter-
    clockwise positive, so a contour whose right end sits higher in the image
    has a positive angle.
    """
    slope_down, _ = _fit_line(contour)
    angle = math.degrees(math.atan(-slope_down))
    return OrientationEstimate(angle_deg=angle, rounded_deg=round_to_five(angle))


def closest_pixel(
    mask: CurbMask, instance: int, sector_center_px: tuple[float, float]
) -> tuple[tuple[int, int], float]:
    """Instance pixel nearest the sector center, with its pixel distance.

    Ties break lexicographically: smaller column first, then smaller row.
    """
    rows, cols = np.nonzero(mask.pixels == instance)
    if rows.size == 0:
        raise EmptyInstance(f"no pixel carries label {instance}")
    cx, cy = sector_center_px
    d2 = (cols - cx) ** 2 + (rows - cy) ** 2
    best = d2.min()
    tie = np.flatnonzero(d2 == best)
    order = np.lexsort((rows[tie], cols[tie]))
    pick = tie[order[0]]
    return (int(cols[pick]), int(rows[pick])), float(math.sqrt(best))


def select_closest_curb(mask: CurbMask, sector_center_px: tuple[float, float]) -> int:
    """Label whose closest pixel is nearest the sector center (ties: smaller label)."""
    labels = mask.labels()
    if not labels:
        raise NoCurb("mask is all background")
    if len(labels) == 1:
        return labels[0]
    best_label, best_dist = labels[0], math.inf
    for label in labels:
        _, dist = closest_pixel(mask, label, sector_center_px)
        if dist < best_dist:
            best_label, best_dist = label, dist
    return best_label


def curb_distance_cm(
    mask: CurbMask, instance: int, cam: CameraModel, cfg: AlertZoneConfig
) -> float:
    """Ground distance of the instance pixel closest to the sector center."""
    center = resolve_sector_center(cfg, cam)
    (col, row), _ = closest_pixel(mask, instance, center)
    return row_to_ground_distance(cam, row)


def contour_turn_angle(cam: CameraModel, contour: LowerContour) -> float:
    """Signed turn-to-perpendicular angle recovered from the contour, degrees.

    Fits the contour line in image space, back-projects its two extreme-column
    points onto the ground plane and measures the ground line's angle against
    the camera's lateral axis, wrapped to (-90, 90]. Positive means the user
    should turn left (the curb recedes to the right), matching the sign of the
    image-plane slope.

    Raises DegenerateContour (< 2 columns) or HorizonError (fitted line exits
    through the horizon).
    """
    slope, intercept = _fit_line(contour)
    c0, c1 = float(contour.cols[0]), float(contour.cols[-1])
    cols = np.array([c0, c1])
    rows = intercept + slope * cols
    lat, fwd = _ground_from_pixels(cam, cols, rows)
    d_lat = float(lat[1] - lat[0])
    d_fwd = float(fwd[1] - fwd[0])
    angle = math.degrees(math.atan2(d_fwd, d_lat))
    if angle > 90.0:
        angle -= 180.0
    elif angle <= -90.0:
        angle += 180.0
    return angle


_PGM_HEADER = re.compile(rb"^P5\s+(?:#[^\n]*\n\s*)*(\d+)\s+(\d+)\s+(\d+)\s")


def read_pgm(path: str | Path) -> CurbMask:
    """Read a binary PGM (P5, maxval <= 255) as an instance mask."""
    data = Path(path).read_bytes()
    m = _PGM_HEADER.match(data)
    if not m:
        raise ValueError(f"{path}: not a binary P5 PGM")
    width, height, maxval = (int(g) for g in m.groups())
    if not 0 < maxval <= 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    body = data[m.end():]
    if len(body) < width * height:
        raise ValueError(f"{path}: truncated pixel data")
    px = np.frombuffer(body[: width * height], dtype=np.uint8).reshape(height, width)
    return CurbMask(px.copy())


def write_pgm(pixels: np.ndarray | CurbMask, path: str | Path) -> None:
    """Write a uint8 image or mask as binary PGM (P5, maxval 255)."""
    if isinstance(pixels, CurbMask):
        pixels = pixels.pixels
    arr = np.asarray(pixels, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {arr.shape}")
    height, width = arr.shape
    header = f"P5\n{width} {height}\n255\n".encode()
    Path(path).write_bytes(header + arr.tobytes())
