"""Pinhole ground-plane geometry and alert-zone classification.

A forward-facing camera at a known height and downward tilt observes flat
ground, so every pixel row below the horizon maps to a unique forward
distance. Distances are grouped into three nested alert zones (far, medium,
near); far is split into four sub-levels and medium into three, each with its
own beep parameters.

Zone boundaries are half-open, closed at the far end, so the printed
endpoints 257/230/202/174/146/123/107/90 form an exact partition of the
nonnegative reals:

    near   [0, 90)
    medium [90, 107) / [107, 123) / [123, 146)   (sub-levels 3, 2, 1)
    far    [146, 174) / [174, 202) / [202, 230) / [230, 257]   (4, 3, 2, 1)
    none   (257, inf)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

__all__ = [
    "HorizonError",
    "OutOfFrame",
    "CameraModel",
    "Zone",
    "ZoneLevel",
    "NO_ALERT",
    "AlertZoneConfig",
    "row_to_ground_distance",
    "ground_distance_to_row",
    "classify_distance",
    "sector_center_px",
    "ZoneRadiiPx",
    "zone_radii_px",
    "GroundPoint",
    "image_point_to_ground",
]


class HorizonError(ValueError):
    """View ray at or above the horizon; no ground intersection exists."""


class OutOfFrame(ValueError):
    """Projected point falls outside the image bounds."""


@dataclass(frozen=True)
class CameraModel:
    """Forward-facing pinhole camera mounted above the ground.

    ``tilt_deg`` is the downward pitch of the optical axis.
    ``vertical_fov_deg`` spans the full image height; pixels are assumed
    square, so the focal length derived from it also applies horizontally.
    """

    height_cm: float = 135.0
    tilt_deg: float = 30.0
    vertical_fov_deg: float = 60.0
    image_width_px: int = 640
    image_height_px: int = 480

    def __post_init__(self) -> None:
        if self.height_cm <= 0:
            raise ValueError(f"height_cm must be positive, got {self.height_cm}")
        if not 0.0 < self.tilt_deg < 90.0:
            raise ValueError(f"tilt_deg must lie in (0, 90), got {self.tilt_deg}")
        if not 0.0 < self.vertical_fov_deg < 180.0:
            raise ValueError(
                f"vertical_fov_deg must lie in (0, 180), got {self.vertical_fov_deg}"
            )
        if self.image_width_px < 1 or self.image_height_px < 1:
            raise ValueError("image dimensions must be positive")

    @property
    def focal_px(self) -> float:
        """Focal length in pixels derived from the vertical field of view."""
        return (self.image_height_px / 2.0) / math.tan(
            math.radians(self.vertical_fov_deg) / 2.0
        )

    @property
    def principal_row(self) -> float:
        return self.image_height_px / 2.0

    @property
    def principal_col(self) -> float:
        return self.image_width_px / 2.0

    @property
    def horizon_row(self) -> float:
        """Row at which the view ray runs level with the ground."""
        return self.principal_row - self.focal_px * math.tan(math.radians(self.tilt_deg))


def row_to_ground_distance(cam: CameraModel, row: float) -> float:
    """Forward ground distance (cm) seen at a pixel row (0 = image top).

    Raises HorizonError when the row is at or above the horizon.
    """
    depression = math.radians(cam.tilt_deg) + math.atan(
        (row - cam.principal_row) / cam.focal_px
    )
    if depression <= 0.0:
        raise HorizonError(
            f"row {row} looks {math.degrees(-depression):.3f} deg above the horizon"
        )
    return cam.height_cm / math.tan(depression)


def ground_distance_to_row(
    cam: CameraModel, distance_cm: float, allow_outside: bool = False
) -> float:
    """Real-valued pixel row where a forward ground distance projects.

    Exact inverse of :func:`row_to_ground_distance`. By default raises
    OutOfFrame when the row leaves [0, image_height]; pass
    ``allow_outside=True`` to get the extrapolated row instead (used e.g. for
    the sector center, which sits below the frame).
    """
    if distance_cm <= 0:
        raise ValueError(f"distance_cm must be positive, got {distance_cm}")
    depression = math.atan2(cam.height_cm, distance_cm)
    row = cam.principal_row + cam.focal_px * math.tan(
        depression - math.radians(cam.tilt_deg)
    )
    if not allow_outside and not 0.0 <= row <= cam.image_height_px:
        raise OutOfFrame(
            f"distance {distance_cm} cm projects to row {row:.2f}, "
            f"outside [0, {cam.image_height_px}]"
        )
    return row


class Zone(str, Enum):
    NONE = "none"
    FAR = "far"
    MEDIUM = "medium"
    NEAR = "near"


_SUBLEVEL_COUNT = {Zone.FAR: 4, Zone.MEDIUM: 3}


@dataclass(frozen=True)
class ZoneLevel:
    """Alert-zone classification: far carries sub-level 1..4, medium 1..3."""

    zone: Zone
    sublevel: int | None = None

    def __post_init__(self) -> None:
        want = _SUBLEVEL_COUNT.get(self.zone)
        if want is None:
            if self.sublevel is not None:
                raise ValueError(f"{self.zone.value} carries no sublevel")
        elif self.sublevel is None or not 1 <= self.sublevel <= want:
            raise ValueError(
                f"{self.zone.value} sublevel must be 1..{want}, got {self.sublevel}"
            )

    @property
    def proximity_rank(self) -> int:
        """Strictly increases as the zone gets closer: none=0 ... near=8."""
        if self.zone is Zone.NONE:
            return 0
        if self.zone is Zone.FAR:
            return self.sublevel  # type: ignore[return-value]
        if self.zone is Zone.MEDIUM:
            return 4 + self.sublevel  # type: ignore[operator]
        return 8

    @property
    def is_alert(self) -> bool:
        return self.zone is not Zone.NONE


NO_ALERT = ZoneLevel(Zone.NONE)


@dataclass(frozen=True)
class AlertZoneConfig:
    """Zone boundaries in cm plus the sector center the user stands at.

    Sub-level bounds are the interior cuts of their zone, descending.
    ``sector_center_px`` is normally None and derived from the camera
    (central column, extrapolated row of ground distance zero).
    """

    far_max_cm: float = 257.0
    far_min_cm: float = 146.0
    medium_min_cm: float = 90.0
    far_sub_bounds_cm: tuple[float, ...] = (230.0, 202.0, 174.0)
    medium_sub_bounds_cm: tuple[float, ...] = (123.0, 107.0)
    sector_center_px: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if not self.far_max_cm >= self.far_min_cm > self.medium_min_cm > 0:
            raise ValueError(
                "zone boundaries must satisfy far_max >= far_min > medium_min > 0"
            )
        for bounds, lo, hi in (
            (self.far_sub_bounds_cm, self.far_min_cm, self.far_max_cm),
            (self.medium_sub_bounds_cm, self.medium_min_cm, self.far_min_cm),
        ):
            if any(b2 >= b1 for b1, b2 in zip(bounds, bounds[1:])):
                raise ValueError(f"sub-level bounds must be strictly decreasing: {bounds}")
            if bounds and not (lo < bounds[-1] and bounds[0] < hi):
                raise ValueError(f"sub-level bounds {bounds} must lie inside ({lo}, {hi})")


def classify_distance(cfg: AlertZoneConfig, distance_cm: float) -> ZoneLevel:
    """Map a nonnegative ground distance to its zone and sub-level."""
    if distance_cm < 0 or math.isnan(distance_cm):
        raise ValueError(f"distance_cm must be nonnegative, got {distance_cm}")
    if distance_cm > cfg.far_max_cm:
        return NO_ALERT
    if distance_cm >= cfg.far_min_cm:
        sub = 1 + sum(distance_cm < b for b in cfg.far_sub_bounds_cm)
        return ZoneLevel(Zone.FAR, sub)
    if distance_cm >= cfg.medium_min_cm:
        sub = 1 + sum(distance_cm < b for b in cfg.medium_sub_bounds_cm)
        return ZoneLevel(Zone.MEDIUM, sub)
    return ZoneLevel(Zone.NEAR)


def sector_center_px(cam: CameraModel) -> tuple[float, float]:
    """Virtual pixel the user stands at: central column, row of distance zero.

    Ground distance zero lies straight below the camera (depression 90 deg),
    which extrapolates below the bottom edge of any down-tilted frame.
    """
    row = cam.principal_row + cam.focal_px * math.tan(math.radians(90.0 - cam.tilt_deg))
    return (cam.principal_col, row)


def resolve_sector_center(cfg: AlertZoneConfig, cam: CameraModel) -> tuple[float, float]:
    return cfg.sector_center_px if cfg.sector_center_px is not None else sector_center_px(cam)


class ZoneRadiiPx(NamedTuple):
    near: float
    medium: float
    far: float


def zone_radii_px(cam: CameraModel, cfg: AlertZoneConfig) -> ZoneRadiiPx:
    """Pixel radii from the sector center to the three zone boundary arcs.

    Measured along the central column; a visualization aid only, the cm
    classification stays authoritative.
    """
    _, center_row = resolve_sector_center(cfg, cam)
    radii = []
    for boundary_cm in (cfg.medium_min_cm, cfg.far_min_cm, cfg.far_max_cm):
        row = ground_distance_to_row(cam, boundary_cm)
        radii.append(center_row - row)
    return ZoneRadiiPx(*radii)


class GroundPoint(NamedTuple):
    """Ground-plane position relative to the camera's foot, in cm.

    ``lateral_cm`` grows to the viewer's right, ``forward_cm`` along the
    ground projection of the optical axis.
    """

    lateral_cm: float
    forward_cm: float


def image_point_to_ground(cam: CameraModel, col: float, row: float) -> GroundPoint:
    """Back-project a pixel onto the ground plane.

    Raises HorizonError when the pixel looks at or above the horizon.
    """
    lat, fwd = _ground_from_pixels(cam, np.array([col], float), np.array([row], float))
    return GroundPoint(float(lat[0]), float(fwd[0]))


def _ground_from_pixels(
    cam: CameraModel, cols: np.ndarray, rows: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized back-projection; shared by the contour fit and the renderer.

    Returns (lateral_cm, forward_cm) arrays. Rays at/above the horizon raise.
    """
    tilt = math.radians(cam.tilt_deg)
    f = cam.focal_px
    x_n = (np.asarray(cols, float) - cam.principal_col) / f
    y_n = (cam.principal_row - np.asarray(rows, float)) / f
    denom = math.sin(tilt) - math.cos(tilt) * y_n
    if np.any(denom <= 0.0):
        raise HorizonError("pixel looks at or above the horizon")
    t = cam.height_cm / denom
    forward = t * (math.sin(tilt) * y_n + math.cos(tilt))
    lateral = t * x_n
    return lateral, forward
