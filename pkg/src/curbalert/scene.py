"""Deterministic virtual world: a straight curb band and a steerable agent.

The curb is an infinite ground line (default y = 0) rendered as a band of
configurable width on its far side; the agent stands on the near side and
walks/turns in continuous ground coordinates. Heading 0 faces the default
curb squarely; positive headings turn clockwise (to the agent's right).

Masks are rendered by back-projecting every pixel onto the ground plane with
the same projection the geometry module exposes, so the rendered distance
oracle agrees with the projective one by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import CameraModel
from .mask import CurbMask

__all__ = [
    "AgentPose",
    "World",
    "true_distance",
    "true_relative_angle",
    "step_agent",
    "render_mask",
    "apply_mask_noise",
    "project_ground_point",
    "wrap_angle_deg",
]


def wrap_angle_deg(angle: float) -> float:
    """Wrap to (-90, 90]: angles are line orientations, defined modulo 180."""
    wrapped = (angle + 90.0) % 180.0 - 90.0
    if wrapped == -90.0:
        wrapped = 90.0
    return wrapped


@dataclass(frozen=True)
class AgentPose:
    """Ground position in cm plus heading in degrees (0 = facing the curb
    perpendicular for the default world, positive = turned right)."""

    x_cm: float
    y_cm: float
    heading_deg: float

    def facing(self) -> tuple[float, float]:
        h = math.radians(self.heading_deg)
        return (-math.sin(h), -math.cos(h))

    def right(self) -> tuple[float, float]:
        fx, fy = self.facing()
        return (fy, -fx)


@dataclass(frozen=True)
class World:
    """Curb line plus agent. The band extends band_width_cm beyond the line,
    on the opposite side from the default agent start."""

    agent: AgentPose
    band_width_cm: float = 15.0
    curb_point: tuple[float, float] = (0.0, 0.0)
    curb_dir: tuple[float, float] = (1.0, 0.0)

    def __post_init__(self) -> None:
        if self.band_width_cm <= 0:
            raise ValueError(f"band_width_cm must be positive, got {self.band_width_cm}")
        dx, dy = self.curb_dir
        norm = math.hypot(dx, dy)
        if norm == 0:
            raise ValueError("curb_dir must be a nonzero vector")
        object.__setattr__(self, "curb_dir", (dx / norm, dy / norm))

    @property
    def curb_normal(self) -> tuple[float, float]:
        """Unit normal pointing into the agent's (near) half-plane."""
        dx, dy = self.curb_dir
        return (-dy, dx)


def true_distance(world: World) -> float:
    """Signed perpendicular distance from the agent to the curb line.

    Positive on the approach side, negative once the line is crossed.
    """
    nx, ny = world.curb_normal
    px, py = world.curb_point
    return nx * (world.agent.x_cm - px) + ny * (world.agent.y_cm - py)


def true_relative_angle(world: World) -> float:
    """Signed angle between heading and the curb perpendicular, in (-90, 90]."""
    nx, ny = world.curb_normal
    # heading of the perpendicular approach direction, in the same convention
    # as AgentPose.heading_deg (0 = facing -y, clockwise positive)
    perp_heading = math.degrees(math.atan2(nx, ny))
    return wrap_angle_deg(world.agent.heading_deg - perp_heading)


def step_agent(pose: AgentPose, forward_cm: float, turn_deg: float) -> AgentPose:
    """Turn first, then move forward along the new heading."""
    heading = pose.heading_deg + turn_deg
    h = math.radians(heading)
    return AgentPose(
        x_cm=pose.x_cm + forward_cm * -math.sin(h),
        y_cm=pose.y_cm + forward_cm * -math.cos(h),
        heading_deg=heading,
    )


# Per-camera back-projection tables and per-(camera, view) band coefficients.
# Keyed by value tuples so equal cameras share entries; bounded so long
# multi-camera runs do not grow without limit.
_GROUND_TABLE_CACHE: dict[tuple, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
_COEFF_CACHE: dict[tuple, np.ndarray] = {}
_CACHE_LIMIT = 16


def _cam_key(cam: CameraModel) -> tuple:
    return (
        cam.height_cm,
        cam.tilt_deg,
        cam.vertical_fov_deg,
        cam.image_width_px,
        cam.image_height_px,
    )


def _ground_tables(cam: CameraModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(forward_cm, lateral_cm, below_horizon) per pixel, cached per camera."""
    key = _cam_key(cam)
    hit = _GROUND_TABLE_CACHE.get(key)
    if hit is not None:
        return hit
    tilt = math.radians(cam.tilt_deg)
    f = cam.focal_px
    rows = np.arange(cam.image_height_px, dtype=np.float64)[:, None]
    cols = np.arange(cam.image_width_px, dtype=np.float64)[None, :]
    x_n = (cols - cam.principal_col) / f
    y_n = (cam.principal_row - rows) / f
    denom = math.sin(tilt) - math.cos(tilt) * y_n
    valid = denom > 1e-12  # (H, 1); broadcasts against the (H, W) lateral table
    safe = np.where(valid, denom, 1.0)
    t = cam.height_cm / safe
    forward = t * (math.sin(tilt) * y_n + math.cos(tilt))
    lateral = t * x_n
    if len(_GROUND_TABLE_CACHE) >= _CACHE_LIMIT:
        _GROUND_TABLE_CACHE.clear()
    _GROUND_TABLE_CACHE[key] = (forward, lateral, valid)
    return forward, lateral, valid


def _band_coefficients(cam: CameraModel, n_dot_facing: float, n_dot_right: float) -> np.ndarray:
    """Per-pixel normal component of the ground offset, cached per view.

    A pixel's signed distance to the curb line is the agent's signed distance
    plus this array, so a full render per tick is two comparisons per pixel.
    """
    key = (_cam_key(cam), n_dot_facing, n_dot_right)
    hit = _COEFF_CACHE.get(key)
    if hit is not None:
        return hit
    forward, lateral, _ = _ground_tables(cam)
    coeff = forward * n_dot_facing + lateral * n_dot_right
    if len(_COEFF_CACHE) >= _CACHE_LIMIT:
        _COEFF_CACHE.clear()
    _COEFF_CACHE[key] = coeff
    return coeff


def render_mask(world: World, cam: CameraModel) -> CurbMask:
    """Synthetic segmentation of the curb band as instance 1.

    Marks every pixel whose ground back-projection falls inside the band;
    pixels at or above the horizon are never marked. An out-of-view band
    yields an all-background mask.
    """
    nx, ny = world.curb_normal
    fx, fy = world.agent.facing()
    rx, ry = world.agent.right()
    coeff = _band_coefficients(cam, nx * fx + ny * fy, nx * rx + ny * ry)
    _, _, valid = _ground_tables(cam)
    s_agent = true_distance(world)
    s_pixel = s_agent + coeff
    inside = (s_pixel >= -world.band_width_cm) & (s_pixel <= 0.0) & valid
    return CurbMask(inside.astype(np.uint8))


def apply_mask_noise(mask: CurbMask, flip_rate: float, seed: int) -> CurbMask:
    """Flip pixels between background and instance 1 at the given rate, seeded."""
    if flip_rate <= 0:
        return mask
    rng = np.random.default_rng(seed)
    flips = rng.random(mask.pixels.shape) < flip_rate
    px = mask.pixels.copy()
    px[flips] = np.where(px[flips] > 0, 0, 1)
    return CurbMask(px)


def project_ground_point(
    pose: AgentPose, cam: CameraModel, point_xy: tuple[float, float]
) -> tuple[float, float]:
    """Project a world ground point through the agent's camera to (col, row).

    Test oracle for rendered geometry; raises if the point is not in front of
    the camera.
    """
    tilt = math.radians(cam.tilt_deg)
    fx, fy = pose.facing()
    rx, ry = pose.right()
    vx = point_xy[0] - pose.x_cm
    vy = point_xy[1] - pose.y_cm
    vz = -cam.height_cm
    # camera basis in world coords; a down-tilted camera's up vector leans
    # toward the facing direction
    fwd = (fx * math.cos(tilt), fy * math.cos(tilt), -math.sin(tilt))
    up = (fx * math.sin(tilt), fy * math.sin(tilt), math.cos(tilt))
    depth = vx * fwd[0] + vy * fwd[1] + vz * fwd[2]
    if depth <= 0:
        raise ValueError("point is behind the camera")
    cam_right = vx * rx + vy * ry
    cam_up = vx * up[0] + vy * up[1] + vz * up[2]
    col = cam.principal_col + cam.focal_px * cam_right / depth
    row = cam.principal_row - cam.focal_px * cam_up / depth
    return (col, row)
