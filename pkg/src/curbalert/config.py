"""One JSON document configures the camera, the zones and the virtual world.

Example (all keys optional, defaults shown):

    {
      "height_cm": 135, "tilt_deg": 30, "vertical_fov_deg": 60,
      "width_px": 640, "height_px": 480,
      "zones": {"far_max": 257, "far_min": 146, "medium_min": 90},
      "band_width_cm": 15, "start_distance_cm": 300, "approach_deg": 0,
      "noise_flip_rate": 0.0, "seed": 42
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .geometry import AlertZoneConfig, CameraModel
from .scene import AgentPose, World

__all__ = ["WorldParams", "AppConfig", "load_config"]


@dataclass(frozen=True)
class WorldParams:
    band_width_cm: float = 15.0
    start_distance_cm: float = 300.0
    approach_deg: float = 0.0
    noise_flip_rate: float = 0.0
    seed: int = 42

    def make_world(self, approach_deg: float | None = None) -> World:
        heading = self.approach_deg if approach_deg is None else approach_deg
        agent = AgentPose(0.0, self.start_distance_cm, heading)
        return World(agent=agent, band_width_cm=self.band_width_cm)


@dataclass(frozen=True)
class AppConfig:
    camera: CameraModel = field(default_factory=CameraModel)
    zones: AlertZoneConfig = field(default_factory=AlertZoneConfig)
    world: WorldParams = field(default_factory=WorldParams)


def load_config(source: str | Path | dict | None = None) -> AppConfig:
    """Build an AppConfig from a JSON path, a parsed dict, or defaults."""
    if source is None:
        return AppConfig()
    doc = source if isinstance(source, dict) else json.loads(Path(source).read_text())
    if not isinstance(doc, dict):
        raise ValueError("config document must be a JSON object")

    camera = CameraModel(
        height_cm=float(doc.get("height_cm", 135.0)),
        tilt_deg=float(doc.get("tilt_deg", 30.0)),
        vertical_fov_deg=float(doc.get("vertical_fov_deg", 60.0)),
        image_width_px=int(doc.get("width_px", 640)),
        image_height_px=int(doc.get("height_px", 480)),
    )
    z = doc.get("zones", {})
    zones = AlertZoneConfig(
        far_max_cm=float(z.get("far_max", 257.0)),
        far_min_cm=float(z.get("far_min", 146.0)),
        medium_min_cm=float(z.get("medium_min", 90.0)),
        far_sub_bounds_cm=tuple(z.get("far_sub_bounds", (230.0, 202.0, 174.0))),
        medium_sub_bounds_cm=tuple(z.get("medium_sub_bounds", (123.0, 107.0))),
    )
    world = WorldParams(
        band_width_cm=float(doc.get("band_width_cm", 15.0)),
        start_distance_cm=float(doc.get("start_distance_cm", 300.0)),
        approach_deg=float(doc.get("approach_deg", 0.0)),
        noise_flip_rate=float(doc.get("noise_flip_rate", 0.0)),
        seed=int(doc.get("seed", 42)),
    )
    return AppConfig(camera=camera, zones=zones, world=world)
