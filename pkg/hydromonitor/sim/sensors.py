"""
Ray-cast range sensing against the arena walls and cylindrical obstacles.

Intersections are analytic: a ray leaves the square arena through the first
wall it meets, and hits a circle at the smaller positive root of the
ray-circle quadratic. Native beams are min-pooled into a fixed number of
body-fixed sectors spanning a 270° forward arc, so the lidar and the sonar
produce observations of identical shape.
"""

from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from hydromonitor.sim.arena import ArenaSpec

# body-fixed arc covered by observation sectors, whatever the sensor
SECTOR_ARC = 1.5 * np.pi


class SensorKind(str, Enum):
    LIDAR = "lidar"
    SONAR = "sonar"


class SensorSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: SensorKind = SensorKind.LIDAR
    max_range: float = 10.0
    fov: float = SECTOR_ARC
    native_beams: int = 1081
    sectors: int = 36

    @model_validator(mode="after")
    def _check(self) -> "SensorSpec":
        if not 0 < self.fov <= 2 * np.pi:
            raise ValueError("fov must lie in (0, 2π]")
        if self.max_range <= 0:
            raise ValueError("max_range must be > 0")
        if self.native_beams < 1 or self.sectors < 1:
            raise ValueError("beam and sector counts must be positive")
        if self.sectors > self.native_beams:
            raise ValueError("sectors cannot exceed native_beams")
        return self

    @classmethod
    def lidar(cls, sectors: int = 36) -> "SensorSpec":
        return cls(kind=SensorKind.LIDAR, max_range=10.0, fov=np.deg2rad(270.0), native_beams=1081, sectors=sectors)

    @classmethod
    def sonar(cls, sectors: int = 36) -> "SensorSpec":
        return cls(kind=SensorKind.SONAR, max_range=20.0, fov=np.deg2rad(90.0), native_beams=256, sectors=sectors)

    def beam_angles(self) -> np.ndarray:
        """Body-frame beam bearings, evenly spread across the field of view."""
        if self.native_beams == 1:
            return np.zeros(1)
        return np.linspace(-0.5 * self.fov, 0.5 * self.fov, self.native_beams)

    def sector_width(self) -> float:
        return SECTOR_ARC / self.sectors

    def sector_centers(self) -> np.ndarray:
        width = self.sector_width()
        return -0.5 * SECTOR_ARC + width * (np.arange(self.sectors) + 0.5)

    def sector_of_beams(self) -> np.ndarray:
        """Sector index per native beam; -1 for beams outside the sector arc."""
        offsets = (self.beam_angles() + 0.5 * SECTOR_ARC) / self.sector_width()
        index = np.floor(offsets + 1e-9).astype(int)
        # the last beam of a full-arc sensor sits on the closing edge
        index[np.isclose(offsets, self.sectors)] = self.sectors - 1
        index[(index < 0) | (index >= self.sectors)] = -1
        return index


def ray_distances(
    origin: np.ndarray,
    directions: np.ndarray,
    arena: ArenaSpec,
    max_range: float,
) -> np.ndarray:
    """
    Distance along each unit direction to the first wall or obstacle.

    Args:
        origin: (2,) ray origin inside the arena
        directions: (n, 2) unit vectors
        arena: Walls and obstacles
        max_range: Clamp for every returned distance

    Returns:
        (n,) distances in (0, max_range]
    """
    ox, oy = float(origin[0]), float(origin[1])
    dx, dy = directions[:, 0], directions[:, 1]
    hw = arena.half_width
    with np.errstate(divide="ignore", invalid="ignore"):
        tx = np.where(dx > 0, (hw - ox) / dx, np.where(dx < 0, (-hw - ox) / dx, np.inf))
        ty = np.where(dy > 0, (hw - oy) / dy, np.where(dy < 0, (-hw - oy) / dy, np.inf))
    best = np.minimum(tx, ty)

    for obs in arena.obstacles:
        fx, fy = ox - obs.center[0], oy - obs.center[1]
        b = dx * fx + dy * fy
        c = fx * fx + fy * fy - obs.radius * obs.radius
        disc = b * b - c
        hit = disc >= 0
        root = np.sqrt(np.where(hit, disc, 0.0))
        near = -b - root
        far = -b + root
        # origin inside a circle never happens for collision-free poses, but keep the far root then
        t = np.where(near > 0, near, far)
        t = np.where(hit & (t > 0), t, np.inf)
        best = np.minimum(best, t)

    return np.minimum(np.maximum(best, 1e-9), max_range)


def beam_ranges(x: float, y: float, heading: float, arena: ArenaSpec, sensor: SensorSpec) -> np.ndarray:
    """Per-native-beam ranges for a sensor at pose (x, y, heading)."""
    angles = heading + sensor.beam_angles()
    directions = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return ray_distances(np.array([x, y]), directions, arena, sensor.max_range)


def cast_rays(x: float, y: float, heading: float, arena: ArenaSpec, sensor: SensorSpec,
              sector_index: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Min-pooled range scan with `sensor.sectors` entries.

    Sectors that no native beam reaches (outside a narrow sonar field of view)
    report max_range.
    """
    if sector_index is None:
        sector_index = sensor.sector_of_beams()
    ranges = beam_ranges(x, y, heading, arena, sensor)
    scan = np.full(sensor.sectors, sensor.max_range)
    valid = sector_index >= 0
    np.minimum.at(scan, sector_index[valid], ranges[valid])
    return scan
