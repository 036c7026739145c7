"""Walker constellation propagation and satellite-ground link geometry.

Model: spherical Earth, circular two-body orbits in a non-rotating
Earth-centered frame.  Ground users sit on the rotating Earth (sidereal
rate), so the time-varying network topology emerges from the relative
motion without a full ephemeris stack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_KM = 6371.0
EARTH_MU_KM3_S2 = 398600.4418
EARTH_ROTATION_RAD_S = 7.292115e-5  # sidereal rate

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ConstellationConfig:
    """Walker-delta constellation of circular orbits.

    ``phasing_factor`` sets the inter-plane phase offset in units of
    360 degrees / total satellite count.
    """

    planes: int = 6
    sats_per_plane: int = 8
    inclination_deg: float = 40.0
    altitude_km: float = 1200.0
    phasing_factor: int = 3  # keeps the bundled city set covered full-time
    epoch_s: float = 0.0

    def __post_init__(self) -> None:
        if self.planes < 1:
            raise ValueError("planes must be >= 1")
        if self.sats_per_plane < 1:
            raise ValueError("sats_per_plane must be >= 1")
        if not 0.0 <= self.inclination_deg <= 180.0:
            raise ValueError("inclination_deg must be in [0, 180]")
        if self.altitude_km <= 0.0:
            raise ValueError("altitude_km must be > 0")

    @property
    def total_sats(self) -> int:
        return self.planes * self.sats_per_plane

    @property
    def radius_km(self) -> float:
        return EARTH_RADIUS_KM + self.altitude_km

    @property
    def mean_motion_rad_s(self) -> float:
        return math.sqrt(EARTH_MU_KM3_S2 / self.radius_km**3)

    @property
    def period_s(self) -> float:
        return _TWO_PI / self.mean_motion_rad_s


@dataclass(frozen=True, eq=False)
class SatelliteState:
    """Satellite position/velocity plus its body frame.

    ``body_axes`` rows are the unit x/y/z axes in the inertial frame:
    x along the velocity (projected orthogonal to nadir), z nadir
    pointing, y completing the right-handed triad.
    """

    satellite_id: int
    position_km: np.ndarray
    velocity_km_s: np.ndarray
    body_axes: np.ndarray  # (3, 3), rows = x, y, z

    @property
    def body_x(self) -> np.ndarray:
        return self.body_axes[0]

    @property
    def body_y(self) -> np.ndarray:
        return self.body_axes[1]

    @property
    def body_z(self) -> np.ndarray:
        return self.body_axes[2]

    def to_body(self, vec: np.ndarray) -> np.ndarray:
        """Express an inertial-frame vector in body coordinates."""
        return self.body_axes @ vec


@dataclass(frozen=True)
class GroundUser:
    user_id: int
    latitude_deg: float
    longitude_deg: float
    altitude_km: float = 0.0
    label: str = ""

    def __post_init__(self) -> None:
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"latitude_deg out of range: {self.latitude_deg}")
        if not -180.0 <= self.longitude_deg < 180.0:
            raise ValueError(f"longitude_deg out of range: {self.longitude_deg}")


@dataclass(frozen=True)
class LinkGeometry:
    """Geometry of one satellite-user link.

    ``azimuth_sat_deg`` / ``elevation_sat_deg`` locate the user as seen
    from the satellite body frame (elevation measured from the body x-y
    plane toward nadir, so a user straight below sits at 90 degrees).
    ``off_boresight_deg`` is the angle at the user between the serving
    satellite direction (antenna boresight) and this satellite.
    """

    elevation_deg: float
    slant_range_km: float
    azimuth_sat_deg: float
    elevation_sat_deg: float
    off_boresight_deg: float


@dataclass(frozen=True)
class VisibilitySets:
    """Mutual visibility maps. ``per_sat`` holds only satellites seen by
    at least one user; everything else is outside the active scenario."""

    per_gu: dict[int, frozenset[int]]
    per_sat: dict[int, frozenset[int]]

    @property
    def active_satellites(self) -> tuple[int, ...]:
        return tuple(sorted(self.per_sat))


def _rot_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _unit(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def propagate(config: ConstellationConfig, t: float) -> list[SatelliteState]:
    """Propagate every satellite of the constellation to time ``t`` (s).

    Satellite ids run plane-major: id = plane * sats_per_plane + slot.
    """
    if t < 0.0:
        raise ValueError("t must be >= 0")
    a = config.radius_km
    n = config.mean_motion_rad_s
    inc = math.radians(config.inclination_deg)
    total = config.total_sats
    dt = t - config.epoch_s

    states = []
    for p in range(config.planes):
        raan = _TWO_PI * p / config.planes
        frame = _rot_z(raan) @ _rot_x(inc)
        for k in range(config.sats_per_plane):
            u0 = _TWO_PI * (k / config.sats_per_plane
                            + config.phasing_factor * p / total)
            u = u0 + n * dt
            cu, su = math.cos(u), math.sin(u)
            pos = frame @ np.array([a * cu, a * su, 0.0])
            vel = frame @ np.array([-a * n * su, a * n * cu, 0.0])
            z_b = -pos / a
            x_b = _unit(vel - np.dot(vel, z_b) * z_b)
            y_b = np.cross(z_b, x_b)
            states.append(SatelliteState(
                satellite_id=p * config.sats_per_plane + k,
                position_km=pos,
                velocity_km_s=vel,
                body_axes=np.vstack([x_b, y_b, z_b]),
            ))
    return states


def ground_user_position(gu: GroundUser, t: float) -> np.ndarray:
    """Inertial position (km) of a ground user at time ``t``."""
    lat = math.radians(gu.latitude_deg)
    lon = math.radians(gu.longitude_deg) + EARTH_ROTATION_RAD_S * t
    r = EARTH_RADIUS_KM + gu.altitude_km
    return r * np.array([math.cos(lat) * math.cos(lon),
                         math.cos(lat) * math.sin(lon),
                         math.sin(lat)])


def elevation_deg(sat_position_km: np.ndarray, gu_position_km: np.ndarray) -> float:
    """Elevation of the satellite above the user's local horizon."""
    los = _unit(sat_position_km - gu_position_km)
    zenith = _unit(gu_position_km)
    return math.degrees(math.asin(float(np.clip(np.dot(los, zenith), -1.0, 1.0))))


def link_geometry(sat: SatelliteState, gu: GroundUser,
                  serving_sat: SatelliteState, t: float = 0.0) -> LinkGeometry:
    """Full geometry of the ``sat``-``gu`` link while the user antenna
    points at ``serving_sat``."""
    gu_pos = ground_user_position(gu, t)
    los = sat.position_km - gu_pos
    slant = float(np.linalg.norm(los))
    los_hat = los / slant

    elev = elevation_deg(sat.position_km, gu_pos)

    # user direction expressed in the satellite body frame
    d_body = sat.to_body(_unit(gu_pos - sat.position_km))
    theta = math.degrees(math.asin(float(np.clip(d_body[2], -1.0, 1.0))))
    phi = math.degrees(math.atan2(d_body[1], d_body[0]))

    if serving_sat.satellite_id == sat.satellite_id:
        off = 0.0
    else:
        serve_hat = _unit(serving_sat.position_km - gu_pos)
        off = math.degrees(math.acos(float(np.clip(np.dot(los_hat, serve_hat),
                                                   -1.0, 1.0))))
    return LinkGeometry(elevation_deg=elev, slant_range_km=slant,
                        azimuth_sat_deg=phi, elevation_sat_deg=theta,
                        off_boresight_deg=off)


def visibility(states: list[SatelliteState], gus: list[GroundUser],
               min_elevation_deg: float = 10.0, t: float = 0.0) -> VisibilitySets:
    """Visibility sets at elevation threshold ``min_elevation_deg``."""
    if not 0.0 <= min_elevation_deg < 90.0:
        raise ValueError("min_elevation_deg must be in [0, 90)")
    gu_pos = {gu.user_id: ground_user_position(gu, t) for gu in gus}
    per_gu: dict[int, set[int]] = {gu.user_id: set() for gu in gus}
    per_sat: dict[int, set[int]] = {}
    for sat in states:
        for gu in gus:
            if elevation_deg(sat.position_km, gu_pos[gu.user_id]) >= min_elevation_deg:
                per_gu[gu.user_id].add(sat.satellite_id)
                per_sat.setdefault(sat.satellite_id, set()).add(gu.user_id)
    return VisibilitySets(
        per_gu={g: frozenset(v) for g, v in per_gu.items()},
        per_sat={s: frozenset(v) for s, v in per_sat.items()},
    )
