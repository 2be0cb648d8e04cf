"""Constellation geometry: Walker Delta construction, circular-orbit
propagation, visibility, association, and pointing angles.

Positions are ECEF-style cartesian vectors in meters on a spherical Earth.
Ground terminals are treated as inertially fixed over the horizons of
interest; only satellites move.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import EARTH_MU, EARTH_RADIUS


@dataclass(frozen=True)
class ConstellationConfig:
    num_satellites: int = 240
    num_planes: int = 12
    altitude_m: float = 550_000.0
    inclination_deg: float = 53.0
    min_elevation_deg: float = 25.0
    earth_radius_m: float = EARTH_RADIUS
    phasing: int = 1  # Walker inter-plane phasing factor F

    @property
    def orbit_radius_m(self) -> float:
        return self.earth_radius_m + self.altitude_m

    @property
    def sats_per_plane(self) -> int:
        return self.num_satellites // self.num_planes


@dataclass
class BeamState:
    beam_id: int
    kind: str  # "spot" carries traffic, "wide" is control-plane only
    direction: np.ndarray  # unit vector, satellite frame = ECEF here


@dataclass
class SatelliteState:
    sat_id: int
    raan_rad: float
    inclination_rad: float
    arg_lat_rad: float
    position: np.ndarray
    beams: list[BeamState] = field(default_factory=list)

    def spot_beams(self) -> list[BeamState]:
        return [b for b in self.beams if b.kind == "spot"]


@dataclass
class ConstellationState:
    config: ConstellationConfig
    satellites: list[SatelliteState]
    epoch_s: float = 0.0

    def satellite(self, sat_id: int) -> SatelliteState:
        return self.satellites[sat_id]


def orbital_period_s(cfg: ConstellationConfig) -> float:
    """Circular-orbit period from the vis-viva relation."""
    r = cfg.orbit_radius_m
    return 2.0 * math.pi * math.sqrt(r**3 / EARTH_MU)


def mean_motion_rad_s(cfg: ConstellationConfig) -> float:
    return 2.0 * math.pi / orbital_period_s(cfg)


def _position_from_elements(raan: float, incl: float, arg_lat: float, radius: float) -> np.ndarray:
    co, so = math.cos(raan), math.sin(raan)
    cw, sw = math.cos(arg_lat), math.sin(arg_lat)
    ci, si = math.cos(incl), math.sin(incl)
    return radius * np.array(
        [co * cw - so * sw * ci, so * cw + co * sw * ci, sw * si]
    )


def _make_beams(num_spot_beams: int) -> list[BeamState]:
    # Spot beams start nadir-pointing; the scheduler re-aims them every slot.
    beams = [BeamState(b, "spot", np.array([0.0, 0.0, -1.0])) for b in range(num_spot_beams)]
    beams.append(BeamState(num_spot_beams, "wide", np.array([0.0, 0.0, -1.0])))
    return beams


def build_walker_delta(cfg: ConstellationConfig, num_spot_beams: int = 0) -> ConstellationState:
    """Build a Walker Delta pattern i:T/P/F.

    Ascending nodes spread evenly over 2*pi, satellites evenly spaced per
    plane, with an inter-plane phase offset of 2*pi*F/T between adjacent
    planes.
    """
    if cfg.num_satellites % cfg.num_planes != 0:
        raise ValueError("num_satellites must be divisible by num_planes")
    incl = math.radians(cfg.inclination_deg)
    per_plane = cfg.sats_per_plane
    sats = []
    sid = 0
    for p in range(cfg.num_planes):
        raan = 2.0 * math.pi * p / cfg.num_planes
        for k in range(per_plane):
            arg = 2.0 * math.pi * k / per_plane
            arg += 2.0 * math.pi * cfg.phasing * p / cfg.num_satellites
            arg %= 2.0 * math.pi
            pos = _position_from_elements(raan, incl, arg, cfg.orbit_radius_m)
            sats.append(
                SatelliteState(sid, raan, incl, arg, pos, _make_beams(num_spot_beams))
            )
            sid += 1
    return ConstellationState(cfg, sats, epoch_s=0.0)


def static_satellite(sat_id: int, position: np.ndarray, num_spot_beams: int) -> SatelliteState:
    """Satellite pinned at an arbitrary position, for frozen-geometry scenarios.

    Orbital elements are placeholders; do not propagate such a state.
    """
    return SatelliteState(
        sat_id, 0.0, 0.0, 0.0, np.asarray(position, dtype=float), _make_beams(num_spot_beams)
    )


def propagate(state: ConstellationState, elapsed_s: float) -> ConstellationState:
    """Advance every satellite along its circular orbit by elapsed_s seconds."""
    n = mean_motion_rad_s(state.config)
    r = state.config.orbit_radius_m
    sats = []
    for s in state.satellites:
        arg = (s.arg_lat_rad + n * elapsed_s) % (2.0 * math.pi)
        pos = _position_from_elements(s.raan_rad, s.inclination_rad, arg, r)
        sats.append(replace(s, arg_lat_rad=arg, position=pos))
    return ConstellationState(state.config, sats, epoch_s=state.epoch_s + elapsed_s)


def unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def angle_between_deg(a: np.ndarray, b: np.ndarray) -> float | np.ndarray:
    """Angle between vectors in degrees, broadcasting over leading axes."""
    ua, ub = unit(a), unit(b)
    dot = np.clip(np.sum(ua * ub, axis=-1), -1.0, 1.0)
    out = np.degrees(np.arccos(dot))
    return float(out) if np.ndim(out) == 0 else out


def elevation_deg(ut_pos: np.ndarray, sat_pos: np.ndarray) -> float | np.ndarray:
    """Elevation of the satellite above the terminal's local horizon."""
    los = np.asarray(sat_pos, dtype=float) - np.asarray(ut_pos, dtype=float)
    return 90.0 - angle_between_deg(ut_pos, los)


def off_axis_angle_deg(origin: np.ndarray, boresight: np.ndarray, target: np.ndarray):
    """Angle at origin between the boresight direction and the target."""
    return angle_between_deg(boresight, np.asarray(target, dtype=float) - np.asarray(origin, dtype=float))


def footprint_half_angle_rad(cfg: ConstellationConfig) -> float:
    """Geocentric half-angle of the cap a satellite covers at min elevation."""
    theta = math.radians(cfg.min_elevation_deg)
    re, r = cfg.earth_radius_m, cfg.orbit_radius_m
    return math.acos(re / r * math.cos(theta)) - theta


def central_angle_rad(a: np.ndarray, b: np.ndarray) -> float:
    dot = float(np.clip(np.dot(unit(a), unit(b)), -1.0, 1.0))
    return math.acos(dot)


def visible_satellites(ut_pos: np.ndarray, state: ConstellationState) -> list[int]:
    """IDs of satellites at or above the minimum elevation, ascending id."""
    out = []
    for s in state.satellites:
        if elevation_deg(ut_pos, s.position) >= state.config.min_elevation_deg:
            out.append(s.sat_id)
    return out


def overlapping_neighbors(state: ConstellationState, sat_id: int) -> frozenset[int]:
    """Satellites whose coverage caps intersect the given satellite's cap."""
    phi = footprint_half_angle_rad(state.config)
    me = state.satellite(sat_id)
    out = set()
    for s in state.satellites:
        if s.sat_id == sat_id:
            continue
        if central_angle_rad(me.position, s.position) <= 2.0 * phi:
            out.add(s.sat_id)
    return frozenset(out)


def neighbor_map(state: ConstellationState) -> dict[int, frozenset[int]]:
    return {s.sat_id: overlapping_neighbors(state, s.sat_id) for s in state.satellites}


def service_time_remaining_s(ut_pos: np.ndarray, sat: SatelliteState, cfg: ConstellationConfig) -> float:
    """Time until the satellite leaves the terminal's visibility cone.

    For a circular orbit the cosine of the geocentric angle between a fixed
    terminal and the satellite is sinusoidal in time, so the exit time has a
    closed form. Returns 0.0 if the satellite is not currently visible.
    """
    phi_vis = footprint_half_angle_rad(cfg)
    u_hat = unit(ut_pos)
    n = mean_motion_rad_s(cfg)
    # In-plane basis: s_hat(t) = cos(arg0 + n t) p_hat + sin(arg0 + n t) q_hat
    co, so = math.cos(sat.raan_rad), math.sin(sat.raan_rad)
    ci, si = math.cos(sat.inclination_rad), math.sin(sat.inclination_rad)
    p_hat = np.array([co, so, 0.0])
    q_hat = np.array([-so * ci, co * ci, si])
    cw, sw = math.cos(sat.arg_lat_rad), math.sin(sat.arg_lat_rad)
    a = float(u_hat @ (cw * p_hat + sw * q_hat))  # cos(gamma) at t=0
    b = float(u_hat @ (-sw * p_hat + cw * q_hat))  # d cos(gamma)/d(arg)
    c = math.hypot(a, b)
    k = math.cos(phi_vis)
    if a < k:  # not inside the cap now
        return 0.0
    if c <= k:
        # entire orbit stays inside the cap (possible only for tiny caps/orbits)
        return math.inf
    w = math.acos(max(-1.0, min(1.0, k / c)))
    # cos(gamma)(t) = c cos(n t - delta) with delta = atan2(b, a); currently
    # n t - delta = -delta, inside [-w, w]. Exit when the phase reaches +w.
    delta = math.atan2(b, a)
    phase = -delta
    if phase < -w:
        phase = -w
    if phase > w:
        phase = w
    return (w - phase) / n


def remaining_service_slots(
    ut_pos: np.ndarray, sat: SatelliteState, cfg: ConstellationConfig, slot_s: float
) -> int:
    t = service_time_remaining_s(ut_pos, sat, cfg)
    if math.isinf(t):
        return np.iinfo(np.int64).max
    return int(math.floor(t / slot_s))


def associate_satellite(
    ut_pos: np.ndarray, state: ConstellationState, slot_s: float
) -> int | None:
    """Pick the visible satellite with the longest remaining service time.

    Ties break on higher current elevation, then lower satellite id.
    Returns None when nothing is visible.
    """
    best = None
    for sid in visible_satellites(ut_pos, state):
        sat = state.satellite(sid)
        slots = remaining_service_slots(ut_pos, sat, state.config, slot_s)
        elev = elevation_deg(ut_pos, sat.position)
        key = (slots, elev, -sid)
        if best is None or key > best[0]:
            best = (key, sid)
    return None if best is None else best[1]


def latlon_to_unit(lat_deg: float, lon_deg: float) -> np.ndarray:
    la, lo = math.radians(lat_deg), math.radians(lon_deg)
    return np.array([math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la)])


def ground_position(lat_deg: float, lon_deg: float, earth_radius_m: float = EARTH_RADIUS) -> np.ndarray:
    return earth_radius_m * latlon_to_unit(lat_deg, lon_deg)


def subsatellite_point(sat_pos: np.ndarray, earth_radius_m: float = EARTH_RADIUS) -> np.ndarray:
    return earth_radius_m * unit(sat_pos)


def _orthonormal_basis(center: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = unit(center)
    helper = np.array([0.0, 0.0, 1.0]) if abs(c[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = unit(np.cross(c, helper))
    e2 = np.cross(c, e1)
    return e1, e2


def sample_cap(
    rng: np.random.Generator,
    center: np.ndarray,
    half_angle_rad: float,
    n: int,
    radius_m: float = EARTH_RADIUS,
) -> np.ndarray:
    """Draw n points uniformly (by area) from a spherical cap around center."""
    c = unit(center)
    e1, e2 = _orthonormal_basis(c)
    cos_t = rng.uniform(math.cos(half_angle_rad), 1.0, size=n)
    sin_t = np.sqrt(np.clip(1.0 - cos_t**2, 0.0, None))
    az = rng.uniform(0.0, 2.0 * math.pi, size=n)
    pts = (
        cos_t[:, None] * c[None, :]
        + (sin_t * np.cos(az))[:, None] * e1[None, :]
        + (sin_t * np.sin(az))[:, None] * e2[None, :]
    )
    return radius_m * pts
