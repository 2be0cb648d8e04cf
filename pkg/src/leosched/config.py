"""Scenario configuration: schema, validation, and canonical hashing.

Configs are plain JSON trees. Parsing is strict: unknown keys and missing
required fields are reported with dotted paths so a typo points at itself.
All quantities are SI (meters, hertz, watts, seconds) unless the name says
otherwise.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from typing import Any

STRATEGIES = ("proposed", "full_reuse", "single_channel")


@dataclass
class ConstellationBlock:
    num_satellites: int = 240
    num_planes: int = 12
    altitude_m: float = 550_000.0
    inclination_deg: float = 53.0
    min_elevation_deg: float = 25.0
    phasing: int = 1


@dataclass
class SatelliteBlock:
    num_spot_beams: int = 16
    max_channels_per_beam: int = 2
    # None resolves to the EIRP-density budget over the full occupied band
    total_power_w: float | None = None
    eirp_density_dbw_per_mhz: float = 15.0


@dataclass
class RfBlock:
    tx_g_max_dbi: float = 40.0
    tx_half_beamwidth_deg: float = 1.0
    tx_sidelobe_edge_deg: float = 20.0
    tx_far_sidelobe_dbi: float = 5.0
    rx_g_max_dbi: float = 35.0
    rx_mainlobe_edge_deg: float = 1.0
    rx_sidelobe_edge_deg: float = 40.0
    rx_far_sidelobe_dbi: float = -5.0
    num_channels: int = 8
    bandwidth_hz: float = 250e6
    center_frequency_hz: float = 12e9
    system_temperature_k: float = 290.0
    atmos_median_db: float = 0.5
    atmos_sigma_inner: float = 0.25
    atmos_sigma_outer: float = 0.25
    atmos_deterministic: bool = True


@dataclass
class TrafficBlock:
    arrival_rate_per_s: float = 2.0
    packet_size_bits: float = 1e6
    buffer_capacity_bits: float = 1e8
    ttl_slots: int = 500
    process: str = "poisson"  # or "saturated"


@dataclass
class ProtectedUserBlock:
    user_id: int = 0
    lat_deg: float = 0.0
    lon_deg: float = 0.0
    kappa_dbw_per_m2: float = -160.0
    reference_bandwidth_hz: float = 100e6
    active_channels: list[int] = field(default_factory=list)
    # "zenith" or an explicit ECEF unit vector [x, y, z]
    boresight: Any = "zenith"


@dataclass
class ScenarioConfig:
    seed: int | None = None
    mode: str = "neighbors"  # or "constellation"
    strategy: str = "proposed"
    policy_params: str | None = None  # path; None means the rule-based scorer
    num_slots: int = 100
    slot_duration_s: float = 0.01
    num_neighbors: int = 2
    num_uts: int = 200
    # fraction of the footprint half-angle used as the UT drop radius
    ut_drop_cap_scale: float = 1.0
    # neighbor subsatellite offset, as a fraction of the footprint half-angle
    neighbor_ring_scale: float = 0.35
    decision_mode: str = "greedy"  # or "sample"
    constellation: ConstellationBlock = field(default_factory=ConstellationBlock)
    satellite: SatelliteBlock = field(default_factory=SatelliteBlock)
    rf: RfBlock = field(default_factory=RfBlock)
    traffic: TrafficBlock = field(default_factory=TrafficBlock)
    protected_users: list[ProtectedUserBlock] = field(default_factory=list)


_BLOCK_TYPES = {
    "constellation": ConstellationBlock,
    "satellite": SatelliteBlock,
    "rf": RfBlock,
    "traffic": TrafficBlock,
}


class ConfigError(ValueError):
    """Raised for schema violations; message lists dotted field paths."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


def _build_block(cls, data: dict, prefix: str, errors: list[str]):
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            errors.append(f"{prefix}{key}: unknown field")
    kwargs = {k: v for k, v in data.items() if k in known}
    return cls(**kwargs)


def config_from_dict(data: dict) -> ScenarioConfig:
    """Strict parse; raises ConfigError listing every problem found."""
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError(["config root must be an object"])
    top_fields = {f.name for f in fields(ScenarioConfig)}
    for key in data:
        if key not in top_fields:
            errors.append(f"{key}: unknown field")
    kwargs: dict[str, Any] = {}
    for name, cls in _BLOCK_TYPES.items():
        if name in data:
            block = data[name]
            if not isinstance(block, dict):
                errors.append(f"{name}: must be an object")
            else:
                kwargs[name] = _build_block(cls, block, f"{name}.", errors)
    if "protected_users" in data:
        users = data["protected_users"]
        if not isinstance(users, list):
            errors.append("protected_users: must be a list")
        else:
            parsed = []
            for i, u in enumerate(users):
                if not isinstance(u, dict):
                    errors.append(f"protected_users[{i}]: must be an object")
                    continue
                parsed.append(_build_block(ProtectedUserBlock, u, f"protected_users[{i}].", errors))
            kwargs["protected_users"] = parsed
    for key in top_fields - set(_BLOCK_TYPES) - {"protected_users"}:
        if key in data:
            kwargs[key] = data[key]
    cfg = ScenarioConfig(**kwargs)
    errors.extend(validate_config(cfg))
    if errors:
        raise ConfigError(errors)
    return cfg


def config_from_file(path: str) -> ScenarioConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError([f"invalid JSON in {path}: {e}"]) from e
    return config_from_dict(data)


def validate_config(cfg: ScenarioConfig) -> list[str]:
    errs: list[str] = []

    def positive(path: str, value, strict=True):
        ok = value > 0 if strict else value >= 0
        if not ok:
            errs.append(f"{path}: must be {'> 0' if strict else '>= 0'}, got {value!r}")

    if cfg.seed is None:
        errs.append("seed: required field is missing")
    elif not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool):
        errs.append(f"seed: must be an integer, got {cfg.seed!r}")
    if cfg.mode not in ("neighbors", "constellation"):
        errs.append(f"mode: must be 'neighbors' or 'constellation', got {cfg.mode!r}")
    if cfg.strategy not in STRATEGIES:
        errs.append(f"strategy: must be one of {STRATEGIES}, got {cfg.strategy!r}")
    if cfg.decision_mode not in ("greedy", "sample"):
        errs.append(f"decision_mode: must be 'greedy' or 'sample', got {cfg.decision_mode!r}")
    positive("num_slots", cfg.num_slots)
    positive("slot_duration_s", cfg.slot_duration_s)
    positive("num_uts", cfg.num_uts)
    positive("num_neighbors", cfg.num_neighbors, strict=False)
    positive("ut_drop_cap_scale", cfg.ut_drop_cap_scale)
    positive("neighbor_ring_scale", cfg.neighbor_ring_scale)

    c = cfg.constellation
    positive("constellation.num_satellites", c.num_satellites)
    positive("constellation.num_planes", c.num_planes)
    positive("constellation.altitude_m", c.altitude_m)
    if c.num_satellites % c.num_planes != 0:
        errs.append(
            "constellation.num_satellites: must be divisible by num_planes, "
            f"got {c.num_satellites} over {c.num_planes}"
        )
    if not 0.0 < c.min_elevation_deg < 90.0:
        errs.append(
            f"constellation.min_elevation_deg: must be in (0, 90), got {c.min_elevation_deg!r}"
        )

    s = cfg.satellite
    positive("satellite.num_spot_beams", s.num_spot_beams)
    positive("satellite.max_channels_per_beam", s.max_channels_per_beam)
    if s.total_power_w is not None:
        positive("satellite.total_power_w", s.total_power_w)

    r = cfg.rf
    positive("rf.num_channels", r.num_channels)
    positive("rf.bandwidth_hz", r.bandwidth_hz)
    positive("rf.center_frequency_hz", r.center_frequency_hz)
    positive("rf.system_temperature_k", r.system_temperature_k)
    positive("rf.tx_half_beamwidth_deg", r.tx_half_beamwidth_deg)
    positive("rf.rx_mainlobe_edge_deg", r.rx_mainlobe_edge_deg)
    if r.atmos_sigma_inner < 0 or r.atmos_sigma_outer < 0:
        errs.append("rf.atmos_sigma_inner/atmos_sigma_outer: must be >= 0")

    t = cfg.traffic
    positive("traffic.arrival_rate_per_s", t.arrival_rate_per_s, strict=False)
    positive("traffic.packet_size_bits", t.packet_size_bits)
    positive("traffic.buffer_capacity_bits", t.buffer_capacity_bits)
    positive("traffic.ttl_slots", t.ttl_slots)
    if t.process not in ("poisson", "saturated"):
        errs.append(f"traffic.process: must be 'poisson' or 'saturated', got {t.process!r}")

    for i, u in enumerate(cfg.protected_users):
        base = f"protected_users[{i}]"
        if not -90.0 <= u.lat_deg <= 90.0:
            errs.append(f"{base}.lat_deg: must be in [-90, 90], got {u.lat_deg!r}")
        positive(f"{base}.reference_bandwidth_hz", u.reference_bandwidth_hz)
        for m in u.active_channels:
            if not 0 <= m < cfg.rf.num_channels:
                errs.append(
                    f"{base}.active_channels: channel {m} outside [0, {cfg.rf.num_channels})"
                )
        if u.boresight != "zenith":
            vec = u.boresight
            if not (isinstance(vec, (list, tuple)) and len(vec) == 3):
                errs.append(f"{base}.boresight: must be 'zenith' or a 3-vector")
    return errs


def config_to_dict(cfg: ScenarioConfig) -> dict:
    return asdict(cfg)


def config_hash(cfg: ScenarioConfig) -> str:
    canonical = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]
