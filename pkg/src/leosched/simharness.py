"""Time-slotted downlink simulation binding geometry, RF, traffic,
scheduling, and allocation.

Two scenario modes. "neighbors" builds one focal satellite plus an exact
number of frozen overlapping neighbors, each serving its own terminal
cohort with the same strategy; metrics are metered on the focal satellite
only, so interference exposure is the controlled variable. "constellation"
propagates a full Walker-Delta shell with terminal association and
handover.

Per slot: arrivals -> per-satellite beam planning -> allocation by the
chosen strategy -> rate evaluation against one-slot-delayed neighbor
transmissions -> service -> clocks/TTL. Inter-satellite knowledge is
always the previous slot's snapshots, never the current ones.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import geom
from .allocgraph import PolicyInput, SlotContext, generate_allocation, graph_probability
from .baselines import full_reuse_allocation, single_channel_allocation
from .config import ScenarioConfig, config_hash, config_to_dict
from .constants import EARTH_RADIUS
from .interference import (
    ProtectedUser,
    RfEnvironment,
    TransmitterSnapshot,
    downlink_rate_bps,
    inter_cci_w,
    sinr_breakdown,
    validate_allocation,
)
from .policy import HeuristicPolicy, NeuralAllocationPolicy
from .rf import (
    AtmosphericModel,
    ChannelPlan,
    RxAntennaPattern,
    TxAntennaPattern,
    eirp_power_cap_w,
    noise_power_w,
)
from .scheduler import plan_beams
from .traffic import (
    QueueState,
    TrafficModel,
    advance_clocks_and_expire,
    apply_service,
    conservation_error_bits,
    enqueue_arrivals,
    handover_transfer,
)

SWEEP_AXES = ("neighbors", "power", "beams", "uts", "arrival_rate")

# Neighbor subsatellite bearings, degrees clockwise from north; chosen so
# successive counts interleave instead of clustering on one side.
_NEIGHBOR_AZIMUTHS_DEG = (0.0, 180.0, 90.0, 270.0, 45.0, 225.0, 135.0, 315.0)


@dataclass
class Metrics:
    throughput_bps: float = 0.0
    throughput_per_ut_bps: float = 0.0
    mean_latency_slots: float = 0.0
    mean_latency_s: float = 0.0
    p95_latency_slots: float = 0.0
    served_bits: float = 0.0
    arrived_bits: float = 0.0
    expired_bits: float = 0.0
    dropped_bits: float = 0.0
    residual_bits: float = 0.0
    expiry_rate: float = 0.0
    completions: int = 0
    epfd_violations: int = 0
    epfd_min_margin_db: float = math.inf
    conservation_error_bits: float = 0.0
    relaxed_n: bool = False
    training_cost: float = 0.0
    trace: list[dict] | None = None

    def row(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "trace"}
        return out


METRIC_COLUMNS = [
    "throughput_bps",
    "throughput_per_ut_bps",
    "mean_latency_slots",
    "mean_latency_s",
    "p95_latency_slots",
    "served_bits",
    "arrived_bits",
    "expired_bits",
    "dropped_bits",
    "residual_bits",
    "expiry_rate",
    "completions",
    "epfd_violations",
    "epfd_min_margin_db",
    "conservation_error_bits",
    "relaxed_n",
    "training_cost",
]


@dataclass
class SatelliteRuntime:
    sat_id: int
    position: np.ndarray
    ut_rows: np.ndarray  # indices into the scenario's terminal arrays


@dataclass
class Scenario:
    env: RfEnvironment
    atmos: AtmosphericModel
    satellites: list[SatelliteRuntime]
    focal_sat_id: int
    ut_positions: np.ndarray
    ut_ids: np.ndarray
    protected: list[ProtectedUser]
    total_power_w: float
    per_edge_cap_w: float
    constellation: geom.ConstellationState | None = None
    geometry_cfg: geom.ConstellationConfig | None = None


def resolve_total_power_w(cfg: ScenarioConfig) -> float:
    if cfg.satellite.total_power_w is not None:
        return float(cfg.satellite.total_power_w)
    occupied = cfg.rf.num_channels * cfg.rf.bandwidth_hz
    return eirp_power_cap_w(
        cfg.satellite.eirp_density_dbw_per_mhz, occupied, cfg.rf.tx_g_max_dbi
    )


def resolve_edge_cap_w(cfg: ScenarioConfig) -> float:
    return eirp_power_cap_w(
        cfg.satellite.eirp_density_dbw_per_mhz, cfg.rf.bandwidth_hz, cfg.rf.tx_g_max_dbi
    )


def build_rf(cfg: ScenarioConfig) -> tuple[RfEnvironment, AtmosphericModel]:
    r = cfg.rf
    tx = TxAntennaPattern(
        r.tx_g_max_dbi, r.tx_half_beamwidth_deg, r.tx_sidelobe_edge_deg, r.tx_far_sidelobe_dbi
    )
    rx = RxAntennaPattern(
        r.rx_g_max_dbi, r.rx_mainlobe_edge_deg, r.rx_sidelobe_edge_deg, r.rx_far_sidelobe_dbi
    )
    channels = ChannelPlan(r.num_channels, r.bandwidth_hz, r.center_frequency_hz)
    env = RfEnvironment(tx, rx, channels, noise_power_w(r.system_temperature_k, r.bandwidth_hz))
    atmos = AtmosphericModel(
        r.atmos_median_db, r.atmos_sigma_inner, r.atmos_sigma_outer, r.atmos_deterministic
    )
    return env, atmos


def resolve_protected(cfg: ScenarioConfig, env: RfEnvironment) -> list[ProtectedUser]:
    users = []
    for u in cfg.protected_users:
        pos = geom.ground_position(u.lat_deg, u.lon_deg)
        if u.boresight == "zenith":
            bore = geom.unit(pos)
        else:
            bore = geom.unit(np.asarray(u.boresight, dtype=float))
        users.append(
            ProtectedUser(
                u.user_id,
                pos,
                bore,
                env.rx,
                u.kappa_dbw_per_m2,
                frozenset(u.active_channels),
                u.reference_bandwidth_hz,
            )
        )
    return users


def _cap_point(center: np.ndarray, angle_rad: float, azimuth_deg: float) -> np.ndarray:
    """Unit vector at a central angle from center along a bearing."""
    e1, e2 = geom._orthonormal_basis(center)
    az = math.radians(azimuth_deg)
    return (
        math.cos(angle_rad) * center
        + math.sin(angle_rad) * (math.cos(az) * e1 + math.sin(az) * e2)
    )


def _geometry_cfg(cfg: ScenarioConfig) -> geom.ConstellationConfig:
    c = cfg.constellation
    return geom.ConstellationConfig(
        num_satellites=c.num_satellites,
        num_planes=c.num_planes,
        altitude_m=c.altitude_m,
        inclination_deg=c.inclination_deg,
        min_elevation_deg=c.min_elevation_deg,
        phasing=c.phasing,
    )


def build_neighbor_scenario(cfg: ScenarioConfig, rng: np.random.Generator) -> Scenario:
    """Focal satellite over (0, 0) plus frozen overlapping neighbors.

    Each satellite gets its own cohort of num_uts terminals dropped
    uniformly on a cap of ut_drop_cap_scale times the footprint half-angle
    around its subsatellite point.
    """
    env, atmos = build_rf(cfg)
    gcfg = _geometry_cfg(cfg)
    phi_c = geom.footprint_half_angle_rad(gcfg)
    orbit_r = gcfg.orbit_radius_m
    centers = [geom.latlon_to_unit(0.0, 0.0)]
    for i in range(cfg.num_neighbors):
        az = _NEIGHBOR_AZIMUTHS_DEG[i % 8] + 22.5 * (i // 8)
        scale = cfg.neighbor_ring_scale * (1.0 + 0.8 * (i // 8))
        centers.append(_cap_point(centers[0], scale * phi_c, az))
    satellites = []
    positions = []
    ids = []
    drop_angle = cfg.ut_drop_cap_scale * phi_c
    for sid, center in enumerate(centers):
        cohort = geom.sample_cap(rng, center, drop_angle, cfg.num_uts, EARTH_RADIUS)
        rows = np.arange(sid * cfg.num_uts, (sid + 1) * cfg.num_uts)
        satellites.append(SatelliteRuntime(sid, orbit_r * center, rows))
        positions.append(cohort)
        ids.extend(range(sid * cfg.num_uts, (sid + 1) * cfg.num_uts))
    return Scenario(
        env=env,
        atmos=atmos,
        satellites=satellites,
        focal_sat_id=0,
        ut_positions=np.vstack(positions),
        ut_ids=np.asarray(ids),
        protected=resolve_protected(cfg, env),
        total_power_w=resolve_total_power_w(cfg),
        per_edge_cap_w=resolve_edge_cap_w(cfg),
        geometry_cfg=gcfg,
    )


def build_constellation_scenario(cfg: ScenarioConfig, rng: np.random.Generator) -> Scenario:
    """Full shell; terminals dropped in satellite 0's epoch footprint."""
    env, atmos = build_rf(cfg)
    gcfg = _geometry_cfg(cfg)
    state = geom.build_walker_delta(gcfg, num_spot_beams=cfg.satellite.num_spot_beams)
    phi_c = geom.footprint_half_angle_rad(gcfg)
    anchor = geom.subsatellite_point(state.satellites[0].position)
    uts = geom.sample_cap(
        rng, geom.unit(anchor), cfg.ut_drop_cap_scale * phi_c, cfg.num_uts, EARTH_RADIUS
    )
    satellites = [
        SatelliteRuntime(s.sat_id, s.position, np.array([], dtype=int))
        for s in state.satellites
    ]
    return Scenario(
        env=env,
        atmos=atmos,
        satellites=satellites,
        focal_sat_id=0,
        ut_positions=uts,
        ut_ids=np.arange(cfg.num_uts),
        protected=resolve_protected(cfg, env),
        total_power_w=resolve_total_power_w(cfg),
        per_edge_cap_w=resolve_edge_cap_w(cfg),
        constellation=state,
        geometry_cfg=gcfg,
    )


def make_policy(cfg: ScenarioConfig):
    if cfg.policy_params:
        return NeuralAllocationPolicy.load(cfg.policy_params)
    return HeuristicPolicy()


def _xi_matrix(
    scn: Scenario, sat_ids: list[int], n_uts: int, rng: np.random.Generator
) -> dict[int, np.ndarray]:
    """Per-slot atmospheric factors, one per (satellite, terminal) path."""
    out = {}
    for sid in sat_ids:
        out[sid] = np.asarray(scn.atmos.sample_linear(rng, n_uts), dtype=float)
    return out


def _allocate(
    strategy: str,
    ctx: SlotContext,
    policy,
    decision_mode: str,
    rng: np.random.Generator,
    prev_interference_w: np.ndarray | None,
    want_prob: bool,
):
    if strategy == "proposed":
        g, trace = generate_allocation(ctx, policy, mode=decision_mode, rng=rng)
        prob = graph_probability(g, trace) if want_prob else None
        return g, prob
    if strategy == "full_reuse":
        return full_reuse_allocation(ctx), None
    if strategy == "single_channel":
        return single_channel_allocation(ctx, prev_interference_w), None
    raise ValueError(f"unknown strategy {strategy!r}")


def run_episode(
    cfg: ScenarioConfig,
    policy=None,
    decision_mode: str | None = None,
    collect_trace: bool = False,
) -> Metrics:
    """Simulate one (config, seed) run and aggregate metrics.

    The seed fans out into independent streams (terminal drop, traffic,
    atmosphere, policy sampling), so reruns are bit-identical and strategies
    share the same exogenous randomness for paired comparisons.
    """
    seq = np.random.SeedSequence(cfg.seed)
    drop_rng, traffic_rng, atmos_rng, policy_rng = (
        np.random.default_rng(s) for s in seq.spawn(4)
    )
    if cfg.mode == "neighbors":
        scn = build_neighbor_scenario(cfg, drop_rng)
    else:
        scn = build_constellation_scenario(cfg, drop_rng)
    if policy is None:
        policy = make_policy(cfg)
    decision_mode = decision_mode or cfg.decision_mode
    model = TrafficModel(
        cfg.traffic.arrival_rate_per_s,
        cfg.traffic.packet_size_bits,
        cfg.traffic.buffer_capacity_bits,
        cfg.traffic.ttl_slots,
        cfg.traffic.process,
    )
    B = cfg.satellite.num_spot_beams
    N = cfg.satellite.max_channels_per_beam
    slot_s = cfg.slot_duration_s
    sat_ids = [s.sat_id for s in scn.satellites]
    queues: dict[int, QueueState] = {sid: QueueState() for sid in sat_ids}
    records: dict[int, list] = {sid: [] for sid in sat_ids}
    prev_snaps: dict[int, TransmitterSnapshot] = {}
    relaxed = False
    violations = 0
    min_margin = math.inf
    trace_rows: list[dict] = [] if collect_trace else None

    constellation_mode = scn.constellation is not None
    state = scn.constellation
    assoc: dict[int, int] = {}
    if constellation_mode:
        for row in range(len(scn.ut_ids)):
            sid = geom.associate_satellite(scn.ut_positions[row], state, slot_s)
            if sid is not None:
                assoc[row] = sid

    for t in range(cfg.num_slots):
        if constellation_mode and t > 0:
            state = geom.propagate(state, slot_s)
            for s_rt, s_st in zip(scn.satellites, state.satellites):
                s_rt.position = s_st.position
        # cohort rows per satellite this slot
        if constellation_mode:
            rows_by_sat: dict[int, list[int]] = {sid: [] for sid in sat_ids}
            for row, sid in assoc.items():
                rows_by_sat[sid].append(row)
            for sid in sat_ids:
                scn.satellites[sid].ut_rows = np.asarray(sorted(rows_by_sat[sid]), dtype=int)

        # arrivals, in fixed satellite order
        for sat in scn.satellites:
            if sat.ut_rows.size:
                enqueue_arrivals(
                    queues[sat.sat_id],
                    [int(scn.ut_ids[r]) for r in sat.ut_rows],
                    t,
                    slot_s,
                    model,
                    traffic_rng,
                )

        xi = _xi_matrix(scn, sat_ids, len(scn.ut_ids), atmos_rng)

        if constellation_mode:
            nbr_map = geom.neighbor_map(state)

        assignments = {}
        new_snaps: dict[int, TransmitterSnapshot] = {}
        contexts = {}
        for sat in scn.satellites:
            rows = sat.ut_rows
            if rows.size == 0:
                continue
            q = queues[sat.sat_id]
            ids = scn.ut_ids[rows]
            backlog = np.array([q.backlog_bits(int(u)) for u in ids])
            wait = np.array([q.wait_slots(int(u)) for u in ids])
            assignment, budgets = plan_beams(
                sat.position, scn.ut_positions[rows], ids, backlog, wait, B, scn.total_power_w
            )
            if constellation_mode:
                nbr_ids = sorted(nbr_map.get(sat.sat_id, frozenset()))
            else:
                nbr_ids = [sid for sid in sat_ids if sid != sat.sat_id]
            nbr_snaps = [prev_snaps[n] for n in nbr_ids if n in prev_snaps]
            xi_inter = {n: xi[n][rows] for n in nbr_ids if n in prev_snaps}
            ctx = SlotContext(
                env=scn.env,
                sat_id=sat.sat_id,
                sat_pos=sat.position,
                assignment=assignment,
                beam_budgets_w=budgets,
                total_budget_w=scn.total_power_w,
                ut_positions=scn.ut_positions[rows],
                ut_ids=ids,
                backlog_bits=backlog,
                wait_slots=wait,
                xi_serving=xi[sat.sat_id][rows],
                neighbor_snapshots=nbr_snaps,
                xi_inter=xi_inter,
                protected_users=scn.protected,
                max_channels_per_beam=N,
                per_edge_cap_w=scn.per_edge_cap_w,
            )
            prev_measured = None
            if cfg.strategy == "single_channel":
                # only other satellites' emissions arrive with a slot delay;
                # own same-slot commitments are folded in by the selector
                other_prev = [
                    prev_snaps[sid]
                    for sid in sat_ids
                    if sid in prev_snaps and sid != sat.sat_id
                ]
                prev_measured = np.zeros((rows.size, scn.env.channels.num_channels))
                for k, row in enumerate(rows):
                    if other_prev:
                        prev_measured[k] = inter_cci_w(
                            scn.env,
                            scn.ut_positions[row],
                            sat.position,
                            other_prev,
                            {sn.sat_id: float(xi[sn.sat_id][row]) for sn in other_prev},
                        )
            g, prob = _allocate(
                cfg.strategy, ctx, policy, decision_mode, policy_rng, prev_measured,
                want_prob=collect_trace,
            )
            relaxed = relaxed or g.relaxed_n
            limit = scn.env.channels.num_channels if g.relaxed_n else N
            problems = validate_allocation(g.alloc, limit)
            if problems:
                violations += len(problems)
            margins = g.epfd_margins_db()
            for margin in margins.values():
                min_margin = min(min_margin, margin)
                if margin < 0.0:
                    violations += 1
            assignments[sat.sat_id] = (assignment, rows)
            contexts[sat.sat_id] = ctx
            new_snaps[sat.sat_id] = g.snapshot()
            if collect_trace:
                trace_rows.append(
                    {
                        "slot": t,
                        "sat_id": sat.sat_id,
                        "position_m": [float(v) for v in sat.position],
                        "boresights": assignment.boresights.tolist(),
                        "powers_w": g.alloc.powers_w.tolist(),
                        "edges": [[int(m), int(b)] for m, b in g.edges],
                        "epfd_margins_db": {str(k): float(v) for k, v in margins.items()},
                        "graph_probability": prob,
                        "relaxed_n": bool(g.relaxed_n),
                    }
                )

        # rate evaluation and service: own current allocation, neighbors delayed
        for sid in sorted(assignments):
            assignment, rows = assignments[sid]
            ctx = contexts[sid]
            snap = new_snaps[sid]
            q = queues[sid]
            for b, local in enumerate(assignment.ut_index):
                if local is None:
                    continue
                row = int(rows[local])
                breakdown = sinr_breakdown(
                    scn.env,
                    snap,
                    b,
                    scn.ut_positions[row],
                    float(xi[sid][row]),
                    ctx.neighbor_snapshots,
                    {sn.sat_id: float(xi[sn.sat_id][row]) for sn in ctx.neighbor_snapshots},
                )
                rate = downlink_rate_bps(breakdown, scn.env.channels.bandwidth_hz)
                apply_service(q, int(scn.ut_ids[row]), rate, slot_s)

        for sid in sat_ids:
            records[sid].extend(advance_clocks_and_expire(queues[sid], t, model.ttl_slots))

        if constellation_mode:
            for row in sorted(assoc):
                sid = assoc[row]
                pos = scn.ut_positions[row]
                if geom.elevation_deg(pos, state.satellites[sid].position) >= (
                    cfg.constellation.min_elevation_deg
                ):
                    continue
                new_sid = geom.associate_satellite(pos, state, slot_s)
                if new_sid is not None and new_sid != sid:
                    handover_transfer(
                        queues[sid],
                        queues[new_sid],
                        int(scn.ut_ids[row]),
                        model.buffer_capacity_bits,
                    )
                    assoc[row] = new_sid

        prev_snaps = new_snaps

    return _assemble_metrics(cfg, scn, queues, records, violations, min_margin, relaxed, trace_rows)


def _assemble_metrics(cfg, scn, queues, records, violations, min_margin, relaxed, trace_rows):
    sim_time = cfg.num_slots * cfg.slot_duration_s
    if cfg.mode == "neighbors":
        meter_sids = [scn.focal_sat_id]
        meter_uts = cfg.num_uts
    else:
        meter_sids = sorted(queues)
        meter_uts = len(scn.ut_ids)
    served = sum(queues[s].served_bits for s in meter_sids)
    completions = [r for s in meter_sids for r in records[s] if not r.expired]
    latencies = np.array([r.latency_slots for r in completions], dtype=float)
    mean_lat = float(latencies.mean()) if latencies.size else 0.0
    p95 = float(np.percentile(latencies, 95)) if latencies.size else 0.0

    all_q = list(queues.values())
    arrived = sum(q.arrived_bits for q in all_q)
    expired = sum(q.expired_bits for q in all_q)
    dropped = sum(q.dropped_bits for q in all_q)
    residual = sum(q.residual_bits() for q in all_q)

    # Training cost: finished bursts at their latency, leftovers at their age.
    ages = [
        e.wait_slots for s in meter_sids for e in queues[s].entries.values()
    ]
    done = [r.latency_slots for s in meter_sids for r in records[s]]
    denom = len(ages) + len(done)
    cost = float((sum(ages) + sum(done)) / denom) if denom else 0.0

    return Metrics(
        throughput_bps=served / sim_time,
        throughput_per_ut_bps=served / sim_time / max(meter_uts, 1),
        mean_latency_slots=mean_lat,
        mean_latency_s=mean_lat * cfg.slot_duration_s,
        p95_latency_slots=p95,
        served_bits=served,
        arrived_bits=arrived,
        expired_bits=expired,
        dropped_bits=dropped,
        residual_bits=residual,
        expiry_rate=(expired / arrived) if arrived > 0 else 0.0,
        completions=len(completions),
        epfd_violations=violations,
        epfd_min_margin_db=min_margin,
        conservation_error_bits=conservation_error_bits(all_q),
        relaxed_n=relaxed,
        training_cost=cost,
        trace=trace_rows,
    )


# -- sweeps -------------------------------------------------------------------


def apply_axis(cfg: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    if axis == "neighbors":
        return replace(cfg, num_neighbors=int(value))
    if axis == "power":
        return replace(cfg, satellite=replace(cfg.satellite, total_power_w=float(value)))
    if axis == "beams":
        return replace(cfg, satellite=replace(cfg.satellite, num_spot_beams=int(value)))
    if axis == "uts":
        return replace(cfg, num_uts=int(value))
    if axis == "arrival_rate":
        return replace(cfg, traffic=replace(cfg.traffic, arrival_rate_per_s=float(value)))
    raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")


def _sweep_task(payload):
    idx, cfg = payload
    return idx, run_episode(cfg).row()


def run_sweep(
    cfg: ScenarioConfig,
    axis: str,
    values: list,
    strategies: list[str],
    seeds: list[int],
    jobs: int | None = 1,
) -> list[dict]:
    """Paired-seed grid over (axis value, strategy); rows sorted and
    aggregated in a fixed order so output bytes never depend on scheduling.
    """
    tasks = []
    keys = []
    for value in values:
        for strategy in strategies:
            for seed in seeds:
                run_cfg = apply_axis(cfg, axis, value)
                run_cfg = replace(run_cfg, strategy=strategy, seed=int(seed))
                keys.append((value, strategy, seed))
                tasks.append((len(tasks), run_cfg))
    if jobs is None:
        jobs = min(len(tasks), os.cpu_count() or 1)
    results: dict[int, dict] = {}
    if jobs <= 1:
        for payload in tasks:
            idx, row = _sweep_task(payload)
            results[idx] = row
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for idx, row in pool.map(_sweep_task, tasks):
                results[idx] = row
    rows = []
    per_point: dict[tuple, dict[str, list]] = {}
    for idx, (value, strategy, seed) in enumerate(keys):
        point = per_point.setdefault((value, strategy), {m: [] for m in METRIC_COLUMNS})
        for m in METRIC_COLUMNS:
            point[m].append(float(results[idx][m]))
    for value in values:
        for strategy in strategies:
            point = per_point[(value, strategy)]
            for metric in METRIC_COLUMNS:
                vals = np.asarray(point[metric])
                # infinite margins (no protected users) make the spread nan
                with np.errstate(invalid="ignore"):
                    stderr = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
                rows.append(
                    {
                        "axis": axis,
                        "axis_value": value,
                        "strategy": strategy,
                        "metric": metric,
                        "mean": float(vals.mean()),
                        "stderr": stderr,
                        "seeds": ";".join(str(s) for s in seeds),
                    }
                )
    return rows


def sweep_rows_to_csv(rows: list[dict], cfg: ScenarioConfig) -> str:
    lines = [
        f"# config_hash={config_hash(cfg)}",
        f"# seed={cfg.seed}",
        "# artifact_version=1",
        "axis,axis_value,strategy,metric,mean,stderr,seeds",
    ]
    for r in rows:
        lines.append(
            f"{r['axis']},{r['axis_value']!r},{r['strategy']},{r['metric']},"
            f"{r['mean']!r},{r['stderr']!r},{r['seeds']}"
        )
    return "\n".join(lines) + "\n"


def metrics_to_csv(metrics: Metrics, cfg: ScenarioConfig) -> str:
    lines = [
        f"# config_hash={config_hash(cfg)}",
        f"# seed={cfg.seed}",
        "# artifact_version=1",
        ",".join(METRIC_COLUMNS),
    ]
    row = metrics.row()
    lines.append(",".join(repr(row[m]) if isinstance(row[m], float) else str(row[m]) for m in METRIC_COLUMNS))
    return "\n".join(lines) + "\n"


# -- training -----------------------------------------------------------------


def training_config(seed: int = 0) -> ScenarioConfig:
    """Small single-satellite scenario for policy training.

    Low per-channel SNR, one protected channel, Poisson load around 0.7
    utilization: the regime where edge choices move the latency.
    """
    from .config import ProtectedUserBlock, RfBlock, SatelliteBlock, TrafficBlock

    return ScenarioConfig(
        seed=seed,
        mode="neighbors",
        strategy="proposed",
        num_slots=30,
        num_neighbors=0,
        num_uts=50,
        decision_mode="sample",
        satellite=SatelliteBlock(num_spot_beams=8, max_channels_per_beam=4, total_power_w=0.005),
        rf=RfBlock(num_channels=4),
        traffic=TrafficBlock(arrival_rate_per_s=2.0),
        protected_users=[ProtectedUserBlock(user_id=0, active_channels=[2])],
    )


def training_episode_runner(base_cfg: ScenarioConfig):
    """Adapter giving the trainer a (policy, rng) -> cost callable.

    Each call reseeds the scenario from the trainer's rng so episodes see
    fresh traffic while staying reproducible end to end.
    """

    def run(policy, rng: np.random.Generator) -> float:
        seed = int(rng.integers(0, 2**31 - 1))
        cfg = replace(base_cfg, seed=seed)
        metrics = run_episode(cfg, policy=policy, decision_mode="sample")
        return metrics.training_cost

    return run


def bandit_decision_view() -> PolicyInput:
    """Frozen two-beam, one-channel decision context.

    A synthetic probe for the policy's beam head: no graph behind it, just
    two distinguishable beams competing for a single empty channel. Feature
    scales mirror the real encoders (unit-vector directions, order-one
    scaled budget/backlog/wait entries).
    """
    beams = np.array(
        [
            [1.0, 0.0, 0.0, 0.45, 0.10, 0.05],
            [0.0, 1.0, 0.0, 0.45, 0.80, 0.60],
        ]
    )
    return PolicyInput(
        channel_index=0,
        num_channels=1,
        channel_feature=np.array([0.5, -0.5, 0.25, 0.25]),
        beam_features=beams,
        edge_tokens=np.zeros((0, 12)),
        admissible=[0, 1],
        admissible_local=[0, 1],
        graph=None,
    )


def bandit_episode_runner(beam_costs: tuple[float, float] = (1.0, 0.25), picks_per_episode: int = 16):
    """Two-beam pick scenario with a fixed latency cost per beam.

    Each episode repeatedly asks the policy to pick a beam for the single
    channel of bandit_decision_view and charges the chosen beam's fixed
    cost, so one beam is always the cheaper choice (beam 1 by default).
    Isolates the beam-selection head for convergence checks: a trained
    policy should concentrate its pick probability on the cheap beam.
    """
    view = bandit_decision_view()
    costs = np.asarray(beam_costs, dtype=float)
    if costs.shape[0] != view.beam_features.shape[0]:
        raise ValueError("one cost per beam")

    def run(policy, rng: np.random.Generator) -> float:
        total = 0.0
        for _ in range(picks_per_episode):
            probs = np.asarray(policy.node_distribution(view), dtype=float)
            idx = int(rng.choice(costs.shape[0], p=probs / probs.sum()))
            observe = getattr(policy, "observe_node_choice", None)
            if observe is not None:
                observe(idx)
            total += float(costs[idx])
        return total / picks_per_episode

    return run


# -- sweep presets ------------------------------------------------------------

# Throughput vs. neighbor count: dense hotspot cohorts, saturated buffers,
# high power. Interference exposure is what separates the strategies.
_FIG3_OVERRIDES = {
    "mode": "neighbors",
    "num_slots": 10,
    "num_uts": 40,
    "ut_drop_cap_scale": 0.008,
    "neighbor_ring_scale": 0.025,
    "satellite": {"num_spot_beams": 8, "max_channels_per_beam": 2},
    "rf": {"num_channels": 4},
    "traffic": {"process": "saturated", "ttl_slots": 1000},
}

# Throughput vs. power and beam count at two neighbors: low per-channel SNR
# (log regime) with one protected channel.
_FIG4_OVERRIDES = {
    "mode": "neighbors",
    "num_slots": 10,
    "num_neighbors": 2,
    "num_uts": 64,
    "ut_drop_cap_scale": 1.0,
    "satellite": {
        "num_spot_beams": 8,
        "max_channels_per_beam": 4,
        "total_power_w": 0.02,
    },
    "rf": {"num_channels": 4},
    "traffic": {"process": "saturated", "ttl_slots": 1000},
    "protected_users": [{"user_id": 0, "lat_deg": 0.0, "lon_deg": 0.0, "active_channels": [2]}],
}

# Latency vs. load: Poisson arrivals near the full-reuse stability edge.
_FIG5_OVERRIDES = {
    "mode": "neighbors",
    "num_slots": 300,
    "num_neighbors": 2,
    "num_uts": 200,
    "ut_drop_cap_scale": 1.0,
    "satellite": {
        "num_spot_beams": 8,
        "max_channels_per_beam": 4,
        "total_power_w": 0.005,
    },
    "rf": {"num_channels": 4},
    "traffic": {"arrival_rate_per_s": 2.0, "ttl_slots": 500},
    "protected_users": [{"user_id": 0, "lat_deg": 0.0, "lon_deg": 0.0, "active_channels": [2]}],
}

SWEEP_PRESETS: dict[str, dict] = {
    "fig3": {
        "overrides": _FIG3_OVERRIDES,
        "axis": "neighbors",
        "values": [2, 4, 6, 8],
        "strategies": ["proposed", "single_channel", "full_reuse"],
        "seeds": list(range(20)),
        "metric": "throughput_bps",
    },
    "fig4": {
        "overrides": _FIG4_OVERRIDES,
        "axis": "power",
        "values": [0.02, 0.04],
        "strategies": ["proposed", "full_reuse"],
        "seeds": list(range(8)),
        "metric": "throughput_bps",
    },
    "fig5": {
        "overrides": _FIG5_OVERRIDES,
        "axis": "uts",
        "values": [100, 200, 300],
        "strategies": ["proposed", "single_channel", "full_reuse"],
        "seeds": list(range(5)),
        "metric": "mean_latency_slots",
    },
}


def preset_base_config(name: str, seed: int = 0) -> ScenarioConfig:
    from .config import config_from_dict

    preset = SWEEP_PRESETS[name]
    data = {"seed": seed}
    data.update(_deep_copy_json(preset["overrides"]))
    return config_from_dict(data)


def _deep_copy_json(obj):
    if isinstance(obj, dict):
        return {k: _deep_copy_json(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_deep_copy_json(v) for v in obj]
    return obj
