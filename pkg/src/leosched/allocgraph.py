"""Bipartite channel-beam allocation for one satellite and one slot.

Channels and served beams form the two node sets; an edge (m, b) means beam
b transmits on channel m. Edges are generated sequentially channel by
channel: an add-edge gate (forced open on each channel's first query)
followed by a beam choice over the admissible beams. After every committed
edge the graph refreshes its interference messages and re-solves the
per-beam power allocation, so later decisions see the consequences of
earlier ones.

Power solving is per-beam water-filling against interference-as-noise with
two kinds of per-edge upper bounds: a regulatory EIRP cap, and flux-density
caps discovered by projecting the allocation onto the protected-receiver
ceiling (most recently added co-channel edge scaled down first). Caps
persist within the slot, so subsequent refills shift power to clean
channels instead of bouncing against the ceiling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import db_to_linear, watts_to_dbw
from .interference import (
    PowerAllocation,
    ProtectedUser,
    RfEnvironment,
    TransmitterSnapshot,
    epfd_bandwidth_scale,
    inter_cci_w,
)
from .rf import fspl_db, rx_gain_dbi, tx_gain_dbi
from .scheduler import BeamAssignment


@dataclass
class SlotContext:
    """Frozen per-slot inputs for one satellite's allocator."""

    env: RfEnvironment
    sat_id: int
    sat_pos: np.ndarray
    assignment: BeamAssignment
    beam_budgets_w: np.ndarray  # (B,)
    total_budget_w: float
    ut_positions: np.ndarray  # (n, 3)
    ut_ids: np.ndarray
    backlog_bits: np.ndarray
    wait_slots: np.ndarray
    xi_serving: np.ndarray  # (n,) atmospheric factor terminal <-> this satellite
    neighbor_snapshots: list[TransmitterSnapshot] = field(default_factory=list)
    xi_inter: dict[int, np.ndarray] | None = None  # sat_id -> (n,) factors
    protected_users: list[ProtectedUser] = field(default_factory=list)
    max_channels_per_beam: int = 2
    per_edge_cap_w: float = math.inf


@dataclass
class _EpfdTerm:
    user: ProtectedUser
    coeff: np.ndarray  # (S,) watts -> W/m^2 at the user, per source beam
    active: np.ndarray  # (M,) bool
    target_lin: float  # ceiling in the reference bandwidth, with guard
    scale: float  # channel -> reference bandwidth fraction


# Guard keeps projected allocations strictly inside the ceiling despite
# floating-point roundoff in later audits.
_EPFD_GUARD = 1e-9


@dataclass
class StepRecord:
    add_prob: float
    decision: bool
    forced: bool
    admissible: list[int]  # global beam ids offered to the node scorer
    node_probs: np.ndarray | None
    chosen_beam: int | None
    exhausted: bool = False


@dataclass
class GenerationTrace:
    channels: list[list[StepRecord]]


@dataclass
class PolicyInput:
    """Normalized view handed to allocation policies.

    Neural policies consume the arrays; rule-based policies may reach into
    the graph itself.
    """

    channel_index: int
    num_channels: int
    channel_feature: np.ndarray  # (4,)
    beam_features: np.ndarray  # (S, 6) for served beams
    edge_tokens: np.ndarray  # (E, 12)
    admissible: list[int]  # global beam ids
    admissible_local: list[int]  # rows of beam_features
    graph: "AllocationGraph | None" = None


class AllocationGraph:
    """Mutable allocation state for one satellite-slot."""

    def __init__(self, ctx: SlotContext):
        self.ctx = ctx
        env = ctx.env
        B = len(ctx.assignment.ut_index)
        M = env.channels.num_channels
        self.num_beams = B
        self.num_channels = M
        self.served_beams = [b for b, i in enumerate(ctx.assignment.ut_index) if i is not None]
        self._loc = {b: k for k, b in enumerate(self.served_beams)}
        self.alloc = PowerAllocation.zeros(B, M, ctx.beam_budgets_w, ctx.total_budget_w)
        self.edges: list[tuple[int, int]] = []  # (channel, global beam id), add order
        self._edge_set: set[tuple[int, int]] = set()
        self._beam_edges: dict[int, list[int]] = {}
        self._chan_beams: dict[int, list[int]] = {}
        self.epfd_caps: dict[tuple[int, int], float] = {}
        self.relaxed_n = False
        self._wf_cache: dict[int, tuple] = {}

        S = len(self.served_beams)
        self._ut_index = [ctx.assignment.ut_index[b] for b in self.served_beams]
        freqs = env.channels.carrier_frequencies_hz
        self.gain = np.zeros((S, S, M))  # source beam, victim beam, channel
        self.loss_db = np.zeros((S, M))
        self.xi = np.ones(S)
        self.inter_w = np.zeros((S, M))
        up = ctx.ut_positions
        for v_loc, b_v in enumerate(self.served_beams):
            i = self._ut_index[v_loc]
            u = up[i]
            xi = float(ctx.xi_serving[i])
            self.xi[v_loc] = xi
            los = u - ctx.sat_pos
            d = float(np.linalg.norm(los))
            self.loss_db[v_loc] = fspl_db(d, freqs)
            los_hat = los / d
            bores = ctx.assignment.boresights[self.served_beams]
            dots = np.clip(bores @ los_hat, -1.0, 1.0)
            off = np.degrees(np.arccos(dots))
            off[v_loc] = 0.0  # serving beam tracks its terminal exactly
            gt = db_to_linear(tx_gain_dbi(env.tx, off))
            gr = db_to_linear(rx_gain_dbi(env.rx, 0.0))
            fs = db_to_linear(self.loss_db[v_loc])
            self.gain[:, v_loc, :] = gt[:, None] * gr / (fs[None, :] * xi)
            if ctx.neighbor_snapshots:
                xi_n = None
                if ctx.xi_inter is not None:
                    xi_n = {s: float(arr[i]) for s, arr in ctx.xi_inter.items()}
                self.inter_w[v_loc] = inter_cci_w(
                    env, u, ctx.sat_pos, ctx.neighbor_snapshots, xi_n
                )
        self.intra_w = np.zeros((S, M))
        self._epfd_terms = [self._build_epfd_term(pu) for pu in ctx.protected_users]

    def _build_epfd_term(self, user: ProtectedUser) -> _EpfdTerm:
        ctx = self.ctx
        los = user.position - ctx.sat_pos
        d = float(np.linalg.norm(los))
        los_hat = los / d
        bores = ctx.assignment.boresights[self.served_beams]
        dots = np.clip(bores @ los_hat, -1.0, 1.0)
        off = np.degrees(np.arccos(dots))
        gt = db_to_linear(tx_gain_dbi(ctx.env.tx, off))
        from .geom import unit as _unit

        psi = math.degrees(
            math.acos(float(np.clip(_unit(user.boresight) @ _unit(-los), -1.0, 1.0)))
        )
        disc = db_to_linear(rx_gain_dbi(user.rx, psi) - user.rx.g_max_dbi)
        coeff = gt * disc / (4.0 * math.pi * d**2)
        active = np.zeros(self.num_channels, dtype=bool)
        for m in user.active_channels:
            if 0 <= m < self.num_channels:
                active[m] = True
        scale = epfd_bandwidth_scale(
            ctx.env.channels.bandwidth_hz, user.reference_bandwidth_hz
        )
        target = db_to_linear(user.kappa_dbw_per_m2) * (1.0 - _EPFD_GUARD)
        return _EpfdTerm(user, coeff, active, target, scale)

    # -- basic edge/power accessors -------------------------------------

    def has_edge(self, m: int, b: int) -> bool:
        return (m, b) in self._edge_set

    def edges_of_beam(self, b: int) -> list[int]:
        return self._beam_edges.get(b, [])

    def beams_on_channel(self, m: int) -> list[int]:
        return self._chan_beams.get(m, [])

    def admissible_beams(self, m: int) -> list[int]:
        """Served beams that may still take channel m, ascending beam id."""
        n_max = self.ctx.max_channels_per_beam
        taken = self._chan_beams.get(m, ())
        out = []
        for b in self.served_beams:
            if b in taken:
                continue
            if len(self._beam_edges.get(b, ())) >= n_max:
                continue
            out.append(b)
        return out

    def add_edge(self, m: int, b: int):
        if (m, b) in self._edge_set:
            raise ValueError(f"edge ({m}, {b}) already present")
        self.edges.append((m, b))
        self._edge_set.add((m, b))
        self._beam_edges.setdefault(b, []).append(m)
        self._chan_beams.setdefault(m, []).append(b)

    def set_power(self, b: int, m: int, p_w: float):
        loc = self._loc[b]
        old = self.alloc.powers_w[b, m]
        if p_w == old:
            return
        self.alloc.powers_w[b, m] = p_w
        delta = p_w - old
        col = self.gain[loc, :, m] * delta
        col[loc] = 0.0
        self.intra_w[:, m] += col

    def serving_gain(self, b: int, m: int) -> float:
        loc = self._loc[b]
        return float(self.gain[loc, loc, m])

    def interference_at(self, b: int, m: int) -> float:
        """Intra plus inter co-channel interference at beam b's terminal."""
        loc = self._loc[b]
        return float(self.intra_w[loc, m] + self.inter_w[loc, m])

    def effective_noise(self, b: int, m: int) -> float:
        return self.ctx.env.noise_w + self.interference_at(b, m)

    def edge_cap_w(self, m: int, b: int) -> float:
        return min(self.ctx.per_edge_cap_w, self.epfd_caps.get((m, b), math.inf))

    def clone(self) -> "AllocationGraph":
        g = object.__new__(AllocationGraph)
        g.ctx = self.ctx
        g.num_beams = self.num_beams
        g.num_channels = self.num_channels
        g.served_beams = self.served_beams
        g._loc = self._loc
        g.alloc = self.alloc.copy()
        g.edges = list(self.edges)
        g._edge_set = set(self._edge_set)
        g._beam_edges = {b: list(ms) for b, ms in self._beam_edges.items()}
        g._chan_beams = {m: list(bs) for m, bs in self._chan_beams.items()}
        g.epfd_caps = dict(self.epfd_caps)
        g.relaxed_n = self.relaxed_n
        g._wf_cache = dict(self._wf_cache)
        g._ut_index = self._ut_index
        g.gain = self.gain
        g.loss_db = self.loss_db
        g.xi = self.xi
        g.inter_w = self.inter_w
        g.intra_w = self.intra_w.copy()
        g._epfd_terms = self._epfd_terms
        return g

    # -- messages ---------------------------------------------------------

    def propagate_messages(self):
        """Recompute intra-satellite interference from current powers."""
        P = self.alloc.powers_w[self.served_beams, :]  # (S, M)
        total = np.einsum("sm,svm->vm", P, self.gain)
        own = P * np.einsum("ssm->sm", self.gain)
        self.intra_w = total - own

    def edge_messages(self, m: int, b: int) -> dict[str, float]:
        loc = self._loc[b]
        return {
            "xi": float(self.xi[loc]),
            "loss_db": float(self.loss_db[loc, m]),
            "power_w": float(self.alloc.powers_w[b, m]),
            "intra_w": float(self.intra_w[loc, m]),
            "inter_w": float(self.inter_w[loc, m]),
        }

    # -- EPFD -------------------------------------------------------------

    def epfd_flux(self, term: _EpfdTerm) -> float:
        P = self.alloc.powers_w[self.served_beams, :]
        return float((P[:, term.active].sum(axis=1) * term.coeff).sum() * term.scale)

    def epfd_margins_db(self) -> dict[int, float]:
        """Margin to each protected ceiling from this satellite alone."""
        out = {}
        for term in self._epfd_terms:
            flux = self.epfd_flux(term)
            kappa = term.user.kappa_dbw_per_m2
            if flux <= 0.0:
                out[term.user.user_id] = math.inf
            else:
                out[term.user.user_id] = kappa - 10.0 * math.log10(flux)
        return out

    def project_epfd(self) -> float:
        """Public entry for the flux-ceiling projection (used by baselines)."""
        return self._project_epfd()

    def _project_epfd(self) -> float:
        """Scale allocations onto the protected ceilings; returns max change."""
        max_change = 0.0
        for term in self._epfd_terms:
            flux = self.epfd_flux(term)
            if flux <= term.target_lin:
                continue
            for m, b in reversed(self.edges):
                if not term.active[m]:
                    continue
                p = float(self.alloc.powers_w[b, m])
                if p <= 0.0:
                    continue
                c = term.coeff[self._loc[b]] * term.scale
                if c <= 0.0:
                    continue
                # Residual flux with this edge silenced, summed from the
                # small surviving terms; deriving new_p from it avoids the
                # cancellation of p - excess/c when p towers over the
                # ceiling, which could leave the flux above kappa itself.
                self.alloc.powers_w[b, m] = 0.0
                others = self.epfd_flux(term)
                self.alloc.powers_w[b, m] = p
                if others >= term.target_lin:
                    new_p = 0.0
                else:
                    new_p = min(p, (term.target_lin - others) / c)
                cap = self.epfd_caps.get((m, b), math.inf)
                self.epfd_caps[(m, b)] = min(cap, new_p)
                self.set_power(b, m, new_p)
                max_change = max(max_change, p - new_p)
                flux = others + new_p * c
                if flux <= term.target_lin:
                    break
        return max_change

    # -- power update ------------------------------------------------------

    def _water_fill_beam(self, b: int) -> float:
        ms = self.edges_of_beam(b)
        if not ms:
            return 0.0
        loc = self._loc[b]
        budget = float(self.alloc.beam_budgets_w[b])
        floors = []
        caps = []
        for m in ms:
            h = self.gain[loc, loc, m]
            n = self.ctx.env.noise_w + self.intra_w[loc, m] + self.inter_w[loc, m]
            floors.append(n / h)
            caps.append(self.edge_cap_w(m, b))
        key = (tuple(ms), tuple(floors), tuple(caps), budget)
        if self._wf_cache.get(b) == key:
            return 0.0
        p_new = water_fill(budget, floors, caps)
        change = 0.0
        for m, p in zip(ms, p_new):
            change = max(change, abs(p - float(self.alloc.powers_w[b, m])))
            self.set_power(b, m, p)
        self._wf_cache[b] = key
        return change

    def update_power(self, max_rounds: int = 10, tol_rel: float = 1e-6):
        """Alternate interference refresh, per-beam water-filling, and
        flux-ceiling projection until powers settle.

        Every pass ends with the projection, so the returned state respects
        the protected ceilings regardless of where the loop stopped.
        """
        scale = max(self.ctx.total_budget_w, 1e-30)
        for _ in range(max_rounds):
            self.propagate_messages()
            change = 0.0
            for b in self.served_beams:
                change = max(change, self._water_fill_beam(b))
            change = max(change, self._project_epfd())
            if change / scale <= tol_rel:
                break

    def sum_rate_objective(self) -> float:
        """Edge-sum Shannon rate against the current interference messages."""
        total = 0.0
        bw = self.ctx.env.channels.bandwidth_hz
        for m, b in self.edges:
            loc = self._loc[b]
            p = float(self.alloc.powers_w[b, m])
            n = self.ctx.env.noise_w + self.intra_w[loc, m] + self.inter_w[loc, m]
            total += bw * math.log2(1.0 + p * self.gain[loc, loc, m] / n)
        return total

    def prune_zero_power_edges(self):
        keep = [(m, b) for m, b in self.edges if self.alloc.powers_w[b, m] > 0.0]
        self.edges = keep
        self._edge_set = set(keep)
        self._beam_edges = {}
        self._chan_beams = {}
        for m, b in keep:
            self._beam_edges.setdefault(b, []).append(m)
            self._chan_beams.setdefault(m, []).append(b)

    def snapshot(self) -> TransmitterSnapshot:
        return TransmitterSnapshot(
            self.ctx.sat_id,
            self.ctx.sat_pos.copy(),
            self.ctx.assignment.boresights.copy(),
            self.alloc.powers_w.copy(),
        )


def water_fill(budget: float, floors: list[float], caps: list[float]) -> list[float]:
    """Water-filling with per-channel upper bounds, exact via KKT.

    Maximizes sum(log(1 + p_i / floors_i)) subject to sum(p) <= budget and
    0 <= p_i <= caps_i. floors_i is the effective noise-to-gain ratio.
    """
    n = len(floors)
    p = [0.0] * n
    if budget <= 0.0 or n == 0:
        return p
    if sum(caps) <= budget:
        return [float(c) for c in caps]
    free = set(range(n))
    remaining = budget
    while free:
        order = sorted(free, key=lambda i: floors[i])
        mu = None
        ksel = 0
        prefix = 0.0
        for k, i in enumerate(order, 1):
            prefix += floors[i]
            cand = (remaining + prefix) / k
            nxt = floors[order[k]] if k < len(order) else math.inf
            if cand <= nxt:
                mu, ksel = cand, k
                break
        overs = [i for i in order[:ksel] if mu - floors[i] > caps[i]]
        if not overs:
            for i in order[:ksel]:
                p[i] = mu - floors[i]
            break
        for i in overs:
            p[i] = caps[i]
            remaining -= caps[i]
            free.discard(i)
        if remaining <= 0.0:
            break
    return p


def init_graph(ctx: SlotContext) -> AllocationGraph:
    return AllocationGraph(ctx)


# -- policy-facing feature construction ------------------------------------

_DB_SCALE = 0.01  # dB quantities enter features divided by 100
_Q_SCALE = 1e-8  # bits -> (Mbit / 100)
_TAU_SCALE = 0.01  # slots / 100


def beam_feature_matrix(g: AllocationGraph) -> np.ndarray:
    ctx = g.ctx
    S = len(g.served_beams)
    out = np.zeros((S, 6))
    for k, b in enumerate(g.served_beams):
        i = g._ut_index[k]
        u = ctx.ut_positions[i]
        out[k, 0:3] = u / np.linalg.norm(u)
        out[k, 3] = watts_to_dbw(float(ctx.beam_budgets_w[b]), floor_dbw=-200.0) * _DB_SCALE
        out[k, 4] = float(ctx.backlog_bits[i]) * _Q_SCALE
        out[k, 5] = float(ctx.wait_slots[i]) * _TAU_SCALE
    return out


def channel_feature(g: AllocationGraph, m: int) -> np.ndarray:
    out = np.zeros(4)
    positions = []
    for term in g._epfd_terms:
        if term.active[m]:
            positions.append(term.user.position / np.linalg.norm(term.user.position))
    if positions:
        out[0:3] = np.mean(positions, axis=0)
        out[3] = len(positions) / 4.0
    return out


def edge_token_matrix(g: AllocationGraph, beam_feats: np.ndarray) -> np.ndarray:
    E = len(g.edges)
    out = np.zeros((E, 12))
    for k, (m, b) in enumerate(g.edges):
        loc = g._loc[b]
        msg = g.edge_messages(m, b)
        out[k, 0:6] = beam_feats[loc]
        out[k, 6] = (m + 1) / g.num_channels
        out[k, 7] = msg["xi"]
        out[k, 8] = msg["loss_db"] * _DB_SCALE
        out[k, 9] = watts_to_dbw(msg["power_w"], floor_dbw=-200.0) * _DB_SCALE
        out[k, 10] = watts_to_dbw(msg["intra_w"], floor_dbw=-200.0) * _DB_SCALE
        out[k, 11] = watts_to_dbw(msg["inter_w"], floor_dbw=-200.0) * _DB_SCALE
    return out


def build_policy_input(g: AllocationGraph, m: int, admissible: list[int]) -> PolicyInput:
    beam_feats = beam_feature_matrix(g)
    return PolicyInput(
        channel_index=m,
        num_channels=g.num_channels,
        channel_feature=channel_feature(g, m),
        beam_features=beam_feats,
        edge_tokens=edge_token_matrix(g, beam_feats),
        admissible=list(admissible),
        admissible_local=[g._loc[b] for b in admissible],
        graph=g,
    )


# -- sequential generation ---------------------------------------------------


def generate_allocation(
    ctx: SlotContext,
    policy,
    mode: str = "sample",
    rng: np.random.Generator | None = None,
    power_updates: bool = True,
    max_rounds: int = 10,
    tol_rel: float = 1e-6,
) -> tuple[AllocationGraph, GenerationTrace]:
    """Run the per-channel edge generation loop with the given policy.

    mode "sample" draws the gate and beam choices from the policy's
    probabilities with the supplied rng; "greedy" takes gate >= 0.5 and the
    argmax beam (ties to the lower beam id).
    """
    if mode == "sample" and rng is None:
        raise ValueError("sample mode needs an rng")
    g = init_graph(ctx)
    trace = GenerationTrace([])
    for m in range(g.num_channels):
        steps: list[StepRecord] = []
        for _ in range(len(g.served_beams)):
            first = len(g.beams_on_channel(m)) == 0
            admissible = g.admissible_beams(m)
            if not admissible:
                steps.append(StepRecord(0.0, False, False, [], None, None, exhausted=True))
                break
            view = build_policy_input(g, m, admissible)
            if first:
                add_prob, decision, forced = 1.0, True, True
            else:
                add_prob = float(policy.add_edge_prob(view))
                if mode == "sample":
                    decision = bool(rng.random() < add_prob)
                else:
                    decision = add_prob >= 0.5
                forced = False
                observe = getattr(policy, "observe_add_edge", None)
                if observe is not None:
                    observe(decision)
            if not decision:
                steps.append(StepRecord(add_prob, False, forced, list(admissible), None, None))
                break
            probs = np.asarray(policy.node_distribution(view), dtype=float)
            if mode == "sample":
                idx = int(rng.choice(len(admissible), p=probs / probs.sum()))
            else:
                idx = int(np.argmax(probs))
            observe = getattr(policy, "observe_node_choice", None)
            if observe is not None:
                observe(idx)
            b = admissible[idx]
            g.add_edge(m, b)
            if power_updates:
                g.update_power(max_rounds=max_rounds, tol_rel=tol_rel)
            steps.append(StepRecord(add_prob, True, forced, list(admissible), probs, b))
        trace.channels.append(steps)
    g.prune_zero_power_edges()
    return g, trace


def edge_probability(trace: GenerationTrace, m: int, b: int) -> float:
    """Probability that edge (m, b) was generated, along the recorded path.

    Sums, over the add steps of channel m, the node probability of beam b
    times the cumulative product of the gate probabilities up to that step.
    Exact whenever the policy's probabilities do not depend on earlier
    random choices; otherwise it is the paper-style path estimate.
    """
    total = 0.0
    cum = 1.0
    for step in trace.channels[m]:
        if not step.decision:
            break
        cum *= step.add_prob
        if step.node_probs is not None and b in step.admissible:
            total += cum * float(step.node_probs[step.admissible.index(b)])
    return total


def graph_probability(g: AllocationGraph, trace: GenerationTrace) -> float:
    """Product of per-edge probabilities over the realized edge set."""
    out = 1.0
    for m, b in g.edges:
        out *= edge_probability(trace, m, b)
    return out


def enumerate_graphs(
    ctx: SlotContext, policy, power_updates: bool = True, prob_floor: float = 0.0
) -> dict[frozenset, float]:
    """Exact outcome distribution over edge sets, for tiny instances.

    Walks the full decision tree of generate_allocation, branching at every
    gate and beam choice. Cost grows combinatorially; keep B*M small.
    """
    results: dict[frozenset, float] = {}

    def commit(g: AllocationGraph, m: int, b: int):
        g.add_edge(m, b)
        if power_updates:
            g.update_power()

    def finish(g: AllocationGraph, prob: float):
        g2 = g.clone()
        g2.prune_zero_power_edges()
        key = frozenset(g2.edges)
        results[key] = results.get(key, 0.0) + prob

    def channel_loop(g: AllocationGraph, m: int, step: int, prob: float):
        if prob <= prob_floor:
            return
        if m == g.num_channels:
            finish(g, prob)
            return
        if step >= len(g.served_beams):
            channel_loop(g, m + 1, 0, prob)
            return
        first = len(g.beams_on_channel(m)) == 0
        admissible = g.admissible_beams(m)
        if not admissible:
            channel_loop(g, m + 1, 0, prob)
            return
        if first:
            gate = 1.0
        else:
            view = build_policy_input(g, m, admissible)
            gate = float(policy.add_edge_prob(view))
            if gate < 1.0:
                channel_loop(g, m + 1, 0, prob * (1.0 - gate))
            if gate <= 0.0:
                return
        view = build_policy_input(g, m, admissible)
        probs = np.asarray(policy.node_distribution(view), dtype=float)
        for idx, b in enumerate(admissible):
            pb = float(probs[idx])
            if pb <= 0.0:
                continue
            g2 = g.clone()
            commit(g2, m, b)
            channel_loop(g2, m, step + 1, prob * gate * pb)

    g0 = init_graph(ctx)
    channel_loop(g0, 0, 0, 1.0)
    return results


def expected_cost_enumerated(ctx: SlotContext, policy, cost_fn, power_updates: bool = True) -> float:
    dist = enumerate_graphs(ctx, policy, power_updates=power_updates)
    return sum(p * cost_fn(edges) for edges, p in dist.items())


def expected_cost_sampled(
    ctx: SlotContext,
    policy,
    cost_fn,
    n_samples: int,
    rng: np.random.Generator,
    power_updates: bool = True,
) -> float:
    total = 0.0
    for _ in range(n_samples):
        g, _ = generate_allocation(ctx, policy, "sample", rng, power_updates=power_updates)
        total += cost_fn(frozenset(g.edges))
    return total / n_samples
