"""Downlink buffers and delay accounting.

Each (satellite, terminal) pair holds one aggregated backlog. A burst starts
when data arrives at an empty buffer; its waiting clock ticks once per slot
while the backlog is nonzero and freezes otherwise. A burst completes when
the backlog drains to zero, yielding latency = completion slot - arrival
slot, or expires when the clock exceeds the time-to-live.

Bit conservation holds globally: arrived = served + residual + dropped +
expired, with handovers moving backlog (and its clock) between satellites
without touching any counter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class TrafficModel:
    arrival_rate_per_s: float = 2.0  # packet arrivals per terminal per second
    packet_size_bits: float = 1e6
    buffer_capacity_bits: float = 1e8
    ttl_slots: int = 500
    process: str = "poisson"  # "poisson" | "saturated"


@dataclass
class BufferEntry:
    q_bits: float
    wait_slots: int
    arrival_slot: int
    burst_bits: float = 0.0  # total accepted into the current burst


@dataclass
class CompletionRecord:
    ut_id: int
    arrival_slot: int
    end_slot: int
    bits: float
    expired: bool

    @property
    def latency_slots(self) -> int:
        return self.end_slot - self.arrival_slot


@dataclass
class QueueState:
    """All buffered downlink data held by one satellite."""

    entries: dict[int, BufferEntry] = field(default_factory=dict)
    arrived_bits: float = 0.0
    served_bits: float = 0.0
    dropped_bits: float = 0.0
    expired_bits: float = 0.0
    served_this_slot: dict[int, float] = field(default_factory=dict)

    def backlog_bits(self, ut_id: int) -> float:
        e = self.entries.get(ut_id)
        return 0.0 if e is None else e.q_bits

    def wait_slots(self, ut_id: int) -> int:
        e = self.entries.get(ut_id)
        return 0 if e is None else e.wait_slots

    def residual_bits(self) -> float:
        return float(sum(e.q_bits for e in self.entries.values()))

    def backlogged_ids(self) -> list[int]:
        return sorted(u for u, e in self.entries.items() if e.q_bits > 0.0)


def enqueue_bits(queue: QueueState, ut_id: int, bits: float, slot: int, capacity_bits: float):
    """Add bits for a terminal, dropping whatever exceeds buffer capacity.

    All offered bits count as arrived; overflow goes to the dropped counter.
    """
    if bits <= 0.0:
        return
    entry = queue.entries.get(ut_id)
    have = 0.0 if entry is None else entry.q_bits
    accepted = min(bits, max(0.0, capacity_bits - have))
    queue.arrived_bits += bits
    queue.dropped_bits += bits - accepted
    if accepted <= 0.0:
        return
    if entry is None or entry.q_bits <= 0.0:
        queue.entries[ut_id] = BufferEntry(accepted, 0, slot, accepted)
    else:
        entry.q_bits += accepted
        entry.burst_bits += accepted


def enqueue_arrivals(
    queue: QueueState,
    ut_ids: list[int],
    slot: int,
    slot_s: float,
    model: TrafficModel,
    rng: np.random.Generator,
):
    """Draw this slot's arrivals for every terminal of one satellite."""
    if model.process == "saturated":
        for u in ut_ids:
            have = queue.backlog_bits(u)
            enqueue_bits(queue, u, model.buffer_capacity_bits - have, slot, model.buffer_capacity_bits)
        return
    lam = model.arrival_rate_per_s * slot_s
    counts = rng.poisson(lam, size=len(ut_ids))
    for u, k in zip(ut_ids, counts):
        if k > 0:
            enqueue_bits(queue, u, k * model.packet_size_bits, slot, model.buffer_capacity_bits)


def transmit_step(q_bits: float, rate_bps: float, slot_s: float) -> tuple[float, float]:
    """Serve min(Q, R*dT); returns (bits served, backlog after)."""
    served = min(q_bits, max(0.0, rate_bps) * slot_s)
    return served, q_bits - served


def apply_service(queue: QueueState, ut_id: int, rate_bps: float, slot_s: float) -> float:
    entry = queue.entries.get(ut_id)
    if entry is None or entry.q_bits <= 0.0:
        return 0.0
    served, remaining = transmit_step(entry.q_bits, rate_bps, slot_s)
    entry.q_bits = remaining
    queue.served_bits += served
    queue.served_this_slot[ut_id] = queue.served_this_slot.get(ut_id, 0.0) + served
    return served


def advance_clocks_and_expire(
    queue: QueueState, slot: int, ttl_slots: int
) -> list[CompletionRecord]:
    """End-of-slot bookkeeping: completions, clock ticks, TTL expiry.

    A backlog that drained during this slot completes at the start of the
    next slot, so latency = (slot + 1) - arrival_slot.
    """
    records = []
    drained = [u for u, e in queue.entries.items() if e.q_bits <= 0.0]
    for u in sorted(drained):
        e = queue.entries.pop(u)
        records.append(CompletionRecord(u, e.arrival_slot, slot + 1, e.burst_bits, expired=False))
    for u in sorted(queue.entries):
        e = queue.entries[u]
        e.wait_slots += 1
        if e.wait_slots > ttl_slots:
            queue.expired_bits += e.q_bits
            records.append(CompletionRecord(u, e.arrival_slot, slot + 1, e.q_bits, expired=True))
            del queue.entries[u]
    queue.served_this_slot.clear()
    return records


def handover_transfer(src: QueueState, dst: QueueState, ut_id: int, capacity_bits: float) -> float:
    """Move a terminal's backlog and waiting clock to another satellite.

    Bits beyond the destination's free capacity are dropped and counted
    against the destination. Returns the bits that moved.
    """
    entry = src.entries.pop(ut_id, None)
    if entry is None:
        return 0.0
    room = max(0.0, capacity_bits - dst.backlog_bits(ut_id))
    moved = min(entry.q_bits, room)
    dropped = entry.q_bits - moved
    dst.dropped_bits += dropped
    if ut_id in dst.entries and dst.entries[ut_id].q_bits > 0.0:
        # Destination already buffers this terminal; merge, keep older clock.
        d = dst.entries[ut_id]
        d.q_bits += moved
        d.burst_bits += moved
        d.wait_slots = max(d.wait_slots, entry.wait_slots)
        d.arrival_slot = min(d.arrival_slot, entry.arrival_slot)
    elif moved > 0.0:
        dst.entries[ut_id] = BufferEntry(moved, entry.wait_slots, entry.arrival_slot, entry.burst_bits)
    return moved


def conservation_error_bits(queues: list[QueueState]) -> float:
    """Global imbalance |arrived - served - residual - dropped - expired|."""
    arrived = sum(q.arrived_bits for q in queues)
    served = sum(q.served_bits for q in queues)
    residual = sum(q.residual_bits() for q in queues)
    expired = sum(q.expired_bits for q in queues)
    dropped = sum(q.dropped_bits for q in queues)
    return abs(arrived - served - residual - expired - dropped)
