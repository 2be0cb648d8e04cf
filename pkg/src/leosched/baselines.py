"""Reference allocation strategies the generative allocator is compared to.

Full frequency reuse puts every channel on every active beam with a fixed
even power split; when a protected receiver forces a channel's power down,
the freed power is deliberately not redistributed, matching the strategy's
fixed-split definition. Single channel gives each active beam one channel,
chosen to be the quietest by last slot's interference measurement, with the
whole beam budget on it.
"""

from __future__ import annotations

import numpy as np

from .allocgraph import AllocationGraph, SlotContext, init_graph


def full_reuse_allocation(ctx: SlotContext) -> AllocationGraph:
    """Every served beam transmits on all channels at budget/M each.

    Ignores the per-beam channel-aggregation limit when it is lower than
    the channel count; the graph is flagged relaxed_n so runs can report
    the relaxation. Per-edge power respects the EIRP cap by clipping, and
    the protected-ceiling projection runs afterwards without refilling.
    """
    g = init_graph(ctx)
    M = g.num_channels
    g.relaxed_n = M > ctx.max_channels_per_beam
    for b in g.served_beams:
        share = min(float(ctx.beam_budgets_w[b]) / M, ctx.per_edge_cap_w)
        for m in range(M):
            g.add_edge(m, b)
            g.set_power(b, m, share)
    g.project_epfd()
    g.prune_zero_power_edges()
    return g


def single_channel_allocation(
    ctx: SlotContext, prev_interference_w: np.ndarray | None = None
) -> AllocationGraph:
    """Each served beam uses one channel, the quietest by current estimate.

    The estimate at a beam's terminal is last slot's measured co-channel
    power from other satellites (the part that is only known with a one-slot
    delay) plus the channels this satellite's earlier-indexed beams have
    already committed to in this slot, which the satellite knows exactly.
    Ties go to the lowest channel index; the whole beam budget lands on the
    chosen channel.
    """
    g = init_graph(ctx)
    M = g.num_channels
    for b in g.served_beams:
        loc = g._loc[b]
        i = g._ut_index[loc]
        if prev_interference_w is None:
            measured = np.zeros(M)
        else:
            measured = np.asarray(prev_interference_w[i], dtype=float).copy()
        # own-satellite commitments made earlier this slot, seen exactly
        own = g.alloc.powers_w[g.served_beams, :]  # (S, M)
        measured = measured + np.einsum("sm,sm->m", own, g.gain[:, loc, :])
        m = int(np.argmin(measured))  # argmin takes the lowest index on ties
        g.add_edge(m, b)
        g.set_power(b, m, min(float(ctx.beam_budgets_w[b]), ctx.per_edge_cap_w))
    g.project_epfd()
    g.prune_zero_power_edges()
    return g
