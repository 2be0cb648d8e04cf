"""Per-slot beam placement: cluster the backlogged terminals on the sphere
with waiting-time weights, serve the longest-waiting terminal per cluster,
and split the satellite power budget by backlog.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geom import unit


@dataclass
class ClusterState:
    centers: np.ndarray  # (K, 3) unit vectors
    labels: np.ndarray  # (n,) cluster index per terminal
    iterations: int
    cost: float


def _weighted_cost(points: np.ndarray, weights: np.ndarray, centers: np.ndarray, labels: np.ndarray) -> float:
    # 1 - cos(angle) to the assigned center; the M step below is exactly
    # optimal for this objective, so Lloyd iterations never increase it.
    cos_sim = np.einsum("ij,ij->i", points, centers[labels])
    return float(np.sum(weights * (1.0 - cos_sim)))


def weighted_kmeans(
    positions: np.ndarray,
    weights: np.ndarray,
    num_clusters: int,
    max_iters: int = 50,
    tol_rad: float = 1e-6,
) -> ClusterState:
    """Spherical K-means with nonnegative per-point weights.

    Seeding: the num_clusters highest-weight points (ties by original order,
    which the caller arranges as backlog then id). Assignment: nearest center
    by great-circle distance, ties to the lower cluster index. Update:
    weighted Euclidean mean renormalized to the sphere; a cluster whose
    weights sum to zero falls back to its unweighted mean, and an empty
    cluster keeps its previous center.
    """
    pts = unit(np.asarray(positions, dtype=float))
    w = np.asarray(weights, dtype=float)
    n = len(pts)
    k = min(num_clusters, n)
    order = np.argsort(-w, kind="stable")
    centers = pts[order[:k]].copy()
    labels = np.zeros(n, dtype=int)
    it = 0
    for it in range(1, max_iters + 1):
        # argmax cosine == argmin great-circle distance, first index on ties
        labels = np.argmax(pts @ centers.T, axis=1)
        new_centers = centers.copy()
        for c in range(k):
            mask = labels == c
            if not mask.any():
                continue
            wc = w[mask]
            if wc.sum() > 0.0:
                mean = (wc[:, None] * pts[mask]).sum(axis=0) / wc.sum()
            else:
                mean = pts[mask].mean(axis=0)
            norm = np.linalg.norm(mean)
            if norm > 0.0:
                new_centers[c] = mean / norm
        move = np.max(np.arccos(np.clip(np.einsum("ij,ij->i", centers, new_centers), -1.0, 1.0)))
        centers = new_centers
        if move < tol_rad:
            break
    labels = np.argmax(pts @ centers.T, axis=1)
    return ClusterState(centers, labels, it, _weighted_cost(pts, w, centers, labels))


@dataclass
class BeamAssignment:
    """Which terminal each spot beam serves this slot (None = idle)."""

    ut_index: list[int | None]  # per beam, index into this slot's UT arrays
    boresights: np.ndarray  # (B, 3) unit vectors from the satellite


def select_serving_uts(
    labels: np.ndarray,
    num_beams: int,
    wait_slots: np.ndarray,
    backlog_bits: np.ndarray,
    ut_ids: np.ndarray,
) -> list[int | None]:
    """Per cluster, pick the terminal with the longest wait.

    Ties break on larger backlog, then lower terminal id. Cluster k feeds
    beam k; clusters beyond num_beams are ignored (the caller never creates
    more clusters than beams).
    """
    chosen: list[int | None] = [None] * num_beams
    for c in range(min(num_beams, 0 if labels.size == 0 else labels.max() + 1)):
        members = np.nonzero(labels == c)[0]
        if members.size == 0:
            continue
        key = sorted(
            members, key=lambda i: (-wait_slots[i], -backlog_bits[i], ut_ids[i])
        )
        chosen[c] = int(key[0])
    return chosen


def split_beam_power(
    total_power_w: float, serving: list[int | None], backlog_bits: np.ndarray
) -> np.ndarray:
    """Beam budgets proportional to the served terminal's backlog.

    Zero everywhere when nothing is backlogged; beams only earn power for
    data they can actually send.
    """
    weights = np.array(
        [0.0 if i is None else max(0.0, backlog_bits[i]) for i in serving]
    )
    total_w = weights.sum()
    if total_w <= 0.0:
        return np.zeros(len(serving))
    return total_power_w * weights / total_w


def plan_beams(
    sat_pos: np.ndarray,
    ut_positions: np.ndarray,
    ut_ids: np.ndarray,
    backlog_bits: np.ndarray,
    wait_slots: np.ndarray,
    num_beams: int,
    total_power_w: float,
    max_iters: int = 50,
    tol_rad: float = 1e-6,
) -> tuple[BeamAssignment, np.ndarray]:
    """Stage-one scheduling for one satellite and one slot.

    Only backlogged terminals compete for beams. Returns the assignment and
    the per-beam power budgets. Idle beams keep a nadir boresight and a zero
    budget.
    """
    nadir = -unit(sat_pos)
    boresights = np.tile(nadir, (num_beams, 1))
    active = np.nonzero(backlog_bits > 0.0)[0]
    if active.size == 0:
        return BeamAssignment([None] * num_beams, boresights), np.zeros(num_beams)

    # Seeding order: wait desc, backlog desc, id asc (stable sort by key).
    seed_order = sorted(active, key=lambda i: (-wait_slots[i], -backlog_bits[i], ut_ids[i]))
    seq = np.array(seed_order)
    cluster = weighted_kmeans(
        ut_positions[seq], wait_slots[seq].astype(float), num_beams, max_iters, tol_rad
    )
    serving_local = select_serving_uts(
        cluster.labels, num_beams, wait_slots[seq], backlog_bits[seq], ut_ids[seq]
    )
    serving = [None if i is None else int(seq[i]) for i in serving_local]
    for b, i in enumerate(serving):
        if i is not None:
            boresights[b] = unit(ut_positions[i] - sat_pos)
    budgets = split_beam_power(total_power_w, serving, backlog_bits)
    return BeamAssignment(serving, boresights), budgets
