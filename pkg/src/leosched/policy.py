"""Allocation policies: learned two-headed scorer and a rule-based heuristic.

The learned policy runs two decision heads over a shared input layout. An
attention block summarizes the current edge set from the perspective of the
channel being allocated; a gate head turns that summary into the
add-another-edge probability, and a node head scores each admissible beam.
Both heads carry hand-written backward passes for the log-probability of an
observed decision, so score-function gradients need no autodiff framework.

All-zero parameters give a 0.5 gate and a uniform beam distribution, which
makes the untrained policy a well-defined random baseline.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .allocgraph import PolicyInput

EMBED_DIM = 16
HIDDEN_DIM = 32
CHANNEL_FEATURE_DIM = 4
BEAM_FEATURE_DIM = 6
EDGE_TOKEN_DIM = 12

# name -> shape; two independent parameter streams, gate (g*) and node (n*)
PARAM_SHAPES: dict[str, tuple] = {
    "gq_W": (EMBED_DIM, CHANNEL_FEATURE_DIM),
    "gq_b": (EMBED_DIM,),
    "gk_W": (EMBED_DIM, EDGE_TOKEN_DIM),
    "gk_b": (EMBED_DIM,),
    "gv_W": (EMBED_DIM, EDGE_TOKEN_DIM),
    "gv_b": (EMBED_DIM,),
    "g1_W": (HIDDEN_DIM, 2 * EMBED_DIM),
    "g1_b": (HIDDEN_DIM,),
    "g2_w": (HIDDEN_DIM,),
    "g2_b": (),
    "nq_W": (EMBED_DIM, CHANNEL_FEATURE_DIM),
    "nq_b": (EMBED_DIM,),
    "nk_W": (EMBED_DIM, EDGE_TOKEN_DIM),
    "nk_b": (EMBED_DIM,),
    "nv_W": (EMBED_DIM, EDGE_TOKEN_DIM),
    "nv_b": (EMBED_DIM,),
    "ne_W": (EMBED_DIM, BEAM_FEATURE_DIM),
    "ne_b": (EMBED_DIM,),
    "n1_W": (HIDDEN_DIM, 3 * EMBED_DIM),
    "n1_b": (HIDDEN_DIM,),
    "n2_w": (HIDDEN_DIM,),
    "n2_b": (),
}


def zero_params() -> dict[str, np.ndarray]:
    return {k: np.zeros(shape) for k, shape in PARAM_SHAPES.items()}


def random_params(rng: np.random.Generator, scale: float = 0.1) -> dict[str, np.ndarray]:
    out = {}
    for k, shape in PARAM_SHAPES.items():
        if k.endswith("_b") or not shape:
            out[k] = np.zeros(shape)
        else:
            fan_in = shape[-1] if len(shape) > 1 else shape[0]
            out[k] = rng.normal(0.0, scale / math.sqrt(fan_in), size=shape)
    return out


def params_to_vector(params: dict[str, np.ndarray]) -> np.ndarray:
    return np.concatenate([np.asarray(params[k], dtype=float).ravel() for k in PARAM_SHAPES])


def vector_to_params(vec: np.ndarray) -> dict[str, np.ndarray]:
    out = {}
    i = 0
    for k, shape in PARAM_SHAPES.items():
        n = int(np.prod(shape)) if shape else 1
        out[k] = np.asarray(vec[i : i + n], dtype=float).reshape(shape)
        i += n
    if i != len(vec):
        raise ValueError(f"parameter vector length {len(vec)}, expected {i}")
    return out


def params_to_json(params: dict[str, np.ndarray]) -> str:
    payload = {k: np.asarray(v).tolist() for k, v in params.items()}
    return json.dumps(payload)


def params_from_json(text: str) -> dict[str, np.ndarray]:
    payload = json.loads(text)
    if "params" in payload and "gq_W" not in payload:
        payload = payload["params"]  # file with provenance header
    out = {}
    for k, shape in PARAM_SHAPES.items():
        out[k] = np.asarray(payload[k], dtype=float).reshape(shape)
    return out


def _sigmoid(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _attention_forward(params, prefix: str, view: PolicyInput):
    q = params[prefix + "q_W"] @ view.channel_feature + params[prefix + "q_b"]
    tokens = view.edge_tokens
    if tokens.shape[0] == 0:
        return q, np.zeros(EMBED_DIM), None
    K = tokens @ params[prefix + "k_W"].T + params[prefix + "k_b"]
    V = tokens @ params[prefix + "v_W"].T + params[prefix + "v_b"]
    scores = K @ q / math.sqrt(EMBED_DIM)
    scores = scores - scores.max()
    alpha = np.exp(scores)
    alpha /= alpha.sum()
    context = alpha @ V
    return q, context, (K, V, alpha)


def _attention_backward(params, grads, prefix: str, view: PolicyInput, cache, dq, dcontext):
    dq = dq.copy()
    if cache is not None:
        K, V, alpha = cache
        tokens = view.edge_tokens
        q = params[prefix + "q_W"] @ view.channel_feature + params[prefix + "q_b"]
        dV = alpha[:, None] * dcontext[None, :]
        dalpha = V @ dcontext
        dscores = alpha * (dalpha - float(alpha @ dalpha))
        dq += (K.T @ dscores) / math.sqrt(EMBED_DIM)
        dK = dscores[:, None] * q[None, :] / math.sqrt(EMBED_DIM)
        grads[prefix + "k_W"] += dK.T @ tokens
        grads[prefix + "k_b"] += dK.sum(axis=0)
        grads[prefix + "v_W"] += dV.T @ tokens
        grads[prefix + "v_b"] += dV.sum(axis=0)
    grads[prefix + "q_W"] += np.outer(dq, view.channel_feature)
    grads[prefix + "q_b"] += dq


def gate_forward(params, view: PolicyInput):
    """Add-edge probability plus the cache needed for its backward pass."""
    q, context, attn = _attention_forward(params, "g", view)
    x = np.concatenate([q, context])
    h = np.tanh(params["g1_W"] @ x + params["g1_b"])
    z = float(params["g2_w"] @ h + params["g2_b"])
    p = _sigmoid(z)
    return p, (q, context, attn, x, h, z)


def gate_log_prob(params, view: PolicyInput, decision: bool) -> float:
    p, _ = gate_forward(params, view)
    p = min(max(p, 1e-300), 1.0 - 1e-16)
    return math.log(p) if decision else math.log1p(-p)


def gate_log_prob_grad(params, view: PolicyInput, decision: bool) -> dict[str, np.ndarray]:
    p, cache = gate_forward(params, view)
    _, _, attn, x, h, _ = cache
    grads = zero_params()
    dz = (1.0 if decision else 0.0) - p
    grads["g2_w"] += dz * h
    grads["g2_b"] += dz
    dpre = dz * params["g2_w"] * (1.0 - h * h)
    grads["g1_W"] += np.outer(dpre, x)
    grads["g1_b"] += dpre
    dx = params["g1_W"].T @ dpre
    _attention_backward(params, grads, "g", view, attn, dx[:EMBED_DIM], dx[EMBED_DIM:])
    return grads


def node_forward(params, view: PolicyInput):
    """Distribution over the admissible beams plus the backward cache."""
    q, context, attn = _attention_forward(params, "n", view)
    feats = view.beam_features[view.admissible_local]
    enc = feats @ params["ne_W"].T + params["ne_b"]
    C = enc.shape[0]
    X = np.concatenate([np.tile(q, (C, 1)), np.tile(context, (C, 1)), enc], axis=1)
    H = np.tanh(X @ params["n1_W"].T + params["n1_b"])
    logits = H @ params["n2_w"] + float(params["n2_b"])
    logits = logits - logits.max()
    probs = np.exp(logits)
    probs /= probs.sum()
    return probs, (q, context, attn, feats, X, H)


def node_log_prob(params, view: PolicyInput, index: int) -> float:
    probs, _ = node_forward(params, view)
    return math.log(max(float(probs[index]), 1e-300))


def node_log_prob_grad(params, view: PolicyInput, index: int) -> dict[str, np.ndarray]:
    probs, cache = node_forward(params, view)
    _, _, attn, feats, X, H = cache
    grads = zero_params()
    dlogits = -probs
    dlogits[index] += 1.0
    grads["n2_w"] += H.T @ dlogits
    grads["n2_b"] += dlogits.sum()
    dH = np.outer(dlogits, params["n2_w"])
    dpre = dH * (1.0 - H * H)
    grads["n1_W"] += dpre.T @ X
    grads["n1_b"] += dpre.sum(axis=0)
    dX = dpre @ params["n1_W"]
    denc = dX[:, 2 * EMBED_DIM :]
    grads["ne_W"] += denc.T @ feats
    grads["ne_b"] += denc.sum(axis=0)
    dq = dX[:, :EMBED_DIM].sum(axis=0)
    dcontext = dX[:, EMBED_DIM : 2 * EMBED_DIM].sum(axis=0)
    _attention_backward(params, grads, "n", view, attn, dq, dcontext)
    return grads


class NeuralAllocationPolicy:
    """Two-headed scorer with score-function gradient accumulation.

    Outside an episode the observe hooks are no-ops; inside one, every
    sampled gate and beam decision adds its log-probability gradient to the
    episode buffer. Forced first edges never query the gate, so they add
    nothing.
    """

    def __init__(self, params: dict[str, np.ndarray] | None = None):
        self.params = params if params is not None else zero_params()
        self._episode_grads: dict[str, np.ndarray] | None = None
        self._episode_logp = 0.0
        self._pending = None  # (kind, view) for the observe hook

    @classmethod
    def random_init(cls, rng: np.random.Generator, scale: float = 0.1):
        return cls(random_params(rng, scale))

    def add_edge_prob(self, view: PolicyInput) -> float:
        p, _ = gate_forward(self.params, view)
        self._pending = ("gate", view)
        return p

    def node_distribution(self, view: PolicyInput) -> np.ndarray:
        probs, _ = node_forward(self.params, view)
        self._pending = ("node", view)
        return probs

    def observe_add_edge(self, decision: bool):
        if self._episode_grads is None:
            return
        kind, view = self._pending
        assert kind == "gate"
        self._episode_logp += gate_log_prob(self.params, view, decision)
        g = gate_log_prob_grad(self.params, view, decision)
        for k in g:
            self._episode_grads[k] += g[k]

    def observe_node_choice(self, index: int):
        if self._episode_grads is None:
            return
        kind, view = self._pending
        assert kind == "node"
        self._episode_logp += node_log_prob(self.params, view, index)
        g = node_log_prob_grad(self.params, view, index)
        for k in g:
            self._episode_grads[k] += g[k]

    def begin_episode(self):
        self._episode_grads = zero_params()
        self._episode_logp = 0.0

    def end_episode(self) -> tuple[float, dict[str, np.ndarray]]:
        logp, grads = self._episode_logp, self._episode_grads
        self._episode_grads = None
        return logp, grads

    def save(self, path: str):
        with open(path, "w") as fh:
            fh.write(params_to_json(self.params))

    @classmethod
    def load(cls, path: str):
        with open(path) as fh:
            return cls(params_from_json(fh.read()))


class PolicyDivergenceError(RuntimeError):
    """Raised when training produces non-finite or runaway parameters.

    Carries the last parameter set that was still sane.
    """

    def __init__(self, message: str, last_good_params: dict[str, np.ndarray]):
        super().__init__(message)
        self.last_good_params = last_good_params


@dataclass
class TrainingResult:
    costs: list[float]
    baseline: float
    iterations: int


def reinforce(
    run_episode,
    policy: NeuralAllocationPolicy,
    iterations: int,
    rng: np.random.Generator,
    learning_rate: float = 1e-3,
    baseline_momentum: float = 0.9,
    max_param_magnitude: float = 1e3,
) -> TrainingResult:
    """Score-function training loop minimizing the episode cost.

    run_episode(policy, rng) must sample decisions through the policy (so
    the observe hooks fire) and return a scalar cost. The moving-average
    baseline keeps the advantage centered.
    """
    baseline = None
    costs = []
    last_good = {k: v.copy() for k, v in policy.params.items()}
    for it in range(iterations):
        policy.begin_episode()
        cost = float(run_episode(policy, rng))
        _, grads = policy.end_episode()
        if baseline is None:
            baseline = cost
        advantage = cost - baseline
        for k in policy.params:
            policy.params[k] = policy.params[k] - learning_rate * advantage * grads[k]
        baseline = baseline_momentum * baseline + (1.0 - baseline_momentum) * cost
        costs.append(cost)
        flat = params_to_vector(policy.params)
        if not np.all(np.isfinite(flat)) or np.abs(flat).max() > max_param_magnitude:
            policy.params = last_good
            raise PolicyDivergenceError(
                f"parameters diverged at iteration {it}", last_good
            )
        if it % 10 == 0:
            last_good = {k: v.copy() for k, v in policy.params.items()}
    # zero iterations leaves the baseline unset
    return TrainingResult(costs, float(baseline) if baseline is not None else math.nan, iterations)


class HeuristicPolicy:
    """One-step lookahead scorer used as the untrained proposed strategy.

    For each admissible beam it estimates the sum-rate change of adding the
    edge at that beam's next even power share: the beam's own new channel
    rate, minus the rate lost by existing co-channel edges to the added
    interference, minus a prohibitive penalty when the extra flux would
    break a protected ceiling. The gate opens while the best candidate
    clears the threshold; the beam choice is the argmax (ties to the lower
    beam id).
    """

    def __init__(self, threshold_bps: float = 0.0):
        self.threshold_bps = threshold_bps

    def _marginal_gains(self, view: PolicyInput) -> np.ndarray:
        g = view.graph
        ctx = g.ctx
        m = view.channel_index
        bw = ctx.env.channels.bandwidth_hz
        noise = ctx.env.noise_w
        cand = np.asarray(view.admissible_local, dtype=int)
        cand_ids = view.admissible
        counts = np.array([len(g.edges_of_beam(b)) for b in cand_ids], dtype=float)
        budgets = np.array([ctx.beam_budgets_w[b] for b in cand_ids])
        p_hat = budgets / (counts + 1.0)
        h_own = g.gain[cand, cand, m]
        n_own = noise + g.intra_w[cand, m] + g.inter_w[cand, m]
        gains = bw * np.log2(1.0 + p_hat * h_own / n_own)
        victims = g.beams_on_channel(m)
        if victims:
            v_loc = np.array([g._loc[b] for b in victims], dtype=int)
            p_v = np.array([g.alloc.powers_w[b, m] for b in victims])
            s_v = p_v * g.gain[v_loc, v_loc, m]
            n_v = noise + g.intra_w[v_loc, m] + g.inter_w[v_loc, m]
            a_sub = g.gain[cand][:, v_loc, m]  # candidate -> victim
            n_new = n_v[None, :] + p_hat[:, None] * a_sub
            before = np.log2(1.0 + s_v[None, :] / n_v[None, :])
            after = np.log2(1.0 + s_v[None, :] / n_new)
            gains += bw * (after - before).sum(axis=1)
        for term in g._epfd_terms:
            if not term.active[m]:
                continue
            headroom = term.target_lin - g.epfd_flux(term)
            added = p_hat * term.coeff[cand] * term.scale
            gains = np.where(added > headroom, gains - 1e18, gains)
        return gains

    def add_edge_prob(self, view: PolicyInput) -> float:
        gains = self._marginal_gains(view)
        return 1.0 if float(gains.max()) > self.threshold_bps else 0.0

    def node_distribution(self, view: PolicyInput) -> np.ndarray:
        gains = self._marginal_gains(view)
        probs = np.zeros(len(gains))
        probs[int(np.argmax(gains))] = 1.0
        return probs
