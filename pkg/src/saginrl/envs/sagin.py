"""Per-agent decision interface over the network world.

Each base station is one agent. Its observation is a fixed-width vector
over itself plus id-ordered one-hop and two-hop neighbor slots; its
action picks a relay class for the packets currently queued at it; its
reward credits the packet outcomes it last decided on.

Observation layout, per slot (9 entries):
    [kind one-hot x6, queue fraction, link rate / rate_norm (clipped to 1),
     connectivity flag]
Slot order: self, then one-hop neighbors by ascending node id, then
two-hop neighbors by ascending node id; missing slots stay all-zero.
"""

from __future__ import annotations

import numpy as np

from ..config import ObservationConfig, WorldConfig
from ..sim.engine import TickEvents, simulate_tick
from ..sim.routing import ospf_route
from ..sim.world import NodeKind, Packet, World, build_world

SLOT_WIDTH = 9

ACTION_KEEP = 0
# collapsed action space: 0 keep, 1 nearest UAV, 2 nearest LEO, 3 GEO
_COLLAPSED_CLASSES = (NodeKind.UAV, NodeKind.LEO, NodeKind.GEO)


def action_space_size(world_cfg: WorldConfig, full: bool = False) -> int:
    if full:
        return 1 + world_cfg.n_uav + world_cfg.n_leo + world_cfg.n_geo
    return 1 + len(_COLLAPSED_CLASSES)


def observation_dim(obs_cfg: ObservationConfig) -> int:
    return SLOT_WIDTH * (1 + obs_cfg.one_hop_slots + obs_cfg.two_hop_slots)


def _slot(vec: np.ndarray, at: int, kind: NodeKind, queue_frac: float,
          rate_frac: float, flag: float) -> None:
    base = at * SLOT_WIDTH
    vec[base + int(kind)] = 1.0
    vec[base + 6] = queue_frac
    vec[base + 7] = rate_frac
    vec[base + 8] = flag


def observe(world: World, bs_id: int, obs_cfg: ObservationConfig) -> np.ndarray:
    """Deterministic fixed-width encoding of the two-hop neighborhood."""
    node = world.nodes[bs_id]
    if node.kind != NodeKind.BS:
        raise ValueError(f"node {bs_id} is not a BS")
    norm = obs_cfg.rate_norm_bps
    dim = observation_dim(obs_cfg)
    vec = np.zeros(dim, dtype=np.float32)

    one_hop = world.adj.get(bs_id, [])
    out_rates = [world.link_between(bs_id, n).rate_bps for n in one_hop]
    own_rate = (sum(out_rates) / len(out_rates)) if out_rates else 0.0
    _slot(vec, 0, node.kind, len(node.queue) / node.queue_capacity,
          min(own_rate / norm, 1.0), 1.0)

    for i, nid in enumerate(one_hop[:obs_cfg.one_hop_slots]):
        nb = world.nodes[nid]
        rate = world.link_between(bs_id, nid).rate_bps
        _slot(vec, 1 + i, nb.kind, len(nb.queue) / nb.queue_capacity,
              min(rate / norm, 1.0), 1.0)

    first_ring = set(one_hop)
    two_hop: dict[int, float] = {}
    for mid in one_hop:
        for far in world.adj.get(mid, ()):
            if far == bs_id or far in first_ring:
                continue
            rate = world.link_between(mid, far).rate_bps
            if rate > two_hop.get(far, -1.0):
                two_hop[far] = rate
    base = 1 + obs_cfg.one_hop_slots
    for i, far in enumerate(sorted(two_hop)[:obs_cfg.two_hop_slots]):
        nb = world.nodes[far]
        _slot(vec, base + i, nb.kind, len(nb.queue) / nb.queue_capacity,
              min(two_hop[far] / norm, 1.0), 1.0)
    return vec


def _nearest_active_relay(world: World, bs_id: int, kind: NodeKind) -> int | None:
    pool = {NodeKind.UAV: world.uav_ids, NodeKind.LEO: world.leo_ids,
            NodeKind.GEO: world.geo_ids}[kind]
    bs_pos = world.nodes[bs_id].position
    best, best_d = None, float("inf")
    for rid in pool:
        link = world.link_between(bs_id, rid)
        if link is None or not link.active:
            continue
        d = world.distance(bs_pos, world.nodes[rid].position)
        if d < best_d:
            best, best_d = rid, d
    return best


def _resolve_relay(world: World, bs_id: int, action: int, full: bool) -> int | None:
    if full:
        ordered = world.uav_ids + world.leo_ids + world.geo_ids
        idx = action - 1
        if idx < 0 or idx >= len(ordered):
            raise ValueError(f"action {action} outside the action space")
        rid = ordered[idx]
        link = world.link_between(bs_id, rid)
        return rid if link is not None and link.active else None
    if not 1 <= action <= len(_COLLAPSED_CLASSES):
        raise ValueError(f"action {action} outside the action space")
    return _nearest_active_relay(world, bs_id, _COLLAPSED_CLASSES[action - 1])


def apply_offload(world: World, packet: Packet, action: int,
                  full_action_space: bool = False) -> list[int]:
    """Re-splice a queued packet's path through the chosen relay class.

    Action 0 keeps the pre-set route. If the chosen class has no active
    candidate, or the relay cannot reach the destination, the action
    degenerates to 0 and the path is left untouched. Returns the
    (possibly unchanged) path.
    """
    if action == ACTION_KEEP:
        return packet.path
    bs_id = packet.path[packet.hop_index]
    relay = _resolve_relay(world, bs_id, action, full_action_space)
    if relay is None:
        return packet.path
    rest = ospf_route(world, relay, packet.dst, terrestrial=False)
    if rest is None:
        return packet.path
    packet.path = packet.path[:packet.hop_index + 1] + [relay] + rest[1:]
    return packet.path


def event_reward(kind: str, seconds: float) -> float:
    """Reward of one packet outcome: 1/delay on delivery, -lifetime on drop."""
    if kind == "delivered":
        if seconds <= 0:
            raise ValueError("delivery delay must be positive")
        return 1.0 / seconds
    if kind == "dropped":
        return -seconds
    raise ValueError(f"unknown event kind {kind!r}")


class SaginEnv:
    """Multi-agent stepper: one observation/action/reward stream per BS."""

    def __init__(self, world_cfg: WorldConfig, chan_cfg, obs_cfg: ObservationConfig,
                 episode_ticks: int, seed: int, full_action_space: bool = False):
        self.world_cfg = world_cfg
        self.chan_cfg = chan_cfg
        self.obs_cfg = obs_cfg
        self.episode_ticks = episode_ticks
        self.full_action_space = full_action_space
        self.seed = seed
        self.stream_seed: int | None = None
        self.world: World | None = None
        self._tick_in_episode = 0

    @property
    def n_actions(self) -> int:
        return action_space_size(self.world_cfg, self.full_action_space)

    @property
    def obs_dim(self) -> int:
        return observation_dim(self.obs_cfg)

    @property
    def agent_ids(self) -> list[int]:
        assert self.world is not None
        return list(self.world.bs_ids)

    def reset(self, seed: int | None = None,
              stream_seed: int | None = None) -> dict[int, np.ndarray]:
        """Rebuild the world; ``seed`` fixes the layout, ``stream_seed`` the traffic."""
        if seed is not None:
            self.seed = seed
        self.stream_seed = stream_seed
        self.world = build_world(self.world_cfg, self.chan_cfg, self.seed,
                                 self.stream_seed)
        self._tick_in_episode = 0
        return self._observe_all()

    def _observe_all(self) -> dict[int, np.ndarray]:
        assert self.world is not None
        return {bs: observe(self.world, bs, self.obs_cfg) for bs in self.world.bs_ids}

    def step(self, actions: dict[int, int]):
        """Advance one tick. Returns (obs, rewards, done, events)."""
        assert self.world is not None, "call reset() first"
        events = simulate_tick(
            self.world, actions,
            offload_fn=lambda w, p, a: apply_offload(w, p, a, self.full_action_space))
        dt = self.world_cfg.tick_dt_s
        rewards = {bs: 0.0 for bs in self.world.bs_ids}
        for d in events.delivered:
            if d.decider is not None:
                rewards[d.decider] += event_reward("delivered", d.delay_s(dt))
        for d in events.dropped:
            if d.decider is not None:
                rewards[d.decider] += event_reward("dropped", d.age_s(dt))
        self._tick_in_episode += 1
        done = self._tick_in_episode >= self.episode_ticks
        return self._observe_all(), rewards, done, events
