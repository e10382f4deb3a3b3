"""Non-learning offload policies: keep-the-route and shortest-path greedy."""

from __future__ import annotations

import math

from ..envs.sagin import ACTION_KEEP, _resolve_relay, action_space_size
from ..sim.routing import ospf_route
from ..sim.world import Packet, World


def _remaining_preset_hops(world: World, packet: Packet) -> float:
    """Hops left on the pre-set route, infinite if any remaining link is down."""
    path = packet.path
    for i in range(packet.hop_index, len(path) - 1):
        link = world.link_between(path[i], path[i + 1])
        if link is None or not link.active:
            return math.inf
    return len(path) - 1 - packet.hop_index


def greedy_offload(world: World, bs_id: int, packet: Packet,
                   full_action_space: bool = False) -> int:
    """Pick the action whose resulting path has the fewest hops right now.

    Action 0 is evaluated on the remaining pre-set route; each relay action
    on BS -> relay -> shortest route to the destination. Ties go to the
    first action in index order, so the pre-set route wins when equal.
    """
    n_actions = action_space_size(world.cfg, full_action_space)
    best_action, best_hops = ACTION_KEEP, _remaining_preset_hops(world, packet)
    for action in range(1, n_actions):
        relay = _resolve_relay(world, bs_id, action, full_action_space)
        if relay is None:
            continue
        rest = ospf_route(world, relay, packet.dst, terrestrial=False)
        if rest is None:
            continue
        hops = 1 + (len(rest) - 1)
        if hops < best_hops:
            best_action, best_hops = action, hops
    return best_action


class NoOffloadPolicy:
    """Always keep the pre-set route."""

    def actions(self, env) -> dict[int, int]:
        return {bs: ACTION_KEEP for bs in env.world.bs_ids}


class GreedyPolicy:
    """Per-tick batch decision using the head-of-queue packet as representative."""

    def __init__(self, full_action_space: bool = False):
        self.full_action_space = full_action_space

    def actions(self, env) -> dict[int, int]:
        world = env.world
        out = {}
        for bs in world.bs_ids:
            queue = world.nodes[bs].queue
            if not queue:
                out[bs] = ACTION_KEEP
                continue
            packet = world.packets[queue[0]]
            out[bs] = greedy_offload(world, bs, packet, self.full_action_space)
        return out
