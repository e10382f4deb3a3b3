"""Tick loop: mobility, link maintenance, generation, offload, transmission.

Phase order inside one tick is fixed: mobility, link rebuild, in-flight
arrivals, packet generation, offload decisions at the base stations, then
per-link transmission. Every anomaly turns into a drop event; nothing is
lost silently, so generated == delivered + dropped + in_system holds as
exact integers after every tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .routing import ospf_route
from .world import Node, NodeKind, Packet, World


@dataclass
class Delivered:
    packet_id: int
    size_bits: int
    born_tick: int
    end_tick: int
    decider: int | None
    hops: int

    def delay_s(self, dt: float) -> float:
        return (self.end_tick - self.born_tick) * dt


@dataclass
class Dropped:
    packet_id: int
    reason: str            # no_route | queue_overflow | link_down
    size_bits: int
    born_tick: int
    end_tick: int
    decider: int | None

    def age_s(self, dt: float) -> float:
        return (self.end_tick - self.born_tick) * dt


@dataclass
class TickEvents:
    tick: int
    generated: list[int] = field(default_factory=list)
    generated_bits: int = 0
    delivered: list[Delivered] = field(default_factory=list)
    dropped: list[Dropped] = field(default_factory=list)


def step_mobility(world: World, dt: float) -> None:
    """Advance every node's position by one step of its mobility model."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    cfg = world.cfg
    rng = world.rng
    side = cfg.area_side_m
    t = world.tick * dt
    period = cfg.uav.direction_change_period_s
    period_ticks = max(1, int(round(period / dt))) if period > 0 else 0
    for nid in sorted(world.nodes):
        node = world.nodes[nid]
        mob = node.mobility
        if mob.model == "static":
            continue
        if mob.model == "random_waypoint":
            if mob.waypoint is None:
                mob.waypoint = np.array([rng.uniform(0, side), rng.uniform(0, side), 0.0])
            delta = mob.waypoint - node.position
            dist = float(np.linalg.norm(delta))
            step = mob.speed_mps * dt
            if dist <= step or dist == 0.0:
                node.position = mob.waypoint
                mob.waypoint = np.array([rng.uniform(0, side), rng.uniform(0, side), 0.0])
            else:
                node.position = node.position + delta * (step / dist)
        elif mob.model == "uav_drift":
            # heading redraw schedule is time-based, identical for any speed
            if period_ticks and world.tick % period_ticks == 0 and world.tick > 0:
                mob.heading_rad = float(rng.uniform(0, 2 * math.pi))
            step = mob.speed_mps * dt
            node.position = node.position + np.array(
                [step * math.cos(mob.heading_rad), step * math.sin(mob.heading_rad), 0.0])
        elif mob.model == "leo_orbit":
            leo = cfg.leo
            angle = 2 * math.pi * ((t / leo.coverage_period_s + mob.phase
                                    + world.leo_phase_shift) % 1.0)
            node.position = np.array([
                side / 2 + leo.track_amplitude_m * math.cos(angle),
                side / 2,
                leo.altitude_m,
            ])


def _truncated_normal_bits(rng: np.random.Generator, mean: float, sigma: float) -> float:
    draw = rng.normal(mean, sigma) if sigma > 0 else mean
    return max(0.0, float(draw))


def generate_packets(world: World, events: TickEvents) -> None:
    """Emit packets from every source according to its per-tick bit budget."""
    cfg = world.cfg
    rng = world.rng
    mean_bits = cfg.gen_rate_mean_bps * cfg.tick_dt_s
    sigma = cfg.gen_rate_rel_sigma * mean_bits
    size = cfg.packet_size_bits
    dests = world.dest_ids
    for sid in world.source_ids:
        world.gen_credit[sid] += _truncated_normal_bits(rng, mean_bits, sigma)
        node = world.nodes[sid]
        while world.gen_credit[sid] >= size:
            world.gen_credit[sid] -= size
            dst = dests[int(rng.integers(len(dests)))] if dests else None
            pid = world.next_packet_id
            world.next_packet_id += 1
            world.generated_count += 1
            world.generated_bits += size
            events.generated.append(pid)
            events.generated_bits += size
            if dst is None:
                events.dropped.append(Dropped(pid, "no_route", size, world.tick,
                                              world.tick, None))
                world.dropped_count += 1
                continue
            path = ospf_route(world, sid, dst, terrestrial=True)
            packet = Packet(id=pid, size_bits=size, src=sid, dst=dst,
                            born_tick=world.tick, path=path or [sid])
            if path is None:
                packet.status = "dropped"
                events.dropped.append(Dropped(pid, "no_route", size, world.tick,
                                              world.tick, None))
                world.dropped_count += 1
            elif len(node.queue) >= node.queue_capacity:
                packet.status = "dropped"
                events.dropped.append(Dropped(pid, "queue_overflow", size, world.tick,
                                              world.tick, None))
                world.dropped_count += 1
            else:
                world.packets[pid] = packet
                node.queue.append(pid)


def _land_arrivals(world: World, events: TickEvents) -> None:
    pending = world.in_flight.pop(world.tick, [])
    for pid, to in pending:
        p = world.packets[pid]
        p.hop_index += 1
        if to == p.dst:
            p.status = "delivered"
            events.delivered.append(Delivered(pid, p.size_bits, p.born_tick,
                                              world.tick, p.decider, p.hops_traversed))
            world.delivered_count += 1
            del world.packets[pid]
            continue
        node = world.nodes[to]
        if len(node.queue) >= node.queue_capacity:
            p.status = "dropped"
            events.dropped.append(Dropped(pid, "queue_overflow", p.size_bits,
                                          p.born_tick, world.tick, p.decider))
            world.dropped_count += 1
            del world.packets[pid]
        else:
            p.status = "queued"
            node.queue.append(pid)


def _transmit(world: World, events: TickEvents) -> None:
    dt = world.cfg.tick_dt_s
    credit = world.link_credit
    budget_seen: set[tuple[int, int]] = set()
    for nid in sorted(world.nodes):
        node = world.nodes[nid]
        while node.queue:
            pid = node.queue[0]
            p = world.packets[pid]
            nxt = p.path[p.hop_index + 1]
            link = world.link_between(nid, nxt)
            if link is None or not link.active:
                node.queue.popleft()
                p.status = "dropped"
                events.dropped.append(Dropped(pid, "link_down", p.size_bits,
                                              p.born_tick, world.tick, p.decider))
                world.dropped_count += 1
                del world.packets[pid]
                continue
            key = (nid, nxt)
            if key not in budget_seen:
                budget_seen.add(key)
                cap = max(link.rate_bps * dt, float(p.size_bits))
                credit[key] = min(credit.get(key, 0.0) + link.rate_bps * dt, cap)
            if credit[key] >= p.size_bits:
                credit[key] -= p.size_bits
                node.queue.popleft()
                p.status = "in_flight"
                p.hops_traversed += 1
                arrive = world.tick + link.prop_ticks
                world.in_flight.setdefault(arrive, []).append((pid, nxt))
            else:
                break  # FIFO head-of-line: the rest of this queue waits


def simulate_tick(world: World, actions: dict[int, int] | None = None,
                  offload_fn=None) -> TickEvents:
    """Run one tick; ``actions`` maps BS id to an offload action index.

    ``offload_fn(world, packet, action)`` re-splices one packet's path; it
    is supplied by the environment adapter. Without it (or with action 0)
    packets keep their pre-set routes.
    """
    events = TickEvents(tick=world.tick)
    step_mobility(world, world.cfg.tick_dt_s)
    world.rebuild_links()
    _land_arrivals(world, events)
    generate_packets(world, events)
    if actions:
        for bs_id in sorted(actions):
            action = actions[bs_id]
            node = world.nodes[bs_id]
            if node.kind != NodeKind.BS:
                raise ValueError(f"node {bs_id} is not a BS")
            for pid in list(node.queue):
                p = world.packets[pid]
                if p.decider is not None:
                    continue  # one offload decision per packet, by its first BS
                p.decider = bs_id
                if action != 0 and offload_fn is not None:
                    offload_fn(world, p, action)
    _transmit(world, events)
    world.tick += 1
    return events
