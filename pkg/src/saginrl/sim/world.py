"""World state of the four-layer network: nodes, links, packets.

Node ids are assigned relay-first (BS, UAV, LEO, GEO, then source and
destination terminals), which keeps relays at the front of any id-sorted
enumeration. All randomness flows through ``world.rng`` in a fixed order,
so (seed, config) fully determines the evolution.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .. import channels as ch
from ..config import ChannelsConfig, WorldConfig


class NodeKind(IntEnum):
    UE_SOURCE = 0
    UE_DEST = 1
    BS = 2
    UAV = 3
    LEO = 4
    GEO = 5


RELAY_KINDS = (NodeKind.BS, NodeKind.UAV, NodeKind.LEO, NodeKind.GEO)
TERRESTRIAL_KINDS = (NodeKind.UE_SOURCE, NodeKind.UE_DEST, NodeKind.BS)


@dataclass
class MobilityState:
    model: str = "static"  # static | random_waypoint | uav_drift | leo_orbit
    speed_mps: float = 0.0
    heading_rad: float = 0.0
    waypoint: np.ndarray | None = None
    direction_change_period_s: float = 0.0
    phase: float = 0.0     # orbit phase offset for leo_orbit


@dataclass
class Node:
    id: int
    kind: NodeKind
    position: np.ndarray
    queue: deque = field(default_factory=deque)   # packet ids, FIFO
    queue_capacity: int = 200
    mobility: MobilityState = field(default_factory=MobilityState)


@dataclass
class Link:
    a: int                # a < b
    b: int
    rate_bps: float
    active: bool
    distance_m: float
    prop_ticks: int


@dataclass
class Packet:
    id: int
    size_bits: int
    src: int
    dst: int
    born_tick: int
    path: list[int]
    hop_index: int = 0            # index of the node currently holding/last reached
    status: str = "queued"        # queued | in_flight | delivered | dropped
    decider: int | None = None    # BS whose offload decision last touched this packet
    hops_traversed: int = 0


def _grid_dims(n: int) -> tuple[int, int]:
    """Cell grid (nx, ny) with nx*ny >= n, as square as possible."""
    nx = int(math.ceil(math.sqrt(n)))
    while n % nx != 0 and nx * (n // nx) < n:
        nx += 1
    ny = int(math.ceil(n / nx))
    return nx, ny


class World:
    """Mutable simulation state plus the per-tick derived link structure.

    Two seeds drive all randomness: ``layout_seed`` fixes the static draw
    (node placement, initial headings and waypoints), ``stream_seed`` the
    per-tick draws (traffic, mobility turns, rain). Keeping the layout
    while varying the stream replays fresh traffic over the same region
    structure.
    """

    def __init__(self, cfg: WorldConfig, chan: ChannelsConfig, layout_seed: int,
                 stream_seed: int | None = None):
        self.cfg = cfg
        self.chan = chan
        self.layout_seed = layout_seed
        self.stream_seed = layout_seed if stream_seed is None else stream_seed
        self.layout_rng = np.random.default_rng(self.layout_seed)
        self.rng = np.random.default_rng(self.stream_seed)
        # each traffic stream samples its own slice of the orbit cycle
        self.leo_phase_shift = float(self.rng.uniform(0.0, 1.0))
        self.tick = 0
        self.nodes: dict[int, Node] = {}
        self.links: dict[tuple[int, int], Link] = {}
        self.adj: dict[int, list[int]] = {}
        self.adj_terrestrial: dict[int, list[int]] = {}
        self.backbone: set[tuple[int, int]] = set()
        self.packets: dict[int, Packet] = {}          # live packets only
        self.in_flight: dict[int, list[tuple[int, int]]] = {}  # arrive_tick -> [(pid, to)]
        self.link_credit: dict[tuple[int, int], float] = {}    # directed (u, v) -> bits
        self.route_cache: dict[tuple, list[int] | None] = {}
        self.next_packet_id = 0
        self.generated_count = 0
        self.delivered_count = 0
        self.dropped_count = 0
        self.generated_bits = 0
        self.gen_credit: dict[int, float] = {}        # per-source fractional bits
        self.radios = self._materialize_radios(chan)
        self.rain_model = ch.RainModel(mode=chan.rain.mode, fixed_db=chan.rain.fixed_db,
                                       shape=chan.rain.shape, scale_db=chan.rain.scale_db)
        self.air_ground = ch.AirGroundParams(phi=chan.air_ground.phi, eta=chan.air_ground.eta,
                                             omega0_deg=chan.air_ground.omega0_deg,
                                             gamma=chan.air_ground.gamma, k0=chan.air_ground.k0)
        self.bs_ids: list[int] = []
        self.uav_ids: list[int] = []
        self.leo_ids: list[int] = []
        self.geo_ids: list[int] = []
        self.source_ids: list[int] = []
        self.dest_ids: list[int] = []

    @staticmethod
    def _materialize_radios(chan: ChannelsConfig) -> dict[str, ch.RadioParams]:
        radios = {}
        for name in ("bs_uav", "bs_leo", "bs_geo", "uav_leo", "uav_geo", "leo_geo"):
            rc = getattr(chan, name)
            noise = rc.noise_power_w or ch.thermal_noise_w(rc.bandwidth_hz)
            radios[name] = ch.RadioParams(
                bandwidth_hz=rc.bandwidth_hz, tx_power_w=rc.tx_power_w,
                noise_power_w=noise, tx_gain=rc.tx_gain, rx_gain=rc.rx_gain,
                wavelength_m=rc.wavelength_m)
        return radios

    # ---- geometry helpers -------------------------------------------------

    def in_area(self, pos: np.ndarray) -> bool:
        s = self.cfg.area_side_m
        return 0.0 <= pos[0] <= s and 0.0 <= pos[1] <= s

    @staticmethod
    def horizontal_distance(p: np.ndarray, q: np.ndarray) -> float:
        return float(math.hypot(p[0] - q[0], p[1] - q[1]))

    @staticmethod
    def distance(p: np.ndarray, q: np.ndarray) -> float:
        return float(np.linalg.norm(p - q))

    def leo_covering(self, node: Node) -> bool:
        leo = self.cfg.leo
        t = self.tick * self.cfg.tick_dt_s
        frac = (t / leo.coverage_period_s + node.mobility.phase
                + self.leo_phase_shift) % 1.0
        return frac < leo.duty_cycle

    # ---- link maintenance -------------------------------------------------

    def rebuild_links(self) -> None:
        """Recompute the active edge set and per-link rates for this tick."""
        cfg = self.cfg
        dt = cfg.tick_dt_s
        f_rain = ch.rain_attenuation(self.rain_model, self.rng)
        links: dict[tuple[int, int], Link] = {}

        def add(u: int, v: int, rate: float, dist: float) -> None:
            a, b = (u, v) if u < v else (v, u)
            prop = max(1, int(math.ceil(dist / ch.SPEED_OF_LIGHT / dt)))
            links[(a, b)] = Link(a=a, b=b, rate_bps=rate, active=True,
                                 distance_m=dist, prop_ticks=prop)

        # terminal access: each UE attaches to the nearest covering BS
        for uid in self.source_ids + self.dest_ids:
            ue = self.nodes[uid]
            best, best_d = None, cfg.bs_coverage_radius_m
            for bid in self.bs_ids:
                d = self.horizontal_distance(ue.position, self.nodes[bid].position)
                if d < best_d or (best is not None and d == best_d and bid < best):
                    best, best_d = bid, d
            if best is not None:
                add(uid, best, cfg.ue_access_rate_bps, max(best_d, 1.0))

        # fixed ground backbone between grid-adjacent BS cells
        for (a, b) in sorted(self.backbone):
            d = self.distance(self.nodes[a].position, self.nodes[b].position)
            add(a, b, cfg.backbone_rate_bps, d)

        # BS <-> UAV within radio radius while the UAV stays in the area
        for bid in self.bs_ids:
            bpos = self.nodes[bid].position
            for uid in self.uav_ids:
                uav = self.nodes[uid]
                if not self.in_area(uav.position):
                    continue
                horiz = self.horizontal_distance(bpos, uav.position)
                if horiz > cfg.uav.radio_radius_m:
                    continue
                l_ub = max(horiz, 1.0)
                omega = ch.vertical_angle_deg(abs(uav.position[2] - bpos[2]), l_ub)
                pl = ch.path_loss_uav_bs(l_ub, omega, self.air_ground)
                rate = ch.rate_from_path_loss(self.radios["bs_uav"], pl)
                add(bid, uid, rate, self.distance(bpos, uav.position))

        # satellite hops
        for lid in self.leo_ids:
            leo = self.nodes[lid]
            if not self.leo_covering(leo):
                continue
            for bid in self.bs_ids:
                d = self.distance(self.nodes[bid].position, leo.position)
                g = ch.gain_ground_satellite(self.radios["bs_leo"], d, f_rain)
                add(bid, lid, ch.rate_from_gain(self.radios["bs_leo"], g), d)
            for uid in self.uav_ids:
                uav = self.nodes[uid]
                if not self.in_area(uav.position):
                    continue
                d = self.distance(uav.position, leo.position)
                g = ch.gain_ground_satellite(self.radios["uav_leo"], d, f_rain)
                add(uid, lid, ch.rate_from_gain(self.radios["uav_leo"], g), d)
        for gid in self.geo_ids:
            geo = self.nodes[gid]
            for bid in self.bs_ids:
                d = self.distance(self.nodes[bid].position, geo.position)
                g = ch.gain_ground_satellite(self.radios["bs_geo"], d, f_rain)
                add(bid, gid, ch.rate_from_gain(self.radios["bs_geo"], g), d)
            for uid in self.uav_ids:
                uav = self.nodes[uid]
                if not self.in_area(uav.position):
                    continue
                d = self.distance(uav.position, geo.position)
                g = ch.gain_ground_satellite(self.radios["uav_geo"], d, f_rain)
                add(uid, gid, ch.rate_from_gain(self.radios["uav_geo"], g), d)
            for lid in self.leo_ids:
                d = self.distance(self.nodes[lid].position, geo.position)
                g = ch.gain_inter_satellite(self.radios["leo_geo"], d)
                add(lid, gid, ch.rate_from_gain(self.radios["leo_geo"], g), d)

        self.links = links
        adj: dict[int, list[int]] = {nid: [] for nid in self.nodes}
        adj_t: dict[int, list[int]] = {nid: [] for nid in self.nodes}
        for (a, b), link in links.items():
            adj[a].append(b)
            adj[b].append(a)
            if self.nodes[a].kind in TERRESTRIAL_KINDS and self.nodes[b].kind in TERRESTRIAL_KINDS:
                adj_t[a].append(b)
                adj_t[b].append(a)
        for nid in adj:
            adj[nid].sort()
            adj_t[nid].sort()
        self.adj = adj
        self.adj_terrestrial = adj_t
        # transmission credit persists on surviving links only
        self.link_credit = {k: v for k, v in self.link_credit.items()
                            if (min(k), max(k)) in links}
        self.route_cache = {}

    def link_between(self, u: int, v: int) -> Link | None:
        key = (u, v) if u < v else (v, u)
        return self.links.get(key)

    def attached_bs(self, ue_id: int) -> int | None:
        for nid in self.adj_terrestrial.get(ue_id, ()):
            if self.nodes[nid].kind == NodeKind.BS:
                return nid
        return None

    # ---- introspection ----------------------------------------------------

    def in_system_count(self) -> int:
        return len(self.packets)

    def conservation_holds(self) -> bool:
        return self.generated_count == (self.delivered_count + self.dropped_count
                                        + self.in_system_count())

    def snapshot_lines(self):
        """Line-delimited JSON view of nodes then links (debug aid)."""
        for nid in sorted(self.nodes):
            n = self.nodes[nid]
            yield json.dumps({
                "node": nid, "kind": n.kind.name, "pos": [round(float(x), 3) for x in n.position],
                "queue": len(n.queue), "capacity": n.queue_capacity,
            }, sort_keys=True)
        for key in sorted(self.links):
            l = self.links[key]
            yield json.dumps({
                "link": [l.a, l.b], "rate_bps": round(l.rate_bps, 3),
                "active": l.active, "prop_ticks": l.prop_ticks,
            }, sort_keys=True)


def build_world(cfg: WorldConfig, chan: ChannelsConfig, layout_seed: int,
                stream_seed: int | None = None) -> World:
    """Construct nodes and the static backbone, then build tick-0 links."""
    w = World(cfg, chan, layout_seed, stream_seed)
    rng = w.layout_rng
    side = cfg.area_side_m
    nx, ny = _grid_dims(cfg.n_bs)
    cw, chh = side / nx, side / ny
    nid = 0

    for i in range(cfg.n_bs):
        cx = (i % nx + 0.5) * cw
        cy = (i // nx + 0.5) * chh
        w.nodes[nid] = Node(nid, NodeKind.BS, np.array([cx, cy, 0.0]),
                            queue_capacity=cfg.queue_capacity)
        w.bs_ids.append(nid)
        nid += 1

    # deployed on a coverage grid, then drifting with the mobility model
    unx, uny = _grid_dims(cfg.n_uav)
    for i in range(cfg.n_uav):
        ux = (i % unx + 0.5) * side / unx
        uy = (i // unx + 0.5) * side / uny
        pos = np.array([ux, uy, cfg.uav.altitude_m])
        mob = MobilityState(model="uav_drift", speed_mps=cfg.uav.speed_mps,
                            heading_rad=float(rng.uniform(0, 2 * math.pi)),
                            direction_change_period_s=cfg.uav.direction_change_period_s)
        w.nodes[nid] = Node(nid, NodeKind.UAV, pos, queue_capacity=cfg.queue_capacity,
                            mobility=mob)
        w.uav_ids.append(nid)
        nid += 1

    for i in range(cfg.n_leo):
        phase = i / max(cfg.n_leo, 1)
        pos = np.array([side / 2, side / 2, cfg.leo.altitude_m])
        mob = MobilityState(model="leo_orbit", phase=phase)
        w.nodes[nid] = Node(nid, NodeKind.LEO, pos, queue_capacity=cfg.queue_capacity,
                            mobility=mob)
        w.leo_ids.append(nid)
        nid += 1

    for _ in range(cfg.n_geo):
        pos = np.array([side / 2, side / 2, cfg.geo.altitude_m])
        w.nodes[nid] = Node(nid, NodeKind.GEO, pos, queue_capacity=cfg.queue_capacity)
        w.geo_ids.append(nid)
        nid += 1

    # a service-intensive disk concentrates part of the sources in one cell
    hotspot_bs = w.bs_ids[int(rng.integers(len(w.bs_ids)))]
    hotspot_center = w.nodes[hotspot_bs].position[:2]
    n_hot = int(round(cfg.n_source * cfg.hotspot_fraction))
    for kind, count, id_list in ((NodeKind.UE_SOURCE, cfg.n_source, w.source_ids),
                                 (NodeKind.UE_DEST, cfg.n_dest, w.dest_ids)):
        for i in range(count):
            if kind == NodeKind.UE_SOURCE and i < n_hot:
                r = cfg.hotspot_radius_m * math.sqrt(rng.uniform(0, 1))
                ang = rng.uniform(0, 2 * math.pi)
                x = min(max(hotspot_center[0] + r * math.cos(ang), 0.0), side)
                y = min(max(hotspot_center[1] + r * math.sin(ang), 0.0), side)
                pos = np.array([x, y, 0.0])
            else:
                pos = np.array([rng.uniform(0, side), rng.uniform(0, side), 0.0])
            way = np.array([rng.uniform(0, side), rng.uniform(0, side), 0.0])
            mob = MobilityState(model="random_waypoint", speed_mps=cfg.ue_speed_mps,
                                waypoint=way)
            w.nodes[nid] = Node(nid, kind, pos, queue_capacity=cfg.queue_capacity,
                                mobility=mob)
            id_list.append(nid)
            nid += 1

    # grid-adjacent BS cells share a fixed backbone link
    for i in range(cfg.n_bs):
        gx, gy = i % nx, i // nx
        for j in range(i + 1, cfg.n_bs):
            hx, hy = j % nx, j // nx
            if abs(gx - hx) + abs(gy - hy) == 1:
                w.backbone.add((w.bs_ids[i], w.bs_ids[j]))

    for sid in w.source_ids:
        w.gen_credit[sid] = 0.0

    w.rebuild_links()
    return w
