from .world import NodeKind, Node, Link, Packet, MobilityState, World, build_world
from .routing import ospf_route
from .engine import TickEvents, simulate_tick, step_mobility, generate_packets
from .metrics import SimMetrics, collect_metrics

__all__ = [
    "NodeKind", "Node", "Link", "Packet", "MobilityState", "World", "build_world",
    "ospf_route", "TickEvents", "simulate_tick", "step_mobility", "generate_packets",
    "SimMetrics", "collect_metrics",
]
