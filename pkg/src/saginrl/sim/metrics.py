"""Aggregation of tick event streams into throughput/drop/delay numbers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .engine import TickEvents


@dataclass
class SimMetrics:
    throughput_bps: float
    drop_rate: float
    mean_delay_s: float
    generated: int
    delivered: int
    dropped: int
    delivered_bits: int


def collect_metrics(events: Iterable[TickEvents], window_s: float,
                    tick_dt_s: float) -> SimMetrics:
    """Tally a window of tick events.

    Throughput counts delivered bits over the window; drop rate is dropped
    over generated packet counts (0 when nothing was generated); delay is
    the mean over delivered packets.
    """
    if window_s <= 0:
        raise ValueError("window_s must be positive")
    generated = delivered = dropped = 0
    delivered_bits = 0
    delay_sum = 0.0
    for ev in events:
        generated += len(ev.generated)
        dropped += len(ev.dropped)
        for d in ev.delivered:
            delivered += 1
            delivered_bits += d.size_bits
            delay_sum += d.delay_s(tick_dt_s)
    return SimMetrics(
        throughput_bps=delivered_bits / window_s,
        drop_rate=(dropped / generated) if generated else 0.0,
        mean_delay_s=(delay_sum / delivered) if delivered else 0.0,
        generated=generated,
        delivered=delivered,
        dropped=dropped,
        delivered_bits=delivered_bits,
    )
