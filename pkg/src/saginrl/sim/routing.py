"""Hop-count shortest-path routing over the active edge set.

The route is the minimum-hop path; among equal-length paths the
lexicographically smallest node-id sequence wins, which makes routes
deterministic under topology ties.
"""

from __future__ import annotations

from collections import deque


def _bfs_dist(adj: dict[int, list[int]], start: int) -> dict[int, int]:
    dist = {start: 0}
    q = deque([start])
    while q:
        u = q.popleft()
        for v in adj.get(u, ()):
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def shortest_path(adj: dict[int, list[int]], src: int, dst: int) -> list[int] | None:
    """Min-hop path src -> dst, smallest id sequence on ties, None if unreachable."""
    if src == dst:
        raise ValueError("src and dst must differ")
    dist = _bfs_dist(adj, dst)
    if src not in dist:
        return None
    path = [src]
    cur = src
    while cur != dst:
        # neighbors are kept sorted, so the first one on a shortest path is
        # the lexicographically smallest continuation
        for v in adj[cur]:
            if dist.get(v, -1) == dist[cur] - 1:
                path.append(v)
                cur = v
                break
    return path


def ospf_route(world, src: int, dst: int, terrestrial: bool = False) -> list[int] | None:
    """Pre-set style route over the current active links.

    ``terrestrial=True`` restricts the graph to terminal/BS nodes, which is
    how packet birth paths are formed; relay re-splices use the full graph.
    Results are cached per tick.
    """
    key = (src, dst, terrestrial)
    cache = world.route_cache
    if key in cache:
        return cache[key]
    adj = world.adj_terrestrial if terrestrial else world.adj
    path = shortest_path(adj, src, dst)
    cache[key] = path
    return path
