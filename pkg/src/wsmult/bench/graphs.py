"""Graph families for the spanning-tree benchmark."""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field

KINDS = ("torus2d", "torus2d60", "torus3d", "torus3d40", "random")

# probability that a mesh edge survives, per family
_KEEP = {"torus2d": 1.0, "torus2d60": 0.6, "torus3d": 1.0, "torus3d40": 0.4}
_DIMS = {"torus2d": 2, "torus2d60": 2, "torus3d": 3, "torus3d40": 3}


@dataclass
class Graph:
    """Adjacency lists; ``adj[u]`` lists the heads of the arcs leaving ``u``.

    An undirected edge appears in both endpoints' lists.
    """

    n: int
    adj: list[list[int]]
    directed: bool
    kind: str = ""
    params: dict = field(default_factory=dict)

    def edge_count(self) -> int:
        arcs = sum(len(a) for a in self.adj)
        return arcs if self.directed else arcs // 2

    def has_arc(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def reachable(self, root: int) -> list[bool]:
        seen = [False] * self.n
        seen[root] = True
        todo = deque([root])
        while todo:
            u = todo.popleft()
            for v in self.adj[u]:
                if not seen[v]:
                    seen[v] = True
                    todo.append(v)
        return seen


def torus_side(vertices: int, dims: int) -> int:
    """Largest side whose mesh has at most ``vertices`` vertices (at least 3)."""
    side = max(3, int(round(vertices ** (1.0 / dims))))
    while side > 3 and side ** dims > vertices:
        side -= 1
    return side


def gen_graph(kind: str, *, vertices: int | None = None, side: int | None = None, edges: int | None = None,
              directed: bool = False, seed: int = 0) -> Graph:
    """Build a graph of family ``kind``; the same arguments always give the same graph.

    Tori take ``side`` (or derive it from ``vertices``).  Undirected tori link
    each vertex to its 4 (2D) or 6 (3D) mesh neighbours with wrap-around;
    directed tori keep only the arcs towards the next vertex in each
    dimension.  ``torus2d60`` and ``torus3d40`` keep each edge (or arc) with
    probability 0.6 and 0.4.  ``random`` adds ``edges`` distinct edges (or
    arcs) between distinct vertices; it defaults to ``4 * vertices``.
    """
    rng = random.Random(seed)
    if kind in _DIMS:
        dims = _DIMS[kind]
        if side is None:
            if vertices is None:
                raise ValueError("a torus needs side or vertices")
            side = torus_side(vertices, dims)
        if side < 3:
            raise ValueError("torus side must be at least 3")
        return _torus(kind, dims, side, _KEEP[kind], directed, rng)
    if kind == "random":
        if vertices is None or vertices < 2:
            raise ValueError("a random graph needs at least 2 vertices")
        if edges is None:
            edges = 4 * vertices
        if not 0 <= edges <= vertices * (vertices - 1) // 2:
            raise ValueError(f"cannot place {edges} unique edges on {vertices} vertices")
        return _random(vertices, edges, directed, rng)
    raise ValueError(f"unknown graph kind {kind!r}; expected one of {KINDS}")


def _torus(kind: str, dims: int, side: int, keep: float, directed: bool, rng: random.Random) -> Graph:
    n = side ** dims
    adj: list[list[int]] = [[] for _ in range(n)]
    strides = [side ** d for d in range(dims)]
    for u in range(n):
        for d, stride in enumerate(strides):
            coord = (u // stride) % side
            v = u + stride if coord < side - 1 else u - (side - 1) * stride
            if keep < 1.0 and rng.random() >= keep:
                continue
            adj[u].append(v)
            if not directed:
                adj[v].append(u)
    return Graph(n, adj, directed, kind, {"side": side, "dims": dims})


def _random(n: int, m: int, directed: bool, rng: random.Random) -> Graph:
    adj: list[list[int]] = [[] for _ in range(n)]
    chosen: set[tuple[int, int]] = set()
    if m > n * (n - 1) // 4:
        # dense: sample from the full pair list instead of rejecting
        pairs = list(itertools.combinations(range(n), 2))
        picked = rng.sample(pairs, m)
        if directed:
            picked = [(u, v) if rng.random() < 0.5 else (v, u) for u, v in picked]
        chosen.update(picked)
        order = picked
    else:
        order = []
        while len(order) < m:
            u = rng.randrange(n)
            v = rng.randrange(n)
            if u == v:
                continue
            key = (u, v) if directed else (min(u, v), max(u, v))
            if key in chosen:
                continue
            chosen.add(key)
            order.append((u, v))
    for u, v in order:
        adj[u].append(v)
        if not directed:
            adj[v].append(u)
    return Graph(n, adj, directed, "random", {"edges": m})
