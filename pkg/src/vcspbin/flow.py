"""Shortest-augmenting-path max-flow over exact rationals."""

from __future__ import annotations

from collections import deque
from fractions import Fraction


class FlowNetwork:
    """Directed network with non-negative exact capacities.

    Nodes are arbitrary hashables; parallel arcs are merged by summing.
    """

    def __init__(self, source="s", sink="t"):
        self.source = source
        self.sink = sink
        self.cap: dict = {}          # (u, v) -> capacity
        self.adj: dict = {source: set(), sink: set()}

    def add_node(self, u):
        self.adj.setdefault(u, set())

    def add_arc(self, u, v, c):
        c = Fraction(c)
        if c < 0:
            raise ValueError(f"negative capacity on {u}->{v}")
        if c == 0 or u == v:
            return
        self.add_node(u)
        self.add_node(v)
        self.cap[(u, v)] = self.cap.get((u, v), Fraction(0)) + c
        self.cap.setdefault((v, u), Fraction(0))
        self.adj[u].add(v)
        self.adj[v].add(u)

    @property
    def arcs(self):
        return {k: c for k, c in self.cap.items() if c > 0}

    def max_flow(self):
        """Returns (flow value, flow dict, source side of the minimal min cut)."""
        s, t = self.source, self.sink
        residual = dict(self.cap)
        order = {u: sorted(self.adj[u], key=repr) for u in self.adj}
        total = Fraction(0)
        while True:
            parent = {s: None}
            queue = deque([s])
            while queue and t not in parent:
                u = queue.popleft()
                for v in order[u]:
                    if v not in parent and residual[(u, v)] > 0:
                        parent[v] = u
                        queue.append(v)
            if t not in parent:
                break
            bottleneck = None
            v = t
            while parent[v] is not None:
                r = residual[(parent[v], v)]
                bottleneck = r if bottleneck is None else min(bottleneck, r)
                v = parent[v]
            v = t
            while parent[v] is not None:
                u = parent[v]
                residual[(u, v)] -= bottleneck
                residual[(v, u)] += bottleneck
                v = u
            total += bottleneck
        source_side = set(parent)
        flow = {k: c - residual[k] for k, c in self.cap.items() if c - residual[k] > 0}
        self._check(flow, total, source_side)
        return total, flow, source_side

    def _check(self, flow, total, source_side):
        balance = {u: Fraction(0) for u in self.adj}
        for (u, v), f in flow.items():
            if self.cap[(u, v)] > 0 and f > self.cap[(u, v)]:
                raise AssertionError("flow exceeds capacity")
            balance[u] -= f
            balance[v] += f
        for u, b in balance.items():
            if u not in (self.source, self.sink) and b != 0:
                raise AssertionError(f"flow not conserved at {u!r}")
        cut = sum((c for (u, v), c in self.cap.items()
                   if u in source_side and v not in source_side), Fraction(0))
        if cut != total:
            raise AssertionError("cut value differs from flow value")
