"""Leveled digraphs, the oriented paths Q_S, and the digraph D_Gamma with mu."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Optional

from .combine import CombinedLanguage
from .core import INF, CostFunction, Domain, Language, tuple_label
from .errors import BudgetExceeded, EmptyFeas, IndexOutOfRange, SemanticError

ROLES = ("base", "tuple", "internal")


@dataclass(frozen=True)
class Vertex:
    id: str
    role: str = "internal"
    level: int = 0
    label: Optional[str] = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise SemanticError(None, f"unknown vertex role {self.role!r}")


class LeveledDigraph:
    """Vertices in insertion order plus a deduplicated, ordered edge list."""

    def __init__(self, vertices: Iterable[Vertex] = (), edges: Iterable = (),
                 name: str = "G"):
        self.name = name
        self.vertices: dict = {}
        for v in vertices:
            if v.id in self.vertices:
                raise SemanticError(None, f"duplicate vertex {v.id!r}")
            self.vertices[v.id] = v
        self.edges: list = []
        self._edge_set = set()
        for a, b in edges:
            self.add_edge(a, b)

    def add_vertex(self, v: Vertex):
        if v.id in self.vertices:
            raise SemanticError(None, f"duplicate vertex {v.id!r}")
        self.vertices[v.id] = v
        self.__dict__.pop("_adj", None)

    def add_edge(self, a, b):
        if a not in self.vertices or b not in self.vertices:
            raise SemanticError(None, f"edge {a}->{b} uses an unknown vertex")
        if (a, b) in self._edge_set:
            return
        self._edge_set.add((a, b))
        self.edges.append((a, b))
        self.__dict__.pop("_adj", None)

    def has_edge(self, a, b) -> bool:
        return (a, b) in self._edge_set

    @property
    def ids(self) -> list:
        return list(self.vertices)

    @cached_property
    def _adj(self):
        out = {v: [] for v in self.vertices}
        inc = {v: [] for v in self.vertices}
        for a, b in self.edges:
            out[a].append(b)
            inc[b].append(a)
        return out, inc

    def out_neighbors(self, v) -> list:
        return self._adj[0][v]

    def in_neighbors(self, v) -> list:
        return self._adj[1][v]

    def neighbors(self, v) -> list:
        return self._adj[0][v] + self._adj[1][v]

    def subgraph(self, ids: Iterable, name=None) -> "LeveledDigraph":
        keep = [i for i in self.vertices if i in set(ids)]
        ks = set(keep)
        return LeveledDigraph([self.vertices[i] for i in keep],
                              [(a, b) for a, b in self.edges if a in ks and b in ks],
                              name=name or self.name)

    def height(self) -> Optional[int]:
        lv = levels(self)
        if lv is None:
            return None
        return max(lv.values(), default=0)

    def __eq__(self, other):
        return (isinstance(other, LeveledDigraph)
                and list(self.vertices.values()) == list(other.vertices.values())
                and self.edges == other.edges and self.name == other.name)

    def __repr__(self):
        return f"LeveledDigraph({self.name!r}, |V|={len(self.vertices)}, |E|={len(self.edges)})"


def levels(g: LeveledDigraph) -> Optional[dict]:
    """Level of every vertex, or None when some oriented cycle has non-zero length.

    Each connected component is normalised to start at level 0.
    """
    lv = {}
    for start in g.vertices:
        if start in lv:
            continue
        comp = {start: 0}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in g.out_neighbors(v):
                if w not in comp:
                    comp[w] = comp[v] + 1
                    queue.append(w)
                elif comp[w] != comp[v] + 1:
                    return None
            for w in g.in_neighbors(v):
                if w not in comp:
                    comp[w] = comp[v] - 1
                    queue.append(w)
                elif comp[w] != comp[v] - 1:
                    return None
        low = min(comp.values())
        for v, l in comp.items():
            lv[v] = l - low
    return lv


def is_balanced(g: LeveledDigraph) -> bool:
    return levels(g) is not None


def components(g: LeveledDigraph) -> list:
    """Connected components (undirected shadow), ordered by smallest vertex id."""
    seen = set()
    parts = []
    for start in g.vertices:
        if start in seen:
            continue
        seen.add(start)
        comp = [start]
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in g.neighbors(v):
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    queue.append(w)
        parts.append(comp)
    parts.sort(key=min)
    return [g.subgraph(p, name=f"{g.name}[{i}]") for i, p in enumerate(parts)]


@dataclass(frozen=True)
class OrientedPathSpec:
    """Q_S as a sequence of steps: +1 forward edge, -1 backward edge."""

    m: int
    S: frozenset
    steps: tuple

    @property
    def edge_count(self) -> int:
        return len(self.steps)

    @property
    def vertex_count(self) -> int:
        return len(self.steps) + 1

    @property
    def vertex_levels(self) -> tuple:
        out, l = [0], 0
        for s in self.steps:
            l += s
            out.append(l)
        return tuple(out)

    @property
    def height(self) -> int:
        return max(self.vertex_levels)

    def edges(self) -> list:
        """Edges between path positions, oriented as in the path."""
        return [(i, i + 1) if s > 0 else (i + 1, i) for i, s in enumerate(self.steps)]

    def as_digraph(self, prefix="q") -> LeveledDigraph:
        lv = self.vertex_levels
        verts = [Vertex(f"{prefix}{i}", "internal", lv[i]) for i in range(self.vertex_count)]
        return LeveledDigraph(verts, [(f"{prefix}{a}", f"{prefix}{b}") for a, b in self.edges()],
                              name=f"Q{sorted(self.S)}")


ZIGZAG = (1, -1, 1)


def build_QS(m: int, S) -> OrientedPathSpec:
    S = frozenset(S)
    if m < 1:
        raise IndexOutOfRange("m must be >= 1")
    for i in S:
        if not 1 <= i <= m:
            raise IndexOutOfRange(f"index {i} outside 1..{m}")
    steps = [1]
    for i in range(1, m + 1):
        steps.extend((1,) if i in S else ZIGZAG)
    steps.append(1)
    return OrientedPathSpec(m, S, tuple(steps))


def internal_id(d: str, x: str, pos: int) -> str:
    return f"{d}~{x}~{pos}"


class DigraphRelation:
    """A digraph viewed as a binary crisp cost function on its vertex set."""

    arity = 2
    is_crisp = True
    is_finite_valued = False

    def __init__(self, name: str, graph: LeveledDigraph, domain: Domain):
        self.name = name
        self.graph = graph
        self.domain = domain
        idx = {v: i for i, v in enumerate(domain.labels)}
        self._out = {}
        self._in = {}
        for a, b in graph.edges:
            self._out.setdefault(idx[a], set()).add(idx[b])
            self._in.setdefault(idx[b], set()).add(idx[a])
        self._out = {k: frozenset(v) for k, v in self._out.items()}
        self._in = {k: frozenset(v) for k, v in self._in.items()}
        self.feas_tuples = tuple(sorted((a, b) for a, s in self._out.items() for b in s))
        self.feas_set = frozenset(self.feas_tuples)
        self.finite_values = (Fraction(0),) if self.feas_tuples else ()

    @property
    def min_finite(self):
        return Fraction(0) if self.feas_tuples else None

    max_finite = min_finite

    def value(self, idx):
        a, b = idx
        return Fraction(0) if b in self._out.get(a, ()) else INF

    def __call__(self, a, b):
        return self.value((self.domain.index(a), self.domain.index(b)))

    def out_support(self, a):
        return self._out.get(a, frozenset())

    def in_support(self, b):
        return self._in.get(b, frozenset())

    def __eq__(self, other):
        return (isinstance(other, DigraphRelation) and self.name == other.name
                and self.domain == other.domain and self.feas_set == other.feas_set)

    def __hash__(self):
        return hash((self.name, len(self.feas_tuples)))


DGAMMA = "dgamma"
MU = "mu"


@dataclass(eq=False)
class ExtDualLanguage:
    combined: CombinedLanguage
    d_gamma: LeveledDigraph
    mu: CostFunction
    tuples: tuple                  # Feas(phi) index tuples, aligned with tuple vertices
    base_ids: tuple
    tuple_ids: tuple
    paths: dict                    # (d label, tuple label) -> list of vertex ids along Q_S

    @property
    def m(self) -> int:
        return self.combined.m

    @property
    def height(self) -> int:
        return self.m + 2

    @cached_property
    def vertex_domain(self) -> Domain:
        return Domain(tuple(self.d_gamma.vertices))

    @cached_property
    def relation(self) -> DigraphRelation:
        return DigraphRelation(DGAMMA, self.d_gamma, self.vertex_domain)

    @cached_property
    def _language(self) -> Language:
        return Language(self.vertex_domain, (self.relation, self.mu),
                        name=f"{self.combined.source.name}_e")

    def language(self) -> Language:
        return self._language

    @cached_property
    def levels(self) -> dict:
        return {v.id: v.level for v in self.d_gamma.vertices.values()}

    def path_set(self, d: str, x: str) -> frozenset:
        t = self.tuples[self.tuple_ids.index(x)]
        dl = self.combined.domain.labels
        return frozenset(i + 1 for i, c in enumerate(t) if dl[c] == d)

    def expected_counts(self) -> tuple:
        n, D, Dp = self.m, len(self.base_ids), len(self.tuple_ids)
        return ((3 * n + 1) * Dp * D + (1 - 2 * n) * Dp + D,
                (3 * n + 2) * Dp * D - 2 * n * Dp)


def build_d_gamma(comb: CombinedLanguage) -> ExtDualLanguage:
    phi = comb.phi
    tuples = phi.feas_tuples
    if not tuples:
        raise EmptyFeas("Feas(phi) is empty")
    m = comb.m
    labels = comb.domain.labels
    base_ids = tuple(labels)
    tuple_ids = tuple(tuple_label([labels[i] for i in t]) for t in tuples)
    taken = set(base_ids)
    for x in tuple_ids:
        if x in taken:
            raise SemanticError(None, f"vertex id clash on {x!r}")
        taken.add(x)
    g = LeveledDigraph(name=f"D_{comb.source.name}")
    for d in base_ids:
        g.add_vertex(Vertex(d, "base", 0, d))
    for x in tuple_ids:
        g.add_vertex(Vertex(x, "tuple", m + 2, x))
    paths = {}
    for di, d in enumerate(base_ids):
        for t, x in zip(tuples, tuple_ids):
            q = build_QS(m, {i + 1 for i, c in enumerate(t) if c == di})
            lv = q.vertex_levels
            ids = [d]
            for pos in range(1, q.vertex_count - 1):
                vid = internal_id(d, x, pos)
                if vid in taken:
                    raise SemanticError(None, f"vertex id clash on {vid!r}")
                taken.add(vid)
                g.add_vertex(Vertex(vid, "internal", lv[pos], f"{d}>{x}@{pos}"))
                ids.append(vid)
            ids.append(x)
            for a, b in q.edges():
                g.add_edge(ids[a], ids[b])
            paths[(d, x)] = ids
    dom = Domain(tuple(g.vertices))
    costs = {x: phi.value(t) for t, x in zip(tuples, tuple_ids)}
    mu = CostFunction(MU, dom, 1, tuple(costs.get(v, Fraction(0)) for v in dom.labels))
    return ExtDualLanguage(comb, g, mu, tuples, base_ids, tuple_ids, paths)


def homomorphisms(source: LeveledDigraph, target: LeveledDigraph,
                  candidates: Optional[dict] = None, limit: Optional[int] = None,
                  node_budget: int = 10 ** 7) -> Iterator[dict]:
    """All edge-preserving maps source -> target, in lexicographic order.

    Backtracking over source vertices in insertion order with arc
    consistency maintained at every node. `candidates` optionally narrows
    the allowed images of each source vertex.
    """
    tids = list(target.vertices)
    tpos = {t: i for i, t in enumerate(tids)}
    t_out = {tpos[t]: frozenset(tpos[w] for w in target.out_neighbors(t)) for t in tids}
    t_in = {tpos[t]: frozenset(tpos[w] for w in target.in_neighbors(t)) for t in tids}
    sids = list(source.vertices)
    spos = {s: i for i, s in enumerate(sids)}
    arcs = [[] for _ in sids]      # per vertex: (other, forward?)
    for a, b in source.edges:
        if a == b:
            if not any(tpos[t] in t_out[tpos[t]] for t in tids):
                return
        arcs[spos[a]].append((spos[b], True))
        arcs[spos[b]].append((spos[a], False))
    full = frozenset(range(len(tids)))
    doms = []
    for s in sids:
        if candidates is not None and s in candidates:
            doms.append(frozenset(tpos[t] for t in candidates[s]))
        else:
            doms.append(full)
    loops = {spos[a] for a, b in source.edges if a == b}
    for i in loops:
        doms[i] = frozenset(x for x in doms[i] if x in t_out[x])

    def revise(doms, queue_from):
        queue = deque(queue_from)
        queued = set(queue_from)
        while queue:
            y = queue.popleft()
            queued.discard(y)
            for x, fwd in arcs[y]:
                dy = doms[y]
                # fwd: edge y -> x, so x's image needs an in-neighbour in dom(y)
                keep = frozenset(a for a in doms[x]
                                 if not (t_in[a] if fwd else t_out[a]).isdisjoint(dy))
                if len(keep) != len(doms[x]):
                    if not keep:
                        return None
                    doms[x] = keep
                    if x not in queued:
                        queue.append(x)
                        queued.add(x)
        return doms

    doms = revise(doms, range(len(sids)))
    if doms is None:
        return
    nodes = [0]
    count = [0]

    def search(i, doms):
        if i == len(sids):
            yield {s: tids[next(iter(doms[j]))] for j, s in enumerate(sids)}
            return
        for a in sorted(doms[i]):
            nodes[0] += 1
            if nodes[0] > node_budget:
                raise BudgetExceeded("homomorphism search exceeded its node budget")
            nd = list(doms)
            nd[i] = frozenset((a,))
            nd = revise(nd, [i])
            if nd is None:
                continue
            yield from search(i + 1, nd)

    for h in search(0, doms):
        yield h
        count[0] += 1
        if limit is not None and count[0] >= limit:
            return


def level_candidates(source: LeveledDigraph, target: LeveledDigraph) -> Optional[dict]:
    """Images allowed by level arithmetic when both graphs are balanced.

    Returns None if the target is balanced and the source is not (no
    homomorphism can exist), or {} when the target is unbalanced (no filter).
    """
    t_lv = levels(target)
    if t_lv is None:
        return {}
    s_lv = levels(source)
    if s_lv is None:
        return None
    t_height = {}
    for comp in components(target):
        h = max(t_lv[v] for v in comp.vertices)
        for v in comp.vertices:
            t_height[v] = h
    out = {}
    for comp in components(source):
        h = max(s_lv[v] for v in comp.vertices)
        for v in comp.vertices:
            lv = s_lv[v]
            out[v] = [t for t in target.vertices
                      if 0 <= t_lv[t] - lv <= t_height[t] - h]
    return out
