"""Vertex-rate-weighted graphs: bottleneck contact, marked-path subgraphs,
rate-preserving graph maps, and finite cyclic covers.

The bottleneck of two vertices is the maximum over simple paths of the
minimum vertex rate on the path, endpoints included; it computes inner
contact exponents on fiber and resolution graphs.  Graphs here are small
(tens to a few hundred vertices), so the marked-path subgraph is computed
exactly with unit-capacity flows rather than heuristics.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .puiseux import Rational


class Disconnected(ValueError):
    """The queried vertices lie in different connected components."""


class SourceMismatch(ValueError):
    """Graph maps in a square do not compose."""


Edge = tuple[str, str]


def _norm_edge(u, v) -> Edge:
    u, v = str(u), str(v)
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class RateGraph:
    """Undirected graph with positive rational vertex rates and mark sets.

    Multi-edges are preserved (parallel annuli in fiber graphs); they never
    affect bottlenecks but matter for cover validation.
    """

    rates: tuple[tuple[str, Fraction], ...]
    edges: tuple[Edge, ...]
    marks: tuple[tuple[str, tuple[str, ...]], ...]

    def __init__(self, rates: Mapping, edges: Iterable, marks: Mapping | None = None):
        rates_t = tuple(sorted((str(v), Fraction(r)) for v, r in dict(rates).items()))
        if any(r <= 0 for _, r in rates_t):
            raise ValueError("rates must be positive")
        vset = {v for v, _ in rates_t}
        edges_t = []
        for u, v in edges:
            e = _norm_edge(u, v)
            if e[0] not in vset or e[1] not in vset:
                raise ValueError(f"edge {e} references unknown vertex")
            edges_t.append(e)
        marks = marks or {}
        marks_t = tuple(
            sorted((str(v), tuple(sorted(set(map(str, ms))))) for v, ms in dict(marks).items() if ms)
        )
        if any(v not in vset for v, _ in marks_t):
            raise ValueError("mark on unknown vertex")
        object.__setattr__(self, "rates", rates_t)
        object.__setattr__(self, "edges", tuple(sorted(edges_t)))
        object.__setattr__(self, "marks", marks_t)

    @property
    def vertices(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.rates)

    def rate(self, v: str) -> Fraction:
        return dict(self.rates)[str(v)]

    def mark_set(self, v: str) -> frozenset:
        return frozenset(dict(self.marks).get(str(v), ()))

    def marked(self, mark: str) -> tuple[str, ...]:
        return tuple(v for v in self.vertices if mark in self.mark_set(v))

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return {v: sorted(set(ns)) for v, ns in adj.items()}

    def degree(self, v: str) -> int:
        v = str(v)
        return sum((u == v) + (w == v) for u, w in self.edges)

    def components(self) -> list[frozenset]:
        adj = self.adjacency()
        seen: set[str] = set()
        out = []
        for v in self.vertices:
            if v in seen:
                continue
            comp = {v}
            queue = deque([v])
            while queue:
                x = queue.popleft()
                for y in adj[x]:
                    if y not in comp:
                        comp.add(y)
                        queue.append(y)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def induced(self, keep: Iterable[str]) -> "RateGraph":
        keep = set(map(str, keep))
        return RateGraph(
            {v: r for v, r in self.rates if v in keep},
            [e for e in self.edges if e[0] in keep and e[1] in keep],
            {v: ms for v, ms in self.marks if v in keep},
        )


class _UnionFind:
    def __init__(self):
        self.parent: dict[str, str] = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


@dataclass(frozen=True)
class BottleneckResult:
    value: Fraction
    path: tuple[str, ...]
    min_vertex: str


def bottleneck(g: RateGraph, v: str, w: str) -> BottleneckResult:
    """Max over simple paths of the min vertex rate, with one witness path.

    For v = w the answer is rate(v), the path is the single vertex, and the
    minimizing vertex is v itself.
    """
    v, w = str(v), str(w)
    rates = dict(g.rates)
    if v not in rates or w not in rates:
        raise KeyError(f"unknown vertex {v!r} or {w!r}")
    if v == w:
        return BottleneckResult(rates[v], (v,), v)

    # activate vertices by descending rate; v,w connect at the bottleneck
    order = sorted(g.vertices, key=lambda x: (-rates[x], x))
    adj = g.adjacency()
    uf = _UnionFind()
    active: set[str] = set()
    value = None
    i = 0
    while i < len(order):
        r = rates[order[i]]
        while i < len(order) and rates[order[i]] == r:
            x = order[i]
            uf.add(x)
            active.add(x)
            for y in adj[x]:
                if y in active:
                    uf.union(x, y)
            i += 1
        if v in active and w in active and uf.find(v) == uf.find(w):
            value = r
            break
    if value is None:
        raise Disconnected(f"{v!r} and {w!r} are not connected")

    keep = {x for x in g.vertices if rates[x] >= value}
    sub = {x: [y for y in adj[x] if y in keep] for x in keep}
    prev = {v: None}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        if x == w:
            break
        for y in sub[x]:
            if y not in prev:
                prev[y] = x
                queue.append(y)
    path = [w]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    path.reverse()
    min_vertex = min(path, key=lambda x: (rates[x], x))
    return BottleneckResult(value, tuple(path), min_vertex)


def _max_flow_upto_2(nodes, arcs, source, sinks) -> int:
    """Unit-capacity max flow, capped at 2, on a split digraph given as arc set."""
    cap: dict[tuple[str, str], int] = {}
    adj: dict[str, set[str]] = {n: set() for n in nodes}
    for a, b, c in arcs:
        cap[(a, b)] = cap.get((a, b), 0) + c
        cap.setdefault((b, a), 0)
        adj[a].add(b)
        adj[b].add(a)
    flow = 0
    while flow < 2:
        prev = {source: None}
        queue = deque([source])
        reached = None
        while queue and reached is None:
            x = queue.popleft()
            for y in adj[x]:
                if y not in prev and cap.get((x, y), 0) > 0:
                    prev[y] = x
                    if y in sinks:
                        reached = y
                        break
                    queue.append(y)
        if reached is None:
            break
        x = reached
        while prev[x] is not None:
            p = prev[x]
            cap[(p, x)] -= 1
            cap[(x, p)] += 1
            x = p
        flow += 1
    return flow


def _split_arcs(g: RateGraph, exclude: set[str]):
    """Arcs of the vertex-split digraph: v_in -> v_out cap 1, edges both ways."""
    arcs = []
    nodes = set()
    for x in g.vertices:
        if x in exclude:
            continue
        arcs.append((f"i:{x}", f"o:{x}", 1))
        nodes.add(f"i:{x}")
        nodes.add(f"o:{x}")
    for u, v in set(g.edges):
        if u in exclude or v in exclude:
            continue
        arcs.append((f"o:{u}", f"i:{v}", 1))
        arcs.append((f"o:{v}", f"i:{u}", 1))
    return nodes, arcs


def paths_subgraph(g: RateGraph, marks_a: Iterable[str], marks_b: Iterable[str]) -> RateGraph:
    """Union of all simple paths whose two endpoints are marked vertices.

    Marked vertices themselves are always kept (a one-vertex path counts).
    A vertex x is on such a path iff two vertex-disjoint-except-at-x paths
    reach two distinct marked vertices; an edge (u, v) is on one iff disjoint
    paths run from u and from v to two distinct marked vertices without the
    edge.  Both tests are exact unit-capacity flow computations.
    """
    marked = {str(x) for x in marks_a} | {str(x) for x in marks_b}
    unknown = marked - set(g.vertices)
    if unknown:
        raise KeyError(f"marked vertices not in graph: {sorted(unknown)}")
    if not marked:
        raise ValueError("mark sets must not both be empty")

    def sink_arcs(nodes, arcs, exclude=frozenset()):
        for m in marked:
            if m in exclude:
                continue
            arcs.append((f"o:{m}", "SINK", 1))
        nodes.add("SINK")
        return nodes, arcs

    keep_vertices = set()
    for x in g.vertices:
        if x in marked:
            keep_vertices.add(x)
            continue
        nodes, arcs = _split_arcs(g, exclude=set())
        nodes, arcs = sink_arcs(nodes, arcs)
        arcs.append(("SRC", f"o:{x}", 2))
        # x may be traversed; entry into x is impossible from SRC side anyway
        nodes.add("SRC")
        if _max_flow_upto_2(nodes, arcs, "SRC", {"SINK"}) >= 2:
            keep_vertices.add(x)

    keep_edges = []
    for idx, (u, v) in enumerate(g.edges):
        if u not in keep_vertices or v not in keep_vertices:
            continue
        # remove this one edge copy, then ask for disjoint u->marked, v->marked
        nodes, arcs = _split_arcs(g, exclude=set())
        arcs = [a for a in arcs if a != (f"o:{u}", f"i:{v}", 1) and a != (f"o:{v}", f"i:{u}", 1)]
        remaining = [e for j, e in enumerate(g.edges) if j != idx and _norm_edge(*e) == (u, v)]
        for _ in remaining:
            arcs.append((f"o:{u}", f"i:{v}", 1))
            arcs.append((f"o:{v}", f"i:{u}", 1))
        nodes, arcs = sink_arcs(nodes, arcs)
        arcs.append(("SRC", f"i:{u}", 1))
        arcs.append(("SRC", f"i:{v}", 1))
        nodes.add("SRC")
        if _max_flow_upto_2(nodes, arcs, "SRC", {"SINK"}) >= 2:
            keep_edges.append((u, v))

    return RateGraph(
        {v: r for v, r in g.rates if v in keep_vertices},
        keep_edges,
        {v: ms for v, ms in g.marks if v in keep_vertices},
    )


def gauss_classes(fhat: RateGraph) -> list[frozenset]:
    """Connected components of the graph minus its P-nodes.

    P-node vertices belong to no class: the limit tangent plane is not
    single-valued on the pieces that meet the polar curve.
    """
    p_nodes = set(fhat.marked("P_node"))
    rest = [v for v in fhat.vertices if v not in p_nodes]
    sub = fhat.induced(rest)
    return sorted(sub.components(), key=lambda c: sorted(c))


def gauss_class_index(fhat: RateGraph) -> dict[str, int]:
    out = {}
    for i, comp in enumerate(gauss_classes(fhat)):
        for v in comp:
            out[v] = i
    return out


@dataclass(frozen=True)
class GraphMap:
    """Vertex map between rate graphs sending edges to edges."""

    source: RateGraph
    target: RateGraph
    vertex_map: tuple[tuple[str, str], ...]
    surjective: bool = True

    def __init__(self, source, target, vertex_map, surjective=True):
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(
            self, "vertex_map", tuple(sorted((str(a), str(b)) for a, b in dict(vertex_map).items()))
        )
        object.__setattr__(self, "surjective", bool(surjective))

    def apply(self, v: str) -> str:
        return dict(self.vertex_map)[str(v)]


def validate_graph_map(f: GraphMap) -> list[str]:
    """Diagnostics for totality, edge mapping, rate preservation, surjectivity."""
    out = []
    vm = dict(f.vertex_map)
    src_vertices = set(f.source.vertices)
    tgt_vertices = set(f.target.vertices)
    for v in sorted(src_vertices):
        if v not in vm:
            out.append(f"vertex {v!r} has no image")
    for v, w in f.vertex_map:
        if v not in src_vertices:
            out.append(f"map defined on unknown vertex {v!r}")
            continue
        if w not in tgt_vertices:
            out.append(f"image vertex {w!r} not in target")
            continue
        if f.source.rate(v) != f.target.rate(w):
            out.append(f"rate mismatch at {v!r}: {f.source.rate(v)} -> {f.target.rate(w)}")
    tgt_edges = set(f.target.edges)
    for u, v in set(f.source.edges):
        if u in vm and v in vm and vm[u] in tgt_vertices and vm[v] in tgt_vertices:
            img = _norm_edge(vm[u], vm[v])
            if img not in tgt_edges:
                out.append(f"edge ({u!r}, {v!r}) maps to non-edge {img}")
    if f.surjective:
        image = {vm[v] for v in src_vertices if v in vm}
        for w in sorted(tgt_vertices - image):
            out.append(f"target vertex {w!r} not in image")
    return out


@dataclass(frozen=True)
class CyclicCover:
    """A rate graph with a finite cyclic action whose quotient is the base."""

    total: RateGraph
    base: RateGraph
    projection: GraphMap
    order: int
    generator: tuple[tuple[str, str], ...]

    def __init__(self, total, base, projection, order, generator):
        object.__setattr__(self, "total", total)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "projection", projection)
        object.__setattr__(self, "order", int(order))
        object.__setattr__(
            self, "generator", tuple(sorted((str(a), str(b)) for a, b in dict(generator).items()))
        )

    def orbits(self) -> list[frozenset]:
        gen = dict(self.generator)
        seen: set[str] = set()
        out = []
        for v in self.total.vertices:
            if v in seen:
                continue
            orbit = {v}
            x = gen.get(v, v)
            while x not in orbit:
                orbit.add(x)
                x = gen.get(x, x)
            seen |= orbit
            out.append(frozenset(orbit))
        return out


def _edge_multiset(g: RateGraph) -> dict[Edge, int]:
    out: dict[Edge, int] = {}
    for e in g.edges:
        out[e] = out.get(e, 0) + 1
    return out


def validate_cyclic_cover(c: CyclicCover) -> list[str]:
    """Diagnostics: generator is a rate-preserving automorphism whose order
    divides the declared one and whose orbits project bijectively to the base."""
    out = []
    gen = dict(c.generator)
    vertices = set(c.total.vertices)
    if set(gen) != vertices or set(gen.values()) != vertices:
        out.append("generator is not a permutation of the vertices")
        return out
    for v in sorted(vertices):
        if c.total.rate(v) != c.total.rate(gen[v]):
            out.append(f"generator changes the rate at {v!r}")
    src_edges = _edge_multiset(c.total)
    img_edges: dict[Edge, int] = {}
    for (u, v), k in src_edges.items():
        e = _norm_edge(gen[u], gen[v])
        img_edges[e] = img_edges.get(e, 0) + k
    if img_edges != src_edges:
        out.append("generator does not preserve the edge multiset")

    # order of the permutation must divide the declared order
    seen: set[str] = set()
    from math import lcm as _lcm

    order = 1
    for v in vertices:
        if v in seen:
            continue
        n = 1
        x = gen[v]
        cycle = {v}
        while x not in cycle:
            cycle.add(x)
            x = gen[x]
            n += 1
        seen |= cycle
        order = _lcm(order, n)
    if c.order % order != 0:
        out.append(f"generator has order {order}, not dividing declared {c.order}")

    proj = dict(c.projection.vertex_map)
    orbits = c.orbits()
    for orbit in orbits:
        images = {proj.get(v) for v in orbit}
        if len(images) != 1:
            out.append(f"projection not constant on orbit {sorted(orbit)}")
    out.extend(validate_graph_map(c.projection))
    images = [proj.get(next(iter(orbit))) for orbit in orbits]
    if len(set(images)) != len(orbits) or set(images) != set(c.base.vertices):
        out.append("orbits do not biject with base vertices")

    # orbit-edge classes must biject with base edges, with multiplicity
    gen_edges: dict[Edge, Edge] = {}
    for e in src_edges:
        gen_edges[e] = _norm_edge(gen[e[0]], gen[e[1]])
    eseen: set[Edge] = set()
    quotient_count: dict[Edge, int] = {}
    for e in sorted(src_edges):
        if e in eseen:
            continue
        orbit_edges = {e}
        x = gen_edges[e]
        while x not in orbit_edges:
            orbit_edges.add(x)
            x = gen_edges[x]
        eseen |= orbit_edges
        base_e = _norm_edge(proj[e[0]], proj[e[1]])
        # each copy of a multi-edge spawns its own orbit; count copies once
        copies = min(src_edges[x] for x in orbit_edges)
        quotient_count[base_e] = quotient_count.get(base_e, 0) + copies
    if quotient_count != _edge_multiset(c.base):
        out.append("edge orbits do not biject with base edges")
    return out


def check_commuting_square(
    ehat: GraphMap, chat: GraphMap, e: GraphMap, c: GraphMap
) -> list[str]:
    """Check C o Ehat = E o Chat on vertices for the four-cover diagram.

    Ehat: Fhat -> G, C: G -> T, Chat: Fhat -> F, E: F -> T.
    """
    if ehat.source is not chat.source and set(ehat.source.vertices) != set(chat.source.vertices):
        raise SourceMismatch("Ehat and Chat must share their source")
    if set(ehat.target.vertices) != set(c.source.vertices):
        raise SourceMismatch("target of Ehat must be the source of C")
    if set(chat.target.vertices) != set(e.source.vertices):
        raise SourceMismatch("target of Chat must be the source of E")
    if set(c.target.vertices) != set(e.target.vertices):
        raise SourceMismatch("C and E must share their target")
    out = []
    for v in ehat.source.vertices:
        left = c.apply(ehat.apply(v))
        right = e.apply(chat.apply(v))
        if left != right:
            out.append(f"square does not commute at {v!r}: {left!r} != {right!r}")
    return out


def to_dot(g: RateGraph, name: str = "rategraph", thick: Iterable[str] = ()) -> str:
    """DOT export: rates printed bold, P-nodes dashed, L-nodes doubled,
    membership in a distinguished subgraph drawn with thick edges."""
    thick = set(map(str, thick))
    lines = [f"graph {name} {{"]
    for v in g.vertices:
        marks = g.mark_set(v)
        attrs = [f'label=<<b>{g.rate(v)}</b>>']
        if "P_node" in marks:
            attrs.append("style=dashed")
        if "L_node" in marks:
            attrs.append("peripheries=2")
        lines.append(f'  "{v}" [{", ".join(attrs)}];')
    for u, v in g.edges:
        style = " [penwidth=2]" if u in thick and v in thick else ""
        lines.append(f'  "{u}" -- "{v}"{style};')
    lines.append("}")
    return "\n".join(lines) + "\n"
