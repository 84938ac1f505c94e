"""Declarative surface-germ packages: one generic projection's combinatorics.

A package bundles the discriminant resolution tree T, the quotient graph G,
the slice graph F, the fiber graph Fhat with L-/P-node marks, the four
rate-preserving graph maps, two cyclic covers, and the lifting table that
says how test curves at each node pull back through the projection.  None of
this can be derived from equations without resolving surface singularities,
so the package is input data and the module's job is heavy validation: the
checker's soundness is conditional on the package being the true
combinatorics of the germ.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from .puiseux import Coefficient, PuiseuxBranch
from .rategraph import (
    CyclicCover,
    GraphMap,
    RateGraph,
    check_commuting_square,
    paths_subgraph,
    validate_cyclic_cover,
    validate_graph_map,
)
from .resolution import ResolutionTree, classify_nodes


class NotANode(ValueError):
    """The requested vertex is not a node of the resolution tree."""


@dataclass(frozen=True)
class LiftEntry:
    """One component of the preimage of a test curve at a node.

    ``fhat_vertices`` lists the fiber-graph homes of the component's slice
    arcs, one per arc; ``degree`` is the covering degree of the projection
    restricted to the component, so its multiplicity is degree times the
    multiplicity of the test curve.
    """

    node: str
    component_id: str
    fhat_vertices: tuple[str, ...]
    g_vertex: str
    degree: int
    mult_hat: int
    qout: tuple[tuple[str, Fraction], ...] = ()

    def __init__(self, node, component_id, fhat_vertices, g_vertex, degree,
                 mult_hat, qout=()):
        object.__setattr__(self, "node", str(node))
        object.__setattr__(self, "component_id", str(component_id))
        object.__setattr__(self, "fhat_vertices", tuple(map(str, fhat_vertices)))
        object.__setattr__(self, "g_vertex", str(g_vertex))
        object.__setattr__(self, "degree", int(degree))
        object.__setattr__(self, "mult_hat", int(mult_hat))
        items = qout.items() if isinstance(qout, Mapping) else qout
        object.__setattr__(
            self, "qout", tuple(sorted((str(k), Fraction(v)) for k, v in items))
        )

    def qout_for(self, other_id: str) -> Fraction | None:
        return dict(self.qout).get(str(other_id))


@dataclass(frozen=True)
class SurfaceGerm:
    """Everything the LNE checker needs to know about one projection."""

    mult: int
    tree: ResolutionTree
    g_graph: RateGraph
    f_graph: RateGraph
    fhat_graph: RateGraph
    maps: Mapping[str, GraphMap]      # E: F->T, C: G->T, Ehat: Fhat->G, Chat: Fhat->F
    covers: Mapping[str, CyclicCover]  # F_over_T (order k), Fhat_over_G (order k*m)
    lifts: Mapping[str, tuple[LiftEntry, ...]]
    name: str = "surface"

    def __init__(self, mult, tree, g_graph, f_graph, fhat_graph, maps, covers,
                 lifts, name="surface"):
        object.__setattr__(self, "mult", int(mult))
        object.__setattr__(self, "tree", tree)
        object.__setattr__(self, "g_graph", g_graph)
        object.__setattr__(self, "f_graph", f_graph)
        object.__setattr__(self, "fhat_graph", fhat_graph)
        object.__setattr__(self, "maps", dict(maps))
        object.__setattr__(self, "covers", dict(covers))
        object.__setattr__(
            self, "lifts", {str(k): tuple(v) for k, v in dict(lifts).items()}
        )
        object.__setattr__(self, "name", str(name))

    def node_image(self, fhat_vertex: str) -> str:
        """(E o Chat)(v): the tree vertex under a fiber-graph vertex."""
        return self.maps["E"].apply(self.maps["Chat"].apply(fhat_vertex))

    def fhat_fiber(self, tree_vertex: str) -> tuple[str, ...]:
        tv = str(tree_vertex)
        return tuple(
            v for v in self.fhat_graph.vertices if self.node_image(v) == tv
        )

    @cached_property
    def fhat_prime(self) -> RateGraph:
        """The marked-path subgraph Fhat' between L- and P-nodes."""
        return paths_subgraph(
            self.fhat_graph,
            self.fhat_graph.marked("L_node"),
            self.fhat_graph.marked("P_node"),
        )

    def nodes(self) -> set[str]:
        return classify_nodes(self.tree)

    def entry(self, node: str, component_id: str) -> LiftEntry:
        for e in self.lifts.get(str(node), ()):
            if e.component_id == str(component_id):
                return e
        raise KeyError(f"no lift entry {component_id!r} at node {node!r}")


def validate(surface: SurfaceGerm) -> list[str]:
    """Run every structural constraint; an empty list means the package holds up.

    Checks the four graph maps, the commuting square, both cyclic covers, the
    per-node degree sums against the multiplicity, the multiplicity rule
    mult_hat = degree * m(node), lift placement, annotation sanity, and the
    tree-side conditions (root rate 1, monotone rates, no adjacent
    delta-nodes).
    """
    out: list[str] = []
    tree = surface.tree

    root = None
    try:
        root = tree.root
    except ValueError:
        out.append("tree: no root vertex")
    if root is not None and root.rate != 1:
        out.append(f"tree: root rate {root.rate} != 1")
    if root is not None and root.curvette_mult != 1:
        out.append(f"tree: root curvette multiplicity {root.curvette_mult} != 1")
    for v in tree.vertices:
        if v.self_intersection > -1:
            out.append(f"tree: vertex {v.id} has self-intersection {v.self_intersection} > -1")
    if root is not None:
        for child, parent in tree.rooted_paths():
            if parent is not None:
                if tree.vertex(child).rate <= tree.vertex(parent).rate:
                    out.append(
                        f"tree: rates not strictly increasing along {parent} -> {child}"
                    )
    delta = {v.id for v in tree.vertices if v.has_flag("delta_node")}
    for a, b in tree.edges:
        if a in delta and b in delta:
            out.append(f"tree: adjacent delta-nodes {a}, {b}")

    # graph maps and the four-cover square
    for name in ("E", "C", "Ehat", "Chat"):
        if name not in surface.maps:
            out.append(f"maps: missing {name}")
            continue
        for msg in validate_graph_map(surface.maps[name]):
            out.append(f"map {name}: {msg}")
    if all(n in surface.maps for n in ("E", "C", "Ehat", "Chat")):
        out.extend(
            check_commuting_square(
                surface.maps["Ehat"], surface.maps["Chat"],
                surface.maps["E"], surface.maps["C"],
            )
        )

    for name in ("F_over_T", "Fhat_over_G"):
        if name not in surface.covers:
            out.append(f"covers: missing {name}")
            continue
        for msg in validate_cyclic_cover(surface.covers[name]):
            out.append(f"cover {name}: {msg}")
    if set(surface.covers) >= {"F_over_T", "Fhat_over_G"}:
        k = surface.covers["F_over_T"].order
        km = surface.covers["Fhat_over_G"].order
        if km != k * surface.mult:
            out.append(f"covers: order {km} != k*mult = {k}*{surface.mult}")

    # lifting table
    nodes = surface.nodes()
    fhat_vertices = set(surface.fhat_graph.vertices)
    for node, entries in sorted(surface.lifts.items()):
        if node not in {v.id for v in tree.vertices}:
            out.append(f"lifts: unknown tree vertex {node!r}")
            continue
        if node not in nodes:
            out.append(f"lifts: {node!r} is not a node of the tree")
        total = sum(e.degree for e in entries)
        if total != surface.mult:
            out.append(f"lifts at {node}: degree sum {total} != multiplicity {surface.mult}")
        m_node = tree.vertex(node).curvette_mult
        ids = [e.component_id for e in entries]
        if len(set(ids)) != len(ids):
            out.append(f"lifts at {node}: duplicate component ids")
        for e in entries:
            if e.mult_hat != e.degree * m_node:
                out.append(
                    f"lift {e.component_id} at {node}: mult_hat {e.mult_hat} != "
                    f"degree {e.degree} * m {m_node}"
                )
            if not e.fhat_vertices:
                out.append(f"lift {e.component_id} at {node}: empty fiber vertex list")
            if len(e.fhat_vertices) != e.mult_hat:
                out.append(
                    f"lift {e.component_id} at {node}: {len(e.fhat_vertices)} slice arcs"
                    f" != mult_hat {e.mult_hat}"
                )
            for v in e.fhat_vertices:
                if v not in fhat_vertices:
                    out.append(f"lift {e.component_id} at {node}: unknown fiber vertex {v!r}")
                    continue
                if surface.node_image(v) != node:
                    out.append(
                        f"lift {e.component_id} at {node}: fiber vertex {v!r} lies over "
                        f"{surface.node_image(v)!r}"
                    )
                if surface.maps["Ehat"].apply(v) != e.g_vertex:
                    out.append(
                        f"lift {e.component_id} at {node}: fiber vertex {v!r} maps to "
                        f"{surface.maps['Ehat'].apply(v)!r}, not declared {e.g_vertex!r}"
                    )
            prime = set(surface.fhat_prime.vertices)
            membership = {v in prime for v in e.fhat_vertices}
            if len(membership) > 1:
                out.append(
                    f"lift {e.component_id} at {node}: arcs split across Fhat' boundary"
                )
        # annotation symmetry and the general inequality q_inn <= q_out
        by_id = {e.component_id: e for e in entries}
        for e in entries:
            for other, q in e.qout:
                if other not in by_id:
                    out.append(f"lift {e.component_id} at {node}: qout names unknown {other!r}")
                    continue
                back = by_id[other].qout_for(e.component_id)
                if back is not None and back != q:
                    out.append(
                        f"lifts at {node}: asymmetric qout for ({e.component_id}, {other})"
                    )
                qi = pairwise_q_inn(surface, e, by_id[other])
                if q < qi:
                    out.append(
                        f"lifts at {node}: annotation q_out {q} below q_inn {qi} for "
                        f"({e.component_id}, {other})"
                    )
    return out


def pairwise_q_inn(surface: SurfaceGerm, e1: LiftEntry, e2: LiftEntry):
    """Inner contact of two lift components: max of arc bottlenecks (import cycle
    avoided; the checker re-exports this as pair_q_inn with witnesses)."""
    from .checker import pair_q_inn

    return pair_q_inn(surface, e1.fhat_vertices, e2.fhat_vertices).value


def principal_components(surface: SurfaceGerm, node: str) -> tuple[LiftEntry, ...]:
    """Entries whose fiber vertices lie on the marked-path subgraph Fhat'."""
    node = str(node)
    if node not in surface.nodes():
        raise NotANode(f"{node!r} is not a node of the tree")
    prime = set(surface.fhat_prime.vertices)
    out = []
    for e in surface.lifts.get(node, ()):
        if all(v in prime for v in e.fhat_vertices):
            out.append(e)
    return tuple(out)


def nodal_test_curves(surface: SurfaceGerm) -> list[tuple[str, PuiseuxBranch]]:
    """One generic curvette per node, with fresh symbols, avoiding delta arrows."""
    from .resolution import curvette

    out = []
    for node in sorted(surface.nodes(), key=lambda v: (len(v), v)):
        symbol = f"t_{node}"
        out.append((node, curvette(surface.tree, node, symbol)))
    return out
