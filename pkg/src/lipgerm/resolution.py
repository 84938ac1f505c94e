"""Embedded resolution of plane-curve branch sets by simulated point blow-ups.

The engine follows each branch through the tower of infinitely near points.
At every point the local expansion of a branch is an affine reparametrization
of its original terms: a pair (A, B) with local exponent eta corresponding to
original exponent A + B*eta.  Blow-ups act on leading exponents by the
continued-fraction step eta -> eta - 1 (chart with the previous cross curve)
or eta -> 1/eta - 1 (chart with the previous base curve), and branches sitting
at the same point separate exactly when their formal contact says so, so no
transformed coefficients ever need to be computed.

Each point also carries a Moebius map eta -> (a*eta + b)/(c*eta + d) sending
the local leading exponent of a branch class to its original exponent; its
value at 1 is the inner rate of the exceptional curve created by blowing the
point up, and the accumulated term prefix of the point gives generic
curvettes of that curve for free.

The simulation is resolutely formal: the tree is a function of the branch
terms as listed, coefficients are compared for formal equality, and anything
not determined by the truncations raises instead of guessing.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .puiseux import (
    INFINITE,
    Coefficient,
    Infinity,
    PuiseuxBranch,
    TruncationTooShort,
    contact,
)
from .rategraph import Disconnected, RateGraph

DEFAULT_STEP_BUDGET = 4096
STEP_BUDGET_ENV = "LIPGERM_STEP_BUDGET"


class InvalidDirective(ValueError):
    """A blow-up directive cannot be realized on the resolved tree."""


class UnknownBranch(KeyError):
    """A branch id is not among the resolved branches."""


class StepBudgetExceeded(RuntimeError):
    """The blow-up simulation ran past its step budget."""


@dataclass(frozen=True)
class BlowupDirective:
    """Extra blow-ups past the minimal embedded resolution.

    ``extend_along_branch`` keeps blowing up the attachment point of a branch
    until the attachment vertex has the target rate (this is how the
    family-separation depth of a discriminant enters as data);
    ``blow_up_edge`` blows up the intersection point of two exceptional
    curves.
    """

    kind: str
    branch: str | None = None
    target_rate: Fraction | None = None
    edge: tuple[str, str] | None = None

    @staticmethod
    def extend_along_branch(branch: str, target_rate) -> "BlowupDirective":
        return BlowupDirective("extend_along_branch", branch=str(branch),
                               target_rate=Fraction(target_rate))

    @staticmethod
    def blow_up_edge(v1: str, v2: str) -> "BlowupDirective":
        return BlowupDirective("blow_up_edge", edge=(str(v1), str(v2)))


@dataclass(frozen=True)
class CurvetteRecipe:
    """Prefix terms and coordinates of the generic curvettes of a vertex."""

    prefix: tuple[tuple[Fraction, Coefficient], ...]
    coords: tuple[str, str]


@dataclass
class ResolutionVertex:
    id: str
    rate: Fraction
    self_intersection: int
    curvette_mult: int
    parent: str | None = None
    flags: frozenset = frozenset()
    arrows: tuple[str, ...] = ()
    recipe: CurvetteRecipe | None = None

    def has_flag(self, flag: str) -> bool:
        return flag in self.flags


@dataclass(frozen=True)
class ResolutionTree:
    """Weighted dual tree of an embedded resolution.

    Vertices carry inner rate, self-intersection, curvette multiplicity and
    flags; ``attachments`` maps branch ids to (vertex, point tag).  The tree
    is immutable: marking and separation operations return new trees.
    """

    vertices: tuple[ResolutionVertex, ...]
    edges: tuple[tuple[str, str], ...]
    attachments: tuple[tuple[str, tuple[str, str]], ...]
    edge_points: tuple = ()  # internal blow-up data for edge directives

    def vertex(self, vid: str) -> ResolutionVertex:
        for v in self.vertices:
            if v.id == str(vid):
                return v
        raise KeyError(f"no vertex {vid!r}")

    @property
    def vertex_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.vertices)

    @property
    def root(self) -> ResolutionVertex:
        for v in self.vertices:
            if v.has_flag("root"):
                return v
        raise ValueError("tree has no root")

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {v.id: [] for v in self.vertices}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return {k: sorted(vs) for k, vs in adj.items()}

    def valency(self, vid: str) -> int:
        """Number of incident tree edges; arrows are decorations, not edges."""
        vid = str(vid)
        return sum(vid in e for e in self.edges)

    def attachment(self, branch_id: str) -> tuple[str, str]:
        for bid, at in self.attachments:
            if bid == str(branch_id):
                return at
        raise UnknownBranch(branch_id)

    def rooted_paths(self):
        """(vertex, parent) pairs in BFS order from the root."""
        adj = self.adjacency()
        root = self.root.id
        seen = {root}
        order = [(root, None)]
        queue = [root]
        while queue:
            x = queue.pop(0)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    order.append((y, x))
                    queue.append(y)
        return order

    def as_rategraph(self, extra_marks: Mapping | None = None) -> RateGraph:
        marks: dict[str, set] = {}
        for v in self.vertices:
            ms = set()
            if v.has_flag("delta_node"):
                ms.add("delta_node")
            if ms:
                marks[v.id] = ms
        for v, ms in (extra_marks or {}).items():
            marks.setdefault(str(v), set()).update(ms)
        return RateGraph({v.id: v.rate for v in self.vertices}, self.edges, marks)


# -- the simulation ---------------------------------------------------------


@dataclass(frozen=True)
class _Mobius:
    """eta -> (a*eta + b) / (c*eta + d) with rational entries."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __call__(self, eta: Fraction) -> Fraction:
        return (self.a * eta + self.b) / (self.c * eta + self.d)

    def shifted(self) -> "_Mobius":
        # precompose with eta -> eta + 1
        return _Mobius(self.a, self.a + self.b, self.c, self.c + self.d)

    def inverted(self) -> "_Mobius":
        # precompose with eta -> 1 / (1 + eta)
        return _Mobius(self.b, self.a + self.b, self.d, self.c + self.d)

    @staticmethod
    def identity() -> "_Mobius":
        one, zero = Fraction(1), Fraction(0)
        return _Mobius(one, zero, zero, one)

    @staticmethod
    def affine(a: Fraction, b: Fraction) -> "_Mobius":
        return _Mobius(a, b, Fraction(0), Fraction(1))


@dataclass
class _BranchState:
    bid: str
    branch: PuiseuxBranch
    idx: int  # next unconsumed term
    A: Fraction
    B: Fraction

    def local_exponent(self, i: int) -> Fraction:
        e = self.branch.terms[i][0]
        return (e - self.A) / self.B

    def leading(self) -> Fraction | None:
        if self.idx >= len(self.branch.terms):
            return None  # residual series is identically zero
        return self.local_exponent(self.idx)

    def attachable(self) -> bool:
        """Residual exponents all integers >= 1: smooth and transverse."""
        for i in range(self.idx, len(self.branch.terms)):
            eta = self.local_exponent(i)
            if eta.denominator != 1 or eta < 1:
                return False
        return True


@dataclass
class _Point:
    pid: int
    base: str | None  # exceptional curve the series is expanded over
    cross: str | None  # second exceptional curve at a satellite point
    mobius: _Mobius
    prefix: tuple[tuple[Fraction, Coefficient], ...]
    residents: list[_BranchState] = field(default_factory=list)

    @property
    def is_satellite(self) -> bool:
        return self.base is not None and self.cross is not None


class _Engine:
    def __init__(self, branches: Mapping[str, PuiseuxBranch], step_budget: int):
        coords = {b.coords for b in branches.values()}
        if len(coords) > 1:
            raise ValueError(f"branches use mixed coordinates: {sorted(coords)}")
        self.coords = next(iter(coords)) if coords else ("x", "y")
        self.step_budget = step_budget
        self.steps = 0
        self.counter = itertools.count(1)
        self.point_counter = itertools.count(1)
        self.vertices: dict[str, ResolutionVertex] = {}
        self.edges: dict[frozenset, _Point] = {}
        self.attachments: dict[str, tuple[str, str]] = {}
        self.final_states: dict[str, _BranchState] = {}
        origin = _Point(0, None, None, _Mobius.identity(), ())
        origin.residents = [
            _BranchState(bid, b, 0, Fraction(0), Fraction(1))
            for bid, b in sorted(branches.items())
        ]
        self.queue: list[_Point] = [origin]

    # -- bookkeeping

    def _new_vertex(self, center: _Point) -> ResolutionVertex:
        vid = f"C{next(self.counter)}"
        rate = center.mobius(Fraction(1))
        if center.base is None:
            m = 1
            flags = frozenset({"root"})
        elif center.cross is None:
            m = self.vertices[center.base].curvette_mult
            flags = frozenset()
        else:
            m = (
                self.vertices[center.base].curvette_mult
                + self.vertices[center.cross].curvette_mult
            )
            flags = frozenset()
        v = ResolutionVertex(
            id=vid,
            rate=rate,
            self_intersection=-1,
            curvette_mult=m,
            flags=flags,
            recipe=CurvetteRecipe(center.prefix, self.coords),
        )
        self.vertices[vid] = v
        for host in (center.base, center.cross):
            if host is not None:
                self.vertices[host].self_intersection -= 1
        if center.base is not None and center.cross is not None:
            del self.edges[frozenset((center.base, center.cross))]
        return v

    def _add_edge(self, new_vid: str, host: str, mobius: _Mobius, prefix) -> _Point:
        p = _Point(next(self.point_counter), new_vid, host, mobius, prefix)
        self.edges[frozenset((new_vid, host))] = p
        return p

    # -- one blow-up

    def blow_up(self, center: _Point) -> str:
        self.steps += 1
        if self.steps > self.step_budget:
            raise StepBudgetExceeded(
                f"more than {self.step_budget} blow-ups; raise {STEP_BUDGET_ENV}"
            )
        v = self._new_vertex(center)

        # the two chart origins exist as points regardless of residents
        chart2 = None
        if center.base is not None:
            chart2 = self._add_edge(v.id, center.base, center.mobius.inverted(), center.prefix)
        if center.cross is not None:
            chart1 = self._add_edge(v.id, center.cross, center.mobius.shifted(), center.prefix)
        else:
            chart1 = _Point(
                next(self.point_counter), v.id, None, center.mobius.shifted(), center.prefix
            )

        landings: dict[Coefficient, _Point] = {}
        landing_map: Fraction | None = None
        for st in sorted(center.residents, key=lambda s: s.bid):
            eta = st.leading()
            if eta is None or eta > 1:
                st.A, st.B = st.A + st.B, st.B
                chart1.residents.append(st)
            elif eta == 1:
                exp, coeff = st.branch.terms[st.idx]
                if landing_map is None:
                    landing_map = st.A + st.B
                elif landing_map != st.A + st.B:
                    raise AssertionError("landing depth must be class-invariant")
                key = coeff
                if key not in landings:
                    affine = _Mobius.affine(st.B, st.A + st.B)
                    landings[key] = _Point(
                        next(self.point_counter),
                        v.id,
                        None,
                        affine,
                        center.prefix + ((exp, coeff),),
                    )
                st.idx += 1
                st.A, st.B = st.A + st.B, st.B
                landings[key].residents.append(st)
            else:
                if chart2 is None:
                    raise AssertionError("eta < 1 cannot occur at the first blow-up")
                pivot = eta
                st.A, st.B = st.A + st.B * (2 * pivot - 1), st.B * pivot
                chart2.residents.append(st)

        for child in [chart1, *(p for _, p in sorted(landings.items(), key=lambda kv: str(kv[0])))]:
            if child.residents:
                self.queue.append(child)
        if chart2 is not None and chart2.residents:
            self.queue.append(chart2)
        return v.id

    # -- the main loop

    def needs_blowup(self, p: _Point) -> bool:
        if not p.residents:
            return False
        if p.base is None:  # the origin itself is never an attachment point
            return True
        if p.is_satellite or len(p.residents) > 1:
            return True
        return not p.residents[0].attachable()

    def attach(self, p: _Point):
        for st in p.residents:
            self.attachments[st.bid] = (p.base, f"p{p.pid}")
            self.final_states[st.bid] = st
            self.vertices[p.base] = replace(
                self.vertices[p.base],
                arrows=tuple(sorted(self.vertices[p.base].arrows + (st.bid,))),
            )
        p.residents = []

    def run(self):
        while self.queue:
            p = self.queue.pop(0)
            if not p.residents:
                continue
            if self.needs_blowup(p):
                self.blow_up(p)
            else:
                self.attach(p)

    # -- directives

    def extend_along_branch(self, bid: str, target: Fraction):
        if bid not in self.attachments:
            raise UnknownBranch(bid)
        point = self._attachment_point(bid)
        rate = self.vertices[point.base].rate
        if target <= rate:
            raise InvalidDirective(f"target rate {target} not above current {rate}")
        while self.vertices[self.attachments[bid][0]].rate != target:
            point = self._attachment_point(bid)
            next_rate = point.mobius(Fraction(1))
            if next_rate > target:
                raise InvalidDirective(
                    f"target rate {target} unreachable; ladder passes {next_rate}"
                )
            # re-blow the attachment point; the branch rides along
            st = point.residents[0]
            del self.attachments[st.bid]
            host = point.base
            self.vertices[host] = replace(
                self.vertices[host],
                arrows=tuple(a for a in self.vertices[host].arrows if a != st.bid),
            )
            self.blow_up(point)
            self.run()

    def _attachment_point(self, bid: str) -> _Point:
        # rebuild a live point for the attached branch so it can be re-blown;
        # the consumed terms are exactly the prefix accumulated on its path
        vid, tag = self.attachments[bid]
        st = self.final_states[bid]
        affine = _Mobius.affine(st.B, st.A)
        prefix = tuple(st.branch.terms[: st.idx])
        p = _Point(int(tag[1:]), vid, None, affine, prefix, residents=[st])
        return p

    def blow_up_edge(self, v1: str, v2: str):
        key = frozenset((str(v1), str(v2)))
        if key not in self.edges:
            raise InvalidDirective(f"no edge between {v1!r} and {v2!r}")
        self.blow_up(self.edges[key])

    def tree(self) -> ResolutionTree:
        vertices = tuple(self.vertices[k] for k in sorted(self.vertices, key=_vertex_sort_key))
        edges = tuple(sorted(tuple(sorted(e)) for e in self.edges))
        tree = ResolutionTree(
            vertices=vertices,
            edges=edges,
            attachments=tuple(sorted(self.attachments.items())),
            edge_points=tuple(
                (tuple(sorted(k)), p.mobius, p.prefix, p.base, p.cross)
                for k, p in sorted(self.edges.items(), key=lambda kv: tuple(sorted(kv[0])))
            ),
        )
        return _with_parents(tree)


def _vertex_sort_key(vid: str):
    return (len(vid), vid)


def _with_parents(tree: ResolutionTree) -> ResolutionTree:
    parents = dict(tree.rooted_paths())
    vertices = tuple(replace(v, parent=parents.get(v.id)) for v in tree.vertices)
    return replace(tree, vertices=vertices)


def resolve(
    branches: Mapping[str, PuiseuxBranch] | Sequence[PuiseuxBranch],
    directives: Sequence[BlowupDirective] = (),
    step_budget: int | None = None,
) -> ResolutionTree:
    """Minimal embedded resolution of a pairwise-distinct branch set.

    Blows up points, starting at the origin, until the total transform has
    normal crossings, the strict transforms are smooth and pairwise disjoint,
    and each meets a single exceptional curve transversally at a smooth
    point; then applies the directives in order.  Self-intersections follow
    the usual bookkeeping and curvette multiplicities the free/satellite
    rule.
    """
    if not isinstance(branches, Mapping):
        branches = {f"b{i + 1}": b for i, b in enumerate(branches)}
    branches = {str(k): v for k, v in branches.items()}
    if not branches:
        raise ValueError("need at least one branch")
    for (id1, b1), (id2, b2) in itertools.combinations(sorted(branches.items()), 2):
        c = contact(b1, b2)  # raises TruncationTooShort when undetermined
        if isinstance(c, Infinity):
            raise ValueError(f"branches {id1!r} and {id2!r} are formally identical")
    if step_budget is None:
        step_budget = int(os.environ.get(STEP_BUDGET_ENV, DEFAULT_STEP_BUDGET))

    engine = _Engine(branches, step_budget)
    engine.run()
    for d in directives:
        if d.kind == "extend_along_branch":
            engine.extend_along_branch(d.branch, d.target_rate)
        elif d.kind == "blow_up_edge":
            engine.blow_up_edge(*d.edge)
        else:
            raise InvalidDirective(f"unknown directive kind {d.kind!r}")
    return engine.tree()


# -- operations on resolved trees -------------------------------------------


def inner_rate(tree: ResolutionTree, vid: str) -> Fraction:
    """Inner rate of an exceptional curve: the contact of two generic curvettes."""
    return tree.vertex(vid).rate


def curvette(tree: ResolutionTree, vid: str, fresh_symbol: str) -> PuiseuxBranch:
    """A branch attaching transversally at a fresh free point of the vertex.

    The fresh symbol as final coefficient keeps the attachment point away
    from all existing arrows and edges; truncation is the vertex rate.
    """
    v = tree.vertex(vid)
    if v.recipe is None:
        raise ValueError(f"vertex {vid!r} carries no curvette recipe")
    terms = v.recipe.prefix + ((v.rate, Coefficient.sym(fresh_symbol)),)
    return PuiseuxBranch(terms, v.rate, v.recipe.coords)


def curvette_multiplicity(tree: ResolutionTree, vid: str) -> int:
    return tree.vertex(vid).curvette_mult


def mark_delta(tree: ResolutionTree, delta_branch_ids: Iterable[str]) -> ResolutionTree:
    """Flag delta_node on every vertex carrying the arrow of a delta branch."""
    ids = [str(b) for b in delta_branch_ids]
    att = dict(tree.attachments)
    for bid in ids:
        if bid not in att:
            raise UnknownBranch(bid)
    delta_vertices = {att[bid][0] for bid in ids}
    vertices = tuple(
        replace(v, flags=v.flags | {"delta_node"}) if v.id in delta_vertices else v
        for v in tree.vertices
    )
    return replace(tree, vertices=vertices)


def _blow_edge_pure(tree: ResolutionTree, v1: str, v2: str, flags=frozenset()) -> ResolutionTree:
    """Blow up the intersection point of two adjacent exceptional curves."""
    key = tuple(sorted((str(v1), str(v2))))
    points = {k: (m, pref, base, cross) for k, m, pref, base, cross in tree.edge_points}
    if key not in points:
        raise InvalidDirective(f"no edge between {v1!r} and {v2!r}")
    mobius, prefix, base, cross = points[key]
    n = 1
    ids = set(tree.vertex_ids)
    while f"C{n}" in ids:
        n += 1
    vid = f"C{n}"
    va, vb = tree.vertex(key[0]), tree.vertex(key[1])
    new_vertex = ResolutionVertex(
        id=vid,
        rate=mobius(Fraction(1)),
        self_intersection=-1,
        curvette_mult=va.curvette_mult + vb.curvette_mult,
        flags=frozenset(flags),
        recipe=CurvetteRecipe(prefix, va.recipe.coords if va.recipe else ("x", "y")),
    )
    vertices = tuple(
        replace(v, self_intersection=v.self_intersection - 1) if v.id in key else v
        for v in tree.vertices
    ) + (new_vertex,)
    edges = tuple(e for e in tree.edges if tuple(sorted(e)) != key)
    edges += (tuple(sorted((vid, key[0]))), tuple(sorted((vid, key[1]))))
    new_points = [
        (k, m, pref, b, c) for k, m, pref, b, c in tree.edge_points if k != key
    ]
    # the new intersection points inherit the blow-up chart maps
    new_points.append((tuple(sorted((vid, cross))), mobius.shifted(), prefix, vid, cross))
    new_points.append((tuple(sorted((vid, base))), mobius.inverted(), prefix, vid, base))
    out = replace(
        tree,
        vertices=vertices,
        edges=tuple(sorted(edges)),
        edge_points=tuple(sorted(new_points, key=lambda item: item[0])),
    )
    return _with_parents(out)


def separate_delta(tree: ResolutionTree) -> ResolutionTree:
    """Insert or choose separation nodes so no two delta-nodes touch.

    Every edge joining two delta-nodes is blown up (the new vertex is the
    separation node); every string of valency-two vertices joining two
    delta-nodes and containing neither a delta-node nor the root gets exactly
    one existing vertex flagged, chosen as the minimal-rate vertex with ties
    broken by vertex id.
    """
    while True:
        delta = {v.id for v in tree.vertices if v.has_flag("delta_node")}
        bad = [e for e in tree.edges if e[0] in delta and e[1] in delta]
        if not bad:
            break
        tree = _blow_edge_pure(tree, *bad[0], flags=frozenset({"separation_node"}))

    delta = {v.id for v in tree.vertices if v.has_flag("delta_node")}
    root = tree.root.id
    adj = tree.adjacency()
    flagged: set[str] = set()
    for a, b in itertools.combinations(sorted(delta), 2):
        path = _tree_path(adj, a, b)
        interior = path[1:-1]
        if not interior:
            continue
        if any(x in delta or x == root or tree.valency(x) != 2 for x in interior):
            continue
        if any(x in flagged for x in interior):
            continue
        if any(tree.vertex(x).has_flag("separation_node") for x in interior):
            continue
        pick = min(interior, key=lambda x: (tree.vertex(x).rate, x))
        flagged.add(pick)
    vertices = tuple(
        replace(v, flags=v.flags | {"separation_node"}) if v.id in flagged else v
        for v in tree.vertices
    )
    return replace(tree, vertices=vertices)


def _tree_path(adj: dict[str, list[str]], a: str, b: str) -> list[str]:
    prev = {a: None}
    queue = [a]
    while queue:
        x = queue.pop(0)
        if x == b:
            break
        for y in adj[x]:
            if y not in prev:
                prev[y] = x
                queue.append(y)
    if b not in prev:
        raise Disconnected(f"{a!r} and {b!r} not connected")
    path = [b]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def classify_nodes(tree: ResolutionTree) -> set[str]:
    """Nodes: the root, delta-nodes, separation nodes, and valency >= 3."""
    out = {tree.root.id}
    for v in tree.vertices:
        if v.has_flag("delta_node") or v.has_flag("separation_node"):
            out.add(v.id)
        elif tree.valency(v.id) >= 3:
            out.add(v.id)
    return out


def polar_rate(tree: ResolutionTree, delta_branch_id: str) -> Fraction:
    """Inner rate of the vertex where the delta branch attaches."""
    vid, _ = tree.attachment(delta_branch_id)
    v = tree.vertex(vid)
    if not v.has_flag("delta_node"):
        raise UnknownBranch(f"{delta_branch_id!r} is not a marked delta branch")
    return v.rate


def intersection_matrix(tree: ResolutionTree) -> list[list[int]]:
    ids = list(tree.vertex_ids)
    index = {v: i for i, v in enumerate(ids)}
    n = len(ids)
    m = [[0] * n for _ in range(n)]
    for i, vid in enumerate(ids):
        m[i][i] = tree.vertex(vid).self_intersection
    for a, b in tree.edges:
        m[index[a]][index[b]] += 1
        m[index[b]][index[a]] += 1
    return m


def is_negative_definite(matrix: Sequence[Sequence[int]]) -> bool:
    """Exact test: leading principal minors alternate in sign, starting negative."""
    n = len(matrix)
    a = [[Fraction(x) for x in row] for row in matrix]
    for k in range(n):
        minor = _det([row[: k + 1] for row in a[: k + 1]])
        if (-1) ** (k + 1) * minor <= 0:
            return False
    return True


def _det(m) -> Fraction:
    m = [row[:] for row in m]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        pivot = None
        for r in range(col, n):
            if m[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = Fraction(1) / m[col][col]
        for r in range(col + 1, n):
            factor = m[r][col] * inv
            if factor:
                for c in range(col, n):
                    m[r][c] -= factor * m[col][c]
    return det


def to_dot(tree: ResolutionTree, name: str = "resolution") -> str:
    """DOT export with byte-stable vertex ordering.

    Vertices are labeled "q=<rate> m=<mult> s=<selfint>"; strict-transform
    arrows appear as box-shaped terminal nodes, delta-nodes are
    double-circled and separation nodes diamond-shaped.
    """
    lines = [f"graph {name} {{"]
    for v in sorted(tree.vertices, key=lambda v: _vertex_sort_key(v.id)):
        shape = "circle"
        peripheries = ""
        if v.has_flag("separation_node"):
            shape = "diamond"
        if v.has_flag("delta_node"):
            peripheries = ", peripheries=2"
        label = f"q={v.rate} m={v.curvette_mult} s={v.self_intersection}"
        lines.append(f'  "{v.id}" [label="{label}", shape={shape}{peripheries}];')
    for a, b in sorted(tree.edges):
        lines.append(f'  "{a}" -- "{b}";')
    for bid, (vid, _) in sorted(tree.attachments):
        lines.append(f'  "arrow:{bid}" [label="{bid}", shape=box];')
        lines.append(f'  "{vid}" -- "arrow:{bid}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
