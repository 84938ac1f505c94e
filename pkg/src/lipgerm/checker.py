"""The nodal test-curve criterion: conditions (1*) and (2*) on a surface package.

Condition (1*) asks every principal lift of a nodal test curve to have the
same multiplicity as the test curve, i.e. covering degree one.  Condition
(2*) asks every pair of distinct principal lifts to have equal inner and
outer contact exponents.  Inner contacts are bottlenecks in the fiber graph;
outer contacts are either supplied as annotations or decided combinatorially
from Gauss classes, with the partner-pair reductions walking pairs from a
node to a better-behaved neighbor when the bottleneck sits elsewhere.

Failure always means the outer contact exceeds the inner one (distances obey
d_o <= d_i, hence exponents q_inn <= q_out).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence

from .rategraph import BottleneckResult, bottleneck, gauss_class_index
from .surface import LiftEntry, NotANode, SurfaceGerm, principal_components


class InvalidMode(ValueError):
    pass


class NonPrincipal(ValueError):
    pass


class FixtureInconsistent(ValueError):
    """Candidate partner pairs disagree; the package is not self-consistent."""


HOLDS = "holds"
FAILS = "fails"
UNDECIDED = "undecided"


@dataclass(frozen=True)
class PairVerdict:
    node: str
    components: tuple[str, str]
    q_inn: Fraction
    q_out: Fraction | str | None  # a value, or "equal"/"greater" symbolically
    status: str
    trace: tuple[str, ...]
    tags: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "node": self.node,
            "components": list(self.components),
            "q_inn": str(self.q_inn),
            "q_out": None if self.q_out is None else str(self.q_out),
            "status": self.status,
            "tags": list(self.tags),
            "trace": list(self.trace),
        }


@dataclass(frozen=True)
class LneVerdict:
    result: str  # LNE | NOT_LNE | UNDECIDED
    witnesses: tuple[dict, ...]
    pairs: tuple[PairVerdict, ...]

    def as_dict(self) -> dict:
        return {
            "result": self.result,
            "witnesses": list(self.witnesses),
            "pairs": [p.as_dict() for p in self.pairs],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


def pair_q_inn(surface: SurfaceGerm, fhat_v1, fhat_v2) -> BottleneckResult:
    """Inner contact of two fiber-graph positions: the fiber-graph bottleneck.

    Accepts single vertices or sequences of slice-arc vertices; for sequences
    the contact is the maximum over arc pairs, matching the real-slice
    description of inner contact between complex curves.
    """
    vs1 = (fhat_v1,) if isinstance(fhat_v1, str) else tuple(fhat_v1)
    vs2 = (fhat_v2,) if isinstance(fhat_v2, str) else tuple(fhat_v2)
    best: BottleneckResult | None = None
    for v1 in sorted(set(vs1)):
        for v2 in sorted(set(vs2)):
            r = bottleneck(surface.fhat_graph, v1, v2)
            if best is None or r.value > best.value:
                best = r
    assert best is not None
    return best


def q_inn_resolution(gtilde, v, v2) -> BottleneckResult:
    """Inner contact of two curves from a rate-weighted resolution graph.

    The graph must resolve both curves; v and v2 are the attachment vertices
    and the contact is the bottleneck between them (the rate of v itself when
    they coincide).
    """
    return bottleneck(gtilde, v, v2)


def check_condition1(surface: SurfaceGerm) -> list[dict]:
    """Degree-one check for every principal lift at every node."""
    out = []
    for node in sorted(surface.nodes(), key=lambda v: (len(v), v)):
        m_node = surface.tree.vertex(node).curvette_mult
        for e in principal_components(surface, node):
            if e.degree != 1:
                out.append(
                    {
                        "condition": "1*",
                        "node": node,
                        "component": e.component_id,
                        "detail": (
                            f"degree {e.degree}: lift multiplicity {e.mult_hat} != "
                            f"test-curve multiplicity {m_node}"
                        ),
                    }
                )
    return out


def _gauss_test(surface: SurfaceGerm, v1: str, v2: str, trace: list[str]) -> str:
    """Test (a): distinct Gauss classes decide the pair; P-nodes are opaque."""
    p_nodes = set(surface.fhat_graph.marked("P_node"))
    if v1 in p_nodes or v2 in p_nodes:
        trace.append(f"(a) at {v1},{v2}: P-node endpoint, Gauss value undefined")
        return UNDECIDED
    classes = gauss_class_index(surface.fhat_graph)
    if classes[v1] != classes[v2]:
        trace.append(f"(a) {v1} and {v2} in distinct Gauss classes: holds")
        return HOLDS
    trace.append(f"(a) {v1} and {v2} share a Gauss class: fails")
    return FAILS


def _lifted_string_ends(surface: SurfaceGerm, start: str, node: str, target: str) -> list[str]:
    """Endpoints over ``target`` of the lifted strings leaving ``start``.

    ``node`` and ``target`` are adjacent through a (possibly empty) string of
    non-node, valency-two tree vertices; the lifts of that string are walked
    vertex by vertex in the fiber graph.
    """
    tree = surface.tree
    adj = tree.adjacency()
    path = None
    nodes = surface.nodes()
    # the tree path from node to target must pass only through non-nodes
    from .resolution import _tree_path

    path = _tree_path(adj, node, target)
    if any(x in nodes for x in path[1:-1]):
        raise FixtureInconsistent(f"string from {node} to {target} passes a node")
    fh_adj = surface.fhat_graph.adjacency()
    frontier = [(start,)]
    for step in path[1:]:
        fiber = set(surface.fhat_fiber(step))
        nxt = []
        for walk in frontier:
            for y in fh_adj[walk[-1]]:
                if y in fiber and y not in walk:
                    nxt.append(walk + (y,))
        frontier = nxt
    return sorted({walk[-1] for walk in frontier})


def _adjacent_non_delta_node(surface: SurfaceGerm, node: str) -> str | None:
    """The non-delta node reached from a delta-node along an incident string."""
    tree = surface.tree
    nodes = surface.nodes()
    delta = {v.id for v in tree.vertices if v.has_flag("delta_node")}
    adj = tree.adjacency()
    candidates = []
    for nb in adj[node]:
        x, prev = nb, node
        while x not in nodes:
            nxts = [y for y in adj[x] if y != prev]
            if len(nxts) != 1:
                break
            prev, x = x, nxts[0]
        if x in nodes and x not in delta:
            candidates.append(x)
    if not candidates:
        return None
    return min(candidates, key=lambda v: (surface.tree.vertex(v).rate, v))


def _partner_candidates_over(surface: SurfaceGerm, fiber: set[str], v: str) -> list[str]:
    """Fiber vertices over a reduction target adjacent to v's component of the rest."""
    g = surface.fhat_graph
    adj = g.adjacency()
    rest = [x for x in g.vertices if x not in fiber]
    comp = {v}
    queue = [v]
    while queue:
        x = queue.pop(0)
        for y in adj[x]:
            if y not in fiber and y not in comp:
                comp.add(y)
                queue.append(y)
    return sorted({x for x in fiber if any(y in comp for y in adj[x])})


def check_pair_condition2(
    surface: SurfaceGerm,
    node: str,
    entry1: LiftEntry,
    entry2: LiftEntry,
    mode: str,
) -> PairVerdict:
    """Condition (2*) for one pair of principal lifts at a node.

    In annotated mode the declared outer contact is compared with the fiber
    bottleneck.  In gauss mode the pair is decided by Gauss classes, after
    the partner-pair reductions: (b) walks pairs at a delta-node to the
    adjacent non-delta node, (c) walks pairs whose bottleneck sits below the
    node down to the bottleneck vertex.
    """
    node = str(node)
    if mode not in ("annotated", "gauss"):
        raise InvalidMode(mode)
    principal = {e.component_id for e in principal_components(surface, node)}
    for e in (entry1, entry2):
        if e.component_id not in principal:
            raise NonPrincipal(f"{e.component_id!r} is not principal at {node!r}")
    if entry1.component_id == entry2.component_id:
        return PairVerdict(
            node, (entry1.component_id, entry2.component_id),
            surface.tree.vertex(node).rate, "equal", HOLDS,
            ("identical components: trivially equal contacts",),
        )

    ids = tuple(sorted((entry1.component_id, entry2.component_id)))
    best = None
    argmax = None
    for v1 in sorted(set(entry1.fhat_vertices)):
        for v2 in sorted(set(entry2.fhat_vertices)):
            r = bottleneck(surface.fhat_graph, v1, v2)
            if best is None or r.value > best.value:
                best, argmax = r, (v1, v2)
    q_inn = best.value
    nu1, nu2 = argmax
    trace = [f"q_inn = {q_inn} via arcs {nu1}, {nu2}; bottleneck vertex {best.min_vertex}"]

    if mode == "annotated":
        q = entry1.qout_for(entry2.component_id)
        if q is None:
            trace.append("no annotation for this pair")
            return PairVerdict(node, ids, q_inn, None, UNDECIDED, tuple(trace))
        if q == q_inn:
            return PairVerdict(node, ids, q_inn, q, HOLDS, tuple(trace))
        trace.append(f"annotated q_out {q} exceeds q_inn {q_inn}")
        return PairVerdict(node, ids, q_inn, q, FAILS, tuple(trace))

    node_rate = surface.tree.vertex(node).rate
    is_delta = surface.tree.vertex(node).has_flag("delta_node")
    tags = ()

    def finish(status: str, q_out=None) -> PairVerdict:
        nonlocal tags
        if status == FAILS and is_delta:
            tags = ("delta_node_informative",)
        if status == FAILS and q_out is None:
            q_out = "greater"
        if status == HOLDS and q_out is None:
            q_out = "equal"
        return PairVerdict(node, ids, q_inn, q_out, status, tuple(trace), tags)

    if q_inn == node_rate and not is_delta:
        return finish(_gauss_test(surface, nu1, nu2, trace))

    if q_inn == node_rate and is_delta:
        target = _adjacent_non_delta_node(surface, node)
        if target is None:
            trace.append(f"(b) no adjacent non-delta node at {node}")
            return finish(UNDECIDED)
        trace.append(f"(b) delta-node {node}: moving pair to partner vertices over {target}")
        cand1 = _lifted_string_ends(surface, nu1, node, target)
        cand2 = _lifted_string_ends(surface, nu2, node, target)
        if nu1 == nu2:
            pairs = [tuple(sorted(p)) for p in itertools.combinations(cand1, 2)]
        else:
            pairs = sorted({tuple(sorted((p, q))) for p in cand1 for q in cand2})
        if not pairs:
            trace.append("(b) no candidate partner pairs found")
            return finish(UNDECIDED)
        statuses = set()
        for p, q in pairs:
            trace.append(f"(b) candidate partner pair ({p}, {q})")
            statuses.add(_gauss_test(surface, p, q, trace))
        return finish(_aggregate(statuses, trace))

    # q_inn < node rate: reduce to the bottleneck node j0
    nu0 = best.min_vertex
    j0 = surface.node_image(nu0)
    trace.append(f"(c) bottleneck below node: reducing to {j0} via vertex {nu0}")
    fiber = set(surface.fhat_fiber(j0))
    cand1 = _partner_candidates_over(surface, fiber, nu1)
    cand2 = _partner_candidates_over(surface, fiber, nu2)
    p_nodes = set(surface.fhat_graph.marked("P_node"))
    if cand1 == cand2 and len(cand1) == 1:
        v0 = cand1[0]
        if v0 not in p_nodes:
            trace.append(f"(c) both components meet the single vertex {v0}: same Gauss value")
            return finish(FAILS)
        trace.append(f"(c) single shared vertex {v0} is a P-node")
        return finish(UNDECIDED)
    j0_is_delta = surface.tree.vertex(j0).has_flag("delta_node")
    statuses = set()
    for p in cand1:
        for q in cand2:
            if p == q:
                if p in p_nodes:
                    trace.append(f"(c) partners coincide at P-node {p}")
                    statuses.add(UNDECIDED)
                else:
                    trace.append(f"(c) partners coincide at {p}: same Gauss value")
                    statuses.add(FAILS)
            elif not j0_is_delta:
                statuses.add(_gauss_test(surface, p, q, trace))
            else:
                target = _adjacent_non_delta_node(surface, j0)
                if target is None:
                    statuses.add(UNDECIDED)
                    continue
                trace.append(f"(b) at {j0}: partners over {target}")
                ends1 = _lifted_string_ends(surface, p, j0, target)
                ends2 = _lifted_string_ends(surface, q, j0, target)
                sub = sorted({tuple(sorted((a, b))) for a in ends1 for b in ends2})
                for a, b in sub:
                    statuses.add(_gauss_test(surface, a, b, trace))
    return finish(_aggregate(statuses, trace))


def _aggregate(statuses: set, trace: list[str]) -> str:
    if statuses == {HOLDS}:
        return HOLDS
    if statuses == {FAILS}:
        return FAILS
    if HOLDS in statuses and FAILS in statuses:
        raise FixtureInconsistent(
            "candidate partner pairs disagree: " + "; ".join(trace)
        )
    return UNDECIDED


def check_lne(
    surface: SurfaceGerm,
    mode: str = "gauss",
    strict_theorem: bool = False,
) -> LneVerdict:
    """Evaluate the test-curve criterion over all nodes and principal pairs.

    NOT_LNE as soon as (1*) is violated or a pair fails (2*); UNDECIDED when
    nothing fails but some pair cannot be decided; otherwise LNE.  With
    ``strict_theorem`` the informative (2*) failures at delta-nodes are
    excluded from the verdict, matching the remark that (2*) is not needed
    for test curves at delta-nodes.
    """
    if mode not in ("annotated", "gauss"):
        raise InvalidMode(mode)
    witnesses: list[dict] = []
    pairs: list[PairVerdict] = []
    for violation in check_condition1(surface):
        witnesses.append(violation)
    for node in sorted(surface.nodes(), key=lambda v: (len(v), v)):
        entries = sorted(principal_components(surface, node), key=lambda e: e.component_id)
        for e1, e2 in itertools.combinations(entries, 2):
            verdict = check_pair_condition2(surface, node, e1, e2, mode)
            pairs.append(verdict)
            if verdict.status == FAILS:
                ignored = strict_theorem and "delta_node_informative" in verdict.tags
                if not ignored:
                    witnesses.append(
                        {
                            "condition": "2*",
                            "node": node,
                            "components": list(verdict.components),
                            "detail": f"q_inn {verdict.q_inn} < q_out {verdict.q_out}",
                        }
                    )
    if witnesses:
        return LneVerdict("NOT_LNE", tuple(witnesses), tuple(pairs))
    undecided = [p for p in pairs if p.status == UNDECIDED]
    if undecided:
        details = tuple(
            {
                "condition": "2*",
                "node": p.node,
                "components": list(p.components),
                "detail": "undecided",
            }
            for p in undecided
        )
        return LneVerdict("UNDECIDED", details, tuple(pairs))
    return LneVerdict("LNE", (), tuple(pairs))


def cross_check_modes(surface: SurfaceGerm) -> list[str]:
    """Where both an annotation and a gauss decision exist, they must agree."""
    out = []
    for node in sorted(surface.nodes(), key=lambda v: (len(v), v)):
        entries = sorted(principal_components(surface, node), key=lambda e: e.component_id)
        for e1, e2 in itertools.combinations(entries, 2):
            annotated = check_pair_condition2(surface, node, e1, e2, "annotated")
            if annotated.status == UNDECIDED:
                continue
            gauss = check_pair_condition2(surface, node, e1, e2, "gauss")
            if gauss.status == UNDECIDED:
                continue
            if annotated.status != gauss.status:
                out.append(
                    f"modes disagree at {node} on ({e1.component_id}, {e2.component_id}): "
                    f"annotated {annotated.status}, gauss {gauss.status}"
                )
    return out
