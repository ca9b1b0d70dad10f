"""Graphs of groups with finite edge groups.

Vertex and edge groups enter only through their orders; an edge inclusion is
recorded by its index in the target vertex group, which is all that trivial
edges, the elementary shapes, Bass-Serre ball degrees, and the boundary
formula depend on.  Infinite vertex groups additionally carry a symbolic
boundary expression.

An oriented edge is a pair (edge slot, head end); `bar` flips the head.  The
index of an oriented edge a is order(head(a)) / edge_order, infinite exactly
when the head vertex group is infinite.
"""

import json
import math
from dataclasses import dataclass, field

from .boundary import (
    Amalgam,
    BoundaryExpr,
    EMPTY,
    ExprSyntaxError,
    format_expr,
    normalize,
    parse_expr,
)

INF = math.inf

_BALL_RADIUS_CAP = 12


class GogParseError(ValueError):
    """Structured error for malformed graph-of-groups documents."""

    def __init__(self, message, location=None):
        self.location = location
        super().__init__(message if location is None else f"{message} (at {location})")


def _valid_order(order) -> bool:
    if order == INF:
        return True
    return isinstance(order, int) and not isinstance(order, bool) and order >= 1


@dataclass(frozen=True)
class GroupDescriptor:
    """A vertex group: its order and, when infinite, its boundary expression."""

    order: object
    boundary: BoundaryExpr = EMPTY

    def __post_init__(self):
        if not _valid_order(self.order):
            raise ValueError(f"group order must be a positive integer or infinity, "
                             f"got {self.order!r}")
        if self.order != INF and self.boundary != EMPTY:
            raise ValueError("finite groups have empty boundary")

    @property
    def is_finite(self) -> bool:
        return self.order != INF


@dataclass(frozen=True)
class OrientedEdge:
    """Edge slot `edge` oriented so that ends[to_end] is the head."""

    edge: int
    to_end: int  # 0 or 1


class GraphOfGroups:
    """Connected graph with group orders on vertices and edges.

    vertex_groups: mapping vertex name -> GroupDescriptor (order preserved);
    edges: sequence of (end, end, edge_order) triples, loops allowed.
    """

    def __init__(self, vertex_groups, edges):
        if not vertex_groups:
            raise ValueError("at least one vertex is required")
        self.vertex_groups = dict(vertex_groups)
        self.vertices = tuple(self.vertex_groups)
        for name, desc in self.vertex_groups.items():
            if not isinstance(desc, GroupDescriptor):
                raise ValueError(f"vertex {name!r} needs a GroupDescriptor")
        parsed = []
        for pos, edge in enumerate(edges):
            v, w, order = edge
            for end in (v, w):
                if end not in self.vertex_groups:
                    raise ValueError(f"edge {pos} end {end!r} is not a vertex")
            if not (isinstance(order, int) and not isinstance(order, bool)
                    and order >= 1):
                raise ValueError(f"edge {pos} order must be a positive integer, "
                                 f"got {order!r}")
            for end in (v, w):
                vertex_order = self.vertex_groups[end].order
                if vertex_order != INF and vertex_order % order != 0:
                    raise ValueError(
                        f"edge {pos} order {order} does not divide the order "
                        f"{vertex_order} of vertex {end!r}")
            parsed.append((v, w, order))
        self.edges = tuple(parsed)
        self._check_connected()

    def _check_connected(self):
        seen = {self.vertices[0]}
        frontier = [self.vertices[0]]
        while frontier:
            v = frontier.pop()
            for a, b, _ in self.edges:
                for x, y in ((a, b), (b, a)):
                    if x == v and y not in seen:
                        seen.add(y)
                        frontier.append(y)
        if seen != set(self.vertices):
            missing = sorted(set(self.vertices) - seen)
            raise ValueError(f"graph is not connected; unreachable: {missing}")

    # -- oriented edge helpers ----------------------------------------------
    def oriented_edges(self):
        return [OrientedEdge(e, s) for e in range(len(self.edges)) for s in (0, 1)]

    def head(self, a: OrientedEdge):
        return self.edges[a.edge][a.to_end]

    def tail(self, a: OrientedEdge):
        return self.edges[a.edge][1 - a.to_end]

    def bar(self, a: OrientedEdge) -> OrientedEdge:
        return OrientedEdge(a.edge, 1 - a.to_end)

    def edge_order(self, a) -> int:
        e = a.edge if isinstance(a, OrientedEdge) else a
        return self.edges[e][2]

    def index(self, a: OrientedEdge):
        """Index of the edge group in the head vertex group."""
        head_order = self.vertex_groups[self.head(a)].order
        if head_order == INF:
            return INF
        return head_order // self.edge_order(a)

    def is_loop(self, e: int) -> bool:
        v, w, _ = self.edges[e]
        return v == w

    def degree(self, vertex) -> object:
        """Bass-Serre tree degree of any tree vertex over `vertex`."""
        total = 0
        for a in self.oriented_edges():
            if self.head(a) == vertex:
                idx = self.index(a)
                if idx == INF:
                    return INF
                total += idx
        return total

    def __eq__(self, other):
        if not isinstance(other, GraphOfGroups):
            return NotImplemented
        if self.vertex_groups != other.vertex_groups:
            return False
        canon = lambda g: sorted((tuple(sorted((v, w))), o) for v, w, o in g.edges)
        return canon(self) == canon(other)

    def __repr__(self):
        return (f"GraphOfGroups(vertices={list(self.vertices)!r}, "
                f"edges={list(self.edges)!r})")


# ---------------------------------------------------------------------------
# Reduction by elementary collapses.

def trivial_edges(g: GraphOfGroups):
    """Collapsible edges: non-loops whose inclusion into one end is onto.

    Returns one oriented edge per collapsible slot, oriented so that the head
    is the absorbed end (index 1); ordered by sorted end names then slot.
    """
    found = []
    for e in range(len(g.edges)):
        if g.is_loop(e):
            continue
        for s in (0, 1):
            a = OrientedEdge(e, s)
            if g.index(a) == 1:
                found.append(a)
                break
    found.sort(key=lambda a: (tuple(sorted(g.edges[a.edge][:2])), a.edge))
    return found


def elementary_collapse(g: GraphOfGroups, e) -> GraphOfGroups:
    """Contract a trivial edge; the surviving vertex keeps the tail's group."""
    if isinstance(e, OrientedEdge):
        a = e
        if g.is_loop(a.edge):
            raise ValueError("cannot collapse a loop")
        if g.index(a) != 1:
            raise ValueError("edge is not trivial in this orientation")
    else:
        matches = [t for t in trivial_edges(g) if t.edge == e]
        if not matches:
            raise ValueError(f"edge {e} is not trivial")
        a = matches[0]
    absorbed = g.head(a)
    survivor = g.tail(a)
    vertex_groups = {name: desc for name, desc in g.vertex_groups.items()
                     if name != absorbed}
    edges = []
    for pos, (v, w, order) in enumerate(g.edges):
        if pos == a.edge:
            continue
        v = survivor if v == absorbed else v
        w = survivor if w == absorbed else w
        edges.append((v, w, order))
    return GraphOfGroups(vertex_groups, edges)


def reduce(g: GraphOfGroups, rng=None) -> GraphOfGroups:
    """Collapse trivial edges until none remain.

    Deterministic order (first trivial edge) unless rng picks one at random;
    the reduced isomorphism type does not depend on the order.
    """
    while True:
        trivial = trivial_edges(g)
        if not trivial:
            return g
        choice = trivial[rng.randrange(len(trivial))] if rng is not None else trivial[0]
        g = elementary_collapse(g, choice)


def is_non_elementary(g: GraphOfGroups) -> bool:
    """False exactly when the reduced graph is one of the small shapes:
    a lone vertex, a loop with both inclusions onto, or an edge with both
    indices 2."""
    r = reduce(g)
    if len(r.vertices) == 1 and not r.edges:
        return False
    if len(r.vertices) == 1 and len(r.edges) == 1 and r.is_loop(0):
        if r.index(OrientedEdge(0, 0)) == 1 and r.index(OrientedEdge(0, 1)) == 1:
            return False
    if len(r.vertices) == 2 and len(r.edges) == 1 and not r.is_loop(0):
        if r.index(OrientedEdge(0, 0)) == 2 and r.index(OrientedEdge(0, 1)) == 2:
            return False
    return True


# ---------------------------------------------------------------------------
# Bass-Serre balls.

@dataclass(frozen=True)
class BallNode:
    id: int
    label: str
    depth: int
    parent: object  # parent node id or None
    entry: object   # OrientedEdge family occupied at this node toward parent


class BassSerreBall:
    """Finite-radius ball of the Bass-Serre tree, with truncation markers.

    `unexplored` lists node ids whose further neighbours were cut off by the
    radius; separation checks treat their hidden subtrees as unknown rather
    than absent.
    """

    def __init__(self, graph, base, radius, nodes, children, unexplored):
        self.graph = graph
        self.base = base
        self.radius = radius
        self.nodes = tuple(nodes)
        self.children = {k: tuple(v) for k, v in children.items()}
        self.unexplored = frozenset(unexplored)

    def size(self) -> int:
        return len(self.nodes)

    def counts_by_depth(self):
        counts = [0] * (self.radius + 1)
        for node in self.nodes:
            counts[node.depth] += 1
        return counts

    def subtree_ids(self, node_id):
        out = [node_id]
        stack = [node_id]
        while stack:
            for child in self.children.get(stack.pop(), ()):
                out.append(child)
                stack.append(child)
        return frozenset(out)

    def to_dot(self) -> str:
        lines = ["graph ball {"]
        for node in self.nodes:
            shape = ', style=dashed' if node.id in self.unexplored else ''
            lines.append(f'  n{node.id} [label="{node.label}"{shape}];')
        for node in self.nodes:
            if node.parent is not None:
                lines.append(f"  n{node.parent} -- n{node.id};")
        lines.append("}")
        return "\n".join(lines)


def bass_serre_ball(g: GraphOfGroups, base, radius: int,
                    cap: int = _BALL_RADIUS_CAP) -> BassSerreBall:
    """Breadth-first ball of the Bass-Serre tree around a vertex over `base`.

    Children of a node over v come in families, one per oriented edge with
    head v, with index(a) members each; the family through which the node was
    entered has one member fewer.
    """
    if base not in g.vertex_groups:
        raise ValueError(f"unknown base vertex {base!r}")
    if not isinstance(radius, int) or radius < 0:
        raise ValueError("radius must be a non-negative integer")
    if radius > cap:
        raise ValueError(f"radius {radius} exceeds cap {cap}")
    for name in g.vertices:
        if g.vertex_groups[name].order == INF:
            raise ValueError(f"tree not locally finite at {name}")

    families = {v: [a for a in g.oriented_edges() if g.head(a) == v]
                for v in g.vertices}
    nodes = [BallNode(0, base, 0, None, None)]
    children = {0: []}
    unexplored = []
    frontier = [nodes[0]]
    while frontier:
        node = frontier.pop(0)
        if node.depth == radius:
            remaining = g.degree(node.label) - (0 if node.parent is None else 1)
            if remaining > 0:
                unexplored.append(node.id)
            continue
        for a in families[node.label]:
            count = g.index(a) - (1 if a == node.entry else 0)
            for _ in range(count):
                child = BallNode(len(nodes), g.tail(a), node.depth + 1,
                                 node.id, g.bar(a))
                nodes.append(child)
                children[node.id].append(child.id)
                children[child.id] = []
                frontier.append(child)
    return BassSerreBall(g, base, radius, nodes, children, unexplored)


def check_separation(ball: BassSerreBall, g: GraphOfGroups) -> dict:
    """Truncation-aware evidence for the two tree separation properties.

    (1) every tree edge splits the tree into two halves each containing
    lifts of every vertex; (2) some tree vertex splits it into at least
    three unbounded pieces.  Sides cut off by the radius report
    'inconclusive' rather than 'fail'.
    """
    labels = set(g.vertices)
    all_ids = frozenset(node.id for node in ball.nodes)
    by_id = {node.id: node for node in ball.nodes}

    def side_verdict(ids):
        present = {by_id[i].label for i in ids}
        if present >= labels:
            return "pass"
        if any(i in ball.unexplored for i in ids):
            return "inconclusive"
        return "fail"

    edge_checks = []
    for node in ball.nodes:
        if node.parent is None:
            continue
        inside = ball.subtree_ids(node.id)
        outside = all_ids - inside
        v1, v2 = side_verdict(inside), side_verdict(outside)
        verdict = ("fail" if "fail" in (v1, v2)
                   else "inconclusive" if "inconclusive" in (v1, v2) else "pass")
        edge_checks.append({"edge": [node.parent, node.id],
                            "subtree": v1, "rest": v2, "verdict": verdict})
    if any(c["verdict"] == "fail" for c in edge_checks):
        edge_overall = "fail"
    elif not edge_checks or any(c["verdict"] == "inconclusive" for c in edge_checks):
        edge_overall = "inconclusive"
    else:
        edge_overall = "pass"

    def reaches_truncation(ids):
        return any(i in ball.unexplored for i in ids)

    three_way_nodes = []
    for node in ball.nodes:
        pieces = [ball.subtree_ids(c) for c in ball.children[node.id]]
        if node.parent is not None:
            pieces.append(all_ids - ball.subtree_ids(node.id))
        unbounded = sum(1 for piece in pieces if reaches_truncation(piece))
        if unbounded >= 3:
            three_way_nodes.append(node.id)
    if three_way_nodes:
        three_way = "pass"
    elif all(g.degree(v) <= 2 for v in g.vertices):
        three_way = "fail"
    else:
        three_way = "inconclusive"
    return {
        "edge_checks": edge_checks,
        "edge_overall": edge_overall,
        "three_way_nodes": three_way_nodes,
        "three_way": three_way,
    }


# ---------------------------------------------------------------------------
# Boundary of the fundamental group.

def boundary_expression(g: GraphOfGroups) -> BoundaryExpr:
    """Normalized dense amalgam of the vertex group boundaries.

    Finite vertices contribute empty boundaries, so an all-finite graph
    yields the Cantor set.  Requires a non-elementary graph.
    """
    if not is_non_elementary(g):
        raise ValueError(
            "graph of groups is elementary (its reduced form is a lone "
            "vertex, a loop with both inclusions onto, or a single edge "
            "with both indices 2); the dense-amalgam boundary formula "
            "applies only to non-elementary graphs")
    args = tuple(g.vertex_groups[v].boundary for v in g.vertices)
    return normalize(Amalgam(args))


# ---------------------------------------------------------------------------
# JSON round trip.

def from_json(text: str) -> GraphOfGroups:
    """Parse {"vertices": {name: {"order": n|"inf", "boundary": expr}},
    "edges": [{"ends": [v, w], "edge_order": n}]}."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GogParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise GogParseError("document must be a JSON object")
    for key in ("vertices", "edges"):
        if key not in doc:
            raise GogParseError(f"missing key {key!r}")
    if not isinstance(doc["vertices"], dict) or not doc["vertices"]:
        raise GogParseError("'vertices' must be a nonempty object")
    vertex_groups = {}
    for name, body in doc["vertices"].items():
        if not isinstance(body, dict) or "order" not in body:
            raise GogParseError("vertex needs an 'order'", location=name)
        order = body["order"]
        if order == "inf":
            order = INF
        if not _valid_order(order):
            raise GogParseError(
                f"order must be a positive integer or \"inf\", got {order!r}",
                location=name)
        boundary_text = body.get("boundary")
        if order == INF:
            if boundary_text is None:
                raise GogParseError(
                    "infinite vertex group needs a 'boundary' expression",
                    location=name)
            try:
                boundary = parse_expr(boundary_text)
            except ExprSyntaxError as exc:
                raise GogParseError(f"bad boundary expression: {exc}",
                                    location=name) from exc
        else:
            boundary = EMPTY
            if boundary_text is not None and parse_expr(boundary_text) != EMPTY:
                raise GogParseError("finite vertex group must have empty boundary",
                                    location=name)
        try:
            vertex_groups[name] = GroupDescriptor(order, boundary)
        except ValueError as exc:
            raise GogParseError(str(exc), location=name) from exc
    if not isinstance(doc["edges"], list):
        raise GogParseError("'edges' must be a list")
    edges = []
    for pos, body in enumerate(doc["edges"]):
        if (not isinstance(body, dict) or "ends" not in body
                or "edge_order" not in body):
            raise GogParseError("edge needs 'ends' and 'edge_order'",
                                location=f"edge {pos}")
        ends = body["ends"]
        if not isinstance(ends, list) or len(ends) != 2:
            raise GogParseError("'ends' must list two vertices",
                                location=f"edge {pos}")
        edges.append((ends[0], ends[1], body["edge_order"]))
    try:
        return GraphOfGroups(vertex_groups, edges)
    except ValueError as exc:
        raise GogParseError(str(exc)) from exc


def to_json(g: GraphOfGroups) -> str:
    vertices = {}
    for name, desc in g.vertex_groups.items():
        body = {"order": "inf" if desc.order == INF else desc.order}
        if desc.order == INF:
            body["boundary"] = format_expr(desc.boundary)
        vertices[name] = body
    doc = {
        "vertices": vertices,
        "edges": [{"ends": [v, w], "edge_order": order}
                  for v, w, order in g.edges],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
