"""Finite metric approximations of a dense amalgam of compact spaces.

The construction places a scaled copy of the disjoint union of the input
spaces at every vertex of a truncated b-ary tree, extends each copy by
peripheral points (one per incident tree edge slot), glues copies along
tree edges at matching peripheral points, removes the glued points, and
adds one synthetic end point per leaf at the leaf's deepest unused slot.
Distances are the shortest-path closure through the gluing points.

Every glued point is a cut point between the two sides of its tree edge,
so distances inside a single copy are never shortened: each copy embeds
isometrically at its scale, which is what the condition checks rely on.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import floyd_warshall
from .metric import (
    FiniteMetricSpace,
    disjoint_union,
    read_matrix_csv,
    write_matrix_csv,
)

ROOT = "t"

_EXACT_SLACK = 1e-12


# ---------------------------------------------------------------------------
# Peripheral extensions.

@dataclass(frozen=True)
class PeripheralModel:
    """A base space plus outward points at prescribed radii from anchors.

    Peripheral point j sits at distance radius_j + d(anchor_j, x) from every
    base point x, and radius_j + radius_l + d(anchor_j, anchor_l) from
    peripheral point l; both formulas keep the triangle inequality exactly.
    """

    base: FiniteMetricSpace
    peripheral: tuple  # of (anchor point, radius)

    def __post_init__(self):
        nb = len(self.base.points)
        last_radius = {}
        for j, (anchor, radius) in enumerate(self.peripheral):
            if anchor != self.base.points[j % nb]:
                raise ValueError("anchors must cycle through the base points in order")
            if not radius > 0:
                raise ValueError("peripheral radii must be positive")
            if anchor in last_radius and not radius < last_radius[anchor]:
                raise ValueError("radii must strictly decrease along each anchor cycle")
            last_radius[anchor] = radius

    def point_names(self):
        return [("p", j + 1) for j in range(len(self.peripheral))]

    def as_space(self) -> FiniteMetricSpace:
        """Base points followed by peripheral points ("p", 1), ("p", 2), ..."""
        nb = len(self.base.points)
        n = nb + len(self.peripheral)
        mat = np.zeros((n, n))
        mat[:nb, :nb] = self.base.dist
        anchor_idx = [self.base.index[a] for a, _ in self.peripheral]
        radii = [r for _, r in self.peripheral]
        for j, (ai, rj) in enumerate(zip(anchor_idx, radii)):
            row = rj + self.base.dist[ai, :]
            mat[nb + j, :nb] = row
            mat[:nb, nb + j] = row
            for l in range(j):
                v = rj + radii[l] + self.base.dist[ai, anchor_idx[l]]
                mat[nb + j, nb + l] = v
                mat[nb + l, nb + j] = v
        return FiniteMetricSpace(
            list(self.base.points) + self.point_names(), mat, _check=False)


def peripheral_extension(x: FiniteMetricSpace, n: int, r0: float,
                         mu: float) -> PeripheralModel:
    """n peripheral points, anchors cycling the base points in order,
    radius r0 * mu^ceil(j / |base|) for the j-th point (1-based)."""
    if not isinstance(n, int) or n < 0:
        raise ValueError("n must be a non-negative integer")
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    if not 0 < mu < 1:
        raise ValueError("mu must lie in (0, 1)")
    nb = len(x.points)
    peripheral = tuple(
        (x.points[(j - 1) % nb], r0 * mu ** math.ceil(j / nb))
        for j in range(1, n + 1))
    return PeripheralModel(x, peripheral)


# ---------------------------------------------------------------------------
# The approximation object.

class AmalgamApprox:
    """Finite approximation: tree, per-vertex scaled copies, glued metric.

    labels maps every final point to {"kind": "copy", "tree_vertex", "class",
    "source_point"} or {"kind": "end", "leaf"}; ends maps each leaf to its
    end point's name.
    """

    def __init__(self, *, source_spaces, depth, branching, scale, r0, mu,
                 tree_parent, space, labels, ends):
        self.source_spaces = list(source_spaces)
        self.depth = depth
        self.branching = branching
        self.scale = scale
        self.r0 = r0
        self.mu = mu
        self.tree_parent = dict(tree_parent)
        self.space = space
        self.labels = dict(labels)
        self.ends = dict(ends)

        self.vertices = tuple(sorted(self.tree_parent, key=_vertex_sort_key))
        self.tree_children = {v: [] for v in self.vertices}
        for v, parent in self.tree_parent.items():
            if parent is not None:
                self.tree_children[parent].append(v)
        for v in self.tree_children:
            self.tree_children[v].sort(key=_vertex_sort_key)

        self._class_points = {}
        self._copy_points = {v: [] for v in self.vertices}
        for name, label in self.labels.items():
            if label["kind"] == "copy":
                key = (label["tree_vertex"], label["class"])
                self._class_points.setdefault(key, []).append(name)
        # recover source order inside each labelled subset
        for (v, ci), names in self._class_points.items():
            order = {p: i for i, p in enumerate(self.source_spaces[ci].points)}
            names.sort(key=lambda nm: order[self.labels[nm]["source_point"]])
        for v in self.vertices:
            for ci in range(len(self.source_spaces)):
                self._copy_points[v].extend(self._class_points.get((v, ci), []))

    # -- tree helpers --------------------------------------------------------
    def vertex_depth(self, t) -> int:
        return t.count(".")

    def children(self, t):
        return tuple(self.tree_children[t])

    def is_leaf(self, t) -> bool:
        return not self.tree_children[t]

    def edges(self):
        return [(self.tree_parent[v], v) for v in self.vertices
                if self.tree_parent[v] is not None]

    def subtree(self, t):
        out = [t]
        stack = [t]
        while stack:
            for c in self.tree_children[stack.pop()]:
                out.append(c)
                stack.append(c)
        return out

    # -- point bookkeeping ---------------------------------------------------
    def copy_points(self, t):
        if t not in self.tree_parent:
            raise ValueError(f"unknown tree vertex {t!r}")
        return list(self._copy_points[t])

    def class_points(self, t, ci):
        return list(self._class_points.get((t, ci), []))

    def subtree_points(self, t):
        pts = set()
        for s in self.subtree(t):
            pts.update(self._copy_points[s])
            if s in self.ends:
                pts.add(self.ends[s])
        return pts

    def all_points(self):
        return set(self.space.points)

    def slot_tokens(self, t):
        """Selectable directions of copy t's extended model."""
        tokens = []
        if self.tree_parent[t] is not None:
            tokens.append("slot:parent")
        tokens.extend(f"slot:child:{i}" for i in range(len(self.tree_children[t])))
        if self.is_leaf(t):
            tokens.append("slot:end")
        return tokens

    def model_selection(self, t):
        """The whole of copy t's model: its points plus every slot token."""
        return self.copy_points(t) + self.slot_tokens(t)

    def point_depth(self, name) -> int:
        label = self.labels[name]
        t = label["tree_vertex"] if label["kind"] == "copy" else label["leaf"]
        return self.vertex_depth(t)

    def location(self, name) -> str:
        label = self.labels[name]
        return label["tree_vertex"] if label["kind"] == "copy" else label["leaf"]


def _vertex_sort_key(v):
    parts = v.split(".")
    return (len(parts),) + tuple(int(p) for p in parts[1:])


# ---------------------------------------------------------------------------
# Construction.

def build_approx(xs, depth: int, branching: int, scale: float,
                 *, _skip_scale_check=False) -> AmalgamApprox:
    """Assemble the glued tree of scaled copies and close the metric.

    scale is the per-level shrink factor lambda in (0, 1/2]; the test hook
    _skip_scale_check admits out-of-range values so checks can be shown to
    fail on them.
    """
    xs = list(xs)
    if not xs:
        raise ValueError("need at least one source space")
    for x in xs:
        for p in x.points:
            if not isinstance(p, str) or "|" in p or not p:
                raise ValueError(
                    "source space points must be nonempty strings without '|'")
    if not isinstance(depth, int) or depth < 0:
        raise ValueError("depth must be a non-negative integer")
    if not isinstance(branching, int) or branching < 1:
        raise ValueError("branching must be a positive integer")
    if not _skip_scale_check and not 0 < scale <= 0.5:
        raise ValueError("scale must lie in (0, 1/2]")

    union = disjoint_union(xs)
    diam = union.diam()
    r0 = diam / 2 if diam > 0 else 0.5
    mu = 0.5

    # truncated branching-ary tree, root "t", children "<v>.<i>"
    tree_parent = {ROOT: None}
    order = [ROOT]
    frontier = [ROOT]
    for _ in range(depth):
        nxt = []
        for v in frontier:
            for i in range(branching):
                c = f"{v}.{i}"
                tree_parent[c] = v
                order.append(c)
                nxt.append(c)
        frontier = nxt

    def n_slots(t):
        return branching if t == ROOT else branching + 1

    def slot_toward_child(t, i):
        # 1-based slot position in the peripheral list
        return i + 1 if t == ROOT else i + 2

    copies = {}
    for t in order:
        j = t.count(".")
        scaled = FiniteMetricSpace(union.points, scale ** j * union.dist,
                                   _check=False)
        copies[t] = peripheral_extension(scaled, n_slots(t), r0 * scale ** j, mu)
        # internal sizing: one slot per incident edge plus the spare for ends
        assert len(copies[t].peripheral) == n_slots(t)

    # scaffold: every copy's extended model, infinite across copies
    scaffold = []
    index = {}
    for t in order:
        for ci, p in union.points:
            index[("b", t, ci, p)] = len(scaffold)
            scaffold.append(("b", t, ci, p))
        for s in range(1, n_slots(t) + 1):
            index[("s", t, s)] = len(scaffold)
            scaffold.append(("s", t, s))
    n = len(scaffold)
    big = np.full((n, n), np.inf)
    np.fill_diagonal(big, 0.0)
    for t in order:
        model = copies[t].as_space()
        base = index[("b", t) + union.points[0]]
        big[base:base + len(model), base:base + len(model)] = model.dist
    for t in order:
        for i in range(branching):
            c = f"{t}.{i}"
            if c not in tree_parent:
                break
            p = index[("s", t, slot_toward_child(t, i))]
            q = index[("s", c, 1)]
            big[p, q] = big[q, p] = 0.0

    closed = floyd_warshall(big)

    # keep copy base points and one end per leaf (its deepest slot)
    kept = []
    names = []
    labels = {}
    ends = {}
    for t in order:
        for ci, p in union.points:
            kept.append(index[("b", t, ci, p)])
            name = f"{t}|{ci}|{p}"
            names.append(name)
            labels[name] = {"kind": "copy", "tree_vertex": t, "class": ci,
                            "source_point": p}
    for t in order:
        if any(f"{t}.{i}" in tree_parent for i in range(branching)):
            continue
        kept.append(index[("s", t, n_slots(t))])
        name = f"end|{t}"
        names.append(name)
        labels[name] = {"kind": "end", "leaf": t}
        ends[t] = name

    final = closed[np.ix_(kept, kept)]
    assert np.all(np.isfinite(final)), "tree gluing left the space disconnected"
    assert float((final + np.eye(len(kept))).min()) > 0, \
        "gluing collapsed two surviving points"
    space = FiniteMetricSpace(names, final, _check=False)
    return AmalgamApprox(source_spaces=xs, depth=depth, branching=branching,
                         scale=scale, r0=r0, mu=mu, tree_parent=tree_parent,
                         space=space, labels=labels, ends=ends)


# ---------------------------------------------------------------------------
# Basis sets and half-spaces.

def basic_open_set(a: AmalgamApprox, t, u) -> set:
    """Points selected by u, a subset of copy t's points and slot tokens.

    Copy points select themselves; the parent slot selects everything
    outside t's subtree; a child slot selects that child's whole subtree
    (ends included); a leaf's end slot selects its end point.
    """
    if t not in a.tree_parent:
        raise ValueError(f"unknown tree vertex {t!r}")
    copy_pts = set(a.copy_points(t))
    valid_tokens = set(a.slot_tokens(t))
    out = set()
    for member in u:
        if member in copy_pts:
            out.add(member)
        elif member in valid_tokens:
            if member == "slot:parent":
                out |= a.all_points() - a.subtree_points(t)
            elif member == "slot:end":
                out.add(a.ends[t])
            else:
                i = int(member.rsplit(":", 1)[1])
                out |= a.subtree_points(a.children(t)[i])
        else:
            raise ValueError(f"{member!r} is not a point or slot of copy {t!r}")
    return out


def half_space(a: AmalgamApprox, head, tail) -> set:
    """The head's side of the tree edge {head, tail}."""
    if head not in a.tree_parent or tail not in a.tree_parent:
        raise ValueError("half_space needs two tree vertices")
    if a.tree_parent[head] == tail:
        away = "slot:parent"
    elif a.tree_parent[tail] == head:
        away = f"slot:child:{a.children(head).index(tail)}"
    else:
        raise ValueError(f"({head!r}, {tail!r}) is not a tree edge")
    selection = [m for m in a.model_selection(head) if m != away]
    return basic_open_set(a, head, selection)


# ---------------------------------------------------------------------------
# Condition checking.

@dataclass
class ConditionTolerances:
    """Gaps for the finite condition checks; None means the construction's
    own residual budget, resolved against the approximation being checked."""

    boundary_gap: float = None
    density_gap: float = None
    separation_gap: float = None
    iso: float = 1e-9
    null: float = None


@dataclass
class ConditionReport:
    conditions: dict
    tolerances: dict = field(default_factory=dict)

    def all_pass(self) -> bool:
        return all(c["verdict"] == "pass" for c in self.conditions.values())

    def to_dict(self) -> dict:
        return {"conditions": self.conditions, "tolerances": self.tolerances,
                "all_pass": self.all_pass()}


def _default_gaps(a: AmalgamApprox):
    union_diam = disjoint_union(a.source_spaces).diam()
    base_scale = union_diam if union_diam > 0 else 2 * a.r0
    gap = 2 * a.scale ** a.depth * base_scale
    slots = a.branching if a.depth == 0 else a.branching + 1
    n_union = sum(len(x) for x in a.source_spaces)
    r_min = a.r0 * a.mu ** math.ceil(slots / n_union)
    return union_diam, gap, a.scale ** a.depth * r_min


def check_conditions(a: AmalgamApprox, tol: ConditionTolerances = None) -> ConditionReport:
    """Per-condition verdicts with achieved gaps.

    Gap tolerances are stated at the deepest level and rescaled by
    scale^(level - depth) for shallower points: the truncation only provides
    geometry at each copy's own scale.
    """
    if tol is None:
        tol = ConditionTolerances()
    union_diam, default_gap, default_sep = _default_gaps(a)
    boundary_gap = tol.boundary_gap if tol.boundary_gap is not None else default_gap
    density_gap = tol.density_gap if tol.density_gap is not None else default_gap
    separation_gap = (tol.separation_gap if tol.separation_gap is not None
                      else default_sep)
    dist = a.space.dist
    idx = a.space.index
    scale, depth = a.scale, a.depth
    conditions = {}

    # (a1): each labelled subset is the source space at its vertex's scale
    worst_dev = 0.0
    for (t, ci), names in sorted(a._class_points.items()):
        expected = scale ** a.vertex_depth(t) * a.source_spaces[ci].dist
        got = a.space.submatrix(names)
        worst_dev = max(worst_dev, float(np.abs(got - expected).max()))
    conditions["a1"] = {
        "verdict": "pass" if worst_dev <= tol.iso else "fail",
        "max_deviation": worst_dev,
    }

    # (a2): copy diameters bounded by scale^level * diam and strictly shrinking
    level_diams = []
    for j in range(depth + 1):
        diams = [a.space.submatrix(a.copy_points(t)).max()
                 for t in a.vertices if a.vertex_depth(t) == j]
        level_diams.append(float(max(diams)))
    bound_ok = all(d <= scale ** j * union_diam + _EXACT_SLACK
                   for j, d in enumerate(level_diams))
    shrinking = all(nxt < prev or prev == 0.0
                    for prev, nxt in zip(level_diams, level_diams[1:]))
    conditions["a2"] = {
        "verdict": "pass" if bound_ok and shrinking else "fail",
        "level_diameters": level_diams,
        "bound_ok": bound_ok,
        "strictly_shrinking": shrinking,
    }

    # (a3): every copy point has a nearby point outside its copy
    worst_ratio = 0.0
    worst_point = None
    for t in a.vertices:
        pts = a.copy_points(t)
        outside = sorted(a.all_points() - set(pts))
        rows = [idx[p] for p in pts]
        cols = [idx[p] for p in outside]
        gaps = dist[np.ix_(rows, cols)].min(axis=1)
        eff = boundary_gap * scale ** (a.vertex_depth(t) - depth)
        ratio = float(gaps.max()) / eff
        if ratio > worst_ratio:
            worst_ratio, worst_point = ratio, pts[int(gaps.argmax())]
    conditions["a3"] = {
        "verdict": "pass" if worst_ratio <= 1 + _EXACT_SLACK else "fail",
        "worst_gap_over_tolerance": worst_ratio,
        "worst_point": worst_point,
    }

    # (a4): every point is near every class, at its own scale
    worst_ratio = 0.0
    worst = None
    for ci in range(len(a.source_spaces)):
        class_cols = [idx[p] for (t, c), names in a._class_points.items()
                      if c == ci for p in names]
        gaps = dist[:, class_cols].min(axis=1)
        for name, gap in zip(a.space.points, gaps):
            eff = density_gap * scale ** (a.point_depth(name) - depth)
            ratio = float(gap) / eff
            if ratio > worst_ratio:
                worst_ratio, worst = ratio, (name, ci)
    conditions["a4"] = {
        "verdict": "pass" if worst_ratio <= 1 + _EXACT_SLACK else "fail",
        "worst_gap_over_tolerance": worst_ratio,
        "worst_case": worst,
    }

    # (a5): pairs at different tree locations are separated by a half-space
    edge_gap = {}
    for parent, child in a.edges():
        inside = sorted(a.subtree_points(child))
        outside = sorted(a.all_points() - a.subtree_points(child))
        rows = [idx[p] for p in inside]
        cols = [idx[p] for p in outside]
        edge_gap[(parent, child)] = float(dist[np.ix_(rows, cols)].min())
    worst_pair_ratio = math.inf
    worst_pair = None
    n_pairs = 0
    for i, t1 in enumerate(a.vertices):
        for t2 in a.vertices[i + 1:]:
            path = _tree_path_edges(a, t1, t2)
            if not path:
                continue
            n_pairs += 1
            shallowest = min(a.vertex_depth(p) for p, _ in path)
            eff = separation_gap * scale ** (shallowest - depth)
            best = max(edge_gap[e] for e in path)
            ratio = best / eff
            if ratio < worst_pair_ratio:
                worst_pair_ratio, worst_pair = ratio, (t1, t2)
    conditions["a5"] = {
        "verdict": ("pass" if n_pairs == 0
                    or worst_pair_ratio >= 1 - _EXACT_SLACK else "fail"),
        "location_pairs": n_pairs,
        "worst_gap_over_tolerance": (None if n_pairs == 0
                                     else worst_pair_ratio),
        "worst_pair": worst_pair,
    }

    return ConditionReport(conditions, {
        "boundary_gap": boundary_gap,
        "density_gap": density_gap,
        "separation_gap": separation_gap,
        "iso": tol.iso,
    })


def _tree_path_edges(a: AmalgamApprox, t1, t2):
    """Edges (parent, child) on the tree path between two vertices."""
    anc1 = [t1]
    while a.tree_parent[anc1[-1]] is not None:
        anc1.append(a.tree_parent[anc1[-1]])
    anc1_set = set(anc1)
    up2 = []
    v = t2
    while v not in anc1_set:
        up2.append((a.tree_parent[v], v))
        v = a.tree_parent[v]
    up1 = []
    w = t1
    while w != v:
        up1.append((a.tree_parent[w], w))
        w = a.tree_parent[w]
    return up1 + up2


# ---------------------------------------------------------------------------
# Bundle serialization: CSV matrix + JSON sidecar.

def save_bundle(a: AmalgamApprox, matrix_path, sidecar_path):
    write_matrix_csv(a.space, matrix_path)
    sidecar = {
        "kind": "amalgam-approx",
        "depth": a.depth,
        "branching": a.branching,
        "scale": a.scale,
        "r0": a.r0,
        "mu": a.mu,
        "tree": {v: a.tree_parent[v] for v in a.vertices},
        "labels": a.labels,
        "ends": a.ends,
        "source_spaces": [
            {"points": list(x.points), "dist": x.dist.tolist()}
            for x in a.source_spaces
        ],
    }
    with open(sidecar_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)


def load_bundle(matrix_path, sidecar_path) -> AmalgamApprox:
    space = read_matrix_csv(matrix_path)
    with open(sidecar_path) as fh:
        sidecar = json.load(fh)
    if sidecar.get("kind") != "amalgam-approx":
        raise ValueError("sidecar is not an amalgam-approx bundle")
    labels = sidecar["labels"]
    if set(labels) != set(space.points):
        raise ValueError("sidecar labels do not cover the matrix points")
    sources = [FiniteMetricSpace(s["points"], s["dist"])
               for s in sidecar["source_spaces"]]
    return AmalgamApprox(
        source_spaces=sources,
        depth=sidecar["depth"],
        branching=sidecar["branching"],
        scale=sidecar["scale"],
        r0=sidecar["r0"],
        mu=sidecar["mu"],
        tree_parent=sidecar["tree"],
        space=space,
        labels=labels,
        ends=sidecar["ends"],
    )
