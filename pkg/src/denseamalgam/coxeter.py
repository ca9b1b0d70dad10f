"""Coxeter systems: finite-type recognition, nerves, endedness, boundaries.

A system is a finite generator tuple S together with the symmetric matrix of
orders m(s,t) in {1,2,...} with m(s,s)=1 (infinity allowed off-diagonal).
Finiteness of the generated group depends only on the labelled diagram
(vertices S, edges where m >= 3); it is decided against the classification of
finite irreducible systems, with the positive-definiteness of the cosine
matrix available as an independent numerical route.

The nerve has a vertex per generator and a simplex per subset generating a
finite special subgroup.  Endedness of the group and its boundary expression
are read off the matrix and the nerve's splitting structure.
"""

from __future__ import annotations

from dataclasses import dataclass
import json
import math

import numpy as np

from .boundary import (
    Amalgam,
    Atom,
    BoundaryExpr,
    CANTOR,
    EMPTY,
    POINT_PAIR,
    normalize,
)
from .simplicial import SimplicialComplex

INF = math.inf

_NERVE_GENERATOR_CAP = 16


class CoxeterParseError(ValueError):
    """Malformed Coxeter input; carries the offending location when known."""

    def __init__(self, message, location=None):
        if location is not None:
            message = f"{message} (at {location})"
        super().__init__(message)
        self.location = location


@dataclass(frozen=True)
class EndednessClass:
    """Number-of-ends classification of a Coxeter group.

    tag is one of 'finite', 'two_ended', 'one_ended', 'infinitely_many_ends';
    virtually_free reports whether the group is virtually a nonabelian free
    group (meaningful only in the infinitely-many-ends case, False otherwise).
    """

    tag: str
    virtually_free: bool = False


class CoxeterSystem:
    """Generators plus the symmetric order matrix m(s,t)."""

    def __init__(self, generators, matrix):
        generators = tuple(generators)
        if not generators:
            raise CoxeterParseError("at least one generator is required")
        if len(set(generators)) != len(generators):
            raise CoxeterParseError("duplicate generator names")
        self.generators = generators
        self._index = {s: i for i, s in enumerate(generators)}
        n = len(generators)
        m = {}
        for i, s in enumerate(generators):
            for j, t in enumerate(generators):
                try:
                    value = matrix[(s, t)] if isinstance(matrix, dict) else matrix[i][j]
                except (KeyError, IndexError):
                    raise CoxeterParseError("missing matrix entry",
                                            location=f"m[{s},{t}]") from None
                m[(s, t)] = value
        for s in generators:
            if m[(s, s)] != 1:
                raise CoxeterParseError("diagonal entries must be 1",
                                        location=f"m[{s},{s}]")
        for i, s in enumerate(generators):
            for t in generators[i + 1:]:
                a, b = m[(s, t)], m[(t, s)]
                if a != b:
                    raise CoxeterParseError("matrix must be symmetric",
                                            location=f"m[{s},{t}]")
                if a != INF and (not isinstance(a, int) or a < 2):
                    raise CoxeterParseError(
                        "off-diagonal entries must be integers >= 2 or infinity",
                        location=f"m[{s},{t}]")
        self._m = m

    def order(self, s, t):
        return self._m[(s, t)]

    def subset_tuple(self, subset):
        subset = frozenset(subset)
        unknown = subset - set(self.generators)
        if unknown:
            raise ValueError(f"unknown generators: {sorted(unknown)}")
        return tuple(s for s in self.generators if s in subset)

    def __repr__(self):
        return f"CoxeterSystem(generators={self.generators!r})"


def parse_coxeter(text: str) -> CoxeterSystem:
    """Parse {"generators": [...], "m": [[...]]} with "inf" for infinite orders."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CoxeterParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CoxeterParseError("document must be a JSON object")
    for key in ("generators", "m"):
        if key not in doc:
            raise CoxeterParseError(f"missing key {key!r}")
    generators = doc["generators"]
    if (not isinstance(generators, list) or not generators
            or not all(isinstance(g, str) for g in generators)):
        raise CoxeterParseError("'generators' must be a nonempty list of strings")
    rows = doc["m"]
    n = len(generators)
    if not isinstance(rows, list) or len(rows) != n:
        raise CoxeterParseError(f"'m' must be a {n}x{n} matrix (row-major)")
    matrix = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise CoxeterParseError(f"'m' must be a {n}x{n} matrix (row-major)",
                                    location=f"row {i}")
        entries = []
        for j, value in enumerate(row):
            if value == "inf":
                entries.append(INF)
            elif isinstance(value, int) and not isinstance(value, bool):
                entries.append(value)
            else:
                raise CoxeterParseError(
                    f"matrix entries must be integers or \"inf\", got {value!r}",
                    location=f"m[{generators[i]},{generators[j]}]")
        matrix.append(entries)
    return CoxeterSystem(generators, matrix)


# ---------------------------------------------------------------------------
# Finite-type recognition against the classification of finite systems.

def _diagram_components(c: CoxeterSystem, subset):
    """Connected components of the diagram restricted to `subset`.

    Diagram edges join generators with m >= 3 (including infinity); m = 2
    commutes and disconnects.
    """
    members = list(subset)
    seen = set()
    comps = []
    for start in members:
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in members:
                if v not in comp and c.order(u, v) >= 3:
                    comp.add(v)
                    stack.append(v)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def _component_is_finite(c: CoxeterSystem, comp) -> bool:
    """Does this connected diagram component define a finite group?"""
    members = sorted(comp, key=c.generators.index)
    n = len(members)
    if n == 1:
        return True
    edges = []
    for i, s in enumerate(members):
        for t in members[i + 1:]:
            m = c.order(s, t)
            if m >= 3:
                if m == INF:
                    return False
                edges.append((s, t, m))
    if n == 2:
        return True  # dihedral with finite m
    if len(edges) != n - 1:
        return False  # a connected non-tree diagram is never finite type
    degree = {s: 0 for s in members}
    for s, t, _ in edges:
        degree[s] += 1
        degree[t] += 1
    labels = sorted(m for _, _, m in edges)
    high = [m for m in labels if m >= 4]
    if any(m >= 6 for m in high) or len(high) >= 2:
        return False
    is_path = max(degree.values()) <= 2
    if not high:
        if is_path:
            return True  # type A
        branch = [s for s in members if degree[s] >= 3]
        if len(branch) != 1 or degree[branch[0]] != 3:
            return False
        legs = _leg_lengths(branch[0], edges)
        if legs[:2] == [1, 1]:
            return True  # type D
        return legs in ([1, 2, 2], [1, 2, 3], [1, 2, 4])  # E6, E7, E8
    if not is_path:
        return False
    (s, t, m) = next((e for e in edges if e[2] >= 4))
    terminal = degree[s] == 1 or degree[t] == 1
    if m == 4:
        if terminal:
            return True  # type B
        return n == 4  # type F4 is the only interior-4 path
    # m == 5: H3 and H4 only
    return terminal and n in (3, 4)


def _leg_lengths(branch, edges):
    adj = {}
    for s, t, _ in edges:
        adj.setdefault(s, []).append(t)
        adj.setdefault(t, []).append(s)
    legs = []
    for first in adj[branch]:
        length = 1
        prev, cur = branch, first
        while True:
            nxt = [u for u in adj[cur] if u != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            length += 1
        legs.append(length)
    return sorted(legs)


def is_finite_type(c: CoxeterSystem, subset=None, _memo=None) -> bool:
    """Does the subset generate a finite special subgroup?

    The empty subset gives the trivial group (finite).  Decided per diagram
    component against the catalogue of finite irreducible systems; `_memo`
    caches per-component answers across calls (used by `nerve`).
    """
    if subset is None:
        subset = c.generators
    subset = frozenset(subset)
    for comp in _diagram_components(c, subset):
        if _memo is not None and comp in _memo:
            finite = _memo[comp]
        else:
            finite = _component_is_finite(c, comp)
            if _memo is not None:
                _memo[comp] = finite
        if not finite:
            return False
    return True


def cosine_matrix(c: CoxeterSystem, subset=None) -> np.ndarray:
    """Symmetric bilinear form of the subset: 1 on the diagonal and
    -cos(pi/m(s,t)) off it (-1 for infinite orders)."""
    members = c.subset_tuple(subset) if subset is not None else c.generators
    n = len(members)
    b = np.ones((n, n), dtype=np.float64)
    for i, s in enumerate(members):
        for j, t in enumerate(members):
            if i == j:
                continue
            m = c.order(s, t)
            b[i, j] = -1.0 if m == INF else -math.cos(math.pi / m)
    return b


def gram_pd_test(c: CoxeterSystem, subset=None, tol=1e-9) -> bool:
    """Numerical finiteness oracle: the cosine matrix is positive definite
    (smallest eigenvalue > tol).  Independent of the catalogue route."""
    members = c.subset_tuple(subset) if subset is not None else c.generators
    if not members:
        return True
    eigenvalues = np.linalg.eigvalsh(cosine_matrix(c, members))
    return bool(eigenvalues[0] > tol)


# ---------------------------------------------------------------------------
# Nerve and endedness.

def nerve(c: CoxeterSystem) -> SimplicialComplex:
    """Nerve of the system: vertices are generators, simplices the subsets
    spanning finite special subgroups."""
    n = len(c.generators)
    if n > _NERVE_GENERATOR_CAP:
        raise ValueError(
            f"nerve computation capped at {_NERVE_GENERATOR_CAP} generators, got {n}")
    memo = {}
    by_size = sorted(range(1, 1 << n), key=lambda m: -bin(m).count("1"))
    maximal = []

    def subset_of(mask):
        return frozenset(c.generators[i] for i in range(n) if mask >> i & 1)

    for mask in by_size:
        if any(mask & cover == mask for cover in maximal):
            continue
        if is_finite_type(c, subset_of(mask), _memo=memo):
            maximal.append(mask)
    return SimplicialComplex(c.generators, [subset_of(m) for m in maximal])


def classify_endedness(c: CoxeterSystem) -> EndednessClass:
    """Decision tree on the matrix and the nerve.

    finite type -> finite; a commuting split into an infinite dihedral pair
    and a finite-type rest -> two ended; irreducible non-simplex nerve ->
    one ended; otherwise infinitely many ends, virtually free (nonabelian)
    exactly when the nerve is flag with chordal 1-skeleton.
    """
    gens = c.generators
    if is_finite_type(c):
        return EndednessClass("finite")
    for i, s in enumerate(gens):
        for t in gens[i + 1:]:
            if c.order(s, t) != INF:
                continue
            rest = [u for u in gens if u not in (s, t)]
            if all(c.order(u, v) == 2 for u in (s, t) for v in rest) \
                    and is_finite_type(c, rest):
                return EndednessClass("two_ended")
    l = nerve(c)
    is_simplex = len(l.maximal_faces) == 1 and l.maximal_faces[0] == frozenset(gens)
    if not is_simplex and l.is_irreducible():
        return EndednessClass("one_ended")
    return EndednessClass("infinitely_many_ends",
                          virtually_free=l.is_infinity_large())


def subsystem_boundary_atom(c: CoxeterSystem, subset) -> Atom:
    """Atom standing for the boundary of the special subgroup on `subset`;
    the name records the generator subset (in generator order)."""
    members = c.subset_tuple(subset)
    return Atom("bd[" + ",".join(members) + "]")


def boundary_expression(c: CoxeterSystem) -> BoundaryExpr:
    """Normalized boundary expression of the group.

    Finite groups have empty boundary, two-ended groups a point pair,
    one-ended groups a single connected boundary atom.  With infinitely many
    ends the boundary is the dense amalgam of the terminal factors of the
    nerve: simplex factors contribute empty boundaries, the rest contribute
    the boundary atoms of their (one-ended) special subgroups.
    """
    cls = classify_endedness(c)
    if cls.tag == "finite":
        return EMPTY
    if cls.tag == "two_ended":
        return POINT_PAIR
    if cls.tag == "one_ended":
        return Atom("bd[" + ",".join(c.generators) + "]")
    l = nerve(c)
    args = []
    for factor in sorted(l.terminal_factors(), key=lambda f: sorted(f)):
        if l.is_face(factor):
            args.append(EMPTY)
        else:
            args.append(subsystem_boundary_atom(c, factor))
    return normalize(Amalgam(tuple(args)))
