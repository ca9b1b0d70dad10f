import math
import random

import pytest

from denseamalgam.boundary import (
    Amalgam,
    Atom,
    CANTOR,
    EMPTY,
    POINT_PAIR,
)
from denseamalgam.simplicial import SimplicialComplex


def random_expr(rng: random.Random, max_depth=5, max_leaves=8):
    """Random boundary expression with bounded depth and leaf count."""
    budget = rng.randint(1, max_leaves)

    def leaf():
        roll = rng.randrange(6)
        if roll == 0:
            return EMPTY
        if roll == 1:
            return CANTOR
        if roll == 2:
            return POINT_PAIR
        name = rng.choice("abcde")
        if roll == 3:
            return Atom(name)
        if roll == 4:
            return Atom(name, frozenset({"totally_disconnected"}))
        return Atom(name, frozenset({"two_point"}))

    def build(depth, leaves_left):
        if depth <= 0 or leaves_left <= 1 or rng.random() < 0.35:
            return leaf(), 1
        width = rng.randint(1, min(4, leaves_left))
        args, used = [], 0
        for _ in range(width):
            child, n = build(depth - 1, leaves_left - used)
            args.append(child)
            used += n
            if used >= leaves_left:
                break
        return Amalgam(tuple(args)), used

    expr, _ = build(rng.randint(1, max_depth), budget)
    return expr


def random_complex(rng: random.Random, n_vertices):
    """Random simplicial complex on n_vertices labelled vertices."""
    vertices = [f"v{i}" for i in range(n_vertices)]
    faces = []
    n_faces = rng.randint(1, max(2, n_vertices))
    for _ in range(n_faces):
        size = rng.randint(1, min(4, n_vertices))
        faces.append(frozenset(rng.sample(vertices, size)))
    covered = set().union(*faces)
    for v in vertices:
        if v not in covered:
            faces.append(frozenset({v}))
    maximal = [f for f in faces if not any(f != g and f <= g for g in faces)]
    return SimplicialComplex(vertices, set(maximal))


def random_graph_complex(rng: random.Random, n_vertices, p=0.4):
    """Clique complex of a random graph (always flag)."""
    vertices = [f"v{i}" for i in range(n_vertices)]
    edges = set()
    for i in range(n_vertices):
        for j in range(i + 1, n_vertices):
            if rng.random() < p:
                edges.add((i, j))
    return clique_complex(n_vertices, edges)


def clique_complex(n_vertices, edges):
    """Clique complex of the graph on range(n_vertices) with the given edges."""
    vertices = [f"v{i}" for i in range(n_vertices)]
    adj = {i: set() for i in range(n_vertices)}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    cliques = []

    def extend(clique, candidates):
        grew = False
        for v in sorted(candidates):
            extend(clique | {v}, candidates & adj[v] & set(range(v + 1, n_vertices)))
            grew = True
        if not grew:
            # maximal along this branch; keep only globally maximal later
            cliques.append(clique)

    extend(frozenset(), set(range(n_vertices)))
    maximal = [c for c in cliques if c and not any(c != d and c <= d for d in cliques)]
    if not maximal:
        maximal = [frozenset({i}) for i in range(n_vertices)]
    faces = [frozenset(f"v{i}" for i in c) for c in maximal]
    # isolated vertices
    covered = set().union(*faces) if faces else set()
    for v in vertices:
        if v not in covered:
            faces.append(frozenset({v}))
    return SimplicialComplex(vertices, set(faces))


def random_coxeter_matrix(rng: random.Random, n, entries=(2, 3, 4, 5, 6, math.inf)):
    rows = [[1] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            value = rng.choice(entries)
            rows[i][j] = rows[j][i] = value
    return rows


@pytest.fixture
def rng():
    return random.Random(20260819)
