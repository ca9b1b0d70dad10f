"""Finite metric spaces: validated construction, unions, and file formats."""

import csv
import json

import numpy as np

from ._kernels import max_triangle_violation

TRIANGLE_SLACK = 1e-12


class FiniteMetricSpace:
    """Ordered point set with a symmetric positive distance matrix.

    Construction checks zero diagonal, exact symmetry, positivity off the
    diagonal, and the triangle inequality within a 1e-12 slack.  Internal
    constructors that guarantee the axioms skip the cubic check.
    """

    def __init__(self, points, dist, _check=True):
        self.points = tuple(points)
        if not self.points:
            raise ValueError("a metric space needs at least one point")
        if len(set(self.points)) != len(self.points):
            raise ValueError("duplicate point names")
        self.index = {p: i for i, p in enumerate(self.points)}
        mat = np.array(dist, dtype=np.float64)
        n = len(self.points)
        if mat.shape != (n, n):
            raise ValueError(f"distance matrix must be {n}x{n}")
        if _check:
            if not np.all(np.isfinite(mat)):
                raise ValueError("distances must be finite")
            if np.any(mat.diagonal() != 0.0):
                raise ValueError("self-distances must be zero")
            if not np.array_equal(mat, mat.T):
                raise ValueError("distance matrix must be symmetric")
            if np.any(mat + np.eye(n) <= 0.0):
                raise ValueError("distinct points need positive distance")
            worst = max_triangle_violation(mat)
            if worst > TRIANGLE_SLACK:
                raise ValueError(f"triangle inequality violated by {worst:.3e}")
        mat.setflags(write=False)
        self.dist = mat

    def __len__(self) -> int:
        return len(self.points)

    def distance(self, p, q) -> float:
        return float(self.dist[self.index[p], self.index[q]])

    def diam(self) -> float:
        return float(self.dist.max())

    def submatrix(self, points) -> np.ndarray:
        idx = [self.index[p] for p in points]
        return self.dist[np.ix_(idx, idx)]

    def subspace(self, points) -> "FiniteMetricSpace":
        # any subset of a metric space is one
        return FiniteMetricSpace(points, self.submatrix(points), _check=False)

    def __eq__(self, other):
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return self.points == other.points and np.array_equal(self.dist, other.dist)

    def __repr__(self):
        return f"FiniteMetricSpace({len(self.points)} points, diam={self.diam():g})"


def disjoint_union(spaces) -> FiniteMetricSpace:
    """Disjoint union; points become (part index, original point) pairs.

    Cross-part distance is diam_i + diam_j + 1: any constant at least the
    larger diameter keeps the triangle inequality, this one is fixed for
    reproducibility.
    """
    spaces = list(spaces)
    if not spaces:
        raise ValueError("need at least one space")
    points = [(i, p) for i, x in enumerate(spaces) for p in x.points]
    offsets = np.cumsum([0] + [len(x) for x in spaces])
    n = offsets[-1]
    mat = np.zeros((n, n))
    for i, x in enumerate(spaces):
        mat[offsets[i]:offsets[i + 1], offsets[i]:offsets[i + 1]] = x.dist
        for j in range(i):
            c = x.diam() + spaces[j].diam() + 1.0
            mat[offsets[i]:offsets[i + 1], offsets[j]:offsets[j + 1]] = c
            mat[offsets[j]:offsets[j + 1], offsets[i]:offsets[i + 1]] = c
    return FiniteMetricSpace(points, mat, _check=False)


# ---------------------------------------------------------------------------
# File formats: JSON for single spaces, CSV for distance matrices.

def _require_str_points(x: FiniteMetricSpace):
    if not all(isinstance(p, str) for p in x.points):
        raise ValueError("point names must be strings for serialization")


def space_to_json(x: FiniteMetricSpace) -> str:
    _require_str_points(x)
    return json.dumps({"points": list(x.points), "dist": x.dist.tolist()},
                      indent=2)


def space_from_json(text: str) -> FiniteMetricSpace:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("document must be a JSON object")
    for key in ("points", "dist"):
        if key not in doc:
            raise ValueError(f"missing key {key!r}")
    points = doc["points"]
    if (not isinstance(points, list) or not points
            or not all(isinstance(p, str) for p in points)):
        raise ValueError("'points' must be a nonempty list of strings")
    return FiniteMetricSpace(points, doc["dist"])


def write_matrix_csv(x: FiniteMetricSpace, path):
    """Labelled square table: header row and leading column hold point names."""
    _require_str_points(x)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + list(x.points))
        for p, row in zip(x.points, x.dist):
            writer.writerow([p] + [repr(float(v)) for v in row])


def read_matrix_csv(path) -> FiniteMetricSpace:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:1] != [""]:
        raise ValueError("matrix CSV needs a header row starting with an empty cell")
    points = rows[0][1:]
    body = rows[1:]
    if len(body) != len(points):
        raise ValueError("matrix CSV row count does not match header")
    mat = []
    for p, row in zip(points, body):
        if row[0] != p:
            raise ValueError(f"row label {row[0]!r} does not match header {p!r}")
        if len(row) != len(points) + 1:
            raise ValueError(f"row {p!r} has wrong length")
        mat.append([float(v) for v in row[1:]])
    return FiniteMetricSpace(points, mat)
