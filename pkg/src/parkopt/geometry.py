"""Convex polygons in half-space form, rigid transforms and a SAT oracle.

Points are stored as rows, so a polygon with N edges carries an ``(N, 2)``
normal matrix, an ``(N,)`` offset vector and an ``(N, 2)`` vertex matrix.
Row ``i`` of the vertex matrix is the intersection of half-space rows ``i``
and ``i + 1`` (cyclically).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

CONTAIN_TOL = 1e-9
SAT_TOL = 1e-9


class GeometryError(ValueError):
    pass


class DegenerateEdges(GeometryError):
    pass


class UnboundedPolygon(GeometryError):
    pass


class EmptyPolygon(GeometryError):
    pass


@dataclass(frozen=True, eq=False)
class HalfSpacePolygon:
    """Bounded convex polygon ``{q : A q <= b}`` with cached vertices.

    Build instances through :func:`vertices_from_halfspaces`; the raw
    constructor trusts its arguments.
    """

    normals: np.ndarray
    offsets: np.ndarray
    vertices: np.ndarray
    orientation: str = "ccw"

    def __post_init__(self):
        for name in ("normals", "offsets", "vertices"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_edges(self) -> int:
        return self.offsets.shape[0]

    def normalized(self) -> "HalfSpacePolygon":
        """Same set with unit-length normals."""
        norms = np.linalg.norm(self.normals, axis=1)
        return HalfSpacePolygon(
            self.normals / norms[:, None], self.offsets / norms, self.vertices, self.orientation
        )

    def to_json(self) -> dict:
        return {"A": self.normals.tolist(), "b": self.offsets.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "HalfSpacePolygon":
        return vertices_from_halfspaces(data["A"], data["b"])

    def __repr__(self):
        return f"HalfSpacePolygon(n_edges={self.n_edges}, vertices={self.vertices.tolist()})"


@dataclass(frozen=True)
class PolyUnion:
    """Union of convex pieces (pieces may overlap or be disjoint)."""

    parts: tuple = field(default_factory=tuple)

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise GeometryError("a polygon union needs at least one part")
        object.__setattr__(self, "parts", parts)

    def contains_point(self, q) -> bool:
        return any(contains_point(p, q) for p in self.parts)


@dataclass(frozen=True, eq=False)
class RigidTransform:
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.array(self.rotation, dtype=float).reshape(2, 2)
        T = np.array(self.translation, dtype=float).reshape(2)
        if not np.allclose(R.T @ R, np.eye(2), atol=1e-12, rtol=0.0) or np.linalg.det(R) <= 0:
            raise GeometryError("rotation must be a proper orthogonal 2x2 matrix")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", T)

    @classmethod
    def from_pose(cls, x: float, y: float, theta: float) -> "RigidTransform":
        c, s = np.cos(theta), np.sin(theta)
        return cls(np.array([[c, -s], [s, c]]), np.array([x, y]))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(2), np.zeros(2))

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.rotation.T + self.translation


def _turn_angles(normals: np.ndarray) -> np.ndarray:
    nxt = np.roll(normals, -1, axis=0)
    cross = normals[:, 0] * nxt[:, 1] - normals[:, 1] * nxt[:, 0]
    dot = np.sum(normals * nxt, axis=1)
    return np.arctan2(cross, dot)


def _positively_spans(normals: np.ndarray) -> bool:
    # Normals positively span the plane iff no angular gap reaches pi.
    ang = np.sort(np.arctan2(normals[:, 1], normals[:, 0]))
    gaps = np.diff(np.concatenate([ang, ang[:1] + 2 * np.pi]))
    return bool(np.max(gaps) < np.pi - 1e-12)


def vertices_from_halfspaces(A, b, tol: float = CONTAIN_TOL) -> HalfSpacePolygon:
    """Solve each cyclic pair of consecutive rows for its vertex and validate.

    Raises DegenerateEdges when consecutive rows are parallel,
    UnboundedPolygon when the normals do not enclose the origin and
    EmptyPolygon when a vertex violates another row (bad order or empty set).
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float).reshape(-1)
    if A.ndim != 2 or A.shape[1] != 2 or A.shape[0] != b.shape[0]:
        raise GeometryError(f"expected A of shape (N, 2) and b of shape (N,), got {A.shape}, {b.shape}")
    n = A.shape[0]
    if n < 3:
        raise GeometryError("a bounded polygon needs at least 3 half-spaces")
    if np.any(np.linalg.norm(A, axis=1) == 0.0):
        raise DegenerateEdges("zero normal row")

    nxt = np.roll(np.arange(n), -1)
    verts = np.empty((n, 2))
    for i in range(n):
        M = np.array([A[i], A[nxt[i]]])
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        scale = np.linalg.norm(M[0]) * np.linalg.norm(M[1])
        if abs(det) <= 1e-12 * scale:
            raise DegenerateEdges(f"rows {i} and {nxt[i]} are parallel")
        verts[i] = np.linalg.solve(M, np.array([b[i], b[nxt[i]]]))

    if not _positively_spans(A):
        raise UnboundedPolygon("half-space normals do not bound the feasible set")
    slack = A @ verts.T - b[:, None]
    if np.max(slack) > tol:
        i, j = np.unravel_index(np.argmax(slack), slack.shape)
        raise EmptyPolygon(f"vertex {j} violates row {i} by {slack[i, j]:.3g}")
    turns = _turn_angles(A)
    if not (np.all(turns > 0) or np.all(turns < 0)) or not np.isclose(abs(turns.sum()), 2 * np.pi):
        raise EmptyPolygon("rows are not in cyclic order around the polygon")
    orientation = "ccw" if turns[0] > 0 else "cw"
    return HalfSpacePolygon(A, b, verts, orientation)


def polygon_from_vertices(vertices, orientation: str | None = None) -> HalfSpacePolygon:
    """Half-spaces with unit normals from cyclically ordered vertices.

    Row ``i`` passes through vertices ``i - 1`` and ``i``, so the cached
    vertices come back in the input order.
    """
    V = np.array(vertices, dtype=float)
    prev = np.roll(V, 1, axis=0)
    edges = V - prev
    signed_area = 0.5 * np.sum(prev[:, 0] * V[:, 1] - V[:, 0] * prev[:, 1])
    if orientation is None:
        orientation = "ccw" if signed_area > 0 else "cw"
    sign = 1.0 if orientation == "ccw" else -1.0
    normals = sign * np.column_stack([edges[:, 1], -edges[:, 0]])
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    offsets = np.sum(normals * V, axis=1)
    return HalfSpacePolygon(normals, offsets, V, orientation)


def contains_point(P: HalfSpacePolygon, q, tol: float = CONTAIN_TOL) -> bool:
    q = np.asarray(q, dtype=float)
    return bool(np.all(P.normals @ q - P.offsets <= tol))


def transform(P: HalfSpacePolygon, X: RigidTransform) -> HalfSpacePolygon:
    """Image ``R P + T``; vertices map directly, rows become ``A R^T``."""
    R, T = X.rotation, X.translation
    A_new = P.normals @ R.T
    b_new = P.offsets + A_new @ T
    return HalfSpacePolygon(A_new, b_new, X.apply(P.vertices), P.orientation)


def unit_normals(P: HalfSpacePolygon) -> np.ndarray:
    return P.normals / np.linalg.norm(P.normals, axis=1)[:, None]


def sat_disjoint(P: HalfSpacePolygon, Q: HalfSpacePolygon, tol: float = SAT_TOL):
    """Separating-axis test over the edge normals of both polygons.

    Returns ``(True, (lam, mu))`` with unit ``lam`` such that
    ``lam @ v > mu`` for every vertex of P and ``lam @ o < mu`` for every
    vertex of Q, or ``(False, None)`` when the closed sets intersect.
    The axis with the widest gap is reported.
    """
    axes = np.vstack([unit_normals(P), unit_normals(Q)])
    pp = P.vertices @ axes.T
    qq = Q.vertices @ axes.T
    gap_up = pp.min(axis=0) - qq.max(axis=0)  # P above Q along the axis
    gap_down = qq.min(axis=0) - pp.max(axis=0)  # P below Q
    gaps = np.concatenate([gap_up, gap_down])
    k = int(np.argmax(gaps))
    if gaps[k] <= tol:
        return False, None
    na = axes.shape[0]
    if k < na:
        lam = axes[k]
        mu = 0.5 * (pp[:, k].min() + qq[:, k].max())
    else:
        lam = -axes[k - na]
        mu = -0.5 * (qq[:, k - na].min() + pp[:, k - na].max())
    return True, (lam.copy(), float(mu))


def batch_disjoint(vertices: np.ndarray, Q: HalfSpacePolygon, tol: float = SAT_TOL) -> np.ndarray:
    """Vectorised SAT verdicts for many convex vertex sets against one polygon.

    ``vertices`` has shape ``(K, N, 2)`` with cyclically ordered corners.
    """
    return batch_gap(vertices, Q) > tol


def batch_gap(vertices: np.ndarray, Q: HalfSpacePolygon) -> np.ndarray:
    """Widest SAT gap of each vertex set against ``Q``.

    Positive values are separation distances along the best edge normal;
    negative values are minus the smallest overlap, i.e. the penetration
    depth.
    """
    V = np.asarray(vertices, dtype=float)
    edges = np.roll(V, -1, axis=1) - V
    own = np.stack([edges[..., 1], -edges[..., 0]], axis=-1)
    own /= np.linalg.norm(own, axis=-1, keepdims=True)
    other = np.broadcast_to(unit_normals(Q), (V.shape[0],) + Q.normals.shape)
    axes = np.concatenate([own, other], axis=1)  # (K, M, 2)
    pv = np.einsum("knd,kmd->knm", V, axes)
    qv = np.einsum("jd,kmd->kjm", Q.vertices, axes)
    gap = np.maximum(pv.min(axis=1) - qv.max(axis=1), qv.min(axis=1) - pv.max(axis=1))
    return gap.max(axis=1)


def batch_inside(vertices: np.ndarray, W: HalfSpacePolygon, tol: float = CONTAIN_TOL) -> np.ndarray:
    """Whether every corner of each vertex set satisfies ``E v <= f``."""
    V = np.asarray(vertices, dtype=float)
    vals = np.einsum("knd,rd->knr", V, W.normals) - W.offsets
    return np.all(vals <= tol, axis=(1, 2))


def polygons_disjoint(P, Q) -> bool:
    """Disjointness of two convex polygons or unions of them."""
    ps = P.parts if isinstance(P, PolyUnion) else (P,)
    qs = Q.parts if isinstance(Q, PolyUnion) else (Q,)
    return all(sat_disjoint(p, q)[0] for p in ps for q in qs)


def continuous_collision_check(states, scenario, refine: int = 10, controls=None, tf=None) -> bool:
    """Fine-grained re-check of a sampled trajectory.

    Every shooting interval is re-integrated from its starting sample in
    ``refine`` RK4 sub-steps with that interval's control, and the body at
    each fine sample is tested for containment in the environment and
    disjointness from every obstacle.  ``refine == 1`` checks the samples
    themselves.
    """
    from .vehicle import body_vertices_batch

    corners = body_vertices_batch(_fine_poses(states, scenario, refine, controls, tf), scenario.vehicle)
    if not np.all(batch_inside(corners, scenario.environment)):
        return False
    return all(np.all(batch_disjoint(corners, obs)) for obs in scenario.obstacles)


def _fine_poses(states, scenario, refine, controls, tf):
    from .vehicle import simulate_fine

    if refine < 1:
        raise ValueError("refine must be >= 1")
    states = np.asarray(states, dtype=float)
    if refine == 1 or controls is None:
        return states
    return simulate_fine(states, np.asarray(controls, dtype=float), float(tf), refine, scenario.vehicle)


def violation_depths(states, scenario, refine: int = 10, controls=None, tf=None) -> np.ndarray:
    """Worst violation at every fine sample (metres; ``<= 0`` means clear).

    Takes the larger of the deepest obstacle overlap and the furthest
    distance a corner sits outside the environment.  Sample ``i`` lies in
    shooting interval ``(i - 1) // refine``.
    """
    from .vehicle import body_vertices_batch

    corners = body_vertices_batch(_fine_poses(states, scenario, refine, controls, tf), scenario.vehicle)
    env = scenario.environment
    norms = np.linalg.norm(env.normals, axis=1)
    out = (np.einsum("knd,rd->knr", corners, env.normals) - env.offsets) / norms
    depth = out.max(axis=(1, 2))
    for obs in scenario.obstacles:
        depth = np.maximum(depth, -batch_gap(corners, obs))
    return depth
