"""Collision-avoidance certificate blocks for a vehicle/obstacle pair.

Six exact formulations are available, selected by :class:`FormulationKind`:

* ``EQ14`` - vertex certificates: a nonnegative combination of vehicle rows
  that is positive on all obstacle vertices and vice versa (matrices
  ``Lam`` and ``Om`` with columns on the unit simplex);
* ``EQ16`` - separating slab ``lam @ v >= mu1``, ``lam @ o <= mu2``, ``mu1 > mu2``;
* ``EQ17`` - single separating line ``lam @ v > mu > lam @ o``;
* ``EQ18`` - Farkas dual certificate;
* ``EQ19`` - Farkas dual certificate with ``|A^T lam| <= 1``;
* ``EQ21`` - signed-distance dual written in the body frame.

Builders are pure ``jax.numpy`` functions returning a :class:`ConstraintBlock`
whose inequality residuals are feasible when ``>= 0``.  Vertex matrices
use one point per row.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import jax.numpy as jnp
import numpy as np

from .geometry import CONTAIN_TOL, HalfSpacePolygon


class FormulationKind(enum.Enum):
    EQ14 = "eq14"
    EQ16 = "eq16"
    EQ17 = "eq17"
    EQ18 = "eq18"
    EQ19 = "eq19"
    EQ21 = "eq21"

    @classmethod
    def parse(cls, value) -> "FormulationKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())

    @property
    def tag(self) -> str:
        return self.value


ALL_KINDS = tuple(FormulationKind)


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Margins:
    """Margins that turn strict inequalities into ``>= eps`` constraints."""

    eps_sep: float = 1e-4
    eps_gap: float = 1e-3
    d_safe: float = 1e-3


DEFAULT_MARGINS = Margins()
EQ18_DUAL_MAX = 10.0


@dataclass(frozen=True)
class ConstraintBlock:
    ineq: jnp.ndarray
    eq: jnp.ndarray

    @property
    def n_ineq(self) -> int:
        return int(self.ineq.shape[0])

    @property
    def n_eq(self) -> int:
        return int(self.eq.shape[0])

    def feasible(self, tol: float = 1e-9) -> bool:
        return bool(np.all(np.asarray(self.ineq) >= -tol) and np.all(np.abs(np.asarray(self.eq)) <= tol))


@dataclass(frozen=True)
class AuxLayout:
    per_pair_count: int
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    structure: tuple  # (symbol, shape) pairs in storage order


def aux_count(kind, n_v: int, n_o: int) -> int:
    kind = FormulationKind.parse(kind)
    if kind is FormulationKind.EQ17:
        return 3
    if kind is FormulationKind.EQ16:
        return 4
    if kind is FormulationKind.EQ14:
        return 2 * n_v * n_o
    return n_v + n_o


def aux_layout(kind, n_v: int, n_o: int) -> AuxLayout:
    kind = FormulationKind.parse(kind)
    n = aux_count(kind, n_v, n_o)
    inf = np.inf
    if kind is FormulationKind.EQ14:
        lo, hi = np.zeros(n), np.ones(n)
        structure = (("Lam", (n_v, n_o)), ("Om", (n_o, n_v)))
    elif kind is FormulationKind.EQ16:
        # |lam_i| <= 1 already follows from lam'lam = 1; the box is kept loose
        # so that it never becomes active alongside the norm equality
        lo = np.array([-2.0, -2.0, -inf, -inf])
        hi = np.array([2.0, 2.0, inf, inf])
        structure = (("lam", (2,)), ("mu1", ()), ("mu2", ()))
    elif kind is FormulationKind.EQ17:
        lo = np.array([-2.0, -2.0, -inf])
        hi = np.array([2.0, 2.0, inf])
        structure = (("lam", (2,)), ("mu", ()))
    else:
        lo, hi = np.zeros(n), np.full(n, inf)
        if kind is FormulationKind.EQ18:
            # the certificate is a cone: scaling (lam, mu) up only loosens the
            # distance row, and a log barrier on that row then runs off along
            # the ray.  A finite cap keeps the barrier problem bounded while
            # still certifying gaps down to d_safe / EQ18_DUAL_MAX.
            hi = np.full(n, EQ18_DUAL_MAX)
        structure = (("lam", (n_o,)), ("mu", (n_v,)))
    return AuxLayout(n, lo, hi, structure)


def residual_counts(kind, n_v: int, n_o: int) -> tuple[int, int]:
    """``(n_ineq, n_eq)`` of one vehicle/obstacle block."""
    kind = FormulationKind.parse(kind)
    return {
        FormulationKind.EQ14: (n_o * n_o + n_v * n_v, n_o + n_v),
        FormulationKind.EQ16: (n_v + n_o + 1, 1),
        FormulationKind.EQ17: (n_v + n_o, 1),
        FormulationKind.EQ18: (1, 2),
        FormulationKind.EQ19: (2, 2),
        FormulationKind.EQ21: (2, 2),
    }[kind]


def halfspaces_of_vertices(V):
    """Unit outward normals and offsets of a counter-clockwise vertex cycle.

    Row ``i`` is the edge through vertices ``i - 1`` and ``i``.
    """
    edges = V - jnp.roll(V, 1, axis=0)
    n = jnp.stack([edges[:, 1], -edges[:, 0]], axis=1)
    n = n / jnp.sqrt(jnp.sum(n * n, axis=1, keepdims=True))
    return n, jnp.sum(n * V, axis=1)


def _check(name, arr, shape):
    if tuple(arr.shape) != tuple(shape):
        raise ShapeMismatch(f"{name} has shape {tuple(arr.shape)}, expected {tuple(shape)}")


def point_certificate_feasible(q, P: HalfSpacePolygon, eps_sep: float = DEFAULT_MARGINS.eps_sep):
    """Nonnegative row weights proving that ``q`` lies strictly outside ``P``.

    The witness puts all weight on the most violated row, scaled up when the
    violation is below ``eps_sep`` so that ``(A q - b) @ lam >= eps_sep``.
    """
    r = P.normals @ np.asarray(q, dtype=float) - P.offsets
    i = int(np.argmax(r))
    if r[i] <= CONTAIN_TOL:
        return False, None
    lam = np.zeros_like(r)
    lam[i] = max(1.0, eps_sep / r[i])
    return True, lam


def build_eq14(V, A, b, O, Lam, Om, margins: Margins = DEFAULT_MARGINS) -> ConstraintBlock:
    n_v, n_o = V.shape[0], O.shape[0]
    _check("Lam", Lam, (n_v, n_o))
    _check("Om", Om, (n_o, n_v))
    C, d = halfspaces_of_vertices(V)
    obs_in_vehicle_rows = C @ O.T - d[:, None]  # (n_v, n_o)
    veh_in_obstacle_rows = A @ V.T - b[:, None]  # (n_o, n_v)
    ineq = jnp.concatenate([
        (obs_in_vehicle_rows.T @ Lam).reshape(-1) - margins.eps_sep,
        (veh_in_obstacle_rows.T @ Om).reshape(-1) - margins.eps_sep,
    ])
    eq = jnp.concatenate([jnp.sum(Lam, axis=0) - 1.0, jnp.sum(Om, axis=0) - 1.0])
    return ConstraintBlock(ineq, eq)


def build_eq16(V, O, lam, mu1, mu2, margins: Margins = DEFAULT_MARGINS) -> ConstraintBlock:
    _check("lam", lam, (2,))
    ineq = jnp.concatenate([
        V @ lam - mu1 - margins.eps_sep,
        mu2 - O @ lam - margins.eps_sep,
        jnp.reshape(mu1 - mu2 - margins.eps_gap, (1,)),
    ])
    return ConstraintBlock(ineq, jnp.reshape(lam @ lam - 1.0, (1,)))


def build_eq17(V, O, lam, mu, margins: Margins = DEFAULT_MARGINS) -> ConstraintBlock:
    _check("lam", lam, (2,))
    ineq = jnp.concatenate([V @ lam - mu - margins.eps_sep, mu - O @ lam - margins.eps_sep])
    return ConstraintBlock(ineq, jnp.reshape(lam @ lam - 1.0, (1,)))


def build_eq18(C, d, A, b, lam, mu, margins: Margins = DEFAULT_MARGINS) -> ConstraintBlock:
    _check("lam", lam, (A.shape[0],))
    _check("mu", mu, (C.shape[0],))
    ineq = jnp.reshape(-(b @ lam) - d @ mu - margins.d_safe, (1,))
    return ConstraintBlock(ineq, A.T @ lam + C.T @ mu)


def build_eq19(C, d, A, b, lam, mu, margins: Margins = DEFAULT_MARGINS) -> ConstraintBlock:
    base = build_eq18(C, d, A, b, lam, mu, margins)
    w = A.T @ lam
    ineq = jnp.concatenate([base.ineq, jnp.reshape(1.0 - w @ w, (1,))])
    return ConstraintBlock(ineq, base.eq)


def build_eq21(C0, d0, A, b, R, T, lam, mu, margins: Margins = DEFAULT_MARGINS) -> ConstraintBlock:
    _check("lam", lam, (A.shape[0],))
    _check("mu", mu, (C0.shape[0],))
    w = A.T @ lam
    ineq = jnp.stack([
        -(d0 @ mu) + (A @ T - b) @ lam - margins.d_safe,
        1.0 - w @ w,
    ])
    return ConstraintBlock(ineq, C0.T @ mu + R.T @ w)


def build_containment(V, E, f) -> ConstraintBlock:
    """``f_r - e_r @ v_i >= 0`` for every environment row r and vertex i."""
    return ConstraintBlock((f[:, None] - E @ V.T).reshape(-1), jnp.zeros((0,)))


def build_block(kind, pose, aux, A, b, O, body_vertices, margins: Margins = DEFAULT_MARGINS) -> ConstraintBlock:
    """Dispatch on ``kind`` with the vehicle given by its pose and body corners.

    ``aux`` is the flat auxiliary vector in :func:`aux_layout` order.
    """
    kind = FormulationKind.parse(kind)
    n_v, n_o = body_vertices.shape[0], O.shape[0]
    if aux.shape != (aux_count(kind, n_v, n_o),):
        raise ShapeMismatch(f"aux has shape {aux.shape}, expected ({aux_count(kind, n_v, n_o)},)")
    c, s = jnp.cos(pose[2]), jnp.sin(pose[2])
    R = jnp.stack([jnp.stack([c, -s]), jnp.stack([s, c])])
    T = jnp.stack([pose[0], pose[1]])
    V = body_vertices @ R.T + T
    if kind is FormulationKind.EQ14:
        Lam = aux[: n_v * n_o].reshape(n_v, n_o)
        Om = aux[n_v * n_o:].reshape(n_o, n_v)
        return build_eq14(V, A, b, O, Lam, Om, margins)
    if kind is FormulationKind.EQ16:
        return build_eq16(V, O, aux[:2], aux[2], aux[3], margins)
    if kind is FormulationKind.EQ17:
        return build_eq17(V, O, aux[:2], aux[2], margins)
    lam, mu = aux[:n_o], aux[n_o:]
    if kind is FormulationKind.EQ21:
        C0, d0 = halfspaces_of_vertices(body_vertices)
        return build_eq21(C0, d0, A, b, R, T, lam, mu, margins)
    C, d = halfspaces_of_vertices(V)
    if kind is FormulationKind.EQ18:
        return build_eq18(C, d, A, b, lam, mu, margins)
    return build_eq19(C, d, A, b, lam, mu, margins)


def initial_aux(kind, body: HalfSpacePolygon, obstacle: HalfSpacePolygon) -> np.ndarray:
    """Warm-start values for one pair given the guessed body polygon.

    Separating-line formulations start from the SAT axis (or the direction
    between centroids when the guess overlaps), the vertex certificates from
    uniform columns and the dual formulations from an LP certificate (a small
    constant when the guessed pair overlaps).
    """
    from .geometry import sat_disjoint

    kind = FormulationKind.parse(kind)
    n_v, n_o = body.n_edges, obstacle.n_edges
    if kind is FormulationKind.EQ14:
        return np.concatenate([np.full(n_v * n_o, 1.0 / n_v), np.full(n_o * n_v, 1.0 / n_o)])
    if kind in (FormulationKind.EQ16, FormulationKind.EQ17):
        ok, axis = sat_disjoint(body, obstacle)
        if ok:
            lam = axis[0]
        else:
            lam = body.vertices.mean(axis=0) - obstacle.vertices.mean(axis=0)
            lam = lam / max(np.linalg.norm(lam), 1e-12)
        lo = float(np.min(body.vertices @ lam))
        hi = float(np.max(obstacle.vertices @ lam))
        mid = 0.5 * (lo + hi)
        if kind is FormulationKind.EQ17:
            return np.array([lam[0], lam[1], mid])
        quarter = 0.25 * (lo - hi) if ok else 0.5e-3
        return np.array([lam[0], lam[1], mid + quarter, mid - quarter])
    cert = dual_certificate(body, obstacle)
    if cert is None:
        return np.full(n_o + n_v, 1e-2)
    if kind is FormulationKind.EQ18:
        cert = cert * min(1.0, 0.5 * EQ18_DUAL_MAX / max(float(cert.max()), 1e-12))
    else:
        cert = 0.9 * cert  # strictly inside the norm ball
    return cert + 1e-4


def dual_certificate(body: HalfSpacePolygon, obstacle: HalfSpacePolygon):
    """Farkas certificate ``(lam, mu) >= 0`` with ``|A^T lam| = 1``, or ``None``.

    Maximises ``-b^T lam - d^T mu`` subject to ``A^T lam + C^T mu = 0`` and a
    box on ``A^T lam``; a positive optimum proves the pair disjoint.
    """
    from scipy.optimize import linprog

    A, b = obstacle.normals, obstacle.offsets
    C, d = body.normals, body.offsets
    n_o, n_v = A.shape[0], C.shape[0]
    cost = -np.concatenate([-b, -d])
    A_eq = np.hstack([A.T, C.T])
    A_ub = np.vstack([np.hstack([A.T, np.zeros((2, n_v))]), np.hstack([-A.T, np.zeros((2, n_v))])])
    res = linprog(cost, A_ub=A_ub, b_ub=np.ones(4), A_eq=A_eq, b_eq=np.zeros(2),
                  bounds=(0, None), method="highs")
    if res.status != 0 or -res.fun <= 0:
        return None
    x = res.x
    scale = np.linalg.norm(A.T @ x[:n_o])
    if scale <= 1e-12:
        return None
    return x / scale
