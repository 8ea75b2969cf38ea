"""Free-final-time multiple-shooting NLP for the parking problem.

Time is rescaled to ``tau in [0, 1]`` with ``t = tf * tau``; the horizon is
split into ``kf`` equal intervals with piecewise-constant controls and the
scaled dynamics are integrated with one RK4 step per interval.

Decision vector layout::

    [ xi(0) .. xi(kf) | u(0) .. u(kf-1) | tf | aux(k=1, obs 0) .. aux(k=kf, obs N-1) ]

Constraints: shooting defects, initial/terminal equalities, environment
containment and one collision block per (stage, obstacle) for ``k = 1..kf``.
Inequalities are feasible when ``>= 0``; variable bounds are kept apart as
box constraints.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass

import jax.numpy as jnp
import numpy as np
import scipy.sparse as sp

from .formulations import (FormulationKind, Margins, DEFAULT_MARGINS, aux_layout, build_block,
                           build_containment, initial_aux, residual_counts)
from .geometry import polygon_from_vertices, sat_disjoint
from .scenarios import Scenario
from .stages import StageGroup
from .vehicle import body_polygon, dynamics, posed_vertices, rk4, simplified_dynamics

TF_BOUNDS = (1.0, 300.0)


class InfeasibleBoundary(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


# Residual kernels.  They are module level so that compiled derivatives are
# shared by every problem with the same shapes.

def _defect_full(x, data, param):
    xi, u, tf, nxt = x[:5], x[5:7], x[7], x[8:13]
    return rk4(dynamics, xi, u, tf * data["dtau"], data["L"]) - nxt


def _defect_simple(x, data, param):
    xi, u, tf, nxt = x[:3], x[3:5], x[5], x[6:9]
    return rk4(simplified_dynamics, xi, u, tf * data["dtau"], data["L"]) - nxt


def _boundary(x, data, param):
    return x - data["target"]


def _stage_body(data, param):
    # body corners grown outwards by this stage's clearance
    return data["V0"] + param[0] * data["grow"]


def _containment(x, data, param):
    c, s = jnp.cos(x[2]), jnp.sin(x[2])
    R = jnp.stack([jnp.stack([c, -s]), jnp.stack([s, c])])
    V = _stage_body(data, param) @ R.T + x[:2]
    return build_containment(V, data["E"], data["f"]).ineq


def _make_collision(kind: FormulationKind):
    def collision(x, data, param):
        margins = Margins(data["eps_sep"], data["eps_gap"], data["d_safe"])
        blk = build_block(kind, x[:3], x[3:], data["A"], data["b"], data["O"],
                          _stage_body(data, param), margins)
        return jnp.concatenate([blk.ineq, blk.eq])
    collision.__name__ = f"collision_{kind.value}"
    return collision


_COLLISION_FNS = {kind: _make_collision(kind) for kind in FormulationKind}


@dataclass
class Trajectory:
    states: np.ndarray  # (kf + 1, nx)
    controls: np.ndarray  # (kf, 2)
    tf: float
    aux: np.ndarray | None = None  # (kf, n_obstacles, n_aux) when uniform

    @property
    def kf(self) -> int:
        return self.controls.shape[0]


class NlpProblem:
    """Assembled NLP with objective, residuals and sparse derivatives.

    ``model`` is ``"full"`` for the 5-state vehicle with controls
    ``(a, omega)`` or ``"simplified"`` for the pose-only model driven by
    ``(v, delta)``; the latter uses the speed-penalty cost with weight ``p``.
    """

    def __init__(self, scenario: Scenario, kind, kf: int, model: str = "full",
                 margins: Margins = DEFAULT_MARGINS, p: float = 1.0, obstacles=True,
                 clearance: float = 0.0, tf_bounds=TF_BOUNDS):
        if kf < 2:
            raise ValueError("kf must be at least 2")
        self.scenario = scenario
        self.kind = None if kind is None else FormulationKind.parse(kind)
        self.kf = kf
        self.model = model
        self.margins = margins
        self.tf_bounds = (float(tf_bounds[0]), float(tf_bounds[1]))
        if not 0 < self.tf_bounds[0] <= self.tf_bounds[1]:
            raise ValueError("tf bounds must satisfy 0 < lower <= upper")
        self.nx = 5 if model == "full" else 3
        self.nu = 2
        self.dtau = 1.0 / kf
        self.obstacles = tuple(scenario.obstacles) if (obstacles and self.kind is not None) else ()
        veh = scenario.vehicle
        # the constrained body at stage k is the vehicle rectangle grown by
        # clearance[k-1] on every side, which keeps the motion between
        # samples off the obstacles
        clearance = np.broadcast_to(np.asarray(clearance, dtype=float), (kf,)).copy()
        if np.any(clearance < 0):
            raise ValueError("clearance must be non-negative")
        self.clearance = clearance
        self.body_vertices = veh.body_frame_vertices()
        self._grow = np.sign(self.body_vertices - self.body_vertices.mean(axis=0))
        self.n_v = self.body_vertices.shape[0]

        if model == "full":
            P = np.asarray(scenario.weights.P, dtype=float)
        else:
            P = np.array([p, 0.0])
        self.P = P
        self.r = float(scenario.weights.r)

        nx, nu = self.nx, self.nu
        self.i_states = np.arange((kf + 1) * nx).reshape(kf + 1, nx)
        off = (kf + 1) * nx
        self.i_controls = off + np.arange(kf * nu).reshape(kf, nu)
        off += kf * nu
        self.i_tf = off
        off += 1
        self.n_core = off
        self.aux_layouts = [aux_layout(self.kind, self.n_v, o.n_edges) for o in self.obstacles]
        self.i_aux = []  # per obstacle: (kf, n_aux)
        for lay in self.aux_layouts:
            self.i_aux.append(np.zeros((kf, lay.per_pair_count), dtype=np.int64))
        for k in range(kf):
            for n, lay in enumerate(self.aux_layouts):
                self.i_aux[n][k] = off + np.arange(lay.per_pair_count)
                off += lay.per_pair_count
        self.n = off

        self._build_bounds()
        self._build_groups()
        self._build_scatter()

    # ------------------------------------------------------------------ setup
    def _build_bounds(self):
        sc, b = self.scenario, self.scenario.bounds
        lo = np.full(self.n, -np.inf)
        hi = np.full(self.n, np.inf)
        if self.model == "full":
            slo, shi = b.state_lower, b.state_upper
            clo, chi = b.control_lower, b.control_upper
        else:
            slo, shi = b.state_lower[:3], b.state_upper[:3]
            clo = np.array([-b.v_max, -b.delta_max])
            chi = np.array([b.v_max, b.delta_max])
        lo[self.i_states] = slo
        hi[self.i_states] = shi
        lo[self.i_controls] = clo
        hi[self.i_controls] = chi
        lo[self.i_tf], hi[self.i_tf] = self.tf_bounds
        for n, lay in enumerate(self.aux_layouts):
            lo[self.i_aux[n]] = lay.lower_bounds
            hi[self.i_aux[n]] = lay.upper_bounds
        self.x_lower, self.x_upper = lo, hi

    def _build_groups(self):
        sc, kf, nx = self.scenario, self.kf, self.nx
        L = sc.vehicle.wheelbase
        groups = []
        idx = np.column_stack([self.i_states[:-1], self.i_controls,
                               np.full(kf, self.i_tf), self.i_states[1:]])
        fn = _defect_full if self.model == "full" else _defect_simple
        groups.append(StageGroup("dynamics", fn, idx, {"dtau": self.dtau, "L": L}, np.ones(nx, bool)))
        target = np.concatenate([sc.init[:nx], sc.final[:nx]])
        groups.append(StageGroup("boundary", _boundary,
                                 np.concatenate([self.i_states[0], self.i_states[-1]])[None],
                                 {"target": jnp.asarray(target)}, np.ones(2 * nx, bool)))
        env = sc.environment
        body = {"V0": jnp.asarray(self.body_vertices), "grow": jnp.asarray(self._grow)}
        cont = {"E": jnp.asarray(env.normals), "f": jnp.asarray(env.offsets), **body}
        stage_c = self.clearance[:, None]
        groups.append(StageGroup("containment", _containment, self.i_states[1:, :3], cont,
                                 np.zeros(env.n_edges * self.n_v, bool), stage_c))
        m = self.margins
        for n, obs in enumerate(self.obstacles):
            n_in, n_eq = residual_counts(self.kind, self.n_v, obs.n_edges)
            data = {"A": jnp.asarray(obs.normals), "b": jnp.asarray(obs.offsets),
                    "O": jnp.asarray(obs.vertices), **body,
                    "eps_sep": m.eps_sep, "eps_gap": m.eps_gap, "d_safe": m.d_safe}
            idx = np.column_stack([self.i_states[1:, :3], self.i_aux[n]])
            mask = np.concatenate([np.zeros(n_in, bool), np.ones(n_eq, bool)])
            groups.append(StageGroup(f"collision[{n}]", _COLLISION_FNS[self.kind], idx, data, mask,
                                     stage_c))
        self.groups = groups

    def _build_scatter(self):
        eq_off = ineq_off = 0
        self._scatter = []
        jer, jec, jir, jic, hr, hc = [], [], [], [], [], []
        for g in self.groups:
            K, nl = g.index.shape
            eq_loc = np.flatnonzero(g.is_eq)
            in_loc = np.flatnonzero(~g.is_eq)
            me, mi = eq_loc.size, in_loc.size
            eq_rows = eq_off + np.arange(K * me).reshape(K, me)
            in_rows = ineq_off + np.arange(K * mi).reshape(K, mi)
            eq_off += K * me
            ineq_off += K * mi
            self._scatter.append((eq_loc, in_loc, eq_rows, in_rows))
            jer.append(np.repeat(eq_rows[:, :, None], nl, axis=2).ravel())
            jec.append(np.repeat(g.index[:, None, :], me, axis=1).ravel())
            jir.append(np.repeat(in_rows[:, :, None], nl, axis=2).ravel())
            jic.append(np.repeat(g.index[:, None, :], mi, axis=1).ravel())
            hr.append(np.repeat(g.index[:, :, None], nl, axis=2).ravel())
            hc.append(np.repeat(g.index[:, None, :], nl, axis=1).ravel())
        self.m_eq, self.m_ineq = eq_off, ineq_off
        self._jeq_rc = (np.concatenate(jer), np.concatenate(jec))
        self._jin_rc = (np.concatenate(jir), np.concatenate(jic))
        u = self.i_controls.ravel()
        t = np.full(u.size, self.i_tf)
        obj_r = np.concatenate([u, u, t])
        obj_c = np.concatenate([u, t, u])
        self._h_rc = (np.concatenate(hr + [obj_r]), np.concatenate(hc + [obj_c]))

    # -------------------------------------------------------------- counts
    @property
    def VN(self) -> int:
        return self.n

    @property
    def CN(self) -> int:
        """General constraints: equality plus inequality residuals (bounds excluded)."""
        return self.m_eq + self.m_ineq

    @property
    def CN_with_bounds(self) -> int:
        return self.CN + int(np.isfinite(self.x_lower).sum() + np.isfinite(self.x_upper).sum())

    # ----------------------------------------------------------- evaluation
    def _check(self, z):
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n,):
            raise LengthMismatch(f"decision vector has length {z.size}, expected {self.n}")
        return z

    def objective(self, z) -> float:
        z = self._check(z)
        u = z[self.i_controls]
        tf = z[self.i_tf]
        energy = float(np.sum(u * u * self.P[None, :])) * self.dtau
        return float(tf * (self.r + energy))

    def gradient(self, z) -> np.ndarray:
        z = self._check(z)
        u = z[self.i_controls]
        tf = z[self.i_tf]
        g = np.zeros(self.n)
        g[self.i_controls] = 2.0 * tf * self.dtau * self.P[None, :] * u
        g[self.i_tf] = self.r + float(np.sum(u * u * self.P[None, :])) * self.dtau
        return g

    def constraints(self, z):
        """``(eq, ineq)`` residual vectors."""
        z = self._check(z)
        eq = np.empty(self.m_eq)
        ineq = np.empty(self.m_ineq)
        for g, (eq_loc, in_loc, eq_rows, in_rows) in zip(self.groups, self._scatter):
            vals = g.values(z)
            eq[eq_rows] = vals[:, eq_loc]
            ineq[in_rows] = vals[:, in_loc]
        return eq, ineq

    def jacobians(self, z):
        """Sparse ``(J_eq, J_ineq)`` in CSR format."""
        z = self._check(z)
        de, di = [], []
        for g, (eq_loc, in_loc, _, _) in zip(self.groups, self._scatter):
            blocks = g.jacobian_blocks(z)
            de.append(blocks[:, eq_loc, :].ravel())
            di.append(blocks[:, in_loc, :].ravel())
        Je = sp.csr_matrix((np.concatenate(de), self._jeq_rc), shape=(self.m_eq, self.n))
        Ji = sp.csr_matrix((np.concatenate(di), self._jin_rc), shape=(self.m_ineq, self.n))
        return Je, Ji

    def hessian(self, z, y_eq, y_ineq, obj_factor: float = 1.0):
        """Hessian of ``obj_factor * f + y_eq @ c_eq + y_ineq @ c_ineq``."""
        z = self._check(z)
        data = []
        for g, (eq_loc, in_loc, eq_rows, in_rows) in zip(self.groups, self._scatter):
            w = np.zeros((g.n_blocks, g.m_local))
            w[:, eq_loc] = y_eq[eq_rows]
            w[:, in_loc] = y_ineq[in_rows]
            data.append(g.hessian_blocks(z, w).ravel())
        u = z[self.i_controls]
        tf = z[self.i_tf]
        duu = obj_factor * 2.0 * tf * self.dtau * np.broadcast_to(self.P, u.shape).ravel()
        dut = obj_factor * 2.0 * self.dtau * (self.P[None, :] * u).ravel()
        data.append(np.concatenate([duu, dut, dut]))
        return sp.csr_matrix((np.concatenate(data), self._h_rc), shape=(self.n, self.n))

    def warmup(self, z=None) -> None:
        """Evaluate every callback once so that compilation is not timed later."""
        z = self.x_lower.clip(0) if z is None else np.asarray(z, dtype=float)
        z = np.clip(np.where(np.isfinite(z), z, 0.0), self.x_lower, self.x_upper)
        self.objective(z)
        self.gradient(z)
        self.constraints(z)
        self.jacobians(z)
        self.hessian(z, np.zeros(self.m_eq), np.zeros(self.m_ineq))

    @contextmanager
    def scaled_control_bounds(self, factor: float):
        """Temporarily widen the control bounds by ``factor``."""
        lo, hi = self.x_lower.copy(), self.x_upper.copy()
        self.x_lower[self.i_controls] *= factor
        self.x_upper[self.i_controls] *= factor
        try:
            yield self
        finally:
            self.x_lower, self.x_upper = lo, hi

    # evaluation entry points under their descriptive names
    def eval_objective(self, z) -> float:
        return self.objective(z)

    def eval_residuals(self, z):
        return self.constraints(z)

    def eval_jacobians(self, z):
        """Objective gradient and constraint Jacobians ``(g, J_eq, J_ineq)``."""
        Je, Ji = self.jacobians(z)
        return self.gradient(z), Je, Ji

    def group_rows(self, name: str):
        """Row indices ``(eq_rows, ineq_rows)`` of a named group, shaped ``(K, m)``."""
        for g, (_, _, eq_rows, in_rows) in zip(self.groups, self._scatter):
            if g.name == name:
                return eq_rows, in_rows
        raise KeyError(name)

    # --------------------------------------------------------------- packing
    def pack(self, states, controls, tf, aux=None) -> np.ndarray:
        z = np.zeros(self.n)
        z[self.i_states] = np.asarray(states, dtype=float)[:, : self.nx]
        z[self.i_controls] = controls
        z[self.i_tf] = tf
        if aux is not None:
            for n in range(len(self.obstacles)):
                z[self.i_aux[n]] = aux[n]
        return z

    def unpack(self, z) -> Trajectory:
        z = self._check(z)
        aux = [z[ia] for ia in self.i_aux] if self.i_aux else None
        return Trajectory(z[self.i_states].copy(), z[self.i_controls].copy(), float(z[self.i_tf]), aux)

    def initial_point(self, states, controls, tf) -> np.ndarray:
        """Decision vector from a state/control guess with geometry-seeded auxiliaries."""
        states = np.asarray(states, dtype=float)
        aux = []
        full = np.zeros((states.shape[0], 5))
        full[:, : min(5, states.shape[1])] = states[:, :5]
        for obs in self.obstacles:
            aux.append(np.array([initial_aux(self.kind, self.stage_body(full[k], k), obs)
                                 for k in range(1, self.kf + 1)]))
        return self.pack(states, controls, tf, aux)

    def stage_body(self, xi, k: int):
        """Constrained (grown) body polygon of stage ``k`` at state ``xi``."""
        V = self.body_vertices + self.clearance[k - 1] * self._grow
        return polygon_from_vertices(np.asarray(posed_vertices(np.asarray(xi[:3]), V)), "ccw")


def check_boundary(scenario: Scenario) -> None:
    for label, xi in (("initial", scenario.init), ("final", scenario.final)):
        body = body_polygon(xi, scenario.vehicle)
        for j, obs in enumerate(scenario.obstacles):
            if not sat_disjoint(body, obs)[0]:
                raise InfeasibleBoundary(f"{label} body overlaps obstacle {j}")


def assemble(scenario: Scenario, kind, kf: int = 20, margins: Margins = DEFAULT_MARGINS,
             clearance: float = 0.0) -> NlpProblem:
    """Full-model NLP for one collision formulation."""
    check_boundary(scenario)
    return NlpProblem(scenario, kind, kf, "full", margins, clearance=clearance)


def expected_vn(kf: int, n_obstacle_edges, kind, n_v: int = 4) -> int:
    from .formulations import aux_count
    return 5 * (kf + 1) + 2 * kf + 1 + kf * sum(aux_count(kind, n_v, n_o) for n_o in n_obstacle_edges)
