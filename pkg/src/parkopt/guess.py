"""Initial guesses for the parking NLP.

Two of them come from smaller NLPs on the pose-only kinematic model driven
by ``(v, delta)``: one ignoring the obstacles and one with dual-certificate
collision constraints.  The third is a hybrid A* path (see
:mod:`parkopt.hybrid_astar`).  Every guess is lifted to the full state
``(x, y, theta, v, delta)`` with rate controls ``(a, omega)`` from finite
differences.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .formulations import FormulationKind
from .geometry import continuous_collision_check
from .hybrid_astar import NoPathFound  # noqa: F401 - re-exported
from .scenarios import Scenario
from .solver import SolveReport, SolverOptions, solve
from .transcription import TF_BOUNDS, NlpProblem, check_boundary

# safety margin (m) around the body used by the collision-free guess
GUESS_CLEARANCE = 0.1


class GuessSolveFailed(RuntimeError):
    def __init__(self, message, report: SolveReport | None = None):
        super().__init__(message)
        self.report = report


class GuessKind(enum.Enum):
    LINEAR = "linear"
    SIMPLIFIED = "simplified"
    COLLISION_FREE = "collision-free"
    HYBRID_ASTAR = "hybrid-astar"

    @classmethod
    def parse(cls, value) -> "GuessKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower().replace("_", "-"))


@dataclass
class GuessTrajectory:
    """A full-model guess plus the pose-level path it was built from.

    ``path_poses`` is the underlying pose path, sampled on a grid that is an
    integer multiple of ``kf``.  When ``path_controls`` is given it holds the
    ``(v, delta)`` held over each path interval, and re-integrating the
    kinematic model with them gives the continuous motion; otherwise the path
    samples are dense enough to be checked directly.
    """

    kind: GuessKind
    states: np.ndarray  # (kf+1, 5)
    controls: np.ndarray  # (kf, 2) = (a, omega)
    tf: float
    path_poses: np.ndarray | None = None
    path_controls: np.ndarray | None = None
    report: SolveReport | None = None

    @property
    def kf(self) -> int:
        return self.controls.shape[0]

    def initial_point(self, problem: NlpProblem) -> np.ndarray:
        """Decision vector for ``problem`` with geometry-seeded auxiliaries."""
        if problem.kf != self.kf:
            raise ValueError(f"guess has kf={self.kf}, problem has kf={problem.kf}")
        return problem.initial_point(self.states, self.controls, self.tf)

    def fine_poses(self, refine: int, wheelbase: float) -> np.ndarray:
        """Poses along the path, ``refine`` sub-steps per path interval."""
        from .vehicle import rk4, simplified_dynamics

        if self.path_poses is None:
            return self.states
        poses = np.asarray(self.path_poses, dtype=float)
        if self.path_controls is not None and refine > 1:
            M = self.path_controls.shape[0]
            h = self.tf / M / refine
            out = [poses[0, :3]]
            for k in range(M):
                xi = poses[k, :3]
                for _ in range(refine):
                    xi = np.asarray(rk4(simplified_dynamics, xi, self.path_controls[k], h, wheelbase))
                    out.append(xi)
            poses = np.array(out)
        full = np.zeros((poses.shape[0], 5))
        full[:, :3] = poses[:, :3]
        return full

    def is_collision_free(self, scenario: Scenario, refine: int = 5) -> bool:
        poses = self.fine_poses(refine, scenario.vehicle.wheelbase)
        return continuous_collision_check(poses, scenario, refine=1)

    def to_json(self) -> dict:
        from .bench import trajectory_to_json
        return trajectory_to_json(self.states, self.controls, self.tf, label=self.kind.value)


def nominal_tf(distance: float, v_max: float) -> float:
    return float(np.clip(distance / (0.5 * v_max), *TF_BOUNDS))


def lift(scenario: Scenario, poses, path_controls, tf, kind: GuessKind, kf: int | None = None,
         report=None, keep_controls: bool = True) -> GuessTrajectory:
    """Full-state guess at ``kf + 1`` samples from a pose path.

    The path has ``M = m * kf`` intervals with ``(v, delta)`` held on each.
    Sample ``k`` takes the pose at path index ``m k`` and the speed and
    steering of the path interval starting there (the final sample takes the
    goal values); ``a`` and ``omega`` are forward differences of those,
    clipped to the control bounds.
    """
    poses = np.asarray(poses, dtype=float)
    pc = np.asarray(path_controls, dtype=float)
    M = pc.shape[0]
    kf = M if kf is None else kf
    if M % kf:
        raise ValueError("path intervals must be a multiple of kf")
    m = M // kf
    b = scenario.bounds
    states = np.zeros((kf + 1, 5))
    states[:, :3] = poses[::m, :3]
    held = pc.reshape(kf, m, 2).mean(axis=1)
    states[:-1, 3] = np.clip(held[:, 0], -b.v_max, b.v_max)
    states[:-1, 4] = np.clip(held[:, 1], -b.delta_max, b.delta_max)
    states[0] = scenario.init
    states[-1] = scenario.final
    h = tf / kf
    rates = np.diff(states[:, 3:], axis=0) / h
    controls = np.clip(rates, b.control_lower, b.control_upper)
    return GuessTrajectory(kind, states, controls, float(tf), poses[:, :3].copy(),
                           pc.copy() if keep_controls else None, report)


def linear_interp_guess(scenario: Scenario, kf: int = 20) -> GuessTrajectory:
    """Componentwise interpolation of the boundary states with zero controls."""
    states = np.linspace(scenario.init, scenario.final, kf + 1)
    dist = float(np.linalg.norm(scenario.final[:2] - scenario.init[:2]))
    tf = nominal_tf(dist, scenario.bounds.v_max)
    return GuessTrajectory(GuessKind.LINEAR, states, np.zeros((kf, 2)), tf)


def _interval_controls(poses, tf, wheelbase, delta_max):
    """Speed and steering that roughly connect consecutive poses."""
    M = poses.shape[0] - 1
    h = tf / M
    d = np.diff(poses[:, :2], axis=0)
    ds = np.linalg.norm(d, axis=1)
    heading = np.arctan2(d[:, 1], d[:, 0])
    sign = np.where(np.cos(heading - poses[:-1, 2]) < 0, -1.0, 1.0)
    dth = np.diff(poses[:, 2])
    curv = np.divide(dth, ds, out=np.zeros_like(ds), where=ds > 1e-9)
    delta = np.clip(np.arctan(wheelbase * curv * sign), -delta_max, delta_max)
    return np.column_stack([sign * ds / h, delta])


def _solve_pose_nlp(scenario, kind, M, seed_poses, seed_controls, tf, p, opts, clearance):
    prob = NlpProblem(scenario, kind, M, model="simplified", p=p, clearance=clearance)
    if kind is None:
        z0 = prob.pack(seed_poses[:, :3], seed_controls, tf)
    else:
        z0 = prob.initial_point(seed_poses[:, :3], seed_controls, tf)
    rep = solve(prob, z0, opts)
    return prob, rep


def _check_p(p, oversample):
    if p <= 0:
        raise ValueError("p must be positive")
    if oversample < 1:
        raise ValueError("oversample must be >= 1")


def _free_path(scenario, M, p, opts):
    lin = linear_interp_guess(scenario, M)
    # speed and steering that follow the interpolated poses; an all-zero seed
    # leaves the solver at a stationary point where the car does not move
    seed_u = _interval_controls(lin.states, lin.tf, scenario.vehicle.wheelbase,
                                scenario.bounds.delta_max)
    prob, rep = _solve_pose_nlp(scenario, None, M, lin.states, seed_u, lin.tf, p, opts, 0.0)
    if not rep.optimal:
        raise GuessSolveFailed(f"simplified-model guess ended with status {rep.status}", rep)
    return prob.unpack(rep.z), rep


def simplified_model_guess(scenario: Scenario, kf: int = 20, p: float = 1.0,
                           opts: SolverOptions | None = None, oversample: int = 1) -> GuessTrajectory:
    """Pose-only NLP inside the environment, obstacles ignored.

    With ``oversample = m`` the NLP runs on ``m * kf`` intervals and every
    ``m``-th sample is kept.
    """
    _check_p(p, oversample)
    T, rep = _free_path(scenario, oversample * kf, p, opts)
    return lift(scenario, T.states, T.controls, T.tf, GuessKind.SIMPLIFIED, kf, rep)


def collision_free_guess(scenario: Scenario, kf: int = 20, p: float = 1.0,
                         opts: SolverOptions | None = None,
                         clearance: float = GUESS_CLEARANCE, oversample: int = 3) -> GuessTrajectory:
    """Pose-only NLP with dual-certificate (Farkas) collision constraints.

    The obstacle-free solution often cuts through obstacles, where the
    certificate multipliers are all zero and carry no gradient.  A
    single-hyperplane pass first pushes the path out of the obstacles and its
    solution seeds the certificate formulation.  The NLPs run on
    ``oversample * kf`` intervals so that the body is also kept clear between
    the samples that are finally kept.
    """
    _check_p(p, oversample)
    check_boundary(scenario)
    M = oversample * kf
    T, _ = _free_path(scenario, M, p, opts)
    poses, pc, tf = T.states, T.controls, T.tf
    if scenario.obstacles:
        pre_prob, pre = _solve_pose_nlp(scenario, FormulationKind.EQ17, M, poses, pc, tf, p, opts, clearance)
        if pre.optimal:
            T = pre_prob.unpack(pre.z)
            poses, pc, tf = T.states, T.controls, T.tf
    prob, rep = _solve_pose_nlp(scenario, FormulationKind.EQ18, M, poses, pc, tf, p, opts, clearance)
    if not rep.optimal:
        raise GuessSolveFailed(f"collision-free guess ended with status {rep.status}", rep)
    T = prob.unpack(rep.z)
    return lift(scenario, T.states, T.controls, T.tf, GuessKind.COLLISION_FREE, kf, rep)


def hybrid_astar_guess(scenario: Scenario, kf: int = 20, params=None) -> GuessTrajectory:
    """Hybrid A* path resampled to ``kf + 1`` poses."""
    from .hybrid_astar import hybrid_astar_search

    check_boundary(scenario)
    path = hybrid_astar_search(scenario, params)
    poses = path.resample(kf + 1)
    tf = nominal_tf(path.length, scenario.bounds.v_max)
    pc = _interval_controls(poses, tf, scenario.vehicle.wheelbase, scenario.bounds.delta_max)
    g = lift(scenario, poses, pc, tf, GuessKind.HYBRID_ASTAR, kf, keep_controls=False)
    g.path_poses = path.dense_poses()
    return g


def make_guess(kind, scenario: Scenario, kf: int = 20, opts: SolverOptions | None = None) -> GuessTrajectory:
    kind = GuessKind.parse(kind)
    if kind is GuessKind.LINEAR:
        return linear_interp_guess(scenario, kf)
    if kind is GuessKind.SIMPLIFIED:
        return simplified_model_guess(scenario, kf, opts=opts)
    if kind is GuessKind.COLLISION_FREE:
        return collision_free_guess(scenario, kf, opts=opts)
    return hybrid_astar_guess(scenario, kf)
