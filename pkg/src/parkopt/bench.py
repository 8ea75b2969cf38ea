"""Benchmark harness: run the (scenario, formulation, guess) matrix.

Every cell builds the full NLP, seeds it from the requested guess and
solves it in two passes.  The first pass widens the bounds on the rate
controls ``(a, omega)``; the guesses come from a model without rate limits
and are far from satisfying the tight steering-rate bound, and starting
from them directly tends to end in slow local solutions whose long
intervals cut obstacle corners.  The second pass restores the true bounds
and starts from the first solution.  Solver wall time of both passes is
reported as ``ctime``.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .formulations import ALL_KINDS, FormulationKind
from .geometry import continuous_collision_check
from .guess import GuessKind, GuessSolveFailed, NoPathFound, make_guess
from .scenarios import SCENARIO_NAMES, Scenario, get_scenario
from .solver import OPTIMAL, SolverOptions, SolveReport, solve
from .transcription import TF_BOUNDS, NlpProblem, check_boundary
from .vehicle import body_vertices_batch

CSV_HEADER = ["scenario", "formulation", "guess", "status", "J", "TS", "tf_s", "ctime_ms",
              "iters", "VN", "CN", "verified"]
DEFAULT_GUESSES = (GuessKind.SIMPLIFIED, GuessKind.COLLISION_FREE, GuessKind.HYBRID_ASTAR)
# body growth (m) applied at every constrained sample of the full problem
DEFAULT_CLEARANCE = 0.1
# widening of the rate-control bounds in the first solve pass
DEFAULT_CONTINUATION = 4.0
TERMINAL_TOL = 1e-3


@dataclass
class RunSpec:
    scenarios: tuple = SCENARIO_NAMES
    formulations: tuple = ALL_KINDS
    guesses: tuple = DEFAULT_GUESSES
    kf: int = 20
    solver: SolverOptions = field(default_factory=SolverOptions)
    out_dir: str | None = None
    refine: int = 10
    clearance: float = DEFAULT_CLEARANCE
    continuation: float = DEFAULT_CONTINUATION
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.scenarios, (str, Scenario)):
            self.scenarios = (self.scenarios,)
        self.scenarios = tuple(self.scenarios)
        self.formulations = tuple(FormulationKind.parse(f) for f in _as_tuple(self.formulations))
        self.guesses = tuple(GuessKind.parse(g) for g in _as_tuple(self.guesses))
        if not self.scenarios or not self.formulations or not self.guesses:
            raise ValueError("scenarios, formulations and guesses must be non-empty")
        if self.kf < 2:
            raise ValueError("kf must be at least 2")
        if self.refine < 1:
            raise ValueError("refine must be >= 1")
        if self.continuation < 1:
            raise ValueError("continuation factor must be >= 1")


def _as_tuple(v):
    return (v,) if isinstance(v, (str, FormulationKind, GuessKind)) else tuple(v)


@dataclass
class BenchRecord:
    scenario: str
    formulation: str
    guess: str
    status: str
    J: float
    TS: float
    tf_s: float
    ctime_ms: float
    iters: int
    VN: int
    CN: int
    verified: bool

    def row(self) -> list:
        def num(x, fmt):
            return "" if x is None or not np.isfinite(x) else format(x, fmt)
        return [self.scenario, self.formulation, self.guess, self.status, num(self.J, ".6f"),
                num(self.TS, ".6f"), num(self.tf_s, ".4f"), num(self.ctime_ms, ".1f"),
                self.iters, self.VN, self.CN, str(self.verified).lower()]


@dataclass
class CellResult:
    record: BenchRecord
    states: np.ndarray | None = None
    controls: np.ndarray | None = None
    tf: float | None = None
    report: SolveReport | None = None


def compute_metrics(states, controls, tf, weights) -> tuple[float, float, float]:
    """``(J, TS, tf)`` recomputed from the trajectory.

    ``J = tf * (r + mean_k u_k' P u_k)`` and ``TS = sum_k a_k^2 + omega_k^2``.
    """
    u = np.asarray(controls, dtype=float)
    P = np.asarray(weights.P, dtype=float)
    tf = float(tf)
    J = tf * (weights.r + float(np.mean(np.sum(P * u * u, axis=1))))
    TS = float(np.sum(u * u))
    return J, TS, tf


def _merge(first: SolveReport, second: SolveReport) -> SolveReport:
    second.iterations += first.iterations
    second.wall_ms += first.wall_ms
    second.log = first.log + second.log
    return second


def solve_cell(scenario: Scenario, kind, guess, kf: int = 20, opts: SolverOptions | None = None,
               clearance: float = DEFAULT_CLEARANCE, continuation: float = DEFAULT_CONTINUATION,
               tf_bounds=TF_BOUNDS):
    """Assemble and solve one cell from a ready guess; returns ``(problem, report)``."""
    opts = opts or SolverOptions()
    check_boundary(scenario)
    prob = NlpProblem(scenario, kind, kf, "full", clearance=clearance, tf_bounds=tf_bounds)
    z0 = guess.initial_point(prob)
    z0[prob.i_tf] = np.clip(z0[prob.i_tf], *prob.tf_bounds)
    prob.warmup(z0)
    if continuation > 1:
        with prob.scaled_control_bounds(continuation):
            first = solve(prob, z0, opts)
        start = first.z if first.optimal else z0
        return prob, _merge(first, solve(prob, start, opts))
    return prob, solve(prob, z0, opts)


def _guess_status(exc) -> str:
    if isinstance(exc, NoPathFound):
        return "NoPathFound"
    return "GuessFailed"


def _run_group(args):
    """All formulations of one (scenario, guess) pair; runs in a worker."""
    sc_ref, gkind, spec = args
    scenario = get_scenario(sc_ref) if not isinstance(sc_ref, Scenario) else sc_ref
    try:
        guess = make_guess(gkind, scenario, spec.kf, spec.solver)
        err = None
    except (GuessSolveFailed, NoPathFound) as exc:
        guess, err = None, exc
    out = []
    for kind in spec.formulations:
        if guess is None:
            prob = NlpProblem(scenario, kind, spec.kf)
            rec = BenchRecord(scenario.name, kind.value, gkind.value, _guess_status(err), np.nan,
                              np.nan, np.nan, 0.0, 0, prob.VN, prob.CN, False)
            out.append(CellResult(rec))
            continue
        prob, rep = solve_cell(scenario, kind, guess, spec.kf, spec.solver, spec.clearance,
                               spec.continuation)
        T = prob.unpack(rep.z)
        J, TS, tf = compute_metrics(T.states, T.controls, T.tf, scenario.weights)
        reached = float(np.max(np.abs(T.states[-1] - scenario.final))) <= TERMINAL_TOL
        verified = bool(rep.optimal and reached
                        and continuous_collision_check(T.states, scenario, spec.refine, T.controls, T.tf))
        rec = BenchRecord(scenario.name, kind.value, gkind.value, rep.status, J, TS, tf,
                          rep.wall_ms, rep.iterations, prob.VN, prob.CN, verified)
        out.append(CellResult(rec, T.states, T.controls, T.tf, rep))
    return out


def run_matrix(spec: RunSpec) -> list[CellResult]:
    """Every (scenario, formulation, guess) cell, in a deterministic order."""
    groups = [(sc, g, spec) for sc in spec.scenarios for g in spec.guesses]
    if spec.workers > 1 and len(groups) > 1:
        import multiprocessing as mp
        with ProcessPoolExecutor(spec.workers, mp_context=mp.get_context("spawn")) as pool:
            chunks = list(pool.map(_run_group, groups))
    else:
        chunks = [_run_group(g) for g in groups]
    cells = [c for chunk in chunks for c in chunk]
    sc_order = {(_name(s)): i for i, s in enumerate(spec.scenarios)}
    f_order = {k.value: i for i, k in enumerate(spec.formulations)}
    g_order = {k.value: i for i, k in enumerate(spec.guesses)}
    cells.sort(key=lambda c: (sc_order[c.record.scenario], f_order[c.record.formulation],
                              g_order[c.record.guess]))
    return cells


def _name(sc) -> str:
    if isinstance(sc, Scenario):
        return sc.name
    return get_scenario(sc).name


# ---------------------------------------------------------------- outputs

def trajectory_to_json(states, controls, tf, label: str = "", vehicle=None) -> dict:
    """Serialisable trajectory.

    ``states`` and ``controls`` are stored in SI units with radians so the
    file reloads exactly; ``theta_deg``, ``delta_deg`` and ``omega_deg`` add
    a degree view for reading.
    """
    states = np.asarray(states, dtype=float)
    controls = np.asarray(controls, dtype=float)
    out = {
        "label": label,
        "tf": float(tf),
        "states": states.tolist(),
        "controls": controls.tolist(),
        "theta_deg": np.rad2deg(states[:, 2]).tolist(),
        "delta_deg": np.rad2deg(states[:, 4]).tolist() if states.shape[1] > 4 else [],
        "omega_deg": np.rad2deg(controls[:, 1]).tolist(),
    }
    if vehicle is not None:
        out["corners"] = body_vertices_batch(states, vehicle).tolist()
    return out


def trajectory_from_json(data: dict):
    """``(states, controls, tf, label)`` from :func:`trajectory_to_json` output."""
    return (np.array(data["states"], dtype=float), np.array(data["controls"], dtype=float),
            float(data["tf"]), data.get("label", ""))


def save_trajectory(path, states, controls, tf, label="", vehicle=None) -> None:
    Path(path).write_text(json.dumps(trajectory_to_json(states, controls, tf, label, vehicle)))


def load_trajectory(path):
    return trajectory_from_json(json.loads(Path(path).read_text()))


def write_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow(r.row())


def scenario_svg(scenario: Scenario, trajectories, scale: float = 20.0) -> str:
    """SVG of the environment, obstacles and one body outline per sample.

    ``trajectories`` is a list of ``(label, states)``.
    """
    env = scenario.environment.vertices
    lo, hi = env.min(axis=0) - 1.0, env.max(axis=0) + 1.0
    width, height = (hi - lo) * scale

    def pts(V):
        # flip y so that north is up
        return " ".join(f"{(x - lo[0]) * scale:.2f},{(hi[1] - y) * scale:.2f}" for x, y in V)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}">',
             f'<polygon class="environment" points="{pts(env)}" fill="none" stroke="black"/>']
    for o in scenario.obstacles:
        parts.append(f'<polygon class="obstacle" points="{pts(o.vertices)}" fill="#999"/>')
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"]
    for i, (label, states) in enumerate(trajectories):
        color = palette[i % len(palette)]
        parts.append(f'<g class="trajectory" data-label="{escape(label)}" stroke="{color}" fill="none">')
        for V in body_vertices_batch(np.asarray(states), scenario.vehicle):
            parts.append(f'<polygon class="body" points="{pts(V)}"/>')
        parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts)


def emit_outputs(cells, scenarios, out_dir) -> dict:
    """Write per-cell trajectory JSON, ``matrix.csv`` and one SVG per scenario."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    by_name = {s.name: s for s in scenarios}
    files = {"csv": out / "matrix.csv", "trajectories": [], "svg": []}
    write_csv([c.record for c in cells], files["csv"])
    plotted = {}
    for c in cells:
        r = c.record
        if c.states is None:
            continue
        label = f"{r.scenario}_{r.formulation}_{r.guess}"
        path = out / f"{label}.json"
        save_trajectory(path, c.states, c.controls, c.tf, label, by_name[r.scenario].vehicle)
        files["trajectories"].append(path)
        if r.status == OPTIMAL:
            plotted.setdefault(r.scenario, []).append((label, c.states))
    for name, trajs in plotted.items():
        path = out / f"{name}.svg"
        path.write_text(scenario_svg(by_name[name], trajs))
        files["svg"].append(path)
    return files


def record_dicts(cells) -> list[dict]:
    return [asdict(c.record) for c in cells]


def default_workers() -> int:
    return max(1, min(4, (os.cpu_count() or 1) // 2))
