"""Parking scenarios: environment, obstacles, vehicle, boundary states, bounds.

Scenario files are JSON with angles given in degrees::

    {"name": "...",
     "environment": {"A": [[0, 1], ...], "b": [8, ...]},
     "obstacles": [{"A": ..., "b": ...}, ...],
     "vehicle": {"L": 2.796, "length": 4.628, "width": 2.097, "rear_overhang": 0.916},
     "init": [x, y, theta_deg, v, delta_deg],
     "final": [x, y, theta_deg, v, delta_deg],
     "bounds": {"x": [lo, hi], "y": [lo, hi], "theta_deg": 180, "v": 1.3889,
                "delta_deg": 40, "a": 1, "omega_deg": 5},
     "weights": {"r": 1, "P": [1, 2]}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .geometry import (HalfSpacePolygon, batch_disjoint, batch_inside, vertices_from_halfspaces)
from .vehicle import VehicleParams, body_vertices_batch

V_MAX = 5.0 / 3.6
DELTA_MAX = np.deg2rad(40.0)
A_MAX = 1.0
OMEGA_MAX = np.deg2rad(5.0)


@dataclass(frozen=True)
class CostWeights:
    r: float = 1.0
    P: tuple = (1.0, 2.0)

    def __post_init__(self):
        if self.r <= 0 or min(self.P) <= 0:
            raise ValueError("cost weights must be positive")


@dataclass(frozen=True, eq=False)
class Bounds:
    state_lower: np.ndarray
    state_upper: np.ndarray
    control_lower: np.ndarray
    control_upper: np.ndarray

    @classmethod
    def standard(cls, x_range, y_range) -> "Bounds":
        return cls(
            np.array([x_range[0], y_range[0], -np.pi, -V_MAX, -DELTA_MAX]),
            np.array([x_range[1], y_range[1], np.pi, V_MAX, DELTA_MAX]),
            np.array([-A_MAX, -OMEGA_MAX]),
            np.array([A_MAX, OMEGA_MAX]),
        )

    @property
    def v_max(self) -> float:
        return float(self.state_upper[3])

    @property
    def delta_max(self) -> float:
        return float(self.state_upper[4])

    def contains_state(self, xi, tol=1e-9) -> bool:
        xi = np.asarray(xi)
        return bool(np.all(xi >= self.state_lower - tol) and np.all(xi <= self.state_upper + tol))


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    environment: HalfSpacePolygon
    obstacles: tuple
    vehicle: VehicleParams
    init: np.ndarray
    final: np.ndarray
    bounds: Bounds
    weights: CostWeights = field(default_factory=CostWeights)

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "init", np.asarray(self.init, dtype=float))
        object.__setattr__(self, "final", np.asarray(self.final, dtype=float))

    def with_obstacles(self, obstacles) -> "Scenario":
        return replace(self, obstacles=tuple(obstacles))

    def pose_is_free(self, xi) -> bool:
        corners = body_vertices_batch(np.atleast_2d(xi), self.vehicle)
        if not batch_inside(corners, self.environment)[0]:
            return False
        return all(batch_disjoint(corners, o)[0] for o in self.obstacles)

    def validate(self) -> None:
        for label, xi in (("init", self.init), ("final", self.final)):
            if not self.bounds.contains_state(xi):
                raise ValueError(f"{label} state violates the state bounds")
            corners = body_vertices_batch(np.atleast_2d(xi), self.vehicle)
            if not batch_inside(corners, self.environment)[0]:
                raise ValueError(f"{label} body leaves the environment")

    # serialisation -------------------------------------------------------
    def to_json(self) -> dict:
        def deg_state(xi):
            out = [float(v) for v in xi]
            out[2] = float(np.rad2deg(xi[2]))
            out[4] = float(np.rad2deg(xi[4]))
            return out

        b = self.bounds
        return {
            "name": self.name,
            "environment": self.environment.to_json(),
            "obstacles": [o.to_json() for o in self.obstacles],
            "vehicle": self.vehicle.to_json(),
            "init": deg_state(self.init),
            "final": deg_state(self.final),
            "bounds": {
                "x": [float(b.state_lower[0]), float(b.state_upper[0])],
                "y": [float(b.state_lower[1]), float(b.state_upper[1])],
                "theta_deg": float(np.rad2deg(b.state_upper[2])),
                "v": float(b.state_upper[3]),
                "delta_deg": float(np.rad2deg(b.state_upper[4])),
                "a": float(b.control_upper[0]),
                "omega_deg": float(np.rad2deg(b.control_upper[1])),
            },
            "weights": {"r": self.weights.r, "P": list(self.weights.P)},
        }

    @classmethod
    def from_json(cls, data: dict) -> "Scenario":
        def rad_state(vals):
            xi = np.array(vals, dtype=float)
            xi[2] = np.deg2rad(xi[2])
            xi[4] = np.deg2rad(xi[4])
            return xi

        bd = data["bounds"]
        th = np.deg2rad(bd.get("theta_deg", 180.0))
        v = bd.get("v", V_MAX)
        de = np.deg2rad(bd.get("delta_deg", 40.0))
        a = bd.get("a", A_MAX)
        om = np.deg2rad(bd.get("omega_deg", 5.0))
        bounds = Bounds(
            np.array([bd["x"][0], bd["y"][0], -th, -v, -de]),
            np.array([bd["x"][1], bd["y"][1], th, v, de]),
            np.array([-a, -om]), np.array([a, om]),
        )
        w = data.get("weights", {})
        return cls(
            name=data.get("name", "custom"),
            environment=HalfSpacePolygon.from_json(data["environment"]),
            obstacles=tuple(HalfSpacePolygon.from_json(o) for o in data["obstacles"]),
            vehicle=VehicleParams.from_json(data.get("vehicle", VehicleParams().to_json())),
            init=rad_state(data["init"]),
            final=rad_state(data["final"]),
            bounds=bounds,
            weights=CostWeights(float(w.get("r", 1.0)), tuple(w.get("P", (1.0, 2.0)))),
        )


def load_scenario(path) -> Scenario:
    return Scenario.from_json(json.loads(Path(path).read_text()))


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario.to_json(), indent=2))


# Environment / obstacle rows [a1, a2, b] for the three benchmark layouts,
# row order as published.  Two published rows are inconsistent and are
# replaced here (see TABLE1_PUBLISHED for the original values):
#  * vertical O2 row 4 reads [1, 0, 0] (x <= 0), which empties the obstacle
#    together with x >= 7.5; the environment edge x <= 15 is used instead.
#  * parallel O2 rows 2 and 4 read [1, -1, -12] and [-1, 0, 20], which put
#    the obstacle at x in [-20, -15], outside the environment.  Flipping the
#    normal signs gives the slanted right-hand slot boundary x + y >= 12 and
#    x <= 20.
TABLE1 = {
    "vertical": {
        "x": (-2.0, 15.0), "y": (-8.0, 8.0),
        "W": [[0, 1, 8], [0, -1, 8], [-1, 0, 2], [1, 0, 15]],
        "O": [
            [[0, 1, -2], [1, 0, 5], [0, -1, 8], [-1, 0, 0]],
            [[0, 1, -2], [-1, 0, -7.5], [0, -1, 8], [1, 0, 15]],
        ],
        "final": (6.3, -6.7, 90.0, 0.0, 0.0),
    },
    "parallel": {
        "x": (-2.0, 22.0), "y": (-6.0, 8.0),
        "W": [[0, 1, 8], [0, -1, 6], [-1, 0, 2], [1, 0, 22]],
        "O": [
            [[0, 1, -3], [1, 0, 5], [0, -1, 6], [-1, 0, 0]],
            [[0, 1, -3], [-1, -1, -12], [0, -1, 6], [1, 0, 20]],
        ],
        "final": (6.9, -4.3, 0.0, 0.0, 0.0),
    },
    "oblique": {
        "x": (-4.0, 20.0), "y": (-8.0, 4.0),
        "W": [[0, 1, 4], [0, -1, 8], [-1, 0, 4], [1, 0, 20]],
        "O": [
            [[0, 1, -2], [-1, 0, 7], [0, -1, 8], [1, 0, 2]],
            [[0, 1, -2], [-1, 1, -11], [0, -1, 8], [1, 0, 18]],
        ],
        "final": (4.0, -5.0, 45.0, 0.0, 0.0),
    },
}

TABLE1_PUBLISHED = {
    "vertical_O2": [[0, 1, -2], [-1, 0, -7.5], [0, -1, 8], [1, 0, 0]],
    "parallel_O2": [[0, 1, -3], [1, -1, -12], [0, -1, 6], [-1, 0, 20]],
}

SCENARIO_NAMES = tuple(TABLE1)


def _poly(rows, reorder=False) -> HalfSpacePolygon:
    rows = np.asarray(rows, dtype=float)
    if reorder:
        # environment rows are listed as top, bottom, left, right; put them in
        # angular order so that consecutive rows meet in a corner
        rows = rows[np.argsort(np.arctan2(rows[:, 1], rows[:, 0]))]
    return vertices_from_halfspaces(rows[:, :2], rows[:, 2])


def builtin_scenario(name: str, vehicle: VehicleParams | None = None) -> Scenario:
    """One of ``vertical``, ``parallel``, ``oblique``."""
    try:
        spec = TABLE1[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {SCENARIO_NAMES}") from None
    fin = np.array(spec["final"], dtype=float)
    fin[2] = np.deg2rad(fin[2])
    return Scenario(
        name=name,
        environment=_poly(spec["W"], reorder=True),
        obstacles=tuple(_poly(o) for o in spec["O"]),
        vehicle=vehicle or VehicleParams(),
        init=np.zeros(5),
        final=fin,
        bounds=Bounds.standard(spec["x"], spec["y"]),
    )


def _box(x0, x1, y0, y1) -> HalfSpacePolygon:
    return vertices_from_halfspaces([[0, 1], [-1, 0], [0, -1], [1, 0]], [y1, -x0, -y0, x1])


def thin_wall_scenario(thickness: float = 0.2, half_height: float = 1.0,
                       vehicle: VehicleParams | None = None) -> Scenario:
    """Straight 16 m drive with a short thin wall across the direct line.

    Small enough to solve in a second and used to show how long shooting
    intervals let the body jump over an obstacle between two samples.
    """
    return Scenario(
        name="thin-wall",
        environment=_box(-3.0, 22.0, -8.0, 8.0),
        obstacles=(_box(8.0, 8.0 + thickness, -half_height, half_height),),
        vehicle=vehicle or VehicleParams(),
        init=np.zeros(5),
        final=np.array([16.0, 0.0, 0.0, 0.0, 0.0]),
        bounds=Bounds.standard((-3.0, 22.0), (-8.0, 8.0)),
    )


def get_scenario(name_or_path) -> Scenario:
    """Built-in benchmark by name, ``"thin-wall"``, or a scenario JSON file."""
    if isinstance(name_or_path, Scenario):
        return name_or_path
    if str(name_or_path) in TABLE1:
        return builtin_scenario(str(name_or_path))
    if str(name_or_path) == "thin-wall":
        return thin_wall_scenario()
    return load_scenario(name_or_path)
