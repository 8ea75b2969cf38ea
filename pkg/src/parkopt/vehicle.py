"""Kinematic single-track vehicle, RK4 discretisation and body polygon.

State ``xi = (x, y, theta, v, delta)`` is the rear-axle midpoint, yaw,
rear-axle speed and steering angle; control ``u = (a, omega)``.
The model functions are written with ``jax.numpy`` so that the
transcription can differentiate straight through them; they accept plain
numpy input as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial

import jax
import jax.numpy as jnp
import numpy as np

from .geometry import HalfSpacePolygon, RigidTransform, polygon_from_vertices, transform

STATE_NAMES = ("x", "y", "theta", "v", "delta")
CONTROL_NAMES = ("a", "omega")


@dataclass(frozen=True)
class VehicleParams:
    """Geometry of the rectangular body; lengths in metres."""

    wheelbase: float = 2.796
    length: float = 4.628
    width: float = 2.097
    rear_overhang: float = 0.916

    def __post_init__(self):
        if min(self.wheelbase, self.length, self.width, self.rear_overhang) <= 0:
            raise ValueError("vehicle dimensions must be positive")
        if self.rear_overhang >= self.length:
            raise ValueError("rear overhang must be shorter than the body")

    @property
    def L(self) -> float:
        return self.wheelbase

    def body_frame_vertices(self) -> np.ndarray:
        """Corners in the body frame, counter-clockwise, starting front-left."""
        front = self.length - self.rear_overhang
        rear = -self.rear_overhang
        half = 0.5 * self.width
        return np.array([[front, half], [rear, half], [rear, -half], [front, -half]])

    def body_frame_polygon(self) -> HalfSpacePolygon:
        return polygon_from_vertices(self.body_frame_vertices(), "ccw")

    def to_json(self) -> dict:
        return {"L": self.wheelbase, "length": self.length, "width": self.width,
                "rear_overhang": self.rear_overhang}

    @classmethod
    def from_json(cls, data: dict) -> "VehicleParams":
        return cls(float(data["L"]), float(data["length"]), float(data["width"]),
                   float(data.get("rear_overhang", 0.5 * (data["length"] - data["L"]))))


def dynamics(xi, u, wheelbase):
    """Time derivative of the 5-state model."""
    _, _, th, v, de = xi[0], xi[1], xi[2], xi[3], xi[4]
    return jnp.stack([v * jnp.cos(th), v * jnp.sin(th), v * jnp.tan(de) / wheelbase, u[0], u[1]])


def simplified_dynamics(xi3, u2, wheelbase):
    """Pose-only model driven directly by speed and steering angle."""
    th = xi3[2]
    v, de = u2[0], u2[1]
    return jnp.stack([v * jnp.cos(th), v * jnp.sin(th), v * jnp.tan(de) / wheelbase])


def rk4(f, xi, u, h, *args):
    k1 = f(xi, u, *args)
    k2 = f(xi + 0.5 * h * k1, u, *args)
    k3 = f(xi + 0.5 * h * k2, u, *args)
    k4 = f(xi + h * k3, u, *args)
    return xi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(xi, u, h, params: VehicleParams | float):
    """One classical RK4 step of :func:`dynamics` with ``u`` held constant."""
    L = params.wheelbase if isinstance(params, VehicleParams) else params
    return rk4(dynamics, xi, u, h, L)


@partial(jax.jit, static_argnums=(3,))
def _simulate_fine(states, controls, h, refine, L):
    sub = h / refine

    def interval(xi0, u):
        def body(xi, _):
            nxt = rk4(dynamics, xi, u, sub, L)
            return nxt, nxt
        _, traj = jax.lax.scan(body, xi0, None, length=refine)
        return traj

    fine = jax.vmap(interval)(states[:-1], controls)  # (K, refine, 5)
    return jnp.concatenate([states[:1], fine.reshape(-1, 5)], axis=0)


def simulate_fine(states, controls, tf, refine, params: VehicleParams) -> np.ndarray:
    """Fine samples obtained by re-integrating every interval from its start state."""
    states = np.asarray(states, dtype=float)
    controls = np.asarray(controls, dtype=float)
    h = tf / controls.shape[0]
    return np.asarray(_simulate_fine(states, controls, h, int(refine), params.wheelbase))


@partial(jax.jit, static_argnums=(3,))
def _rollout(xi0, controls, h, L):
    def body(xi, u):
        nxt = rk4(dynamics, xi, u, h, L)
        return nxt, nxt
    _, traj = jax.lax.scan(body, xi0, controls)
    return jnp.concatenate([xi0[None], traj], axis=0)


def rollout(xi0, controls, tf, params: VehicleParams) -> np.ndarray:
    """Forward simulation with one RK4 step per control interval."""
    controls = np.asarray(controls, dtype=float)
    h = float(tf) / controls.shape[0]
    return np.asarray(_rollout(jnp.asarray(xi0, dtype=float), controls, h, params.wheelbase))


def rotation(theta):
    c, s = jnp.cos(theta), jnp.sin(theta)
    return jnp.array([[c, -s], [s, c]])


def posed_vertices(pose, body_vertices):
    """Body corners at pose ``(x, y, theta)``; traceable."""
    R = rotation(pose[2])
    return body_vertices @ R.T + jnp.stack([pose[0], pose[1]])


def body_polygon(xi, params: VehicleParams) -> HalfSpacePolygon:
    xi = np.asarray(xi, dtype=float)
    return transform(params.body_frame_polygon(), RigidTransform.from_pose(xi[0], xi[1], xi[2]))


def body_vertices_batch(states, params: VehicleParams) -> np.ndarray:
    """Corners for many poses at once, shape ``(K, 4, 2)``."""
    S = np.atleast_2d(np.asarray(states, dtype=float))
    c, s = np.cos(S[:, 2]), np.sin(S[:, 2])
    V0 = params.body_frame_vertices()
    x = V0[None, :, 0] * c[:, None] - V0[None, :, 1] * s[:, None] + S[:, None, 0]
    y = V0[None, :, 0] * s[:, None] + V0[None, :, 1] * c[:, None] + S[:, None, 1]
    return np.stack([x, y], axis=-1)
