"""Shortest Reeds-Shepp paths between two poses.

Paths are words of at most five segments, each a straight line (``S``) or
an arc of minimum turning radius to the left (``L``) or right (``R``),
driven forwards or backwards.  Segment lengths are signed; negative means
reverse.  The closed-form candidates are evaluated in a frame where the
start pose is the origin and the radius is one, then scaled back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_ZERO = 1e-10
_HALF_PI = 0.5 * math.pi

# word letters for each of the 18 path types
WORDS = (
    "LRL", "RLR", "LRLR", "RLRL", "LRSL", "RLSR", "LSRL", "RSLR", "LRSR",
    "RLSL", "RSRL", "LSLR", "LSR", "RSL", "LSL", "RSR", "LRSLR", "RLSRL",
)


@dataclass(frozen=True)
class Segment:
    kind: str  # "L", "R" or "S"
    length: float  # signed, metres

    @property
    def curvature_sign(self) -> int:
        return {"L": 1, "R": -1, "S": 0}[self.kind]


@dataclass(frozen=True)
class ReedsSheppPath:
    segments: tuple
    radius: float

    @property
    def length(self) -> float:
        return float(sum(abs(s.length) for s in self.segments))

    @property
    def word(self) -> str:
        return "".join(s.kind for s in self.segments)

    def sample(self, start, step: float = 0.1):
        """Poses every ``step`` metres (plus segment ends) and the driving sign."""
        return sample_segments(start, self.segments, self.radius, step)


def mod2pi(x: float) -> float:
    """Wrap to ``(-pi, pi]``."""
    v = math.fmod(x, 2.0 * math.pi)
    if v < -math.pi:
        v += 2.0 * math.pi
    elif v > math.pi:
        v -= 2.0 * math.pi
    return v


def _polar(x, y):
    return math.hypot(x, y), math.atan2(y, x)


def _tau_omega(u, v, xi, eta, phi):
    delta = mod2pi(u - v)
    A = math.sin(u) - math.sin(delta)
    B = math.cos(u) - math.cos(delta) - 1.0
    t1 = math.atan2(eta * A - xi * B, xi * A + eta * B)
    t2 = 2.0 * (math.cos(delta) - math.cos(v) - math.cos(u)) + 3.0
    tau = mod2pi(t1 + math.pi) if t2 < 0 else mod2pi(t1)
    omega = mod2pi(tau - u + v - phi)
    return tau, omega


# ---- base formulas (unit radius, start at origin) -------------------------

def _LpSpLp(x, y, phi):
    u, t = _polar(x - math.sin(phi), y - 1.0 + math.cos(phi))
    if t >= -_ZERO:
        v = mod2pi(phi - t)
        if v >= -_ZERO:
            return t, u, v
    return None


def _LpSpRp(x, y, phi):
    u1, t1 = _polar(x + math.sin(phi), y - 1.0 - math.cos(phi))
    u1 = u1 * u1
    if u1 >= 4.0:
        u = math.sqrt(u1 - 4.0)
        theta = math.atan2(2.0, u)
        t = mod2pi(t1 + theta)
        v = mod2pi(t - phi)
        if t >= -_ZERO and v >= -_ZERO:
            return t, u, v
    return None


def _LpRmL(x, y, phi):
    xi, eta = x - math.sin(phi), y - 1.0 + math.cos(phi)
    u1, theta = _polar(xi, eta)
    if u1 <= 4.0:
        u = -2.0 * math.asin(0.25 * u1)
        t = mod2pi(theta + 0.5 * u + math.pi)
        v = mod2pi(phi - t + u)
        if t >= -_ZERO and u <= _ZERO:
            return t, u, v
    return None


def _LpRupLumRm(x, y, phi):
    xi, eta = x + math.sin(phi), y - 1.0 - math.cos(phi)
    rho = 0.25 * (2.0 + math.hypot(xi, eta))
    if rho <= 1.0:
        u = math.acos(rho)
        t, v = _tau_omega(u, -u, xi, eta, phi)
        if t >= -_ZERO and v <= _ZERO:
            return t, u, v
    return None


def _LpRumLumRp(x, y, phi):
    xi, eta = x + math.sin(phi), y - 1.0 - math.cos(phi)
    rho = (20.0 - xi * xi - eta * eta) / 16.0
    if 0.0 <= rho <= 1.0:
        u = -math.acos(rho)
        if u >= -_HALF_PI:
            t, v = _tau_omega(u, u, xi, eta, phi)
            if t >= -_ZERO and v >= -_ZERO:
                return t, u, v
    return None


def _LpRmSmLm(x, y, phi):
    xi, eta = x - math.sin(phi), y - 1.0 + math.cos(phi)
    rho, theta = _polar(xi, eta)
    if rho >= 2.0:
        r = math.sqrt(rho * rho - 4.0)
        u = 2.0 - r
        t = mod2pi(theta + math.atan2(r, -2.0))
        v = mod2pi(phi - _HALF_PI - t)
        if t >= -_ZERO and u <= _ZERO and v <= _ZERO:
            return t, u, v
    return None


def _LpRmSmRm(x, y, phi):
    xi, eta = x + math.sin(phi), y - 1.0 - math.cos(phi)
    rho, theta = _polar(-eta, xi)
    if rho >= 2.0:
        t = theta
        u = 2.0 - rho
        v = mod2pi(t + _HALF_PI - phi)
        if t >= -_ZERO and u <= _ZERO and v <= _ZERO:
            return t, u, v
    return None


def _LpRmSLmRp(x, y, phi):
    xi, eta = x + math.sin(phi), y - 1.0 - math.cos(phi)
    rho, _ = _polar(xi, eta)
    if rho >= 2.0:
        u = 4.0 - math.sqrt(rho * rho - 4.0)
        if u <= _ZERO:
            t = mod2pi(math.atan2((4.0 - u) * xi - 2.0 * eta, -2.0 * xi + (u - 4.0) * eta))
            v = mod2pi(t - phi)
            if t >= -_ZERO and v >= -_ZERO:
                return t, u, v
    return None


# ---- symmetric variants ----------------------------------------------------

def _csc(x, y, phi):
    out = []
    for fn, base, mirrored in ((_LpSpLp, 14, 15), (_LpSpRp, 12, 13)):
        for xx, yy, pp, typ, sgn in ((x, y, phi, base, 1), (-x, y, -phi, base, -1),
                                     (x, -y, -phi, mirrored, 1), (-x, -y, phi, mirrored, -1)):
            r = fn(xx, yy, pp)
            if r:
                out.append((typ, tuple(sgn * a for a in r)))
    return out


def _ccc(x, y, phi):
    out = []
    xb = x * math.cos(phi) + y * math.sin(phi)
    yb = x * math.sin(phi) - y * math.cos(phi)
    for (ax, ay, rev) in ((x, y, False), (xb, yb, True)):
        for xx, yy, pp, typ, sgn in ((ax, ay, phi, 0, 1), (-ax, ay, -phi, 0, -1),
                                     (ax, -ay, -phi, 1, 1), (-ax, -ay, phi, 1, -1)):
            r = _LpRmL(xx, yy, pp)
            if r:
                t, u, v = r
                seq = (v, u, t) if rev else (t, u, v)
                out.append((typ, tuple(sgn * a for a in seq)))
    return out


def _cccc(x, y, phi):
    out = []
    for xx, yy, pp, typ, sgn in ((x, y, phi, 2, 1), (-x, y, -phi, 2, -1),
                                 (x, -y, -phi, 3, 1), (-x, -y, phi, 3, -1)):
        r = _LpRupLumRm(xx, yy, pp)
        if r:
            t, u, v = r
            out.append((typ, tuple(sgn * a for a in (t, u, -u, v))))
        r = _LpRumLumRp(xx, yy, pp)
        if r:
            t, u, v = r
            out.append((typ, tuple(sgn * a for a in (t, u, u, v))))
    return out


def _ccsc(x, y, phi):
    out = []
    for fn, base, mirrored in ((_LpRmSmLm, 4, 5), (_LpRmSmRm, 8, 9)):
        for xx, yy, pp, typ, sgn in ((x, y, phi, base, 1), (-x, y, -phi, base, -1),
                                     (x, -y, -phi, mirrored, 1), (-x, -y, phi, mirrored, -1)):
            r = fn(xx, yy, pp)
            if r:
                t, u, v = r
                out.append((typ, tuple(sgn * a for a in (t, -_HALF_PI, u, v))))
    xb = x * math.cos(phi) + y * math.sin(phi)
    yb = x * math.sin(phi) - y * math.cos(phi)
    for fn, base, mirrored in ((_LpRmSmLm, 6, 7), (_LpRmSmRm, 10, 11)):
        for xx, yy, pp, typ, sgn in ((xb, yb, phi, base, 1), (-xb, yb, -phi, base, -1),
                                     (xb, -yb, -phi, mirrored, 1), (-xb, -yb, phi, mirrored, -1)):
            r = fn(xx, yy, pp)
            if r:
                t, u, v = r
                out.append((typ, tuple(sgn * a for a in (v, u, -_HALF_PI, t))))
    return out


def _ccscc(x, y, phi):
    out = []
    for xx, yy, pp, typ, sgn in ((x, y, phi, 16, 1), (-x, y, -phi, 16, -1),
                                 (x, -y, -phi, 17, 1), (-x, -y, phi, 17, -1)):
        r = _LpRmSLmRp(xx, yy, pp)
        if r:
            t, u, v = r
            out.append((typ, tuple(sgn * a for a in (t, -_HALF_PI, u, -_HALF_PI, v))))
    return out


def _local(start, goal, radius):
    dx, dy = goal[0] - start[0], goal[1] - start[1]
    c, s = math.cos(start[2]), math.sin(start[2])
    return (c * dx + s * dy) / radius, (-s * dx + c * dy) / radius, mod2pi(goal[2] - start[2])


def all_paths(start, goal, radius: float) -> list:
    """Every closed-form candidate word connecting the poses."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    x, y, phi = _local(start, goal, radius)
    paths = []
    for typ, lengths in _csc(x, y, phi) + _ccc(x, y, phi) + _cccc(x, y, phi) \
            + _ccsc(x, y, phi) + _ccscc(x, y, phi):
        segs = tuple(Segment(k, radius * l) for k, l in zip(WORDS[typ], lengths) if abs(l) > _ZERO)
        paths.append(ReedsSheppPath(segs, radius))
    return paths


def reeds_shepp_path(start, goal, radius: float) -> ReedsSheppPath:
    """Shortest Reeds-Shepp path from ``start`` to ``goal`` (poses ``(x, y, theta)``)."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    x, y, phi = _local(start, goal, radius)
    if abs(x) < _ZERO and abs(y) < _ZERO and abs(phi) < _ZERO:
        return ReedsSheppPath((), radius)
    paths = all_paths(start, goal, radius)
    return min(paths, key=lambda p: p.length)


def reeds_shepp_length(start, goal, radius: float) -> float:
    return reeds_shepp_path(start, goal, radius).length


def advance(pose, kind: str, length: float, radius: float):
    """Pose after driving one segment exactly."""
    x, y, th = pose
    if kind == "S":
        return x + length * math.cos(th), y + length * math.sin(th), th
    k = (1.0 if kind == "L" else -1.0) / radius
    th2 = th + k * length
    return x + (math.sin(th2) - math.sin(th)) / k, y + (math.cos(th) - math.cos(th2)) / k, th2


def sample_segments(start, segments, radius: float, step: float = 0.1):
    """Poses along consecutive segments at roughly ``step`` spacing.

    Returns ``(poses, signs)``: an ``(n, 3)`` array starting at ``start``
    and, for every pose after the first, the direction (+1 or -1) driven to
    reach it.
    """
    poses = [tuple(float(v) for v in start)]
    signs = []
    for seg in segments:
        n = max(1, int(math.ceil(abs(seg.length) / step)))
        base = poses[-1]
        for i in range(1, n + 1):
            poses.append(advance(base, seg.kind, seg.length * i / n, radius))
            signs.append(1 if seg.length > 0 else -1)
    return np.array(poses), np.array(signs, dtype=int)
