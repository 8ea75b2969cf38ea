"""Hybrid A* search over ``(x, y, theta)`` with Reeds-Shepp shortcuts.

Nodes carry continuous poses but are deduplicated on a grid cell.  Each
expansion drives six fixed-length arcs (full left, straight, full right;
forwards and backwards).  Every expanded node also tries the obstacle-free
Reeds-Shepp path to the goal and stops as soon as that path is clear.
Collision checks sample the swept poses every ``check_step`` metres.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import batch_disjoint, batch_inside
from .reeds_shepp import advance, mod2pi, reeds_shepp_path, sample_segments, Segment
from .scenarios import Scenario
from .vehicle import body_vertices_batch


@dataclass(frozen=True)
class SearchParams:
    xy_resolution: float = 0.5
    theta_resolution: float = math.radians(15.0)
    step: float = 1.0
    reverse_factor: float = 1.5
    switch_cost: float = 2.0
    check_step: float = 0.1
    max_expansions: int = 200_000


@dataclass
class Path:
    """Dense pose sequence with the driving direction into each pose."""

    poses: np.ndarray  # (n, 3)
    signs: np.ndarray  # (n - 1,)
    cost: float = 0.0
    expansions: int = 0

    @property
    def length(self) -> float:
        return float(np.sum(self.arc_steps()))

    def arc_steps(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.poses[:, :2], axis=0), axis=1)

    def dense_poses(self) -> np.ndarray:
        return self.poses.copy()

    def resample(self, n: int) -> np.ndarray:
        """``n`` poses equally spaced in arc length (ends included)."""
        s = np.concatenate([[0.0], np.cumsum(self.arc_steps())])
        if s[-1] <= 0:
            return np.repeat(self.poses[:1], n, axis=0)
        target = np.linspace(0.0, s[-1], n)
        th = np.unwrap(self.poses[:, 2])
        out = np.column_stack([np.interp(target, s, self.poses[:, 0]),
                               np.interp(target, s, self.poses[:, 1]),
                               np.interp(target, s, th)])
        out[0], out[-1] = self.poses[0], self.poses[-1]
        return out


@dataclass(order=True)
class _Node:
    f: float
    order: int
    g: float = field(compare=False)
    pose: tuple = field(compare=False)
    direction: int = field(compare=False)
    parent: object = field(compare=False)
    segment: object = field(compare=False)  # Segment leading here


class NoPathFound(RuntimeError):
    pass


class _Checker:
    def __init__(self, scenario: Scenario):
        self.sc = scenario
        self.lo = scenario.bounds.state_lower[:2]
        self.hi = scenario.bounds.state_upper[:2]

    def free(self, poses) -> bool:
        poses = np.atleast_2d(poses)
        if np.any(poses[:, :2] < self.lo) or np.any(poses[:, :2] > self.hi):
            return False
        corners = body_vertices_batch(poses, self.sc.vehicle)
        if not np.all(batch_inside(corners, self.sc.environment)):
            return False
        return all(np.all(batch_disjoint(corners, o)) for o in self.sc.obstacles)


def _cell(pose, p: SearchParams):
    return (int(math.floor(pose[0] / p.xy_resolution)),
            int(math.floor(pose[1] / p.xy_resolution)),
            int(round(mod2pi(pose[2]) / p.theta_resolution)) % int(round(2 * math.pi / p.theta_resolution)))


def turning_radius(scenario: Scenario) -> float:
    return scenario.vehicle.wheelbase / math.tan(scenario.bounds.delta_max)


def _segment_cost(seg: Segment, prev_dir: int, p: SearchParams) -> float:
    d = 1 if seg.length > 0 else -1
    cost = abs(seg.length) * (p.reverse_factor if d < 0 else 1.0)
    if prev_dir and d != prev_dir:
        cost += p.switch_cost
    return cost


def hybrid_astar_search(scenario: Scenario, params: SearchParams | None = None) -> Path:
    """Search a collision-free path from the initial to the final pose."""
    p = params or SearchParams()
    radius = turning_radius(scenario)
    start = tuple(float(v) for v in scenario.init[:3])
    goal = tuple(float(v) for v in scenario.final[:3])
    check = _Checker(scenario)
    if not (check.free(start) and check.free(goal)):
        raise NoPathFound("start or goal pose is in collision")

    def heuristic(pose):
        return reeds_shepp_path(pose, goal, radius).length

    moves = [Segment(kind, sign * p.step) for sign in (1, -1) for kind in ("L", "S", "R")]
    counter = 0
    root = _Node(heuristic(start), counter, 0.0, start, 0, None, None)
    open_heap = [root]
    best_g = {_cell(start, p): 0.0}
    closed = set()
    expansions = 0
    while open_heap:
        node = heapq.heappop(open_heap)
        key = _cell(node.pose, p)
        if key in closed:
            continue
        closed.add(key)
        expansions += 1
        if expansions > p.max_expansions:
            break

        # analytic expansion
        rs = reeds_shepp_path(node.pose, goal, radius)
        if not rs.segments:
            return _finish(node, [], radius, p, expansions, node.g)
        poses, _ = sample_segments(node.pose, rs.segments, radius, p.check_step)
        if check.free(poses[1:]):
            extra, d = 0.0, node.direction
            for seg in rs.segments:
                extra += _segment_cost(seg, d, p)
                d = 1 if seg.length > 0 else -1
            return _finish(node, list(rs.segments), radius, p, expansions, node.g + extra)

        for seg in moves:
            swept, _ = sample_segments(node.pose, (seg,), radius, p.check_step)
            nxt = tuple(float(v) for v in swept[-1])
            nkey = _cell(nxt, p)
            if nkey in closed:
                continue
            g = node.g + _segment_cost(seg, node.direction, p)
            if g >= best_g.get(nkey, math.inf):
                continue
            if not check.free(swept[1:]):
                continue
            best_g[nkey] = g
            counter += 1
            heapq.heappush(open_heap, _Node(g + heuristic(nxt), counter, g, nxt,
                                            1 if seg.length > 0 else -1, node, seg))
    raise NoPathFound(f"open set exhausted after {expansions} expansions")


def _finish(node, tail, radius, p: SearchParams, expansions, cost) -> Path:
    segs = []
    while node is not None and node.segment is not None:
        segs.append(node.segment)
        node = node.parent
    segs.reverse()
    start = node.pose
    poses, signs = sample_segments(start, segs + tail, radius, p.check_step)
    return Path(poses, signs, float(cost), expansions)


__all__ = ["SearchParams", "Path", "NoPathFound", "hybrid_astar_search", "turning_radius", "advance"]
