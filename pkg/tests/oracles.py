"""Independent reference computations used by the tests.

Nothing here calls into the collision formulations themselves; polygons
are handled through their vertex lists and half-space rows only.
"""

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from parkopt.geometry import polygon_from_vertices

LP_EPS = 2e-6


def random_convex_polygon(rng, n_max=8, center=(0.0, 0.0), scale=1.0):
    """Hull of random points around ``center``; 3..n_max vertices, counter-clockwise."""
    while True:
        n = int(rng.integers(3, n_max + 1))
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        rad = scale * rng.uniform(0.5, 1.0, n)
        pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)]) + np.asarray(center)
        hull = ConvexHull(pts)
        V = pts[hull.vertices]
        edges = np.linalg.norm(V - np.roll(V, 1, axis=0), axis=1)
        if len(V) >= 3 and edges.min() > 1e-3 * scale and hull.volume > 0.05 * scale ** 2:
            return polygon_from_vertices(V, "ccw")


def winding_contains(V, q, tol=1e-9):
    """Closed containment by ray casting, with an explicit on-edge test."""
    q = np.asarray(q, dtype=float)
    n = len(V)
    inside = False
    for i in range(n):
        a, b = V[i], V[(i + 1) % n]
        ab, aq = b - a, q - a
        cross = ab[0] * aq[1] - ab[1] * aq[0]
        t = np.dot(aq, ab) / np.dot(ab, ab)
        if abs(cross) <= tol * np.linalg.norm(ab) and -1e-12 <= t <= 1 + 1e-12:
            return True
        if (a[1] > q[1]) != (b[1] > q[1]):
            x_cross = a[0] + (q[1] - a[1]) * ab[0] / ab[1]
            if q[0] < x_cross:
                inside = not inside
    return inside


def grid_overlap(P, Q, n=400):
    """Whether two polygons share interior area on a fine grid."""
    lo = np.minimum(P.vertices.min(0), Q.vertices.min(0))
    hi = np.maximum(P.vertices.max(0), Q.vertices.max(0))
    xs = np.linspace(lo[0], hi[0], n)
    ys = np.linspace(lo[1], hi[1], n)
    X, Y = np.meshgrid(xs, ys)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    inP = np.all(pts @ P.normals.T - P.offsets < 0, axis=1)
    inQ = np.all(pts @ Q.normals.T - Q.offsets < 0, axis=1)
    return bool(np.any(inP & inQ))


def true_gap(P, Q):
    """Separation distance (> 0) or minus the penetration depth, brute force over edge normals."""
    best = -np.inf
    for M in (P, Q):
        V = M.vertices
        e = np.roll(V, -1, axis=0) - V
        for d in e:
            nrm = np.array([d[1], -d[0]]) / np.linalg.norm(d)
            pp, qq = P.vertices @ nrm, Q.vertices @ nrm
            best = max(best, pp.min() - qq.max(), qq.min() - pp.max())
    return best


def _feasible(c_len, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None):
    res = linprog(np.zeros(c_len), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method="highs")
    return res.status == 0, (res.x if res.status == 0 else None)


def lp_eq14(V, O, eps=LP_EPS):
    """Vertex-certificate block: columns of Lam, Om on the unit simplex."""
    P = polygon_from_vertices(V)
    Q = polygon_from_vertices(O)
    C, d, A, b = P.normals, P.offsets, Q.normals, Q.offsets
    nv, no = len(V), len(O)
    # Lam (nv x no) column j certifies obstacle vertex j; Om (no x nv) column i certifies vehicle vertex i
    nL, nO = nv * no, no * nv
    rows, rhs = [], []
    S1 = C @ O.T - d[:, None]  # (nv, no)
    for j in range(no):
        for l in range(no):
            r = np.zeros(nL + nO)
            r[np.arange(nv) * no + l] = -S1[:, j]
            rows.append(r)
            rhs.append(-eps)
    S2 = A @ V.T - b[:, None]  # (no, nv)
    for i in range(nv):
        for l in range(nv):
            r = np.zeros(nL + nO)
            r[nL + np.arange(no) * nv + l] = -S2[:, i]
            rows.append(r)
            rhs.append(-eps)
    eq = []
    for l in range(no):
        r = np.zeros(nL + nO)
        r[np.arange(nv) * no + l] = 1
        eq.append(r)
    for l in range(nv):
        r = np.zeros(nL + nO)
        r[nL + np.arange(no) * nv + l] = 1
        eq.append(r)
    return _feasible(nL + nO, np.array(rows), np.array(rhs), np.array(eq), np.ones(len(eq)),
                     [(0, 1)] * (nL + nO))


def lp_line(V, O, eps=LP_EPS, slab=False):
    """Separating line (or slab) with the norm equality replaced by a box on ``lam``.

    The residual signs are positively homogeneous in ``(lam, mu)``, so any
    solution rescales onto ``lam'lam = 1``.
    """
    nv, no = len(V), len(O)
    if slab:  # x = (l1, l2, mu1, mu2)
        rows = [np.r_[-v, 1, 0] for v in V] + [np.r_[o, 0, -1] for o in O] + [np.r_[0, 0, -1, 1]]
        rhs = [-eps] * (nv + no) + [-eps]
        return _feasible(4, np.array(rows), np.array(rhs), bounds=[(-1, 1), (-1, 1), (None, None), (None, None)])
    rows = [np.r_[-v, 1] for v in V] + [np.r_[o, -1] for o in O]
    return _feasible(3, np.array(rows), -eps * np.ones(nv + no), bounds=[(-1, 1), (-1, 1), (None, None)])


def lp_dual(C, d, A, b, eps=LP_EPS, norm_box=False):
    """Farkas dual: ``lam, mu >= 0``, ``A'lam + C'mu = 0``, ``-b'lam - d'mu >= eps``.

    ``norm_box`` adds ``|A'lam|_inf <= 1/sqrt(2)``, an inner box of the unit
    ball, for the norm-bounded variants.
    """
    no, nv = A.shape[0], C.shape[0]
    A_eq = np.hstack([A.T, C.T])
    A_ub = [np.r_[b, d]]
    b_ub = [-eps]
    if norm_box:
        s = 1 / np.sqrt(2)
        for k in range(2):
            A_ub.append(np.r_[A.T[k], np.zeros(nv)])
            A_ub.append(np.r_[-A.T[k], np.zeros(nv)])
            b_ub += [s, s]
    return _feasible(no + nv, np.array(A_ub), np.array(b_ub), A_eq, np.zeros(2), [(0, None)] * (no + nv))


def lp_dual_body_frame(C0, d0, A, b, R, T, eps=LP_EPS):
    """Dual certificate written with body-frame vehicle rows and pose ``(R, T)``."""
    no, nv = A.shape[0], C0.shape[0]
    A_eq = np.hstack([R.T @ A.T, C0.T])
    s = 1 / np.sqrt(2)
    A_ub = [np.r_[-(A @ T - b), d0]]
    b_ub = [-eps]
    for k in range(2):
        A_ub.append(np.r_[A.T[k], np.zeros(nv)])
        A_ub.append(np.r_[-A.T[k], np.zeros(nv)])
        b_ub += [s, s]
    return _feasible(no + nv, np.array(A_ub), np.array(b_ub), A_eq, np.zeros(2), [(0, None)] * (no + nv))


def arc_endpoint(xi0, v, delta, L, t):
    """Closed-form pose after driving at constant speed and steering."""
    x, y, th = xi0[:3]
    kappa = np.tan(delta) / L
    if abs(kappa) < 1e-15:
        return np.array([x + v * t * np.cos(th), y + v * t * np.sin(th), th, v, delta])
    th1 = th + v * kappa * t
    return np.array([x + (np.sin(th1) - np.sin(th)) / kappa,
                     y - (np.cos(th1) - np.cos(th)) / kappa, th1, v, delta])


def central_jacobian(f, x, step=1e-6):
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x))
    J = np.zeros((f0.size, x.size))
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        J[:, i] = (np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h)
    return J


def active_set_qp(H, g, G, h):
    """Minimise ``x'Hx/2 + g'x`` s.t. ``G x >= h`` by enumerating active sets."""
    from itertools import combinations

    n, m = H.shape[0], G.shape[0]
    best, best_val = None, np.inf
    for k in range(0, min(n, m) + 1):
        for act in combinations(range(m), k):
            act = list(act)
            Ga = G[act]
            K = np.block([[H, -Ga.T], [Ga, np.zeros((k, k))]]) if k else H
            rhs = np.r_[-g, h[act]] if k else -g
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                continue
            x, lam = sol[:n], sol[n:]
            if np.any(lam < -1e-10) or np.any(G @ x - h < -1e-10):
                continue
            val = 0.5 * x @ H @ x + g @ x
            if val < best_val:
                best, best_val = x, val
    return best


def random_pair(rng, min_abs_gap=1e-3, spread=2.5):
    """Random polygon pair whose gap or overlap is not within ``min_abs_gap`` of zero."""
    while True:
        P = random_convex_polygon(rng, center=rng.uniform(-spread, spread, 2))
        Q = random_convex_polygon(rng, center=rng.uniform(-spread, spread, 2))
        if abs(true_gap(P, Q)) >= min_abs_gap:
            return P, Q


def lp_verdicts(P, Q, pose=None):
    """LP feasibility of every block for vehicle ``P`` and obstacle ``Q``.

    ``pose = (R, T, P0)`` additionally gives the body-frame polygon for the
    body-frame dual; ``P`` must then equal ``P0`` posed by ``(R, T)``.
    """
    V, O = P.vertices, Q.vertices
    out = {
        "eq14": lp_eq14(V, O),
        "eq16": lp_line(V, O, slab=True),
        "eq17": lp_line(V, O),
        # no norm bound here, so the certificate scales freely; a unit margin keeps it well conditioned
        "eq18": lp_dual(P.normals, P.offsets, Q.normals, Q.offsets, eps=1.0),
        "eq19": lp_dual(P.normals, P.offsets, Q.normals, Q.offsets, norm_box=True),
    }
    if pose is not None:
        R, T, P0 = pose
        out["eq21"] = lp_dual_body_frame(P0.normals, P0.offsets, Q.normals, Q.offsets, R, T)
    return out
