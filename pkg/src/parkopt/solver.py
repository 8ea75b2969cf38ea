"""Primal-dual interior-point method for the assembled NLPs.

The problem class is::

    min f(x)  s.t.  c_E(x) = 0,  c_I(x) >= 0,  lo <= x <= hi

Inequalities get slacks ``c_I(x) - s = 0, s >= 0`` so the barrier
subproblem only carries equalities and simple bounds on ``w = (x, s)``.
Each iteration solves the symmetric primal-dual Newton system with a sparse
LU factorisation whose pivot signs give the inertia; a diagonal shift is
raised until the primal block is positive definite on the constraint null
space.  Steps are globalised by a filter line search (or, optionally, an
l1 merit function with an adaptive penalty), one second-order correction
and a least-squares feasibility restoration when the line search stalls.
The Hessian of the Lagrangian is exact by default; a damped BFGS
approximation is available through ``SolverOptions.hessian``.

Any object exposing ``n, m_eq, m_ineq, x_lower, x_upper, objective,
gradient, constraints, jacobians`` and ``hessian`` can be solved; see
:class:`FunctionProblem` for a small dense adapter.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

OPTIMAL = "Optimal"
MAX_ITER = "MaxIter"
INFEASIBLE = "Infeasible"
DIVERGED = "Diverged"


class BackendUnavailable(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    kkt_tol: float = 1e-6
    max_iter: int = 3000
    mu0: float = 0.1
    mu_factor: float = 0.2
    tau: float = 0.995
    hessian: str = "exact"  # or "bfgs"
    bound_push: float = 1e-2
    armijo: float = 1e-4
    merit: str = "filter"  # or "l1"
    max_time: float = float("inf")  # seconds
    verbose: bool = False

    def __post_init__(self):
        if not (0 < self.kkt_tol < 1):
            raise ValueError("kkt_tol must lie in (0, 1)")
        if self.max_iter <= 0 or self.mu0 <= 0 or not (0 < self.mu_factor < 1) or not (0 < self.tau < 1):
            raise ValueError("solver options must be positive")
        if self.merit not in ("filter", "l1"):
            raise ValueError("merit must be 'filter' or 'l1'")
        if self.hessian not in ("exact", "bfgs"):
            raise ValueError("hessian must be 'exact' or 'bfgs'")

    @classmethod
    def from_mapping(cls, data: dict) -> "SolverOptions":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown solver options: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "SolverOptions":
        from pathlib import Path
        path = Path(path)
        text = path.read_text()
        if path.suffix == ".toml":
            try:
                import tomllib
            except ImportError:  # Python < 3.11
                import tomli as tomllib
            data = tomllib.loads(text)
        else:
            import json
            data = json.loads(text)
        return cls.from_mapping(data.get("solver", data))


@dataclass
class SolveReport:
    status: str
    z: np.ndarray
    J: float
    tf: float | None
    TS: float | None
    iterations: int
    wall_ms: float
    VN: int
    CN: int
    kkt_error: float = float("nan")
    primal_inf: float = float("nan")
    log: list = field(default_factory=list, repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def write_log(self, path) -> None:
        keys = ["iter", "J", "inf_pr", "inf_du", "mu", "alpha"]
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=keys, extrasaction="ignore")
            w.writeheader()
            w.writerows(self.log)


# --------------------------------------------------------------------------
# small dense problems (tests, examples)

class FunctionProblem:
    """Dense NLP from ``jax``-traceable callables.

    ``eq(x)`` and ``ineq(x)`` return 1-D arrays (``ineq >= 0`` feasible).
    Derivatives come from ``jax`` forward mode.
    """

    def __init__(self, f, n, eq=None, ineq=None, lower=None, upper=None):
        import jax
        import jax.numpy as jnp

        self.n = n
        self._f = jax.jit(f)
        self._g = jax.jit(jax.grad(f))
        zero = lambda x: jnp.zeros((0,))  # noqa: E731
        self._eq = eq or zero
        self._in = ineq or zero
        x0 = jnp.zeros(n)
        self.m_eq = int(np.asarray(self._eq(x0)).shape[0])
        self.m_ineq = int(np.asarray(self._in(x0)).shape[0])
        self._je = jax.jit(jax.jacfwd(self._eq))
        self._ji = jax.jit(jax.jacfwd(self._in))

        def lag(x, ye, yi, sig):
            return sig * f(x) + jnp.dot(ye, self._eq(x)) + jnp.dot(yi, self._in(x))

        self._h = jax.jit(jax.hessian(lag))
        self.x_lower = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
        self.x_upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
        self.VN, self.CN = n, self.m_eq + self.m_ineq

    def objective(self, x):
        return float(self._f(x))

    def gradient(self, x):
        return np.asarray(self._g(x))

    def constraints(self, x):
        return np.asarray(self._eq(x), dtype=float), np.asarray(self._in(x), dtype=float)

    def jacobians(self, x):
        return (sp.csr_matrix(np.asarray(self._je(x)).reshape(self.m_eq, self.n)),
                sp.csr_matrix(np.asarray(self._ji(x)).reshape(self.m_ineq, self.n)))

    def hessian(self, x, y_eq, y_ineq, obj_factor=1.0):
        return sp.csr_matrix(np.asarray(self._h(x, y_eq, y_ineq, obj_factor)))


# --------------------------------------------------------------------------
# the interior-point iteration

class _Diverged(Exception):
    pass


def _push_inside(x, lo, hi, push):
    """Move ``x`` strictly inside the box (relative push towards the interior)."""
    x = np.clip(x, lo, hi)
    fl, fu = np.isfinite(lo), np.isfinite(hi)
    lo0, hi0 = np.where(fl, lo, 0.0), np.where(fu, hi, 0.0)
    width = np.where(fl & fu, hi0 - lo0, np.inf)
    dl = np.minimum(push * np.maximum(1.0, np.abs(lo0)), 0.5 * width)
    du = np.minimum(push * np.maximum(1.0, np.abs(hi0)), 0.5 * width)
    x = np.where(fl, np.maximum(x, lo0 + dl), x)
    x = np.where(fu, np.minimum(x, hi0 - du), x)
    return x


def _frac_to_boundary(v, dv, tau):
    """Largest ``alpha <= 1`` keeping ``v + alpha dv >= (1 - tau) v`` for positive ``v``."""
    neg = dv < 0
    if not np.any(neg):
        return 1.0
    return float(min(1.0, np.min(-tau * v[neg] / dv[neg])))


_EPS = np.finfo(float).eps
_DELTA_C = 1e-10  # keeps the constraint block quasi-definite


class _Kkt:
    """Symmetric KKT factorisation with inertia from unpivoted elimination.

    SuperLU in symmetric mode with a zero pivot threshold keeps the row and
    column orders identical, so the diagonal of ``U`` carries the pivot
    signs (Sylvester's law).  Solves are polished by iterative refinement
    and fall back to a pivoted LU when that fails.
    """

    def __init__(self, K, n_primal):
        self.K = K
        self.n_primal = n_primal
        self.lu = None
        self.n_zero = 0
        try:
            self.lu = spla.splu(K, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                                options=dict(SymmetricMode=True))
        except RuntimeError:
            self.n_zero = 1
            self.correct = False
            return
        d = self.lu.U.diagonal()
        self.n_zero = int((np.abs(d) < 1e-300).sum()) if np.array_equal(self.lu.perm_r, self.lu.perm_c) else 0
        if not np.array_equal(self.lu.perm_r, self.lu.perm_c):
            self.correct = True  # pivoting happened; inertia unknown
        else:
            self.correct = int((d > 0).sum()) == n_primal and self.n_zero == 0
        self.d = d

    def solve(self, rhs):
        x = self.lu.solve(rhs)
        tol = 1e-10 * (1.0 + np.max(np.abs(rhs)))
        for _ in range(5):
            r = rhs - self.K @ x
            if not np.all(np.isfinite(r)) or np.max(np.abs(r)) <= tol:
                break
            x = x + self.lu.solve(r)
        r = rhs - self.K @ x
        if not np.all(np.isfinite(r)) or np.max(np.abs(r)) > 1e-6 * (1.0 + np.max(np.abs(rhs))):
            x = spla.splu(self.K, permc_spec="MMD_AT_PLUS_A").solve(rhs)
        return x


class _DampedBFGS:
    """Powell-damped BFGS approximation of the Lagrangian Hessian."""

    def __init__(self, n):
        self.B = np.eye(n)
        self.x = self.g = None

    def update(self, x, grad_lag):
        if self.x is not None:
            s = x - self.x
            y = grad_lag - self.g
            Bs = self.B @ s
            sBs = float(s @ Bs)
            if sBs > 1e-14:
                sy = float(s @ y)
                theta = 1.0 if sy >= 0.2 * sBs else 0.8 * sBs / (sBs - sy)
                r = theta * y + (1 - theta) * Bs
                self.B += np.outer(r, r) / float(s @ r) - np.outer(Bs, Bs) / sBs
                if not np.all(np.isfinite(self.B)) or np.min(np.diag(self.B)) <= 0:
                    self.B = np.eye(x.size)
        self.x, self.g = x.copy(), grad_lag.copy()


def _ipm(problem, z0, opts: SolverOptions):
    n, mE, mI = problem.n, problem.m_eq, problem.m_ineq
    m = mE + mI
    N = n + mI
    lo = np.concatenate([np.asarray(problem.x_lower, float), np.zeros(mI)])
    hi = np.concatenate([np.asarray(problem.x_upper, float), np.full(mI, np.inf)])
    hasL, hasU = np.isfinite(lo), np.isfinite(hi)
    tol = opts.kkt_tol
    log = []
    t0 = time.perf_counter()

    x = _push_inside(np.asarray(z0, dtype=float).copy(), lo[:n], hi[:n], opts.bound_push)
    cE, cI = problem.constraints(x)
    s = np.maximum(cI, opts.bound_push)
    w = np.concatenate([x, s])
    mu = opts.mu0
    y = np.zeros(m)
    zL = np.where(hasL, 1.0, 0.0)
    zU = np.where(hasU, 1.0, 0.0)
    nu = 1.0  # l1 penalty
    filt = None  # filter entries (theta, phi); reset with every barrier update
    delta_last = 0.0
    bfgs = _DampedBFGS(n) if opts.hessian == "bfgs" else None

    def evaluate(w):
        x = w[:n]
        f = problem.objective(x)
        cE, cI = problem.constraints(x)
        g = np.concatenate([cE, cI - w[n:]])
        if not (np.isfinite(f) and np.all(np.isfinite(g))):
            raise _Diverged
        return f, g

    def barrier(w, f, mu):
        dl = w[hasL] - lo[hasL]
        du = hi[hasU] - w[hasU]
        if np.any(dl <= 0) or np.any(du <= 0):
            return np.inf
        return f - mu * (np.sum(np.log(dl)) + np.sum(np.log(du)))

    def jac(x):
        JE, JI = problem.jacobians(x)
        top = sp.hstack([JE, sp.csr_matrix((mE, mI))])
        if mI:
            bot = sp.hstack([JI, -sp.identity(mI)])
            return sp.vstack([top, bot]).tocsr()
        return top.tocsr()

    def kkt_matrix(Wd, J, delta, delta_c):
        top = Wd + sp.identity(N) * delta if delta else Wd
        return sp.bmat([[top, J.T], [J, -delta_c * sp.identity(m) if m else None]], format="csc")

    f, g = evaluate(w)
    it = 0
    status = MAX_ITER
    err = np.inf
    while True:
        x = w[:n]
        grad = np.concatenate([problem.gradient(x), np.zeros(mI)])
        J = jac(x)
        dl = np.where(hasL, w - lo, 1.0)
        du = np.where(hasU, hi - w, 1.0)
        rd0 = grad + J.T @ y - zL + zU
        inf_pr = float(np.max(np.abs(g))) if m else 0.0
        compl0 = max(float(np.max(np.abs(dl * zL)[hasL], initial=0.0)),
                     float(np.max(np.abs(du * zU)[hasU], initial=0.0)))
        smax = 100.0
        sd = max(smax, (np.sum(np.abs(y)) + np.sum(zL) + np.sum(zU)) / max(1, m + 2 * N)) / smax
        sc = max(smax, (np.sum(zL) + np.sum(zU)) / max(1, 2 * N)) / smax
        inf_du = float(np.max(np.abs(rd0))) if N else 0.0
        err = max(inf_du / sd, inf_pr, compl0 / sc)
        log.append({"iter": it, "J": f, "inf_pr": inf_pr, "inf_du": inf_du, "mu": mu, "alpha": 0.0})
        if opts.verbose:
            print(f"{it:4d} J={f:.6g} pr={inf_pr:.2e} du={inf_du:.2e} mu={mu:.1e}")
        if err <= tol:
            status = OPTIMAL
            break
        if it >= opts.max_iter or time.perf_counter() - t0 > opts.max_time:
            status = MAX_ITER
            break

        # barrier update (monotone)
        while mu > tol / 10:
            compl_mu = max(float(np.max(np.abs(dl * zL - mu)[hasL], initial=0.0)),
                           float(np.max(np.abs(du * zU - mu)[hasU], initial=0.0)))
            err_mu = max(inf_du / sd, inf_pr, compl_mu / sc)
            if err_mu > 10.0 * mu:
                break
            mu = max(tol / 10, min(opts.mu_factor * mu, mu ** 1.5))
            filt = None

        # Newton system
        if bfgs is None:
            W = problem.hessian(x, y[:mE], y[mE:], 1.0)
        else:
            JE, JI = problem.jacobians(x)
            bfgs.update(x, grad[:n] + JE.T @ y[:mE] + JI.T @ y[mE:])
            W = sp.csr_matrix(bfgs.B)
        W = sp.block_diag([W, sp.csr_matrix((mI, mI))], format="csr")
        sigma = np.where(hasL, zL / dl, 0.0) + np.where(hasU, zU / du, 0.0)
        bar_grad = grad - np.where(hasL, mu / dl, 0.0) + np.where(hasU, mu / du, 0.0)
        rhs = -np.concatenate([bar_grad + J.T @ y, g])
        Wd = W + sp.diags(sigma)

        # inertia correction: the primal block must be positive definite on
        # the null space of J, i.e. the factor shows N positive and m negative pivots
        delta, delta_c = 0.0, _DELTA_C
        for _ in range(60):
            kkt = _Kkt(kkt_matrix(Wd, J, delta, delta_c), N)
            if kkt.n_zero and delta_c < 1e-8 * mu ** 0.25:
                delta_c = 1e-8 * mu ** 0.25
                continue
            if kkt.correct:
                break
            if delta == 0:
                delta = 1e-4 if delta_last == 0 else max(1e-20, delta_last / 3)
            else:
                delta *= 8 if delta_last else 100
            if delta > 1e40:
                raise _Diverged
        else:
            raise _Diverged
        if delta:
            delta_last = delta
        sol = kkt.solve(rhs)
        if not np.all(np.isfinite(sol)):
            raise _Diverged
        dw, dy = sol[:N], sol[N:]
        dzL = np.where(hasL, (mu - zL * dw) / dl - zL, 0.0)
        dzU = np.where(hasU, (mu + zU * dw) / du - zU, 0.0)

        tau = max(opts.tau, 1.0 - mu)
        a_max = min(_frac_to_boundary(dl[hasL], dw[hasL], tau),
                    _frac_to_boundary(du[hasU], -dw[hasU], tau))
        a_z = min(_frac_to_boundary(zL[hasL], dzL[hasL], tau),
                  _frac_to_boundary(zU[hasU], dzU[hasU], tau))

        th = float(np.sum(np.abs(g)))
        gphi = float(bar_grad @ dw)
        phi = barrier(w, f, mu)

        def soc_step(gt):
            # second-order correction: re-linearise the constraints at the trial point
            corr = kkt.solve(np.concatenate([np.zeros(N), -gt]))
            if not np.all(np.isfinite(corr)):
                return None
            dws = dw + corr[:N]
            a_s = min(_frac_to_boundary(dl[hasL], dws[hasL], tau),
                      _frac_to_boundary(du[hasU], -dws[hasU], tau))
            try:
                fs, gs = evaluate(w + a_s * dws)
            except _Diverged:
                return None
            return w + a_s * dws, fs, gs, a_s

        if opts.merit == "l1":
            # the penalty follows the multiplier size and may shrink again, so a
            # transient multiplier spike does not freeze later steps
            nu_req = 1.1 * float(np.max(np.abs(y + dy), initial=0.0)) + 1e-3
            if th > 0:
                nu_req = max(nu_req, (gphi + 0.5 * max(0.0, float(dw @ (Wd @ dw)))) / (0.9 * th))
            nu = max(nu_req, 0.5 * nu) if nu > 2 * nu_req else max(nu, nu_req)
            D = gphi - nu * th

            def acceptable(alpha, ft, gt, wt):
                return barrier(wt, ft, mu) + nu * float(np.sum(np.abs(gt))) <= phi + nu * th + opts.armijo * alpha * D
        else:
            if filt is None:
                filt = []
                th_max = 1e4 * max(1.0, th)
                th_min = 1e-4 * max(1.0, th)
            f_type = [False]

            def acceptable(alpha, ft, gt, wt):
                tht = float(np.sum(np.abs(gt)))
                phit = barrier(wt, ft, mu)
                if not np.isfinite(phit) or tht >= th_max:
                    return False
                if any(tht >= tj and phit >= pj for tj, pj in filt):
                    return False
                switching = gphi < 0 and alpha * (-gphi) ** 2.3 > th ** 1.1
                if th <= th_min and switching:
                    f_type[0] = True
                    return phit - phi <= opts.armijo * alpha * gphi + 10 * _EPS * abs(phi)
                f_type[0] = False
                return tht <= (1 - 1e-5) * th or phit - phi <= -1e-5 * th + 10 * _EPS * abs(phi)

        a_min = 1e-12 if th == 0 else 1e-9
        alpha = a_max
        accepted = False
        soc_tried = False
        if np.max(np.abs(dw) / (1.0 + np.abs(w)), initial=0.0) < 10 * _EPS:
            # tiny step: the merit comparison is pure round-off, take the full step
            wt = w + alpha * dw
            ft, gt = evaluate(wt)
            accepted = True
            f_type = [True]
            alpha_floor = alpha
        else:
            alpha_floor = a_min
        while not accepted and alpha > alpha_floor:
            wt = w + alpha * dw
            try:
                ft, gt = evaluate(wt)
            except _Diverged:
                alpha *= 0.5
                continue
            if acceptable(alpha, ft, gt, wt):
                accepted = True
                break
            if not soc_tried and alpha == a_max and float(np.sum(np.abs(gt))) >= th:
                soc_tried = True
                res = soc_step(gt)
                if res is not None and acceptable(alpha, res[1], res[2], res[0]):
                    wt, ft, gt, alpha = res
                    accepted = True
                    break
            alpha *= 0.5
        if accepted and opts.merit == "filter" and not f_type[0]:
            filt.append(((1 - 1e-5) * th, phi - 1e-5 * th))

        if accepted:
            w, f, g = wt, ft, gt
            y = y + alpha * dy
            zL = zL + a_z * dzL
            zU = zU + a_z * dzU
        else:
            # feasibility restoration on the squared residual
            if filt is not None:
                filt.append((th, phi))
            ok, w, f, g = _restore(problem, w, lo, hi, hasL, hasU, mu, evaluate, jac, tau)
            if not ok:
                status = INFEASIBLE
                log[-1]["alpha"] = 0.0
                it += 1
                break
            y = np.zeros(m)
            alpha = 0.0
        # keep bound multipliers consistent with the primal-dual centrality
        dl = np.where(hasL, w - lo, 1.0)
        du = np.where(hasU, hi - w, 1.0)
        kap = 1e10
        zL = np.where(hasL, np.clip(zL, mu / (kap * dl), kap * mu / dl), 0.0)
        zU = np.where(hasU, np.clip(zU, mu / (kap * du), kap * mu / du), 0.0)
        log[-1]["alpha"] = alpha
        log[-1].update(delta=delta, amax=a_max, az=a_z, nu=nu, restored=not accepted)
        if opts.verbose:
            print(f"      alpha={alpha:.2e} amax={a_max:.2e} az={a_z:.2e} delta={delta:.1e} nu={nu:.2e} rest={not accepted}")
        it += 1
        if np.max(np.abs(w)) > 1e20:
            raise _Diverged

    return status, w[:n], it, log, err, (float(np.max(np.abs(g))) if m else 0.0)


def _restore(problem, w, lo, hi, hasL, hasU, mu, evaluate, jac, tau, max_steps=50):
    """Levenberg-Marquardt steps on ``0.5 |g(w)|^2`` inside the box."""
    f, g = evaluate(w)
    theta0 = float(np.sum(g * g))
    target = 0.81 * theta0
    m = g.size
    N = w.size
    zeta = 1e-4
    mu_r = max(mu, 1e-8) * 1e-2
    for _ in range(max_steps):
        J = jac(w[: problem.n])
        dl = np.where(hasL, w - lo, 1.0)
        du = np.where(hasU, hi - w, 1.0)
        sigma = np.where(hasL, mu_r / dl ** 2, 0.0) + np.where(hasU, mu_r / du ** 2, 0.0)
        b = np.where(hasL, mu_r / dl, 0.0) - np.where(hasU, mu_r / du, 0.0)
        K = sp.bmat([[sp.diags(zeta + sigma), J.T], [J, -sp.identity(m)]], format="csc")
        try:
            sol = spla.splu(K, permc_spec="MMD_AT_PLUS_A").solve(np.concatenate([b, -g]))
        except RuntimeError:
            return False, w, f, g
        dw = sol[:N]
        a = min(_frac_to_boundary(dl[hasL], dw[hasL], tau), _frac_to_boundary(du[hasU], -dw[hasU], tau))
        theta = float(np.sum(g * g))
        moved = False
        while a > 1e-10:
            try:
                ft, gt = evaluate(w + a * dw)
            except _Diverged:
                a *= 0.5
                continue
            if float(np.sum(gt * gt)) < theta * (1 - 1e-4 * a):
                w, f, g = w + a * dw, ft, gt
                moved = True
                break
            a *= 0.5
        if not moved:
            zeta *= 10
            if zeta > 1e6:
                return False, w, f, g
            continue
        zeta = max(1e-8, zeta / 3)
        if float(np.sum(g * g)) <= target:
            return True, w, f, g
    return float(np.sum(g * g)) < theta0, w, f, g


def _controls_and_tf(problem, z):
    if hasattr(problem, "i_controls") and hasattr(problem, "i_tf"):
        return z[problem.i_controls], float(z[problem.i_tf])
    return None, None


def _report(problem, status, z, iterations, wall_ms, log, err=float("nan"), inf_pr=float("nan")):
    z = np.asarray(z, dtype=float)
    u, tf = _controls_and_tf(problem, z)
    TS = float(np.sum(u * u)) if u is not None else None
    try:
        J = float(problem.objective(z))
    except Exception:  # noqa: BLE001 - diverged iterates may not evaluate
        J = float("nan")
    return SolveReport(status, z, J, tf, TS, iterations, wall_ms,
                       int(getattr(problem, "VN", problem.n)),
                       int(getattr(problem, "CN", problem.m_eq + problem.m_ineq)),
                       float(err), float(inf_pr), log)


def solve(problem, z0, opts: SolverOptions | None = None) -> SolveReport:
    """Run the interior-point method from ``z0``; never raises on numerical failure."""
    opts = opts or SolverOptions()
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (problem.n,):
        raise ValueError(f"initial point has length {z0.size}, expected {problem.n}")
    t0 = time.perf_counter()
    try:
        status, z, it, log, err, inf_pr = _ipm(problem, z0, opts)
    except (_Diverged, FloatingPointError, np.linalg.LinAlgError):
        status, z, it, log, err, inf_pr = DIVERGED, z0, 0, [], np.inf, np.inf
    wall = 1e3 * (time.perf_counter() - t0)
    return _report(problem, status, z, it, wall, log, err, inf_pr)


# --------------------------------------------------------------------------
# backend adapters

@dataclass
class BackendResult:
    status: str
    z: np.ndarray
    iterations: int = 0
    log: list = field(default_factory=list)


class BundledBackend:
    """The interior-point method of this module behind the adapter interface."""

    name = "bundled"

    def __init__(self, opts: SolverOptions | None = None):
        self.opts = opts or SolverOptions()

    def run(self, problem, z0) -> BackendResult:
        rep = solve(problem, z0, self.opts)
        self.last_report = rep
        return BackendResult(rep.status, rep.z, rep.iterations, rep.log)


def solve_with_backend(problem, z0, backend=None) -> SolveReport:
    """Solve through an adapter exposing ``run(problem, z0) -> BackendResult``.

    The report is rebuilt from the returned point, so ``J`` and ``TS`` are
    recomputed here whatever the backend.
    """
    backend = backend or BundledBackend()
    t0 = time.perf_counter()
    try:
        res = backend.run(problem, np.asarray(z0, dtype=float))
    except BackendUnavailable:
        raise
    except Exception as exc:  # noqa: BLE001 - any backend fault maps to one error
        raise BackendUnavailable(f"backend {getattr(backend, 'name', backend)!r} failed: {exc}") from exc
    wall = 1e3 * (time.perf_counter() - t0)
    if isinstance(backend, BundledBackend):
        return replace(backend.last_report)
    return _report(problem, res.status, res.z, res.iterations, wall, res.log)
