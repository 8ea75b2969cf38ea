"""Stage-local residual groups with forward-mode derivatives.

A :class:`StageGroup` evaluates the same residual function on ``K`` stage
blocks.  Block ``k`` reads the decision-vector entries ``index[k]``, a
shared data pytree and row ``k`` of a per-block parameter array.  Jacobians come from ``jax.jacfwd`` applied per block and
are scattered into global sparse matrices, so the returned sparsity is the
stage-block pattern by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import jax
import jax.numpy as jnp
import numpy as np

_COMPILED: dict = {}


def _compiled(fn):
    """Jitted value / Jacobian / weighted-Hessian kernels for ``fn(x, data, param)``."""
    hit = _COMPILED.get(fn)
    if hit is not None:
        return hit

    def weighted(x, data, param, w):
        return jnp.dot(w, fn(x, data, param))

    kernels = (
        jax.jit(jax.vmap(fn, in_axes=(0, None, 0))),
        jax.jit(jax.vmap(jax.jacfwd(fn), in_axes=(0, None, 0))),
        jax.jit(jax.vmap(jax.jacfwd(jax.grad(weighted)), in_axes=(0, None, 0, 0))),
    )
    _COMPILED[fn] = kernels
    return kernels


@dataclass
class StageGroup:
    """``K`` copies of a local residual map.

    ``is_eq`` flags each local residual as an equality (``== 0``) or an
    inequality (``>= 0``).  ``param`` holds constants that differ between
    blocks (one row per block); it defaults to a single zero column.
    """

    name: str
    fn: object
    index: np.ndarray  # (K, n_loc) int
    data: object
    is_eq: np.ndarray  # (m_loc,) bool
    param: np.ndarray | None = None  # (K, p)

    def __post_init__(self):
        self.index = np.asarray(self.index, dtype=np.int64)
        self.is_eq = np.asarray(self.is_eq, dtype=bool)
        if self.param is None:
            self.param = np.zeros((self.index.shape[0], 1))
        self.param = np.asarray(self.param, dtype=float).reshape(self.index.shape[0], -1)
        self._value, self._jac, self._hess = _compiled(self.fn)

    @property
    def n_blocks(self) -> int:
        return self.index.shape[0]

    @property
    def m_local(self) -> int:
        return self.is_eq.shape[0]

    @property
    def n_eq(self) -> int:
        return int(self.is_eq.sum()) * self.n_blocks

    @property
    def n_ineq(self) -> int:
        return int((~self.is_eq).sum()) * self.n_blocks

    def values(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(self._value(z[self.index], self.data, self.param))

    def jacobian_blocks(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(self._jac(z[self.index], self.data, self.param))

    def hessian_blocks(self, z: np.ndarray, weights: np.ndarray) -> np.ndarray:
        return np.asarray(self._hess(z[self.index], self.data, self.param, weights))
