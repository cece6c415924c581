"""Sensing operator A, its adjoint, and the factored residual.

A maps an s x n matrix X to the length-n vector y[j] = b_j^H X[:, j], where
b_j is the j-th column of B^H.  The adjoint places v[j] * b_j in column j.
"""

from __future__ import annotations

import numpy as np

from .hankel_ops import fast_gstar_lowrank, weights

__all__ = ["SensingOperator"]


class SensingOperator:
    """A / A* for a fixed subspace; read-only after construction."""

    def __init__(self, subspace, dims):
        if subspace.B.shape != (dims.n, dims.s):
            raise ValueError("subspace shape does not match dims")
        self.subspace = subspace
        self.dims = dims
        self.weights = weights(dims)
        self._B = np.ascontiguousarray(subspace.B)
        self._Bc = np.ascontiguousarray(subspace.B.conj())

    def apply(self, X):
        """A(X): length-n vector of per-column projections."""
        if X.shape != (self.dims.s, self.dims.n):
            raise ValueError("X shape does not match dims")
        return np.einsum("js,sj->j", self._B, X)

    def adjoint(self, v):
        """A*(v): s x n matrix with column j equal to v[j] * b_j."""
        v = np.asarray(v)
        if v.shape != (self.dims.n,):
            raise ValueError("vector length does not match dims.n")
        return (self._Bc * v[:, None]).T

    def residual(self, L, R, m):
        """A(G*(L R^H)) - D y, evaluated through the fast low-rank path."""
        Xhat = fast_gstar_lowrank(L, R, self.dims, self.weights)
        return self.apply(Xhat) - m.weighted
