"""Vectorized Hankel lift calculus.

The lift H maps an s x n matrix X to the (s*n1) x n2 block-Hankel matrix
whose (j, k) block of s rows is column x_{j+k}.  Its adjoint H* sums blocks
along anti-diagonals, so H*H = D^2 scales column i by the anti-diagonal
multiplicity w_i.  G = H D^{-1} is an isometry (G*G = I).

Dense reference implementations (hankel_apply, hankel_adjoint, g_apply,
g_adjoint) are kept alongside the FFT-accelerated paths; the dense forms are
the test oracles and must never be removed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import fft, ifft, next_fast_len

__all__ = [
    "WeightVector",
    "weight_vector",
    "weights",
    "hankel_apply",
    "hankel_adjoint",
    "g_apply",
    "g_adjoint",
    "fast_gstar_lowrank",
    "fast_g_times_R",
    "fast_gh_times_L",
]


@dataclass(frozen=True)
class WeightVector:
    """Anti-diagonal multiplicities w_i of the (n1, n2) Hankel pattern."""

    w: np.ndarray
    sqrt_w: np.ndarray
    n1: int
    n2: int

    @property
    def n(self):
        return len(self.w)


def weight_vector(n, n1=None, n2=None):
    """Weights for an (n1, n2) split; default split n1 = ceil((n+1)/2)."""
    if n1 is None:
        n1 = (n + 2) // 2
        n2 = n + 1 - n1
    if n1 + n2 != n + 1:
        raise ValueError("n1 + n2 must equal n + 1")
    i = np.arange(n)
    w = np.minimum.reduce([i + 1, np.full(n, n1), np.full(n, n2), n - i])
    return WeightVector(w=w, sqrt_w=np.sqrt(w.astype(float)), n1=n1, n2=n2)


def weights(dims):
    """Weight vector for a ProblemDims."""
    return weight_vector(dims.n, dims.n1, dims.n2)


def hankel_apply(X, dims):
    """Dense lift: Z[j*s:(j+1)*s, k] = X[:, j+k], shape (s*n1, n2)."""
    s, n = X.shape
    if s != dims.s or n != dims.n:
        raise ValueError("X shape does not match dims")
    idx = np.arange(dims.n1)[:, None] + np.arange(dims.n2)[None, :]
    Z = X[:, idx]  # (s, n1, n2)
    return np.ascontiguousarray(Z.transpose(1, 0, 2)).reshape(s * dims.n1, dims.n2)


def hankel_adjoint(Z, dims):
    """Dense adjoint: column i of the output is the sum of blocks with j+k=i."""
    s, n1, n2 = dims.s, dims.n1, dims.n2
    if Z.shape != (s * n1, n2):
        raise ValueError("Z shape does not match dims")
    Zb = Z.reshape(n1, s, n2)
    out = np.zeros((s, dims.n), dtype=Z.dtype)
    for j in range(n1):
        out[:, j : j + n2] += Zb[j]
    return out


def g_apply(X, dims, wv=None):
    """G(X) = H(D^{-1} X): columns scaled by 1/sqrt(w_i) before lifting."""
    wv = weights(dims) if wv is None else wv
    return hankel_apply(X / wv.sqrt_w[None, :], dims)


def g_adjoint(Z, dims, wv=None):
    """G*(Z) = D^{-1} H*(Z)."""
    wv = weights(dims) if wv is None else wv
    return hankel_adjoint(Z, dims) / wv.sqrt_w[None, :]


def _nfft(n):
    return next_fast_len(n)


def fast_gstar_lowrank(L, R, dims, wv):
    """G*(L R^H) without forming L R^H, via r linear convolutions per channel.

    Column i of H*(L R^H) is sum_{p+q=i} L-block(p) conj(R[q, :])^T, which for
    each channel c and factor column l is the linear convolution of
    L[:, c, l] (length n1) with conj(R[:, l]) (length n2).
    """
    s, n, n1, n2 = dims.s, dims.n, dims.n1, dims.n2
    r = L.shape[1]
    if L.shape[0] != s * n1 or R.shape != (n2, r):
        raise ValueError("factor shapes do not match dims")
    m = _nfft(n)
    FL = fft(L.reshape(n1, s, r), m, axis=0)  # (m, s, r)
    FR = fft(R.conj(), m, axis=0)  # (m, r)
    conv = ifft(np.einsum("msr,mr->ms", FL, FR), axis=0)[:n]  # (n, s)
    return conv.T / wv.sqrt_w[None, :]


def fast_g_times_R(X, R, dims, wv):
    """(H(D^{-1} X)) R via reversed-vector convolutions, shape (s*n1, r).

    Per channel x and factor column u: (H_v(x) u)[j] = (reverse(x) * u)[n-1-j]
    with * the linear convolution.
    """
    s, n, n1, n2 = dims.s, dims.n, dims.n1, dims.n2
    r = R.shape[1]
    if X.shape != (s, n) or R.shape[0] != n2:
        raise ValueError("shapes do not match dims")
    Xs = X / wv.sqrt_w[None, :]
    m = _nfft(n)
    Frev = fft(Xs[:, ::-1], m, axis=1)  # (s, m)
    FR = fft(R, m, axis=0)  # (m, r)
    conv = ifft(np.einsum("cm,mr->mcr", Frev, FR), axis=0)  # (m, s, r)
    out = conv[n - 1 - np.arange(n1)]  # (n1, s, r)
    return out.reshape(n1 * s, r)


def fast_gh_times_L(X, L, dims, wv):
    """(G(X))^H L via per-channel correlations, shape (n2, r).

    [(H_v(x))^H u][k] = sum_j conj(x[j+k]) u[j] is the correlation of
    conj(x) with u, i.e. (reverse(u) * conj(x))[n1-1+k].
    """
    s, n, n1, n2 = dims.s, dims.n, dims.n1, dims.n2
    r = L.shape[1]
    if X.shape != (s, n) or L.shape[0] != s * n1:
        raise ValueError("shapes do not match dims")
    Xs = X / wv.sqrt_w[None, :]
    m = _nfft(n)
    FU = fft(Xs.conj(), m, axis=1)  # (s, m)
    Lb = L.reshape(n1, s, r)
    Fv = fft(Lb[::-1], m, axis=0)  # (m, s, r)
    conv = ifft(np.einsum("cm,mcr->mcr", FU, Fv), axis=0)  # (m, s, r)
    return conv[n1 - 1 : n1 - 1 + n2].sum(axis=1)  # (n2, r)
