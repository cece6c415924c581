"""Parameter retrieval from a recovered data matrix.

Locations come from a MUSIC pseudospectrum built on the lifted matrix: the
signal space of H(X) is spanned by vectors a(tau_k) (x) h_k, so tau is a
source location exactly when some direction h makes a(tau) (x) h orthogonal
to the noise space.  The criterion is the smallest eigenvalue of the s x s
matrix (a (x) I)^H (I - U U^H) (a (x) I) / n1.  Amplitude-times-coefficient
vectors are then recovered by linear least squares against the measurements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hankel_ops import hankel_apply
from .signal_model import wrap_distance

__all__ = ["RecoveryResult", "music_locations", "solve_weights"]


@dataclass
class RecoveryResult:
    """Recovered parameters: locations sorted ascending, weight vectors
    v_k ~ d_k * h_k, and the final measurement residual."""

    X_hat: np.ndarray
    taus_hat: np.ndarray
    weights_hat: np.ndarray  # (s, r): column k is v_k
    residual: float
    deficient: bool = False

    def to_dict(self):
        return {
            "taus_hat": [float(t) for t in self.taus_hat],
            "weights_hat_re": np.real(self.weights_hat).tolist(),
            "weights_hat_im": np.imag(self.weights_hat).tolist(),
            "residual": float(self.residual),
            "deficient": bool(self.deficient),
        }


def _noise_criterion(U, dims):
    """Return tau -> smallest eigenvalue of the projected steering Gram."""
    n1, s = dims.n1, dims.s
    Ub = U.reshape(n1, s, U.shape[1])  # (n1, s, r)

    def crit(tau):
        a = np.exp(-2j * np.pi * tau * np.arange(n1))
        # (a (x) I)^H U  ->  s x r
        AU = np.einsum("j,jsr->sr", a.conj(), Ub)
        # Gram of (I - UU^H)(a (x) I): n1*I_s - AU AU^H
        G = n1 * np.eye(s) - AU @ AU.conj().T
        return float(np.linalg.eigvalsh(G)[0]) / n1

    return crit


def _crit_grid(U, dims, grid):
    """Vectorized criterion over a grid of locations."""
    n1, s = dims.n1, dims.s
    Ub = U.reshape(n1, s, U.shape[1])
    a = np.exp(2j * np.pi * np.outer(grid, np.arange(n1)))  # conj steering
    AU = np.einsum("gj,jsr->gsr", a, Ub)
    G = n1 * np.eye(s)[None] - AU @ AU.conj().transpose(0, 2, 1)
    return np.linalg.eigvalsh(G)[:, 0] / n1


def music_locations(X_hat, dims, r, grid_size=None):
    """Locate r sources from the MUSIC pseudospectrum of H(X_hat).

    Scans a uniform grid (default 16*n points), picks the r largest local
    maxima of 1/criterion separated by at least 1/(2n) in wrap metric, and
    refines each with golden-section search to 1e-8 resolution.

    Returns (taus_sorted, deficient_flag).
    """
    n = dims.n
    grid_size = 16 * n if grid_size is None else grid_size
    if grid_size < 8 * n:
        raise ValueError("grid_size must be at least 8*n")
    if np.linalg.norm(X_hat) == 0:
        return np.array([]), True

    Z = hankel_apply(X_hat, dims)
    U, sv, _ = np.linalg.svd(Z, full_matrices=False)
    U = U[:, :r]

    grid = np.arange(grid_size) / grid_size
    vals = _crit_grid(U, dims, grid)

    # local minima of the criterion on the circular grid
    left = np.roll(vals, 1)
    right = np.roll(vals, -1)
    is_min = (vals <= left) & (vals <= right)
    cand = np.flatnonzero(is_min)
    cand = cand[np.argsort(vals[cand])]

    min_sep = 1.0 / (2.0 * n)
    picked = []
    for idx in cand:
        tau = grid[idx]
        if all(wrap_distance(tau, p) >= min_sep for p in picked):
            picked.append(tau)
        if len(picked) == r:
            break
    deficient = len(picked) < r

    crit = _noise_criterion(U, dims)
    h = 1.0 / grid_size
    refined = [_golden_min(crit, t - h, t + h) for t in picked]
    return np.sort(np.mod(refined, 1.0)), deficient


def _golden_min(fun, lo, hi, tol=1e-8):
    """Golden-section minimization on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return (a + b) / 2.0


def solve_weights(taus_hat, m, subspace):
    """Least-squares fit of v_k ~ d_k h_k given estimated locations.

    Solves min over {v_k} of sum_j |y[j] - sum_k e^{-2pi i tau_k j} B[j,:] v_k|^2.
    Returns (V, deficient) with V of shape (s, r); column norms carry the
    amplitude magnitudes, phases are absorbed into the directions.
    """
    B = subspace.B
    n, s = B.shape
    taus_hat = np.asarray(taus_hat)
    r = len(taus_hat)
    if r * s > n:
        raise ValueError("system is underdetermined: need r*s <= n")
    j = np.arange(n)
    phase = np.exp(-2j * np.pi * np.outer(j, taus_hat))  # (n, r)
    design = (phase[:, :, None] * B[:, None, :]).reshape(n, r * s)
    sol, _, rank, _ = np.linalg.lstsq(design, m.y, rcond=None)
    deficient = rank < r * s
    V = sol.reshape(r, s).T
    return V, deficient
