"""Projected gradient descent over the factored Hankel lift.

The decision variable is the stacked factor pair M = [L; R] with
L in C^{(s*n1) x r} and R in C^{n2 x r}, parameterizing the lifted matrix
as L R^H.  The objective is

    f(M) = 1/2 ||D y - A G*(L R^H)||^2
         + 1/2 ||(I - G G*)(L R^H)||_F^2
         + 1/16 ||L^H L - R^H R||_F^2,

minimized over the convex set of blockwise norm caps sqrt(mu*r*sigma/n) on
the s-row blocks of L and the rows of R.  All operator products go through
the FFT fast paths; the lifted matrix L R^H is never materialized.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .hankel_ops import (
    fast_g_times_R,
    fast_gh_times_L,
    fast_gstar_lowrank,
    hankel_apply,
    weights,
)

__all__ = [
    "FactorPair",
    "ProjectionParams",
    "SolverConfig",
    "SolverTrace",
    "objective",
    "gradient",
    "project",
    "spectral_init",
    "step",
    "solve",
    "recover_X",
    "distance",
]


@dataclass
class FactorPair:
    """Burer-Monteiro factors (L, R) of the lifted matrix L R^H."""

    L: np.ndarray  # (s*n1, r)
    R: np.ndarray  # (n2, r)

    def stacked(self):
        return np.vstack([self.L, self.R])

    @property
    def r(self):
        return self.L.shape[1]


@dataclass(frozen=True)
class ProjectionParams:
    """Feasible-set parameters: per-block norm cap sqrt(mu*r*sigma/n)."""

    mu: float
    sigma: float
    bound: float

    @staticmethod
    def make(mu, sigma, r, n):
        if mu <= 0 or sigma <= 0:
            raise ValueError("mu and sigma must be positive")
        return ProjectionParams(mu=mu, sigma=sigma, bound=np.sqrt(mu * r * sigma / n))


@dataclass
class SolverConfig:
    max_iters: int = 1000
    tol_residual: float = 1e-5  # stop when ||y - A(X_t)|| <= tol
    tol_stagnation: float = 1e-7  # relative iterate change
    step_mode: str = "backtracking"  # or "fixed"
    eta: float | None = None  # fixed step size, or initial step override
    bt_shrink: float = 0.5
    bt_c: float = 1e-4
    bt_max: int = 20
    mu: float = 4.0
    sigma: float | None = None  # None: auto sigma_1 from the init
    # None: stop on iterate stagnation only for noisy measurements
    use_stagnation: bool | None = None

    def __post_init__(self):
        if not (0.0 < self.bt_shrink < 1.0):
            raise ValueError("shrink factor must be in (0, 1)")
        if self.tol_residual <= 0 or self.tol_stagnation <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class SolverTrace:
    """Per-iteration solver record."""

    objective: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    step: list = field(default_factory=list)
    dist: list = field(default_factory=list)
    rel_err: list = field(default_factory=list)
    millis: list = field(default_factory=list)
    converged: bool = False
    stop_reason: str = "max_iters"

    @property
    def iterations(self):
        return len(self.objective)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("# blindsr trace schema=1\n")
            wr = csv.writer(fh)
            wr.writerow(["iteration", "f", "residual", "step", "dist", "rel_err", "millis"])
            for i in range(self.iterations):
                wr.writerow(
                    [i]
                    + [
                        format(v, ".17g")
                        for v in (
                            self.objective[i],
                            self.residual[i],
                            self.step[i],
                            self.dist[i],
                            self.rel_err[i],
                            self.millis[i],
                        )
                    ]
                )


def _grams(L, R):
    return L.conj().T @ L, R.conj().T @ R


def objective(pair, op, m, wv=None, xhat=None):
    """Objective value; the middle term uses ||L R^H||_F^2 = tr(Gram_L Gram_R)."""
    dims = op.dims
    wv = op.weights if wv is None else wv
    L, R = pair.L, pair.R
    if xhat is None:
        xhat = fast_gstar_lowrank(L, R, dims, wv)
    res = op.apply(xhat) - m.weighted
    gl, gr = _grams(L, R)
    lr_sq = float(np.real(np.trace(gl @ gr)))
    mid = max(lr_sq - float(np.linalg.norm(xhat) ** 2), 0.0)
    bal = float(np.linalg.norm(gl - gr) ** 2)
    return 0.5 * float(np.linalg.norm(res) ** 2) + 0.5 * mid + bal / 16.0


def gradient(pair, op, m, wv=None, xhat=None, res=None):
    """Wirtinger gradient (grad_L, grad_R) of the objective.

    With E = G A*(A G*(L R^H) - D y) and K = (I - G G*)(L R^H):
        grad_L = (E + K) R + 1/4 L (L^H L - R^H R)
        grad_R = (E + K)^H L + 1/4 R (R^H R - L^H L)
    assembled from fast convolution paths and r x r Gram matrices.
    """
    dims = op.dims
    wv = op.weights if wv is None else wv
    L, R = pair.L, pair.R
    if xhat is None:
        xhat = fast_gstar_lowrank(L, R, dims, wv)
    if res is None:
        res = op.apply(xhat) - m.weighted
    W = op.adjoint(res)
    gl, gr = _grams(L, R)
    bal = gl - gr
    grad_L = (
        fast_g_times_R(W, R, dims, wv)
        + L @ gr
        - fast_g_times_R(xhat, R, dims, wv)
        + 0.25 * (L @ bal)
    )
    grad_R = (
        fast_gh_times_L(W, L, dims, wv)
        + R @ gl
        - fast_gh_times_L(xhat, L, dims, wv)
        - 0.25 * (R @ bal)
    )
    return FactorPair(L=grad_L, R=grad_R)


def project(pair, params, dims):
    """Rescale s-row blocks of L and rows of R exceeding the norm cap."""
    bound = params.bound
    if bound <= 0:
        raise ValueError("projection bound must be positive")
    s, n1 = dims.s, dims.n1
    L = pair.L.copy()
    Lb = L.reshape(n1, s, -1)
    norms = np.sqrt(np.sum(np.abs(Lb) ** 2, axis=(1, 2)))
    over = norms > bound
    if np.any(over):
        Lb[over] *= (bound / norms[over])[:, None, None]
    R = pair.R.copy()
    rnorms = np.linalg.norm(R, axis=1)
    rover = rnorms > bound
    if np.any(rover):
        R[rover] *= (bound / rnorms[rover])[:, None]
    return FactorPair(L=L, R=R)


def _truncated_svd(Z, r, oversample=8, iters=30, seed=0):
    """Rank-r SVD: dense below 512 on the short side, else power iteration."""
    if min(Z.shape) <= 512:
        U, sv, Vh = np.linalg.svd(Z, full_matrices=False)
        return U[:, :r], sv[:r], Vh[:r]
    rng = np.random.default_rng(seed)
    k = min(r + oversample, min(Z.shape))
    Q = rng.standard_normal((Z.shape[1], k)) + 1j * rng.standard_normal((Z.shape[1], k))
    for _ in range(iters):
        Q, _ = np.linalg.qr(Z @ Q)
        Q, _ = np.linalg.qr(Z.conj().T @ Q)
    B = Z @ Q
    U, sv, Wh = np.linalg.svd(B, full_matrices=False)
    Vh = Wh @ Q.conj().T
    return U[:, :r], sv[:r], Vh[:r]


def spectral_init(m, op, r, mu=4.0, sigma=None):
    """One-step hard thresholding of H(A*(y)), split and projected.

    Returns (FactorPair, sigma1) where sigma1 is the top singular value of
    the truncated lift, used for the auto scale of the feasible set.
    """
    dims = op.dims
    if np.linalg.norm(m.y) == 0:
        raise ValueError("degenerate measurements: y is identically zero")
    Z0 = hankel_apply(op.adjoint(m.y), dims)
    U, sv, Vh = _truncated_svd(Z0, r)
    if sv[0] == 0:
        raise ValueError("degenerate measurements: lifted matrix has no energy")
    root = np.sqrt(sv)
    pair = FactorPair(L=U * root[None, :], R=Vh.conj().T * root[None, :])
    sigma1 = float(sv[0])
    params = ProjectionParams.make(mu, sigma if sigma is not None else sigma1, r, dims.n)
    return project(pair, params, dims), sigma1


def recover_X(pair, op):
    """X = D^{-1} G*(L R^H) through the fast path."""
    xhat = fast_gstar_lowrank(pair.L, pair.R, op.dims, op.weights)
    return xhat / op.weights.sqrt_w[None, :]


def distance(pair, pair_ref):
    """Procrustes-aligned distance min_Q ||M - M_ref Q||_F over unitary Q."""
    M = pair.stacked()
    Mr = pair_ref.stacked()
    if M.shape != Mr.shape:
        raise ValueError("factor shapes differ")
    W, _, Yh = np.linalg.svd(Mr.conj().T @ M)
    Q = W @ Yh
    return float(np.linalg.norm(M - Mr @ Q))


def step(pair, config, params, op, m, f_cur=None, grad=None, eta_start=None):
    """One projected gradient step; backtracking keeps the projection inside
    the sufficient-decrease test.

    Returns (new_pair, accepted_eta, f_new, stagnated).
    """
    dims = op.dims
    if grad is None:
        grad = gradient(pair, op, m)
    if f_cur is None:
        f_cur = objective(pair, op, m)
    if config.step_mode == "fixed":
        if config.eta is None:
            raise ValueError("fixed step mode requires eta")
        cand = project(
            FactorPair(pair.L - config.eta * grad.L, pair.R - config.eta * grad.R),
            params,
            dims,
        )
        return cand, config.eta, objective(cand, op, m), False

    gnorm2 = float(np.linalg.norm(grad.L) ** 2 + np.linalg.norm(grad.R) ** 2)
    eta = eta_start
    cand, f_new = pair, f_cur
    for _ in range(config.bt_max):
        cand = project(
            FactorPair(pair.L - eta * grad.L, pair.R - eta * grad.R), params, dims
        )
        f_new = objective(cand, op, m)
        if f_new <= f_cur - config.bt_c * eta * gnorm2:
            return cand, eta, f_new, False
        eta *= config.bt_shrink
    return cand, eta / config.bt_shrink, f_new, True


def solve(m, op, r, config=None, truth=None):
    """Run PGD from the spectral initialization.

    truth, when given, is a dict with optional keys "X" (ground-truth data
    matrix) and "M" (balanced ground-truth FactorPair); they populate the
    rel_err and dist trace columns.

    Returns (FactorPair, SolverTrace).
    """
    config = SolverConfig() if config is None else config
    dims = op.dims
    trace = SolverTrace()

    pair, sigma1 = spectral_init(m, op, r, mu=config.mu, sigma=config.sigma)
    sigma = sigma1 if config.sigma is None else config.sigma
    params = ProjectionParams.make(config.mu, sigma, r, dims.n)
    eta0 = config.eta if config.eta is not None else 1.0 / (2.0 * sigma1)

    wv = op.weights
    X_true = truth.get("X") if truth else None
    M_true = truth.get("M") if truth else None
    x_true_norm = np.linalg.norm(X_true) if X_true is not None else None

    stagnation_on = (
        config.use_stagnation
        if config.use_stagnation is not None
        else m.noise_level > 0
    )
    f_cur = objective(pair, op, m)
    eta_prev = eta0
    for _ in range(config.max_iters):
        t0 = time.perf_counter()
        xhat = fast_gstar_lowrank(pair.L, pair.R, dims, wv)
        res_w = op.apply(xhat) - m.weighted
        X_t = xhat / wv.sqrt_w[None, :]
        resid = float(np.linalg.norm(m.y - op.apply(X_t)))

        grad = gradient(pair, op, m, xhat=xhat, res=res_w)
        if config.step_mode == "fixed":
            new_pair, eta, f_new, stagnated = step(
                pair, config, params, op, m, f_cur=f_cur, grad=grad
            )
        else:
            eta_start = min(eta0, 2.0 * eta_prev)
            new_pair, eta, f_new, stagnated = step(
                pair, config, params, op, m, f_cur=f_cur, grad=grad, eta_start=eta_start
            )

        trace.objective.append(f_cur)
        trace.residual.append(resid)
        trace.step.append(eta)
        trace.dist.append(distance(pair, M_true) if M_true is not None else np.nan)
        trace.rel_err.append(
            float(np.linalg.norm(X_t - X_true)) / x_true_norm
            if X_true is not None
            else np.nan
        )
        trace.millis.append((time.perf_counter() - t0) * 1e3)

        if resid <= config.tol_residual:
            trace.converged = True
            trace.stop_reason = "residual"
            break

        delta = np.sqrt(
            np.linalg.norm(new_pair.L - pair.L) ** 2
            + np.linalg.norm(new_pair.R - pair.R) ** 2
        )
        scale = np.sqrt(
            np.linalg.norm(pair.L) ** 2 + np.linalg.norm(pair.R) ** 2
        )
        if stagnated and f_new >= f_cur:
            # line search could not find descent; keep the old iterate
            trace.stop_reason = "linesearch"
            break
        pair, f_cur, eta_prev = new_pair, f_new, eta
        if stagnation_on and scale > 0 and delta / scale <= config.tol_stagnation:
            trace.stop_reason = "stagnation"
            break

    return pair, trace
