"""Point-source instances, sensing subspaces, measurements and diagnostics.

The data model is: r point sources at locations tau_k in [0,1) with complex
amplitudes d_k and unknown subspace coefficients h_k in C^s, observed through
a known n x s subspace matrix B.  The target matrix is

    X = sum_k d_k * h_k * a(tau_k)^T,   a(tau)[j] = exp(-2*pi*1j*tau*j),

and the measurements are y[j] = b_j^H X[:, j] where b_j is the j-th column
of B^H.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ProblemDims",
    "PointSources",
    "Subspace",
    "Measurements",
    "sample_point_sources",
    "steering_vector",
    "build_target_matrix",
    "sample_subspace",
    "measure",
    "add_noise",
    "incoherence_mu1",
    "wrap_distance",
    "save_instance",
    "load_instance",
]

SUBSPACE_KINDS = ("dft-rows", "rademacher", "complex-gaussian")


@dataclass(frozen=True)
class ProblemDims:
    """Problem sizes: n samples, s subspace dimensions, r spikes.

    The Hankel split (n1, n2) always satisfies n1 + n2 = n + 1; the default
    split is n1 = ceil((n+1)/2).
    """

    n: int
    s: int
    r: int
    n1: int = 0
    n2: int = 0

    def __post_init__(self):
        if self.n1 == 0 and self.n2 == 0:
            n1 = (self.n + 2) // 2
            object.__setattr__(self, "n1", n1)
            object.__setattr__(self, "n2", self.n + 1 - n1)
        if self.n1 + self.n2 != self.n + 1:
            raise ValueError("n1 + n2 must equal n + 1")
        if not (1 <= self.r <= min(self.s * self.n1, self.n2)):
            raise ValueError("need 1 <= r <= min(s*n1, n2)")
        if not (1 <= self.s < self.n):
            raise ValueError("need 1 <= s < n")


@dataclass
class PointSources:
    """Ground-truth spikes: locations, amplitudes and subspace coefficients."""

    taus: np.ndarray  # (r,) in [0, 1)
    amps: np.ndarray  # (r,) complex
    coeffs: np.ndarray  # (s, r) complex, unit-norm columns

    @property
    def r(self):
        return len(self.taus)


@dataclass
class Subspace:
    """Known sensing subspace B (n x s) with row-coherence bound mu0."""

    B: np.ndarray
    kind: str
    mu0: float = 1.0


@dataclass
class Measurements:
    """Raw measurements y, weighted measurements D y and the noise level."""

    y: np.ndarray
    weighted: np.ndarray
    noise_level: float = 0.0


def wrap_distance(a, b):
    """Distance on the unit circle: min(|a-b|, 1-|a-b|)."""
    d = np.abs(np.asarray(a) - np.asarray(b)) % 1.0
    return np.minimum(d, 1.0 - d)


def sample_point_sources(r, rng, min_sep=None, s=1, max_resamples=10_000):
    """Draw a random point-source instance.

    Locations are uniform on [0,1), resampled until all pairwise wrap-around
    distances are >= min_sep when a separation is requested.  Amplitudes are
    d_k = (1 + 10^{c_k}) * exp(-1j*phi_k) with c_k ~ U[0,1] and
    phi_k ~ U[0,2pi).  Coefficient columns are standard complex Gaussian
    normalized to unit Euclidean norm.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if min_sep is not None and r * min_sep >= 1.0:
        raise ValueError("infeasible separation: r * min_sep must be < 1")

    taus = None
    for _ in range(max_resamples):
        cand = rng.uniform(0.0, 1.0, size=r)
        if min_sep is None or r == 1:
            taus = cand
            break
        srt = np.sort(cand)
        gaps = np.diff(np.concatenate([srt, [srt[0] + 1.0]]))
        if gaps.min() >= min_sep:
            taus = cand
            break
    if taus is None:
        raise RuntimeError(
            f"could not sample {r} locations with separation {min_sep} "
            f"in {max_resamples} attempts"
        )

    c = rng.uniform(0.0, 1.0, size=r)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=r)
    amps = (1.0 + 10.0**c) * np.exp(-1j * phi)

    coeffs = rng.standard_normal((s, r)) + 1j * rng.standard_normal((s, r))
    coeffs /= np.sqrt(2.0)
    coeffs /= np.linalg.norm(coeffs, axis=0, keepdims=True)
    return PointSources(taus=taus, amps=amps, coeffs=coeffs)


def steering_vector(tau, n):
    """Return [1, e^{-2pi i tau}, ..., e^{-2pi i tau (n-1)}]."""
    return np.exp(-2j * np.pi * tau * np.arange(n))


def build_target_matrix(sources, dims):
    """Assemble X = sum_k d_k h_k a(tau_k)^T, shape (s, n)."""
    if sources.coeffs.shape[0] != dims.s:
        raise ValueError("coefficient rows do not match dims.s")
    A = np.exp(-2j * np.pi * np.outer(sources.taus, np.arange(dims.n)))  # (r, n)
    return (sources.coeffs * sources.amps[None, :]) @ A


def sample_subspace(dims, kind, rng):
    """Draw an n x s subspace matrix of the given kind.

    dft-rows draws the n rows of B uniformly without replacement from the
    rows of the unnormalized n-point DFT matrix, truncated to s entries;
    every entry has unit modulus and the empirical mean of b_j b_j^H is I_s.
    rademacher draws +-1 entries; complex-gaussian draws unit-variance
    complex normal entries.
    """
    n, s = dims.n, dims.s
    if kind == "dft-rows":
        rows = rng.permutation(n)
        B = np.exp(-2j * np.pi * rows[:, None] * np.arange(s)[None, :] / n)
        mu0 = 1.0
    elif kind == "rademacher":
        B = rng.choice([-1.0, 1.0], size=(n, s)).astype(complex)
        mu0 = 1.0
    elif kind == "complex-gaussian":
        B = (rng.standard_normal((n, s)) + 1j * rng.standard_normal((n, s)))
        B /= np.sqrt(2.0)
        mu0 = float(np.max(np.abs(B) ** 2))
    else:
        raise ValueError(f"unknown subspace kind {kind!r}")
    return Subspace(B=B, kind=kind, mu0=mu0)


def measure(X, subspace, weights=None):
    """Apply the sensing operator: y[j] = b_j^H X[:, j].

    With b_j the j-th column of B^H this is y[j] = B[j, :] @ X[:, j].
    """
    B = subspace.B
    if X.shape != (B.shape[1], B.shape[0]):
        raise ValueError("X shape does not match subspace")
    y = np.einsum("js,sj->j", B, X)
    if weights is None:
        from .hankel_ops import weight_vector

        weights = weight_vector(B.shape[0])
    return Measurements(y=y, weighted=weights.sqrt_w * y, noise_level=0.0)


def add_noise(m, sigma_e, rng, weights=None):
    """Add noise e = sigma_e * ||y|| * g / ||g|| with g standard Gaussian.

    The construction forces ||e|| = sigma_e * ||y|| exactly, i.e.
    SNR(dB) = -20 log10(sigma_e).
    """
    if sigma_e < 0:
        raise ValueError("sigma_e must be >= 0")
    if sigma_e == 0:
        return Measurements(y=m.y.copy(), weighted=m.weighted.copy(), noise_level=0.0)
    n = len(m.y)
    g = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    e = sigma_e * np.linalg.norm(m.y) * g / np.linalg.norm(g)
    y = m.y + e
    if weights is None:
        from .hankel_ops import weight_vector

        weights = weight_vector(n)
    return Measurements(y=y, weighted=weights.sqrt_w * y, noise_level=float(sigma_e))


def incoherence_mu1(X, dims, r=None):
    """Estimate the incoherence of the lifted matrix H(X).

    Returns (n / r) * max(max_j ||U_j||_F^2, max_k ||e_k^T V||_2^2) computed
    from the rank-r SVD of H(X), with U_j the j-th s-row block of U.
    """
    from .hankel_ops import hankel_apply

    r = dims.r if r is None else r
    Z = hankel_apply(X, dims)
    U, sv, Vh = np.linalg.svd(Z, full_matrices=False)
    eff = int(np.sum(sv > 1e-12 * sv[0])) if sv[0] > 0 else 0
    if eff < r:
        warnings.warn(
            f"H(X) is numerically rank {eff} < r = {r}; "
            "mu1 computed from available singular vectors"
        )
        r_use = max(eff, 1)
    else:
        r_use = r
    U = U[:, :r_use]
    V = Vh[:r_use].conj().T
    Ub = U.reshape(dims.n1, dims.s, r_use)
    max_u = np.max(np.sum(np.abs(Ub) ** 2, axis=(1, 2)))
    max_v = np.max(np.sum(np.abs(V) ** 2, axis=1))
    return dims.n / r * max(max_u, max_v)


# -- instance (de)serialization ----------------------------------------------


def _split(z):
    z = np.asarray(z)
    return [[float(v.real), float(v.imag)] for v in z.ravel()]


def _join(pairs, shape):
    arr = np.array([complex(re, im) for re, im in pairs])
    return arr.reshape(shape)


def save_instance(path, dims, subspace_kind, seed, sources, noise_level=0.0):
    """Write a problem instance to JSON (seed round-trips bit-exactly)."""
    doc = {
        "dims": {"n": dims.n, "s": dims.s, "r": dims.r, "n1": dims.n1, "n2": dims.n2},
        "kind": subspace_kind,
        "seed": int(seed),
        "taus": [float(t) for t in sources.taus],
        "amps": _split(sources.amps),
        "coeffs": _split(sources.coeffs),  # row-major
        "noise_level": float(noise_level),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)


def load_instance(path):
    """Read an instance written by save_instance.

    Returns (dims, kind, seed, sources, noise_level).
    """
    with open(path) as fh:
        doc = json.load(fh)
    d = doc["dims"]
    dims = ProblemDims(n=d["n"], s=d["s"], r=d["r"], n1=d["n1"], n2=d["n2"])
    sources = PointSources(
        taus=np.array(doc["taus"], dtype=float),
        amps=_join(doc["amps"], (dims.r,)),
        coeffs=_join(doc["coeffs"], (dims.s, dims.r)),
    )
    return dims, doc["kind"], doc["seed"], sources, doc["noise_level"]
