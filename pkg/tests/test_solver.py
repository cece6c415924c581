"""Solver tests: objective/gradient correctness, projection, init, descent."""

import numpy as np
import pytest

from blindsr import (
    FactorPair,
    ProblemDims,
    ProjectionParams,
    SensingOperator,
    SolverConfig,
    build_target_matrix,
    distance,
    g_adjoint,
    g_apply,
    gradient,
    hankel_apply,
    measure,
    objective,
    project,
    recover_X,
    sample_point_sources,
    sample_subspace,
    solve,
    spectral_init,
    step,
    weights,
)


def _cplx(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _instance(seed=0, n=16, s=2, r=2, kind="dft-rows", min_sep=None):
    rng = np.random.default_rng(seed)
    dims = ProblemDims(n=n, s=s, r=r)
    src = sample_point_sources(r, rng, min_sep=min_sep, s=s)
    X = build_target_matrix(src, dims)
    sub = sample_subspace(dims, kind, rng)
    op = SensingOperator(sub, dims)
    m = measure(X, sub, op.weights)
    return rng, dims, X, op, m


def _truth_pair(X, dims, r):
    Z = hankel_apply(X, dims)
    U, sv, Vh = np.linalg.svd(Z, full_matrices=False)
    root = np.sqrt(sv[:r])
    return FactorPair(L=U[:, :r] * root, R=Vh[:r].conj().T * root), sv[:r]


def _dense_objective(pair, op, m):
    dims, wv = op.dims, op.weights
    Z = pair.L @ pair.R.conj().T
    Xh = g_adjoint(Z, dims, wv)
    res = op.apply(Xh) - m.weighted
    K = Z - g_apply(Xh, dims, wv)
    C = pair.L.conj().T @ pair.L - pair.R.conj().T @ pair.R
    return (
        0.5 * np.linalg.norm(res) ** 2
        + 0.5 * np.linalg.norm(K) ** 2
        + np.linalg.norm(C) ** 2 / 16.0
    )


def _dense_gradient(pair, op, m):
    dims, wv = op.dims, op.weights
    L, R = pair.L, pair.R
    Z = L @ R.conj().T
    Xh = g_adjoint(Z, dims, wv)
    res = op.apply(Xh) - m.weighted
    E = g_apply(op.adjoint(res), dims, wv)
    K = Z - g_apply(Xh, dims, wv)
    C = L.conj().T @ L - R.conj().T @ R
    grad_L = (E + K) @ R + 0.25 * L @ C
    grad_R = (E + K).conj().T @ L - 0.25 * R @ C
    return FactorPair(L=grad_L, R=grad_R)


class TestObjective:
    def test_zero_at_balanced_truth(self):
        _, dims, X, op, m = _instance(0, n=32, s=3, r=3)
        pair, sv = _truth_pair(X, dims, 3)
        assert objective(pair, op, m) <= 1e-16 * sv[0] ** 2

    def test_zero_factors(self):
        rng, dims, X, op, m = _instance(1)
        pair = FactorPair(
            L=np.zeros((dims.s * dims.n1, 2), dtype=complex),
            R=np.zeros((dims.n2, 2), dtype=complex),
        )
        assert objective(pair, op, m) == pytest.approx(
            0.5 * np.linalg.norm(m.weighted) ** 2, rel=1e-12
        )

    def test_matches_dense(self):
        rng, dims, X, op, m = _instance(2)
        for _ in range(10):
            pair = FactorPair(
                L=_cplx(rng, (dims.s * dims.n1, 2)), R=_cplx(rng, (dims.n2, 2))
            )
            assert objective(pair, op, m) == pytest.approx(
                _dense_objective(pair, op, m), rel=1e-10
            )


class TestGradient:
    def test_zero_at_balanced_truth(self):
        _, dims, X, op, m = _instance(3, n=32, s=3, r=3)
        pair, sv = _truth_pair(X, dims, 3)
        g = gradient(pair, op, m)
        assert np.linalg.norm(g.stacked()) <= 1e-9 * (1 + sv[0] ** 1.5)

    def test_central_difference(self):
        # real directional derivative equals 2 Re<grad/2, direction>, i.e.
        # Re<grad, direction> for the doubled conjugate cogradient used here
        rng, dims, X, op, m = _instance(4)
        for _ in range(10):
            pair = FactorPair(
                L=_cplx(rng, (dims.s * dims.n1, 2)), R=_cplx(rng, (dims.n2, 2))
            )
            dL, dR = _cplx(rng, pair.L.shape), _cplx(rng, pair.R.shape)
            g = gradient(pair, op, m)
            ip = np.real(np.vdot(g.L, dL) + np.vdot(g.R, dR))
            t = 1e-5
            fp = objective(FactorPair(pair.L + t * dL, pair.R + t * dR), op, m)
            fm = objective(FactorPair(pair.L - t * dL, pair.R - t * dR), op, m)
            fd = (fp - fm) / (2 * t)
            assert fd == pytest.approx(2.0 * (ip / 2.0), rel=1e-5)

    def test_matches_dense(self):
        rng, dims, X, op, m = _instance(5)
        for _ in range(5):
            pair = FactorPair(
                L=_cplx(rng, (dims.s * dims.n1, 2)), R=_cplx(rng, (dims.n2, 2))
            )
            g = gradient(pair, op, m)
            gd = _dense_gradient(pair, op, m)
            assert np.linalg.norm(g.stacked() - gd.stacked()) <= 1e-9 * np.linalg.norm(
                gd.stacked()
            )


class TestProject:
    def _params(self, bound):
        return ProjectionParams(mu=1.0, sigma=1.0, bound=bound)

    def test_feasible_unchanged(self):
        rng = np.random.default_rng(6)
        dims = ProblemDims(n=8, s=2, r=2)
        pair = FactorPair(L=_cplx(rng, (2 * dims.n1, 2)), R=_cplx(rng, (dims.n2, 2)))
        out = project(pair, self._params(1e6), dims)
        assert np.array_equal(out.L, pair.L)
        assert np.array_equal(out.R, pair.R)

    def test_oversized_block_rescaled(self):
        dims = ProblemDims(n=8, s=2, r=1)
        L = np.zeros((2 * dims.n1, 1), dtype=complex)
        L[0:2, 0] = [2.0, 0.0]  # block 0 norm 2
        R = np.zeros((dims.n2, 1), dtype=complex)
        out = project(FactorPair(L, R), self._params(1.0), dims)
        assert np.allclose(out.L[0:2, 0], [1.0, 0.0])
        assert np.allclose(out.L[2:], 0.0)

    def test_idempotent(self):
        rng = np.random.default_rng(7)
        dims = ProblemDims(n=12, s=3, r=2)
        pair = FactorPair(L=_cplx(rng, (3 * dims.n1, 2)), R=_cplx(rng, (dims.n2, 2)))
        p1 = project(pair, self._params(0.5), dims)
        p2 = project(p1, self._params(0.5), dims)
        assert np.allclose(p1.L, p2.L, atol=1e-15)
        assert np.allclose(p1.R, p2.R, atol=1e-15)

    def test_caps_enforced(self):
        rng = np.random.default_rng(8)
        dims = ProblemDims(n=12, s=3, r=2)
        pair = FactorPair(L=_cplx(rng, (3 * dims.n1, 2)), R=_cplx(rng, (dims.n2, 2)))
        out = project(pair, self._params(0.3), dims)
        Lb = out.L.reshape(dims.n1, 3, 2)
        assert np.all(np.sqrt(np.sum(np.abs(Lb) ** 2, axis=(1, 2))) <= 0.3 + 1e-12)
        assert np.all(np.linalg.norm(out.R, axis=1) <= 0.3 + 1e-12)

    def test_nonexpansive_toward_feasible(self):
        rng = np.random.default_rng(9)
        dims = ProblemDims(n=12, s=2, r=2)
        bound = 0.5
        pair = FactorPair(L=_cplx(rng, (2 * dims.n1, 2)), R=_cplx(rng, (dims.n2, 2)))
        # a feasible reference point
        ref = project(
            FactorPair(0.1 * _cplx(rng, pair.L.shape), 0.1 * _cplx(rng, pair.R.shape)),
            self._params(bound),
            dims,
        )
        out = project(pair, self._params(bound), dims)
        before = np.linalg.norm(pair.stacked() - ref.stacked())
        after = np.linalg.norm(out.stacked() - ref.stacked())
        assert after <= before + 1e-12


class TestSpectralInit:
    def test_quality_over_seeds(self):
        good = 0
        for seed in range(20):
            rng, dims, X, op, m = _instance(seed, n=64, s=4, r=4, min_sep=1 / 64)
            truth, sv = _truth_pair(X, dims, 4)
            pair0, sigma1 = spectral_init(m, op, 4)
            d0 = distance(pair0, truth)
            zero = FactorPair(np.zeros_like(truth.L), np.zeros_like(truth.R))
            assert d0 < distance(zero, truth)
            Z0 = hankel_apply(op.adjoint(m.y), dims)
            U, s0, Vh = np.linalg.svd(Z0, full_matrices=False)
            Zr = (U[:, :4] * s0[:4]) @ Vh[:4]
            rel = np.linalg.norm(Zr - hankel_apply(X, dims), 2) / sv[0]
            assert rel < 1.0

    def test_scaling_homogeneity(self):
        rng, dims, X, op, m = _instance(11, n=32, s=3, r=3)
        pair1, s1 = spectral_init(m, op, 3, mu=1e9)
        alpha = 4.0
        m2 = type(m)(y=alpha * m.y, weighted=alpha * m.weighted, noise_level=0.0)
        pair2, s2 = spectral_init(m2, op, 3, mu=1e9)
        assert s2 == pytest.approx(alpha * s1, rel=1e-10)
        # factors scale by sqrt(alpha), up to per-column phase
        assert np.abs(pair2.L[0, 0] / pair1.L[0, 0]) == pytest.approx(
            np.sqrt(alpha), rel=1e-8
        )

    def test_degenerate_measurements(self):
        _, dims, X, op, m = _instance(12)
        m.y = np.zeros_like(m.y)
        with pytest.raises(ValueError):
            spectral_init(m, op, 2)


class TestStepAndSolve:
    def test_zero_gradient_step_is_projection(self):
        rng, dims, X, op, m = _instance(13, n=32, s=3, r=3)
        pair, sv = _truth_pair(X, dims, 3)
        params = ProjectionParams.make(4.0, sv[0], 3, dims.n)
        cfg = SolverConfig()
        new, eta, f_new, stag = step(
            pair, cfg, params, op, m, eta_start=1.0 / (2 * sv[0])
        )
        # gradient vanishes at truth, so the iterate only gets projected
        assert np.linalg.norm(new.stacked() - project(pair, params, dims).stacked()) \
            <= 1e-8 * np.linalg.norm(pair.stacked())

    def test_monotone_descent(self):
        rng, dims, X, op, m = _instance(14, n=64, s=4, r=4, min_sep=1 / 64)
        pair, trace = solve(m, op, 4, SolverConfig(max_iters=100), truth={"X": X})
        f = np.array(trace.objective)
        assert np.all(np.diff(f) <= 1e-10 * (1 + f[:-1]))

    def test_tiny_fixed_step_descends(self):
        rng, dims, X, op, m = _instance(15, n=32, s=3, r=2)
        pair0, sigma1 = spectral_init(m, op, 2)
        params = ProjectionParams.make(4.0, sigma1, 2, dims.n)
        cfg = SolverConfig(step_mode="fixed", eta=1e-6 / sigma1)
        f0 = objective(pair0, op, m)
        new, eta, f1, _ = step(pair0, cfg, params, op, m)
        assert f1 < f0

    def test_solve_recovers(self):
        _, dims, X, op, m = _instance(16, n=64, s=4, r=4, min_sep=1 / 64)
        pair, trace = solve(m, op, 4, SolverConfig(max_iters=1000), truth={"X": X})
        assert trace.rel_err[-1] <= 1e-3

    def test_solve_zero_y_fails(self):
        _, dims, X, op, m = _instance(17)
        m.y = np.zeros_like(m.y)
        m.weighted = np.zeros_like(m.weighted)
        with pytest.raises(ValueError):
            solve(m, op, 2)


class TestRecoverX:
    def test_truth_round_trip(self):
        _, dims, X, op, m = _instance(18, n=32, s=3, r=3)
        pair, _ = _truth_pair(X, dims, 3)
        assert np.linalg.norm(recover_X(pair, op) - X) <= 1e-10 * np.linalg.norm(X)

    def test_zero_factor(self):
        _, dims, X, op, m = _instance(19)
        pair = FactorPair(
            L=np.zeros((dims.s * dims.n1, 2), dtype=complex),
            R=np.ones((dims.n2, 2), dtype=complex),
        )
        assert np.all(recover_X(pair, op) == 0)

    def test_matches_dense(self):
        rng, dims, X, op, m = _instance(20)
        pair = FactorPair(
            L=_cplx(rng, (dims.s * dims.n1, 2)), R=_cplx(rng, (dims.n2, 2))
        )
        dense = g_adjoint(pair.L @ pair.R.conj().T, dims, op.weights)
        dense /= op.weights.sqrt_w[None, :]
        assert np.linalg.norm(recover_X(pair, op) - dense) <= 1e-10 * np.linalg.norm(dense)


class TestDistance:
    def _pair(self, rng, dims, r=2):
        return FactorPair(
            L=_cplx(rng, (dims.s * dims.n1, r)), R=_cplx(rng, (dims.n2, r))
        )

    def test_self_distance_zero(self):
        rng = np.random.default_rng(21)
        dims = ProblemDims(n=12, s=2, r=2)
        pair = self._pair(rng, dims)
        assert distance(pair, pair) <= 1e-12

    def test_unitary_alignment(self):
        rng = np.random.default_rng(22)
        dims = ProblemDims(n=12, s=2, r=2)
        ref = self._pair(rng, dims)
        Q, _ = np.linalg.qr(_cplx(rng, (2, 2)))
        rotated = FactorPair(L=ref.L @ Q, R=ref.R @ Q)
        assert distance(rotated, ref) <= 1e-10

    def test_scaling(self):
        rng = np.random.default_rng(23)
        dims = ProblemDims(n=12, s=2, r=2)
        ref = self._pair(rng, dims)
        doubled = FactorPair(L=2 * ref.L, R=2 * ref.R)
        assert distance(doubled, ref) == pytest.approx(
            np.linalg.norm(ref.stacked()), rel=1e-10
        )

    def test_simultaneous_rotation_invariance(self):
        rng = np.random.default_rng(24)
        dims = ProblemDims(n=12, s=2, r=2)
        a, b = self._pair(rng, dims), self._pair(rng, dims)
        Q, _ = np.linalg.qr(_cplx(rng, (2, 2)))
        a2 = FactorPair(a.L @ Q, a.R @ Q)
        b2 = FactorPair(b.L @ Q, b.R @ Q)
        assert distance(a2, b2) == pytest.approx(distance(a, b), abs=1e-10)


class TestTrace:
    def test_csv_export(self, tmp_path):
        _, dims, X, op, m = _instance(25, n=32, s=3, r=3)
        pair, trace = solve(m, op, 3, SolverConfig(max_iters=20), truth={"X": X})
        path = tmp_path / "trace.csv"
        trace.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("#")
        assert lines[1].split(",") == [
            "iteration", "f", "residual", "step", "dist", "rel_err", "millis",
        ]
        assert len(lines) == 2 + trace.iterations
