"""Kernel correctness against numpy.linalg oracles and finite differences."""

import numpy as np
import pytest

import cdbeam._kernels as K
from cdbeam._jit import JIT_ENABLED


def _rng(seed):
    return np.random.default_rng(seed)


def random_spd(n, rng):
    A = rng.normal(size=(n, n))
    return A @ A.T + n * np.eye(n)


def random_sym(n, rng):
    A = rng.normal(size=(n, n))
    return 0.5 * (A + A.T)


class TestCholesky:
    def test_matches_numpy(self):
        rng = _rng(1)
        for n in (1, 2, 5, 17):
            A = random_spd(n, rng)
            L, ok = K.chol_lower(A)
            assert ok
            np.testing.assert_allclose(L, np.linalg.cholesky(A), rtol=1e-12, atol=1e-12)

    def test_rejects_indefinite(self):
        A = np.diag([1.0, -1.0])
        _, ok = K.chol_lower(A)
        assert not ok

    def test_logdet(self):
        rng = _rng(2)
        A = random_spd(8, rng)
        ok, ld = K.chol_logdet(A)
        assert ok
        assert abs(ld - np.linalg.slogdet(A)[1]) < 1e-10 * max(1, abs(ld))


class TestTriangularSolves:
    def test_forward_and_transpose(self):
        rng = _rng(3)
        n, k = 9, 4
        L = np.tril(rng.normal(size=(n, n))) + n * np.eye(n)
        B = rng.normal(size=(n, k))
        X = K.tri_lower_solve(L, B)
        np.testing.assert_allclose(L @ X, B, atol=1e-10)
        Y = K.tri_lower_t_solve(L, B)
        np.testing.assert_allclose(L.T @ Y, B, atol=1e-10)


class TestJacobi:
    def test_eigenpairs(self):
        rng = _rng(4)
        for n in (2, 3, 10, 25):
            A = random_sym(n, rng)
            w, V, ok = K.jacobi_eigh(A, 1e-13, 100)
            assert ok
            assert np.all(np.diff(w) >= -1e-12)
            np.testing.assert_allclose(V.T @ V, np.eye(n), atol=1e-10)
            np.testing.assert_allclose(A @ V, V @ np.diag(w), atol=1e-9 * max(1, np.abs(A).max()))

    def test_reconstruction(self):
        rng = _rng(5)
        A = random_sym(12, rng)
        w, V, ok = K.jacobi_eigh(A, 1e-13, 100)
        assert ok
        R = K.mat_sym_reconstruct(V, w)
        assert np.max(np.abs(R - A)) <= 1e-9 * max(1.0, np.abs(A).max())


class TestLdlt:
    def test_solve_matches_numpy(self):
        rng = _rng(6)
        for n in (1, 2, 3, 8, 20):
            A = random_sym(n, rng) + 0.1 * np.eye(n)
            b = rng.normal(size=n)
            L, ipiv, ok = K.ldlt_factor(A)
            assert ok
            x = K.ldlt_solve(L, ipiv, b)
            np.testing.assert_allclose(A @ x, b, atol=1e-9 * max(1, np.abs(b).max()))

    def test_indefinite(self):
        rng = _rng(7)
        n = 14
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        lam = np.concatenate([rng.uniform(0.5, 2, 6), -rng.uniform(0.5, 2, 8)])
        A = (Q * lam) @ Q.T
        b = rng.normal(size=n)
        L, ipiv, ok = K.ldlt_factor(0.5 * (A + A.T))
        assert ok
        x = K.ldlt_solve(L, ipiv, b)
        np.testing.assert_allclose(A @ x, b, atol=1e-9)

    def test_block_eig_inertia_matches_numpy(self):
        rng = _rng(8)
        for trial in range(60):
            n = int(rng.integers(2, 16))
            A = random_sym(n, rng)
            L, ipiv, ok = K.ldlt_factor(A)
            assert ok
            deigs = K.ldlt_block_eigs(L, ipiv)
            ev = np.linalg.eigvalsh(A)
            assert np.sum(deigs > 0) == np.sum(ev > 0)
            assert np.sum(deigs < 0) == np.sum(ev < 0)


class TestBarrierTerms:
    def test_against_finite_differences(self):
        """Gradient/Hessian of -logdet F(x) for a sparse-term affine family."""
        rng = _rng(9)
        n, p = 10, 4
        A0 = random_spd(n, rng)
        tvar = np.arange(p, dtype=np.int64)
        tk = np.array([3, 2, 4, 1], dtype=np.int64)
        kmax = 4
        tsupp = np.zeros((p, kmax), dtype=np.int64)
        tsmall = np.zeros((p, kmax, kmax))
        for i in range(p):
            k = tk[i]
            tsupp[i, :k] = np.sort(rng.choice(n, size=k, replace=False))
            M = rng.normal(size=(k, k))
            tsmall[i, :k, :k] = 0.1 * (M + M.T)
        x = rng.normal(size=p) * 0.1

        def value(xx):
            return K.affine_block_value(A0, tvar, tk, tsupp, tsmall, xx)

        F = value(x)
        L, ok = K.chol_lower(F)
        assert ok
        g = np.zeros(p)
        H = np.zeros((p, p))
        K.barrier_terms(L, tvar, tk, tsupp, tsmall, g, H)

        def logdet(xx):
            okk, ld = K.chol_logdet(value(xx))
            assert okk
            return ld

        h = 1e-6
        for i in range(p):
            e = np.zeros(p)
            e[i] = h
            gfd = (logdet(x + e) - logdet(x - e)) / (2 * h)
            assert abs(g[i] - gfd) < 2e-6 * (1 + abs(gfd))
        h2 = 2e-4  # second differences need a larger step against roundoff
        for i in range(p):
            for j in range(p):
                ei = np.zeros(p)
                ej = np.zeros(p)
                ei[i] = h2
                ej[j] = h2
                hfd = (
                    logdet(x + ei + ej) - logdet(x + ei - ej) - logdet(x - ei + ej) + logdet(x - ei - ej)
                ) / (4 * h2 * h2)
                # Hessian of -logdet is +tr(Finv Ai Finv Aj)
                assert abs(H[i, j] - (-hfd)) < 1e-5 * (1 + abs(hfd))


class TestJitPath:
    def test_jit_flag_consistent(self):
        import cdbeam._jit as jitmod

        assert jitmod.JIT_ENABLED == JIT_ENABLED

    @pytest.mark.skipif(not JIT_ENABLED, reason="jit disabled; interpreted path already in use")
    def test_interpreted_path_matches_jitted(self):
        """The .py_func of each jitted kernel is the pure-numpy fallback."""
        rng = _rng(10)
        A = random_spd(7, rng)
        Lj, okj = K.chol_lower(A)
        Lp, okp = K.chol_lower.py_func(A)
        assert okj == okp
        np.testing.assert_allclose(Lj, Lp, rtol=1e-14)
        S = random_sym(7, rng)
        wj, Vj, _ = K.jacobi_eigh(S, 1e-13, 100)
        wp, Vp, _ = K.jacobi_eigh.py_func(S, 1e-13, 100)
        np.testing.assert_allclose(wj, wp, rtol=1e-13, atol=1e-14)
        b = rng.normal(size=7)
        L, ipiv, _ = K.ldlt_factor(S + 3 * np.eye(7))
        Lp2, ipivp, _ = K.ldlt_factor.py_func(S + 3 * np.eye(7))
        np.testing.assert_allclose(L, Lp2, rtol=1e-14)
        np.testing.assert_array_equal(ipiv, ipivp)
        np.testing.assert_allclose(
            K.ldlt_solve(L, ipiv, b), K.ldlt_solve.py_func(L, ipiv, b), rtol=1e-13
        )
