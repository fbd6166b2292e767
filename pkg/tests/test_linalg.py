"""Public linear-algebra operations against independent oracles."""

import numpy as np
import pytest

from cdbeam import linalg
from cdbeam.fem import assemble
from cdbeam.model import LoadCase, Mesh, SupportSpec


def _rng(seed):
    return np.random.default_rng(seed)


def gauss_solve(A, b):
    """Plain dense Gaussian elimination with partial pivoting (independent oracle)."""
    A = A.astype(float).copy()
    b = b.astype(float).copy()
    n = len(b)
    for k in range(n):
        piv = k + int(np.argmax(np.abs(A[k:, k])))
        if piv != k:
            A[[k, piv]] = A[[piv, k]]
            b[[k, piv]] = b[[piv, k]]
        for i in range(k + 1, n):
            m = A[i, k] / A[k, k]
            A[i, k:] -= m * A[k, k:]
            b[i] -= m * b[k]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - A[i, i + 1 :] @ x[i + 1 :]) / A[i, i]
    return x


class TestSolveSym:
    def test_identity(self):
        b = np.array([3.0, -1.0, 2.0])
        np.testing.assert_allclose(linalg.solve_sym(np.eye(3), b), b)

    def test_diagonal(self):
        x = linalg.solve_sym(np.diag([2.0, -3.0]), np.array([4.0, 6.0]))
        np.testing.assert_allclose(x, [2.0, -2.0])

    def test_beam_system_vs_gauss_oracle(self, props):
        sys = assemble(
            props, LoadCase.uniform(0.1, 0.0), SupportSpec.simply_supported(), Mesh(2, 1.0)
        )
        x = linalg.solve_sym(sys.G0, sys.f_vec)
        x_ref = gauss_solve(sys.G0, sys.f_vec)
        assert np.max(np.abs(x - x_ref)) <= 1e-12 * (1 + np.max(np.abs(x_ref)))

    def test_residual_contract(self):
        rng = _rng(11)
        for n in (3, 10, 25):
            A = rng.normal(size=(n, n))
            A = 0.5 * (A + A.T) + 0.5 * n * np.eye(n)
            b = rng.normal(size=n)
            x = linalg.solve_sym(A, b)
            assert np.linalg.norm(A @ x - b) <= 1e-10 * (1 + np.linalg.norm(b))

    def test_negative_definite_handled(self):
        rng = _rng(12)
        A = -random_spd(8, rng)
        b = rng.normal(size=8)
        x = linalg.solve_sym(A, b)
        assert np.linalg.norm(A @ x - b) <= 1e-10 * (1 + np.linalg.norm(b))

    def test_singular_raises(self):
        A = np.zeros((3, 3))
        A[0, 0] = 1.0
        A[1, 1] = 1.0
        with pytest.raises(linalg.SingularMatrixError):
            linalg.solve_sym(A, np.ones(3))

    def test_roundtrip_property(self):
        rng = _rng(13)
        for _ in range(30):
            n = int(rng.integers(2, 20))
            A = rng.normal(size=(n, n))
            A = 0.5 * (A + A.T) + n * np.eye(n) * rng.choice([-1.0, 1.0])
            x_true = rng.normal(size=n)
            x = linalg.solve_sym(A, A @ x_true)
            assert np.linalg.norm(x - x_true) <= 1e-9 * (1 + np.linalg.norm(x_true))


def random_spd(n, rng):
    A = rng.normal(size=(n, n))
    return A @ A.T + n * np.eye(n)


class TestInertia:
    def test_trivial_diagonals(self):
        assert linalg.inertia(np.diag([1.0, 2.0, 3.0]), 1e-12) == (3, 0, 0)
        assert linalg.inertia(np.diag([1.0, 0.0, -1.0]), 1e-12) == (1, 1, 1)

    def test_constructed_spectrum(self):
        rng = _rng(14)
        for _ in range(20):
            n = int(rng.integers(2, 25))
            lam = rng.normal(size=n) * 3
            Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
            A = (Q * lam) @ Q.T
            want = (int(np.sum(lam > 1e-12)), int(np.sum(lam < -1e-12)), int(np.sum(np.abs(lam) <= 1e-12)))
            assert linalg.inertia(0.5 * (A + A.T), 1e-12) == want

    def test_agrees_with_eig_sym_bulk(self):
        rng = _rng(15)
        for _ in range(1000):
            n = int(rng.integers(2, 31))
            A = rng.normal(size=(n, n))
            A = 0.5 * (A + A.T)
            got = linalg.inertia(A, 1e-12)
            w, _ = linalg.eig_sym(A)
            want = (int(np.sum(w > 1e-12)), int(np.sum(w < -1e-12)), int(np.sum(np.abs(w) <= 1e-12)))
            assert got == want


class TestEigSym:
    def test_sorted_diagonal(self):
        w, _ = linalg.eig_sym(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(w, [1.0, 2.0, 3.0])

    def test_two_by_two_exchange(self):
        w, _ = linalg.eig_sym(np.array([[0.0, 1.0], [1.0, 0.0]]))
        np.testing.assert_allclose(w, [-1.0, 1.0], atol=1e-14)

    def test_reconstruction_oracle(self):
        rng = _rng(16)
        A = rng.normal(size=(30, 30))
        A = 0.5 * (A + A.T)
        w, V = linalg.eig_sym(A)
        scale = np.abs(A).max()
        assert np.max(np.abs(V @ np.diag(w) @ V.T - A)) <= 1e-9 * scale
        assert np.max(np.abs(V.T @ V - np.eye(30))) <= 1e-10


class TestGenEigMin:
    def test_proportional(self):
        rng = _rng(17)
        B = random_spd(6, rng)
        assert abs(linalg.gen_eig_sym_min(2 * B, B) - 2.0) < 1e-10

    def test_diagonal(self):
        assert abs(linalg.gen_eig_sym_min(np.diag([4.0, 9.0]), np.eye(2)) - 4.0) < 1e-12

    def test_congruence_scan_oracle(self):
        rng = _rng(18)
        for _ in range(10):
            n = int(rng.integers(2, 12))
            A = random_spd(n, rng)
            B = random_spd(n, rng)
            got = linalg.gen_eig_sym_min(A, B)
            # oracle: eigendecompose B, transform, scan Rayleigh spectrum
            wB, VB = np.linalg.eigh(B)
            Bmh = VB @ np.diag(wB**-0.5) @ VB.T
            ref = np.linalg.eigvalsh(Bmh @ A @ Bmh)[0]
            assert abs(got - ref) <= 1e-8 * (1 + abs(ref))

    def test_rejects_indefinite_B(self):
        with pytest.raises(linalg.NotPositiveDefiniteError):
            linalg.gen_eig_sym_min(np.eye(2), np.diag([1.0, -1.0]))
