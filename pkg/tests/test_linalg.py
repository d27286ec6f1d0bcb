import numpy as np
import pytest

from bellforge import (
    DimensionCapError,
    herm_eig,
    kron,
    min_eigenvalue,
    psd_project,
    spectral_norm,
)
from bellforge.linalg import check_symmetric, sym


def random_symmetric(rng, d):
    a = rng.standard_normal((d, d))
    return (a + a.T) / 2.0


class TestKron:
    def test_identity_case(self):
        assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_antidiagonal(self):
        x = np.array([[0.0, 1.0], [1.0, 0.0]])
        expected = np.fliplr(np.eye(4))
        assert np.array_equal(kron(x, x), expected)

    def test_trace_multiplicativity(self):
        # oracle: direct product of independently computed traces
        rng = np.random.default_rng(0)
        for _ in range(10):
            a = random_symmetric(rng, 3)
            b = random_symmetric(rng, 3)
            assert np.isclose(np.trace(kron(a, b)), np.trace(a) * np.trace(b), atol=1e-12)

    def test_index_arithmetic(self):
        rng = np.random.default_rng(1)
        a = random_symmetric(rng, 2)
        b = random_symmetric(rng, 3)
        out = kron(a, b)
        for i in range(2):
            for j in range(2):
                for p in range(3):
                    for q in range(3):
                        assert out[i * 3 + p, j * 3 + q] == a[i, j] * b[p, q]

    def test_associativity(self):
        rng = np.random.default_rng(2)
        a, b, c = (random_symmetric(rng, d) for d in (2, 2, 3))
        assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))

    def test_dimension_cap(self):
        with pytest.raises(DimensionCapError) as err:
            kron(np.eye(200), np.eye(200), cap=1 << 14)
        assert err.value.required == 40000


class TestHermEig:
    def test_diagonal(self):
        eig = herm_eig(np.diag([3.0, 1.0, 2.0]))
        assert np.allclose(eig.values, [1.0, 2.0, 3.0])

    def test_pauli_x(self):
        eig = herm_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(eig.values, [-1.0, 1.0])

    def test_wigner_residuals(self):
        rng = np.random.default_rng(3)
        a = random_symmetric(rng, 8)
        recon, ortho = herm_eig(a).residuals(a)
        assert recon <= 1e-10
        assert ortho <= 1e-10

    def test_rejects_nonsymmetric(self):
        with pytest.raises(ValueError):
            check_symmetric(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestSpectralNorm:
    def test_zero(self):
        assert spectral_norm(np.zeros((3, 3))) == 0.0

    def test_rank_one(self):
        u = np.array([2.0, 0.0, 0.0])
        assert np.isclose(spectral_norm(np.outer(u, u)), 4.0, rtol=1e-9)

    def test_all_ones_row(self):
        for n in (1, 4, 9):
            assert np.isclose(spectral_norm(np.ones((1, n))), np.sqrt(n), rtol=1e-9)

    def test_matches_max_abs_eigenvalue(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            a = random_symmetric(rng, 6)
            lam = np.max(np.abs(np.linalg.eigvalsh(a)))
            assert np.isclose(spectral_norm(a), lam, rtol=1e-9)


class TestPsdProject:
    def test_psd_fixed_point(self):
        rng = np.random.default_rng(5)
        g = rng.standard_normal((4, 4))
        a = g @ g.T
        assert np.max(np.abs(psd_project(a) - a)) <= 1e-12

    def test_clips_negative_diagonal(self):
        assert np.allclose(psd_project(np.diag([1.0, -2.0])), np.diag([1.0, 0.0]))

    def test_variational_inequality(self):
        # projection onto a convex set: <A - proj, X - proj> <= 0 for PSD X
        rng = np.random.default_rng(6)
        a = random_symmetric(rng, 4)
        proj = psd_project(a)
        for _ in range(100):
            g = rng.standard_normal((4, 4))
            x = g @ g.T
            inner = np.tensordot(a - proj, x - proj, axes=2)
            assert inner <= 1e-10

    def test_idempotent(self):
        rng = np.random.default_rng(7)
        a = random_symmetric(rng, 5)
        once = psd_project(a)
        assert np.max(np.abs(psd_project(once) - once)) <= 1e-12

    def test_min_eigenvalue_helper(self):
        assert np.isclose(min_eigenvalue(np.diag([2.0, -3.0])), -3.0)

    def test_sym_helper(self):
        a = np.array([[1.0, 2.0], [0.0, 1.0]])
        assert np.array_equal(sym(a), np.array([[1.0, 1.0], [1.0, 1.0]]))
