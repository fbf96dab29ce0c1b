import math

import numpy as np
import pytest

from mwbump.errors import DomainError, FieldError
from mwbump.weights import (
    WeightField,
    gen_power_weight,
    gen_random_field,
    load_scalar_field,
    log_spectral_distance,
    midpoints,
    op_norm,
    save_scalar_field,
    sigma_max,
)


def identity_field(d=1, L=3, n=2):
    N = 2 ** (d * L)
    return WeightField(d, L, n, np.broadcast_to(np.eye(n), (N, n, n)).copy())


class TestField:
    def test_validation_rejects_asymmetric(self):
        mats = np.broadcast_to(np.eye(2), (8, 2, 2)).copy()
        mats[3, 0, 1] = 1e-6
        with pytest.raises(FieldError):
            WeightField(1, 3, 2, mats)

    def test_validation_rejects_indefinite(self):
        mats = np.broadcast_to(np.eye(2), (8, 2, 2)).copy()
        mats[5] = [[1, 2], [2, 1]]
        with pytest.raises(FieldError):
            WeightField(1, 3, 2, mats)

    def test_cell_count_checked(self):
        with pytest.raises(FieldError):
            WeightField(1, 3, 2, np.broadcast_to(np.eye(2), (7, 2, 2)).copy())


class TestMatrixPower:
    def test_identity_any_power(self):
        W = identity_field()
        for r in (-2.0, -0.5, 0.5, 3.0):
            assert np.allclose(W.matrix_power(r).mats, W.mats)

    def test_known_square_root(self):
        mats = np.array([[[2.0, 1.0], [1.0, 2.0]]])
        W = WeightField(1, 0, 2, mats)
        s3 = math.sqrt(3)
        expected = np.array([[(s3 + 1) / 2, (s3 - 1) / 2],
                             [(s3 - 1) / 2, (s3 + 1) / 2]])
        assert np.allclose(W.matrix_power(0.5).mats[0], expected, atol=1e-12)
        assert W.matrix_power(0.5).mats[0] == pytest.approx(
            np.array([[1.3660, 0.3660], [0.3660, 1.3660]]), abs=1e-4)

    def test_root_then_square_recovers(self):
        W = gen_random_field(1, 4, 2, seed=1, kappa=5, lam=0.6)
        back = W.matrix_power(0.5).matrix_power(2.0)
        assert np.allclose(back.mats, W.mats, rtol=1e-9, atol=1e-12)

    def test_power_addition(self):
        W = gen_random_field(1, 3, 3, seed=2, kappa=4, lam=0.7)
        a = W.matrix_power(0.7)
        b = W.matrix_power(0.3)
        prod = np.einsum("cij,cjk->cik", a.mats, b.mats)
        assert np.allclose(prod, W.mats, rtol=1e-8)


class TestOpNorm:
    def test_identity(self):
        assert op_norm(np.eye(3)) == pytest.approx(1.0)

    def test_diagonal(self):
        assert op_norm(np.diag([2.0, 5.0])) == pytest.approx(5.0)

    def test_two_by_two(self):
        assert op_norm(np.array([[2.0, 1.0], [1.0, 2.0]])) == pytest.approx(3.0)

    def test_product_symmetry(self):
        # |AB|_op = |BA|_op for symmetric A, B
        rng = np.random.default_rng(0)
        for _ in range(20):
            A = rng.normal(size=(3, 3))
            A = A + A.T
            B = rng.normal(size=(3, 3))
            B = B + B.T
            assert sigma_max(A @ B) == pytest.approx(sigma_max(B @ A),
                                                     rel=1e-10)


class TestGenerators:
    def test_power_gamma_zero_identity(self):
        W = gen_power_weight(1, 4, 2, 0.0)
        assert np.allclose(W.mats, np.eye(2))

    def test_power_scalar_midpoints(self):
        W = gen_power_weight(1, 3, 1, 1.0, center=(0.0,))
        assert np.allclose(W.scalar(), midpoints(1, 3)[:, 0])

    def test_center_on_midpoint_offset_recorded(self):
        W = gen_power_weight(1, 2, 1, 1.0, center=(0.125,))
        assert W.meta.get("midpoint_offset_cells") == [0]
        assert np.all(W.scalar() > 0)

    def test_rotation_conjugation(self):
        W = gen_power_weight(1, 3, 2, (0.5, -0.25), rotation=0.7)
        evs = np.linalg.eigvalsh(W.mats)
        x = midpoints(1, 3)[:, 0]
        expected = np.sort(np.stack([np.abs(x - 0.5) ** 0.5,
                                     np.abs(x - 0.5) ** -0.25], 1), axis=1)
        assert np.allclose(evs, expected, rtol=1e-10)

    def test_random_determinism(self):
        A = gen_random_field(2, 3, 2, seed=7, kappa=10, lam=0.5)
        B = gen_random_field(2, 3, 2, seed=7, kappa=10, lam=0.5)
        assert np.array_equal(A.mats, B.mats)

    def test_random_kappa_one_identity(self):
        W = gen_random_field(1, 3, 2, seed=3, kappa=1.0, lam=0.5)
        assert np.allclose(W.mats, np.eye(2))

    def test_random_contract(self):
        W = gen_random_field(1, 5, 2, seed=11, kappa=10, lam=0.5)
        evs = np.linalg.eigvalsh(W.mats)
        assert evs.min() >= 1 / 10 - 1e-9
        assert evs.max() <= 10 + 1e-9
        for i in range(31):
            assert log_spectral_distance(W.mats[i], W.mats[i + 1]) <= 0.5 + 1e-9


class TestIO:
    def test_mwf1_round_trip(self, tmp_path):
        W = gen_random_field(2, 2, 3, seed=5, kappa=6, lam=0.8)
        p = tmp_path / "w.mwf1"
        W.save(p)
        back = WeightField.load(p)
        assert back.d == W.d and back.L == W.L and back.n == W.n
        assert np.array_equal(back.mats, W.mats)  # bit exact

    def test_json_round_trip(self):
        import json
        W = gen_random_field(1, 3, 2, seed=9, kappa=4, lam=0.6)
        back = WeightField.from_json_dict(
            json.loads(json.dumps(W.to_json_dict())))
        assert np.array_equal(back.mats, W.mats)

    def test_scalar_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        v = rng.normal(size=16)
        p = tmp_path / "f.mws1"
        save_scalar_field(p, v, 1, 4)
        back, d, L, box = load_scalar_field(p)
        assert np.array_equal(back, v)
        assert (d, L, box) == (1, 4, 1.0)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "x.bin"
        p.write_bytes(b"NOPE" + b"\0" * 64)
        with pytest.raises(DomainError):
            WeightField.load(p)


class TestRefine:
    def test_refine_preserves_cube_averages(self):
        W = gen_random_field(1, 3, 2, seed=4, kappa=5, lam=0.7)
        R = W.refine()
        assert R.L == 4
        assert np.allclose(R.mats.reshape(8, 2, 2, 2).mean(axis=1), W.mats)

    def test_refine_2d(self):
        W = gen_random_field(2, 2, 1, seed=6, kappa=3, lam=0.9)
        R = W.refine()
        a = W.mats[:, 0, 0].reshape(4, 4)
        b = R.mats[:, 0, 0].reshape(8, 8)
        assert np.allclose(b[::2, ::2], a)
        assert np.allclose(b[1::2, 1::2], a)


class TestCorruptFiles:
    def test_truncated_field_file(self, tmp_path):
        W = gen_random_field(1, 3, 2, seed=1, kappa=4, lam=0.5)
        p = tmp_path / "w.mwf1"
        W.save(p)
        blob = p.read_bytes()
        p.write_bytes(blob[: len(blob) - 16])
        with pytest.raises(Exception):
            WeightField.load(p)

    def test_scalar_wrong_magic(self, tmp_path):
        p = tmp_path / "s.bin"
        p.write_bytes(b"MWF1" + b"\0" * 32)  # field magic, not scalar
        with pytest.raises(DomainError):
            load_scalar_field(p)
