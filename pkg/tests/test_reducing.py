import math

import numpy as np
import pytest

from mwbump.errors import MveeError
from mwbump.reducing import (
    ReducingOp,
    default_n_dirs,
    direction_norms,
    reducing_exact_p2,
    reducing_for,
    reducing_mvee,
    reducing_opnorm_pair,
    unit_directions,
)
from mwbump.weights import gen_random_field, op_norm
from mwbump.young import YoungFn, luxemburg_norm


def probe_directions(n, count=1000, seed=123):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(count, n))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


class TestExactP2:
    def test_constant_matrix(self):
        C = np.array([[2.0, 0.5], [0.5, 1.0]])
        R = reducing_exact_p2(np.stack([C] * 6))
        assert np.allclose(R.matrix, C, atol=1e-12)

    def test_two_diagonal_halves(self):
        cells = np.stack([np.diag([1.0, 2.0]), np.diag([3.0, 1.0])])
        R = reducing_exact_p2(cells)
        assert np.allclose(R.matrix, np.diag([math.sqrt(5.0),
                                              math.sqrt(2.5)]))

    def test_scalar_two_values(self):
        cells = np.array([[[1.0]], [[3.0]]])
        R = reducing_exact_p2(cells)
        assert R.matrix[0, 0] == pytest.approx(math.sqrt(5.0))

    def test_exactness_in_every_direction(self):
        rng = np.random.default_rng(2)
        cells = rng.normal(size=(10, 3, 3))
        cells = (cells + cells.transpose(0, 2, 1)) / 2 + 4 * np.eye(3)
        R = reducing_exact_p2(cells)
        psi = YoungFn.power(2)
        for e in probe_directions(3, 50):
            lhs = luxemburg_norm(np.linalg.norm(cells @ e, axis=1), psi)
            assert R.norm_of(e) == pytest.approx(lhs, rel=1e-10)


class TestMvee:
    def test_one_dimensional_exact(self):
        cells = np.array([[[1.0]], [[3.0]]])
        for psi in (YoungFn.power(2), YoungFn.power_log(2, 1)):
            R = reducing_mvee(cells, psi)
            ref = luxemburg_norm([1.0, 3.0], psi)
            assert R.matrix[0, 0] == pytest.approx(ref, rel=1e-9)

    def test_identity_field_normalized_psi(self):
        cells = np.stack([np.eye(2)] * 8)
        R = reducing_mvee(cells, YoungFn.power(3))  # power(3)(1) = 1
        assert np.allclose(R.matrix, np.eye(2), atol=1e-6)

    def test_degenerate_raises(self):
        cells = np.stack([np.diag([1.0, 0.0])] * 4)
        with pytest.raises(MveeError):
            reducing_mvee(cells, YoungFn.power(3))

    def test_matches_exact_p2_oracle(self):
        # acceptance band: |R'e| in [(1-eps)|Re|, sqrt(n)(1+eps)|Re|]
        psi = YoungFn.power(2)
        for n, seed in ((2, 0), (3, 1)):
            W = gen_random_field(1, 4, n, seed=seed, kappa=8, lam=0.6)
            cells = W.matrix_power(0.5).mats
            exact = reducing_exact_p2(cells)
            approx = reducing_mvee(cells, psi)
            for e in probe_directions(n, 1000, seed=7):
                lo = (1 - 0.05) * exact.norm_of(e)
                hi = math.sqrt(n) * (1 + 0.05) * exact.norm_of(e)
                assert lo <= approx.norm_of(e) <= hi

    def test_two_sided_band_random_fields(self):
        # ||Ae|| / |Re| in [1/(1.1 sqrt n), 1.1] on 1000 probes
        for n, psi, seed in ((2, YoungFn.power_log(2, 1), 3),
                             (3, YoungFn.power(2.5), 4)):
            W = gen_random_field(1, 3, n, seed=seed, kappa=6, lam=0.5)
            cells = W.matrix_power(1.0 / 3).mats
            R = reducing_for(cells, psi)
            dirs = probe_directions(n, 1000, seed=11)
            lhs = direction_norms(cells, psi, dirs)
            rvals = np.linalg.norm(dirs @ R.matrix.T, axis=1)
            ratio = lhs / rvals
            assert ratio.max() <= 1.1
            assert ratio.min() >= 1 / (math.sqrt(n) * 1.1)

    def test_provenance_recorded(self):
        cells = np.stack([np.eye(2)] * 4)
        R = reducing_mvee(cells, YoungFn.power(3), n_dirs=32)
        assert R.provenance["method"] == "mvee"
        assert R.provenance["n_dirs"] == 32
        assert "residual" in R.provenance
        assert "iters" in R.to_json_dict()["provenance"]


class TestOpnormPair:
    def test_identity_pair(self):
        I2 = ReducingOp(matrix=np.eye(2))
        assert reducing_opnorm_pair(I2, I2) == pytest.approx(1.0)

    def test_diagonal_pair(self):
        a = ReducingOp(matrix=np.diag([2.0, 1.0]))
        b = ReducingOp(matrix=np.diag([1.0, 3.0]))
        assert reducing_opnorm_pair(a, b) == pytest.approx(3.0)

    def test_against_direction_sampling(self):
        rng = np.random.default_rng(5)
        A = rng.normal(size=(3, 3))
        A = A @ A.T + np.eye(3)
        B = rng.normal(size=(3, 3))
        B = B @ B.T + 0.5 * np.eye(3)
        pair = reducing_opnorm_pair(ReducingOp(matrix=A), ReducingOp(matrix=B))
        dirs = probe_directions(3, 10000, seed=6)
        brute = np.linalg.norm(dirs @ (A @ B).T, axis=1).max()
        assert pair == pytest.approx(brute, rel=1e-3)


class TestReducingNormEquivalence:
    def test_opnorm_vs_luxemburg_of_opnorms(self):
        # |R|_op comparable to || |A|_op ||_{Psi,Q} within [1/(2n), 2n]
        for n, psi, seed in ((2, YoungFn.power(2), 0),
                             (2, YoungFn.power_log(2, 1), 1),
                             (3, YoungFn.power(2), 2)):
            W = gen_random_field(1, 4, n, seed=seed, kappa=8, lam=0.6)
            cells = W.matrix_power(0.5).mats
            R = reducing_for(cells, psi)
            cellwise = np.array([op_norm(c) for c in cells])
            lux = luxemburg_norm(cellwise, psi)
            ratio = op_norm(R.matrix) / lux
            assert 1 / (2 * n) <= ratio <= 2 * n

    def test_directions_deterministic(self):
        assert np.array_equal(unit_directions(2, 16), unit_directions(2, 16))
        assert np.array_equal(unit_directions(3, 64), unit_directions(3, 64))
        assert default_n_dirs(2) == 64
        assert default_n_dirs(3) == 512
