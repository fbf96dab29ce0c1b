"""Compiled kernels against the pure numpy fallback."""

import numpy as np
import pytest

import mwbump._kernels_py as kpy
from mwbump.young import YoungFn, associate

try:
    import mwbump._kernels as kc
    HAVE_COMPILED = True
except ImportError:
    kc = None
    HAVE_COMPILED = False

pytestmark = pytest.mark.skipif(not HAVE_COMPILED,
                                reason="compiled kernels unavailable")


def params_of(phi):
    return phi.kernel_params


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(0)


class TestYoungEval:
    @pytest.mark.parametrize("phi", [YoungFn.power(2), YoungFn.power(1.5),
                                     YoungFn.power_log(2, 1),
                                     YoungFn.power_log(2, -1.5)])
    def test_parametric_families(self, phi, rng):
        t = rng.uniform(0, 50, 200)
        a = kc.young_eval(t, params_of(phi))
        b = kpy.young_eval(t, params_of(phi))
        assert np.allclose(a, b, rtol=1e-13)

    def test_grid_family(self, rng):
        bar = associate(YoungFn.power_log(2, 1))
        t = rng.uniform(0.001, 1000, 300)
        a = kc.young_eval(t, params_of(bar))
        b = kpy.young_eval(t, params_of(bar))
        assert np.allclose(a, b, rtol=1e-12)


class TestLuxRows:
    @pytest.mark.parametrize("phi", [YoungFn.power(2.5),
                                     YoungFn.power_log(2, 1)])
    def test_backends_agree(self, phi, rng):
        V = rng.uniform(0, 5, (30, 20))
        w = np.full(20, 0.05)
        a = kc.lux_rows(V, w, params_of(phi))
        b = kpy.lux_rows(V, w, params_of(phi))
        assert np.allclose(a, b, rtol=1e-9)

    def test_grid_family_rows(self, rng):
        bar = associate(YoungFn.power_log(2, 2))
        V = rng.uniform(0, 3, (10, 16))
        w = np.full(16, 1 / 16)
        a = kc.lux_rows(V, w, params_of(bar))
        b = kpy.lux_rows(V, w, params_of(bar))
        assert np.allclose(a, b, rtol=1e-9)

    def test_zero_rows(self):
        V = np.zeros((3, 4))
        w = np.full(4, 0.25)
        assert np.all(kc.lux_rows(V, w, params_of(YoungFn.power(2))) == 0)


class TestMvee:
    def test_ellipse_recovered(self):
        th = np.linspace(0, np.pi, 64, endpoint=False)
        dirs = np.stack([np.cos(th), np.sin(th)], 1)
        A = np.array([[2.0, 0.4], [0.4, 0.8]])
        P = dirs / np.linalg.norm(dirs @ A.T, axis=1)[:, None]
        for mod in (kc, kpy):
            M, iters, resid = mod.khachiyan_mvee(P, 1e-9, 100000)
            gauge = np.einsum("ij,jk,ik->i", P, np.linalg.inv(2 * M), P)
            assert gauge.max() <= 1 + 1e-8
            assert resid <= 1e-8

    def test_backends_agree(self, rng):
        pts = rng.normal(size=(100, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        pts *= rng.uniform(0.5, 2.0, (100, 1))
        Ma, ia, ra = kc.khachiyan_mvee(pts, 1e-7, 100000)
        Mb, ib, rb = kpy.khachiyan_mvee(pts, 1e-7, 100000)
        assert np.allclose(Ma, Mb, rtol=1e-6)
        assert abs(ia - ib) <= 2


class TestPairNorms:
    def test_opnorm_matches_svd(self, rng):
        for n in (1, 2, 3, 4):
            A = rng.normal(size=(6, n, n))
            A = A + A.transpose(0, 2, 1)
            B = rng.normal(size=(5, n, n))
            B = B + B.transpose(0, 2, 1)
            ref = np.array([[np.linalg.norm(x @ y, 2) for y in B]
                            for x in A])
            assert np.allclose(kc.pair_opnorm(A, B), ref, atol=1e-12)
            assert np.allclose(kpy.pair_opnorm(A, B), ref, atol=1e-12)

    def test_vecnorm_matches_direct(self, rng):
        A = rng.normal(size=(7, 3, 3))
        G = rng.normal(size=(9, 3))
        ref = np.array([[np.linalg.norm(x @ g) for g in G] for x in A])
        assert np.allclose(kc.pair_vecnorm(A, G), ref, atol=1e-12)
        assert np.allclose(kpy.pair_vecnorm(A, G), ref, atol=1e-12)


class TestEighBatch:
    def test_reconstruction_and_order(self, rng):
        for n in (2, 3, 4):
            S = rng.normal(size=(20, n, n))
            S = np.einsum("bij,bkj->bik", S, S) + np.eye(n)
            for mod in (kc, kpy):
                w, V = mod.eigh_batch(S)
                rec = np.einsum("bij,bj,bkj->bik", V, w, V)
                assert np.allclose(rec, S, atol=1e-10)
                assert np.all(np.diff(w, axis=1) >= -1e-12)
            wa, _ = kc.eigh_batch(S)
            wb, _ = kpy.eigh_batch(S)
            assert np.allclose(wa, wb, atol=1e-10)
