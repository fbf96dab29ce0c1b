import math

import numpy as np
import pytest

from mwbump.constants import matrix_ap, two_weight_apq
from mwbump.dyadic import Cube, base_cube
from mwbump.operators import OperatorSpec, aux_single_cube, lp_norm, weak_lq_norm
from mwbump.suites import run_suite
from mwbump.verify import (
    b_q_weak_norm,
    duality_extremal,
    estimate_norm,
    exact_avg_norm_p2,
    exact_avg_norms_all,
    scalar_ap_oracle,
    scalar_apq_oracle,
    weak_norm_estimate,
)
from mwbump.weights import WeightField, gen_random_field


def scalar_field(values, d=1):
    v = np.asarray(values, dtype=float)
    L = round(math.log2(v.size) / d)
    return WeightField(d, L, 1, v.reshape(-1, 1, 1))


def identity_field(d=1, L=3, n=2):
    N = 2 ** (d * L)
    return WeightField(d, L, n, np.broadcast_to(np.eye(n), (N, n, n)).copy())


class TestScalarOracles:
    def test_ap_cross_check(self):
        rng = np.random.default_rng(0)
        w = rng.uniform(0.2, 5.0, 32)
        for p in (1.5, 2.0, 3.0):
            a = matrix_ap(scalar_field(w), p).value
            b = scalar_ap_oracle(w, p, 1, 5)
            assert a == pytest.approx(b, rel=1e-9)

    def test_apq_cross_check(self):
        rng = np.random.default_rng(1)
        u = rng.uniform(0.2, 5.0, 16)
        v = rng.uniform(0.2, 5.0, 16)
        for (p, q, alpha) in ((2.0, 2.0, 0.0), (2.0, 3.0, 0.25),
                              (1.0, 2.0, 0.5)):
            a = two_weight_apq(scalar_field(u), scalar_field(v),
                               p, q, alpha).value
            b = scalar_apq_oracle(u, v, p, q, alpha, 1, 4)
            assert a == pytest.approx(b, rel=1e-9)


class TestExactAvgNorm:
    def test_identity(self):
        I = identity_field()
        assert exact_avg_norm_p2(I, I, Cube((0,), 0, (0,))) == \
            pytest.approx(1.0)

    def test_hand_value(self):
        U = scalar_field([1.0, 4.0])
        assert exact_avg_norm_p2(U, U, Cube((0,), 0, (0,))) == \
            pytest.approx(1.25, abs=1e-12)

    def test_commuting_diagonal_reduces_to_scalar(self):
        rng = np.random.default_rng(2)
        du = rng.uniform(0.5, 3.0, (8, 2))
        dv = rng.uniform(0.5, 3.0, (8, 2))
        U = WeightField(1, 3, 2, np.einsum("ci,ij->cij", du, np.eye(2))
                        * np.eye(2))
        V = WeightField(1, 3, 2, np.einsum("ci,ij->cij", dv, np.eye(2))
                        * np.eye(2))
        got = exact_avg_norm_p2(U, V, Cube((0,), 0, (0,)))
        per_coord = [math.sqrt(du[:, j].mean() * (1 / dv[:, j]).mean())
                     for j in range(2)]
        assert got == pytest.approx(max(per_coord), rel=1e-12)

    def test_batched_matches_single(self):
        U = gen_random_field(1, 3, 2, seed=3, kappa=5, lam=0.5)
        V = gen_random_field(1, 3, 2, seed=4, kappa=5, lam=0.5)
        allv = exact_avg_norms_all(U, V, alpha=0.25)
        for k in (0, 1, 3):
            for i in range(2**k):
                single = exact_avg_norm_p2(U, V, base_cube(1, 3, k, i), 0.25)
                assert allv[k][i] == pytest.approx(single, rel=1e-12)


class TestEstimateNorm:
    def test_identity_averaging_norm_one(self):
        I = identity_field(1, 3, 2)
        spec = OperatorSpec(kind="averaging", U=I, V=I, p=2, q=2, alpha=0.0,
                            cubes=[Cube((0,), 0, (0,))])
        est = estimate_norm(spec, budget=2, seed=0, sweeps=0)
        assert est.value == pytest.approx(1.0, abs=1e-6)

    def test_matches_exact_oracle_on_random_pairs(self):
        rng_seeds = range(50)
        worst = 0.0
        for s in rng_seeds:
            U = gen_random_field(1, 3, 2, seed=1000 + s, kappa=6, lam=0.6)
            V = gen_random_field(1, 3, 2, seed=2000 + s, kappa=6, lam=0.6)
            cube = Cube((0,), 0, (0,))
            spec = OperatorSpec(kind="averaging", U=U, V=V, p=2, q=2,
                                alpha=0.0, cubes=[cube])
            est = estimate_norm(spec, budget=1, seed=s, sweeps=0)
            exact = exact_avg_norm_p2(U, V, cube)
            assert est.value <= exact * (1 + 1e-9)
            worst = max(worst, abs(est.value - exact) / exact)
        assert worst < 0.01

    def test_recheck_reproduces(self):
        U = gen_random_field(1, 4, 2, seed=5, kappa=5, lam=0.5)
        V = gen_random_field(1, 4, 2, seed=6, kappa=5, lam=0.5)
        spec = OperatorSpec(kind="matrix_maximal", U=U, V=V, p=2, q=2,
                            alpha=0.0)
        est = estimate_norm(spec, budget=4, seed=1, sweeps=2,
                            ascent_cells=8)
        assert est.recheck(spec) == pytest.approx(est.value, rel=1e-9)

    def test_budget_monotone(self):
        U = gen_random_field(1, 4, 2, seed=7, kappa=5, lam=0.5)
        V = gen_random_field(1, 4, 2, seed=8, kappa=5, lam=0.5)
        spec = OperatorSpec(kind="matrix_maximal", U=U, V=V, p=2, q=2,
                            alpha=0.0)
        small = estimate_norm(spec, budget=2, seed=3, sweeps=0)
        large = estimate_norm(spec, budget=8, seed=3, sweeps=0)
        assert large.value >= small.value - 1e-12

    def test_deterministic_under_seed(self):
        U = gen_random_field(1, 4, 2, seed=9, kappa=5, lam=0.5)
        V = gen_random_field(1, 4, 2, seed=10, kappa=5, lam=0.5)
        spec = OperatorSpec(kind="matrix_maximal", U=U, V=V, p=2, q=2,
                            alpha=0.0)
        a = estimate_norm(spec, budget=4, seed=2, sweeps=1, ascent_cells=4)
        b = estimate_norm(spec, budget=4, seed=2, sweeps=1, ascent_cells=4)
        assert a.value == b.value
        assert np.array_equal(a.best_f, b.best_f)

    def test_sanity_window_dyadic_maximal(self):
        # identity weights: norm lies in [1, known scalar envelope]
        I = identity_field(1, 5, 1)
        p = 2.0
        spec = OperatorSpec(kind="matrix_maximal", U=I, V=I, p=p, q=p,
                            alpha=0.0)
        est = estimate_norm(spec, budget=6, seed=0, sweeps=1,
                            ascent_cells=16)
        pp = p / (p - 1.0)
        assert 1.0 - 1e-9 <= est.value <= pp * 2 ** (1 / p) + 0.5

    def test_zero_operator(self):
        fam_cubes = [Cube((0,), 2, (0,))]
        I = identity_field(1, 3, 1)
        spec = OperatorSpec(kind="averaging", U=I, V=I, p=2, q=2,
                            alpha=0.0, cubes=fam_cubes)
        # function supported away from the cube gives ratio 0; estimator
        # still finds positive candidates, so just check it runs
        est = estimate_norm(spec, budget=1, seed=0, sweeps=0)
        assert est.value > 0


class TestWeakNorm:
    def test_identity_root_averaging(self):
        I = identity_field(1, 3, 1)
        spec = OperatorSpec(kind="averaging", U=I, V=I, p=2, q=2,
                            alpha=0.0, cubes=[Cube((0,), 0, (0,))])
        est = weak_norm_estimate(spec, budget=1, seed=0, sweeps=0)
        assert est.value == pytest.approx(1.0, abs=1e-9)

    def test_weak_below_strong(self):
        U = gen_random_field(1, 4, 2, seed=11, kappa=5, lam=0.5)
        V = gen_random_field(1, 4, 2, seed=12, kappa=5, lam=0.5)
        spec = OperatorSpec(kind="aux_maximal", U=U, V=V, p=2, q=2,
                            alpha=0.0)
        w = weak_norm_estimate(spec, budget=3, seed=1, sweeps=0)
        s = estimate_norm(spec, budget=3, seed=1, sweeps=0)
        assert w.value <= s.value + 1e-12

    def test_b_q_exact_matches_applied_extremal(self):
        U = gen_random_field(1, 3, 2, seed=13, kappa=5, lam=0.5)
        V = gen_random_field(1, 3, 2, seed=14, kappa=5, lam=0.5)
        cube = Cube((0,), 1, (1,))
        p, q, alpha = 2.0, 2.0, 0.0
        val, fex = b_q_weak_norm(U, V, cube, alpha, p, q)
        out = aux_single_cube(U, V, alpha, p, q, fex, cube)
        got = weak_lq_norm(out, q, 1, 3) / lp_norm(fex, p, 1, 3)
        assert got == pytest.approx(val, rel=1e-9)

    def test_b_q_p1_branch(self):
        U = gen_random_field(1, 3, 1, seed=15, kappa=5, lam=0.5)
        V = gen_random_field(1, 3, 1, seed=16, kappa=5, lam=0.5)
        val, fex = b_q_weak_norm(U, V, Cube((0,), 0, (0,)), 0.5, 1.0, 2.0)
        assert val > 0 and np.all(np.isfinite(fex))


class TestSuiteDeterminism:
    def test_reports_byte_identical(self):
        a = run_suite("holder", {"trials": 25, "seed": 3})
        b = run_suite("holder", {"trials": 25, "seed": 3})
        assert a.to_json() == b.to_json()

    def test_avgop_byte_identical(self):
        cfg = {"pairs": 2, "L": 4, "seed": 5}
        a = run_suite("avgop", cfg).to_json()
        b = run_suite("avgop", cfg).to_json()
        assert a == b

    def test_unknown_suite(self):
        from mwbump.errors import DomainError
        with pytest.raises(DomainError):
            run_suite("nonsense")

    def test_exit_code(self):
        rep = run_suite("holder", {"trials": 10, "seed": 0})
        assert rep.exit_code == 0
        assert "PASS" in rep.summary()


class TestDualityExtremal:
    def test_supported_on_cube(self):
        U = gen_random_field(1, 3, 2, seed=17, kappa=4, lam=0.5)
        V = gen_random_field(1, 3, 2, seed=18, kappa=4, lam=0.5)
        f = duality_extremal(U, V, 2.0, 2.0, Cube((0,), 1, (0,)))
        assert np.all(f[4:] == 0)
        assert np.any(f[:4] != 0)


class TestWorkers:
    def test_parallel_sweep_matches_serial(self):
        from mwbump import config
        from mwbump.constants import bump_constant_reducing
        from mwbump.young import YoungFn

        U = gen_random_field(1, 4, 2, seed=19, kappa=5, lam=0.5)
        V = gen_random_field(1, 4, 2, seed=20, kappa=5, lam=0.5)
        phi = YoungFn.power_log(2, 2)
        psi = YoungFn.power_log(2, 2)
        serial = bump_constant_reducing(U, V, 2, 2, 0.0, phi, psi).value
        config.set_workers(2)
        try:
            parallel = bump_constant_reducing(U, V, 2, 2, 0.0, phi,
                                              psi).value
        finally:
            config.set_workers(1)
        assert parallel == pytest.approx(serial, rel=1e-12)
