import numpy as np
import pytest
from numpy.polynomial import Polynomial

from fixtures import generic_cubic, random_cubic, random_pose
from studylink import (
    Context,
    EPS,
    I,
    J,
    K,
    ONE,
    MotionPoly,
    div_rem_quadratic,
    factorize,
    factorize_cubic,
    mobius_reparam,
    mp_eval,
    mp_mul,
    norm_poly,
    proj_distance,
    quadratic_factors,
    right_factor,
    study_residual,
)
from studylink.errors import NotAMotionPolynomial, RealRootPresent
from studylink.motion import RepeatedFactorWarning, ensure_invertible_lead, right_divide_linear

L = MotionPoly.linear


def mp(*coeffs):
    return MotionPoly([DQ if not np.isscalar(DQ) else DQ * ONE for DQ in coeffs])


def same_poly(p, q, tol=1e-9):
    a, b = np.trim_zeros(np.asarray(p.coef), "b"), np.trim_zeros(np.asarray(q.coef), "b")
    return a.shape == b.shape and np.allclose(a, b, atol=tol)


class TestMultiply:
    def test_conjugate_pair(self):
        assert np.allclose(mp_mul(L(I), L(-1 * I)).coeffs, mp(1, 0, 1).coeffs)

    def test_order_matters(self):
        assert np.allclose((L(I) * L(J)).coeffs, mp(K, -1 * (I + J), 1).coeffs)
        assert np.allclose((L(J) * L(I)).coeffs, mp(-1 * K, -1 * (I + J), 1).coeffs)

    def test_properties(self):
        rng = np.random.default_rng(20)
        for _ in range(50):
            A, B, C = (MotionPoly(rng.normal(size=(3, 8)) + 1j * rng.normal(size=(3, 8))) for _ in range(3))
            assert ((A * B) * C).distance(A * (B * C)) <= 1e-11 * (A * B * C).magnitude()
            lhs = A * (B + C)
            assert np.allclose(lhs.coeffs, (A * B + A * C).coeffs, atol=1e-11 * lhs.magnitude())


class TestNorm:
    def test_linear(self):
        assert same_poly(norm_poly(L(I)), Polynomial([1, 0, 1]))
        assert same_poly(norm_poly(L(1 + I)), Polynomial([2, -2, 1]))

    def test_cubic_is_product(self):
        nu = norm_poly(generic_cubic())
        expected = Polynomial([2, -2, 1]) * Polynomial([5, -4, 1]) * Polynomial([1, 0, 1])
        assert same_poly(nu, expected)

    def test_not_a_motion(self):
        with pytest.raises(NotAMotionPolynomial):
            norm_poly(mp(EPS, 1))

    def test_multiplicative(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            A, _ = random_cubic(rng)
            B, _ = random_cubic(rng)
            assert np.allclose(norm_poly(A * B).coef, (norm_poly(A) * norm_poly(B)).coef, atol=1e-9 * (A * B).magnitude() ** 2)


class TestQuadraticFactors:
    def test_round_trip(self):
        qs = quadratic_factors(Polynomial([1, 0, 1]) * Polynomial([2, -2, 1]))
        assert len(qs) == 2
        assert any(same_poly(q, Polynomial([1, 0, 1])) for q in qs)
        assert any(same_poly(q, Polynomial([2, -2, 1])) for q in qs)

    def test_single(self):
        (q,) = quadratic_factors(Polynomial([1, 0, 1]))
        assert same_poly(q, Polynomial([1, 0, 1]))

    def test_real_root(self):
        with pytest.raises(RealRootPresent):
            quadratic_factors(Polynomial([-1, 0, 1]) * Polynomial([1, 0, 1]))

    def test_repeated_flagged(self):
        with pytest.warns(RepeatedFactorWarning):
            qs = quadratic_factors(Polynomial([1, 0, 1]) ** 2)
        assert len(qs) == 2


class TestDivision:
    def test_example(self):
        Q, R = div_rem_quadratic(L(I) * L(J), Polynomial([1, 0, 1]))
        assert np.allclose(Q.coeffs, mp(1).coeffs)
        # C - M = -(i + j) t + (k - 1)
        assert np.allclose(R.coeffs, mp(K - 1, -1 * (I + J)).coeffs)

    def test_exact(self):
        Q, R = div_rem_quadratic(mp(1, 0, 1), Polynomial([1, 0, 1]))
        assert np.allclose(Q.coeffs, mp(1).coeffs)
        assert np.allclose(R.coeffs, 0)

    def test_identity(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            C = MotionPoly(rng.normal(size=(5, 8)))
            M = Polynomial([rng.uniform(0.5, 3), rng.normal(), 1.0])
            Q, R = div_rem_quadratic(C, M)
            back = Q * MotionPoly(np.outer(M.coef, ONE.coeffs)) + R
            assert R.degree <= 1
            assert np.max(np.abs(back.coeffs - C.coeffs)) <= 1e-10

    def test_needs_monic(self):
        with pytest.raises(ValueError):
            div_rem_quadratic(mp(1, 0, 1), Polynomial([1, 0, 2]))


class TestRightFactor:
    def test_two_factor_example(self):
        h = right_factor(L(I) * L(J), Polynomial([1, 0, 1]))
        assert h.allclose(J)

    def test_linear(self):
        assert right_factor(L(I), Polynomial([1, 0, 1])).allclose(I)

    def test_cubic_round_trip(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            C, hs = random_cubic(rng)
            M = norm_poly(L(hs[2]))
            M = Polynomial(M.coef / M.coef[-1])
            h = right_factor(C, M)
            assert h.allclose(hs[2], 1e-8)
            _, r = right_divide_linear(C, h)
            assert r.magnitude() <= 1e-8 * C.magnitude()


class TestFactorize:
    def test_six_ways(self):
        C = generic_cubic()
        facts = factorize_cubic(C)
        assert len(facts) == 6
        known = [1 + I, 2 + K + EPS * I, J + EPS * K]
        assert any(all(a.allclose(b, 1e-9) for a, b in zip(f.factors, known)) for f in facts)
        for f in facts:
            assert f.product().distance(C) <= 1e-8
        assert sorted(f.permutation for f in facts) == sorted(
            [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
        )

    def test_norms_match_quadratics(self):
        rng = np.random.default_rng(24)
        for _ in range(20):
            C, _ = random_cubic(rng)
            quads = quadratic_factors(norm_poly(C.monic()))
            facts = factorize_cubic(C)
            assert len(facts) == 6
            for f in facts:
                for h, idx in zip(f.factors, f.permutation):
                    n = norm_poly(L(h))
                    assert np.allclose(n.coef, quads[idx].coef, atol=1e-8)

    def test_identical_axes(self):
        C = L(1 + I) * L(3 + I) * L(J + EPS * K)
        facts = factorize_cubic(C)
        assert len(facts) == 6
        commuting = [f for f in facts if f.axes()[0].same_line(f.axes()[1])]
        assert commuting
        fewer = factorize_cubic(C, kinematic_dedup=True)
        assert len(fewer) < len(facts)

    def test_repeated_quadratic(self):
        # three half-turns share the norm t^2 + 1, so all orderings coincide
        C = L(I) * L(J) * L(K + EPS * I)
        with pytest.warns(RepeatedFactorWarning):
            facts = factorize_cubic(C)
        assert len(facts) == 1
        assert facts[0].product().distance(C) <= 1e-8

    def test_non_monic(self):
        rng = np.random.default_rng(25)
        C, _ = random_cubic(rng)
        scaled = (2 + J) * C
        facts = factorize(scaled)
        assert len(facts) == 6
        assert all(f.product().distance(scaled) <= 1e-8 for f in facts)

    def test_degenerate_lead_is_reparametrized(self):
        D, m = ensure_invertible_lead(MotionPoly([ONE, EPS * I]), Context(seed=1))
        assert m is not None
        assert abs(D.leading.coeffs[:4] @ D.leading.coeffs[:4]) > 1e-3
        C = generic_cubic()
        assert ensure_invertible_lead(C)[1] is None

    def test_world_frame_axes(self):
        rng = np.random.default_rng(28)
        C, _ = random_cubic(rng)
        g = random_pose(rng)
        for f, h in zip(factorize_cubic(C), factorize_cubic(g.dq * C)):
            assert h.tail.allclose(g.dq) and h.lead.allclose(ONE)
            assert all(a.transformed(g).same_line(b) for a, b in zip(f.axes(), h.axes()))

    def test_large_coefficients_keep_parameter(self):
        rng = np.random.default_rng(29)
        C, _ = random_cubic(rng)
        big = mobius_reparam(C, (1.0, 0.0, 0.0, 30.0)).monic()
        assert np.max(np.abs(big.coeffs)) > 1e4
        assert all(f.reparam is None for f in factorize_cubic(big))

    def test_study_property(self):
        rng = np.random.default_rng(26)
        C, _ = random_cubic(rng)
        for f in factorize_cubic(C):
            for t in np.linspace(-5, 5, 11):
                q = mp_eval(f.product(), t)
                assert abs(study_residual(q).p) <= 1e-9 * q.magnitude() ** 2

    def test_wrong_degree(self):
        with pytest.raises(ValueError):
            factorize_cubic(L(I))


class TestEvaluation:
    def test_examples(self):
        assert mp_eval(L(I), 0).allclose(-1 * I)
        assert mp_eval(L(I), np.inf).allclose(ONE)
        C = L(1 + I) * L(J + EPS * K)
        assert mp_eval(C, 1).allclose((-1 * I) * (1 - J - EPS * K))


class TestMobius:
    def test_identity(self):
        C = generic_cubic()
        assert np.allclose(mobius_reparam(C, (1, 0, 0, 1)).coeffs, C.coeffs)

    def test_shift(self):
        assert np.allclose(mobius_reparam(L(I), (1, 1, 0, 1)).coeffs, mp(1 - I, 1).coeffs)

    def test_same_curve(self):
        rng = np.random.default_rng(27)
        C = generic_cubic()
        for _ in range(20):
            a, b, c, d = rng.normal(size=4)
            D = mobius_reparam(C, (a, b, c, d))
            for s in rng.normal(size=3):
                assert proj_distance(mp_eval(D, s), mp_eval(C, (a * s + b) / (c * s + d))) <= 1e-9

    def test_singular(self):
        with pytest.raises(ValueError):
            mobius_reparam(L(I), (1, 2, 2, 4))
