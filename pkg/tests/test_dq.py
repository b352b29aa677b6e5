import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from studylink import (
    EPS,
    I,
    J,
    K,
    ONE,
    DualNumber,
    DualQuaternion,
    PlueckerLine,
    Pose,
    act_on_point,
    axis_of,
    dq_conj,
    dq_mul,
    dq_norm,
    half_turn_from_line,
    pose_from_rot_trans,
    study_residual,
)
from studylink.errors import InvalidLine, InvalidPose, NonScalarNorm, NotARotation, PrimalZero, ZeroRotation

unit = st.floats(-1, 1, allow_nan=False)
complex_dq = st.lists(st.tuples(unit, unit), min_size=8, max_size=8).map(
    lambda xs: DualQuaternion([a + 1j * b for a, b in xs])
)


def close(a, b, tol=1e-12):
    return np.max(np.abs(DualQuaternion(a).coeffs - DualQuaternion(b).coeffs)) <= tol


class TestProducts:
    def test_ij_is_k(self):
        assert close(dq_mul(I, J), K)

    def test_dual_units_annihilate(self):
        assert close(dq_mul(EPS * I, EPS * J), DualQuaternion([0] * 8))

    def test_hand_expansion(self):
        assert close(dq_mul(K + EPS * I, I), J - EPS)

    def test_complex_unit_is_central(self):
        assert close((1j * ONE) * I, I * (1j * ONE))
        assert not close(I * J, J * I)

    def test_quaternion_units(self):
        for u in (I, J, K):
            assert close(u * u, -1 * ONE)
        assert close(I * J * K, -1 * ONE)


class TestConjugation:
    def test_one(self):
        assert close(dq_conj(ONE), ONE)

    def test_sign_flip(self):
        assert close(dq_conj(I + EPS * J), -1 * I - EPS * J)

    def test_anti_automorphism_example(self):
        q = K + EPS * I
        lhs = dq_conj(q * I)
        assert close(lhs, dq_conj(I) * dq_conj(q))
        assert close(lhs, -1 * J - EPS)


class TestNorm:
    def test_one(self):
        assert dq_norm(ONE).isclose(DualNumber(1, 0))

    def test_half_turn(self):
        assert dq_norm(K + EPS * I).isclose(DualNumber(1, 0))

    def test_null_cone_prototype(self):
        assert dq_norm(1j * ONE - I).isclose(DualNumber(0, 0))

    def test_corrupted_norm_detected(self, monkeypatch):
        # with conjugation broken, q q is no longer a dual number
        from studylink import dq as dqmod

        monkeypatch.setattr(dqmod, "dqconj", lambda a: np.array(a, dtype=complex))
        with pytest.raises(NonScalarNorm):
            dq_norm(ONE + I)


class TestStudy:
    def test_translation_on_study(self):
        assert study_residual(ONE + EPS * I).isclose(DualNumber(0, 0))

    def test_half_turn_on_study(self):
        assert study_residual(K + EPS * I).isclose(DualNumber(0, 0))

    def test_off_study(self):
        assert study_residual(ONE + EPS).isclose(DualNumber(2, 0))


class TestPoses:
    def test_identity_action(self):
        assert np.allclose(act_on_point(Pose(ONE), [1, 2, 3]), [1, 2, 3])

    def test_half_turn_action(self):
        assert np.allclose(act_on_point(I, [0, 1, 0]), [0, -1, 0])

    def test_translation_convention(self):
        assert np.allclose(act_on_point(ONE + EPS * I, [0, 0, 0]), [2, 0, 0])

    def test_from_rot_trans(self):
        assert close(pose_from_rot_trans([1, 0, 0, 0]).dq, ONE)
        assert close(pose_from_rot_trans([1, 0, 0, 0], [2, 0, 0]).dq, ONE + EPS * I)
        assert close(pose_from_rot_trans(I.coeffs[:4].real).dq, I)

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            r, t = rng.normal(size=4), rng.normal(size=3)
            p = pose_from_rot_trans(r, t)
            assert np.allclose(p.translation(), t)
            R = p.rotation_matrix()
            x = rng.normal(size=3)
            assert np.allclose(p.act(x), R @ x + t)

    def test_errors(self):
        with pytest.raises(ZeroRotation):
            pose_from_rot_trans([0, 0, 0, 0])
        with pytest.raises(PrimalZero):
            Pose(EPS)
        with pytest.raises(InvalidPose):
            Pose(ONE + EPS)
        with pytest.raises(InvalidPose):
            Pose(1j * ONE + I)
        with pytest.raises(PrimalZero):
            act_on_point(EPS * I, [0, 0, 0])

    def test_distance_preserved(self):
        rng = np.random.default_rng(4)
        worst = 0.0
        for _ in range(1000):
            p = pose_from_rot_trans(rng.normal(size=4), rng.normal(size=3))
            x, y = rng.normal(size=(2, 3))
            worst = max(worst, abs(np.linalg.norm(p.act(x) - p.act(y)) - np.linalg.norm(x - y)))
        assert worst <= 1e-9

    def test_composition(self):
        rng = np.random.default_rng(5)
        a = pose_from_rot_trans(rng.normal(size=4), rng.normal(size=3))
        b = pose_from_rot_trans(rng.normal(size=4), rng.normal(size=3))
        x = rng.normal(size=3)
        assert np.allclose((a * b).act(x), a.act(b.act(x)))
        assert np.allclose(a.inverse().act(a.act(x)), x)


class TestLines:
    def test_x_axis(self):
        line = PlueckerLine.make([1, 0, 0], [0, 0, 0])
        assert close(half_turn_from_line(line), I)

    def test_offset_axis(self):
        line = PlueckerLine.through([0, 1, 0], [0, 0, 1])
        assert np.allclose(line.mom, [1, 0, 0])
        assert close(half_turn_from_line(line), K + EPS * I)

    def test_axis_of_examples(self):
        x_axis = PlueckerLine.make([1, 0, 0], [0, 0, 0])
        assert axis_of(I).same_line(x_axis)
        assert axis_of(3 + I).same_line(x_axis)
        ax = axis_of(K + EPS * I)
        assert ax.same_line(PlueckerLine.through([0, 1, 0], [0, 0, 1]))
        assert np.allclose(ax.point(), [0, 1, 0])

    def test_half_turn_structure(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            line = PlueckerLine.through(rng.normal(size=3), rng.normal(size=3))
            h = half_turn_from_line(line)
            assert close(h + h.conj(), DualQuaternion([0] * 8), 0)
            assert dq_norm(h).isclose(DualNumber(1, 0), 1e-14)
            assert abs(study_residual(h).p) <= 1e-15
            back = axis_of(h)
            assert np.max(np.abs(back.as_vector() - line.as_vector())) <= 1e-12

    def test_axis_invariances(self):
        rng = np.random.default_rng(7)
        line = PlueckerLine.through(rng.normal(size=3), rng.normal(size=3))
        h = half_turn_from_line(line)
        for c, s in ((0.5, 2.0), (-3.0, 0.1)):
            assert axis_of(c + s * h).same_line(line)

    def test_invalid(self):
        with pytest.raises(InvalidLine):
            PlueckerLine.make([1, 0, 0], [1, 0, 0])
        with pytest.raises(InvalidLine):
            PlueckerLine.make([0, 0, 0], [1, 0, 0])
        with pytest.raises(NotARotation):
            axis_of(ONE + EPS * I)
        with pytest.raises(NotARotation):
            axis_of(1j * I)

    def test_transformed(self):
        rng = np.random.default_rng(8)
        line = PlueckerLine.through(rng.normal(size=3), rng.normal(size=3))
        g = pose_from_rot_trans(rng.normal(size=4), rng.normal(size=3))
        moved = line.transformed(g)
        assert np.allclose(moved.dir, g.rotation_matrix() @ line.dir) or np.allclose(
            -moved.dir, g.rotation_matrix() @ line.dir
        )
        assert moved.distance_to(PlueckerLine.through(g.act(line.point()), moved.dir)) <= 1e-12

    def test_distance_and_angle(self):
        a = PlueckerLine.make([1, 0, 0], [0, 0, 0])
        b = PlueckerLine.through([0, 0, 2], [0, 1, 0])
        assert np.isclose(a.distance_to(b), 2)
        assert np.isclose(a.angle_to(b), np.pi / 2)


class TestDualNumber:
    def test_arithmetic(self):
        a, b = DualNumber(2, 3), DualNumber(5, -1)
        assert (a * b).isclose(DualNumber(10, 13))
        assert (a * a.inverse()).isclose(DualNumber(1, 0))
        with pytest.raises(ZeroDivisionError):
            DualNumber(0, 1).inverse()


@settings(max_examples=200, deadline=None)
@given(complex_dq, complex_dq, complex_dq)
def test_algebra_laws(a, b, c):
    scale = max(1.0, a.magnitude() * b.magnitude() * c.magnitude())
    assert close((a * b) * c, a * (b * c), 1e-12 * scale)
    assert close((a * b).conj(), b.conj() * a.conj(), 1e-12 * scale)
    nab, na, nb = dq_norm(a * b), dq_norm(a), dq_norm(b)
    assert abs(nab - na * nb) <= 1e-10 * scale**2


@settings(max_examples=100, deadline=None)
@given(complex_dq)
def test_immutable(a):
    with pytest.raises(AttributeError):
        a.foo = 1
    with pytest.raises(ValueError):
        a.coeffs[0] = 5
