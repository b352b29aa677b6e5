"""Quaternions, dual numbers and dual quaternions over the complex numbers.

Coefficients are stored as complex numpy arrays in the order
``(1, i, j, k)`` for quaternions and ``(1, i, j, k, e, ei, ej, ek)`` for dual
quaternions, where ``e`` is the dual unit (``e**2 == 0``).  The complex unit
``1j`` is a central scalar and is never confused with the quaternion unit
``I``.

Rigid displacements act on points through
``x -> (p + e d)(1 + e x)(conj(p) - e conj(d))`` and a translation by ``t``
is encoded with ``d = t p / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .context import Context, resolve
from .errors import (
    InvalidLine,
    InvalidPose,
    NonScalarNorm,
    NotARotation,
    PrimalZero,
    ZeroRotation,
)

Number = Union[int, float, complex]


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product on arrays whose last axis has length 4."""
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def qconj(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out[..., 1:] *= -1
    return out


def dqmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dual quaternion product on arrays whose last axis has length 8."""
    pa, da = a[..., :4], a[..., 4:]
    pb, db = b[..., :4], b[..., 4:]
    return np.concatenate([qmul(pa, pb), qmul(pa, db) + qmul(da, pb)], axis=-1)


def dqconj(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out[..., 1:4] *= -1
    out[..., 5:8] *= -1
    return out


def _frozen(values, size: int) -> np.ndarray:
    arr = np.array(values, dtype=complex).reshape(-1)
    if arr.shape != (size,):
        raise ValueError(f"expected {size} coefficients, got {arr.size}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class DualNumber:
    """``p + e d`` with complex ``p`` (primal) and ``d`` (dual)."""

    p: complex = 0j
    d: complex = 0j

    def __add__(self, other: "DualNumber") -> "DualNumber":
        return DualNumber(self.p + other.p, self.d + other.d)

    def __sub__(self, other: "DualNumber") -> "DualNumber":
        return DualNumber(self.p - other.p, self.d - other.d)

    def __mul__(self, other):
        if isinstance(other, DualNumber):
            return DualNumber(self.p * other.p, self.p * other.d + self.d * other.p)
        return DualNumber(self.p * other, self.d * other)

    __rmul__ = __mul__

    def __abs__(self) -> float:
        return float(np.hypot(abs(self.p), abs(self.d)))

    def inverse(self) -> "DualNumber":
        if self.p == 0:
            raise ZeroDivisionError("dual number with zero primal part")
        return DualNumber(1 / self.p, -self.d / self.p**2)

    def isclose(self, other: "DualNumber", tol: float = 1e-12) -> bool:
        return abs(self - other) <= tol


class Quaternion:
    """Quaternion ``w + x i + y j + z k`` with complex coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs=(1, 0, 0, 0)):
        object.__setattr__(self, "_c", _frozen(coeffs, 4))

    def __setattr__(self, name, value):
        raise AttributeError("Quaternion is immutable")

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    w = property(lambda self: self._c[0])
    x = property(lambda self: self._c[1])
    y = property(lambda self: self._c[2])
    z = property(lambda self: self._c[3])

    @property
    def vector(self) -> np.ndarray:
        return self._c[1:]

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self._c + other._c)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self._c - other._c)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self._c)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(qmul(self._c, other._c))
        return Quaternion(self._c * other)

    def __rmul__(self, other):
        return Quaternion(self._c * other)

    def conj(self) -> "Quaternion":
        return Quaternion(qconj(self._c))

    def norm(self) -> complex:
        """``q conj(q)``; bilinear, so it may vanish for complex ``q``."""
        return complex(np.dot(self._c, self._c))

    def __repr__(self) -> str:
        return f"Quaternion({np.array2string(self._c, precision=6)})"


class DualQuaternion:
    """Element ``p + e d`` of the complexified dual quaternion algebra.

    Instances are immutable; arithmetic returns new objects.  Multiplying by
    a Python number scales all coefficients (complex scalars are central).
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs=(1, 0, 0, 0, 0, 0, 0, 0)):
        if isinstance(coeffs, DualQuaternion):
            coeffs = coeffs._c
        object.__setattr__(self, "_c", _frozen(coeffs, 8))

    def __setattr__(self, name, value):
        raise AttributeError("DualQuaternion is immutable")

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    @classmethod
    def from_parts(cls, primal, dual=(0, 0, 0, 0)) -> "DualQuaternion":
        if isinstance(primal, Quaternion):
            primal = primal.coeffs
        if isinstance(dual, Quaternion):
            dual = dual.coeffs
        return cls(np.concatenate([np.asarray(primal, complex), np.asarray(dual, complex)]))

    @classmethod
    def scalar(cls, value: Number) -> "DualQuaternion":
        return cls([value, 0, 0, 0, 0, 0, 0, 0])

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def primal(self) -> Quaternion:
        return Quaternion(self._c[:4])

    @property
    def dual(self) -> Quaternion:
        return Quaternion(self._c[4:])

    def __add__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            other = DualQuaternion.scalar(other)
        elif not isinstance(other, DualQuaternion):
            return NotImplemented
        return DualQuaternion(self._c + other._c)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, DualQuaternion):
            other = DualQuaternion.scalar(other)
        return DualQuaternion(self._c - other._c)

    def __rsub__(self, other):
        return DualQuaternion.scalar(other) - self

    def __neg__(self) -> "DualQuaternion":
        return DualQuaternion(-self._c)

    def __mul__(self, other):
        if isinstance(other, DualQuaternion):
            return DualQuaternion(dqmul(self._c, other._c))
        if isinstance(other, (int, float, complex, np.number)):
            return DualQuaternion(self._c * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return DualQuaternion(self._c * other)
        return NotImplemented

    def __truediv__(self, other: Number) -> "DualQuaternion":
        return DualQuaternion(self._c / other)

    def conj(self) -> "DualQuaternion":
        return DualQuaternion(dqconj(self._c))

    def norm(self, ctx: Optional[Context] = None) -> DualNumber:
        return dq_norm(self, ctx)

    def inverse(self) -> "DualQuaternion":
        n = dq_norm(self)
        if abs(n.p) == 0:
            raise ZeroDivisionError("dual quaternion with vanishing primal norm")
        ninv = n.inverse()
        return self.conj() * DualQuaternion([ninv.p, 0, 0, 0, ninv.d, 0, 0, 0])

    def magnitude(self) -> float:
        return float(np.linalg.norm(self._c))

    def is_real(self, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self._c.imag), initial=0.0) <= tol * max(1.0, self.magnitude()))

    def real(self) -> "DualQuaternion":
        return DualQuaternion(self._c.real)

    def allclose(self, other: "DualQuaternion", tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self._c - DualQuaternion(other)._c)) <= tol)

    def __eq__(self, other) -> bool:
        return isinstance(other, DualQuaternion) and bool(np.array_equal(self._c, other._c))

    def __hash__(self) -> int:
        return hash(self._c.tobytes())

    def __repr__(self) -> str:
        return f"DualQuaternion({np.array2string(self._c, precision=6)})"


ONE = DualQuaternion([1, 0, 0, 0, 0, 0, 0, 0])
I = DualQuaternion([0, 1, 0, 0, 0, 0, 0, 0])
J = DualQuaternion([0, 0, 1, 0, 0, 0, 0, 0])
K = DualQuaternion([0, 0, 0, 1, 0, 0, 0, 0])
EPS = DualQuaternion([0, 0, 0, 0, 1, 0, 0, 0])


def dq_mul(a: DualQuaternion, b: DualQuaternion) -> DualQuaternion:
    return a * b


def dq_conj(q: DualQuaternion) -> DualQuaternion:
    return q.conj()


def dq_norm(q: DualQuaternion, ctx: Optional[Context] = None) -> DualNumber:
    """Return ``q conj(q)`` as a dual number.

    Raises NonScalarNorm when the vector part of the product is not
    negligible, which only happens when the coefficients were corrupted.
    """
    ctx = resolve(ctx)
    prod = dqmul(q.coeffs, dqconj(q.coeffs))
    residue = max(np.max(np.abs(prod[1:4])), np.max(np.abs(prod[5:8])))
    if residue > ctx.tol_real * max(1.0, q.magnitude() ** 2):
        raise NonScalarNorm(f"norm has vector residue {residue:.3e}")
    return DualNumber(complex(prod[0]), complex(prod[4]))


def study_residual(q: DualQuaternion) -> DualNumber:
    """Scalar part of ``p conj(d) + d conj(p)``; zero iff ``[q]`` is on the Study quadric."""
    c = q.coeffs
    return DualNumber(complex(2 * np.dot(c[:4], c[4:])), 0j)


def _vector_quaternion(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(3)
    return np.concatenate([[0.0], x])


class Pose:
    """A rigid displacement: a real unit dual quaternion on the Study quadric."""

    __slots__ = ("_dq",)

    def __init__(self, dq, ctx: Optional[Context] = None):
        ctx = resolve(ctx)
        if isinstance(dq, Pose):
            dq = dq.dq
        dq = DualQuaternion(dq)
        c = dq.coeffs
        scale = np.linalg.norm(c)
        if scale == 0 or np.linalg.norm(c[:4]) <= ctx.tol_real * scale:
            raise PrimalZero("pose has vanishing primal part")
        if np.max(np.abs(c.imag)) > ctx.tol_real * scale:
            raise InvalidPose("pose coefficients are not real")
        c = c.real / np.linalg.norm(c.real[:4])
        if abs(2 * np.dot(c[:4], c[4:])) > max(ctx.tol_proj, 1e-12) * max(1.0, np.dot(c, c)):
            raise InvalidPose("pose violates the Study condition")
        object.__setattr__(self, "_dq", DualQuaternion(c))

    def __setattr__(self, name, value):
        raise AttributeError("Pose is immutable")

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    @property
    def dq(self) -> DualQuaternion:
        return self._dq

    def __mul__(self, other: "Pose") -> "Pose":
        return Pose(self._dq * other.dq)

    def inverse(self) -> "Pose":
        return Pose(self._dq.conj())

    def act(self, x) -> np.ndarray:
        return act_on_point(self, x)

    def rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self._dq.coeffs.real[:4]
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )

    def translation(self) -> np.ndarray:
        c = self._dq.coeffs.real
        return 2 * qmul(c[4:], qconj(c[:4])).real[1:]

    def __repr__(self) -> str:
        return f"Pose({np.array2string(self._dq.coeffs.real, precision=6)})"


def act_on_point(q, x) -> np.ndarray:
    """Apply the displacement ``q`` to the point ``x`` in R^3."""
    dq = q.dq if isinstance(q, Pose) else DualQuaternion(q)
    c = dq.coeffs
    p, d = c[:4], c[4:]
    pp = np.dot(p, p)
    if abs(pp) == 0:
        raise PrimalZero("primal part is zero")
    xq = _vector_quaternion(x)
    moved = qmul(qmul(p, xq), qconj(p)) + qmul(d, qconj(p)) - qmul(p, qconj(d))
    return (moved[1:] / pp).real


def pose_from_rot_trans(r, t=(0.0, 0.0, 0.0)) -> Pose:
    """Pose that rotates by ``r`` and then translates by ``t``."""
    if isinstance(r, (Quaternion, DualQuaternion)):
        r = r.coeffs[:4]
    r = np.asarray(r, dtype=float).reshape(4)
    n = np.linalg.norm(r)
    if n == 0:
        raise ZeroRotation("rotation quaternion is zero")
    r = r / n
    d = qmul(_vector_quaternion(t), r).real / 2
    return Pose(np.concatenate([r, d]))


@dataclass(frozen=True, eq=False)
class PlueckerLine:
    """Oriented line with unit direction ``dir`` and moment ``mom = point x dir``."""

    dir: np.ndarray
    mom: np.ndarray

    @classmethod
    def make(cls, direction, moment, tol: float = 1e-9) -> "PlueckerLine":
        direction = np.asarray(direction, dtype=float).reshape(3)
        moment = np.asarray(moment, dtype=float).reshape(3)
        n = np.linalg.norm(direction)
        if n <= tol:
            raise InvalidLine("line direction is zero")
        direction, moment = direction / n, moment / n
        if abs(np.dot(direction, moment)) > tol * max(1.0, np.linalg.norm(moment)):
            raise InvalidLine("Pluecker condition dir . mom = 0 violated")
        return cls(direction, moment)

    @classmethod
    def through(cls, point, direction) -> "PlueckerLine":
        point = np.asarray(point, dtype=float)
        direction = np.asarray(direction, dtype=float)
        direction = direction / np.linalg.norm(direction)
        return cls.make(direction, np.cross(point, direction))

    def point(self) -> np.ndarray:
        """Point of the line closest to the origin."""
        return np.cross(self.dir, self.mom)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.dir, self.mom])

    def same_line(self, other: "PlueckerLine", tol: float = 1e-7) -> bool:
        a, b = self.as_vector(), other.as_vector()
        scale = max(1.0, np.linalg.norm(a), np.linalg.norm(b))
        return min(np.linalg.norm(a - b), np.linalg.norm(a + b)) <= tol * scale

    def angle_to(self, other: "PlueckerLine") -> float:
        """Unsigned angle in ``[0, pi/2]`` between the two directions."""
        c = abs(float(np.dot(self.dir, other.dir)))
        s = float(np.linalg.norm(np.cross(self.dir, other.dir)))
        return float(np.arctan2(s, c))

    def distance_to(self, other: "PlueckerLine") -> float:
        cross = np.cross(self.dir, other.dir)
        s = np.linalg.norm(cross)
        if s < 1e-12:
            return float(np.linalg.norm(np.cross(self.dir, other.point() - self.point())))
        return abs(float(np.dot(self.dir, other.mom) + np.dot(other.dir, self.mom))) / s

    def transformed(self, pose: Pose) -> "PlueckerLine":
        q = pose.dq
        h = q * half_turn_from_line(self) * q.conj()
        return axis_of(h)

    def __repr__(self) -> str:
        return f"PlueckerLine(dir={np.round(self.dir, 9).tolist()}, mom={np.round(self.mom, 9).tolist()})"


def half_turn_from_line(line: PlueckerLine) -> DualQuaternion:
    line = PlueckerLine.make(line.dir, line.mom)
    return DualQuaternion(np.concatenate([[0.0], line.dir, [0.0], line.mom]))


def axis_of(h: DualQuaternion, ctx: Optional[Context] = None) -> PlueckerLine:
    """Fixed line of the rotation (or screw axis) represented by ``h``."""
    ctx = resolve(ctx)
    c = DualQuaternion(h).coeffs
    scale = np.linalg.norm(c)
    if scale == 0 or np.max(np.abs(c.imag)) > ctx.tol_real * scale * 1e2:
        raise NotARotation("rotation quaternion must be real and nonzero")
    c = c.real / scale
    p0, pv, d0, dv = c[0], c[1:4], c[4], c[5:8]
    s = np.linalg.norm(pv)
    if s <= ctx.tol_rank:
        raise NotARotation("primal vector part vanishes")
    direction = pv / s
    moment = (dv + d0 * (p0 / s) * direction) / s
    moment = moment - np.dot(moment, direction) * direction
    return PlueckerLine(direction, moment)
