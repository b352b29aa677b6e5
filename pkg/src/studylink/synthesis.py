"""Synthesis of 2R dyads, Bennett linkages and Goldberg 5R linkages.

Three poses are first normalized so that the first one is the identity.
They span a plane in P^7 that meets the Study quadric in a conic; the two
2R spaces through that conic are recovered from a null quadrilateral whose
primal projection is found with two linear and one quadratic equation and
then lifted back into the Study quadric.

A 2R space with axes ``h1`` (base) and ``h2`` (moving) carries the chart

    (s, u) -> (s0 + s1 h1)(u0 + u1 h2)

where ``s ~ (t1 : -1)`` and ``u ~ (t2 : -1)`` are the joint parameters.  In
coordinates ``x = (x0, x1, x2, x3)`` with respect to ``(1, h1, h2, h1 h2)``
the quadric ``Q`` is ``x0 x3 - x1 x2 = 0``.  Rulings ``u = const`` form the
"first" family (they contain the base rotations ``[1] v [h1]``), rulings
``s = const`` the "second" family.  Cubics of the first class meet every
first-family ruling twice, so they have ``deg u = 2`` and ``deg s = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .context import Context, resolve
from .dq import (
    ONE,
    DualQuaternion,
    PlueckerLine,
    Pose,
    axis_of,
    half_turn_from_line,
)
from .errors import (
    CommutingAxes,
    ContainedInStudy,
    DegenerateChartData,
    DegenerateCurve,
    DegeneratePlane,
    DependentPoints,
    Indeterminate,
    InputError,
    MeetsExceptional,
    NoDegenerateFactorization,
    NonRealCurve,
    NoQuadrilateral,
    NotARotation,
    NumericalFailure,
)
from .motion import Factorization, MotionPoly, factorize, factorize_cubic
from .projective import (
    EXCEPTIONAL,
    STUDY_FORM,
    NullQuadrilateral,
    QuadricForm,
    Subspace,
    _isotropic_pair,
    as_matrix,
    as_vector,
    find_null_quadrilateral,
    lemma5_lift,
    meets_exceptional,
    normalized,
    numerical_rank,
    restrict_study,
)

FAMILIES = ("first", "second")
INTERPOLATION_NODES = (np.inf, 0.0, 1.0)
# extra nodes where the quadratic chart factor is pinned by ``params``
PARAM_NODES = (-1.0, 2.0)


def _loose(ctx: Context) -> float:
    """Membership tolerance for points produced by a chain of solves."""
    return 1e-2 * np.sqrt(ctx.tol_rank)


def _study(x, y) -> complex:
    return complex(as_vector(x) @ STUDY_FORM @ as_vector(y))


def _dq(x) -> DualQuaternion:
    if isinstance(x, Pose):
        return x.dq
    return DualQuaternion(x)


def _pose(x) -> Pose:
    return x if isinstance(x, Pose) else Pose(x)


def normalize_poses(p0, p1, p2) -> tuple:
    """Move the first pose to the identity: ``(1, p0^-1 p1, p0^-1 p2)``."""
    p0, p1, p2 = _pose(p0), _pose(p1), _pose(p2)
    inv = p0.inverse()
    return Pose(ONE), inv * p1, inv * p2


def _joint_factor(t, h: DualQuaternion) -> DualQuaternion:
    if t is None or (np.isreal(t) and np.isinf(np.real(t))):
        return ONE
    return t - h


def dyad_constraint(h1, h2, t1, t2, ctx: Optional[Context] = None) -> DualQuaternion:
    """The displacement ``(t1 - h1)(t2 - h2)`` of a 2R dyad; ``t = inf`` means zero angle."""
    ctx = resolve(ctx)
    h1, h2 = _dq(h1), _dq(h2)
    comm = (h1 * h2 - h2 * h1).magnitude()
    if comm <= ctx.tol_axis * max(1.0, h1.magnitude() * h2.magnitude()):
        raise CommutingAxes("dyad axes commute (coaxial or equal lines)")
    return _joint_factor(t1, h1) * _joint_factor(t2, h2)


# --- 2R spaces -------------------------------------------------------------


@dataclass
class TwoRSpace:
    """3-space spanned by ``1, h1, h2, h1 h2`` for half-turns ``h1`` (base) and ``h2`` (moving)."""

    h1: DualQuaternion
    h2: DualQuaternion
    q_form: QuadricForm
    axes: tuple
    quadrilateral: Optional[NullQuadrilateral] = None

    @property
    def basis(self) -> list:
        return [ONE, self.h1, self.h2, self.h1 * self.h2]

    @property
    def subspace(self) -> Subspace:
        return Subspace(self.basis)

    def contains(self, x, tol: float = 1e-8) -> bool:
        return self.subspace.contains(_dq(x), tol)

    def residual(self, x) -> float:
        return self.subspace.residual(_dq(x))

    def distance(self, other) -> float:
        other = other.subspace if isinstance(other, TwoRSpace) else other
        return self.subspace.distance(other)

    def chart(self) -> "RuledChart":
        return ruled_chart(self)

    @classmethod
    def from_axes(cls, base: PlueckerLine, moving: PlueckerLine, ctx: Optional[Context] = None) -> "TwoRSpace":
        h1, h2 = half_turn_from_line(base), half_turn_from_line(moving)
        dyad_constraint(h1, h2, 0, 0, ctx)
        space = Subspace([ONE, h1, h2, h1 * h2], ctx)
        return cls(h1, h2, restrict_study(space, ctx), (axis_of(h1), axis_of(h2)))


@dataclass
class TwoRReport:
    """Outcome of the 2R-space test; ``reasons`` lists every failed condition."""

    passed: bool
    reasons: list = field(default_factory=list)
    regular: bool = False
    ruled: bool = False
    meets_exceptional: bool = False
    quadrilateral: Optional[NullQuadrilateral] = None
    space: Optional[TwoRSpace] = None

    def __bool__(self) -> bool:
        return self.passed


def _tangent_point(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Point of the line ``a v b`` in the tangent hyperplane of S at [1] (zero dual scalar)."""
    m = b[4] * a - a[4] * b
    if np.linalg.norm(m) <= 1e-12 * np.linalg.norm(a) * np.linalg.norm(b):
        raise NumericalFailure("quadrilateral side lies in the tangent hyperplane", step="recover_axes")
    return m


def _half_turn_on_line(x: np.ndarray, y: np.ndarray, ctx: Context) -> DualQuaternion:
    """The real half-turn on the line ``x v y`` (the point with zero scalar part)."""
    h = y[0] * x - x[0] * y
    if np.linalg.norm(h) <= 1e-12 * np.linalg.norm(x) * np.linalg.norm(y):
        raise NumericalFailure("line has no point with zero scalar part", step="recover_axes")
    h = normalized(h)
    if np.max(np.abs(h.imag)) > 1e2 * ctx.tol_axis:
        raise NumericalFailure("recovered axis is not real", step="recover_axes")
    line = axis_of(DualQuaternion(h.real), ctx)
    return half_turn_from_line(line)


def _recover_axes(P: Subspace, quad: NullQuadrilateral, ctx: Context) -> tuple:
    """Half-turns of a 2R space from its null quadrilateral.

    Opposite sides meet the tangent hyperplane of S at [1] in two points
    spanning the ruling ``[1] v [h]`` of one axis.  The returned pair is
    ordered so that ``h1 h2`` lies in ``P``.
    """
    sides = quad.sides()
    pts = [_tangent_point(a, b) for a, b in sides]
    ha = _half_turn_on_line(pts[0], pts[2], ctx)
    hb = _half_turn_on_line(pts[1], pts[3], ctx)
    ab, ba = P.residual(ha * hb), P.residual(hb * ha)
    best = min(ab, ba)
    if best > _loose(ctx):
        raise NumericalFailure(
            f"neither product of the axes lies in the space ({best:.2e})", step="recover_axes"
        )
    return (ha, hb) if ab <= ba else (hb, ha)


def is_2r_space(P, ctx: Optional[Context] = None) -> TwoRReport:
    """Test whether a 3-space through [1] is the kinematic image of a 2R dyad.

    The space must meet S in a regular ruled quadric, be disjoint from the
    exceptional 3-space and contain a null quadrilateral.  On success the
    axes are recovered and the report carries a ``TwoRSpace``.
    """
    ctx = resolve(ctx)
    if not isinstance(P, Subspace):
        P = Subspace(P, ctx)
    report = TwoRReport(passed=False)
    if P.dim != 3:
        report.reasons.append("not_three_space")
        return report
    if not P.contains(ONE.coeffs, 1e2 * ctx.tol_rank):
        report.reasons.append("no_identity")
    try:
        form = restrict_study(P, ctx)
    except ContainedInStudy:
        report.reasons.append("contained_in_study")
        form = None
    if form is not None:
        report.regular, report.ruled = form.regular, form.ruled
        if not form.regular:
            report.reasons.append("not_regular")
        elif not form.ruled:
            report.reasons.append("not_ruled")
    report.meets_exceptional = meets_exceptional(P, ctx)
    if report.meets_exceptional:
        report.reasons.append("meets_exceptional")
    else:
        try:
            report.quadrilateral = find_null_quadrilateral(P, ctx)
        except NoQuadrilateral:
            report.reasons.append("no_null_quadrilateral")
    if report.reasons:
        return report
    try:
        h1, h2 = _recover_axes(P, report.quadrilateral, ctx)
    except (NumericalFailure, NotARotation):
        report.reasons.append("axes_not_recovered")
        return report
    report.space = TwoRSpace(h1, h2, form, (axis_of(h1), axis_of(h2)), report.quadrilateral)
    report.passed = True
    return report


def _plane_checks(points: np.ndarray, ctx: Context) -> None:
    if numerical_rank(points, ctx.tol_rank) < 3:
        raise DegeneratePlane("the three poses do not span a plane")
    q, _ = np.linalg.qr(points.T)
    g = q.T @ STUDY_FORM @ q
    if numerical_rank(g, ctx.tol_rank) < 3:
        raise DegeneratePlane("the plane of the poses is tangent to the Study quadric")
    if numerical_rank(points[:, :4], ctx.tol_rank) < 3:
        raise MeetsExceptional("the plane of the poses meets the exceptional 3-space")


def _conic_null_points(points: np.ndarray, ctx: Context) -> tuple:
    """Intersect the conic ``plane ∩ S`` with the null cone.

    The conic is parameterized by projecting from ``[1]``: the line through
    ``[1]`` and ``w = tau a + b`` meets S again in
    ``x(tau) = -S(w, w) 1 + 2 S(1, w) w``.  Its primal norm is a real quartic
    in ``tau`` whose two pairs of conjugate roots give ``m1, m2`` and
    ``n1, n2``.
    """
    one = points[0]
    rest = points[1:] - np.outer(points[1:] @ one, one)
    q, _ = np.linalg.qr(rest.T)
    a0, b0 = q[:, 0].real, q[:, 1].real
    for angle in (0.3, 1.1, 2.0, 0.7, 2.6):
        c, s = np.cos(angle), np.sin(angle)
        a, b = c * a0 + s * b0, -s * a0 + c * b0
        saa, sab, sbb = _study(a, a), _study(a, b), _study(b, b)
        s1a, s1b = _study(one, a), _study(one, b)
        # x(tau) = X2 tau^2 + X1 tau + X0
        X2 = -saa * one + 2 * s1a * a
        X1 = -2 * sab * one + 2 * (s1a * b + s1b * a)
        X0 = -sbb * one + 2 * s1b * b
        X = np.array([X0, X1, X2])
        P = X[:, :4]
        quartic = np.array([sum(P[i] @ P[k - i] for i in range(3) if 0 <= k - i <= 2) for k in range(5)])
        scale = np.max(np.abs(quartic))
        if abs(quartic[4]) > 1e-6 * scale:
            break
    else:
        raise NumericalFailure("conic parameterization degenerates", step="conic_null_points")
    roots = np.roots(quartic[::-1].real)
    if np.any(np.abs(roots.imag) <= 1e2 * ctx.tol_rank * np.maximum(1.0, np.abs(roots))):
        raise NumericalFailure("real point of the conic on the null cone", step="conic_null_points")
    upper = sorted(roots[roots.imag > 0], key=lambda r: (round(r.real, 9), r.imag))
    if len(upper) != 2:
        raise NumericalFailure("null points do not form two conjugate pairs", step="conic_null_points")

    def x(tau):
        return X[0] + tau * X[1] + tau * tau * X[2]

    m1, n1 = x(upper[0]), x(upper[1])
    return m1, n1, np.conj(m1), np.conj(n1)


def _primal_quadrilaterals(m1, n1, m2, n2, ctx: Context) -> list:
    """Both primal null quadrilaterals with sides through ``m1', n1', m2', n2'``."""
    mp1, np1, mp2, np2 = (v[:4] for v in (m1, n1, m2, n2))
    _, _, vh = np.linalg.svd(np.vstack([mp1, np2]))
    kernel = vh[2:].conj()
    k = kernel @ kernel.T
    out = []
    for c in _isotropic_pair(k):
        u1 = c @ kernel
        v1 = u1 - (u1 @ np1) / (mp1 @ np1) * mp1
        u2 = v1 - (v1 @ mp2) / (np1 @ mp2) * np1
        v2 = u2 - (u2 @ np2) / (mp2 @ np2) * mp2
        verts = [normalized(np.concatenate([v, np.zeros(4)])) for v in (u1, v1, u2, v2)]
        out.append(verts)
    return out


def two_r_spaces(p1, p2, ctx: Optional[Context] = None) -> tuple:
    """The two 2R spaces through ``[1], [p1], [p2]``.

    The conic ``C = plane ∩ S`` meets the null cone in two conjugate pairs
    ``m1, m2`` and ``n1, n2``.  The primal part of a quadrilateral vertex is
    orthogonal to ``m1'`` and ``n2'`` and isotropic, which leaves two
    choices; the other vertices follow by walking along the sides, and the
    lift to the Study quadric is unique.
    """
    ctx = resolve(ctx)
    points = as_matrix([ONE, _dq(p1), _dq(p2)])
    _plane_checks(points, ctx)
    m1, n1, m2, n2 = _conic_null_points(points, ctx)
    side_points = [m1, n1, m2, n2]
    spaces = []
    for primal in _primal_quadrilaterals(m1, n1, m2, n2, ctx):
        quad = lemma5_lift(EXCEPTIONAL, primal, side_points, STUDY_FORM, ctx)
        try:
            P = Subspace(quad.vertices(), ctx)
        except DependentPoints as exc:
            raise NumericalFailure("lifted quadrilateral is flat", step="two_r_spaces") from exc
        worst = max(P.residual(v) for v in points)
        if worst > _loose(ctx):
            raise NumericalFailure(f"2R space misses a pose ({worst:.2e})", step="two_r_spaces")
        h1, h2 = _recover_axes(P, quad, ctx)
        space = Subspace([ONE, h1, h2, h1 * h2], ctx)
        spaces.append(TwoRSpace(h1, h2, restrict_study(space, ctx), (axis_of(h1), axis_of(h2)), quad))
    spaces.sort(key=lambda sp: tuple(np.round(np.abs(sp.axes[0].as_vector()), 6)))
    return tuple(spaces)


# --- Bennett linkages --------------------------------------------------------


def bennett_conic(p1, p2, ctx: Optional[Context] = None) -> MotionPoly:
    """Monic quadratic motion through ``1, p1, p2`` at ``t = inf, 0, 1``.

    Every point of the plane ``[1] v [p1] v [p2]`` is ``a 1 + b p1 + c p2``;
    the parameterization below is the conic where the plane meets S.
    """
    ctx = resolve(ctx)
    p1, p2 = _dq(p1), _dq(p2)
    s01, s02, s12 = _study(ONE, p1), _study(ONE, p2), _study(p1, p2)
    if abs(s12) <= ctx.tol_rank * max(1.0, p1.magnitude() * p2.magnitude()):
        raise DegeneratePlane("poses lie on a common line of the Study quadric")
    one = ONE.coeffs
    c2 = one
    c1 = -one + (-s02 / s12) * p1.coeffs + (s01 / s12) * p2.coeffs
    c0 = (s02 / s12) * p1.coeffs
    return MotionPoly([c0, c1, c2])


@dataclass
class Joint:
    line: PlueckerLine
    role: str


@dataclass
class Linkage:
    """A closed loop of revolute joints generated by two factorizations of its coupler motion.

    ``joints`` are listed around the loop: the joints of the first chain from
    base to coupler, then those of the second chain from coupler to base.
    """

    kind: str
    joints: list
    coupler_motion: MotionPoly
    pairing: tuple
    poses: list = field(default_factory=list)
    nodes: tuple = INTERPOLATION_NODES
    meta: dict = field(default_factory=dict)

    @property
    def axes(self) -> list:
        return [j.line for j in self.joints]

    @property
    def roles(self) -> list:
        return [j.role for j in self.joints]

    def expected_joint_count(self) -> int:
        return {"Bennett4R": 4, "Goldberg5R": 5}.get(self.kind, len(self.joints))


def merged_axes(f: Factorization, ctx: Optional[Context] = None) -> list:
    """Axes of consecutive factors, with runs of identical axes merged."""
    ctx = resolve(ctx)
    axes = []
    for a in f.axes(ctx):
        if not axes or not axes[-1].same_line(a, ctx.tol_axis):
            axes.append(a)
    return axes


def _chain_joints(f: Factorization, prefix: str, reverse: bool, ctx: Context) -> list:
    axes = merged_axes(f, ctx)
    inner = len(axes) - 2
    middle = ["middle"] if inner == 1 else [f"middle{i}" for i in range(1, inner + 1)]
    names = ["base"] + middle + ["coupler"]
    joints = [Joint(a, f"{prefix}:{n}") for a, n in zip(axes, names)]
    return joints[::-1] if reverse else joints


def bennett_from_poses(p0, p1, p2, ctx: Optional[Context] = None) -> Linkage:
    """Bennett linkage whose coupler visits three poses.

    Both 2R dyads through the poses share the coupler conic; the two
    factorizations of that conic are matched against the axes of the two
    2R spaces as a consistency check.
    """
    ctx = resolve(ctx)
    poses = [_pose(p) for p in (p0, p1, p2)]
    _, q1, q2 = normalize_poses(*poses)
    spaces = two_r_spaces(q1, q2, ctx)
    C = bennett_conic(q1, q2, ctx)
    for sp in spaces:
        worst = max(sp.residual(c) for c in C.coeffs if np.linalg.norm(c) > 0)
        if worst > _loose(ctx):
            raise NumericalFailure(f"coupler conic leaves a 2R space ({worst:.2e})", step="bennett")
    facts = factorize(C, ctx)
    paired = []
    for sp in spaces:
        match = [f for f in facts if _axes_match(f.axes(ctx), sp.axes, ctx)]
        if not match:
            raise NumericalFailure("no factorization of the conic matches a 2R space", step="bennett")
        paired.append(match[0])
    g = poses[0].dq
    pairing = tuple(f.transformed(g) for f in paired)
    joints = _chain_joints(pairing[0], "dyad0", False, ctx) + _chain_joints(pairing[1], "dyad1", True, ctx)
    return Linkage(
        kind="Bennett4R",
        joints=joints,
        coupler_motion=g * C,
        pairing=pairing,
        poses=poses,
        meta={"spaces": spaces},
    )


def _axes_match(a: Sequence, b: Sequence, ctx: Context) -> bool:
    return len(a) == len(b) and all(x.same_line(y, ctx.tol_axis) for x, y in zip(a, b))


def bennett_congruence(linkage: Linkage) -> dict:
    """Distances and angles between the axes of both dyads and between opposite pairs."""
    a = linkage.axes
    base0, mov0, mov1, base1 = a
    return {
        "dyad0": (base0.distance_to(mov0), base0.angle_to(mov0)),
        "dyad1": (base1.distance_to(mov1), base1.angle_to(mov1)),
        "coupler": (mov0.distance_to(mov1), mov0.angle_to(mov1)),
        "base": (base0.distance_to(base1), base0.angle_to(base1)),
    }


# --- ruled chart and cubic interpolation -----------------------------------


@dataclass
class RuledChart:
    """Chart ``(s, u) -> x`` on the quadric of a 2R space.

    ``change_of_basis`` maps coordinates with respect to ``basis`` (rows) to
    chart coordinates ``x`` in which the quadric is ``x0 x3 - x1 x2``.
    ``base_family`` names the family containing the ruling of base rotations.
    """

    basis: np.ndarray
    change_of_basis: np.ndarray
    base_family: str = "first"

    def point(self, s, u) -> DualQuaternion:
        s0, s1 = s
        u0, u1 = u
        x = np.array([s0 * u0, s1 * u0, s0 * u1, s1 * u1], dtype=complex)
        return DualQuaternion(np.linalg.solve(self.change_of_basis, x) @ self.basis)

    def coordinates(self, q) -> np.ndarray:
        c, *_ = np.linalg.lstsq(self.basis.T, as_vector(_dq(q)), rcond=None)
        return self.change_of_basis @ c

    def residual(self, q) -> float:
        v = as_vector(_dq(q))
        c, *_ = np.linalg.lstsq(self.basis.T, v, rcond=None)
        return float(np.linalg.norm(c @ self.basis - v) / max(np.linalg.norm(v), 1e-300))

    def split(self, q) -> tuple:
        """Chart parameters ``(s, u)`` of a point on the quadric."""
        x = self.coordinates(q)
        X = np.array([[x[0], x[2]], [x[1], x[3]]])
        col = X[:, int(np.argmax(np.linalg.norm(X, axis=0)))]
        row = X[int(np.argmax(np.linalg.norm(X, axis=1))), :]
        return col / np.linalg.norm(col), row / np.linalg.norm(row)

    @staticmethod
    def quadric_matrix() -> np.ndarray:
        M = np.zeros((4, 4))
        M[0, 3] = M[3, 0] = 0.5
        M[1, 2] = M[2, 1] = -0.5
        return M


def ruled_chart(P: TwoRSpace) -> RuledChart:
    basis = as_matrix(P.basis)
    return RuledChart(basis=basis, change_of_basis=np.eye(4, dtype=complex), base_family="first")


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _mobius_through(values: Sequence[np.ndarray], ctx: Context) -> np.ndarray:
    """Coefficients ``(c0, c1)`` of ``w -> c1 w + c0`` hitting ``values`` at ``w = inf, 0, 1``."""
    vinf, v0, v1 = values
    M = np.column_stack([vinf, v0])
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[-1] <= 1e2 * ctx.tol_rank * sv[0]:
        raise DegenerateChartData("two poses share a ruling")
    a, b = np.linalg.solve(M, v1)
    if min(abs(a), abs(b)) <= 1e2 * ctx.tol_rank * max(abs(a), abs(b)):
        raise DegenerateChartData("two poses share a ruling")
    return np.array([b * v0, a * vinf])


def _quadratic_through(values: Sequence[np.ndarray], params: Sequence[float], ctx: Context) -> np.ndarray:
    """Coefficients ``(c0, c1, c2)`` of a degree-2 map through ``values`` at ``w = inf, 0, 1``.

    ``params`` are the joint parameters at the extra nodes ``w = -1, 2``,
    that is, the map takes the values ``(param : -1)`` there.
    """
    vinf, v0, v1 = values
    rows = []
    # unknown vector z = (c0, c1, c2) flattened, each c a 2-vector

    def cond(weights, target):
        row = np.zeros(6, complex)
        for k, w in enumerate(weights):
            row[2 * k] += w * target[1]
            row[2 * k + 1] -= w * target[0]
        return row

    rows.append(cond((0, 0, 1), vinf))
    rows.append(cond((1, 0, 0), v0))
    rows.append(cond((1, 1, 1), v1))
    for w, p in zip(PARAM_NODES, params):
        rows.append(cond((1, w, w * w), np.array([p, -1.0])))
    A = np.array(rows)
    _, sv, vh = np.linalg.svd(A)
    if sv[-1] <= 1e2 * ctx.tol_rank * sv[0]:
        raise DegenerateCurve("params leave the quadratic chart factor undetermined", step="interpolate_cubic")
    z = vh[-1].conj()
    return z.reshape(3, 2)


def _gcd_degree(f: np.ndarray, g: np.ndarray, step: str) -> int:
    """Degree of the greatest common divisor of two polynomials (coefficients lowest first)."""

    def trim(p):
        p = np.asarray(p, dtype=complex)
        p = p / np.max(np.abs(p))
        while p.size > 1 and abs(p[-1]) <= 1e-10:
            p = p[:-1]
        return p[::-1]

    f, g = trim(f), trim(g)
    m, n = f.size - 1, g.size - 1
    if m == 0 or n == 0:
        return 0
    S = np.zeros((m + n, m + n), complex)
    for i in range(n):
        S[i, i : i + m + 1] = f
    for i in range(m):
        S[n + i, i : i + n + 1] = g
    sv = np.linalg.svd(S, compute_uv=False)
    rel = sv / sv[0]
    if np.any((rel > 1e-9) & (rel < 1e-5)):
        raise Indeterminate("intersection count is ambiguous", step=step)
    return m + n - int(np.sum(rel >= 1e-5))


def _chart_polys(C: MotionPoly, P: TwoRSpace, ctx: Context) -> np.ndarray:
    chart = ruled_chart(P)
    X = []
    for c in C.coeffs:
        if np.linalg.norm(c) > 0 and chart.residual(c) > _loose(ctx):
            raise InputError("the curve does not lie in the 2R space")
        X.append(chart.coordinates(c))
    return np.array(X).T


def classify_cubic(C: MotionPoly, P: TwoRSpace, ctx: Optional[Context] = None) -> str:
    """Class of a cubic on the quadric of ``P``: ``"first"`` or ``"second"``.

    Counts the intersections with a generic ruling of each family as the
    degree of a polynomial gcd: the chart parameter of the meeting family
    enters the curve with exactly that degree.
    """
    ctx = resolve(ctx)
    if C.degree != 3:
        raise InputError("expected a cubic motion polynomial")
    x0, x1, x2, x3 = _chart_polys(C, P, ctx)
    rng = np.random.default_rng(0 if ctx.seed is None else ctx.seed)
    us, ss = rng.normal(size=2) + 1j * rng.normal(size=2), rng.normal(size=2) + 1j * rng.normal(size=2)
    deg_u = _gcd_degree(x0 * us[1] - x2 * us[0], x1 * us[1] - x3 * us[0], "classify_cubic")
    deg_s = _gcd_degree(x0 * ss[1] - x1 * ss[0], x2 * ss[1] - x3 * ss[0], "classify_cubic")
    if (deg_u, deg_s) == (2, 1):
        return "first"
    if (deg_u, deg_s) == (1, 2):
        return "second"
    raise Indeterminate(f"ruling intersection counts ({deg_u}, {deg_s}) fit neither class", step="classify_cubic")


def interpolate_cubic(P: TwoRSpace, poses: Sequence, family: str, params: Sequence[float], ctx: Optional[Context] = None) -> MotionPoly:
    """Cubic motion on the quadric of ``P`` through three poses at ``w = inf, 0, 1``.

    For the second family the base parameter ``s`` is quadratic in ``w``
    and the moving parameter ``u`` is a Moebius map; for the first family
    the roles are swapped.  The quadratic factor has two free parameters,
    fixed by prescribing its joint parameter at ``w = -1`` and ``w = 2``.
    """
    ctx = resolve(ctx)
    if family not in FAMILIES:
        raise InputError(f"family must be one of {FAMILIES}, got {family!r}")
    params = [float(p) for p in params]
    if len(params) != 2 or not all(np.isfinite(params)):
        raise InputError("params must be two finite real numbers")
    if len(poses) != 3:
        raise InputError("exactly three poses are needed")
    chart = ruled_chart(P)
    svals, uvals = [], []
    for p in poses:
        q = _dq(p)
        if chart.residual(q) > _loose(ctx):
            raise InputError("pose does not lie in the 2R space")
        x = chart.coordinates(q)
        if abs(x[0] * x[3] - x[1] * x[2]) > 1e-6 * np.dot(np.abs(x), np.abs(x)):
            raise InputError("pose does not lie on the quadric of the 2R space")
        s, u = chart.split(q)
        svals.append(s)
        uvals.append(u)
    if family == "second":
        quad = _quadratic_through(svals, params, ctx)
        lin = _mobius_through(uvals, ctx)
        spoly, upoly = quad, lin
    else:
        quad = _quadratic_through(uvals, params, ctx)
        lin = _mobius_through(svals, ctx)
        spoly, upoly = lin, quad
    if _gcd_degree(quad[:, 0], quad[:, 1], "interpolate_cubic") > 0 or np.linalg.norm(quad[2]) <= 1e-9 * np.linalg.norm(quad):
        raise DegenerateCurve("quadratic chart factor collapses to lower degree", step="interpolate_cubic")
    # x(w) coordinates: s0 u0, s1 u0, s0 u1, s1 u1
    xs = np.zeros((4, 4), complex)
    for i, si in enumerate(spoly):
        for j, uj in enumerate(upoly):
            xs[i + j] += np.array([si[0] * uj[0], si[1] * uj[0], si[0] * uj[1], si[1] * uj[1]])
    coeffs = xs @ chart.basis
    lead = coeffs[-1]
    k = int(np.argmax(np.abs(lead)))
    coeffs = coeffs * (abs(lead[k]) / lead[k]) / np.linalg.norm(lead)
    if np.max(np.abs(coeffs.imag)) > 1e2 * ctx.tol_real * max(1.0, np.max(np.abs(coeffs))):
        raise NonRealCurve("interpolating cubic has non-real coefficients", step="interpolate_cubic")
    C = MotionPoly(coeffs.real)
    if C.degree < 3:
        raise DegenerateCurve("interpolant has degree below three", step="interpolate_cubic")
    lead = C.leading
    if abs(lead.coeffs[0]) > 0 and np.allclose(lead.coeffs[1:], 0, atol=1e-12 * abs(lead.coeffs[0])):
        C = C * (1 / lead.coeffs[0].real)
    return C


# --- Goldberg 5R linkages ----------------------------------------------------


def _dyad_factorization(facts: list, family: str, P: TwoRSpace, ctx: Context) -> tuple:
    """Factorizations with two adjacent identical axes on the side fixed by ``family``."""
    side = (0, 1) if family == "second" else (1, 2)
    found = []
    for f in facts:
        axes = f.axes(ctx)
        if axes[side[0]].same_line(axes[side[1]], ctx.tol_axis):
            found.append(f)
    if not found:
        raise NoDegenerateFactorization("no factorization has two identical adjacent axes")
    return found


def _admissible_partners(F: Factorization, facts: list, ctx: Context) -> list:
    fa = F.axes(ctx)
    ref = merged_axes(F, ctx)
    out = []
    for G in facts:
        ga = G.axes(ctx)
        if _axes_match(merged_axes(G, ctx), ref, ctx):
            continue
        if ga[0].same_line(fa[0], ctx.tol_axis) or ga[-1].same_line(fa[-1], ctx.tol_axis):
            continue
        out.append(G)
    return out


def synthesize_5r(
    p0,
    p1,
    p2,
    family: str = "second",
    params: Sequence[float] = (0.0, 0.0),
    which_space: int = 0,
    extra_poses: Sequence = (),
    ctx: Optional[Context] = None,
) -> list:
    """Goldberg 5R linkages whose coupler visits three poses.

    The coupler follows a cubic on the quadric of one of the two 2R spaces
    through the poses.  One factorization of the cubic has two coaxial
    adjacent factors and realizes the 2R dyad; it closes a loop with every
    factorization that differs from it in both the first and the last axis.
    ``extra_poses`` are checked against the chosen 2R space and rejected
    with ``InfeasiblePose`` when they do not lie on its quadric.
    """
    from .errors import InfeasiblePose

    ctx = resolve(ctx)
    if family not in FAMILIES:
        raise InputError(f"family must be one of {FAMILIES}, got {family!r}")
    if which_space not in (0, 1):
        raise InputError("which_space must be 0 or 1")
    poses = [_pose(p) for p in (p0, p1, p2)]
    normed = normalize_poses(*poses)
    spaces = two_r_spaces(normed[1], normed[2], ctx)
    P = spaces[which_space]
    g = poses[0].dq
    for extra in extra_poses:
        q = g.conj() * _pose(extra).dq
        res = P.residual(q)
        if res > _loose(ctx):
            raise InfeasiblePose(f"extra pose is not reachable in the 2R space (residual {res:.2e})")
    C = interpolate_cubic(P, normed, family, params, ctx)
    facts = factorize_cubic(C, ctx)
    dyads = _dyad_factorization(facts, family, P, ctx)
    F = dyads[0]
    if not _axes_match(merged_axes(F, ctx), list(P.axes), ctx):
        raise NumericalFailure("dyad factorization does not reproduce the 2R axes", step="synthesize_5r")
    partners = _admissible_partners(F, facts, ctx)
    out = []
    for G in partners:
        Ft, Gt = F.transformed(g), G.transformed(g)
        joints = _chain_joints(Ft, "dyad", False, ctx) + _chain_joints(Gt, "chain", True, ctx)
        out.append(
            Linkage(
                kind="Goldberg5R",
                joints=joints,
                coupler_motion=g * C,
                pairing=(Ft, Gt),
                poses=poses,
                meta={"family": family, "params": list(params), "which_space": which_space},
            )
        )
    return out


def orientation_obstruction(P: TwoRSpace, rotation) -> float:
    """Normalized Study residual of the point of ``P`` with prescribed primal part.

    Every 2R space projects bijectively onto the primal 3-space, so the
    point exists and is unique; it generically lies off the Study quadric.
    """
    r = np.asarray(rotation.coeffs[:4] if hasattr(rotation, "coeffs") else rotation, dtype=complex).reshape(4)
    B = as_matrix(P.basis)
    c = np.linalg.solve(B[:, :4].T, r)
    x = c @ B
    return float(abs(x @ STUDY_FORM @ x) / np.vdot(x, x).real)
