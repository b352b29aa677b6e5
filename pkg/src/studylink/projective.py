"""Flats and quadrics of complex projective 7-space.

Points are dual quaternions taken up to a nonzero complex factor.  The Study
quadric ``S`` and the null cone ``N`` enter through their symmetric
bilinear forms::

    S(x, y) = p_x . d_y + d_x . p_y        (so S(q, q) = 2 p . d)
    N(x, y) = p_x . p_y

Both forms are bilinear, never sesquilinear: complex points are legitimate
points of the complexified space.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .context import Context, resolve
from .dq import DualQuaternion
from .errors import (
    ContainedInStudy,
    DegenerateConfig,
    DependentPoints,
    LiftInconsistent,
    NoQuadrilateral,
    SingularB,
)

STUDY_FORM = np.block([[np.zeros((4, 4)), np.eye(4)], [np.eye(4), np.zeros((4, 4))]])
NULL_FORM = np.diag([1.0, 1, 1, 1, 0, 0, 0, 0])


def as_vector(x) -> np.ndarray:
    if isinstance(x, DualQuaternion):
        return np.array(x.coeffs)
    return np.asarray(x, dtype=complex).reshape(8)


def as_matrix(points) -> np.ndarray:
    """Stack points as rows of a ``(k, 8)`` complex array."""
    if isinstance(points, Subspace):
        return points.basis
    if isinstance(points, np.ndarray) and points.ndim == 2:
        return points.astype(complex)
    return np.array([as_vector(p) for p in points])


def numerical_rank(matrix: np.ndarray, tol: float) -> int:
    s = np.linalg.svd(matrix, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def proj_distance(a, b) -> float:
    """Sine of the angle between the complex lines spanned by ``a`` and ``b``."""
    a, b = as_vector(a), as_vector(b)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 1.0
    a, b = a / na, b / nb
    return float(min(1.0, np.linalg.norm(a - b * np.vdot(b, a))))


def proj_equal(a, b, ctx: Optional[Context] = None) -> bool:
    return proj_distance(a, b) <= resolve(ctx).tol_proj


def canonical_key(v: np.ndarray, digits: int = 8) -> tuple:
    """Scale-free sort key: the entry of largest modulus is made 1."""
    v = as_vector(v)
    mags = np.round(np.abs(v), digits)
    k = int(np.argmax(mags))
    w = v / v[k]
    return tuple(np.round(np.column_stack([w.real, w.imag]).ravel(), digits) + 0.0)


def normalized(v: np.ndarray) -> np.ndarray:
    """Unit vector with the largest entry real and positive."""
    v = as_vector(v)
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k]) / np.linalg.norm(v)


class Subspace:
    """Projective subspace spanned by the rows of ``basis`` (full rank)."""

    def __init__(self, points, ctx: Optional[Context] = None):
        ctx = resolve(ctx)
        basis = as_matrix(points)
        if basis.ndim != 2 or basis.shape[1] != 8 or basis.shape[0] == 0:
            raise ValueError("basis must be a nonempty list of 8-vectors")
        if numerical_rank(basis, ctx.tol_rank) < basis.shape[0]:
            raise DependentPoints("basis points are linearly dependent")
        self.basis = basis
        self.basis.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.basis.shape[0] - 1

    def orthonormal(self) -> np.ndarray:
        """``(8, k)`` array with orthonormal columns spanning the subspace."""
        q, _ = np.linalg.qr(self.basis.T)
        return q

    def residual(self, x) -> float:
        """Relative distance of the point ``x`` from the subspace."""
        x = as_vector(x)
        q = self.orthonormal()
        r = x - q @ (q.conj().T @ x)
        return float(np.linalg.norm(r) / max(np.linalg.norm(x), 1e-300))

    def contains(self, x, tol: float = 1e-8) -> bool:
        return self.residual(x) <= tol

    def coordinates(self, x) -> np.ndarray:
        """Coefficients ``c`` with ``c @ basis == x`` (least squares)."""
        c, *_ = np.linalg.lstsq(self.basis.T, as_vector(x), rcond=None)
        return c

    def point(self, coords) -> DualQuaternion:
        return DualQuaternion(np.asarray(coords, dtype=complex) @ self.basis)

    def distance(self, other: "Subspace") -> float:
        """Sine of the largest principal angle (subspaces of equal dimension)."""
        qa, qb = self.orthonormal(), other.orthonormal()
        r = qb - qa @ (qa.conj().T @ qb)
        return float(np.linalg.norm(r, 2))

    def is_real(self, tol: float = 1e-9) -> bool:
        stacked = np.vstack([self.basis.real, self.basis.imag])
        return numerical_rank(stacked, tol) <= self.basis.shape[0]

    def real_basis(self) -> np.ndarray:
        """Orthonormal real basis rows (only meaningful if ``is_real``)."""
        stacked = np.vstack([self.basis.real, self.basis.imag])
        _, _, vt = np.linalg.svd(stacked)
        return vt[: self.basis.shape[0]]

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim})"


EXCEPTIONAL = Subspace(np.hstack([np.zeros((4, 4)), np.eye(4)]))
PRIMAL_SPACE = Subspace(np.hstack([np.eye(4), np.zeros((4, 4))]))


def gram(basis: np.ndarray, form: np.ndarray) -> np.ndarray:
    return basis @ form @ basis.T


@dataclass
class QuadricForm:
    """Symmetric matrix of a quadric restricted to a flat, plus its type."""

    M: np.ndarray
    rank: int = 0
    regular: bool = False
    ruled: bool = False

    def value(self, coords) -> complex:
        c = np.asarray(coords, dtype=complex)
        return complex(c @ self.M @ c)


def restrict_study(P: Subspace, ctx: Optional[Context] = None) -> QuadricForm:
    """Gram matrix of the Study form in the basis of ``P``.

    Rank, regularity and ruledness are judged on an orthonormal basis so the
    verdict does not depend on how ``P`` was presented.
    """
    ctx = resolve(ctx)
    M = gram(P.basis, STUDY_FORM)
    q = P.orthonormal().T
    Mo = gram(q, STUDY_FORM)
    scale = np.max(np.abs(Mo))
    if scale <= ctx.tol_rank:
        raise ContainedInStudy("the flat lies inside the Study quadric")
    rank = numerical_rank(Mo, ctx.tol_rank)
    regular = rank == P.basis.shape[0]
    ruled = False
    if regular:
        if P.is_real(ctx.tol_real):
            r = P.real_basis()
            ev = np.linalg.eigvalsh(gram(r, STUDY_FORM))
            ruled = int(np.sum(ev > 0)) == int(np.sum(ev < 0))
        else:
            ruled = True
    return QuadricForm(M=M, rank=rank, regular=regular, ruled=ruled)


def is_null_line(x, y, ctx: Optional[Context] = None) -> bool:
    """True iff the line through ``x`` and ``y`` lies in the Study quadric and the null cone."""
    return null_line_residual(x, y, ctx) <= 1e2 * resolve(ctx).tol_rank


def null_line_residual(x, y, ctx: Optional[Context] = None) -> float:
    ctx = resolve(ctx)
    x, y = as_vector(x), as_vector(y)
    if numerical_rank(np.vstack([x, y]), ctx.tol_rank) < 2:
        raise DependentPoints("points of a line must be independent")
    x, y = x / np.linalg.norm(x), y / np.linalg.norm(y)
    px, dx, py, dy = x[:4], x[4:], y[:4], y[4:]
    checks = [
        px @ px,
        2 * px @ dx,
        py @ py,
        2 * py @ dy,
        2 * px @ py,
        2 * (px @ dy + dx @ py),
    ]
    return float(max(abs(c) for c in checks))


def meets_exceptional(P: Subspace, ctx: Optional[Context] = None) -> bool:
    ctx = resolve(ctx)
    stacked = np.vstack([P.orthonormal().T, EXCEPTIONAL.basis])
    return numerical_rank(stacked, ctx.tol_rank) < stacked.shape[0]


@dataclass
class NullQuadrilateral:
    """Vertices ``u1, v1, u2, v2`` in cyclic order; sides join neighbours."""

    u1: np.ndarray
    v1: np.ndarray
    u2: np.ndarray
    v2: np.ndarray
    residual: float = 0.0

    def vertices(self) -> list:
        return [self.u1, self.v1, self.u2, self.v2]

    def sides(self) -> list:
        vs = self.vertices()
        return [(vs[i], vs[(i + 1) % 4]) for i in range(4)]

    def max_side_residual(self) -> float:
        return max(null_line_residual(a, b) for a, b in self.sides())

    def matches(self, other: "NullQuadrilateral", tol: float = 1e-8) -> bool:
        """Same cyclic vertex sequence up to rotation and reversal."""
        mine = self.vertices()
        theirs = other.vertices()
        for shift in range(4):
            for step in (1, -1):
                seq = [theirs[(shift + step * i) % 4] for i in range(4)]
                if all(proj_distance(a, b) <= tol for a, b in zip(mine, seq)):
                    return True
        return False


def _isotropic_pair(s: np.ndarray) -> list:
    """The two isotropic vectors of a regular symmetric 2x2 form."""
    a, b, c = s[0, 0], s[0, 1], s[1, 1]
    disc = np.sqrt(complex(b * b - a * c))
    if abs(a) >= abs(c):
        if abs(a) == 0:
            return [np.array([1, 0], complex), np.array([0, 1], complex)]
        return [np.array([(-b + disc) / a, 1]), np.array([(-b - disc) / a, 1])]
    return [np.array([1, (-b + disc) / c]), np.array([1, (-b - disc) / c])]


def _pair_eigenvalues(lams: np.ndarray) -> tuple:
    best = None
    for a, b in ((1, (2, 3)), (2, (1, 3)), (3, (1, 2))):
        pairs = ((0, a), b)
        spread = max(abs(lams[i] - lams[j]) for i, j in pairs)
        if best is None or spread < best[0]:
            best = (spread, pairs)
    return best


def find_null_quadrilateral(P: Subspace, ctx: Optional[Context] = None) -> NullQuadrilateral:
    """The null quadrilateral of a 3-space, via the pencil spanned by ``S|P`` and ``N|P``.

    The pencil ``S - lam N`` of a 3-space containing a null quadrilateral has
    two degenerate members of rank two.  Each is a pair of planes meeting in
    a diagonal of the quadrilateral; the diagonal meets ``S`` in two
    opposite vertices.
    """
    ctx = resolve(ctx)
    if P.dim != 3:
        raise NoQuadrilateral("expected a 3-space", step="find_null_quadrilateral")
    q = P.orthonormal()
    S = q.T @ STUDY_FORM @ q
    N = q.T @ NULL_FORM @ q
    if numerical_rank(N, ctx.tol_rank) < 4:
        raise NoQuadrilateral("flat meets the exceptional 3-space", step="find_null_quadrilateral")
    lams = scipy.linalg.eigvals(S, N)
    if not np.all(np.isfinite(lams)):
        raise NoQuadrilateral("pencil is singular", step="find_null_quadrilateral")
    spread, pairs = _pair_eigenvalues(lams)
    scale = max(1.0, float(np.max(np.abs(lams))))
    loose = np.sqrt(ctx.tol_rank)
    if spread > loose * scale:
        raise NoQuadrilateral(
            f"degenerate pencil members are not double (spread {spread:.2e})",
            step="find_null_quadrilateral",
        )
    groups = []
    for i, j in pairs:
        lam = (lams[i] + lams[j]) / 2
        D = S - lam * N
        _, sv, vh = np.linalg.svd(D)
        if sv[2] > loose * sv[0] or sv[1] <= loose * sv[0]:
            raise NoQuadrilateral("pencil member is not a plane pair", step="find_null_quadrilateral")
        kernel = vh[2:].T
        k = kernel.T @ S @ kernel
        verts = [q @ (kernel @ c) for c in _isotropic_pair(k)]
        if proj_distance(*verts) <= ctx.tol_proj:
            raise NoQuadrilateral("diagonal is tangent to the Study quadric", step="find_null_quadrilateral")
        groups.append([normalized(v) for v in verts])
    flat = groups[0] + groups[1]
    start = max(range(4), key=lambda i: canonical_key(flat[i]))
    ours, theirs = (groups[0], groups[1]) if start < 2 else (groups[1], groups[0])
    u1 = flat[start]
    u2 = ours[1] if start % 2 == 0 else ours[0]
    v1, v2 = sorted(theirs, key=canonical_key, reverse=True)
    quad = NullQuadrilateral(u1, v1, u2, v2)
    quad.residual = quad.max_side_residual()
    if quad.residual > 1e2 * ctx.tol_rank:
        raise NoQuadrilateral(
            f"sides are not null lines (residual {quad.residual:.2e})", step="find_null_quadrilateral"
        )
    return quad


def _projection(x: np.ndarray, centre: np.ndarray, target: np.ndarray, ctx: Context) -> np.ndarray:
    """Project ``x`` from ``centre`` onto the flat spanned by the rows of ``target``."""
    A = np.column_stack([x, centre, target.T])
    _, sv, vh = np.linalg.svd(A)
    null = vh[-1].conj()
    if sv[-2] <= ctx.tol_rank * sv[0]:
        raise DegenerateConfig("projection is not uniquely defined")
    y = target.T @ null[2:]
    if np.linalg.norm(y) <= ctx.tol_rank * np.linalg.norm(A):
        raise DegenerateConfig("point coincides with the projection centre")
    if abs(null[0]) <= ctx.tol_rank * np.linalg.norm(null):
        raise DegenerateConfig("projection centre lies in the target flat")
    return y


def lemma4_cycle(E: Subspace, f_points: Sequence, centres: Sequence, x, ctx: Optional[Context] = None) -> DualQuaternion:
    """Compose the four central projections ``U1 -> V1 -> U2 -> V2 -> U1``.

    ``f_points`` are ``u1', v1', u2', v2'``; the flats are ``U1 = u1' v E`` etc.
    The projection from ``U1`` to ``V1`` has centre ``centres[0]`` and so on
    around the cycle.  With coplanar centres the composition is the identity.
    """
    ctx = resolve(ctx)
    F = as_matrix(f_points)
    C = as_matrix(centres)
    if F.shape[0] != 4 or C.shape[0] != 4:
        raise DegenerateConfig("need four points and four centres")
    if numerical_rank(np.vstack([F, E.basis]), ctx.tol_rank) < 8:
        raise DegenerateConfig("F and E must be disjoint 3-spaces")
    if numerical_rank(C, ctx.tol_rank) < 3:
        raise DegenerateConfig("projection centres do not span a plane")
    flats = [np.vstack([F[i], E.basis]) for i in range(4)]
    y = as_vector(x)
    if np.linalg.norm(y) == 0:
        raise DegenerateConfig("zero vector")
    for i in range(4):
        y = _projection(y, C[i], flats[(i + 1) % 4], ctx)
    return DualQuaternion(y)


def lemma5_lift(
    E: Subspace,
    primal_quad: Sequence,
    side_points: Sequence,
    form: np.ndarray = STUDY_FORM,
    ctx: Optional[Context] = None,
) -> NullQuadrilateral:
    """Recover a spatial quadrilateral on a quadric from its projection.

    Given the projections ``u1', v1', u2', v2'`` from ``E`` and the points
    ``m1, n1, m2, n2`` where the sides ``u1v1, v1u2, u2v2, v2u1`` meet a plane,
    find the unique quadrilateral whose vertices lie on the quadric of
    ``form`` (which must contain ``E``).

    Writing ``u1 = u1' + e`` with unknown ``e`` in ``E`` makes every other
    vertex an affine function of ``e`` (walk around the sides through the
    given side points).  Because ``form`` vanishes on ``E`` the four vertex
    conditions are linear in ``e``: one 4x4 solve.
    """
    ctx = resolve(ctx)
    F = as_matrix(primal_quad)
    Mp = as_matrix(side_points)
    form = np.asarray(form)
    W = np.vstack([F, E.basis])
    if F.shape[0] != 4 or Mp.shape[0] != 4 or numerical_rank(W, ctx.tol_rank) < 8:
        raise DegenerateConfig("E and F must be disjoint 3-spaces")
    e_gram = gram(E.basis, form)
    if np.max(np.abs(e_gram)) > ctx.tol_rank * max(1.0, np.max(np.abs(form))):
        raise DegenerateConfig("the quadric does not contain E")
    Winv = np.linalg.inv(W.T)

    def f_part(v):
        return (Winv @ v)[:4] @ F

    # vertex k is const[k] + lin[k] @ e, e holding 4 coordinates in E
    const = [F[0]]
    lin = [E.basis.T]
    for k in range(3):
        centre = Mp[k]
        target = F[k + 1]
        prev_f = f_part(const[k])
        # centre = a * prev + b * next  on the F-component
        coef, *_ = np.linalg.lstsq(np.column_stack([prev_f, target]), f_part(centre), rcond=None)
        a = coef[0]
        const.append(centre - a * const[k])
        lin.append(-a * lin[k])
    A = np.zeros((4, 4), complex)
    rhs = np.zeros(4, complex)
    for k in range(4):
        # form(c + L e, c + L e) = form(c, c) + 2 form(c, L e)
        A[k] = 2 * const[k] @ form @ lin[k]
        rhs[k] = -const[k] @ form @ const[k]
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= ctx.tol_rank * sv[0]:
        raise SingularB("lifting system is singular", step="lemma5_lift")
    e = np.linalg.solve(A, rhs)
    verts = [normalized(const[k] + lin[k] @ e) for k in range(4)]
    residual = _lift_residual(verts, Mp, form)
    quad = NullQuadrilateral(*verts, residual=residual)
    if residual > 1e2 * ctx.tol_rank:
        raise LiftInconsistent(
            f"lifted quadrilateral violates incidence/quadric conditions ({residual:.2e})",
            step="lemma5_lift",
            residual=residual,
        )
    return quad


def _lift_residual(verts: list, side_points: np.ndarray, form: np.ndarray) -> float:
    res = []
    for i, j in itertools.product(range(4), range(4)):
        # on the quadric, and adjacent vertices conjugate
        if i == j or (i - j) % 2 == 1:
            res.append(abs(verts[i] @ form @ verts[j]))
    for k in range(4):
        a, b = verts[k], verts[(k + 1) % 4]
        m = side_points[k] / np.linalg.norm(side_points[k])
        s = np.linalg.svd(np.vstack([a, b, m]), compute_uv=False)
        res.append(s[2] / s[0])
    return float(max(res))
