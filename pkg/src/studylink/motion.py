"""Polynomials in a central indeterminate with dual quaternion coefficients.

A ``MotionPoly`` stores coefficients lowest degree first.  Real scalar
polynomials (norm polynomials and their quadratic factors) are plain
``numpy.polynomial.Polynomial`` objects.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .context import Context, resolve
from .dq import DualQuaternion, axis_of, dqconj, dqmul
from .errors import (
    NonGeneric,
    NonInvertibleLead,
    NotAMotionPolynomial,
    RealRootPresent,
)


REPEAT_TOL = 1e-4


class RepeatedFactorWarning(UserWarning):
    """Two quadratic factors of a norm polynomial coincide."""


class MotionPoly:
    """Polynomial ``sum_k coeffs[k] t**k`` with dual quaternion coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        if isinstance(coeffs, MotionPoly):
            arr = np.array(coeffs._c)
        else:
            rows = [c.coeffs if isinstance(c, DualQuaternion) else c for c in coeffs]
            arr = np.array(rows, dtype=complex).reshape(-1, 8)
        if arr.shape[0] == 0:
            arr = np.zeros((1, 8), complex)
        # strip exactly vanishing leading coefficients
        while arr.shape[0] > 1 and not np.any(arr[-1]):
            arr = arr[:-1]
        arr.flags.writeable = False
        object.__setattr__(self, "_c", arr)

    def __setattr__(self, name, value):
        raise AttributeError("MotionPoly is immutable")

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    @classmethod
    def linear(cls, h) -> "MotionPoly":
        """The polynomial ``t - h``."""
        h = DualQuaternion(h).coeffs
        return cls([-h, np.eye(8)[0]])

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return self._c.shape[0] - 1

    @property
    def leading(self) -> DualQuaternion:
        return DualQuaternion(self._c[-1])

    def __getitem__(self, k: int) -> DualQuaternion:
        return DualQuaternion(self._c[k])

    def __mul__(self, other):
        if isinstance(other, MotionPoly):
            return mp_mul(self, other)
        if isinstance(other, DualQuaternion):
            return MotionPoly(dqmul(self._c, other.coeffs[None, :]))
        return MotionPoly(self._c * other)

    def __rmul__(self, other):
        if isinstance(other, DualQuaternion):
            return MotionPoly(dqmul(other.coeffs[None, :], self._c))
        return MotionPoly(self._c * other)

    def __add__(self, other: "MotionPoly") -> "MotionPoly":
        n = max(self._c.shape[0], other._c.shape[0])
        out = np.zeros((n, 8), complex)
        out[: self._c.shape[0]] += self._c
        out[: other._c.shape[0]] += other._c
        return MotionPoly(out)

    def __neg__(self) -> "MotionPoly":
        return MotionPoly(-self._c)

    def __sub__(self, other: "MotionPoly") -> "MotionPoly":
        return self + (-other)

    def conj(self) -> "MotionPoly":
        return MotionPoly(dqconj(self._c))

    def __call__(self, t) -> DualQuaternion:
        return mp_eval(self, t)

    def magnitude(self) -> float:
        return float(np.linalg.norm(self._c))

    def distance(self, other: "MotionPoly") -> float:
        """Largest coefficientwise difference."""
        n = max(self._c.shape[0], other._c.shape[0])
        a = np.zeros((n, 8), complex)
        b = np.zeros((n, 8), complex)
        a[: self._c.shape[0]] = self._c
        b[: other._c.shape[0]] = other._c
        return float(np.max(np.abs(a - b)))

    def monic(self) -> "MotionPoly":
        """Left-multiply by the inverse of the leading coefficient."""
        return self.leading.inverse() * self

    def is_real(self, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self._c.imag)) <= tol * max(1.0, self.magnitude()))

    def real(self) -> "MotionPoly":
        return MotionPoly(self._c.real)

    def __repr__(self) -> str:
        return f"MotionPoly(degree={self.degree})"


def mp_mul(a: MotionPoly, b: MotionPoly) -> MotionPoly:
    ca, cb = a.coeffs, b.coeffs
    out = np.zeros((ca.shape[0] + cb.shape[0] - 1, 8), complex)
    for i in range(ca.shape[0]):
        out[i : i + cb.shape[0]] += dqmul(np.broadcast_to(ca[i], cb.shape), cb)
    return MotionPoly(out)


def mp_eval(C: MotionPoly, t) -> DualQuaternion:
    """Horner evaluation; ``t = inf`` (or ``None``) yields the leading coefficient."""
    if t is None or (np.isreal(t) and np.isinf(np.real(t))):
        return C.leading
    acc = np.zeros(8, complex)
    for c in C.coeffs[::-1]:
        acc = acc * t + c
    return DualQuaternion(acc)


def norm_poly(C: MotionPoly, ctx: Optional[Context] = None) -> Polynomial:
    """The real polynomial ``C conj(C)``."""
    ctx = resolve(ctx)
    prod = mp_mul(C, C.conj()).coeffs
    scale = max(1.0, C.magnitude() ** 2)
    residue = max(
        np.max(np.abs(prod[:, 1:])),
        np.max(np.abs(prod[:, 0].imag)),
    )
    if residue > 1e2 * ctx.tol_real * scale:
        raise NotAMotionPolynomial(f"norm polynomial is not real (residue {residue:.2e})")
    return Polynomial(prod[:, 0].real)


def quadratic_factors(nu: Polynomial, ctx: Optional[Context] = None) -> list:
    """Monic real quadratic factors of a real polynomial without real roots.

    Roots come from companion-matrix eigenvalues; each root in the upper half
    plane is paired with its conjugate.  The factors are sorted by their
    coefficients so the output order is canonical.
    """
    ctx = resolve(ctx)
    coef = np.trim_zeros(np.asarray(nu.coef, dtype=float), "b")
    n = coef.size - 1
    if n < 2 or n % 2:
        raise NotAMotionPolynomial("norm polynomial must have even positive degree")
    if coef[-1] <= 0:
        raise NotAMotionPolynomial("norm polynomial must have positive leading coefficient")
    roots = np.roots(coef[::-1])
    real_tol = 1e2 * ctx.tol_rank
    if np.any(np.abs(roots.imag) <= real_tol * np.maximum(1.0, np.abs(roots))):
        raise RealRootPresent("norm polynomial has a real root")
    upper = sorted(roots[roots.imag > 0], key=lambda r: (r.real, r.imag))
    lower = list(roots[roots.imag < 0])
    if len(upper) != n // 2:
        raise RealRootPresent("roots do not come in conjugate pairs")
    factors = []
    for r in upper:
        k = int(np.argmin([abs(s - np.conj(r)) for s in lower]))
        partner = lower.pop(k)
        re = (r.real + partner.real) / 2
        mod2 = (abs(r) ** 2 + abs(partner) ** 2) / 2
        factors.append(Polynomial([mod2, -2 * re, 1.0]))
    factors.sort(key=lambda m: (m.coef[1], m.coef[0]))
    # a root of multiplicity k is only accurate to about eps**(1/k), so
    # nearby quadratics are snapped to their mean
    clusters = []
    for k, m in enumerate(factors):
        for group in clusters:
            ref = factors[group[0]].coef
            if np.max(np.abs(m.coef - ref)) <= REPEAT_TOL * max(1.0, np.max(np.abs(ref))):
                group.append(k)
                break
        else:
            clusters.append([k])
    repeated = len(clusters) < len(factors)
    for group in clusters:
        mean = Polynomial(np.mean([factors[k].coef for k in group], axis=0))
        for k in group:
            factors[k] = mean
    if repeated:
        warnings.warn("repeated quadratic factor", RepeatedFactorWarning, stacklevel=2)
    return factors


def div_rem_quadratic(C: MotionPoly, M: Polynomial) -> tuple:
    """Divide by a monic real quadratic: ``C = Q M + R`` with ``deg R <= 1``."""
    m = np.asarray(M.coef, dtype=float)
    if m.size != 3 or m[2] != 1:
        raise ValueError("divisor must be a monic quadratic")
    rem = np.array(C.coeffs, dtype=complex)
    n = rem.shape[0] - 1
    if n < 2:
        return MotionPoly(np.zeros((1, 8))), MotionPoly(rem)
    quo = np.zeros((n - 1, 8), complex)
    for k in range(n, 1, -1):
        q = rem[k].copy()
        quo[k - 2] = q
        rem[k] -= q
        rem[k - 1] -= m[1] * q
        rem[k - 2] -= m[0] * q
    return MotionPoly(quo), MotionPoly(rem[:2])


def right_divide_linear(C: MotionPoly, h) -> tuple:
    """``C = Q (t - h) + r``; returns ``(Q, r)``."""
    h = DualQuaternion(h).coeffs
    c = C.coeffs
    n = c.shape[0] - 1
    q = np.zeros((n, 8), complex)
    q[n - 1] = c[n]
    for k in range(n - 1, 0, -1):
        q[k - 1] = c[k] + dqmul(q[k], h)
    r = c[0] + dqmul(q[0], h)
    return MotionPoly(q), DualQuaternion(r)


def _invert(a: np.ndarray, ctx: Context) -> np.ndarray:
    n = dqmul(a, dqconj(a))
    if abs(n[0]) <= 1e2 * ctx.tol_rank * max(1e-300, np.dot(np.abs(a), np.abs(a))):
        raise NonInvertibleLead("remainder lead coefficient is not invertible", step="right_factor")
    inv_norm = np.zeros(8, complex)
    inv_norm[0] = 1 / n[0]
    inv_norm[4] = -n[4] / n[0] ** 2
    return dqmul(dqconj(a), inv_norm)


def right_factor(C: MotionPoly, M: Polynomial, ctx: Optional[Context] = None) -> DualQuaternion:
    """The ``h`` with ``(t - h)`` a right factor of ``C`` and norm ``M``."""
    ctx = resolve(ctx)
    if C.degree == 1:
        return DualQuaternion(-C.coeffs[0])
    _, R = div_rem_quadratic(C, M)
    a, b = R.coeffs[1] if R.degree >= 1 else np.zeros(8), R.coeffs[0]
    if R.degree < 1:
        raise NonInvertibleLead("remainder is constant", step="right_factor")
    return DualQuaternion(-dqmul(_invert(a, ctx), b))


@dataclass
class Factorization:
    """``C = lead (t - h1)(t - h2)...(t - hn) tail``.

    ``permutation[i]`` indexes the quadratic factor (in the canonical order
    of ``quadratic_factors``) that is the norm of factor ``i``.  ``tail`` is
    the identity unless the factorization was moved by ``transformed``.
    """

    factors: list
    permutation: tuple = ()
    lead: DualQuaternion = field(default_factory=lambda: DualQuaternion())
    reparam: Optional[tuple] = None
    tail: DualQuaternion = field(default_factory=lambda: DualQuaternion())

    def product(self) -> MotionPoly:
        out = MotionPoly([self.lead])
        for h in self.factors:
            out = out * MotionPoly.linear(h)
        return out * self.tail

    def axes(self, ctx: Optional[Context] = None) -> list:
        return [axis_of(h, ctx) for h in self.factors]

    def transformed(self, q: DualQuaternion) -> "Factorization":
        """Factorization of ``q C`` for a unit dual quaternion ``q``.

        Every factor is conjugated by ``q``, which moves the rotation axes
        by the displacement ``q``; the remaining ``q`` ends up in ``tail``.
        """
        qc = q.conj()
        return Factorization(
            [q * h * qc for h in self.factors],
            self.permutation,
            q * self.lead * qc,
            self.reparam,
            q * self.tail,
        )

    def __len__(self) -> int:
        return len(self.factors)


def factorize(C: MotionPoly, ctx: Optional[Context] = None, kinematic_dedup: bool = False) -> list:
    """All factorizations of a motion polynomial into linear rotation factors.

    One factorization per ordering of the real quadratic factors of the
    norm polynomial; the right factor with norm ``M`` is peeled off first
    for the last entry of the ordering.
    """
    ctx = resolve(ctx)
    if C.degree < 1:
        raise ValueError("constant polynomial has no factorization")
    C, reparam = ensure_invertible_lead(C, ctx)
    lead = C.leading
    monic = C.monic()
    nu = norm_poly(monic, ctx)
    quads = quadratic_factors(nu, ctx)
    if len(quads) != C.degree:
        raise NonGeneric("norm polynomial does not split into quadratics", step="factorize")
    out = []
    scale = max(1.0, monic.magnitude())
    for perm in itertools.permutations(range(len(quads))):
        rest = monic
        factors = []
        try:
            for idx in perm[::-1]:
                h = right_factor(rest, quads[idx], ctx)
                rest, r = right_divide_linear(rest, h)
                if r.magnitude() > 1e-6 * scale:
                    raise NonInvertibleLead("linear factor does not divide", step="factorize")
                factors.append(h)
        except NonInvertibleLead:
            continue
        f = _world_frame(Factorization(factors[::-1], tuple(perm), lead, reparam), ctx)
        if f.product().distance(C) > 1e-8 * max(1.0, C.magnitude()):
            continue
        if any(_same_factors(f, g, 1e-9) for g in out):
            continue
        out.append(f)
    if not out:
        raise NonGeneric("no permutation produced a factorization", step="factorize")
    if kinematic_dedup:
        out = _kinematic_dedup(out, ctx)
    return sorted(out, key=lambda f: f.permutation)


def _world_frame(f: Factorization, ctx: Context) -> Factorization:
    """Rewrite ``L (t - h1)...(t - hn)`` as ``(t - L h1 L^-1)...(t - L hn L^-1) L``.

    The conjugated factors are the joint axes at the parameter ``t = inf``;
    ``L`` becomes the constant offset of the last link.
    """
    L = f.lead.coeffs
    if np.allclose(L[1:], 0, atol=1e-15 * abs(L[0])):
        return f
    Li = _invert(L, ctx)
    factors = [DualQuaternion(dqmul(dqmul(L, h.coeffs), Li)) for h in f.factors]
    return Factorization(factors, f.permutation, DualQuaternion(), f.reparam, f.lead * f.tail)


def _same_factors(f: Factorization, g: Factorization, tol: float) -> bool:
    return all(a.allclose(b, tol * max(1.0, a.magnitude())) for a, b in zip(f.factors, g.factors))


def _kinematic_dedup(facts: list, ctx: Context) -> list:
    kept = []
    for f in facts:
        axes_f = _merged_axes(f, ctx)
        if any(_same_axes(axes_f, _merged_axes(g, ctx), ctx) for g in kept):
            continue
        kept.append(f)
    return kept


def _merged_axes(f: Factorization, ctx: Context) -> list:
    axes = []
    for a in f.axes(ctx):
        if not axes or not axes[-1].same_line(a, ctx.tol_axis):
            axes.append(a)
    return axes


def _same_axes(a: list, b: list, ctx: Context) -> bool:
    return len(a) == len(b) and all(x.same_line(y, ctx.tol_axis) for x, y in zip(a, b))


def factorize_cubic(C: MotionPoly, ctx: Optional[Context] = None, kinematic_dedup: bool = False) -> list:
    if C.degree != 3:
        raise ValueError("expected a cubic motion polynomial")
    return factorize(C, ctx, kinematic_dedup)


def mobius_reparam(C: MotionPoly, mobius: Sequence[float]) -> MotionPoly:
    """Substitute ``t -> (a t + b) / (c t + d)`` and clear denominators."""
    a, b, c, d = (float(x) for x in mobius)
    if a * d - b * c == 0:
        raise ValueError("Moebius map must be invertible")
    n = C.degree
    num = Polynomial([b, a])
    den = Polynomial([d, c])
    out = np.zeros((n + 1, 8), complex)
    for k in range(n + 1):
        w = (num**k * den ** (n - k)).coef
        out[: w.size] += np.outer(w, C.coeffs[k])
    return MotionPoly(out)


def _invertible(lead: np.ndarray, ctx: Context) -> bool:
    """Primal norm of a coefficient is not negligible against its size."""
    return abs(np.dot(lead[:4], lead[:4])) > ctx.tol_rank * np.dot(np.abs(lead), np.abs(lead))


def ensure_invertible_lead(C: MotionPoly, ctx: Optional[Context] = None, attempts: int = 5) -> tuple:
    """Reparametrize by random real Moebius maps until the leading coefficient is invertible.

    Returns ``(C', map)`` where ``map`` is ``None`` if no change was needed.
    """
    ctx = resolve(ctx)
    if _invertible(C.leading.coeffs, ctx):
        return C, None
    rng = np.random.default_rng(ctx.seed)
    for _ in range(attempts):
        m = rng.normal(size=4)
        D = mobius_reparam(C, m)
        if _invertible(D.leading.coeffs, ctx):
            return D, tuple(m)
    raise NonGeneric("no Moebius map made the leading coefficient invertible", step="mobius_reparam")
