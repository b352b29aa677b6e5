"""Independent checks on synthesized linkages and sampled coupler motions."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .context import Context, resolve
from .dq import DualQuaternion, Pose, axis_of, half_turn_from_line, study_residual
from .motion import Factorization, MotionPoly, mp_eval
from .projective import proj_distance

CLOSURE_TOL = 1e-8
POSE_TOL = 1e-8
EXPECTED_DEGREES = {"Goldberg5R": (3, 2), "Bennett4R": (2, 1)}


class PoleInRange(UserWarning):
    """A joint angle turns by nearly pi between neighbouring samples."""


@dataclass
class VerificationReport:
    closure_residual: float
    pose_errors: list
    axis_distinctness: np.ndarray
    degrees: tuple
    joint_count_ok: bool = True
    passed: bool = False
    messages: list = field(default_factory=list)

    def summary(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        off = self.axis_distinctness[~np.eye(len(self.axis_distinctness), dtype=bool)]
        lines = [
            f"verification: {state}",
            f"  closure residual: {self.closure_residual:.3e}",
            "  pose errors: " + ", ".join(f"{e:.3e}" for e in self.pose_errors),
            f"  min axis separation: {off.min() if off.size else float('nan'):.3e}",
            f"  degrees (coupler, base relative): {self.degrees}",
        ]
        lines += [f"  {m}" for m in self.messages]
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "closure_residual": self.closure_residual,
            "pose_errors": list(self.pose_errors),
            "axis_distinctness": self.axis_distinctness.tolist(),
            "degrees": list(self.degrees),
            "joint_count_ok": self.joint_count_ok,
            "messages": list(self.messages),
        }


def _coeff_distance(a: MotionPoly, b: MotionPoly) -> float:
    n = max(a.coeffs.shape[0], b.coeffs.shape[0])
    x = np.zeros((n, 8), complex)
    y = np.zeros((n, 8), complex)
    x[: a.coeffs.shape[0]] = a.coeffs
    y[: b.coeffs.shape[0]] = b.coeffs
    return _flat_distance(x.ravel(), y.ravel())


def _flat_distance(x: np.ndarray, y: np.ndarray) -> float:
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0 or ny == 0:
        return 1.0
    x, y = x / nx, y / ny
    return float(min(1.0, np.linalg.norm(x - y * np.vdot(y, x))))


def check_closure(pair: Sequence[Factorization]) -> float:
    """Projective distance between the products of two factorizations (as coefficient stacks)."""
    f, g = pair
    if len(f) != len(g):
        raise ValueError("factorizations of different degree")
    return _coeff_distance(f.product(), g.product())


def visits_poses(C: MotionPoly, ws: Sequence, poses: Sequence) -> list:
    """Projective distance between ``C(w_j)`` and the ``j``-th pose."""
    if len(ws) != len(poses):
        raise ValueError("need one parameter per pose")
    out = []
    for w, p in zip(ws, poses):
        q = p.dq if isinstance(p, Pose) else DualQuaternion(p)
        out.append(proj_distance(mp_eval(C, w), q))
    return out


def _wrap(phi):
    return np.pi - np.mod(np.pi - phi, 2 * np.pi)


def factor_angle(h: DualQuaternion, t: float, ctx: Optional[Context] = None) -> float:
    """Rotation angle of ``(t - h)`` in ``(-pi, pi]``; zero at ``t = inf``."""
    line = axis_of(h, ctx)
    p = h.coeffs.real[:4]
    c = p[0]
    s = float(np.dot(p[1:], line.dir))
    if np.isinf(t):
        return 0.0
    return float(_wrap(2 * np.arctan2(-s, t - c)))


def joint_angles(f: Factorization, t: float, ctx: Optional[Context] = None, merge: bool = True) -> list:
    """Joint angles of the chain described by ``f`` at parameter ``t``.

    Consecutive factors about the same axis belong to one joint; their
    angles add up when ``merge`` is set.
    """
    ctx = resolve(ctx)
    angles = [factor_angle(h, t, ctx) for h in f.factors]
    if not merge:
        return angles
    axes = f.axes(ctx)
    out = [angles[0]]
    for k in range(1, len(angles)):
        if axes[k].same_line(axes[k - 1], ctx.tol_axis):
            out[-1] = float(_wrap(out[-1] + angles[k]))
        else:
            out.append(angles[k])
    return out


def rotation_about(h: DualQuaternion, angle: float, ctx: Optional[Context] = None) -> DualQuaternion:
    """Unit dual quaternion of the rotation by ``angle`` about the axis of ``h``."""
    H = half_turn_from_line(axis_of(h, ctx))
    return DualQuaternion.scalar(np.cos(angle / 2)) + H * float(np.sin(angle / 2))


def compose_chain(f: Factorization, t: float, ctx: Optional[Context] = None) -> DualQuaternion:
    """Pose of the chain end from the unmerged joint angles at ``t``."""
    out = f.lead
    for h, phi in zip(f.factors, joint_angles(f, t, ctx, merge=False)):
        out = out * rotation_about(h, phi, ctx)
    return out * f.tail


def _axis_distance(a, b) -> float:
    va, vb = a.as_vector(), b.as_vector()
    return float(min(np.linalg.norm(va - vb), np.linalg.norm(va + vb)))


def axis_distinctness(axes: Sequence) -> np.ndarray:
    n = len(axes)
    M = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            M[i, j] = _axis_distance(axes[i], axes[j])
    return M


def verify_linkage(linkage, poses: Optional[Sequence] = None, ws: Optional[Sequence] = None, ctx: Optional[Context] = None) -> VerificationReport:
    """Closure, pose interpolation, axis distinctness and motion degrees of a linkage."""
    ctx = resolve(ctx)
    poses = list(linkage.poses if poses is None else poses)
    ws = list(linkage.nodes if ws is None else ws)[: len(poses)]
    F, G = linkage.pairing
    closure = check_closure((F, G))
    closure = max(closure, _coeff_distance(F.product(), linkage.coupler_motion))
    errors = visits_poses(linkage.coupler_motion, ws, poses)
    dist = axis_distinctness(linkage.axes)
    off = dist[~np.eye(len(dist), dtype=bool)]
    base_rel = MotionPoly([G.lead])
    for h in G.factors[:-1]:
        base_rel = base_rel * MotionPoly.linear(h)
    degrees = (linkage.coupler_motion.degree, base_rel.degree)
    report = VerificationReport(closure, errors, dist, degrees)
    report.joint_count_ok = len(linkage.joints) == linkage.expected_joint_count()
    msgs = report.messages
    if closure > CLOSURE_TOL:
        msgs.append(f"closure residual {closure:.3e} exceeds {CLOSURE_TOL:.0e}")
    if any(e > POSE_TOL for e in errors):
        msgs.append("coupler motion misses a pose")
    if not report.joint_count_ok:
        msgs.append("joint count does not match the linkage kind")
    if off.size and off.min() <= ctx.tol_axis:
        msgs.append("two joint axes coincide")
    expected = EXPECTED_DEGREES.get(linkage.kind)
    if expected is not None and degrees != expected:
        msgs.append(f"motion degrees {degrees} differ from {expected}")
    report.passed = not msgs
    return report


@dataclass
class MotionTable:
    t: np.ndarray
    poses: np.ndarray
    angles: np.ndarray
    pole_rows: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.t)

    def header(self) -> list:
        return ["t"] + [f"dq{k}" for k in range(8)] + [f"theta{k + 1}" for k in range(self.angles.shape[1])]

    def rows(self):
        for k in range(len(self.t)):
            yield [self.t[k], *self.poses[k], *self.angles[k]]


def linkage_angles(linkage, t: float, ctx: Optional[Context] = None) -> list:
    """Angles of all joints, in the order of ``linkage.joints``."""
    F, G = linkage.pairing
    return joint_angles(F, t, ctx) + joint_angles(G, t, ctx)[::-1]


def sample_motion(linkage, n: int, t_range: Sequence[float], ctx: Optional[Context] = None) -> MotionTable:
    """Sample the coupler pose and all joint angles at ``n`` equally spaced real ``t``."""
    ctx = resolve(ctx)
    if n < 2:
        raise ValueError("need at least two samples")
    t0, t1 = (float(x) for x in t_range)
    ts = np.linspace(t0, t1, n)
    poses = np.zeros((n, 8))
    angles = []
    for k, t in enumerate(ts):
        q = mp_eval(linkage.coupler_motion, t).coeffs.real
        q = q / np.linalg.norm(q[:4])
        poses[k] = q
        angles.append(linkage_angles(linkage, t, ctx))
        res = abs(study_residual(DualQuaternion(q)).p)
        if res > 1e2 * ctx.tol_real:
            warnings.warn(f"sample at t={t:g} leaves the Study quadric ({res:.2e})", RuntimeWarning, stacklevel=2)
    angles = np.unwrap(np.array(angles), axis=0)
    poles = []
    if n > 2:
        jumps = np.abs(np.diff(angles, axis=0))
        poles = sorted(set(int(k) + 1 for k in np.nonzero(np.max(jumps, axis=1) > np.pi / 2)[0]))
    if poles:
        warnings.warn(f"fast joint rotation near a pole at rows {poles}", PoleInRange, stacklevel=2)
    return MotionTable(ts, poses, angles, poles)
