"""Builders for the shipped test data; run as a script to regenerate tests/data."""

from pathlib import Path

import numpy as np

from studylink import (
    EPS,
    I,
    J,
    K,
    ONE,
    MotionPoly,
    PlueckerLine,
    Pose,
    dyad_constraint,
    half_turn_from_line,
    pose_from_rot_trans,
)
from studylink.projective import Subspace, find_null_quadrilateral

DATA = Path(__file__).parent / "data"

DYAD_AXES = (I, K + EPS * I)
DYAD_PARAMS = ((1.0, 1.0), (2.0, -1.0))


def base_pose() -> Pose:
    return pose_from_rot_trans([1.0, 0.2, -0.3, 0.1], [0.5, -1.0, 2.0])


def dyad_poses() -> list:
    """Three poses reached by the dyad with axes i and k + e i, seen from ``base_pose``."""
    g = base_pose()
    h1, h2 = DYAD_AXES
    return [g] + [g * Pose(dyad_constraint(h1, h2, a, b)) for a, b in DYAD_PARAMS]


def dyad_pose_doc() -> dict:
    p0, p1, p2 = dyad_poses()
    r = p1.dq.coeffs.real[:4]
    return {
        "poses": [
            {"dq": p0.dq.coeffs.real.tolist()},
            {"quat": r.tolist(), "trans": p1.translation().tolist()},
            {"dq": p2.dq.coeffs.real.tolist()},
        ]
    }


def generic_cubic() -> MotionPoly:
    L = MotionPoly.linear
    return L(1 + I) * L(2 + K + EPS * I) * L(J + EPS * K)


def generic_cubic_doc() -> dict:
    return {"coeffs": generic_cubic().coeffs.real.tolist()}


def random_line(rng) -> PlueckerLine:
    return PlueckerLine.through(rng.normal(size=3), rng.normal(size=3))


def random_pose(rng) -> Pose:
    return pose_from_rot_trans(rng.normal(size=4), rng.normal(size=3))


def random_dyad(rng) -> tuple:
    """Half-turns of two random (generically skew) axes."""
    return half_turn_from_line(random_line(rng)), half_turn_from_line(random_line(rng))


def random_dyad_poses(rng) -> tuple:
    """``(h1, h2, q1, q2)``: a random dyad and two of its poses (the identity is the third)."""
    h1, h2 = random_dyad(rng)
    t = rng.normal(size=4) * 1.5
    return h1, h2, Pose(dyad_constraint(h1, h2, t[0], t[1])), Pose(dyad_constraint(h1, h2, t[2], t[3]))


def random_cubic(rng) -> tuple:
    """Generic cubic built from three random rotations; returns ``(C, factors)``."""
    hs = []
    for _ in range(3):
        h = half_turn_from_line(random_line(rng))
        hs.append(float(rng.normal()) + float(np.exp(rng.normal() * 0.5)) * h)
    C = MotionPoly.linear(hs[0]) * MotionPoly.linear(hs[1]) * MotionPoly.linear(hs[2])
    return C, hs


def random_2r_space(rng) -> Subspace:
    h1, h2 = random_dyad(rng)
    return Subspace([ONE, h1, h2, h1 * h2])


def _line_meets_plane(a, b, plane) -> np.ndarray:
    """Point of the line ``a v b`` on the plane spanned by the rows of ``plane`` (all inside one 3-space)."""
    A = np.column_stack([a, b, -np.asarray(plane).T])
    null = np.linalg.svd(A)[2][-1].conj()
    return null[0] * a + null[1] * b


def random_lemma4_config(rng) -> tuple:
    """``(E, f_points, centres, x)`` with coplanar centres: a random quadrilateral in a
    random 3-space, the points where its sides meet a random plane of that space,
    and a random point of ``u1' v E``."""
    cplx = lambda *shape: rng.normal(size=shape) + 1j * rng.normal(size=shape)
    E = Subspace(cplx(4, 8))
    F = cplx(4, 8)
    lifted = F + cplx(4, 4) @ E.basis
    plane = cplx(3, 4) @ lifted
    centres = [_line_meets_plane(lifted[k], lifted[(k + 1) % 4], plane) for k in range(4)]
    x = F[0] * cplx(1)[0] + cplx(4) @ E.basis
    return E, list(F), centres, x


def random_lemma5_config(rng) -> tuple:
    """``(quad, primal, side_points)`` from the null quadrilateral of a random 2R space."""
    P = random_2r_space(rng)
    quad = find_null_quadrilateral(P)
    verts = quad.vertices()
    primal = [np.concatenate([v[:4], np.zeros(4)]) for v in verts]
    plane = (rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))) @ P.basis
    G = np.vstack(verts)
    coords = [np.linalg.lstsq(G.T, row, rcond=None)[0] @ G for row in plane]
    sides = [_line_meets_plane(verts[k], verts[(k + 1) % 4], coords) for k in range(4)]
    return quad, primal, sides


def degenerate_params(poses, which_space: int = 0) -> list:
    """Second-family params that put the quadratic joint factor on its Moebius interpolant."""
    from studylink.context import Context
    from studylink.synthesis import PARAM_NODES, _mobius_through, normalize_poses, ruled_chart, two_r_spaces

    normed = normalize_poses(*poses)
    P = two_r_spaces(normed[1], normed[2])[which_space]
    chart = ruled_chart(P)
    mob = _mobius_through([chart.split(p.dq)[0] for p in normed], Context())
    vals = []
    for w in PARAM_NODES:
        v = mob[0] + w * mob[1]
        vals.append(float((-v[0] / v[1]).real))
    return vals


if __name__ == "__main__":
    import json

    DATA.mkdir(exist_ok=True)
    for name, doc in (("dyad_poses.json", dyad_pose_doc()), ("generic_cubic.json", generic_cubic_doc())):
        with open(DATA / name, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
