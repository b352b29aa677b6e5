"""Command line entry point.

Exit codes: 0 success, 2 bad input, 3 numerical failure, 4 structural
failure, 5 verification failed.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import io
from .context import Context
from .errors import InputError, NoDegenerateFactorization, NumericalFailure, StructuralError, StudyLinkError
from .motion import factorize
from .synthesis import FAMILIES, bennett_from_poses, normalize_poses, synthesize_5r, two_r_spaces
from .verify import sample_motion, verify_linkage

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_STRUCTURAL, EXIT_VERIFY = 0, 2, 3, 4, 5


def _context(args) -> Context:
    return Context.from_env().with_overrides(
        tol_real=args.tol_real,
        tol_proj=args.tol_proj,
        tol_rank=args.tol_rank,
        tol_axis=args.tol_axis,
        seed=args.seed,
    )


def _three_poses(path, ctx) -> list:
    poses = io.load_poses(path, ctx)
    if len(poses) < 3:
        raise InputError(f"{path}: need at least three poses, found {len(poses)}")
    return poses


def _fmt_line(line) -> str:
    d = ", ".join(f"{x:.6f}" for x in line.dir)
    m = ", ".join(f"{x:.6f}" for x in line.mom)
    return f"dir ({d})  mom ({m})"


def cmd_bennett(args, ctx) -> int:
    poses = _three_poses(args.poses, ctx)[:3]
    _, q1, q2 = normalize_poses(*poses)
    g = poses[0]
    for k, space in enumerate(two_r_spaces(q1, q2, ctx)):
        print(f"2R space {k}:")
        for name, axis in zip(("base", "moving"), space.axes):
            print(f"  {name:6s} {_fmt_line(axis.transformed(g))}")
    linkage = bennett_from_poses(*poses, ctx=ctx)
    report = verify_linkage(linkage, ctx=ctx)
    io.save_linkage(linkage, args.out, ctx)
    print(f"Bennett linkage with {len(linkage.joints)} axes written to {args.out}")
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_synth5r(args, ctx) -> int:
    poses = _three_poses(args.poses, ctx)
    extra = poses[3:] if args.check_extra else []
    linkages = synthesize_5r(
        *poses[:3],
        family=args.family,
        params=args.params,
        which_space=args.which_space,
        extra_poses=extra,
        ctx=ctx,
    )
    passed = 0
    for k, linkage in enumerate(linkages):
        path = io.suffixed(args.out, k)
        io.save_linkage(linkage, path, ctx)
        report = verify_linkage(linkage, ctx=ctx)
        passed += report.passed
        print(f"linkage {k} -> {path}: {'PASS' if report.passed else 'FAIL'}")
    print(f"{len(linkages)} linkage(s) synthesized, {passed} passed verification")
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_factor(args, ctx) -> int:
    C = io.load_motion(args.motion)
    facts = factorize(C, ctx)
    doc = {
        "degree": C.degree,
        "factorizations": [io.factorization_to_dict(f, with_axes=True) for f in facts],
    }
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    print(f"{len(facts)} factorization(s) written to {args.out}")
    return EXIT_OK


def cmd_verify(args, ctx) -> int:
    linkage = io.load_linkage(args.linkage)
    poses = None
    if args.poses:
        poses = io.load_poses(args.poses, ctx)[: len(linkage.nodes)]
    report = verify_linkage(linkage, poses=poses, ctx=ctx)
    print(report.summary())
    doc = json.dumps(report.to_dict(), indent=1)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(doc + "\n")
    else:
        print(doc)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_sample(args, ctx) -> int:
    if args.n < 2:
        raise InputError("need at least two samples")
    linkage = io.load_linkage(args.linkage)
    table = sample_motion(linkage, args.n, (args.t_min, args.t_max), ctx)
    io.write_table(table, args.out)
    print(f"{len(table)} rows written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-real", type=float, help="realness threshold (env STUDYLINK_TOL_REAL)")
    common.add_argument("--tol-proj", type=float, help="projective equality threshold (env STUDYLINK_TOL_PROJ)")
    common.add_argument("--tol-rank", type=float, help="relative rank threshold (env STUDYLINK_TOL_RANK)")
    common.add_argument("--tol-axis", type=float, help="axis identity threshold (env STUDYLINK_TOL_AXIS)")
    common.add_argument("--seed", type=int, help="seed for randomized reparameterization (env STUDYLINK_SEED)")

    parser = argparse.ArgumentParser(prog="studylink", description="2R dyad, Bennett and 5R linkage synthesis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bennett", parents=[common], help="Bennett linkage through three poses")
    p.add_argument("poses")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_bennett)

    p = sub.add_parser("synth5r", parents=[common], help="Goldberg 5R linkages through three poses")
    p.add_argument("poses")
    p.add_argument("--family", choices=FAMILIES, default="second")
    p.add_argument("--params", type=float, nargs=2, default=[0.0, 0.0], metavar=("A", "B"))
    p.add_argument("--which-space", type=int, choices=(0, 1), default=0)
    p.add_argument("--check-extra", action="store_true", help="reject poses beyond the third that miss the 2R space")
    p.add_argument("-o", "--out", required=True, help="output stem; files get suffixes _0, _1")
    p.set_defaults(func=cmd_synth5r)

    p = sub.add_parser("factor", parents=[common], help="factorize a motion polynomial")
    p.add_argument("motion")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("verify", parents=[common], help="verify a linkage file")
    p.add_argument("linkage")
    p.add_argument("--poses")
    p.add_argument("--json", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", parents=[common], help="sample the coupler motion to CSV")
    p.add_argument("linkage")
    p.add_argument("-n", type=int, default=100)
    p.add_argument("--t-min", type=float, default=-10.0)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        ctx = _context(args)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args, ctx)
    except NoDegenerateFactorization as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalFailure, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except StructuralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL
    except StudyLinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
