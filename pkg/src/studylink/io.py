"""JSON pose and linkage files, CSV motion tables.

Floats are written with Python's shortest round-trip representation, so a
save/load cycle reproduces every coefficient bit for bit.  Complex arrays
with a nonzero imaginary part are stored as ``{"re": ..., "im": ...}``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .context import Context
from .dq import DualQuaternion, PlueckerLine, Pose, pose_from_rot_trans
from .errors import InputError
from .motion import Factorization, MotionPoly
from .synthesis import Joint, Linkage


class FileFormatError(InputError):
    """A pose, motion or linkage file is malformed."""


def encode_array(a) -> object:
    a = np.asarray(a)
    if np.iscomplexobj(a) and np.any(a.imag != 0):
        return {"re": a.real.tolist(), "im": a.imag.tolist()}
    return np.asarray(a.real, dtype=float).tolist()


def decode_array(obj) -> np.ndarray:
    try:
        if isinstance(obj, dict):
            return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
        return np.asarray(obj, dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"cannot read numeric array: {exc}") from exc


def encode_node(w) -> object:
    return "inf" if w is None or math.isinf(w) else float(w)


def decode_node(w) -> float:
    return math.inf if w in ("inf", "Infinity", None) else float(w)


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FileFormatError(f"cannot read {path}: {exc}") from exc


def _dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def pose_from_entry(entry: dict, ctx: Optional[Context] = None) -> Pose:
    if not isinstance(entry, dict):
        raise FileFormatError("pose entries must be objects")
    if "dq" in entry:
        dq = decode_array(entry["dq"])
        if dq.shape != (8,):
            raise FileFormatError("'dq' needs 8 numbers")
        return Pose(dq, ctx)
    if "quat" in entry:
        quat = decode_array(entry["quat"])
        trans = decode_array(entry.get("trans", [0.0, 0.0, 0.0]))
        if quat.shape != (4,) or trans.shape != (3,):
            raise FileFormatError("'quat' needs 4 and 'trans' 3 numbers")
        return pose_from_rot_trans(quat, trans)
    raise FileFormatError("pose entry needs 'dq' or 'quat'")


def load_poses(path, ctx: Optional[Context] = None) -> list:
    doc = _load_json(path)
    if not isinstance(doc, dict) or not isinstance(doc.get("poses"), list):
        raise FileFormatError("pose file needs a 'poses' list")
    return [pose_from_entry(e, ctx) for e in doc["poses"]]


def save_poses(poses, path) -> None:
    _dump_json({"poses": [{"dq": encode_array(p.dq.coeffs)} for p in poses]}, path)


def load_motion(path) -> MotionPoly:
    """Motion polynomial from ``{"coeffs": [...]}`` (lowest degree first) or a linkage file."""
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise FileFormatError("motion file must be a JSON object")
    key = "coeffs" if "coeffs" in doc else "coupler_motion"
    if key not in doc:
        raise FileFormatError("motion file needs 'coeffs'")
    c = decode_array(doc[key])
    if c.ndim != 2 or c.shape[1] != 8:
        raise FileFormatError("motion coefficients must be a list of 8-vectors")
    return MotionPoly(c)


def save_motion(C: MotionPoly, path) -> None:
    _dump_json({"coeffs": encode_array(C.coeffs)}, path)


def factorization_to_dict(f: Factorization, with_axes: bool = False) -> dict:
    out = {
        "factors": [encode_array(h.coeffs) for h in f.factors],
        "permutation": list(f.permutation),
        "lead": encode_array(f.lead.coeffs),
        "tail": encode_array(f.tail.coeffs),
    }
    if f.reparam is not None:
        out["reparam"] = [float(x) for x in f.reparam]
    if with_axes:
        out["axes"] = [{"dir": a.dir.tolist(), "mom": a.mom.tolist()} for a in f.axes()]
    return out


def factorization_from_dict(d: dict) -> Factorization:
    try:
        return Factorization(
            [DualQuaternion(decode_array(h)) for h in d["factors"]],
            tuple(d.get("permutation", ())),
            DualQuaternion(decode_array(d.get("lead", [1, 0, 0, 0, 0, 0, 0, 0]))),
            tuple(d["reparam"]) if "reparam" in d else None,
            DualQuaternion(decode_array(d.get("tail", [1, 0, 0, 0, 0, 0, 0, 0]))),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"malformed factorization: {exc}") from exc


def linkage_to_dict(linkage: Linkage, ctx: Optional[Context] = None) -> dict:
    context = {}
    if ctx is not None:
        context.update(
            tol_real=ctx.tol_real, tol_proj=ctx.tol_proj, tol_rank=ctx.tol_rank, tol_axis=ctx.tol_axis, seed=ctx.seed
        )
    for key in ("family", "params", "which_space"):
        if key in linkage.meta:
            context[key] = linkage.meta[key]
    return {
        "kind": linkage.kind,
        "joints": [{"dir": j.line.dir.tolist(), "mom": j.line.mom.tolist(), "role": j.role} for j in linkage.joints],
        "coupler_motion": encode_array(linkage.coupler_motion.coeffs),
        "pairing": [factorization_to_dict(f) for f in linkage.pairing],
        "poses": [encode_array(p.dq.coeffs) for p in linkage.poses],
        "nodes": [encode_node(w) for w in linkage.nodes],
        "context": context,
    }


def linkage_from_dict(d: dict) -> Linkage:
    try:
        joints = [
            Joint(PlueckerLine(np.asarray(j["dir"], dtype=float), np.asarray(j["mom"], dtype=float)), str(j["role"]))
            for j in d["joints"]
        ]
        pairing = tuple(factorization_from_dict(f) for f in d["pairing"])
        if len(pairing) != 2:
            raise FileFormatError("pairing needs two factorizations")
        poses = [Pose(decode_array(p)) for p in d.get("poses", [])]
        nodes = tuple(decode_node(w) for w in d.get("nodes", ["inf", 0.0, 1.0]))
        meta = {k: v for k, v in d.get("context", {}).items() if k in ("family", "params", "which_space")}
        return Linkage(
            kind=str(d["kind"]),
            joints=joints,
            coupler_motion=MotionPoly(decode_array(d["coupler_motion"])),
            pairing=pairing,
            poses=poses,
            nodes=nodes,
            meta=meta,
        )
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"malformed linkage file: {exc}") from exc


def save_linkage(linkage: Linkage, path, ctx: Optional[Context] = None) -> None:
    _dump_json(linkage_to_dict(linkage, ctx), path)


def load_linkage(path) -> Linkage:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise FileFormatError("linkage file must be a JSON object")
    return linkage_from_dict(doc)


def suffixed(path, k: int) -> Path:
    """``out.json`` -> ``out_0.json``."""
    p = Path(path)
    return p.with_name(f"{p.stem}_{k}{p.suffix}")


def write_table(table, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(table.header())
        for row in table.rows():
            w.writerow([repr(float(x)) for x in row])
