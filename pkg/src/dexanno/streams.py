"""Parsers for keypoint streams and contact-set files."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .closure import Contact
from .errors import DexAnnoError, InputError
from .jsonio import iter_lines, parse_line
from .kinematics import CameraIntrinsics, KeypointFrame

MODES = ("pixel_depth", "camera_3d")


@dataclass
class StreamItem:
    """One frame line: either a parsed frame or the reason it was rejected."""

    lineno: int
    frame: KeypointFrame | None
    raw: dict | None
    error: str | None = None


def parse_intrinsics(obj):
    try:
        return CameraIntrinsics(float(obj["fx"]), float(obj["fy"]), float(obj["cx"]), float(obj["cy"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad intrinsics header: {exc!r}") from None


def parse_frame(obj, intrinsics=None):
    try:
        idx = int(obj["frame_index"])
        mode = obj.get("mode", "camera_3d")
        rows = np.asarray(obj["points"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad frame record: {exc!r}") from None
    if mode not in MODES:
        raise InputError(f"frame {idx}: unknown mode {mode!r}")
    if mode == "pixel_depth":
        if intrinsics is None:
            raise InputError(f"frame {idx}: pixel_depth frame but no intrinsics header")
        return KeypointFrame.from_pixels(idx, rows, intrinsics)
    return KeypointFrame(idx, rows)


def read_keypoint_stream(source):
    """Yield a StreamItem per frame line.

    A line with an ``intrinsics`` key (and no ``points``) is a header and
    applies to the pixel-depth frames after it. Malformed frame lines are
    reported through ``StreamItem.error`` rather than raised.
    """
    intrinsics = None
    for lineno, text in iter_lines(source):
        try:
            obj = parse_line(lineno, text)
        except InputError as exc:
            yield StreamItem(lineno, None, None, str(exc))
            continue
        if "intrinsics" in obj and "points" not in obj:
            intrinsics = parse_intrinsics(obj["intrinsics"])
            continue
        try:
            yield StreamItem(lineno, parse_frame(obj, intrinsics), obj)
        except DexAnnoError as exc:
            yield StreamItem(lineno, None, obj, f"line {lineno}: {exc}")


def parse_contacts(obj, default_mu=None):
    """Contact list from ``{"contacts": [{"p", "n", "mu"}]}``; normals are normalised."""
    try:
        items = obj["contacts"]
        contacts = []
        for c in items:
            mu = c.get("mu", default_mu)
            if mu is None:
                raise InputError("contact has no mu and no default friction was given")
            contacts.append(Contact.normalized(c["p"], c["n"], float(mu)))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad contact record: {exc!r}") from None
    return contacts


def read_contact_sets(source, default_mu=None):
    """Map ``grasp_id -> contacts`` for a whole contact-set file."""
    out = {}
    for lineno, text in iter_lines(source):
        obj = parse_line(lineno, text)
        if "grasp_id" not in obj:
            raise InputError(f"line {lineno}: contact set without grasp_id")
        out[obj["grasp_id"]] = parse_contacts(obj, default_mu)
    return out
