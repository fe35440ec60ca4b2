"""Human hand joint angles from 21-landmark keypoint frames.

Landmark layout follows the common 21-point hand convention: 0 is the
wrist, then four landmarks per finger from thumb to little finger, each
ordered base to tip.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateGeometry,
    DegeneratePalm,
    DegenerateProjection,
    DegenerateSegment,
    InputError,
    NonPositiveDepth,
)

EPS_NORM = 1e-12

FINGERS = ("thumb", "index", "middle", "ring", "little")
JOINTS_PER_FINGER = ("abd", "flex0", "flex1", "flex2")
HUMAN_DOF = len(FINGERS) * len(JOINTS_PER_FINGER)


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise InputError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")

    def project(self, point):
        """Camera-frame point -> (u, v, depth)."""
        x, y, z = np.asarray(point, dtype=float)
        return np.array([self.fx * x / z + self.cx, self.fy * y / z + self.cy, z])


@dataclass(frozen=True)
class HandSkeletonLayout:
    """Which landmarks feed the palm plane and each finger chain.

    ``palm_anchor`` is a pair of landmark indices whose midpoint stands in
    for the wrist as the palm center.
    """

    chains: dict = field(
        default_factory=lambda: {
            "thumb": (1, 2, 3, 4),
            "index": (5, 6, 7, 8),
            "middle": (9, 10, 11, 12),
            "ring": (13, 14, 15, 16),
            "little": (17, 18, 19, 20),
        }
    )
    palm_anchor: tuple = (0, 9)
    ring_base: int = 13
    index_base: int = 5

    def __post_init__(self):
        if tuple(self.chains) != FINGERS:
            raise InputError(f"layout must define chains for {FINGERS}")
        seen = []
        for name, chain in self.chains.items():
            if len(chain) != 4:
                raise InputError(f"{name} chain needs 4 landmarks for 1 abduction + 3 flexions")
            seen.extend(chain)
        for idx in [*seen, *self.palm_anchor, self.ring_base, self.index_base]:
            if not 0 <= idx <= 20:
                raise InputError(f"landmark index {idx} outside [0, 20]")
        if len(set(seen)) != len(seen):
            raise InputError("finger chains share landmarks")


DEFAULT_LAYOUT = HandSkeletonLayout()


@dataclass(frozen=True)
class KeypointFrame:
    frame_index: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.shape != (21, 3):
            raise InputError(f"frame {self.frame_index}: expected 21x3 points, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InputError(f"frame {self.frame_index}: non-finite keypoint coordinates")
        if int(self.frame_index) < 0:
            raise InputError(f"negative frame index {self.frame_index}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_pixels(cls, frame_index, rows, intrinsics):
        """Build a frame from (u, v, depth) rows by deprojecting each one."""
        rows = np.asarray(rows, dtype=float)
        if rows.shape != (21, 3):
            raise InputError(f"frame {frame_index}: expected 21 (u, v, depth) rows, got {rows.shape}")
        return cls(frame_index, np.array([deproject(r[:2], r[2], intrinsics) for r in rows]))


@dataclass(frozen=True)
class PalmFrame:
    normal: np.ndarray
    anchor: np.ndarray


@dataclass(frozen=True)
class HumanHandAngles:
    """20 angles, finger-major: [abd, flex0, flex1, flex2] per finger."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.shape != (HUMAN_DOF,):
            raise InputError(f"expected {HUMAN_DOF} human angles, got {v.size}")
        object.__setattr__(self, "values", v)

    def finger(self, name):
        i = FINGERS.index(name)
        return self.values[4 * i : 4 * i + 4]

    def abduction(self, name):
        return float(self.finger(name)[0])

    def flexions(self, name):
        return self.finger(name)[1:]


def deproject(pixel, depth, intrinsics):
    """Pinhole inversion of a pixel at metric depth into the camera frame."""
    if not depth > 0:
        raise NonPositiveDepth(f"depth must be positive, got {depth}")
    u, v = pixel
    k = intrinsics
    return np.array([(u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, float(depth)])


def palm_center(points, layout=DEFAULT_LAYOUT):
    a, b = layout.palm_anchor
    return 0.5 * (points[a] + points[b])


def palm_normal(frame, layout=DEFAULT_LAYOUT, anchor=None):
    """Unit normal of the plane through the palm center, ring base and index base."""
    pts = frame.points if isinstance(frame, KeypointFrame) else np.asarray(frame, dtype=float)
    if anchor is None:
        anchor = palm_center(pts, layout)
    anchor = np.asarray(anchor, dtype=float)
    n = np.cross(pts[layout.ring_base] - anchor, pts[layout.index_base] - anchor)
    norm = np.linalg.norm(n)
    if norm < EPS_NORM:
        raise DegeneratePalm(f"palm points are collinear (|n| = {norm:.3g})")
    return PalmFrame(normal=n / norm, anchor=anchor)


def _angle(a, b):
    # equals arccos of the normalised dot product; atan2 stays accurate near 0 and pi
    return float(np.arctan2(np.linalg.norm(np.cross(a, b)), np.dot(a, b)))


def flexion_angle(q_n, q_next):
    q_n = np.asarray(q_n, dtype=float)
    q_next = np.asarray(q_next, dtype=float)
    if np.linalg.norm(q_n) < EPS_NORM or np.linalg.norm(q_next) < EPS_NORM:
        raise DegenerateSegment("zero-length joint vector (coincident keypoints)")
    return _angle(q_n, q_next)


def abduction_angle(q_base, q_mcp, palm):
    """Angle between the palm-to-MCP vector and the in-plane part of the MCP vector."""
    q_base = np.asarray(q_base, dtype=float)
    q_mcp = np.asarray(q_mcp, dtype=float)
    n = palm.normal if isinstance(palm, PalmFrame) else np.asarray(palm, dtype=float)
    n = n / np.linalg.norm(n)
    if np.linalg.norm(q_base) < EPS_NORM:
        raise DegenerateSegment("zero-length palm-to-MCP vector")
    if np.linalg.norm(q_mcp) < EPS_NORM:
        raise DegenerateSegment("zero-length MCP joint vector")
    proj = q_mcp - np.dot(q_mcp, n) * n
    if np.linalg.norm(proj) < EPS_NORM:
        raise DegenerateProjection("MCP joint vector is parallel to the palm normal")
    return _angle(q_base, proj)


def extract_angles(frame, layout=DEFAULT_LAYOUT):
    """Full 20-angle human hand vector for one keypoint frame.

    Per finger, the joint vectors are palm->base, base->1, 1->2, 2->tip.
    Abduction compares palm->base with the palm-plane projection of
    base->1; the three flexions are the angles between consecutive joint
    vectors.
    """
    pts = frame.points
    center = palm_center(pts, layout)
    palm = palm_normal(pts, layout, anchor=center)
    out = np.empty(HUMAN_DOF)
    for i, name in enumerate(FINGERS):
        chain = layout.chains[name]
        q = [pts[chain[0]] - center] + [pts[chain[k + 1]] - pts[chain[k]] for k in range(3)]
        try:
            out[4 * i] = abduction_angle(q[0], q[1], palm)
        except DegenerateGeometry as exc:
            raise exc.located(name, "abd") from None
        for k in range(3):
            try:
                out[4 * i + 1 + k] = flexion_angle(q[k], q[k + 1])
            except DegenerateGeometry as exc:
                raise exc.located(name, f"flex{k}") from None
    return HumanHandAngles(out)


def angle_names():
    return [f"{f}.{j}" for f in FINGERS for j in JOINTS_PER_FINGER]
