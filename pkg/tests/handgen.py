"""Analytic synthetic hands: keypoints from chosen flexions and splays."""

import numpy as np

BASES = np.array(
    [
        [0.035, 0.030, 0.0],  # thumb
        [0.030, 0.090, 0.0],  # index
        [0.000, 0.095, 0.0],  # middle
        [-0.025, 0.090, 0.0],  # ring
        [-0.045, 0.080, 0.0],  # little
    ]
)
SEGMENTS = np.array([0.040, 0.025, 0.020])


def rotate(v, axis, angle):
    """Rodrigues rotation of v about unit axis."""
    axis = axis / np.linalg.norm(axis)
    return v * np.cos(angle) + np.cross(axis, v) * np.sin(angle) + axis * (axis @ v) * (1 - np.cos(angle))


def make_hand(flex=None, splay=None, seg=SEGMENTS):
    """21 keypoints for a hand lying in the z=0 plane, fingers curling toward -z.

    ``flex`` is (5, 3): the angle each segment turns relative to the
    previous one (the first relative to the palm-to-base direction).
    ``splay`` turns each finger's first segment within the palm plane.
    """
    flex = np.zeros((5, 3)) if flex is None else np.asarray(flex, dtype=float)
    splay = np.zeros(5) if splay is None else np.asarray(splay, dtype=float)
    pts = np.zeros((21, 3))
    pts[0] = [0.0, 0.0, 0.0]
    center = 0.5 * (pts[0] + BASES[2])
    z = np.array([0.0, 0.0, 1.0])
    for i in range(5):
        base = BASES[i]
        u = (base - center) / np.linalg.norm(base - center)
        d0 = rotate(u, z, splay[i])
        lateral = np.cross(d0, z)
        idx = 1 + 4 * i
        pts[idx] = base
        p = base.copy()
        for k in range(3):
            d = rotate(d0, lateral, float(np.sum(flex[i, : k + 1])))
            p = p + seg[k] * d
            pts[idx + 1 + k] = p
    return pts


def random_hand(rng):
    flex = rng.uniform(0.05, 1.2, size=(5, 3))
    splay = rng.uniform(-0.3, 0.3, size=5)
    seg = SEGMENTS * rng.uniform(0.8, 1.2, size=3)
    return make_hand(flex, splay, seg)


def stream_lines(n_frames, rng, intrinsics=None, bad_every=0):
    """Keypoint stream lines for ``n_frames`` random hands.

    With ``intrinsics`` the frames are written as pixel + depth rows after
    a header line. ``bad_every`` > 0 makes every such frame degenerate.
    """
    import json

    lines = []
    if intrinsics is not None:
        lines.append(json.dumps({"intrinsics": intrinsics}))
    for k in range(n_frames):
        pts = random_hand(rng) + np.array([0.0, 0.0, 0.6])
        if bad_every and k % bad_every == bad_every - 1:
            pts[7] = pts[6]
        if intrinsics is None:
            lines.append(json.dumps({"frame_index": k, "mode": "camera_3d", "points": pts.tolist()}))
        else:
            fx, fy, cx, cy = (intrinsics[c] for c in ("fx", "fy", "cx", "cy"))
            rows = [[fx * x / z + cx, fy * y / z + cy, z] for x, y, z in pts]
            lines.append(json.dumps({"frame_index": k, "mode": "pixel_depth", "points": rows}))
    return lines
