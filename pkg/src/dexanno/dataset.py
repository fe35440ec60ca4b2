"""Grasp records, the annotation pipeline, dataset splitting and evaluation."""

from __future__ import annotations

import hashlib
import logging
import math
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.spatial.transform import Rotation

from .actuation import joints_to_actuators
from .closure import DEFAULT_EDGES, DEFAULT_TOL, contacts_closure
from .errors import (
    DexAnnoError,
    DimensionMismatch,
    EmptyManifest,
    InputError,
    ProfileMismatch,
    SmallCategoryWarning,
)
from .jsonio import iter_lines, parse_line
from .kinematics import DEFAULT_LAYOUT, extract_angles, palm_center, palm_normal
from .retarget import apply_mapping

log = logging.getLogger(__name__)

QUAT_RENORM_TOL = 1e-6
QUAT_REJECT_TOL = 1e-2
DEFAULT_RATIO = "8.5:1.5"

# categories used for held-out evaluation
EVAL_CATEGORIES = ("bottle", "drill", "spraybottle", "flashlight", "mug")


@dataclass
class GraspRecord:
    object_id: str
    category: str
    hand_id: str
    R: np.ndarray  # unit quaternion, scalar first
    T: np.ndarray
    Q: np.ndarray
    closure: dict | None = None  # {"closed", "margin"}; None = unvalidated
    source_frame: int = 0
    U: np.ndarray | None = None
    flags: list = field(default_factory=list)

    def __post_init__(self):
        self.R = np.asarray(self.R, dtype=float).reshape(4)
        self.T = np.asarray(self.T, dtype=float).reshape(3)
        self.Q = np.asarray(self.Q, dtype=float).reshape(-1)
        if self.U is not None:
            self.U = np.asarray(self.U, dtype=float).reshape(-1)
        dev = abs(np.linalg.norm(self.R) - 1.0)
        if dev > QUAT_REJECT_TOL:
            raise InputError(f"{self.object_id}: quaternion norm off by {dev:.3g}")
        if dev > QUAT_RENORM_TOL:
            self.R = self.R / np.linalg.norm(self.R)
            if "quaternion_renormalized" not in self.flags:
                self.flags.append("quaternion_renormalized")

    @property
    def validated(self):
        return self.closure is not None and self.closure.get("closed") is not None

    def to_json(self):
        closure = self.closure if self.closure is not None else {"closed": None, "margin": None}
        doc = {
            "object_id": self.object_id,
            "category": self.category,
            "hand_id": self.hand_id,
            "R": self.R.tolist(),
            "T": self.T.tolist(),
            "Q": self.Q.tolist(),
            "closure": {"closed": closure.get("closed"), "margin": closure.get("margin")},
            "source_frame": int(self.source_frame),
        }
        if self.U is not None:
            doc["U"] = self.U.tolist()
        if self.flags:
            doc["flags"] = list(self.flags)
        return doc

    @classmethod
    def from_json(cls, doc):
        try:
            closure = doc.get("closure")
            if closure is not None and closure.get("closed") is None:
                closure = None
            return cls(
                object_id=str(doc["object_id"]),
                category=str(doc["category"]),
                hand_id=str(doc["hand_id"]),
                R=doc["R"],
                T=doc["T"],
                Q=doc["Q"],
                closure=None if closure is None else {"closed": bool(closure["closed"]), "margin": closure.get("margin")},
                source_frame=int(doc.get("source_frame", 0)),
                U=doc.get("U"),
                flags=list(doc.get("flags", [])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad grasp record: {exc!r}") from None


@dataclass
class DatasetManifest:
    categories: list
    objects: list  # (object_id, category)
    ratio: str = DEFAULT_RATIO

    def __post_init__(self):
        cats = set(self.categories)
        seen = set()
        for oid, cat in self.objects:
            if cat not in cats:
                raise InputError(f"object {oid} has undeclared category {cat!r}")
            if oid in seen:
                raise InputError(f"duplicate object id {oid!r}")
            seen.add(oid)
        parse_ratio(self.ratio)

    @property
    def counts(self):
        c = Counter(cat for _, cat in self.objects)
        return {cat: c.get(cat, 0) for cat in self.categories}

    def category_of(self, object_id):
        return dict(self.objects).get(object_id)

    @classmethod
    def from_json(cls, doc):
        try:
            objects = [(str(o["object_id"]), str(o["category"])) for o in doc.get("objects", [])]
            return cls(list(doc["categories"]), objects, str(doc.get("split", DEFAULT_RATIO)))
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad manifest: {exc!r}") from None

    def to_json(self):
        return {
            "categories": list(self.categories),
            "objects": [{"object_id": o, "category": c} for o, c in self.objects],
            "split": self.ratio,
        }


def parse_ratio(text):
    """``"8.5:1.5"`` -> test fraction as an exact Fraction (here 3/20)."""
    try:
        a, b = (Fraction(p.strip()) for p in str(text).split(":"))
    except ValueError:
        raise InputError(f"split ratio must look like 'train:test', got {text!r}") from None
    if a < 0 or b < 0 or a + b == 0:
        raise InputError(f"split ratio parts must be non-negative with positive sum, got {text!r}")
    return b / (a + b)


# ---------------------------------------------------------------- pipeline


def hand_pose(points, layout=DEFAULT_LAYOUT):
    """Hand frame in the camera frame from the keypoints.

    Origin at the palm center, z along the palm normal, x toward the
    middle-finger base within the palm plane. Returns (quaternion wxyz, T).
    """
    center = palm_center(points, layout)
    z = palm_normal(points, layout, anchor=center).normal
    x = points[layout.chains["middle"][0]] - center
    x = x - (x @ z) * z
    nx = np.linalg.norm(x)
    if nx < 1e-12:
        raise InputError("cannot orient hand frame: middle base lies on the palm normal")
    x /= nx
    Rm = np.column_stack([x, np.cross(z, x), z])
    return matrix_to_quat(Rm), center


def matrix_to_quat(Rm):
    x, y, z, w = Rotation.from_matrix(Rm).as_quat()
    q = np.array([w, x, y, z])
    return -q if q[0] < 0 else q


def quat_to_matrix(q):
    w, x, y, z = q
    return Rotation.from_quat([x, y, z, w]).as_matrix()


@dataclass
class AnnotateResult:
    records: list
    skipped: list  # (line/frame, reason)
    n_input: int


def annotate_frame(frame, profile, object_id, category, contacts=None, object_pose=None,
                   edges=DEFAULT_EDGES, tol=DEFAULT_TOL, layout=DEFAULT_LAYOUT):
    """Run one keypoint frame through angles -> mapping -> actuation -> closure."""
    human = extract_angles(frame, layout)
    robot = apply_mapping(human, profile.mapping, profile.lower, profile.upper)
    cmd = joints_to_actuators(robot.values, profile.coupling)
    q, t = hand_pose(frame.points, layout)
    if object_pose is not None:
        Ro = quat_to_matrix(_unit_quat(object_pose["R"]))
        To = np.asarray(object_pose["T"], dtype=float)
        q = matrix_to_quat(Ro.T @ quat_to_matrix(q))
        t = Ro.T @ (t - To)
    flags = []
    if robot.any_saturated:
        flags.append("joint_saturated")
    if not cmd.consistent:
        flags.append("coupling_gap")
    if cmd.saturated.any():
        flags.append("actuator_saturated")
    closure = None
    if contacts is not None:
        closure = contacts_closure(contacts, edges, tol).summary()
        closure = {"closed": closure["closed"], "margin": closure["margin"]}
    return GraspRecord(object_id, category, profile.hand_id, q, t, robot.values, closure,
                       frame.frame_index, cmd.u, flags)


def _unit_quat(q):
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q)


def annotate_items(items, profile, object_id, category, contact_sets=None, edges=DEFAULT_EDGES,
                   tol=DEFAULT_TOL, map_fn=map):
    """Annotate parsed stream items, keeping input order.

    ``contact_sets`` maps frame index -> contacts. ``map_fn`` lets callers
    swap in an ordered parallel map.
    """
    items = list(items)
    jobs = [
        (it, profile, object_id, category, None if contact_sets is None else contact_sets.get(_frame_key(it)),
         edges, tol)
        for it in items
    ]
    records, skipped = [], []
    for it, (rec, reason) in zip(items, map_fn(_annotate_job, jobs)):
        if rec is None:
            log.warning("skipping line %s: %s", it.lineno, reason)
            skipped.append((it.lineno, reason))
        else:
            records.append(rec)
    return AnnotateResult(records, skipped, len(items))


def _frame_key(item):
    return None if item.frame is None else item.frame.frame_index


def _annotate_job(job):
    item, profile, object_id, category, contacts, edges, tol = job
    if item.frame is None:
        return None, item.error
    try:
        pose = item.raw.get("object_pose") if item.raw else None
        return annotate_frame(item.frame, profile, object_id, category, contacts, pose, edges, tol), None
    except DexAnnoError as exc:
        return None, f"frame {item.frame.frame_index}: {exc}"


def annotate_stream(source, profile, object_id, category, contact_sets=None, **kw):
    from .streams import read_keypoint_stream

    return annotate_items(read_keypoint_stream(source), profile, object_id, category, contact_sets, **kw)


# ---------------------------------------------------------------- split


def _split_key(seed, object_id):
    return hashlib.sha256(f"{seed}:{object_id}".encode()).hexdigest()


def split_dataset(manifest, seed=0, ratio=None):
    """Per-category split by object id; ``floor(n * test_fraction)`` go to test.

    Order within a category is the SHA-256 of ``"<seed>:<object_id>"``, so
    the split is reproducible without being stored.
    """
    if not manifest.objects:
        raise EmptyManifest("manifest lists no objects")
    frac = parse_ratio(ratio or manifest.ratio)
    by_cat = defaultdict(list)
    for oid, cat in manifest.objects:
        by_cat[cat].append(oid)
    train, test = [], []
    for cat in manifest.categories:
        ids = sorted(by_cat.get(cat, []), key=lambda o: _split_key(seed, o))
        if not ids:
            continue
        n_test = math.floor(len(ids) * frac)
        if n_test == 0 and frac > 0:
            warnings.warn(f"category {cat!r} has {len(ids)} object(s): no test objects", SmallCategoryWarning,
                          stacklevel=2)
        test.extend(ids[:n_test])
        train.extend(ids[n_test:])
    order = {oid: k for k, (oid, _) in enumerate(manifest.objects)}
    return sorted(train, key=order.get), sorted(test, key=order.get)


# ---------------------------------------------------------------- evaluation


@dataclass(frozen=True)
class GraspEvalReport:
    rotation: float
    translation: float
    joints: float
    weights: tuple
    aggregate: float
    keypoints: float | None = None

    def to_json(self):
        doc = {
            "rotation": self.rotation,
            "translation": self.translation,
            "joints": self.joints,
            "aggregate": self.aggregate,
        }
        if self.keypoints is not None:
            doc["keypoints"] = self.keypoints
        return doc


def keypoint_l1(pred, truth):
    """Summed absolute coordinate error over all keypoints."""
    p = np.asarray(pred, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.shape != t.shape:
        raise DimensionMismatch(f"keypoint shapes differ: {p.shape} vs {t.shape}")
    return float(np.sum(np.abs(p - t)))


def grasp_l1_error(pred, truth, weights=(1.0, 1.0, 1.0), pred_keypoints=None, truth_keypoints=None):
    """Weighted L1 distance on rotation, translation and joints.

    Rotation compares quaternion components after flipping ``pred`` into
    the same hemisphere as ``truth``.
    """
    if pred.hand_id != truth.hand_id or pred.Q.shape != truth.Q.shape:
        raise ProfileMismatch(
            f"cannot compare {pred.hand_id} ({pred.Q.size} joints) with {truth.hand_id} ({truth.Q.size} joints)"
        )
    l1, l2, l3 = (float(w) for w in weights)
    qp = pred.R if pred.R @ truth.R >= 0 else -pred.R
    r = float(np.sum(np.abs(qp - truth.R)))
    t = float(np.sum(np.abs(pred.T - truth.T)))
    j = float(np.sum(np.abs(pred.Q - truth.Q)))
    kp = None
    if pred_keypoints is not None and truth_keypoints is not None:
        kp = keypoint_l1(pred_keypoints, truth_keypoints)
    return GraspEvalReport(r, t, j, (l1, l2, l3), l1 * r + l2 * t + l3 * j, kp)


def evaluate_pairs(pred_docs, truth_docs, weights=(1.0, 1.0, 1.0)):
    """Reports for line-aligned prediction/truth record documents.

    A ``keypoints`` field present on both sides adds the keypoint term.
    """
    if len(pred_docs) != len(truth_docs):
        raise DimensionMismatch(f"{len(pred_docs)} predictions vs {len(truth_docs)} ground-truth records")
    reports = []
    for p, t in zip(pred_docs, truth_docs):
        reports.append(
            grasp_l1_error(GraspRecord.from_json(p), GraspRecord.from_json(t), weights,
                           p.get("keypoints"), t.get("keypoints"))
        )
    return reports


def summarize_reports(reports):
    n = len(reports)
    if n == 0:
        return {"count": 0, "rotation": 0.0, "translation": 0.0, "joints": 0.0, "aggregate": 0.0}
    out = {"count": n}
    for key in ("rotation", "translation", "joints", "aggregate"):
        out[key] = float(np.mean([getattr(r, key) for r in reports]))
    kps = [r.keypoints for r in reports if r.keypoints is not None]
    if kps:
        out["keypoints"] = float(np.mean(kps))
    return out


# ---------------------------------------------------------------- stats


def dataset_stats(source, manifest=None):
    """Counts over a record file (path, file object or iterable of lines).

    Malformed lines are counted, not raised.
    """
    per_cat = Counter()
    per_obj = Counter()
    per_hand = Counter()
    obj_cat = {}
    validated = closed = total = malformed = 0
    for lineno, text in iter_lines(source):
        try:
            rec = GraspRecord.from_json(parse_line(lineno, text))
        except InputError:
            malformed += 1
            continue
        total += 1
        per_cat[rec.category] += 1
        per_obj[rec.object_id] += 1
        obj_cat.setdefault(rec.object_id, rec.category)
        per_hand[rec.hand_id] += 1
        if rec.validated:
            validated += 1
            closed += bool(rec.closure["closed"])
    cats = list(manifest.categories) if manifest else sorted(per_cat)
    obj_counts = manifest.counts if manifest else {}
    categories = {}
    for cat in cats:
        categories[cat] = {
            "objects": obj_counts.get(cat, 0),
            "objects_with_grasps": sum(1 for c in obj_cat.values() if c == cat),
            "grasps": per_cat.get(cat, 0),
        }
    return {
        "total": total,
        "malformed": malformed,
        "objects": len(per_obj),
        "validated": validated,
        "closed": closed,
        "pass_rate": closed / validated if validated else 0.0,
        "per_category": categories,
        "per_object": dict(sorted(per_obj.items())),
        "per_hand": dict(sorted(per_hand.items())),
    }
