"""Linear human-to-robot joint mapping, per-finger calibration and error metric."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InputError, RankDeficient
from .kinematics import FINGERS, HUMAN_DOF, HumanHandAngles

HUMAN_FINGER_DOF = 4

# Index-finger block fitted on the InspireHand: rows are the two robot
# joints, columns the three human flexions (MCP, PIP, DIP).
INSPIRE_INDEX_BLOCK = np.array(
    [
        [0.3530, 0.4310, 0.2827],
        [0.2584, 0.4130, -0.0018],
    ]
)


@dataclass(frozen=True)
class MappingMatrix:
    """Block-diagonal map from the 20 human angles to ``d_RH`` robot angles.

    ``blocks`` maps finger name -> (robot joints of that finger) x 4 array
    acting on that finger's [abd, flex0, flex1, flex2] human angles. Fingers
    are laid out in robot order given by ``fingers``.
    """

    fingers: tuple
    blocks: dict
    bias: np.ndarray = field(default=None)

    def __post_init__(self):
        blocks = {}
        for name in self.fingers:
            if name not in FINGERS:
                raise InputError(f"unknown finger {name!r}")
            b = np.atleast_2d(np.asarray(self.blocks[name], dtype=float))
            if b.shape[1] != HUMAN_FINGER_DOF:
                raise DimensionMismatch(f"{name} block must have {HUMAN_FINGER_DOF} columns, got {b.shape[1]}")
            if not np.all(np.isfinite(b)):
                raise InputError(f"{name} block has non-finite entries")
            blocks[name] = b
        object.__setattr__(self, "fingers", tuple(self.fingers))
        object.__setattr__(self, "blocks", blocks)
        d = sum(b.shape[0] for b in blocks.values())
        bias = np.zeros(d) if self.bias is None else np.asarray(self.bias, dtype=float).reshape(-1)
        if bias.shape != (d,):
            raise DimensionMismatch(f"bias has length {bias.size}, expected {d}")
        object.__setattr__(self, "bias", bias)
        object.__setattr__(self, "_matrix", self._assemble())

    def _assemble(self):
        W = np.zeros((self.robot_dof, HUMAN_DOF))
        r = 0
        for name in self.fingers:
            b = self.blocks[name]
            c = 4 * FINGERS.index(name)
            W[r : r + b.shape[0], c : c + HUMAN_FINGER_DOF] = b
            r += b.shape[0]
        return W

    @property
    def matrix(self):
        return self._matrix

    @property
    def robot_dof(self):
        return sum(b.shape[0] for b in self.blocks.values())

    def finger_slice(self, name):
        start = 0
        for f in self.fingers:
            n = self.blocks[f].shape[0]
            if f == name:
                return slice(start, start + n)
            start += n
        raise KeyError(name)

    @classmethod
    def identity(cls, scale=1.0):
        """Equal-DoF diagonal map (one robot joint per human joint)."""
        s = np.broadcast_to(np.asarray(scale, dtype=float), (HUMAN_DOF,))
        blocks = {f: np.diag(s[4 * i : 4 * i + 4]) for i, f in enumerate(FINGERS)}
        return cls(FINGERS, blocks)

    def with_block(self, name, block):
        block = np.atleast_2d(np.asarray(block, dtype=float))
        same_rows = block.shape[0] == self.blocks[name].shape[0]
        return MappingMatrix(self.fingers, {**self.blocks, name: block}, self.bias if same_rows else None)


@dataclass(frozen=True)
class RobotHandAngles:
    values: np.ndarray
    raw: np.ndarray
    saturated: np.ndarray

    @property
    def any_saturated(self):
        return bool(self.saturated.any())


def apply_mapping(human, w, lower=None, upper=None):
    """Robot angles ``W @ human + bias``, clamped to optional joint limits.

    ``raw`` keeps the unclamped result; ``saturated`` flags clamped joints.
    """
    theta = human.values if isinstance(human, HumanHandAngles) else np.asarray(human, dtype=float)
    if theta.shape != (HUMAN_DOF,):
        raise DimensionMismatch(f"expected {HUMAN_DOF} human angles, got shape {theta.shape}")
    raw = w.matrix @ theta + w.bias
    out = raw
    sat = np.zeros(raw.shape, dtype=bool)
    if lower is not None or upper is not None:
        lo = -np.inf if lower is None else np.asarray(lower, dtype=float)
        hi = np.inf if upper is None else np.asarray(upper, dtype=float)
        out = np.clip(raw, lo, hi)
        sat = out != raw
    return RobotHandAngles(out, raw, sat)


@dataclass(frozen=True)
class CalibrationSet:
    """Paired human/robot angles for one finger.

    ``human`` is (N, h) over the human columns listed in ``columns`` (indices
    into [abd, flex0, flex1, flex2]); ``robot`` is (N, r).
    """

    human: np.ndarray
    robot: np.ndarray
    finger: str = "index"
    columns: tuple = (1, 2, 3)

    def __post_init__(self):
        h = np.atleast_2d(np.asarray(self.human, dtype=float))
        r = np.atleast_2d(np.asarray(self.robot, dtype=float))
        if h.shape[0] != r.shape[0]:
            raise DimensionMismatch(f"{h.shape[0]} human samples vs {r.shape[0]} robot samples")
        if h.shape[1] != len(self.columns):
            raise DimensionMismatch(f"human samples have {h.shape[1]} columns, expected {len(self.columns)}")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(r))):
            raise InputError("calibration samples must be finite")
        object.__setattr__(self, "human", h)
        object.__setattr__(self, "robot", r)
        object.__setattr__(self, "columns", tuple(int(c) for c in self.columns))

    @property
    def n_samples(self):
        return self.human.shape[0]


@dataclass(frozen=True)
class FitResult:
    block: np.ndarray  # (r, h) over the calibrated columns
    finger: str
    columns: tuple
    residuals: np.ndarray  # (N, r)
    error: float

    def full_block(self):
        """Expand to the (r, 4) layout used by MappingMatrix."""
        out = np.zeros((self.block.shape[0], HUMAN_FINGER_DOF))
        out[:, list(self.columns)] = self.block
        return out


def fit_mapping(cal, ridge=0.0):
    """Least-squares finger block: min ||Y - X W^T||^2 + ridge ||W||^2."""
    if ridge < 0:
        raise InputError(f"ridge must be >= 0, got {ridge}")
    X, Y = cal.human, cal.robot
    n, h = X.shape
    if ridge == 0:
        if n < h or np.linalg.matrix_rank(X) < h:
            raise RankDeficient(
                f"{n} calibration sample(s) do not determine a {h}-column {cal.finger} block; "
                "add samples or use ridge > 0"
            )
        Xa, Ya = X, Y
    else:
        Xa = np.vstack([X, np.sqrt(ridge) * np.eye(h)])
        Ya = np.vstack([Y, np.zeros((h, Y.shape[1]))])
    Wt, *_ = np.linalg.lstsq(Xa, Ya, rcond=None)
    W = Wt.T
    residuals = Y - X @ Wt
    return FitResult(W, cal.finger, cal.columns, residuals, mapping_error(X @ Wt, Y))


def mapping_error(pred, truth):
    """Root of summed squared angle differences over the number of samples.

    Inputs are (N, d) arrays or sequences of angle vectors; a 1D input is a
    set of N one-joint samples.
    """
    p = _as_samples(pred)
    t = _as_samples(truth)
    if p.shape != t.shape:
        raise DimensionMismatch(f"prediction shape {p.shape} != truth shape {t.shape}")
    if p.shape[0] == 0:
        return 0.0
    return float(np.sqrt(np.sum((p - t) ** 2) / p.shape[0]))


def _as_samples(x):
    if isinstance(x, HumanHandAngles | RobotHandAngles):
        return x.values[None, :]
    items = [v.values if isinstance(v, HumanHandAngles | RobotHandAngles) else v for v in x]
    a = np.asarray(items, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    return a
