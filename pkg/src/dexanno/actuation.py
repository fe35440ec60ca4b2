"""Joint-space to actuator-space mapping through a coupling matrix.

The coupling matrix J maps actuator commands to joint angles
(``theta = J u``); commands for a target pose come from its Moore-Penrose
pseudoinverse, ``u = J+ theta``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConditioningWarning, DimensionMismatch, InputError, RankDeficient

SV_CUTOFF = 1e-10
COUPLING_GAP_WARN = 0.05


def pseudoinverse(J):
    """Moore-Penrose inverse by SVD, dropping singular values below 1e-10 * s_max.

    Emits ConditioningWarning when the smallest singular value falls below
    that cutoff.
    """
    J = np.asarray(J, dtype=float)
    if not np.all(np.isfinite(J)):
        raise InputError("coupling matrix has non-finite entries")
    if J.size == 0:
        return np.zeros(J.shape[::-1])
    U, s, Vt = np.linalg.svd(J, full_matrices=False)
    if s[0] == 0:
        return np.zeros(J.shape[::-1])
    keep = s > SV_CUTOFF * s[0]
    if not keep.all():
        warnings.warn(
            f"coupling matrix is ill-conditioned (s_min/s_max = {s[-1] / s[0]:.3g}); "
            f"using rank {int(keep.sum())} pseudoinverse",
            ConditioningWarning,
            stacklevel=2,
        )
    return (Vt[keep].T / s[keep]) @ U[:, keep].T


def pseudoinverse_normal(J):
    """Left inverse ``(J^T J)^-1 J^T``; requires full column rank."""
    J = np.asarray(J, dtype=float)
    JtJ = J.T @ J
    if np.linalg.matrix_rank(J) < J.shape[1]:
        raise RankDeficient("J^T J is singular; J lacks full column rank")
    return np.linalg.solve(JtJ, J.T)


@dataclass(frozen=True)
class CouplingMatrix:
    J: np.ndarray
    actuators: tuple = ()
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        J = np.atleast_2d(np.asarray(self.J, dtype=float))
        if not np.all(np.isfinite(J)):
            raise InputError("coupling matrix has non-finite entries")
        if J.shape[1] > J.shape[0]:
            raise InputError(f"coupling matrix has more actuators ({J.shape[1]}) than joints ({J.shape[0]})")
        dead = np.flatnonzero(~np.any(J != 0, axis=0))
        if dead.size:
            raise InputError(f"actuator column(s) {dead.tolist()} drive no joint")
        object.__setattr__(self, "J", J)
        names = tuple(self.actuators) or tuple(f"a{k}" for k in range(J.shape[1]))
        if len(names) != J.shape[1]:
            raise DimensionMismatch(f"{len(names)} actuator names for {J.shape[1]} columns")
        object.__setattr__(self, "actuators", names)
        for attr in ("lower", "upper"):
            v = getattr(self, attr)
            if v is not None:
                v = np.asarray(v, dtype=float).reshape(-1)
                if v.shape != (J.shape[1],):
                    raise DimensionMismatch(f"actuator {attr} limits have length {v.size}")
                object.__setattr__(self, attr, v)

    @classmethod
    def from_triples(cls, triples, joints, actuators, lower=None, upper=None):
        """Build J from sparse (joint, actuator, gain) entries addressed by name or index."""
        joints = list(joints)
        actuators = list(actuators)
        J = np.zeros((len(joints), len(actuators)))
        for j, a, g in triples:
            ji = joints.index(j) if isinstance(j, str) else int(j)
            ai = actuators.index(a) if isinstance(a, str) else int(a)
            J[ji, ai] += float(g)
        return cls(J, tuple(actuators), lower, upper)

    @property
    def n_joints(self):
        return self.J.shape[0]

    @property
    def n_actuators(self):
        return self.J.shape[1]

    @cached_property
    def pinv(self):
        return pseudoinverse(self.J)


@dataclass(frozen=True)
class ActuatorCommand:
    u: np.ndarray
    raw: np.ndarray
    saturated: np.ndarray = field(repr=False)
    residual: float = 0.0

    @property
    def consistent(self):
        """True when the pose is reachable through the coupling within 0.05 rad."""
        return self.residual <= COUPLING_GAP_WARN


def joints_to_actuators(theta, coupling):
    """Least-squares actuator command for a joint-space target.

    ``residual`` is the infinity norm of ``J u - theta`` before actuator
    clamping: how far the target sits from the coupling's reachable set.
    """
    theta = _values(theta)
    if theta.shape != (coupling.n_joints,):
        raise DimensionMismatch(f"expected {coupling.n_joints} joint angles, got shape {theta.shape}")
    raw = coupling.pinv @ theta
    residual = float(np.max(np.abs(coupling.J @ raw - theta))) if theta.size else 0.0
    u = raw
    if coupling.lower is not None or coupling.upper is not None:
        lo = -np.inf if coupling.lower is None else coupling.lower
        hi = np.inf if coupling.upper is None else coupling.upper
        u = np.clip(raw, lo, hi)
    return ActuatorCommand(u, raw, u != raw, residual)


def actuators_to_joints(u, coupling):
    u = u.u if isinstance(u, ActuatorCommand) else np.asarray(u, dtype=float)
    if u.shape != (coupling.n_actuators,):
        raise DimensionMismatch(f"expected {coupling.n_actuators} actuator values, got shape {u.shape}")
    return coupling.J @ u


def _values(theta):
    v = getattr(theta, "values", theta)
    return np.asarray(v, dtype=float).reshape(-1)
