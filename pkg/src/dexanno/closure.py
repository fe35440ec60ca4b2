"""Force-closure test for point contacts with friction.

Each friction cone is replaced by ``m`` edge directions, every edge becomes
a 6D wrench column, and the grasp is force-closed when the origin lies
strictly inside the convex hull of those columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import _backend
from .errors import EmptyContactSet, InputError, NegativeFriction

DEFAULT_EDGES = 6
DEFAULT_TOL = 1e-9
RANK_RTOL = 1e-10
# interior slack below this counts as boundary contact
LP_INTERIOR_EPS = 1e-12


@dataclass(frozen=True)
class Contact:
    p: np.ndarray
    n: np.ndarray
    mu: float

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).reshape(3)
        n = np.asarray(self.n, dtype=float).reshape(3)
        if not np.all(np.isfinite(p)) or not np.all(np.isfinite(n)):
            raise InputError("contact point and normal must be finite")
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise InputError(f"contact normal must be unit length, |n| = {np.linalg.norm(n)}")
        if not self.mu >= 0:
            raise NegativeFriction(f"friction coefficient must be >= 0, got {self.mu}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "mu", float(self.mu))

    @classmethod
    def normalized(cls, p, n, mu):
        """Build a contact, rescaling ``n`` to unit length first."""
        n = np.asarray(n, dtype=float)
        norm = np.linalg.norm(n)
        if norm == 0:
            raise InputError("contact normal is the zero vector")
        return cls(p, n / norm, mu)


@dataclass(frozen=True)
class FrictionCone:
    half_angle: float
    edges: np.ndarray  # (m, 3)
    t1: np.ndarray
    t2: np.ndarray


@dataclass(frozen=True)
class WrenchMatrix:
    G: np.ndarray  # (6, m * n_contacts)
    edges_per_contact: int
    torque_scale: float = 1.0

    @property
    def n_contacts(self):
        return self.G.shape[1] // self.edges_per_contact

    def column_index(self, contact, edge):
        return contact * self.edges_per_contact + edge


@dataclass
class ClosureVerdict:
    closed: bool
    margin: float
    rank: int
    certificate: np.ndarray | None = field(default=None, repr=False)
    interior_slack: float = 0.0

    def summary(self):
        return {"closed": self.closed, "margin": self.margin, "rank": self.rank}


def cone_half_angle(mu):
    if not mu >= 0:
        raise NegativeFriction(f"friction coefficient must be >= 0, got {mu}")
    return float(np.arctan(mu))


def tangent_basis(n):
    """Unit (t1, t2) with {t1, t2, n} right-handed orthonormal."""
    return _backend.tangent_basis(np.asarray(n, dtype=float))


def cone_edges(contact, m=DEFAULT_EDGES):
    if m < 1:
        raise InputError(f"edge count must be >= 1, got {m}")
    theta = cone_half_angle(contact.mu)
    t1, t2 = tangent_basis(contact.n)
    phi = 2.0 * np.pi * np.arange(m) / m
    edges = (
        np.cos(theta) * contact.n[None, :]
        + np.sin(theta) * (np.cos(phi)[:, None] * t1[None, :] + np.sin(phi)[:, None] * t2[None, :])
    )
    return FrictionCone(theta, edges, t1, t2)


def grasp_matrix(contacts, m=DEFAULT_EDGES, torque_scale=1.0):
    """6 x (m * n) matrix of edge wrenches, contact-major column order."""
    contacts = list(contacts)
    if not contacts:
        raise EmptyContactSet("grasp matrix needs at least one contact")
    if m < 1:
        raise InputError(f"edge count must be >= 1, got {m}")
    if not torque_scale > 0:
        raise InputError("torque scale must be positive")
    P = np.array([c.p for c in contacts])
    N = np.array([c.n for c in contacts])
    H = np.array([cone_half_angle(c.mu) for c in contacts])
    return WrenchMatrix(_backend.wrench_columns(P, N, H, int(m), float(torque_scale)), int(m), torque_scale)


def _inscribed_radius(points):
    """Distance from the origin to the nearest hull facet (origin assumed inside)."""
    pts = np.unique(np.round(points, 14), axis=0)
    try:
        hull = ConvexHull(pts)
    except QhullError:
        hull = ConvexHull(pts, qhull_options="QJ")
    return float(max(0.0, np.min(-hull.equations[:, -1])))


def check_force_closure(G, tol=DEFAULT_TOL):
    """Decide whether the origin is strictly inside conv(columns of G).

    The interior test is the LP

        max s  s.t.  G lam = 0,  sum(lam) = 1,  lam_k >= s

    solved by the simplex kernel. ``s > 0`` puts the origin in the relative
    interior; together with rank 6 that is the full interior. The margin
    is the radius of the largest origin-centred ball inside the hull, with
    columns scaled by the largest column norm.
    """
    if isinstance(G, WrenchMatrix):
        G = G.G
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != 6:
        raise InputError(f"wrench matrix must be 6 x k, got {G.shape}")
    k = G.shape[1]
    if k == 0:
        return ClosureVerdict(False, 0.0, 0)
    sv = np.linalg.svd(G, compute_uv=False)
    rank = int(np.sum(sv > RANK_RTOL * sv[0])) if sv[0] > 0 else 0
    if rank < 6:
        return ClosureVerdict(False, 0.0, rank)

    Gn = G / np.max(np.linalg.norm(G, axis=0))
    # lam = mu + s * 1 with mu, s >= 0
    A = np.zeros((7, k + 1))
    A[:6, :k] = Gn
    A[:6, k] = Gn.sum(axis=1)
    A[6, :k] = 1.0
    A[6, k] = k
    b = np.zeros(7)
    b[6] = 1.0
    c = np.zeros(k + 1)
    c[k] = 1.0
    status, x, s = _backend.lp_max(A, b, c)
    if status != 0 or s <= LP_INTERIOR_EPS:
        return ClosureVerdict(False, 0.0, rank, interior_slack=max(float(s), 0.0) if status == 0 else 0.0)
    lam = x[:k] + x[k]
    margin = _inscribed_radius(Gn.T)
    closed = margin > tol
    return ClosureVerdict(closed, margin if closed else 0.0, rank, lam if closed else None, float(s))


def contacts_closure(contacts, m=DEFAULT_EDGES, tol=DEFAULT_TOL, torque_scale=1.0):
    return check_force_closure(grasp_matrix(contacts, m, torque_scale), tol)
