"""Planar articulated rigid-body tree dynamics.

Links form a tree rooted at a free base point (x, y). Each link carries one
rotational degree of freedom, its *absolute* world angle phi, so the
generalized coordinates are ``q = [x, y, phi_0, ..., phi_{n-1}]``. With
absolute angles the angular Jacobian rows are constant and the velocity
bias of every body point reduces to ``-sum_j phidot_j^2 * w_j`` over the
world-frame lever vectors ``w_j`` along the link's kinematic path, which
keeps the mass matrix and Coriolis assembly short and cheap.

Joint torques and muscle/contact forces are applied through Jacobian
transposes; the integrator is semi-implicit Euler (velocity first).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit


@dataclass
class PlanarTree:
    """Static description of a planar link tree.

    parent[i] is the index of link i's parent, -1 for links that attach
    directly to the free base point. attach[i] is the vector from the
    parent's joint to link i's joint, expressed in the parent frame
    (ignored and taken as zero for root links). com[i] is the vector from
    link i's joint to its center of mass in the link frame.
    """

    masses: np.ndarray
    inertias: np.ndarray
    parents: np.ndarray
    attach: np.ndarray
    com: np.ndarray
    path_idx: np.ndarray = field(init=False)
    path_len: np.ndarray = field(init=False)

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=np.float64)
        self.inertias = np.asarray(self.inertias, dtype=np.float64)
        self.parents = np.asarray(self.parents, dtype=np.int64)
        self.attach = np.asarray(self.attach, dtype=np.float64)
        self.com = np.asarray(self.com, dtype=np.float64)
        n = self.n_links
        paths = []
        for i in range(n):
            chain = [i]
            j = int(self.parents[i])
            while j >= 0:
                chain.append(j)
                j = int(self.parents[j])
            paths.append(chain[::-1])
        maxd = max(len(p) for p in paths)
        self.path_idx = np.full((n, maxd), -1, dtype=np.int64)
        self.path_len = np.zeros(n, dtype=np.int64)
        for i, p in enumerate(paths):
            self.path_len[i] = len(p)
            self.path_idx[i, : len(p)] = p

    @property
    def n_links(self) -> int:
        return self.masses.shape[0]

    @property
    def ndof(self) -> int:
        return self.n_links + 2

    def arrays(self):
        """Flat tuple consumed by the numba kernels."""
        return (
            self.masses,
            self.inertias,
            self.parents,
            self.attach,
            self.com,
            self.path_idx,
            self.path_len,
        )


@njit(cache=True, nogil=True)
def forward_kinematics(parents, attach, com, q):
    """World joint and CoM positions for state q = [x, y, phi...]."""
    n = parents.shape[0]
    joints = np.empty((n, 2))
    coms = np.empty((n, 2))
    cs = np.empty(n)
    sn = np.empty(n)
    for i in range(n):
        cs[i] = np.cos(q[2 + i])
        sn[i] = np.sin(q[2 + i])
    for i in range(n):
        p = parents[i]
        if p < 0:
            joints[i, 0] = q[0]
            joints[i, 1] = q[1]
        else:
            ax, ay = attach[i, 0], attach[i, 1]
            joints[i, 0] = joints[p, 0] + cs[p] * ax - sn[p] * ay
            joints[i, 1] = joints[p, 1] + sn[p] * ax + cs[p] * ay
        cx, cy = com[i, 0], com[i, 1]
        coms[i, 0] = joints[i, 0] + cs[i] * cx - sn[i] * cy
        coms[i, 1] = joints[i, 1] + sn[i] * cx + cs[i] * cy
    return joints, coms


@njit(cache=True, nogil=True)
def _lever_vectors(path_idx, path_len, joints, coms, i, w):
    """Fill w[s] with the world lever vector contributed by path link s.

    For ancestors the lever is the world vector from that link's joint to
    the next joint on the path; for the link itself it is joint -> CoM.
    """
    plen = path_len[i]
    for s in range(plen - 1):
        a = path_idx[i, s]
        b = path_idx[i, s + 1]
        w[s, 0] = joints[b, 0] - joints[a, 0]
        w[s, 1] = joints[b, 1] - joints[a, 1]
    last = path_idx[i, plen - 1]
    w[plen - 1, 0] = coms[i, 0] - joints[last, 0]
    w[plen - 1, 1] = coms[i, 1] - joints[last, 1]
    return plen


@njit(cache=True, nogil=True)
def mass_matrix_and_bias(masses, inertias, parents, attach, com, path_idx, path_len, q, v):
    """Assemble M(q) and the Coriolis generalized force c(q, v).

    The equations of motion read M(q) qdd = Q_ext - c(q, v).
    """
    n = masses.shape[0]
    ndof = n + 2
    joints, coms = forward_kinematics(parents, attach, com, q)
    M = np.zeros((ndof, ndof))
    cvec = np.zeros(ndof)
    maxd = path_idx.shape[1]
    w = np.empty((maxd, 2))
    for i in range(n):
        m = masses[i]
        plen = _lever_vectors(path_idx, path_len, joints, coms, i, w)
        M[0, 0] += m
        M[1, 1] += m
        # CoM velocity bias: -sum_j phidot_j^2 * w_j
        bx = 0.0
        by = 0.0
        for s in range(plen):
            j = path_idx[i, s]
            pd = v[2 + j]
            bx -= pd * pd * w[s, 0]
            by -= pd * pd * w[s, 1]
        cvec[0] += m * bx
        cvec[1] += m * by
        for s in range(plen):
            j = path_idx[i, s]
            # column of Jv for phi_j is S*w_s = (-wy, wx)
            sx = -w[s, 1]
            sy = w[s, 0]
            M[0, 2 + j] += m * sx
            M[2 + j, 0] += m * sx
            M[1, 2 + j] += m * sy
            M[2 + j, 1] += m * sy
            cvec[2 + j] += m * (sx * bx + sy * by)
            for r in range(plen):
                k = path_idx[i, r]
                M[2 + j, 2 + k] += m * (w[s, 0] * w[r, 0] + w[s, 1] * w[r, 1])
        M[2 + i, 2 + i] += inertias[i]
    return M, cvec, joints, coms


@njit(cache=True, nogil=True)
def add_point_force(Q, parents, path_idx, path_len, joints, i, px, py, fx, fy):
    """Accumulate the generalized force of world force (fx, fy) applied at
    world point (px, py) on link i."""
    Q[0] += fx
    Q[1] += fy
    plen = path_len[i]
    for s in range(plen - 1):
        a = path_idx[i, s]
        b = path_idx[i, s + 1]
        wx = joints[b, 0] - joints[a, 0]
        wy = joints[b, 1] - joints[a, 1]
        Q[2 + a] += wx * fy - wy * fx
    last = path_idx[i, plen - 1]
    wx = px - joints[last, 0]
    wy = py - joints[last, 1]
    Q[2 + last] += wx * fy - wy * fx


@njit(cache=True, nogil=True)
def point_state(parents, path_idx, path_len, joints, q, v, i, lx, ly):
    """World position and velocity of body point (lx, ly) on link i."""
    c = np.cos(q[2 + i])
    s = np.sin(q[2 + i])
    px = joints[i, 0] + c * lx - s * ly
    py = joints[i, 1] + s * lx + c * ly
    vx = v[0]
    vy = v[1]
    plen = path_len[i]
    for r in range(plen - 1):
        a = path_idx[i, r]
        b = path_idx[i, r + 1]
        wx = joints[b, 0] - joints[a, 0]
        wy = joints[b, 1] - joints[a, 1]
        pd = v[2 + a]
        vx += -pd * wy
        vy += pd * wx
    last = path_idx[i, plen - 1]
    pd = v[2 + last]
    vx += -pd * (py - joints[last, 1])
    vy += pd * (px - joints[last, 0])
    return px, py, vx, vy


@njit(cache=True, nogil=True)
def chol_solve(A, b):
    """Solve A x = b for SPD A via an in-place Cholesky factorization."""
    n = A.shape[0]
    L = np.zeros_like(A)
    for i in range(n):
        for j in range(i + 1):
            s = A[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            if i == j:
                L[i, i] = np.sqrt(s)
            else:
                L[i, j] = s / L[j, j]
    y = np.zeros(n)
    for i in range(n):
        s = b[i]
        for k in range(i):
            s -= L[i, k] * y[k]
        y[i] = s / L[i, i]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        s = y[i]
        for k in range(i + 1, n):
            s -= L[k, i] * x[k]
        x[i] = s / L[i, i]
    return x


@njit(cache=True, nogil=True)
def accelerations(masses, inertias, parents, attach, com, path_idx, path_len, q, v, Q):
    """Generalized accelerations for external generalized force Q."""
    M, cvec, _, _ = mass_matrix_and_bias(
        masses, inertias, parents, attach, com, path_idx, path_len, q, v
    )
    rhs = Q - cvec
    return chol_solve(M, rhs)


@njit(cache=True, nogil=True)
def gravity_force(masses, parents, attach, com, path_idx, path_len, q, g):
    """Generalized gravity force for field (0, -g)."""
    n = masses.shape[0]
    ndof = n + 2
    joints, coms = forward_kinematics(parents, attach, com, q)
    Q = np.zeros(ndof)
    for i in range(n):
        add_point_force(
            Q, parents, path_idx, path_len, joints, i,
            coms[i, 0], coms[i, 1], 0.0, -masses[i] * g,
        )
    return Q


@njit(cache=True, nogil=True)
def total_energy(masses, inertias, parents, attach, com, path_idx, path_len, q, v, g):
    """Kinetic plus gravitational potential energy (datum at y = 0)."""
    n = masses.shape[0]
    joints, coms = forward_kinematics(parents, attach, com, q)
    maxd = path_idx.shape[1]
    w = np.empty((maxd, 2))
    e = 0.0
    for i in range(n):
        plen = _lever_vectors(path_idx, path_len, joints, coms, i, w)
        vx = v[0]
        vy = v[1]
        for s in range(plen):
            j = path_idx[i, s]
            pd = v[2 + j]
            vx += -pd * w[s, 1]
            vy += pd * w[s, 0]
        e += 0.5 * masses[i] * (vx * vx + vy * vy)
        e += 0.5 * inertias[i] * v[2 + i] * v[2 + i]
        e += masses[i] * g * coms[i, 1]
    return e


@njit(cache=True, nogil=True)
def semi_implicit_step(masses, inertias, parents, attach, com, path_idx, path_len, q, v, Q, dt):
    """One semi-implicit Euler step under external generalized force Q."""
    qdd = accelerations(masses, inertias, parents, attach, com, path_idx, path_len, q, v, Q)
    v2 = v + dt * qdd
    q2 = q + dt * v2
    return q2, v2
