"""Walker model assembly: configuration, conventions, and packed arrays.

Generalized state exposed to callers (SimState order):

    [x, y, pitch, hip_l, knee_l, ankle_l, hip_r, knee_r, ankle_r]

where (x, y) is the hip point, pitch is trunk forward-lean positive, hip is
flexion positive, knee is flexion positive (0 = straight), and ankle is
plantarflexion positive. Internally the dynamics use absolute link angles

    [x, y, phi_trunk, phi_thigh, phi_shank, phi_foot, ...]

with phi_trunk = -pitch, phi_thigh = hip - pitch, phi_shank = phi_thigh -
knee, phi_foot = phi_shank - ankle. Both maps are exact and linear.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .links import LinkSet, default_link_set
from .tree import PlanarTree

N_STATE = 18  # 9 coordinates + 9 velocities
N_Q = 9

# link order inside the tree
TRUNK, THIGH_L, SHANK_L, FOOT_L, THIGH_R, SHANK_R, FOOT_R = range(7)

# indices into the scalar physics array consumed by the engine
S_GRAVITY = 0
S_KN = 1
S_CN = 2
S_MU = 3
S_VREG = 4
S_DRAMP = 5
S_KSTOP = 6
S_DSTOP = 7
S_FALL_FRAC = 8
S_PITCH_MAX = 9
S_TRUNK_STAND = 10
S_CONTACT_THRESH = 11
N_SCALARS = 12


@dataclass(frozen=True)
class FootGeometry:
    """Heel/toe placement relative to the ankle, in the foot frame."""

    heel_back: float = 0.05
    toe_front: float = 0.15
    sole_drop: float = 0.05


@dataclass(frozen=True)
class ContactParams:
    stiffness: float = 80000.0
    damping: float = 3500.0
    friction: float = 0.9
    v_regularize: float = 0.01
    damping_ramp_depth: float = 0.01
    flag_threshold: float = 1.0


@dataclass(frozen=True)
class JointLimits:
    hip: tuple = (-0.8, 1.8)
    knee: tuple = (0.0, 2.5)
    ankle: tuple = (-0.9, 0.9)
    stiffness: float = 300.0
    damping: float = 10.0


@dataclass(frozen=True)
class FallRule:
    height_fraction: float = 0.70
    pitch_limit: float = 1.0472  # 60 degrees


@dataclass
class WalkerConfig:
    """Full simulator configuration; serializes to/from JSON."""

    links: LinkSet = field(default_factory=default_link_set)
    foot: FootGeometry = field(default_factory=FootGeometry)
    contact: ContactParams = field(default_factory=ContactParams)
    limits: JointLimits = field(default_factory=JointLimits)
    fall: FallRule = field(default_factory=FallRule)
    gravity: float = 9.81
    dt: float = 1e-3
    sample_rate: float = 100.0
    debounce_time: float = 0.02
    initial_state: np.ndarray = field(default_factory=lambda: np.zeros(N_STATE))

    def __post_init__(self):
        self.initial_state = np.asarray(self.initial_state, dtype=float)
        if self.initial_state.shape != (N_STATE,):
            raise ValueError("initial_state must have 18 entries")

    def to_dict(self) -> dict:
        return {
            "links": self.links.to_dict(),
            "foot": {
                "heel_back": self.foot.heel_back,
                "toe_front": self.foot.toe_front,
                "sole_drop": self.foot.sole_drop,
            },
            "contact": {
                "stiffness": self.contact.stiffness,
                "damping": self.contact.damping,
                "friction": self.contact.friction,
                "v_regularize": self.contact.v_regularize,
                "damping_ramp_depth": self.contact.damping_ramp_depth,
                "flag_threshold": self.contact.flag_threshold,
            },
            "limits": {
                "hip": list(self.limits.hip),
                "knee": list(self.limits.knee),
                "ankle": list(self.limits.ankle),
                "stiffness": self.limits.stiffness,
                "damping": self.limits.damping,
            },
            "fall": {
                "height_fraction": self.fall.height_fraction,
                "pitch_limit": self.fall.pitch_limit,
            },
            "gravity": self.gravity,
            "dt": self.dt,
            "sample_rate": self.sample_rate,
            "debounce_time": self.debounce_time,
            "initial_state": self.initial_state.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WalkerConfig":
        return cls(
            links=LinkSet.from_dict(d["links"]),
            foot=FootGeometry(**d["foot"]),
            contact=ContactParams(**d["contact"]),
            limits=JointLimits(
                hip=tuple(d["limits"]["hip"]),
                knee=tuple(d["limits"]["knee"]),
                ankle=tuple(d["limits"]["ankle"]),
                stiffness=d["limits"]["stiffness"],
                damping=d["limits"]["damping"],
            ),
            fall=FallRule(**d["fall"]),
            gravity=d["gravity"],
            dt=d["dt"],
            sample_rate=d["sample_rate"],
            debounce_time=d["debounce_time"],
            initial_state=np.array(d["initial_state"]),
        )

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def state_to_tree(q: np.ndarray) -> np.ndarray:
    """Map SimState coordinates to absolute-angle tree coordinates."""
    out = np.empty(N_Q)
    out[0], out[1] = q[0], q[1]
    pitch = q[2]
    out[2] = -pitch
    for side, off in ((0, 3), (1, 6)):
        h, k, a = q[off], q[off + 1], q[off + 2]
        th = h - pitch
        sh = th - k
        ft = sh - a
        out[3 + 3 * side] = th
        out[4 + 3 * side] = sh
        out[5 + 3 * side] = ft
    return out


def tree_to_state(phi: np.ndarray) -> np.ndarray:
    """Inverse of state_to_tree."""
    out = np.empty(N_Q)
    out[0], out[1] = phi[0], phi[1]
    pitch = -phi[2]
    out[2] = pitch
    for side, off in ((0, 3), (1, 6)):
        th = phi[3 + 3 * side]
        sh = phi[4 + 3 * side]
        ft = phi[5 + 3 * side]
        out[off] = th + pitch
        out[off + 1] = th - sh
        out[off + 2] = sh - ft
    return out


def build_tree(links: LinkSet, foot: FootGeometry) -> PlanarTree:
    """7-link planar tree rooted at the hip point."""
    tr, thl, shl, ftl = links.trunk, links.thigh_l, links.shank_l, links.foot_l
    thr, shr, ftr = links.thigh_r, links.shank_r, links.foot_r
    masses = [tr.mass, thl.mass, shl.mass, ftl.mass, thr.mass, shr.mass, ftr.mass]
    inertias = [tr.inertia, thl.inertia, shl.inertia, ftl.inertia, thr.inertia, shr.inertia, ftr.inertia]
    parents = [-1, -1, 1, 2, -1, 4, 5]
    attach = [
        (0.0, 0.0),
        (0.0, 0.0),
        (0.0, -thl.length),
        (0.0, -shl.length),
        (0.0, 0.0),
        (0.0, -thr.length),
        (0.0, -shr.length),
    ]
    com = [
        (0.0, tr.com_offset),
        (0.0, -thl.com_offset),
        (0.0, -shl.com_offset),
        (ftl.com_offset - foot.heel_back, -foot.sole_drop / 2.0),
        (0.0, -thr.com_offset),
        (0.0, -shr.com_offset),
        (ftr.com_offset - foot.heel_back, -foot.sole_drop / 2.0),
    ]
    return PlanarTree(
        masses=np.array(masses),
        inertias=np.array(inertias),
        parents=np.array(parents),
        attach=np.array(attach),
        com=np.array(com),
    )


class WalkerModel:
    """A WalkerConfig compiled into the flat arrays the engine consumes."""

    def __init__(self, config: WalkerConfig):
        self.config = config
        self.tree = build_tree(config.links, config.foot)
        foot = config.foot
        self.foot_pts = np.array(
            [
                [[-foot.heel_back, -foot.sole_drop], [foot.toe_front, -foot.sole_drop]],
                [[-foot.heel_back, -foot.sole_drop], [foot.toe_front, -foot.sole_drop]],
            ]
        )
        lim = config.limits
        self.lim_lo = np.array([lim.hip[0], lim.knee[0], lim.ankle[0]] * 2)
        self.lim_hi = np.array([lim.hip[1], lim.knee[1], lim.ankle[1]] * 2)
        standing_hip = (
            config.links.thigh_l.length + config.links.shank_l.length + foot.sole_drop
        )
        self.standing_hip_height = standing_hip
        trunk_stand = standing_hip + config.links.trunk.com_offset
        c = config.contact
        scal = np.zeros(N_SCALARS)
        scal[S_GRAVITY] = config.gravity
        scal[S_KN] = c.stiffness
        scal[S_CN] = c.damping
        scal[S_MU] = c.friction
        scal[S_VREG] = c.v_regularize
        scal[S_DRAMP] = c.damping_ramp_depth
        scal[S_KSTOP] = lim.stiffness
        scal[S_DSTOP] = lim.damping
        scal[S_FALL_FRAC] = config.fall.height_fraction
        scal[S_PITCH_MAX] = config.fall.pitch_limit
        scal[S_TRUNK_STAND] = trunk_stand
        scal[S_CONTACT_THRESH] = c.flag_threshold
        self.scalars = scal
        self.config_hash = config.config_hash()

    def initial_tree_state(self):
        s = self.config.initial_state
        return state_to_tree(s[:N_Q]), state_to_tree_velocity(s[:N_Q], s[N_Q:])


def state_to_tree_velocity(q: np.ndarray, qd: np.ndarray) -> np.ndarray:
    """Velocity map matches the linear coordinate map (q is unused but kept
    for signature symmetry with nonlinear maps)."""
    return state_to_tree(qd)


def tree_to_state_velocity(phid: np.ndarray) -> np.ndarray:
    return tree_to_state(phid)


def settle_initial_height(config: WalkerConfig) -> WalkerConfig:
    """Adjust initial hip height so the lowest stance-foot point touches the
    ground exactly (zero penetration)."""
    q = config.initial_state[:N_Q].copy()
    phi = state_to_tree(q)
    from .tree import forward_kinematics  # local import to avoid cycles

    tree = build_tree(config.links, config.foot)
    joints, _ = forward_kinematics(tree.parents, tree.attach, tree.com, phi)
    foot = config.foot
    lowest = np.inf
    for side, fi in ((0, FOOT_L), (1, FOOT_R)):
        cphi = np.cos(phi[2 + fi])
        sphi = np.sin(phi[2 + fi])
        for lx, ly in ((-foot.heel_back, -foot.sole_drop), (foot.toe_front, -foot.sole_drop)):
            py = joints[fi, 1] + sphi * lx + cphi * ly
            lowest = min(lowest, py)
    state = config.initial_state.copy()
    state[1] = q[1] - lowest
    cfg = WalkerConfig(**{**config.__dict__, "initial_state": state})
    return cfg
