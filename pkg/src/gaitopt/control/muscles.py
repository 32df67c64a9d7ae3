"""Hill-type muscle definitions and the muscle-level operations.

Seven muscles per leg: soleus (SOL), tibialis anterior (TA), gastrocnemius
(GAS), vastus (VAS), hamstring (HAM), gluteus (GLU), hip flexors (HFL).
Moment arms are constant per muscle-joint pair. The signed "lengthening
arm" g of a pair is the moment arm with the sign chosen so the fiber
lengthens when the joint angle increases; the torque the muscle applies on
that joint is then -F * g in the joint's own convention (hip/knee flexion
positive, ankle plantarflexion positive).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..sim.links import ParameterError
from . import laws

JOINT_NAMES = ("hip", "knee", "ankle")

# transport delays by innervation distance (s)
DELAY_ANKLE = 0.020
DELAY_KNEE = 0.010
DELAY_HIP = 0.005

ACTIVATION_TAU = 0.010


@dataclass
class Muscle:
    """One muscle-tendon unit with its geometry and dynamic state."""

    name: str
    f_max: float
    l_opt: float
    v_max: float  # in optimal lengths per second
    rho: float  # fiber-length sensitivity to joint rotation
    arms: dict  # joint name -> (signed lengthening arm g, reference angle)
    delay: float
    tau_act: float = ACTIVATION_TAU
    activation: float = laws.PRE_STIMULUS
    lce_norm: float = 1.0
    vce_norm: float = 0.0

    def set_joint_state(self, angles: dict, velocities: dict | None = None) -> None:
        """Update fiber length/velocity from joint angles (rad, rad/s)."""
        l = 1.0
        v = 0.0
        for joint, (g, ref) in self.arms.items():
            l += self.rho * g * (angles[joint] - ref) / self.l_opt
            if velocities is not None:
                v += self.rho * g * velocities[joint] / (self.l_opt * self.v_max)
        self.lce_norm = l
        self.vce_norm = v

    def spans(self, joint: str) -> bool:
        return joint in self.arms


def muscle_force(m: Muscle, stimulus: float, dt: float = 1e-3) -> float:
    """Advance activation by dt toward the stimulus and return fiber force.

    Force is max-isometric force times activation times the force-length
    and force-velocity factors, plus the passive stretch term; never
    negative.
    """
    if not laws.STIM_MIN <= stimulus <= laws.STIM_MAX:
        raise ParameterError("stimulus must lie in [0.01, 1]")
    m.activation = float(laws.activation_step(m.activation, stimulus, dt, m.tau_act))
    return float(laws.muscle_force(m.f_max, m.activation, m.lce_norm, m.vce_norm))


def joint_torque(m: Muscle, joint: str, force: float) -> float:
    """Torque of a muscle force about a spanned joint (sign per convention)."""
    if joint not in m.arms:
        raise ParameterError(f"{m.name} does not span {joint}")
    g, _ = m.arms[joint]
    return -force * g


def default_muscles() -> dict:
    """The stock muscle table for one leg."""
    mk = Muscle
    return {
        "SOL": mk("SOL", 4000.0, 0.040, 12.0, 0.5, {"ankle": (-0.05, 0.0)}, DELAY_ANKLE),
        "TA": mk("TA", 800.0, 0.060, 12.0, 0.7, {"ankle": (0.04, 0.10)}, DELAY_ANKLE),
        "GAS": mk(
            "GAS", 1500.0, 0.050, 12.0, 0.7,
            {"knee": (-0.05, 0.30), "ankle": (-0.05, 0.0)}, DELAY_ANKLE,
        ),
        "VAS": mk("VAS", 6000.0, 0.080, 12.0, 0.6, {"knee": (0.06, 0.30)}, DELAY_KNEE),
        "HAM": mk(
            "HAM", 3000.0, 0.100, 12.0, 0.7,
            {"hip": (0.08, 0.20), "knee": (-0.05, 0.30)}, DELAY_HIP,
        ),
        "GLU": mk("GLU", 1500.0, 0.110, 12.0, 0.5, {"hip": (0.10, 0.20)}, DELAY_HIP),
        "HFL": mk("HFL", 2000.0, 0.110, 12.0, 0.5, {"hip": (-0.10, 0.20)}, DELAY_HIP),
    }


@dataclass
class MusclePack:
    """Muscle table flattened into arrays for the rollout engine."""

    f_max: np.ndarray
    l_opt: np.ndarray
    v_max: np.ndarray
    tau_act: np.ndarray
    rho: np.ndarray
    arms: np.ndarray  # (7, 3) signed lengthening arms, hip/knee/ankle
    refs: np.ndarray  # (7, 3) reference angles
    delay_steps: np.ndarray = field(default=None)

    @classmethod
    def build(cls, muscles: dict | None = None, dt: float = 1e-3) -> "MusclePack":
        muscles = muscles if muscles is not None else default_muscles()
        n = laws.N_MUSCLES
        f_max = np.zeros(n)
        l_opt = np.zeros(n)
        v_max = np.zeros(n)
        tau = np.zeros(n)
        rho = np.zeros(n)
        arms = np.zeros((n, 3))
        refs = np.zeros((n, 3))
        delay = np.zeros(n, dtype=np.int64)
        for i, name in enumerate(laws.MUSCLE_NAMES):
            m = muscles[name]
            f_max[i] = m.f_max
            l_opt[i] = m.l_opt
            v_max[i] = m.v_max
            tau[i] = m.tau_act
            rho[i] = m.rho
            for j, joint in enumerate(JOINT_NAMES):
                if joint in m.arms:
                    g, ref = m.arms[joint]
                    arms[i, j] = g
                    refs[i, j] = ref
            delay[i] = max(1, int(round(m.delay / dt)))
        return cls(f_max, l_opt, v_max, tau, rho, arms, refs, delay)
