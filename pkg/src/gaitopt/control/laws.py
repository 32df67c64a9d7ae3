"""Numba primitives for the reflex controller.

Everything here is a pure scalar/array function so the same code backs the
public control API and the hot rollout loop. Angle conventions (used by
every law below and by the simulator):

* trunk pitch: forward lean positive
* hip: flexion positive (thigh swings forward)
* knee: flexion positive (0 = straight)
* ankle: plantarflexion positive, dorsiflexion negative
* leg angle alpha: angle of the hip->ankle line below the forward
  horizontal, so a vertical leg reads pi/2 and swinging the leg forward
  decreases alpha.

The trunk-balance law keeps its source convention (pitch backward
positive); callers negate forward-positive pitch when invoking it.
"""

import numpy as np
from numba import njit

# muscle indexing
SOL, TA, GAS, VAS, HAM, GLU, HFL = 0, 1, 2, 3, 4, 5, 6
N_MUSCLES = 7
MUSCLE_NAMES = ("SOL", "TA", "GAS", "VAS", "HAM", "GLU", "HFL")

# policy parameter indexing
K_GAS, K_GLU, K_HAM, K_SOL, K_TA_SOL, K_TA, K_VAS = 0, 1, 2, 3, 4, 5, 6
K_P_ST, K_D_ST, K_MIX_GLU = 7, 8, 9
K_P_SW, K_D_SW, ALPHA0, C_D, C_V, L_CLR = 10, 11, 12, 13, 14, 15
N_PARAMS = 16

STIM_MIN = 0.01
STIM_MAX = 1.0
PRE_STIMULUS = 0.01
THETA_LEAN_DES = 0.105  # desired forward trunk lean, rad
TA_LENGTH_OFFSET = 0.95  # normalized TA length above which the stretch reflex fires

# force-length / force-velocity shape constants
FL_WIDTH = 0.56
FL_LNC = np.log(0.05)
FV_K = 0.25
FV_ECC_MAX = 1.5
FV_ECC_KNEE = FV_K / 7.56
PASSIVE_REF_STRAIN = 0.56

# swing phase machine
SW_STANCE, SW_FLEX, SW_HOLD, SW_EXTEND = 0, 1, 2, 3
SWING_KNEE_SCALE = 0.4  # knee PD gains as a fraction of the hip swing gains
SWING_KNEE_FLEX_TARGET = 1.3
SWING_KNEE_EXTEND_TARGET = 0.05
SWING_EXTEND_PROGRESS = 0.8  # fraction of the way to alpha_tgt that triggers extension


@njit(cache=True, nogil=True)
def clamp_stimulus(s):
    if s < STIM_MIN:
        return STIM_MIN
    if s > STIM_MAX:
        return STIM_MAX
    return s


@njit(cache=True, nogil=True)
def activation_step(act, stim, dt, tau):
    """Exact first-order update of activation toward the stimulus."""
    return stim + (act - stim) * np.exp(-dt / tau)


@njit(cache=True, nogil=True)
def force_length(lnorm):
    z = np.abs((lnorm - 1.0) / FL_WIDTH)
    return np.exp(FL_LNC * z * z * z)


@njit(cache=True, nogil=True)
def force_velocity(vnorm):
    """Hill hyperbola; vnorm = v_ce / (l_opt * v_max), shortening negative."""
    if vnorm <= -1.0:
        return 0.0
    if vnorm <= 0.0:
        return (1.0 + vnorm) / (1.0 - vnorm / FV_K)
    return (FV_ECC_MAX * vnorm + FV_ECC_KNEE) / (vnorm + FV_ECC_KNEE)


@njit(cache=True, nogil=True)
def passive_force(lnorm):
    if lnorm <= 1.0:
        return 0.0
    z = (lnorm - 1.0) / PASSIVE_REF_STRAIN
    return z * z


@njit(cache=True, nogil=True)
def muscle_force(f_max, act, lnorm, vnorm):
    f = f_max * (act * force_length(lnorm) * force_velocity(vnorm) + passive_force(lnorm))
    return f if f > 0.0 else 0.0


@njit(cache=True, nogil=True)
def torso_balance_stimulus(kp, kd, theta_des, theta, theta_dot):
    """PD trunk-balance term added to GLU; pitch backward positive here."""
    return kp * (theta_des - theta) - kd * theta_dot


@njit(cache=True, nogil=True)
def target_leg_angle(alpha0, c_d, c_v, d, v):
    """Foot-placement target: affine in CoM offset d and CoM velocity v."""
    return alpha0 + c_d * d + c_v * v


@njit(cache=True, nogil=True)
def swing_hip_torque(kp, kd, alpha_tgt, alpha, alpha_dot):
    """PD torque on the swing leg angle."""
    return kp * (alpha_tgt - alpha) - kd * alpha_dot


@njit(cache=True, nogil=True)
def stance_stimuli(params, f_del, lta_del, theta_bwd_del, thetadot_bwd_del, in_stance):
    """Stimuli for the seven muscles of one leg.

    f_del: delayed normalized muscle forces (F / F_max), one per muscle.
    lta_del: delayed normalized TA fiber length.
    theta/thetadot: delayed trunk pitch in the backward-positive convention.
    in_stance: the SOL->TA inhibition and trunk pathways act in stance only;
    in swing only the TA stretch reflex remains active.
    """
    out = np.empty(N_MUSCLES)
    for m in range(N_MUSCLES):
        out[m] = PRE_STIMULUS
    ta = PRE_STIMULUS + params[K_TA] * max(0.0, lta_del - TA_LENGTH_OFFSET)
    if in_stance:
        out[SOL] = PRE_STIMULUS + params[K_SOL] * f_del[SOL]
        out[GAS] = PRE_STIMULUS + params[K_GAS] * f_del[GAS]
        out[VAS] = PRE_STIMULUS + params[K_VAS] * f_del[VAS]
        out[HAM] = PRE_STIMULUS + params[K_HAM] * f_del[HAM]
        ta -= params[K_TA_SOL] * f_del[SOL]
        torso = torso_balance_stimulus(
            params[K_P_ST], params[K_D_ST], -THETA_LEAN_DES, theta_bwd_del, thetadot_bwd_del
        )
        glu_force = PRE_STIMULUS + params[K_GLU] * f_del[GLU]
        mix = params[K_MIX_GLU]
        out[GLU] = mix * glu_force + (1.0 - mix) * torso
        out[HFL] = PRE_STIMULUS + max(0.0, -torso)
    out[TA] = ta
    for m in range(N_MUSCLES):
        out[m] = clamp_stimulus(out[m])
    return out


@njit(cache=True, nogil=True)
def swing_knee_torque(phase, kp, kd, knee, knee_dot):
    """Knee torque of the swing phase machine (flexion positive)."""
    kpk = SWING_KNEE_SCALE * kp
    kdk = SWING_KNEE_SCALE * kd
    if phase == SW_FLEX:
        return kpk * (SWING_KNEE_FLEX_TARGET - knee) - kdk * knee_dot
    if phase == SW_HOLD:
        return -kdk * knee_dot
    if phase == SW_EXTEND:
        return kpk * (SWING_KNEE_EXTEND_TARGET - knee) - kdk * knee_dot
    return 0.0


@njit(cache=True, nogil=True)
def swing_phase_update(phase, clearance, l_clr, alpha, alpha_start, alpha_tgt):
    """Advance the flex -> hold -> extend machine; transitions are monotone."""
    new = phase
    if phase == SW_FLEX and clearance >= l_clr:
        new = SW_HOLD
    if new == SW_HOLD:
        thresh = alpha_start + SWING_EXTEND_PROGRESS * (alpha_tgt - alpha_start)
        if alpha <= thresh:
            new = SW_EXTEND
    return new
