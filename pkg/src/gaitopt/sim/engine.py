"""Closed-loop rollout engine.

One numba kernel advances the full walker: compliant heel/toe ground
contact, the reflex controller (stance muscle stimuli from delayed force
and length signals, trunk balance, swing leg placement), soft joint
limits, and semi-implicit Euler integration, while recording samples and
debounced step events. The same control laws exposed by the public API
back this loop (see gaitopt.control.laws).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..control import laws
from . import model as md
from .tree import (
    add_point_force,
    chol_solve,
    forward_kinematics,
    mass_matrix_and_bias,
    point_state,
)
from .terrain import ground_height_kernel

# sample row layout
COL_T = 0
COL_Q0 = 1
COL_V0 = 10
COL_CONTACT_L = 19
COL_CONTACT_R = 20
COL_COM_X = 21
COL_COM_Y = 22
COL_TAU0 = 23
SAMPLE_W = 29

TERM_WALKED = 0
TERM_FELL = 1
TERM_FAULT = 2

EV_HEEL_STRIKE = 0
EV_TOE_OFF = 1


@njit(cache=True, nogil=True)
def _tree_to_rel(q, v, rel, reld):
    """Relative joint angles/velocities from absolute tree coordinates.

    rel = [hip_l, knee_l, ankle_l, hip_r, knee_r, ankle_r]; pitch handled
    separately by callers (pitch = -q[2]).
    """
    for side in range(2):
        th = q[3 + 3 * side]
        sh = q[4 + 3 * side]
        ft = q[5 + 3 * side]
        rel[3 * side + 0] = th - q[2]
        rel[3 * side + 1] = th - sh
        rel[3 * side + 2] = sh - ft
        thd = v[3 + 3 * side]
        shd = v[4 + 3 * side]
        ftd = v[5 + 3 * side]
        reld[3 * side + 0] = thd - v[2]
        reld[3 * side + 1] = thd - shd
        reld[3 * side + 2] = shd - ftd


@njit(cache=True, nogil=True)
def _apply_rel_torques(Q, tau):
    """Map relative joint torques into absolute-angle generalized forces."""
    # hip: h = phi_thigh - phi_trunk
    Q[2] -= tau[0] + tau[3]
    for side in range(2):
        i_th = 3 + 3 * side
        i_sh = 4 + 3 * side
        i_ft = 5 + 3 * side
        th_t = tau[3 * side + 0]
        kn_t = tau[3 * side + 1]
        an_t = tau[3 * side + 2]
        Q[i_th] += th_t + kn_t
        Q[i_sh] += -kn_t + an_t
        Q[i_ft] += -an_t
    return Q


@njit(cache=True, nogil=True)
def rollout_kernel(
    masses, inertias, parents, attach, com, path_idx, path_len,
    foot_pts, lim_lo, lim_hi, scal,
    mus_fmax, mus_lopt, mus_vmax, mus_tau, mus_rho, mus_arm, mus_ref, mus_delay,
    terr_kind, terr_cell, terr_xmin, terr_off, terr_breaks, terr_bh, terr_gr,
    params, q_init, v_init, dt, n_steps, sample_every,
    use_controller, use_joint_limits,
    samples, ev_time, ev_leg, ev_kind,
):
    ndof = masses.shape[0] + 2
    q = q_init.copy()
    v = v_init.copy()
    g = scal[md.S_GRAVITY]
    k_n = scal[md.S_KN]
    c_n = scal[md.S_CN]
    mu = scal[md.S_MU]
    v_reg = scal[md.S_VREG]
    d_ramp = scal[md.S_DRAMP]
    k_stop = scal[md.S_KSTOP]
    d_stop = scal[md.S_DSTOP]
    fall_frac = scal[md.S_FALL_FRAC]
    pitch_max = scal[md.S_PITCH_MAX]
    trunk_stand = scal[md.S_TRUNK_STAND]
    c_thresh = scal[md.S_CONTACT_THRESH]

    buf_len = 0
    for m in range(laws.N_MUSCLES):
        if mus_delay[m] + 2 > buf_len:
            buf_len = mus_delay[m] + 2
    sig_buf = np.zeros((2, laws.N_MUSCLES + 1, buf_len))
    trunk_buf = np.zeros((2, buf_len))
    act = np.full((2, laws.N_MUSCLES), laws.PRE_STIMULUS)

    # prefill signal history with the initial-pose values
    rel = np.zeros(6)
    reld = np.zeros(6)
    _tree_to_rel(q, v, rel, reld)
    for side in range(2):
        for m in range(laws.N_MUSCLES):
            ln = 1.0
            vn = 0.0
            for j in range(3):
                ga = mus_arm[m, j]
                if ga != 0.0:
                    ang = rel[3 * side + j]
                    angd = reld[3 * side + j]
                    ln += mus_rho[m] * ga * (ang - mus_ref[m, j]) / mus_lopt[m]
                    vn += mus_rho[m] * ga * angd / (mus_lopt[m] * mus_vmax[m])
            f0 = laws.muscle_force(mus_fmax[m], act[side, m], ln, vn)
            for b in range(buf_len):
                sig_buf[side, m, b] = f0 / mus_fmax[m]
            if m == laws.TA:
                for b in range(buf_len):
                    sig_buf[side, laws.N_MUSCLES, b] = ln
    for b in range(buf_len):
        trunk_buf[0, b] = q[2]
        trunk_buf[1, b] = v[2]

    debounce_steps = max(1, int(round(0.02 / dt)))
    deb = np.zeros(2, dtype=np.int64)
    raw = np.zeros(2, dtype=np.int64)
    pend = np.zeros(2, dtype=np.int64)
    phase = np.zeros(2, dtype=np.int64)
    alpha_start = np.zeros(2)
    n_ev = 0
    max_ev = ev_time.shape[0]

    work = 0.0
    term_code = TERM_WALKED
    term_time = n_steps * dt
    n_samp = 0
    tau_rel = np.zeros(6)
    tau_lim = np.zeros(6)
    last_sup_x = q[0]
    x_start = q[0]
    first = True

    for t in range(n_steps):
        time = t * dt
        M, cvec, joints, coms = mass_matrix_and_bias(
            masses, inertias, parents, attach, com, path_idx, path_len, q, v
        )
        _tree_to_rel(q, v, rel, reld)
        pitch = -q[2]

        Q = np.zeros(ndof)
        # gravity
        for i in range(masses.shape[0]):
            add_point_force(
                Q, parents, path_idx, path_len, joints, i,
                coms[i, 0], coms[i, 1], 0.0, -masses[i] * g,
            )

        # ground contact at heel and toe of each foot
        clearance = np.empty(2)
        for side in range(2):
            fi = md.FOOT_L if side == 0 else md.FOOT_R
            fn_sum = 0.0
            clr = 1e9
            for pt in range(2):
                lx = foot_pts[side, pt, 0]
                ly = foot_pts[side, pt, 1]
                px, py, pvx, pvy = point_state(
                    parents, path_idx, path_len, joints, q, v, fi, lx, ly
                )
                gh = ground_height_kernel(
                    terr_kind, terr_cell, terr_xmin, terr_off, terr_breaks, terr_bh, terr_gr, px
                )
                depth = gh - py
                if -depth < clr:
                    clr = -depth
                if depth > 0.0:
                    ramp = depth / d_ramp
                    if ramp > 1.0:
                        ramp = 1.0
                    fn = k_n * depth + c_n * (-pvy) * ramp
                    if fn < 0.0:
                        fn = 0.0
                    ft = -mu * fn * np.tanh(pvx / v_reg)
                    add_point_force(
                        Q, parents, path_idx, path_len, joints, fi, px, py, ft, fn
                    )
                    fn_sum += fn
            clearance[side] = clr
            raw[side] = 1 if fn_sum > c_thresh else 0

        # initialize debounced flags from the first raw reading
        if first:
            deb[0] = raw[0]
            deb[1] = raw[1]
            for side in range(2):
                phase[side] = laws.SW_STANCE if deb[side] == 1 else laws.SW_FLEX
            if deb[0] == 1:
                last_sup_x = joints[md.FOOT_L, 0]
            elif deb[1] == 1:
                last_sup_x = joints[md.FOOT_R, 0]
            first = False

        # debounce contact flags; emit step events on accepted edges
        for side in range(2):
            if raw[side] != deb[side]:
                pend[side] += 1
                if pend[side] >= debounce_steps:
                    deb[side] = raw[side]
                    pend[side] = 0
                    if n_ev < max_ev:
                        ev_time[n_ev] = time
                        ev_leg[n_ev] = side
                        ev_kind[n_ev] = EV_HEEL_STRIKE if deb[side] == 1 else EV_TOE_OFF
                        n_ev += 1
            else:
                pend[side] = 0

        # support-foot bookkeeping for foot placement
        if deb[0] == 1:
            last_sup_x = joints[md.FOOT_L, 0]
        elif deb[1] == 1:
            last_sup_x = joints[md.FOOT_R, 0]

        m_tot = 0.0
        com_x = 0.0
        com_y = 0.0
        for i in range(masses.shape[0]):
            m_tot += masses[i]
            com_x += masses[i] * coms[i, 0]
            com_y += masses[i] * coms[i, 1]
        com_x /= m_tot
        com_y /= m_tot
        com_vx = 0.0
        for jj in range(ndof):
            com_vx += M[0, jj] * v[jj]
        com_vx /= m_tot

        for k6 in range(6):
            tau_rel[k6] = 0.0

        if use_controller:
            for side in range(2):
                in_stance = deb[side] == 1
                if in_stance:
                    phase[side] = laws.SW_STANCE

                # delayed reflex inputs
                f_del = np.empty(laws.N_MUSCLES)
                for m in range(laws.N_MUSCLES):
                    idx = (t - mus_delay[m]) % buf_len
                    f_del[m] = sig_buf[side, m, idx]
                idx_ta = (t - mus_delay[laws.TA]) % buf_len
                lta_del = sig_buf[side, laws.N_MUSCLES, idx_ta]
                idx_tr = (t - mus_delay[laws.GLU]) % buf_len
                th_del = trunk_buf[0, idx_tr]
                thd_del = trunk_buf[1, idx_tr]

                stim = laws.stance_stimuli(params, f_del, lta_del, th_del, thd_del, in_stance)

                # muscle dynamics and torques
                for m in range(laws.N_MUSCLES):
                    act[side, m] = laws.activation_step(act[side, m], stim[m], dt, mus_tau[m])
                    ln = 1.0
                    vn = 0.0
                    for j in range(3):
                        ga = mus_arm[m, j]
                        if ga != 0.0:
                            ang = rel[3 * side + j]
                            angd = reld[3 * side + j]
                            ln += mus_rho[m] * ga * (ang - mus_ref[m, j]) / mus_lopt[m]
                            vn += mus_rho[m] * ga * angd / (mus_lopt[m] * mus_vmax[m])
                    f = laws.muscle_force(mus_fmax[m], act[side, m], ln, vn)
                    for j in range(3):
                        ga = mus_arm[m, j]
                        if ga != 0.0:
                            tau_rel[3 * side + j] += -f * ga
                    wslot = t % buf_len
                    sig_buf[side, m, wslot] = f / mus_fmax[m]
                    if m == laws.TA:
                        sig_buf[side, laws.N_MUSCLES, wslot] = ln
                    vce = vn * mus_lopt[m] * mus_vmax[m]
                    work += stim[m] * mus_fmax[m] * np.abs(vce) * dt

                if not in_stance:
                    # swing leg: hip PD on the leg angle, knee phase machine
                    fi = md.FOOT_L if side == 0 else md.FOOT_R
                    si = md.SHANK_L if side == 0 else md.SHANK_R
                    shank_len = attach[fi, 1]
                    ax, ay, avx, avy = point_state(
                        parents, path_idx, path_len, joints, q, v, si, 0.0, shank_len
                    )
                    uu = q[1] - ay
                    ww = ax - q[0]
                    alpha = np.arctan2(uu, ww)
                    denom = uu * uu + ww * ww
                    if denom < 1e-12:
                        denom = 1e-12
                    alpha_dot = ((v[1] - avy) * ww - uu * (avx - v[0])) / denom

                    if phase[side] == laws.SW_STANCE:
                        phase[side] = laws.SW_FLEX
                        alpha_start[side] = alpha

                    other = 1 - side
                    if deb[other] == 1:
                        ofi = md.FOOT_L if other == 0 else md.FOOT_R
                        sup_x = joints[ofi, 0]
                    else:
                        sup_x = last_sup_x
                    d_off = com_x - sup_x
                    a_tgt = laws.target_leg_angle(
                        params[laws.ALPHA0], params[laws.C_D], params[laws.C_V], d_off, com_vx
                    )
                    phase[side] = laws.swing_phase_update(
                        phase[side], clearance[side], params[laws.L_CLR],
                        alpha, alpha_start[side], a_tgt,
                    )
                    tau_a = laws.swing_hip_torque(
                        params[laws.K_P_SW], params[laws.K_D_SW], a_tgt, alpha, alpha_dot
                    )
                    # +tau_a acts to increase alpha, i.e. hip extension
                    tau_rel[3 * side + 0] += -tau_a
                    tau_rel[3 * side + 1] += laws.swing_knee_torque(
                        phase[side], params[laws.K_P_SW], params[laws.K_D_SW],
                        rel[3 * side + 1], reld[3 * side + 1],
                    )

            # advance trunk signal history
            wslot = t % buf_len
            trunk_buf[0, wslot] = q[2]
            trunk_buf[1, wslot] = v[2]

        if use_joint_limits:
            hit = False
            for k6 in range(6):
                u = rel[k6]
                ud = reld[k6]
                tl = 0.0
                if u < lim_lo[k6]:
                    tl += k_stop * (lim_lo[k6] - u)
                    if ud < 0.0:
                        tl -= d_stop * ud
                elif u > lim_hi[k6]:
                    tl += k_stop * (lim_hi[k6] - u)
                    if ud > 0.0:
                        tl -= d_stop * ud
                tau_lim[k6] = tl
                if tl != 0.0:
                    hit = True
            if hit:
                _apply_rel_torques(Q, tau_lim)

        _apply_rel_torques(Q, tau_rel)

        # fall detection on the current pose
        gh_hip = ground_height_kernel(
            terr_kind, terr_cell, terr_xmin, terr_off, terr_breaks, terr_bh, terr_gr, q[0]
        )
        fallen = (coms[md.TRUNK, 1] - gh_hip) < fall_frac * trunk_stand or np.abs(pitch) > pitch_max
        if fallen:
            term_code = TERM_FELL
            term_time = time
            break

        if t % sample_every == 0:
            row = samples[n_samp]
            row[COL_T] = time
            row[COL_Q0 + 0] = q[0]
            row[COL_Q0 + 1] = q[1]
            row[COL_Q0 + 2] = pitch
            for k6 in range(6):
                row[COL_Q0 + 3 + k6] = rel[k6]
            row[COL_V0 + 0] = v[0]
            row[COL_V0 + 1] = v[1]
            row[COL_V0 + 2] = -v[2]
            for k6 in range(6):
                row[COL_V0 + 3 + k6] = reld[k6]
            row[COL_CONTACT_L] = deb[0]
            row[COL_CONTACT_R] = deb[1]
            row[COL_COM_X] = com_x
            row[COL_COM_Y] = com_y
            for k6 in range(6):
                row[COL_TAU0 + k6] = tau_rel[k6]
            n_samp += 1

        qdd = chol_solve(M, Q - cvec)
        ok = True
        for jj in range(ndof):
            v[jj] = v[jj] + dt * qdd[jj]
            q[jj] = q[jj] + dt * v[jj]
            if not (np.isfinite(q[jj]) and np.isfinite(v[jj])):
                ok = False
        if not ok:
            term_code = TERM_FAULT
            term_time = time + dt
            break

    # final state row
    _tree_to_rel(q, v, rel, reld)
    if term_code == TERM_WALKED:
        final_time = n_steps * dt
    else:
        final_time = term_time
    row = samples[n_samp]
    row[COL_T] = final_time
    row[COL_Q0 + 0] = q[0]
    row[COL_Q0 + 1] = q[1]
    row[COL_Q0 + 2] = -q[2]
    for k6 in range(6):
        row[COL_Q0 + 3 + k6] = rel[k6]
    row[COL_V0 + 0] = v[0]
    row[COL_V0 + 1] = v[1]
    row[COL_V0 + 2] = -v[2]
    for k6 in range(6):
        row[COL_V0 + 3 + k6] = reld[k6]
    row[COL_CONTACT_L] = deb[0]
    row[COL_CONTACT_R] = deb[1]
    joints2, coms2 = forward_kinematics(parents, attach, com, q)
    m_tot = 0.0
    cx = 0.0
    cy = 0.0
    for i in range(masses.shape[0]):
        m_tot += masses[i]
        cx += masses[i] * coms2[i, 0]
        cy += masses[i] * coms2[i, 1]
    row[COL_COM_X] = cx / m_tot
    row[COL_COM_Y] = cy / m_tot
    for k6 in range(6):
        row[COL_TAU0 + k6] = tau_rel[k6]
    n_samp += 1

    x_fall = q[0] if np.isfinite(q[0]) else 0.0
    if x_fall < 0.0:
        x_fall = 0.0
    return n_samp, n_ev, term_code, term_time, x_fall, work, x_start
