"""Pure-NumPy stepping kernel for the discrete-element ring simulator.

Mirrors the compiled kernel operation for operation; selected at import
time when the extension is unavailable (or forced via RINGTUMBLE_FORCE_PY).

The elements are material (they spin with the body at the rolling rate);
their radial actuators are commanded by each element's current angle in
the non-spinning shape frame, so the ellipse envelope stays fixed there
while the material circulates through it.

State layout (13): [p(3), q(4), v(3), omega_body(3)] with q = (w, x, y, z)
the body-to-slope rotation quaternion. The record layout (18 columns) is
[t, p(3), q(4), v(3), omega_body(3), f_n_total, ixx, iyy, izz] with the
inertia diagonal expressed in the shape frame (where it is diagonal).
"""

import numpy as np

BACKEND = "python"

STATE_SIZE = 13
RECORD_COLS = 18


def _quat_to_matrix(q):
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def _quat_multiply(q1, q2):
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ]
    )


def _quat_exp(rotvec):
    angle = np.sqrt(rotvec @ rotvec)
    if angle < 1e-12:
        q = np.array([1.0, 0.5 * rotvec[0], 0.5 * rotvec[1], 0.5 * rotvec[2]])
        return q / np.sqrt(q @ q)
    half = 0.5 * angle
    s = np.sin(half) / angle
    return np.array(
        [np.cos(half), s * rotvec[0], s * rotvec[1], s * rotvec[2]]
    )


def _spin_phase_and_rate(R, w_b):
    """Roll angle of the body relative to the shape frame, and its rate."""
    phi = np.arctan2(-R[2, 0], R[2, 2])
    psi = np.arcsin(np.clip(R[2, 1], -1.0, 1.0))
    cf, sf = np.cos(phi), np.sin(phi)
    theta_dot = (w_b[2] * cf - w_b[0] * sf) / np.cos(psi)
    phi_dot = w_b[1] - theta_dot * np.sin(psi)
    return phi, phi_dot


def element_geometry(a, b, a_dot, b_dot, phi, phi_dot, cos_th, sin_th):
    """Radii and radial rates of the elements: the actuator command is the
    ellipse radius at the element's shape-frame angle theta_i - phi, which
    holds the ellipse envelope fixed in the non-spinning frame while the
    elements spin with the body."""
    cf, sf = np.cos(phi), np.sin(phi)
    cu = cos_th * cf + sin_th * sf
    su = sin_th * cf - cos_th * sf
    c2 = cu * cu
    s2 = su * su
    D = b * b * c2 + a * a * s2
    sqrtD = np.sqrt(D)
    D32 = D * sqrtD
    r = a * b / sqrtD
    drda = b**3 * c2 / D32
    drdb = a**3 * s2 / D32
    drdu = -a * b * (a * a - b * b) * su * cu / D32
    r_dot = drda * a_dot + drdb * b_dot - drdu * phi_dot
    return r, r_dot, cu, su


def contact_pass(state, a, b, a_dot, b_dot, cos_th, sin_th, m_elem,
                 half_thickness, k, c_damp, w_trans, mu, v_eps):
    """Per-element contact forces at one state.

    Returns (total force (3,), body torque (3,), total normal force,
    body inertia (ixx, iyy, izz, ixz), body inertia rate (same layout),
    shape-frame inertia diag (3,), slip speeds (n,), normal forces (n,)).
    """
    p = state[0:3]
    q = state[3:7]
    v = state[7:10]
    w_b = state[10:13]
    R = _quat_to_matrix(q)
    phi, phi_dot = _spin_phase_and_rate(R, w_b)

    r, r_dot, cu, su = element_geometry(
        a, b, a_dot, b_dot, phi, phi_dot, cos_th, sin_th
    )
    cx = r * cos_th
    cz = r * sin_th
    c_body = np.stack([cx, np.zeros_like(cx), cz], axis=1)
    cdot_body = np.stack([r_dot * cos_th, np.zeros_like(cx), r_dot * sin_th], axis=1)

    # body-frame composite inertia (xz product survives the spin offset)
    ixx = m_elem * np.sum(cz * cz)
    izz = m_elem * np.sum(cx * cx)
    iyy = m_elem * np.sum(r * r)
    ixz = -m_elem * np.sum(cx * cz)
    rr = r * r_dot
    ixx_dot = 2.0 * m_elem * np.sum(rr * sin_th * sin_th)
    izz_dot = 2.0 * m_elem * np.sum(rr * cos_th * cos_th)
    iyy_dot = 2.0 * m_elem * np.sum(rr)
    ixz_dot = -2.0 * m_elem * np.sum(rr * cos_th * sin_th)
    # in the shape frame the distribution is mirror-symmetric: diagonal
    sxx = m_elem * np.sum((r * su) ** 2)
    szz = m_elem * np.sum((r * cu) ** 2)

    pos_w = p + c_body @ R.T
    vel_w = v + (np.cross(np.broadcast_to(w_b, c_body.shape), c_body)
                 + cdot_body) @ R.T

    depth = half_thickness - pos_w[:, 2]
    depth_rate = -vel_w[:, 2]
    u = np.clip(depth / w_trans, 0.0, 1.0)
    smooth = u * u * (3.0 - 2.0 * u)
    f_n = smooth * (k * depth + c_damp * depth_rate)
    f_n = np.where(depth > 0.0, np.maximum(f_n, 0.0), 0.0)

    v_t = vel_w[:, 0:2]
    speed = np.hypot(v_t[:, 0], v_t[:, 1])
    # tanh(s/eps)/s -> 1/eps as s -> 0; series switch keeps it smooth
    small = speed < 1e-12
    safe = np.where(small, 1.0, speed)
    factor = np.where(small, mu * f_n / v_eps, mu * f_n * np.tanh(safe / v_eps) / safe)
    forces = np.empty_like(pos_w)
    forces[:, 0] = -factor * v_t[:, 0]
    forces[:, 1] = -factor * v_t[:, 1]
    forces[:, 2] = f_n

    f_total = forces.sum(axis=0)
    arms = c_body @ R.T
    torque_w = np.cross(arms, forces).sum(axis=0)
    torque_b = R.T @ torque_w

    inertia = np.array([ixx, iyy, izz, ixz])
    inertia_dot = np.array([ixx_dot, iyy_dot, izz_dot, ixz_dot])
    shape_diag = np.array([sxx, iyy, szz])
    slip = np.where(f_n > 0.0, speed, 0.0)
    return f_total, torque_b, float(f_n.sum()), inertia, inertia_dot, shape_diag, slip, f_n


def _omega_derivative(torque_b, w_b, inertia, inertia_dot):
    """Solve I w_dot = torque - I_dot w - w x (I w) with the structured
    body inertia [[ixx, 0, ixz], [0, iyy, 0], [ixz, 0, izz]]."""
    ixx, iyy, izz, ixz = inertia
    dxx, dyy, dzz, dxz = inertia_dot
    Iw = np.array(
        [ixx * w_b[0] + ixz * w_b[2], iyy * w_b[1], ixz * w_b[0] + izz * w_b[2]]
    )
    Idw = np.array(
        [dxx * w_b[0] + dxz * w_b[2], dyy * w_b[1], dxz * w_b[0] + dzz * w_b[2]]
    )
    rhs = torque_b - Idw - np.cross(w_b, Iw)
    det = ixx * izz - ixz * ixz
    return np.array(
        [
            (rhs[0] * izz - rhs[2] * ixz) / det,
            rhs[1] / iyy,
            (rhs[2] * ixx - rhs[0] * ixz) / det,
        ]
    )


def step_arrays(state, a, b, a_dot, b_dot, dt, cos_th, sin_th, m_total, m_elem,
                half_thickness, k, c_damp, w_trans, mu, v_eps, g_vec):
    """One semi-implicit (velocity-then-position) step. Returns the new
    state and the total normal force and shape-frame inertia diag at the
    old state."""
    f_total, torque_b, f_n_sum, inertia, inertia_dot, shape_diag, _, _ = contact_pass(
        state, a, b, a_dot, b_dot, cos_th, sin_th, m_elem,
        half_thickness, k, c_damp, w_trans, mu, v_eps
    )
    w_b = state[10:13]
    w_new = w_b + dt * _omega_derivative(torque_b, w_b, inertia, inertia_dot)
    v_new = state[7:10] + dt * (f_total / m_total + g_vec)
    p_new = state[0:3] + dt * v_new
    q_new = _quat_multiply(state[3:7], _quat_exp(dt * w_new))
    q_new = q_new / np.sqrt(q_new @ q_new)
    out = np.empty(STATE_SIZE)
    out[0:3] = p_new
    out[3:7] = q_new
    out[7:10] = v_new
    out[10:13] = w_new
    return out, f_n_sum, shape_diag


def run_fixed(state0, t0, dt, n_steps, shape_table, cos_th, sin_th,
              m_total, m_elem, half_thickness, k, c_damp, w_trans, mu, v_eps,
              g_vec, record_every, out):
    """Fixed-step simulation writing records every ``record_every`` steps
    (plus the final state). Returns -1 on success, else the index of the
    first step whose state went non-finite."""
    state = np.array(state0, dtype=float)
    row = 0
    for i in range(n_steps):
        a, b, a_dot, b_dot = shape_table[i]
        new_state, f_n_sum, shape_diag = step_arrays(
            state, a, b, a_dot, b_dot, dt, cos_th, sin_th, m_total, m_elem,
            half_thickness, k, c_damp, w_trans, mu, v_eps, g_vec
        )
        if i % record_every == 0:
            out[row, 0] = t0 + i * dt
            out[row, 1:14] = state
            out[row, 14] = f_n_sum
            out[row, 15:18] = shape_diag
            row += 1
        if not np.all(np.isfinite(new_state)):
            return i
        state = new_state
    # final record needs one more contact evaluation at the end state
    a, b, a_dot, b_dot = shape_table[n_steps]
    _, _, f_n_sum, _, _, shape_diag, _, _ = contact_pass(
        state, a, b, a_dot, b_dot, cos_th, sin_th, m_elem,
        half_thickness, k, c_damp, w_trans, mu, v_eps
    )
    out[row, 0] = t0 + n_steps * dt
    out[row, 1:14] = state
    out[row, 14] = f_n_sum
    out[row, 15:18] = shape_diag
    return -1
