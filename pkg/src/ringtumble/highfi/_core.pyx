"""Compiled stepping kernel for the discrete-element ring simulator.

Same operations as the NumPy fallback, fused into one C loop over steps
and elements. Sequential accumulation keeps every run bitwise identical.
"""

from libc.math cimport asin, atan2, cos, sin, sqrt, tanh, isfinite

BACKEND = "compiled"


cdef void _contact_pass(
    double* p, double* R, double* v, double* w,
    double a, double b, double a_dot, double b_dot,
    double[::1] cos_th, double[::1] sin_th, Py_ssize_t n_elem,
    double m_elem, double half_thickness, double k, double c_damp,
    double w_trans, double mu, double v_eps,
    double* f_total, double* torque_b, double* f_n_sum,
    double* inertia, double* inertia_dot, double* shape_diag,
) noexcept nogil:
    cdef Py_ssize_t j
    cdef double phi, psi_lean, cf, sf, theta_dot, phi_dot, sr21
    cdef double c, s, cu, su, c2, s2, D, sqrtD, D32, r, r_dot, cx, cz, rr
    cdef double drda, drdb, drdu
    cdef double bx, by, bz, armx, army, armz, Pz, Vx, Vy, Vz
    cdef double depth, u, smooth, fn, speed, factor, fx, fy, fz
    cdef double sxx = 0.0, syy = 0.0, szz = 0.0, sxz = 0.0
    cdef double sdxx = 0.0, sdyy = 0.0, sdzz = 0.0, sdxz = 0.0
    cdef double shx = 0.0, shz = 0.0
    cdef double ftx = 0.0, fty = 0.0, ftz = 0.0
    cdef double twx = 0.0, twy = 0.0, twz = 0.0
    cdef double fns = 0.0

    # spin phase of the material relative to the non-spinning shape frame
    phi = atan2(-R[6], R[8])
    sr21 = R[7]
    if sr21 > 1.0:
        sr21 = 1.0
    elif sr21 < -1.0:
        sr21 = -1.0
    psi_lean = asin(sr21)
    cf = cos(phi)
    sf = sin(phi)
    theta_dot = (w[2] * cf - w[0] * sf) / cos(psi_lean)
    phi_dot = w[1] - theta_dot * sin(psi_lean)

    for j in range(n_elem):
        # element's angle in the non-spinning shape frame is theta_j - phi
        c = cos_th[j]
        s = sin_th[j]
        cu = c * cf + s * sf
        su = s * cf - c * sf
        c2 = cu * cu
        s2 = su * su
        D = b * b * c2 + a * a * s2
        sqrtD = sqrt(D)
        D32 = D * sqrtD
        r = a * b / sqrtD
        drda = b * b * b * c2 / D32
        drdb = a * a * a * s2 / D32
        drdu = -a * b * (a * a - b * b) * su * cu / D32
        r_dot = drda * a_dot + drdb * b_dot - drdu * phi_dot
        cx = r * c
        cz = r * s
        rr = r * r_dot

        sxx += cz * cz
        szz += cx * cx
        syy += r * r
        sxz += cx * cz
        sdxx += rr * s * s
        sdzz += rr * c * c
        sdyy += rr
        sdxz += rr * c * s
        shx += r * r * s2
        shz += r * r * c2

        # body-frame element velocity: omega x c + radial actuation
        bx = w[1] * cz + r_dot * c
        by = w[2] * cx - w[0] * cz
        bz = -w[1] * cx + r_dot * s

        armx = R[0] * cx + R[2] * cz
        army = R[3] * cx + R[5] * cz
        armz = R[6] * cx + R[8] * cz
        Pz = p[2] + armz
        Vz = v[2] + R[6] * bx + R[7] * by + R[8] * bz

        depth = half_thickness - Pz
        fn = 0.0
        fx = 0.0
        fy = 0.0
        fz = 0.0
        if depth > 0.0:
            u = depth / w_trans
            if u > 1.0:
                u = 1.0
            smooth = u * u * (3.0 - 2.0 * u)
            fn = smooth * (k * depth + c_damp * (-Vz))
            if fn < 0.0:
                fn = 0.0
            if fn > 0.0:
                Vx = v[0] + R[0] * bx + R[1] * by + R[2] * bz
                Vy = v[1] + R[3] * bx + R[4] * by + R[5] * bz
                speed = sqrt(Vx * Vx + Vy * Vy)
                if speed < 1e-12:
                    factor = mu * fn / v_eps
                else:
                    factor = mu * fn * tanh(speed / v_eps) / speed
                fx = -factor * Vx
                fy = -factor * Vy
            fz = fn
        fns += fn
        ftx += fx
        fty += fy
        ftz += fz
        twx += army * fz - armz * fy
        twy += armz * fx - armx * fz
        twz += armx * fy - army * fx

    f_total[0] = ftx
    f_total[1] = fty
    f_total[2] = ftz
    f_n_sum[0] = fns
    inertia[0] = m_elem * sxx
    inertia[1] = m_elem * syy
    inertia[2] = m_elem * szz
    inertia[3] = -m_elem * sxz
    inertia_dot[0] = 2.0 * m_elem * sdxx
    inertia_dot[1] = 2.0 * m_elem * sdyy
    inertia_dot[2] = 2.0 * m_elem * sdzz
    inertia_dot[3] = -2.0 * m_elem * sdxz
    shape_diag[0] = m_elem * shx
    shape_diag[1] = m_elem * syy
    shape_diag[2] = m_elem * shz
    # body torque = R^T @ world torque
    torque_b[0] = R[0] * twx + R[3] * twy + R[6] * twz
    torque_b[1] = R[1] * twx + R[4] * twy + R[7] * twz
    torque_b[2] = R[2] * twx + R[5] * twy + R[8] * twz


cdef inline void _quat_to_matrix(double* q, double* R) noexcept nogil:
    cdef double qw = q[0], qx = q[1], qy = q[2], qz = q[3]
    R[0] = 1.0 - 2.0 * (qy * qy + qz * qz)
    R[1] = 2.0 * (qx * qy - qw * qz)
    R[2] = 2.0 * (qx * qz + qw * qy)
    R[3] = 2.0 * (qx * qy + qw * qz)
    R[4] = 1.0 - 2.0 * (qx * qx + qz * qz)
    R[5] = 2.0 * (qy * qz - qw * qx)
    R[6] = 2.0 * (qx * qz - qw * qy)
    R[7] = 2.0 * (qy * qz + qw * qx)
    R[8] = 1.0 - 2.0 * (qx * qx + qy * qy)


def run_fixed(
    double[::1] state0, double t0, double dt, Py_ssize_t n_steps,
    double[:, ::1] shape_table, double[::1] cos_th, double[::1] sin_th,
    double m_total, double m_elem, double half_thickness,
    double k, double c_damp, double w_trans, double mu, double v_eps,
    double[::1] g_vec, Py_ssize_t record_every, double[:, ::1] out,
):
    """Fixed-step simulation; see the NumPy fallback for the contract."""
    cdef double p[3]
    cdef double q[4]
    cdef double v[3]
    cdef double w[3]
    cdef double R[9]
    cdef double f_total[3]
    cdef double torque_b[3]
    cdef double inertia[4]
    cdef double inertia_dot[4]
    cdef double shape_diag[3]
    cdef double f_n_sum = 0.0
    cdef double Iw_x, Iw_y, Iw_z, Idw_x, Idw_y, Idw_z
    cdef double rhs_x, rhs_y, rhs_z, det
    cdef double a, b, a_dot, b_dot
    cdef double angle, half, sfac, qw, qx, qy, qz, norm
    cdef double w_old, x_old, y_old, z_old
    cdef Py_ssize_t i, m, row = 0
    cdef Py_ssize_t n_elem = cos_th.shape[0]
    cdef bint finite

    for m in range(3):
        p[m] = state0[m]
        v[m] = state0[7 + m]
        w[m] = state0[10 + m]
    for m in range(4):
        q[m] = state0[3 + m]

    with nogil:
        for i in range(n_steps):
            a = shape_table[i, 0]
            b = shape_table[i, 1]
            a_dot = shape_table[i, 2]
            b_dot = shape_table[i, 3]
            _quat_to_matrix(q, R)
            _contact_pass(
                p, R, v, w, a, b, a_dot, b_dot, cos_th, sin_th, n_elem,
                m_elem, half_thickness, k, c_damp, w_trans, mu, v_eps,
                f_total, torque_b, &f_n_sum, inertia, inertia_dot, shape_diag,
            )
            if i % record_every == 0:
                out[row, 0] = t0 + i * dt
                for m in range(3):
                    out[row, 1 + m] = p[m]
                    out[row, 8 + m] = v[m]
                    out[row, 11 + m] = w[m]
                for m in range(4):
                    out[row, 4 + m] = q[m]
                out[row, 14] = f_n_sum
                for m in range(3):
                    out[row, 15 + m] = shape_diag[m]
                row += 1

            # I w_dot = torque - I_dot w - w x (I w) with the structured
            # body inertia [[ixx, 0, ixz], [0, iyy, 0], [ixz, 0, izz]]
            Iw_x = inertia[0] * w[0] + inertia[3] * w[2]
            Iw_y = inertia[1] * w[1]
            Iw_z = inertia[3] * w[0] + inertia[2] * w[2]
            Idw_x = inertia_dot[0] * w[0] + inertia_dot[3] * w[2]
            Idw_y = inertia_dot[1] * w[1]
            Idw_z = inertia_dot[3] * w[0] + inertia_dot[2] * w[2]
            rhs_x = torque_b[0] - Idw_x - (w[1] * Iw_z - w[2] * Iw_y)
            rhs_y = torque_b[1] - Idw_y - (w[2] * Iw_x - w[0] * Iw_z)
            rhs_z = torque_b[2] - Idw_z - (w[0] * Iw_y - w[1] * Iw_x)
            det = inertia[0] * inertia[2] - inertia[3] * inertia[3]
            w[0] += dt * (rhs_x * inertia[2] - rhs_z * inertia[3]) / det
            w[1] += dt * rhs_y / inertia[1]
            w[2] += dt * (rhs_z * inertia[0] - rhs_x * inertia[3]) / det
            for m in range(3):
                v[m] += dt * (f_total[m] / m_total + g_vec[m])
                p[m] += dt * v[m]

            # incremental rotation by dt * omega (exact exponential map)
            angle = dt * sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
            if angle < 1e-12:
                qw = 1.0
                qx = 0.5 * dt * w[0]
                qy = 0.5 * dt * w[1]
                qz = 0.5 * dt * w[2]
            else:
                half = 0.5 * angle
                sfac = sin(half) / angle * dt
                qw = cos(half)
                qx = sfac * w[0]
                qy = sfac * w[1]
                qz = sfac * w[2]
            # q <- q * dq, then renormalize
            w_old = q[0]
            x_old = q[1]
            y_old = q[2]
            z_old = q[3]
            q[0] = w_old * qw - x_old * qx - y_old * qy - z_old * qz
            q[1] = w_old * qx + x_old * qw + y_old * qz - z_old * qy
            q[2] = w_old * qy - x_old * qz + y_old * qw + z_old * qx
            q[3] = w_old * qz + x_old * qy - y_old * qx + z_old * qw
            norm = sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
            for m in range(4):
                q[m] /= norm

            finite = True
            for m in range(3):
                if not (isfinite(p[m]) and isfinite(v[m]) and isfinite(w[m])):
                    finite = False
            if not finite:
                with gil:
                    return i

        # final record at t0 + n_steps * dt
        a = shape_table[n_steps, 0]
        b = shape_table[n_steps, 1]
        a_dot = shape_table[n_steps, 2]
        b_dot = shape_table[n_steps, 3]
        _quat_to_matrix(q, R)
        _contact_pass(
            p, R, v, w, a, b, a_dot, b_dot, cos_th, sin_th, n_elem,
            m_elem, half_thickness, k, c_damp, w_trans, mu, v_eps,
            f_total, torque_b, &f_n_sum, inertia, inertia_dot, shape_diag,
        )
        out[row, 0] = t0 + n_steps * dt
        for m in range(3):
            out[row, 1 + m] = p[m]
            out[row, 8 + m] = v[m]
            out[row, 11 + m] = w[m]
        for m in range(4):
            out[row, 4 + m] = q[m]
        out[row, 14] = f_n_sum
        for m in range(3):
            out[row, 15 + m] = shape_diag[m]

    return -1
