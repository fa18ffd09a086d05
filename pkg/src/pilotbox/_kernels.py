"""Compiled kernels for guided-trajectory integration.

The right-hand side of the guidance ODE is evaluated in a numba kernel that
rebuilds, per configuration, the per-axis mode values via the angle-addition
recurrence and the time phases exp(-i n^2 tau) via an incremental odd-power
recurrence.  Cost per evaluation is linear in the number of state terms.

The stepper is the Dormand-Prince 5(4) pair with the first-same-as-last
property.  Steps are capped so that every readout time is hit exactly; a
stage that lands outside the box or inside the node guard is retried with
half the step (a "rescue") rather than being extrapolated through.
"""

import math

import numpy as np
from numba import njit

_HALF_PI = math.pi / 2.0
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

STATUS_OK = 0
STATUS_FAILED = 1

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
)
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = (
    35.0 / 384.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
)
# fifth-order minus embedded fourth-order weights
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)


@njit(cache=True, nogil=True)
def _velocity(
    modes,
    coeff,
    t_ref,
    axis_cutoffs,
    nmax,
    t_phys,
    q,
    direction,
    node_eps,
    cos_t,
    sin_t,
    ph,
    grad,
    fax,
    dfax,
    v_out,
):
    """Fill v_out with direction * guiding velocity; False on box exit/node."""
    ndim = q.shape[0]
    for d in range(ndim):
        if not (-_HALF_PI < q[d] < _HALF_PI):
            return False

    for d in range(ndim):
        c1 = math.cos(q[d])
        s1 = math.sin(q[d])
        cm = c1
        sm = s1
        top = axis_cutoffs[d]
        for m in range(1, top + 1):
            cos_t[d, m] = cm
            sin_t[d, m] = sm
            cm, sm = cm * c1 - sm * s1, sm * c1 + cm * s1

    tau = t_phys - t_ref
    z = complex(math.cos(tau), -math.sin(tau))
    ph[0] = 1.0 + 0.0j
    if nmax >= 1:
        z2 = z * z
        w = z
        odd_pow = z * z2
        ph[1] = w
        for m in range(2, nmax + 1):
            w = w * odd_pow  # z^{(m-1)^2} * z^{2m-1} = z^{m^2}
            ph[m] = w
            odd_pow = odd_pow * z2

    psi = 0.0 + 0.0j
    for d in range(ndim):
        grad[d] = 0.0 + 0.0j
    nterms = modes.shape[0]
    for kt in range(nterms):
        phase = 1.0 + 0.0j
        for d in range(ndim):
            n = modes[kt, d]
            if n & 1:
                fax[d] = _SQRT_2_OVER_PI * cos_t[d, n]
                dfax[d] = -_SQRT_2_OVER_PI * n * sin_t[d, n]
            else:
                fax[d] = _SQRT_2_OVER_PI * sin_t[d, n]
                dfax[d] = _SQRT_2_OVER_PI * n * cos_t[d, n]
            phase = phase * ph[n]
        wk = coeff[kt] * phase
        prod = 1.0
        for d in range(ndim):
            prod *= fax[d]
        psi += wk * prod
        for d in range(ndim):
            g = dfax[d]
            for d2 in range(ndim):
                if d2 != d:
                    g *= fax[d2]
            grad[d] += wk * g

    a2 = psi.real * psi.real + psi.imag * psi.imag
    if a2 <= node_eps:
        return False
    for d in range(ndim):
        gd = grad[d]
        v_out[d] = direction * 2.0 * (gd.imag * psi.real - gd.real * psi.imag) / a2
    return True


@njit(cache=True, nogil=True)
def integrate_readouts(
    modes,
    coeff,
    t_ref,
    axis_cutoffs,
    q0,
    t0,
    out_times,
    direction,
    rel_tol,
    abs_tol,
    min_step,
    node_eps,
    max_steps,
    h0,
    out_pos,
):
    """Integrate one trajectory from (t0, q0), writing positions at out_times.

    out_times must be strictly monotone in ``direction`` starting after t0.
    Returns (status, rescues, steps).  On STATUS_FAILED the remaining rows of
    out_pos are unspecified.
    """
    ndim = q0.shape[0]
    n_out = out_times.shape[0]
    nmax = 0
    for d in range(ndim):
        if axis_cutoffs[d] > nmax:
            nmax = axis_cutoffs[d]

    cos_t = np.empty((ndim, nmax + 1))
    sin_t = np.empty((ndim, nmax + 1))
    ph = np.empty(nmax + 1, dtype=np.complex128)
    grad = np.empty(ndim, dtype=np.complex128)
    fax = np.empty(ndim)
    dfax = np.empty(ndim)
    k = np.empty((7, ndim))
    ytmp = np.empty(ndim)
    ynew = np.empty(ndim)
    y = q0.copy()

    s_out = np.empty(n_out)
    for j in range(n_out):
        s_out[j] = direction * (out_times[j] - t0)

    steps = 0
    rescues = 0
    s = 0.0
    ok = _velocity(
        modes, coeff, t_ref, axis_cutoffs, nmax, t0, y, direction,
        node_eps, cos_t, sin_t, ph, grad, fax, dfax, k[0],
    )
    if not ok:
        return STATUS_FAILED, rescues, steps

    h = h0
    iout = 0
    while iout < n_out:
        if steps >= max_steps:
            return STATUS_FAILED, rescues, steps
        steps += 1

        target = s_out[iout]
        h_try = h
        capped = False
        if s + h_try >= target:
            h_try = target - s
            capped = True

        stage_ok = True
        # stage 2
        for d in range(ndim):
            ytmp[d] = y[d] + h_try * (_A21 * k[0, d])
        stage_ok = _velocity(
            modes, coeff, t_ref, axis_cutoffs, nmax,
            t0 + direction * (s + _C2 * h_try), ytmp, direction,
            node_eps, cos_t, sin_t, ph, grad, fax, dfax, k[1],
        )
        # stage 3
        if stage_ok:
            for d in range(ndim):
                ytmp[d] = y[d] + h_try * (_A31 * k[0, d] + _A32 * k[1, d])
            stage_ok = _velocity(
                modes, coeff, t_ref, axis_cutoffs, nmax,
                t0 + direction * (s + _C3 * h_try), ytmp, direction,
                node_eps, cos_t, sin_t, ph, grad, fax, dfax, k[2],
            )
        # stage 4
        if stage_ok:
            for d in range(ndim):
                ytmp[d] = y[d] + h_try * (
                    _A41 * k[0, d] + _A42 * k[1, d] + _A43 * k[2, d]
                )
            stage_ok = _velocity(
                modes, coeff, t_ref, axis_cutoffs, nmax,
                t0 + direction * (s + _C4 * h_try), ytmp, direction,
                node_eps, cos_t, sin_t, ph, grad, fax, dfax, k[3],
            )
        # stage 5
        if stage_ok:
            for d in range(ndim):
                ytmp[d] = y[d] + h_try * (
                    _A51 * k[0, d] + _A52 * k[1, d] + _A53 * k[2, d] + _A54 * k[3, d]
                )
            stage_ok = _velocity(
                modes, coeff, t_ref, axis_cutoffs, nmax,
                t0 + direction * (s + _C5 * h_try), ytmp, direction,
                node_eps, cos_t, sin_t, ph, grad, fax, dfax, k[4],
            )
        # stage 6
        if stage_ok:
            for d in range(ndim):
                ytmp[d] = y[d] + h_try * (
                    _A61 * k[0, d]
                    + _A62 * k[1, d]
                    + _A63 * k[2, d]
                    + _A64 * k[3, d]
                    + _A65 * k[4, d]
                )
            stage_ok = _velocity(
                modes, coeff, t_ref, axis_cutoffs, nmax,
                t0 + direction * (s + h_try), ytmp, direction,
                node_eps, cos_t, sin_t, ph, grad, fax, dfax, k[5],
            )
        # fifth-order solution and FSAL stage
        if stage_ok:
            for d in range(ndim):
                ynew[d] = y[d] + h_try * (
                    _B1 * k[0, d]
                    + _B3 * k[2, d]
                    + _B4 * k[3, d]
                    + _B5 * k[4, d]
                    + _B6 * k[5, d]
                )
            stage_ok = _velocity(
                modes, coeff, t_ref, axis_cutoffs, nmax,
                t0 + direction * (s + h_try), ynew, direction,
                node_eps, cos_t, sin_t, ph, grad, fax, dfax, k[6],
            )

        if not stage_ok:
            # a stage left the box or hit the node guard: halve and retry
            rescues += 1
            h = 0.5 * h_try
            if h < min_step:
                return STATUS_FAILED, rescues, steps
            continue

        err = 0.0
        for d in range(ndim):
            e = h_try * (
                _E1 * k[0, d]
                + _E3 * k[2, d]
                + _E4 * k[3, d]
                + _E5 * k[4, d]
                + _E6 * k[5, d]
                + _E7 * k[6, d]
            )
            ay = abs(y[d])
            an = abs(ynew[d])
            sc = abs_tol + rel_tol * (ay if ay > an else an)
            r = e / sc
            err += r * r
        err = math.sqrt(err / ndim)

        if err <= 1.0:
            s = target if capped else s + h_try
            for d in range(ndim):
                y[d] = ynew[d]
                k[0, d] = k[6, d]
            if capped:
                for d in range(ndim):
                    out_pos[iout, d] = y[d]
                iout += 1
            if err == 0.0:
                fac = 5.0
            else:
                fac = 0.9 * err ** -0.2
                if fac > 5.0:
                    fac = 5.0
                elif fac < 0.2:
                    fac = 0.2
            if not capped:
                h = h_try * fac
        else:
            fac = 0.9 * err ** -0.2
            if fac < 0.2:
                fac = 0.2
            h = h_try * fac
            if h < min_step:
                return STATUS_FAILED, rescues, steps

    return STATUS_OK, rescues, steps
