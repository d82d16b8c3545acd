"""Compiled inner loops for the fixed-step integrators.

State is carried as the temperature rise above ambient so that the 1e-8 s
Euler increments are not swamped by rounding against ~300 K.

Return codes: 0 ok, 1 non-finite state.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def euler_intervals(theta, a_mat, u_on, q_on, g_amb, t_a, t_b, on, record, dt, out, energy):
    """Explicit Euler across consecutive intervals with piecewise-constant input.

    Each interval [t_a, t_b] is split into ceil(len/dt) equal steps so that
    switch instants and sample instants are hit exactly. ``energy`` holds
    [E_in, E_out] and is accumulated with the same left-point rule as the
    state update, so the discrete energy balance closes to rounding.
    """
    n = theta.shape[0]
    deriv = np.empty(n)
    k_out = 1
    last_ok = t_a[0] if t_a.shape[0] > 0 else 0.0
    for k in range(t_a.shape[0]):
        length = t_b[k] - t_a[k]
        nsteps = int(math.ceil(length / dt - 1e-9))
        if nsteps < 1:
            nsteps = 1
        h = length / nsteps
        src = 1.0 if on[k] else 0.0
        for _ in range(nsteps):
            flow_out = 0.0
            for i in range(n):
                acc = src * u_on[i]
                for j in range(n):
                    acc += a_mat[i, j] * theta[j]
                deriv[i] = acc
                flow_out += g_amb[i] * theta[i]
            energy[0] += h * src * q_on
            energy[1] += h * flow_out
            for i in range(n):
                theta[i] += h * deriv[i]
        for i in range(n):
            if not math.isfinite(theta[i]):
                return 1, last_ok, k_out
        last_ok = t_b[k]
        if record[k]:
            for i in range(n):
                out[k_out, i] = theta[i]
            k_out += 1
    return 0, last_ok, k_out


@njit(cache=True, nogil=True)
def propagate_intervals(z, props, index, t_b, record, n, out):
    """Apply precomputed exact propagators ``props[index[k]]`` to the augmented state."""
    m = z.shape[0]
    tmp = np.empty(m)
    k_out = 1
    last_ok = 0.0
    for k in range(index.shape[0]):
        p = props[index[k]]
        for i in range(m):
            acc = 0.0
            for j in range(m):
                acc += p[i, j] * z[j]
            tmp[i] = acc
        for i in range(m):
            z[i] = tmp[i]
        for i in range(n):
            if not math.isfinite(z[i]):
                return 1, last_ok, k_out
        last_ok = t_b[k]
        if record[k]:
            for i in range(n):
                out[k_out, i] = z[i]
            k_out += 1
    return 0, last_ok, k_out
