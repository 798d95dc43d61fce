"""NumPy implementations of the hot loops.

These are the reference versions; ``_ckernels.pyx`` mirrors them in Cython.
"""

import numpy as np


def _step_coeffs(n_prev, n_next):
    rho = n_prev / n_next
    return 0.5 * (1.0 + rho), 0.5 * (rho - 1.0)


def recursion(k, n, w):
    """Run the interface recursion for every wavenumber in ``k``.

    Region ``j`` carries ``B_j(x) = beta_j * exp(i k n_j (x - s_j))`` with
    ``s_j`` its left edge and ``beta_0 = 1``.  Returns ``beta`` with shape
    ``(len(k), len(n))``.
    """
    k = np.asarray(k, dtype=float)
    R = len(n)
    beta = np.empty((k.size, R), dtype=complex)
    beta[:, 0] = 1.0
    for j in range(1, R):
        b = beta[:, j - 1] * np.exp(1j * k * n[j - 1] * w[j - 1])
        p, q = _step_coeffs(n[j - 1], n[j])
        beta[:, j] = p * b + q * np.conj(b)
    return beta


def outgoing(k, n, w):
    """Only the last column of :func:`recursion`, without storing the rest."""
    k = np.asarray(k, dtype=float)
    beta = np.ones(k.size, dtype=complex)
    for j in range(1, len(n)):
        b = beta * np.exp(1j * k * n[j - 1] * w[j - 1])
        p, q = _step_coeffs(n[j - 1], n[j])
        beta = p * b + q * np.conj(b)
    return beta


def rk4_continuum(c0, b0, eta, weights, detuning, dt, n_steps, stride):
    """Classical RK4 for the discretized single-excitation continuum.

    Equations (atom rotating frame)::

        dc/dt   = sum_k w_k eta_k b_k
        db_k/dt = -i detuning_k b_k - conj(eta_k) c

    Returns ``(c_samples, s_samples, norm_samples, b_final)`` where ``s`` is
    ``sum_k w_k eta_k b_k``; samples are taken every ``stride`` steps and at
    the final step.
    """
    b = np.array(b0, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    weta = np.asarray(weights, dtype=float) * eta
    ceta = np.conj(eta)
    mid = -1j * np.asarray(detuning, dtype=float)
    w = np.asarray(weights, dtype=float)
    c = complex(c0)

    n_samples = n_steps // stride + 1 + (1 if n_steps % stride else 0)
    cs = np.empty(n_samples, dtype=complex)
    ss = np.empty(n_samples, dtype=complex)
    ns = np.empty(n_samples)

    def record(i):
        cs[i] = c
        ss[i] = weta @ b
        ns[i] = abs(c) ** 2 + w @ (b.real**2 + b.imag**2)

    record(0)
    i = 1
    h2 = 0.5 * dt
    for step in range(1, n_steps + 1):
        k1c = weta @ b
        k1b = mid * b - ceta * c
        bt = b + h2 * k1b
        ct = c + h2 * k1c
        k2c = weta @ bt
        k2b = mid * bt - ceta * ct
        bt = b + h2 * k2b
        ct = c + h2 * k2c
        k3c = weta @ bt
        k3b = mid * bt - ceta * ct
        bt = b + dt * k3b
        ct = c + dt * k3c
        k4c = weta @ bt
        k4b = mid * bt - ceta * ct
        c = c + dt / 6.0 * (k1c + 2 * k2c + 2 * k3c + k4c)
        b = b + dt / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b)
        if step % stride == 0 or step == n_steps:
            record(i)
            i += 1
    return cs, ss, ns, b
