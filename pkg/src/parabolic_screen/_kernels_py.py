"""Pure-Python/numpy versions of the hot kernels.

These mirror ``_ckernels.pyx`` one for one and are used when the compiled
extension is unavailable or disabled.
"""

import numpy as np


def convolution_recursion(g, kern, coef, strength):
    """Solve c_n = coef * (g_n + strength * sum_{l=1}^{n-1} c_l kern_{n-l}).

    ``g`` and ``kern`` are indexed from 0 with entry 0 unused; the returned
    array has the same length with c[0] = 0.
    """
    g = np.asarray(g, dtype=complex)
    kern = np.asarray(kern, dtype=complex)
    n_max = g.shape[0] - 1
    c = np.zeros(n_max + 1, dtype=complex)
    coef = complex(coef)
    strength = complex(strength)
    for n in range(1, n_max + 1):
        acc = np.dot(c[1:n], kern[n - 1:0:-1]) if n > 1 else 0.0
        c[n] = coef * (g[n] + strength * acc)
    return c


def polylog_series(s, z, tol=1e-17, max_terms=200000):
    """Direct series sum_{n>=1} z^n / n^s, elementwise, for |z| < 1."""
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = np.zeros(flat.shape, dtype=complex)
    r = float(np.max(np.abs(flat))) if flat.size else 0.0
    if r == 0.0:
        return out.reshape(z.shape)
    n_terms = int(min(max_terms, max(8, np.ceil(np.log(tol) / np.log(r)) + 2))) if r < 1 else max_terms
    power = flat.copy()
    for n in range(1, n_terms + 1):
        out += power * n ** (-s)
        power = power * flat
    return out.reshape(z.shape)
