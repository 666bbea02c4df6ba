"""Pure numpy implementations of the hot kernels.

Signatures mirror ``_kernels.pyx`` exactly: outputs are written into
caller-provided arrays and scalars are returned.
"""

import numpy as np
import scipy.linalg

NAME = "numpy"


def sz(w, rhomu, s, z):
    # q = s + z; the small root is formed as a product to avoid cancellation
    q = np.hypot(w, 2.0 * np.sqrt(rhomu))
    big = 0.5 * (q + np.abs(w))
    small = rhomu / big
    neg = w < 0
    np.copyto(s, np.where(neg, big, small))
    np.copyto(z, np.where(neg, small, big))


def evaluate(A, b, c, x, y, mu, rho, g, r):
    a = A.T @ y - c
    rx = rho * x
    w = a + rx
    n = w.shape[0]
    s = np.empty(n)
    z = np.empty(n)
    sz(w, rho * mu, s, z)
    # s - c + A'y equals z - rho*x; pick the form without cancellation
    np.copyto(r, np.where(w < 0, z - rx, s + a))
    np.copyto(g, A @ z - rho * b)
    h = -rho * mu * np.log(s) + 0.5 * r * (z + rx)
    return float(-rho * (b @ y) + h.sum())


def cho_solve(L, rhs, out):
    out[:] = scipy.linalg.cho_solve((L, True), rhs, check_finite=False)
