"""Smooth barrier augmented Lagrangian of the dual-form LP.

For ``w = rho*x - c + A'y`` the slack and multiplier maps are the two roots

    s = (sqrt(w^2 + 4 rho mu) - w) / 2,    z = (sqrt(w^2 + 4 rho mu) + w) / 2,

so that ``s*z = rho*mu`` and ``s - z = -w``. The function itself is

    L(y, x) = -rho b'y + sum_i ( -rho mu log s_i + z_i^2/2 - rho^2 x_i^2/2 ),

strictly convex in ``y`` and strictly concave in ``x``. Everything in this
module is a pure function of ``(y, x, mu, rho)``.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from ._fallback import sz as _sz_into
from .model import DualLP


@dataclasses.dataclass(frozen=True)
class SbalParams:
    mu: float
    rho: float

    def __post_init__(self):
        if not (self.mu > 0 and np.isfinite(self.mu)):
            raise ValueError(f"mu must be positive and finite, got {self.mu}")
        if not (self.rho > 0 and np.isfinite(self.rho)):
            raise ValueError(f"rho must be positive and finite, got {self.rho}")


@dataclasses.dataclass(frozen=True)
class SbalEval:
    s: np.ndarray
    z: np.ndarray
    L: float
    grad_y: np.ndarray
    grad_x: np.ndarray
    phi: float
    R: float


def _vec(v) -> np.ndarray:
    return np.asarray(v, dtype=np.float64)


def stable_sz(w, rhomu: float) -> tuple[np.ndarray, np.ndarray]:
    """Both roots for a given ``w``, without cancellation for any sign of ``w``."""
    w = np.atleast_1d(_vec(w))
    s = np.empty_like(w)
    z = np.empty_like(w)
    _sz_into(w, rhomu, s, z)
    return s, z


def _parts(p: DualLP, y, x, pr: SbalParams):
    y, x = _vec(y), _vec(x)
    a = p.A.T @ y - p.c
    rx = pr.rho * x
    w = a + rx
    s, z = stable_sz(w, pr.rho * pr.mu)
    # s - c + A'y, which also equals z - rho*x
    r = np.where(w < 0, z - rx, s + a)
    return y, x, s, z, r, rx


def eval_sz(p: DualLP, y, x, pr: SbalParams) -> tuple[np.ndarray, np.ndarray]:
    _, _, s, z, _, _ = _parts(p, y, x, pr)
    return s, z


def eval_L(p: DualLP, y, x, pr: SbalParams) -> float:
    y, _, s, z, r, rx = _parts(p, y, x, pr)
    # z^2 - (rho x)^2 written as r * (z + rho x)
    h = -pr.rho * pr.mu * np.log(s) + 0.5 * r * (z + rx)
    return float(-pr.rho * (p.b @ y) + h.sum())


def grad_y(p: DualLP, y, x, pr: SbalParams) -> np.ndarray:
    _, z = eval_sz(p, y, x, pr)
    return p.A @ z - pr.rho * p.b


def grad_x(p: DualLP, y, x, pr: SbalParams) -> np.ndarray:
    *_, r, _ = _parts(p, y, x, pr)
    return pr.rho * r


def curvature_weights(p: DualLP, y, x, pr: SbalParams) -> np.ndarray:
    """Diagonal of ``(S+Z)^{-1} Z``; every entry lies strictly inside (0, 1)."""
    s, z = eval_sz(p, y, x, pr)
    return z / (s + z)


def hess_y_action(p: DualLP, y, x, pr: SbalParams, v) -> np.ndarray:
    """``A (S+Z)^{-1} Z A' v`` without forming the m-by-m Hessian."""
    d = curvature_weights(p, y, x, pr)
    return p.A @ (d * (p.A.T @ _vec(v)))


def eval_phi_R(p: DualLP, y, x, pr: SbalParams) -> tuple[float, float]:
    """Split ``L = rho*phi + R^2/2`` into its barrier-Lagrangian and residual parts."""
    y, x, s, _, r, _ = _parts(p, y, x, pr)
    phi = -(p.b @ y) - pr.mu * np.log(s).sum() + x @ r
    return float(phi), float(np.linalg.norm(r))


def evaluate(p: DualLP, y, x, pr: SbalParams) -> SbalEval:
    y, x, s, z, r, rx = _parts(p, y, x, pr)
    h = -pr.rho * pr.mu * np.log(s) + 0.5 * r * (z + rx)
    L = float(-pr.rho * (p.b @ y) + h.sum())
    phi = float(-(p.b @ y) - pr.mu * np.log(s).sum() + x @ r)
    return SbalEval(
        s=s,
        z=z,
        L=L,
        grad_y=p.A @ z - pr.rho * p.b,
        grad_x=pr.rho * r,
        phi=phi,
        R=float(np.linalg.norm(r)),
    )
