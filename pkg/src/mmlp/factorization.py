"""One-time Cholesky factorization of the Gram matrix ``A A'``.

Every inner iteration of the solver reuses the factor built here, so the
cost of the whole run is one dense factorization plus triangular solves.
"""

from __future__ import annotations

import dataclasses

import numpy as np
import scipy.linalg

from ._backend import kernels
from .model import DualLP, validate

#: Relative pivot threshold below which ``A A'`` is declared singular.
EPS_PD = 1e-12


class RankDeficient(np.linalg.LinAlgError):
    """``A A'`` is not numerically positive definite (rank(A) < m)."""


@dataclasses.dataclass(frozen=True)
class GramFactor:
    """Lower-triangular ``L`` with ``A A' = L L'`` and the spectral condition number."""

    m: int
    factor: np.ndarray
    kappa: float
    lambda_min: float
    lambda_max: float
    gram: np.ndarray

    def solve(self, r: np.ndarray) -> np.ndarray:
        return solve_gram(self, r)


def factorize(p: DualLP) -> GramFactor:
    validate(p)
    A = p.A
    gram = A @ A.T
    scale = float(np.max(np.diag(gram)))
    try:
        L = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient("A A' is not positive definite") from exc
    pivots = np.diag(L) ** 2
    if scale <= 0.0 or np.min(pivots) <= EPS_PD * scale:
        raise RankDeficient(
            f"A A' is numerically singular (min pivot {np.min(pivots):.3e}, "
            f"max diagonal {scale:.3e})"
        )
    eig = np.linalg.eigvalsh(gram)
    lmin, lmax = float(eig[0]), float(eig[-1])
    if lmin <= 0.0:
        raise RankDeficient(f"A A' has non-positive eigenvalue {lmin:.3e}")
    L = np.ascontiguousarray(L)
    L.setflags(write=False)
    gram.setflags(write=False)
    return GramFactor(
        m=p.m,
        factor=L,
        kappa=max(lmax / lmin, 1.0),
        lambda_min=lmin,
        lambda_max=lmax,
        gram=gram,
    )


def solve_gram(f: GramFactor, r) -> np.ndarray:
    """Return ``d`` with ``A A' d = r`` using two triangular solves."""
    r = np.ascontiguousarray(r, dtype=np.float64)
    out = np.empty_like(r)
    kernels.cho_solve(f.factor, r, out)
    return out


def norm_gram(f: GramFactor, v) -> float:
    """``sqrt(v' A A' v)``, computed as ``||L' v||``."""
    v = np.asarray(v, dtype=np.float64)
    return float(np.linalg.norm(f.factor.T @ v))


def norm_gram_inv(f: GramFactor, v) -> float:
    """``sqrt(v' (A A')^{-1} v)``, computed as ``||L^{-1} v||``."""
    v = np.asarray(v, dtype=np.float64)
    w = scipy.linalg.solve_triangular(f.factor, v, lower=True, check_finite=False)
    return float(np.linalg.norm(w))
