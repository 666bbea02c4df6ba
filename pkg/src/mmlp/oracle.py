"""Brute-force reference solvers for small problems.

Nothing here shares code with the solver under test: LPs are solved by
enumerating every basis, the least-violation point by an active-set
Newton iteration, and derivatives by central differences.
"""

from __future__ import annotations

import dataclasses
import enum
import itertools
import math
from typing import Callable

import numpy as np

from .model import DualLP, validate

MAX_N = 25
MAX_M = 10
#: feasibility and tightness tolerance used throughout the oracle
TOL = 1e-9
#: bases whose square block has a larger condition number are skipped
MAX_COND = 1e12
_CHUNK = 20000


class TooLarge(ValueError):
    """Problem exceeds the enumeration guard (n <= 25, m <= 10)."""


class OracleStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclasses.dataclass(frozen=True)
class OracleSolution:
    status: OracleStatus
    y_opt: np.ndarray | None
    obj: float
    active_set: tuple[int, ...]
    x_opt: np.ndarray | None = None
    basis: tuple[int, ...] | None = None


def _guard(p: DualLP) -> None:
    validate(p)
    if p.n > MAX_N or p.m > MAX_M:
        raise TooLarge(f"enumeration guard exceeded: m={p.m}, n={p.n}")


def _bases(n: int, m: int):
    """Yield arrays of m-subsets of range(n) in lexicographic order, chunked."""
    it = itertools.combinations(range(n), m)
    while True:
        chunk = list(itertools.islice(it, _CHUNK))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.intp)


def _basic_solutions(A, b, c, idx):
    """For each basis in ``idx`` return (ok, y, x_B) with ``A_B' y = c_B`` and ``A_B x_B = b``."""
    M = np.transpose(A[:, idx], (1, 0, 2))  # (K, m, m), M[k] = A[:, idx[k]]
    ok = np.linalg.cond(M) < MAX_COND
    y = np.full((len(idx), A.shape[0]), np.nan)
    xb = np.full((len(idx), A.shape[0]), np.nan)
    if ok.any():
        Mk = M[ok]
        y[ok] = np.linalg.solve(np.transpose(Mk, (0, 2, 1)), c[idx[ok]][..., None])[..., 0]
        xb[ok] = np.linalg.solve(Mk, np.broadcast_to(b, (len(Mk), len(b)))[..., None])[..., 0]
    return ok, y, xb


def _feasible_y(A, c, y):
    slack = c[None, :] - y @ A
    return np.all(slack >= -TOL * (1.0 + np.abs(c))[None, :], axis=1)


def _confirm_empty(p: DualLP) -> bool:
    """Phase-one check: ``min t s.t. A'y - t <= c, t >= 0`` has a positive optimum.

    The auxiliary problem is always feasible and bounded below, so its
    optimum sits at a vertex and enumeration finds it.
    """
    m, n = p.m, p.n
    A1 = np.vstack([p.A, -np.ones((1, n))])
    A1 = np.hstack([A1, np.eye(m + 1)[:, -1:] * -1.0])  # column for -t <= 0
    c1 = np.append(p.c, 0.0)
    best = math.inf
    for idx in _bases(n + 1, m + 1):
        ok, y, _ = _basic_solutions(A1, np.zeros(m + 1), c1, idx)
        ok &= _feasible_y(A1, c1, np.nan_to_num(y))
        if ok.any():
            best = min(best, float(np.min(y[ok, -1])))
    return best > TOL


def solve_by_vertices(p: DualLP) -> OracleSolution:
    """Solve ``min -b'y s.t. A'y <= c`` by enumerating every basis.

    A basis ``B`` gives the dual vertex ``y = A_B^{-T} c_B`` and the primal
    point ``x_B = A_B^{-1} b``. The problem is optimal iff some basis is
    feasible for both, unbounded iff vertices exist but no basis is primal
    feasible (Farkas), and infeasible iff there are no vertices. Raises
    :class:`TooLarge` past the guard and ``ValueError`` if ``A`` lacks full
    row rank (the feasible set then has no vertices to enumerate).
    """
    _guard(p)
    A, b, c = p.A, p.b, p.c
    m, n = A.shape
    if np.linalg.matrix_rank(A) < m:
        raise ValueError("vertex enumeration needs A with full row rank")

    best_obj, best_y, best_basis = math.inf, None, None
    any_primal = False
    pairs = []  # bases feasible for both problems: (obj, basis, y, x_B)
    xtol = TOL * (1.0 + np.abs(b).max())
    for idx in _bases(n, m):
        ok, y, xb = _basic_solutions(A, b, c, idx)
        dual_ok = ok & _feasible_y(A, c, np.nan_to_num(y))
        primal_ok = ok & np.all(xb >= -xtol, axis=1)
        any_primal |= bool(primal_ok.any())
        if dual_ok.any():
            obj = -(y[dual_ok] @ b)
            j = int(np.argmin(obj))
            if obj[j] < best_obj - 1e-12 * (1.0 + abs(obj[j])):
                best_obj = float(obj[j])
                best_y = y[dual_ok][j]
                best_basis = tuple(int(i) for i in idx[dual_ok][j])
        both = np.flatnonzero(dual_ok & primal_ok)
        for j in both:
            pairs.append((float(-(y[j] @ b)), tuple(int(i) for i in idx[j]), y[j], xb[j]))

    if best_y is None:
        if not _confirm_empty(p):
            raise RuntimeError("no vertex found but phase one reports feasibility")
        return OracleSolution(OracleStatus.INFEASIBLE, None, math.inf, ())
    if not any_primal:
        return OracleSolution(OracleStatus.UNBOUNDED, None, -math.inf, ())

    active = tuple(int(i) for i in np.flatnonzero(np.abs(c - A.T @ best_y) <= TOL))
    x_opt, basis = None, best_basis
    objtol = 1e-9 * (1.0 + abs(best_obj))
    for obj, B, _, xB in pairs:  # lexicographic order of B
        if abs(obj - best_obj) <= objtol:
            x_opt = np.zeros(n)
            x_opt[list(B)] = np.maximum(xB, 0.0)
            basis = B
            break
    return OracleSolution(OracleStatus.OPTIMAL, best_y, best_obj, active, x_opt, basis)


def _violation(A, c, y):
    return np.maximum(A.T @ y - c, 0.0)


def _exact_step(a: np.ndarray, d: np.ndarray) -> float:
    """Minimizer over t >= 0 of ``sum max(a_i + t d_i, 0)^2 / 2``.

    The derivative is nondecreasing and piecewise linear, so walk its
    breakpoints until it changes sign.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        bp = np.where(d != 0.0, -a / d, np.inf)
    cuts = np.unique(np.concatenate([[0.0], bp[(bp > 0) & np.isfinite(bp)]]))
    cuts = np.append(cuts, np.inf)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        mid = lo + 1.0 if math.isinf(hi) else 0.5 * (lo + hi)
        on = a + mid * d > 0
        # derivative on this segment is alpha + beta * t
        alpha, beta = float(a[on] @ d[on]), float(d[on] @ d[on])
        if beta > 0.0:
            t = -alpha / beta
            if t <= hi:
                return max(lo, t)
        elif alpha >= 0.0:
            return lo
    return float(cuts[-2])


def least_violation(p: DualLP, *, tol: float = 1e-10, max_iter: int = 1000):
    """Minimize ``0.5 * ||max(A'y - c, 0)||^2``; return ``(y_star, violation_norm)``.

    Each iteration takes the Gauss-Newton direction for the currently
    violated rows and an exact line search along the piecewise quadratic.
    Stops once ``||A max(A'y - c, 0)|| <= tol``.
    """
    _guard(p)
    A, c = p.A, p.c
    y = np.zeros(p.m)
    for _ in range(max_iter):
        v = _violation(A, c, y)
        g = A @ v
        if np.linalg.norm(g) <= tol:
            break
        on = v > 0
        AJ = A[:, on]
        d = -np.linalg.lstsq(AJ @ AJ.T, g, rcond=None)[0]
        if not g @ d < 0:
            d = -g
        t = _exact_step(A.T @ y - c, A.T @ d)
        if t == 0.0:
            d = -g
            t = _exact_step(A.T @ y - c, A.T @ d)
        y = y + t * d
    else:
        raise RuntimeError("least_violation did not reach the stationarity tolerance")
    return y, float(np.linalg.norm(_violation(A, c, y)))


def check_assumption_51(p: DualLP, sol: OracleSolution, x_star) -> bool:
    """Nondegeneracy test: exactly m tight constraints, strict complementarity, full rank.

    True iff the tight set has size m, every multiplier on it exceeds
    1e-9, every other slack exceeds 1e-9 and ``A_I A_I'`` is positive
    definite.
    """
    if sol.status is not OracleStatus.OPTIMAL:
        return False
    x_star = np.asarray(x_star, dtype=np.float64)
    act = list(sol.active_set)
    if len(act) != p.m:
        return False
    if np.min(x_star[act]) <= TOL:
        return False
    rest = np.setdiff1d(np.arange(p.n), act)
    slack = p.c - p.A.T @ sol.y_opt
    if rest.size and np.min(slack[rest]) <= TOL:
        return False
    AI = p.A[:, act]
    B = AI @ AI.T
    try:
        L = np.linalg.cholesky(B)
    except np.linalg.LinAlgError:
        return False
    return bool(np.min(np.diag(L)) ** 2 > 1e-12 * np.max(np.diag(B)))


def fd_gradient(fun: Callable[[np.ndarray], float], v, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    v = np.asarray(v, dtype=np.float64)
    out = np.empty_like(v)
    for i in range(v.size):
        e = np.zeros_like(v)
        e[i] = h
        out[i] = (fun(v + e) - fun(v - e)) / (2.0 * h)
    return out


def fd_directional(fun: Callable[[np.ndarray], np.ndarray], v, u, h: float = 1e-5):
    """Central difference of ``fun`` at ``v`` along ``u``; works for vector output."""
    v = np.asarray(v, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    return (np.asarray(fun(v + h * u)) - np.asarray(fun(v - h * u))) / (2.0 * h)
