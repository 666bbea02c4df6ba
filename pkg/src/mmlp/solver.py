"""Primal-dual majorization-minimization driver.

Each outer round minimizes the barrier augmented Lagrangian over ``y`` by
repeatedly minimizing its quadratic majorizer (curvature ``A A'``), then
takes the exact maximizer of the quadratic minorizer in ``x``. Only the
Gram factor built once by :func:`mmlp.factorization.factorize` is needed.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import Callable, NamedTuple

import numpy as np

from . import sbal
from . import _backend
from .factorization import GramFactor, factorize, solve_gram
from .model import DualLP
from .sbal import SbalParams


class Status(enum.Enum):
    KKT = "KktPoint"
    FRITZ_JOHN = "FritzJohnPoint"
    INFEASIBLE = "InfeasibleStationary"
    UNBOUNDED = "DualLpUnbounded"
    BUDGET = "BudgetExhausted"


class FailureReason(enum.Enum):
    UNBOUNDED_SUSPECTED = "DualLpUnboundedSuspected"
    RHO_COLLAPSED = "RhoCollapsed"
    INNER_BUDGET = "InnerBudget"


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    mu0: float = 1.0
    rho0: float = 0.1
    delta: float = 1.0
    gamma: float = 0.995
    epsilon: float = 1e-8
    rho_min: float = 1e-12
    max_outer: int | None = None
    max_inner: int | None = None
    unbounded_drop_threshold: float = 1e10
    tol_kkt: float = 1e-6
    # finite-run proxy for rho_k -> 0
    fj_rounds: int = 20
    fj_rho: float = 1e-9
    # consecutive inner steps along a certified recession ray
    ray_steps: int = 3

    def __post_init__(self):
        for name in ("mu0", "rho0", "delta", "epsilon", "rho_min", "tol_kkt", "fj_rho"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.unbounded_drop_threshold > 0:
            raise ValueError("unbounded_drop_threshold must be positive")
        for name in ("max_outer", "max_inner"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        if self.fj_rounds < 1 or self.ray_steps < 1:
            raise ValueError("fj_rounds and ray_steps must be >= 1")

    def outer_budget(self) -> int:
        if self.max_outer is not None:
            return self.max_outer
        rounds = math.log(self.epsilon / self.mu0) / math.log(self.gamma)
        # absorb round-off so that exact powers of gamma are not rounded up
        return max(math.ceil(rounds - 1e-9), 0) + 5

    def inner_budget(self, m: int) -> int:
        if self.max_inner is not None:
            return self.max_inner
        return max(math.ceil(10 * m * math.log(1.0 / self.epsilon)), 1)


@dataclasses.dataclass
class SbalState:
    y: np.ndarray
    x: np.ndarray
    mu: float
    rho: float
    k: int = 0


class InnerLoopStats(NamedTuple):
    ell: int
    e_primal: float
    e_dual: float
    rho_hat: float
    L_value: float


class TraceRecord(NamedTuple):
    k: int
    ell: int
    mu: float
    rho_hat: float
    e_primal: float
    e_dual: float
    L_value: float
    dist_gram: float


class StepInfo(NamedTuple):
    """Passed to the optional per-step callback of :func:`inner_solve`."""

    k: int
    ell: int
    y_prev: np.ndarray
    y_next: np.ndarray
    x: np.ndarray
    mu: float
    rho_hat: float


class RoundRecord(NamedTuple):
    """Data needed to replay one outer round's subproblem."""

    k: int
    y_start: np.ndarray
    x: np.ndarray
    mu: float
    rho_start: float
    rho_accepted: float
    inner_steps: int


class InnerFailure(Exception):
    def __init__(self, reason: FailureReason, y, rho_hat, stats, ray=None):
        super().__init__(reason.value)
        self.reason = reason
        self.y = y
        self.rho_hat = rho_hat
        self.stats = stats
        self.ray = ray


class KKTResiduals(NamedTuple):
    primal: float
    dual: float
    gap: float

    def ok(self, tol: float) -> bool:
        return max(self) <= tol


@dataclasses.dataclass
class SolveOutcome:
    status: Status
    y: np.ndarray
    x: np.ndarray
    s: np.ndarray
    z: np.ndarray
    mu: float
    rho: float
    residuals: KKTResiduals
    certificate: dict
    outer_iterations: int
    inner_iterations: int
    e_primal: float = float("nan")
    e_dual: float = float("nan")
    rounds: list = dataclasses.field(default_factory=list)

    @property
    def objective(self) -> float:
        """Dual-form objective ``-b'y`` (set by the solver from the problem)."""
        return self.certificate.get("objective", float("nan"))


def classify_kkt(p: DualLP, y, x) -> KKTResiduals:
    """``(||Ax - b||, ||max(A'y - c, 0)||_inf, |x'(c - A'y)|)``."""
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    slack = p.c - p.A.T @ y
    return KKTResiduals(
        primal=float(np.linalg.norm(p.A @ x - p.b)),
        dual=float(np.max(np.maximum(-slack, 0.0))),
        gap=float(abs(x @ slack)),
    )


def mm_step(f: GramFactor, p: DualLP, y_hat, x_k, mu_k, rho_hat) -> np.ndarray:
    """Exact minimizer of the quadratic majorizer at ``y_hat``."""
    g = sbal.grad_y(p, y_hat, x_k, SbalParams(mu_k, rho_hat))
    return np.asarray(y_hat, dtype=np.float64) - solve_gram(f, g)


def surrogate_Q(p: DualLP, y_k, x_hat, mu_k, rho_k, y) -> float:
    """Quadratic upper model of ``L(., x_hat)`` expanded at ``y_k``."""
    pr = SbalParams(mu_k, rho_k)
    y_k = np.asarray(y_k, dtype=np.float64)
    d = np.asarray(y, dtype=np.float64) - y_k
    g = sbal.grad_y(p, y_k, x_hat, pr)
    Ad = p.A.T @ d
    return sbal.eval_L(p, y_k, x_hat, pr) + float(g @ d) + 0.5 * float(Ad @ Ad)


def surrogate_P(p: DualLP, y_hat, x_k, mu_k, rho_k, x) -> float:
    """Quadratic lower model of ``L(y_hat, .)`` expanded at ``x_k``."""
    pr = SbalParams(mu_k, rho_k)
    x_k = np.asarray(x_k, dtype=np.float64)
    d = np.asarray(x, dtype=np.float64) - x_k
    gx = sbal.grad_x(p, y_hat, x_k, pr)
    return sbal.eval_L(p, y_hat, x_k, pr) + float(gx @ d) - 0.5 * rho_k**2 * float(d @ d)


def surrogate_P_argmax(p: DualLP, y_hat, x_k, mu_k, rho_k) -> np.ndarray:
    pr = SbalParams(mu_k, rho_k)
    return np.asarray(x_k, dtype=np.float64) + sbal.grad_x(p, y_hat, x_k, pr) / rho_k**2


def dual_update(p: DualLP, y_next, x_k, mu_k, rho_next) -> np.ndarray:
    """``x_{k+1} = z(y_{k+1}, x_k; mu_k, rho_{k+1}) / rho_{k+1}`` (componentwise > 0)."""
    _, z = sbal.eval_sz(p, y_next, x_k, SbalParams(mu_k, rho_next))
    return z / rho_next


class _Evaluator:
    """Fused kernel calls on fixed problem data; reuses work buffers."""

    def __init__(self, f: GramFactor, p: DualLP, backend: str | None = None):
        self.kernels = _backend.get(backend)
        self.f = f
        self.A = np.ascontiguousarray(p.A)
        self.b = np.ascontiguousarray(p.b)
        self.c = np.ascontiguousarray(p.c)
        self.m, self.n = self.A.shape

    def __call__(self, x, y, mu, rho):
        g = np.empty(self.m)
        r = np.empty(self.n)
        L = self.kernels.evaluate(self.A, self.b, self.c, x, y, mu, rho, g, r)
        return g, r, L

    def step(self, y, g):
        d = np.empty(self.m)
        self.kernels.cho_solve(self.f.factor, g, d)
        return y - d, d


def _is_ray(A, b, d, scale_A, norm_b) -> bool:
    nd = float(np.linalg.norm(d))
    if nd == 0.0 or norm_b == 0.0:
        return False
    # A'd <= 0 and b'd > 0: by Farkas, Ax = b, x >= 0 is infeasible
    return bool(
        np.max(A.T @ d) <= 1e-12 * scale_A * nd and (b @ d) >= 1e-9 * norm_b * nd
    )


def inner_solve(
    f: GramFactor,
    p: DualLP,
    state: SbalState,
    cfg: SolverConfig,
    trace: list | None = None,
    callback: Callable[[StepInfo], None] | None = None,
    _ev: _Evaluator | None = None,
):
    """Approximately minimize ``L(., x_k)`` from ``y_k``; return ``(y, rho, stats)``.

    After each majorizer step the primal residual ``||Az - rho b||`` is
    compared with ``mu_k``; once it passes, a dual residual above
    ``max(rho, mu_k)`` halves ``rho`` and the loop continues from the
    current iterate. Raises :class:`InnerFailure` on divergence, on
    ``rho`` falling below ``cfg.rho_min``, or when the budget runs out.
    """
    ev = _ev or _Evaluator(f, p)
    x = np.ascontiguousarray(state.x, dtype=np.float64)
    mu = state.mu
    rho = state.rho
    y = np.array(state.y, dtype=np.float64)
    scale_A = float(np.max(np.abs(ev.A)))
    norm_b = float(np.linalg.norm(ev.b))
    thr = cfg.unbounded_drop_threshold

    g, r, L = ev(x, y, mu, rho)
    stats = InnerLoopStats(0, float(np.linalg.norm(g)), float(np.linalg.norm(r)), rho, L)
    ray_run = 0
    for ell in range(cfg.inner_budget(ev.m)):
        y_next, d = ev.step(y, g)
        g_next, r_next, L_next = ev(x, y_next, mu, rho)
        e_primal = float(np.linalg.norm(g_next))
        e_dual = float(np.linalg.norm(r_next))
        stats = InnerLoopStats(ell, e_primal, e_dual, rho, L_next)
        if trace is not None:
            dist = math.sqrt(max(float(d @ g), 0.0))
            trace.append(TraceRecord(state.k, ell, mu, rho, e_primal, e_dual, L_next, dist))
        if callback is not None:
            callback(StepInfo(state.k, ell, y, y_next, x, mu, rho))

        if e_primal > mu:
            ray_run = ray_run + 1 if _is_ray(ev.A, ev.b, -d, scale_A, norm_b) else 0
            if L_next < -thr or np.linalg.norm(y_next) > thr or ray_run >= cfg.ray_steps:
                ray = -d / np.linalg.norm(d) if ray_run >= cfg.ray_steps else None
                raise InnerFailure(FailureReason.UNBOUNDED_SUSPECTED, y_next, rho, stats, ray)
            y, g = y_next, g_next
            continue
        ray_run = 0
        if e_dual > max(rho, mu):
            rho = 0.5 * rho
            y = y_next
            if rho < cfg.rho_min:
                raise InnerFailure(FailureReason.RHO_COLLAPSED, y, rho, stats)
            g, r, L = ev(x, y, mu, rho)
            continue
        return y_next, rho, stats
    raise InnerFailure(FailureReason.INNER_BUDGET, y, rho, stats)


def _outcome(p, status, y, x, mu, rho, certificate, k, inner_total, stats=None, rounds=None):
    pr = SbalParams(mu, rho)
    s, z = sbal.eval_sz(p, y, x, pr)
    certificate = dict(certificate)
    certificate["objective"] = float(-(p.b @ y))
    return SolveOutcome(
        status=status,
        y=y,
        x=x,
        s=s,
        z=z,
        mu=mu,
        rho=rho,
        residuals=classify_kkt(p, y, x),
        certificate=certificate,
        outer_iterations=k,
        inner_iterations=inner_total,
        e_primal=stats.e_primal if stats else float("nan"),
        e_dual=stats.e_dual if stats else float("nan"),
        rounds=rounds if rounds is not None else [],
    )


def _polish_infeasible(ev, f, p, x, mu, rho, y, cfg):
    """Extra majorizer steps at the collapsed penalty to sharpen stationarity."""
    g, _, _ = ev(x, y, mu, rho)
    steps = 0
    for steps in range(1, cfg.inner_budget(ev.m) + 1):
        y, _ = ev.step(y, g)
        g, _, _ = ev(x, y, mu, rho)
        viol = np.maximum(p.A.T @ y - p.c, 0.0)
        if np.linalg.norm(p.A @ viol) <= 0.1 * cfg.tol_kkt:
            break
    return y, steps


def outer_solve(
    p: DualLP,
    cfg: SolverConfig | None = None,
    y0=None,
    x0=None,
    *,
    factor: GramFactor | None = None,
    callback: Callable[[StepInfo], None] | None = None,
    keep_trace: bool = True,
    record_rounds: bool = False,
    backend: str | None = None,
):
    """Run the full method; return ``(SolveOutcome, trace)``.

    ``y0`` defaults to zero and ``x0`` to all-ones. Any finite ``x0`` is
    accepted. Raises :class:`mmlp.factorization.RankDeficient` when ``A``
    lacks full row rank. ``backend`` picks the kernel implementation
    ("cython" or "numpy"); both produce the same iterates.
    """
    cfg = cfg or SolverConfig()
    f = factor or factorize(p)
    ev = _Evaluator(f, p, backend)
    y = np.zeros(p.m) if y0 is None else np.array(y0, dtype=np.float64)
    x = np.ones(p.n) if x0 is None else np.array(x0, dtype=np.float64)
    if y.shape != (p.m,) or x.shape != (p.n,):
        raise ValueError("starting point has the wrong shape")
    mu, rho = cfg.mu0, cfg.rho0
    trace: list[TraceRecord] = [] if keep_trace else None
    rounds: list[RoundRecord] = []
    inner_total = 0
    drops = 0

    for k in range(cfg.outer_budget()):
        state = SbalState(y, x, mu, rho, k)
        counter = _Counter(callback)
        try:
            y_next, rho_next, stats = inner_solve(f, p, state, cfg, trace, counter, ev)
        except InnerFailure as fail:
            inner_total += counter.n
            return _classify_failure(p, f, ev, cfg, fail, x, mu, k, inner_total, rounds), trace
        inner_total += counter.n
        if record_rounds:
            rounds.append(RoundRecord(k, y.copy(), x.copy(), mu, rho, rho_next, counter.n))
        x_next = dual_update(p, y_next, x, mu, rho_next)

        if mu < cfg.epsilon:
            return _classify_stop(p, cfg, y_next, x_next, mu, rho_next, drops, stats,
                                  k + 1, inner_total, rounds), trace

        rho_capped = min(rho_next, cfg.delta / float(np.max(np.abs(x_next))))
        drops = drops + 1 if rho_capped <= 0.5 * rho else 0
        y, x = y_next, x_next
        mu, rho = cfg.gamma * mu, rho_capped

    return _outcome(p, Status.BUDGET, y, x, mu, rho, {"reason": "max_outer"},
                    cfg.outer_budget(), inner_total, rounds=rounds), trace


class _Counter:
    def __init__(self, callback):
        self.callback = callback
        self.n = 0

    def __call__(self, info):
        self.n += 1
        if self.callback is not None:
            self.callback(info)


def _classify_stop(p, cfg, y, x, mu, rho, drops, stats, k, inner_total, rounds):
    res = classify_kkt(p, y, x)
    if res.ok(cfg.tol_kkt):
        cert = {"kkt": list(res)}
        return _outcome(p, Status.KKT, y, x, mu, rho, cert, k, inner_total, stats, rounds)
    if drops >= cfg.fj_rounds or rho <= cfg.fj_rho:
        s, z = sbal.eval_sz(p, y, x, SbalParams(mu, rho))
        cert = {
            "dual_residual": float(np.linalg.norm(s - p.c + p.A.T @ y)),
            "Az_norm": float(np.linalg.norm(p.A @ z)),
            "complementarity": float(np.max(np.abs(s * z))),
            "rho_drop_rounds": drops,
        }
        return _outcome(p, Status.FRITZ_JOHN, y, x, mu, rho, cert, k, inner_total, stats, rounds)
    cert = {"reason": "kkt_tolerance_not_met", "kkt": list(res)}
    return _outcome(p, Status.BUDGET, y, x, mu, rho, cert, k, inner_total, stats, rounds)


def _classify_failure(p, f, ev, cfg, fail: InnerFailure, x, mu, k, inner_total, rounds):
    y, rho = fail.y, fail.rho_hat
    if fail.reason is FailureReason.UNBOUNDED_SUSPECTED:
        cert = {
            "L_value": fail.stats.L_value,
            "y_norm": float(np.linalg.norm(y)),
            "max_violation": float(np.max(p.A.T @ y - p.c)),
        }
        if fail.ray is not None:
            cert["ray"] = fail.ray.tolist()
            cert["ray_Atd_max"] = float(np.max(p.A.T @ fail.ray))
            cert["ray_btd"] = float(p.b @ fail.ray)
        return _outcome(p, Status.UNBOUNDED, y, x, mu, rho, cert, k, inner_total,
                        fail.stats, rounds)
    if fail.reason is FailureReason.RHO_COLLAPSED:
        y, extra = _polish_infeasible(ev, f, p, x, mu, rho, y, cfg)
        inner_total += extra
        viol = np.maximum(p.A.T @ y - p.c, 0.0)
        stationarity = float(np.linalg.norm(p.A @ viol))
        cert = {
            "stationarity": stationarity,
            "violation_norm": float(np.linalg.norm(viol)),
            "primal_lp": "unbounded-if-feasible",
        }
        if stationarity <= cfg.tol_kkt and cert["violation_norm"] > cfg.tol_kkt:
            return _outcome(p, Status.INFEASIBLE, y, x, mu, rho, cert, k, inner_total,
                            fail.stats, rounds)
        cert["reason"] = "rho_collapsed_uncertified"
        return _outcome(p, Status.BUDGET, y, x, mu, rho, cert, k, inner_total, fail.stats, rounds)
    cert = {"reason": "max_inner"}
    return _outcome(p, Status.BUDGET, y, x, mu, rho, cert, k, inner_total, fail.stats, rounds)
