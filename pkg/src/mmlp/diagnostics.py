"""Empirical convergence-rate checks for the inner majorization loop.

An inner run at fixed penalty is replayed step by step with every iterate
kept, then compared with a tight-tolerance reference minimizer: the
``O(1/l)`` value bound is checked at every step and the linear
contraction factor is estimated from the tail of the run.
"""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Iterable, Sequence

import numpy as np

from . import sbal
from .factorization import GramFactor, factorize, norm_gram, solve_gram
from .model import DualLP
from .sbal import SbalParams

REPORT_FIELDS = (
    "kappa_A",
    "tau_bound",
    "tau_measured",
    "sublinear_ok",
    "T_mm_predicted",
    "T_mm_observed",
)


class EmptyTrace(ValueError):
    """The inner run has no steps to analyze."""


@dataclasses.dataclass(frozen=True)
class InnerRun:
    """All iterates of one inner run at fixed ``(x, mu, rho)``.

    ``ys[l]``, ``values[l]`` and ``grad_norms[l]`` belong to iterate ``l``;
    row 0 is the starting point, so a run of ``L`` steps has ``L + 1`` rows.
    """

    ys: np.ndarray
    values: np.ndarray
    grad_norms: np.ndarray
    x: np.ndarray
    mu: float
    rho: float

    @property
    def steps(self) -> int:
        return len(self.values) - 1


@dataclasses.dataclass(frozen=True)
class RateReport:
    kappa_A: float
    tau_bound: float
    tau_measured: float
    sublinear_ok: bool
    T_mm_predicted: int
    T_mm_observed: int

    @property
    def bound_exceeded(self) -> bool:
        """Measured contraction is slower than ``(kappa-1)/(kappa+1)``; informational."""
        return self.tau_measured > self.tau_bound

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in REPORT_FIELDS}


def run_inner_fixed(
    p: DualLP,
    y0,
    x,
    mu: float,
    rho: float,
    *,
    f: GramFactor | None = None,
    tol: float = 1e-13,
    max_steps: int = 10000,
) -> InnerRun:
    """Iterate ``y <- y - (AA')^{-1} grad_y`` at fixed parameters, keeping everything.

    Stops when the gradient norm reaches ``tol``, when a step no longer
    changes ``y`` (round-off floor), or after ``max_steps``.
    """
    f = f or factorize(p)
    pr = SbalParams(mu, rho)
    x = np.asarray(x, dtype=np.float64)
    y = np.array(y0, dtype=np.float64)
    ys, values, gnorms = [y.copy()], [], []
    for ell in range(max_steps + 1):
        ev = sbal.evaluate(p, y, x, pr)
        values.append(ev.L)
        gnorms.append(float(np.linalg.norm(ev.grad_y)))
        if gnorms[-1] <= tol or ell == max_steps:
            break
        y_next = y - solve_gram(f, ev.grad_y)
        if np.array_equal(y_next, y):
            break
        y = y_next
        ys.append(y.copy())
    return InnerRun(np.array(ys), np.array(values), np.array(gnorms), x, mu, rho)


def reference_minimizer(p: DualLP, run: InnerRun, f: GramFactor | None = None,
                        *, tol: float = 1e-13, max_steps: int = 100000):
    """Continue ``run`` to gradient ``tol``; return ``(y_star, F_star)``."""
    ref = run_inner_fixed(p, run.ys[-1], run.x, run.mu, run.rho, f=f, tol=tol,
                          max_steps=max_steps)
    return ref.ys[-1], float(ref.values[-1])


def gram_distances(run: InnerRun, y_star, f: GramFactor) -> np.ndarray:
    """``||y_l - y_star||_{AA'}`` for every iterate of the run."""
    return np.array([norm_gram(f, y - y_star) for y in run.ys])


def sublinear_margins(run: InnerRun, y_star, F_star: float, f: GramFactor) -> np.ndarray:
    """``bound - gap`` at l = 1..L, where bound is ``||y_0 - y*||^2_{AA'} / (2l)``."""
    d0 = norm_gram(f, run.ys[0] - y_star)
    ell = np.arange(1, run.steps + 1)
    return d0**2 / (2.0 * ell) - (run.values[1:] - F_star)


def tail_contraction(dist: np.ndarray, floor: float) -> float:
    """Per-step contraction of squared distances, geometric mean over the tail half.

    Iterates whose distance has reached ``floor`` carry only round-off and
    are dropped first. Returns 0 when the run converged in one step.
    """
    dist = np.asarray(dist, dtype=np.float64)
    above = np.flatnonzero(dist > floor)
    if above.size == 0:
        return 0.0
    last = int(above[-1])
    if last == 0:
        return 0.0
    start = last // 2
    return float((dist[last] / dist[start]) ** (2.0 / (last - start)))


def analyze_inner_run(
    run: InnerRun,
    y_star,
    f: GramFactor,
    eps: float = 1e-8,
    *,
    F_star: float | None = None,
    p: DualLP | None = None,
    slack: float = 1e-9,
) -> RateReport:
    """Compare an inner run with the value and rate statements for the MM loop.

    ``F_star`` defaults to the objective at ``y_star``, which then needs
    ``p``. ``sublinear_ok`` holds when every step satisfies the ``O(1/l)``
    bound up to ``slack``.
    """
    if run.steps < 1:
        raise EmptyTrace("inner run has no steps")
    y_star = np.asarray(y_star, dtype=np.float64)
    if F_star is None:
        if p is None:
            raise ValueError("need F_star or the problem to evaluate it")
        F_star = sbal.eval_L(p, y_star, run.x, SbalParams(run.mu, run.rho))

    kappa = float(f.kappa)
    tau_bound = (kappa - 1.0) / (kappa + 1.0)
    margins = sublinear_margins(run, y_star, F_star, f)
    dist = gram_distances(run, y_star, f)
    floor = 1e-12 * (1.0 + norm_gram(f, y_star))
    tau = tail_contraction(dist, floor)

    hit = np.flatnonzero(run.grad_norms <= eps)
    observed = int(hit[0]) if hit.size else -1
    return RateReport(
        kappa_A=kappa,
        tau_bound=tau_bound,
        tau_measured=tau,
        sublinear_ok=bool(np.all(margins >= -slack)),
        T_mm_predicted=predicted_steps(dist[0], eps, tau_bound),
        T_mm_observed=observed,
    )


def predicted_steps(dist0: float, eps: float, tau_bound: float) -> int:
    """``ceil(ln(dist0/eps) / ln(1/sqrt(tau)))``; zero if already within ``eps``."""
    if dist0 <= eps:
        return 0
    if tau_bound <= 0.0:
        return 1
    return max(math.ceil(math.log(dist0 / eps) / math.log(1.0 / math.sqrt(tau_bound))), 1)


def reports_for_rounds(p: DualLP, rounds: Sequence, f: GramFactor | None = None,
                       eps: float = 1e-8, max_reports: int = 20,
                       max_steps: int = 10000) -> list[RateReport]:
    """Replay recorded outer rounds at their accepted penalty and analyze each.

    At most ``max_reports`` rounds are used, evenly spaced and always
    including the first and last.
    """
    f = f or factorize(p)
    if not rounds:
        return []
    pick = np.unique(np.linspace(0, len(rounds) - 1, min(max_reports, len(rounds))).round())
    out = []
    for i in pick.astype(int):
        rr = rounds[i]
        run = run_inner_fixed(p, rr.y_start, rr.x, rr.mu, rr.rho_accepted, f=f, tol=eps,
                              max_steps=max_steps)
        if run.steps < 1:
            continue
        y_star, F_star = reference_minimizer(p, run, f)
        out.append(analyze_inner_run(run, y_star, f, eps, F_star=F_star))
    return out


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def emit_report(reports: Iterable[RateReport], fmt: str = "text") -> str:
    """Serialize reports in input order, as aligned text or JSON lines.

    Text output always starts with a header row, so an empty input yields
    the header alone; JSON lines output then is empty. Text rows end with
    a flag column marking a measured rate above the condition-number bound.
    """
    reports = list(reports)
    if fmt == "jsonl":
        return "".join(json.dumps(r.as_dict()) + "\n" for r in reports)
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    header = list(REPORT_FIELDS) + ["flag"]
    rows = [
        [_fmt(getattr(r, name)) for name in REPORT_FIELDS]
        + ["tau>bound" if r.bound_exceeded else "-"]
        for r in reports
    ]
    widths = [max([len(h)] + [len(row[i]) for row in rows]) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in rows]
    return "\n".join(lines) + "\n"
