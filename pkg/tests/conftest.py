import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mmlp import sbal
from mmlp.factorization import factorize, norm_gram_inv
from mmlp.model import DualLP
from mmlp.sbal import SbalParams

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.register_profile(
    "thorough", deadline=None, suppress_health_check=[HealthCheck.too_slow], max_examples=2000
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def random_problem(rng, m_max=6, n_max=12, full_rank=True):
    """Random dual-form LP with m < n and, by default, full row rank."""
    while True:
        m = int(rng.integers(1, m_max + 1))
        n = int(rng.integers(m + 1, n_max + 1))
        A = rng.normal(size=(m, n))
        if not full_rank or np.linalg.matrix_rank(A) == m:
            return DualLP(A, rng.normal(size=m), rng.normal(size=n))


def log_uniform(rng, lo, hi):
    return float(10.0 ** rng.uniform(np.log10(lo), np.log10(hi)))


@pytest.fixture
def rng():
    return np.random.default_rng(20260415)


@pytest.fixture
def one_by_one():
    """min -y s.t. y <= 1: optimum y = 1, x = 1, objective -1."""
    return DualLP([[1.0]], [1.0], [1.0])


@pytest.fixture
def infeasible_pair():
    """y <= -1 and -y <= -1 conflict; least-violation point y = 0."""
    return DualLP([[1.0, -1.0]], [0.0], [-1.0, -1.0])


@pytest.fixture
def unbounded_dual():
    """min -y s.t. -y <= 0: y may grow without bound."""
    return DualLP([[-1.0]], [1.0], [0.0])


class StepContract:
    """Per-step callback asserting inner descent and sufficient decrease.

    Each majorizer step must satisfy
    ``L(y_next) <= L(y_prev) - 0.5 * ||grad_y(y_prev)||^2_{(AA')^{-1}}``
    at the step's own ``(x, mu, rho_hat)``, up to ``tol``.
    """

    def __init__(self, p, tol=1e-10):
        self.p = p
        self.f = factorize(p)
        self.tol = tol
        self.steps = 0
        self.worst = np.inf

    def __call__(self, info):
        pr = SbalParams(info.mu, info.rho_hat)
        before = sbal.eval_L(self.p, info.y_prev, info.x, pr)
        after = sbal.eval_L(self.p, info.y_next, info.x, pr)
        g = sbal.grad_y(self.p, info.y_prev, info.x, pr)
        margin = (before - after) - 0.5 * norm_gram_inv(self.f, g) ** 2
        self.worst = min(self.worst, margin)
        self.steps += 1
        assert after <= before + self.tol, (info.k, info.ell, before, after)
        assert margin >= -self.tol, (info.k, info.ell, margin)


@pytest.fixture
def step_contract():
    return StepContract


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}  {title}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
