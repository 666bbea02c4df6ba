import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmlp import sbal
from mmlp.bench import random_feasible
from mmlp.diagnostics import (
    REPORT_FIELDS,
    EmptyTrace,
    InnerRun,
    RateReport,
    analyze_inner_run,
    emit_report,
    gram_distances,
    predicted_steps,
    reference_minimizer,
    reports_for_rounds,
    run_inner_fixed,
    tail_contraction,
)
from mmlp.factorization import factorize
from mmlp.sbal import SbalParams
from mmlp.solver import SolverConfig, outer_solve

SEEDS = st.integers(0, 2**32 - 1)


def _report(**kw):
    base = dict(kappa_A=4.0, tau_bound=0.6, tau_measured=0.2, sublinear_ok=True,
                T_mm_predicted=12, T_mm_observed=5)
    base.update(kw)
    return RateReport(**base)


def test_one_by_one_run(one_by_one):
    f = factorize(one_by_one)
    run = run_inner_fixed(one_by_one, [0.0], [0.0], 1.0, 1.0, f=f, max_steps=50)
    y_star, F_star = reference_minimizer(one_by_one, run, f)
    rep = analyze_inner_run(run, y_star, f, F_star=F_star)
    assert rep.sublinear_ok
    assert rep.kappa_A == 1.0 and rep.tau_bound == 0.0
    assert 1 <= rep.T_mm_observed <= run.steps
    assert rep.T_mm_predicted == 1
    # the minimizer is a stationary point of the subproblem
    g = sbal.grad_y(one_by_one, y_star, [0.0], SbalParams(1.0, 1.0))
    assert abs(g[0]) <= 1e-13


def test_empty_run_rejected(one_by_one):
    f = factorize(one_by_one)
    run = InnerRun(np.zeros((1, 1)), np.zeros(1), np.zeros(1), np.zeros(1), 1.0, 1.0)
    with pytest.raises(EmptyTrace):
        analyze_inner_run(run, np.zeros(1), f, F_star=0.0)


def test_F_star_needs_problem(one_by_one):
    f = factorize(one_by_one)
    run = run_inner_fixed(one_by_one, [0.0], [0.0], 1.0, 1.0, f=f, max_steps=5)
    with pytest.raises(ValueError):
        analyze_inner_run(run, run.ys[-1], f)
    rep = analyze_inner_run(run, run.ys[-1], f, p=one_by_one)
    assert isinstance(rep, RateReport)


@given(SEEDS)
def test_value_bound_and_rate_on_random_subproblems(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 5))
    p = random_feasible(rng, m, int(rng.integers(m + 1, 9)))
    f = factorize(p)
    x = rng.uniform(0.1, 2.0, size=p.n)
    mu, rho = 10 ** rng.uniform(-3, 0), 10 ** rng.uniform(-2, 0)
    run = run_inner_fixed(p, rng.normal(size=m), x, mu, rho, f=f, max_steps=3000)
    y_star, F_star = reference_minimizer(p, run, f)
    rep = analyze_inner_run(run, y_star, f, F_star=F_star)
    assert rep.sublinear_ok
    dist = gram_distances(run, y_star, f)
    assert np.all(np.diff(dist) <= 1e-12 * (1 + dist[0]))
    assert 0.0 <= rep.tau_measured < 1.0
    assert 0.0 <= rep.tau_bound < 1.0
    assert np.all(np.diff(run.values) <= 1e-12 * (1 + np.abs(run.values).max()))


def test_tail_contraction_of_geometric_sequence():
    d = 0.5 ** np.arange(40)
    assert tail_contraction(d, 0.0) == pytest.approx(0.25)
    assert tail_contraction(np.r_[d[:10], np.zeros(5)], 1e-30) == pytest.approx(0.25)
    assert tail_contraction(np.array([1.0, 0.0]), 1e-12) == 0.0


def test_predicted_steps_formula():
    assert predicted_steps(1.0, 1e-8, 0.25) == math.ceil(math.log(1e8) / math.log(2.0))
    assert predicted_steps(1e-9, 1e-8, 0.5) == 0
    assert predicted_steps(1.0, 1e-8, 0.0) == 1


def test_reports_for_recorded_rounds(rng):
    p = random_feasible(rng, 3, 6)
    out, _ = outer_solve(p, SolverConfig(mu0=1.0, rho0=1.0, gamma=0.1, epsilon=1e-8),
                         record_rounds=True, keep_trace=False)
    reps = reports_for_rounds(p, out.rounds, eps=1e-8, max_reports=4)
    assert 1 <= len(reps) <= 4
    assert all(r.sublinear_ok for r in reps)
    assert reports_for_rounds(p, []) == []


def test_emit_empty_is_header_only():
    text = emit_report([])
    lines = text.splitlines()
    assert len(lines) == 1
    assert lines[0].split() == list(REPORT_FIELDS) + ["flag"]
    assert emit_report([], "jsonl") == ""


def test_emit_one_report_has_all_fields():
    text = emit_report([_report()])
    header, row = text.splitlines()
    assert len(row.split()) == len(REPORT_FIELDS) + 1
    assert row.split()[-1] == "-"
    obj = json.loads(emit_report([_report()], "jsonl"))
    assert list(obj) == list(REPORT_FIELDS)


def test_emit_preserves_order_and_flags():
    reps = [_report(kappa_A=9.0, tau_measured=0.9), _report(kappa_A=2.0)]
    rows = emit_report(reps).splitlines()[1:]
    assert rows[0].split()[0] == "9" and rows[1].split()[0] == "2"
    assert rows[0].split()[-1] == "tau>bound"
    assert reps[0].bound_exceeded and not reps[1].bound_exceeded
    objs = [json.loads(line) for line in emit_report(reps, "jsonl").splitlines()]
    assert [o["kappa_A"] for o in objs] == [9.0, 2.0]
    assert emit_report(reps) == emit_report(reps)


def test_emit_unknown_format():
    with pytest.raises(ValueError):
        emit_report([], "xml")
