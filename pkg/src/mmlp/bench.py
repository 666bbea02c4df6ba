"""Timing comparison of the compiled and pure-numpy kernel backends."""

from __future__ import annotations

import timeit

import numpy as np

from . import _backend
from .factorization import factorize
from .model import DualLP
from .solver import SolverConfig, outer_solve


def random_feasible(rng: np.random.Generator, m: int, n: int) -> DualLP:
    """Random LP that is feasible and bounded by construction.

    ``b = A x0`` with ``x0 >= 0`` makes the standard form feasible and
    ``c = A'y0 + s0`` with ``s0 >= 0`` makes the dual form feasible, so
    both have optimal solutions.
    """
    A = rng.normal(size=(m, n))
    y0 = rng.normal(size=m)
    s0 = rng.uniform(0.0, 2.0, size=n)
    s0[rng.random(n) < 0.5] = 0.0
    x0 = rng.uniform(0.0, 2.0, size=n)
    return DualLP(A, A @ x0, A.T @ y0 + s0)


def available_backends() -> list[str]:
    names = [_backend.fallback.NAME]
    if _backend.compiled is not None:
        names.insert(0, _backend.compiled.NAME)
    return names


def _kernel_timing(kern, p: DualLP, f, repeat: int, number: int) -> float:
    """Best-of-``repeat`` seconds per fused evaluate + Gram solve."""
    A, b, c = (np.ascontiguousarray(v) for v in (p.A, p.b, p.c))
    x = np.ones(p.n)
    y = np.zeros(p.m)
    g, r, d = np.empty(p.m), np.empty(p.n), np.empty(p.m)

    def step():
        kern.evaluate(A, b, c, x, y, 0.5, 0.1, g, r)
        kern.cho_solve(f.factor, g, d)

    return min(timeit.repeat(step, repeat=repeat, number=number)) / number


def bench_kernels(seed: int = 0, sizes=((4, 8), (20, 60), (60, 200)), repeat: int = 5,
                  number: int = 200) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    for m, n in sizes:
        p = random_feasible(rng, m, n)
        f = factorize(p)
        row = {"m": m, "n": n}
        for name in available_backends():
            row[f"{name}_us"] = 1e6 * _kernel_timing(_backend.get(name), p, f, repeat, number)
        rows.append(row)
    return rows


def bench_solve(seed: int = 0, problems: int = 20, m_max: int = 4, n_max: int = 8,
                cfg: SolverConfig | None = None) -> dict:
    """Solve the same random problems with every backend; report time and agreement."""
    cfg = cfg or SolverConfig(epsilon=1e-8)
    rng = np.random.default_rng(seed)
    probs = []
    for _ in range(problems):
        m = int(rng.integers(1, m_max + 1))
        n = int(rng.integers(m + 1, n_max + 1))
        probs.append(random_feasible(rng, m, n))
    out: dict = {"problems": problems}
    results = {}
    for name in available_backends():
        ys = []

        def run(name=name, ys=ys):
            ys.clear()
            for p in probs:
                res, _ = outer_solve(p, cfg, keep_trace=False, backend=name)
                ys.append(res.y)

        out[f"{name}_s"] = min(timeit.repeat(run, repeat=1, number=1))
        results[name] = np.concatenate(ys)
    names = list(results)
    if len(names) == 2:
        out["max_abs_diff_y"] = float(np.max(np.abs(results[names[0]] - results[names[1]])))
    return out


def run(seed: int = 0, problems: int = 20, repeat: int = 5) -> dict:
    kernels = bench_kernels(seed, repeat=repeat)
    solve = bench_solve(seed, problems)
    report = {"backends": available_backends(), "kernels": kernels, "solve": solve}
    if "cython_s" in solve:
        report["solve_speedup"] = solve["numpy_s"] / solve["cython_s"]
    return report
