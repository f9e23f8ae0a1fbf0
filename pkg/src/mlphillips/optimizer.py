"""Nelder-Mead simplex minimisation with restarts and multi-start selection.

The step logic and initial simplex follow the usual fminsearch conventions:
reflect, expand, contract outside/inside, shrink; the starting simplex moves
each coordinate of the initial guess by 5% (0.00025 for zero coordinates).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

Objective = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class SimplexConfig:
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    x_tol: float = 1e-8
    f_tol: float = 1e-8
    max_iter: int = 2000
    restarts: int = 2

    def __post_init__(self):
        if not self.reflection > 0:
            raise ValueError("reflection must be positive")
        if not self.expansion > self.reflection:
            raise ValueError("expansion must exceed reflection")
        if not 0 < self.contraction < 1:
            raise ValueError("contraction must lie in (0, 1)")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.restarts < 0:
            raise ValueError("restarts must be non-negative")


@dataclass(frozen=True)
class OptimResult:
    best_params: np.ndarray
    best_value: float
    iterations: int
    converged: bool
    start_index: int = 0


ZERO_STEP = 0.00025


def initial_simplex(x0: np.ndarray, floor: bool = False) -> np.ndarray:
    """x0 plus one vertex per coordinate moved by 5% (ZERO_STEP for a zero coordinate).

    With ``floor`` every step is at least ZERO_STEP in magnitude, so a tiny
    but non-zero coordinate cannot leave the simplex flat along that axis.
    """
    n = x0.size
    simplex = np.tile(x0, (n + 1, 1))
    for j in range(n):
        step = 0.05 * x0[j]
        if x0[j] == 0 or (floor and abs(step) < ZERO_STEP):
            step = ZERO_STEP if x0[j] >= 0 else -ZERO_STEP
        simplex[j + 1, j] = x0[j] + step
    return simplex


def _run(objective: Objective, x0: np.ndarray, config: SimplexConfig, callback, floor=False) -> tuple:
    """One Nelder-Mead descent. Returns (x, f, iterations, converged)."""
    rho, chi, psi, sigma = config.reflection, config.expansion, config.contraction, config.shrink
    sim = initial_simplex(x0, floor)
    fvals = np.array([objective(v) for v in sim])
    order = np.argsort(fvals, kind="stable")
    sim, fvals = sim[order], fvals[order]

    iterations = 0
    converged = False
    while True:
        if (
            np.max(np.abs(sim[1:] - sim[0])) < config.x_tol
            and np.max(np.abs(fvals[1:] - fvals[0])) < config.f_tol
        ):
            converged = True
            break
        if iterations >= config.max_iter:
            break
        iterations += 1

        xbar = sim[:-1].mean(axis=0)
        worst = sim[-1]
        xr = xbar + rho * (xbar - worst)
        fr = objective(xr)
        shrink = False
        if fr < fvals[0]:
            xe = xbar + chi * (xbar - worst)
            fe = objective(xe)
            if fe < fr:
                sim[-1], fvals[-1] = xe, fe
            else:
                sim[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            sim[-1], fvals[-1] = xr, fr
        elif fr < fvals[-1]:
            xc = xbar + psi * rho * (xbar - worst)
            fc = objective(xc)
            if fc <= fr:
                sim[-1], fvals[-1] = xc, fc
            else:
                shrink = True
        else:
            xcc = xbar - psi * (xbar - worst)
            fcc = objective(xcc)
            if fcc < fvals[-1]:
                sim[-1], fvals[-1] = xcc, fcc
            else:
                shrink = True
        if shrink:
            for i in range(1, sim.shape[0]):
                sim[i] = sim[0] + sigma * (sim[i] - sim[0])
                fvals[i] = objective(sim[i])

        order = np.argsort(fvals, kind="stable")
        sim, fvals = sim[order], fvals[order]
        if callback is not None:
            callback(sim[0].copy(), float(fvals[0]))

    return sim[0].copy(), float(fvals[0]), iterations, converged


def nelder_mead(
    objective: Objective,
    x0: Sequence[float],
    config: SimplexConfig = SimplexConfig(),
    callback: Optional[Callable[[np.ndarray, float], None]] = None,
) -> OptimResult:
    """Minimise ``objective`` from ``x0``.

    After the first descent the search is restarted ``config.restarts`` times
    from the incumbent best point with a fresh (floored) simplex; a restart result
    replaces the incumbent only if it is strictly lower.  ``converged`` reports
    whether the final descent met both the x and f tolerances.  ``callback``
    receives the incumbent (params, value) after every iteration.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    if x0.ndim != 1 or x0.size < 1:
        raise ValueError("x0 must be a non-empty vector")

    def f(v):
        return float(objective(v))

    incumbent = {"x": x0, "f": np.inf}

    def track(x, fx):
        if fx < incumbent["f"]:
            incumbent["x"], incumbent["f"] = x, fx
        if callback is not None:
            callback(incumbent["x"].copy(), incumbent["f"])

    best_x, best_f, iterations, converged = _run(f, x0, config, track)
    for _ in range(config.restarts):
        x, fx, it, converged = _run(f, best_x, config, track, floor=True)
        iterations += it
        if fx < best_f:
            best_x, best_f = x, fx
    return OptimResult(best_x, best_f, iterations, converged)


def multi_start(
    objective: Objective,
    starts: Sequence[Sequence[float]],
    config: SimplexConfig = SimplexConfig(),
    max_workers: Optional[int] = None,
) -> OptimResult:
    """Run Nelder-Mead from every start and keep the lowest result.

    Ties on the objective value go to the smallest start index, so the result
    does not depend on execution order when ``max_workers`` > 1.
    """
    starts = [np.asarray(s, dtype=float) for s in starts]
    if not starts:
        raise ValueError("multi_start needs at least one start")

    def one(i):
        r = nelder_mead(objective, starts[i], config)
        return OptimResult(r.best_params, r.best_value, r.iterations, r.converged, i)

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one, range(len(starts))))
    else:
        results = [one(i) for i in range(len(starts))]
    return min(results, key=lambda r: (r.best_value, r.start_index))
