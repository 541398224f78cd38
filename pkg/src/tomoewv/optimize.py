"""Constrained wave-plate optimization of the average EWV.

Scenario A sweeps the retardance of a single rotating plate.  Scenario B
fixes two identical plates and searches their orientations for the second
and third PVM, the first being pinned at ``(0, 0)``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .errors import DegenerateSchemeError
from .ewv import ewv_average
from .measmat import build_matrix
from .povm import ftt_scheme, two_waveplate_scheme

TWO_PI = 2 * np.pi


def ftt_objective(beta: float, num_settings: int = 6) -> float:
    """``<EWV> * N_T`` of the FTT scheme; ``inf`` where it is incomplete."""
    try:
        scheme = ftt_scheme(beta, num_settings, 1.0)
    except DegenerateSchemeError:
        return np.inf
    m = build_matrix(scheme)
    if not m.is_complete:
        return np.inf
    return ewv_average(m) * m.total_counts


@dataclass
class ScenarioAResult:
    beta_grid: np.ndarray
    ewv_curve: np.ndarray
    beta_opt: float
    ewv_opt: float
    num_settings: int = 6

    def to_dict(self):
        return {
            "num_settings": self.num_settings,
            "beta_opt": self.beta_opt,
            "ewv_opt_times_nt": self.ewv_opt,
            "beta_grid": self.beta_grid.tolist(),
            "ewv_times_nt": self.ewv_curve.tolist(),
        }


def retardance_grid(grid_points: int) -> np.ndarray:
    """Uniform interior grid on ``(0, pi)``; the endpoints are degenerate."""
    return np.pi * np.arange(1, grid_points + 1) / (grid_points + 1)


def scenario_a(num_settings: int = 6, grid_points: int = 256) -> ScenarioAResult:
    """Grid search over retardance, refined by golden-section search."""
    if num_settings < 3:
        raise DegenerateSchemeError(f"need at least 3 settings, got {num_settings}")
    if grid_points < 16:
        raise ValueError(f"grid_points must be >= 16, got {grid_points}")
    grid = retardance_grid(grid_points)
    curve = np.array([ftt_objective(b, num_settings) for b in grid])
    i = int(np.argmin(curve))
    lo = grid[i - 1] if i > 0 else grid[i] / 2
    hi = grid[i + 1] if i + 1 < grid.size else (grid[i] + np.pi) / 2
    res = minimize_scalar(
        ftt_objective,
        bracket=(lo, grid[i], hi),
        args=(num_settings,),
        method="golden",
        options={"xtol": 1e-9},
    )
    beta_opt, ewv_opt = float(res.x), float(res.fun)
    if ewv_opt > curve[i]:
        beta_opt, ewv_opt = float(grid[i]), float(curve[i])
    return ScenarioAResult(grid, curve, beta_opt, ewv_opt, num_settings)


def _angle_pairs(x):
    return [(0.0, 0.0), (x[0], x[1]), (x[2], x[3])]


def two_waveplate_objective(x, beta: float) -> float:
    """``<EWV> * N_T`` for three PVMs at orientations ``(0,0), (x0,x1), (x2,x3)``."""
    m = build_matrix(two_waveplate_scheme(beta, _angle_pairs(x), 1.0))
    if not m.is_complete:
        return np.inf
    return ewv_average(m) * m.total_counts


@dataclass
class ScenarioBResult:
    beta: float
    angles: tuple
    ewv_opt: float
    restart_index: int
    restarts: list = field(default_factory=list)
    trace: list | None = None

    def to_dict(self, include_trace: bool = False):
        out = {
            "beta": self.beta,
            "angles": [list(p) for p in self.angles],
            "ewv_opt_times_nt": self.ewv_opt,
            "restart_index": self.restart_index,
            "restarts": self.restarts,
        }
        if include_trace and self.trace is not None:
            out["trace"] = self.trace
        return out


def _run_restart(index, start, beta, xatol, trace):
    path = [] if trace else None

    def callback(xk):
        path.append([float(v) for v in xk])

    res = minimize(
        two_waveplate_objective,
        start,
        args=(beta,),
        method="Nelder-Mead",
        callback=callback if trace else None,
        # reflection 1, expansion 2, contraction 0.5, shrink 0.5 (non-adaptive)
        options={
            "xatol": xatol,
            "fatol": np.inf,
            "maxiter": 40000,
            "maxfev": 80000,
            "adaptive": False,
        },
    )
    summary = {
        "restart": index,
        "start": [float(v) for v in start],
        "x": [float(v) for v in np.mod(res.x, TWO_PI)],
        "fun": float(res.fun),
        "nit": int(res.nit),
        "nfev": int(res.nfev),
        "converged": bool(res.success),
    }
    return res, summary, path


def scenario_b(
    beta: float,
    restarts: int = 16,
    seed: int = 0,
    *,
    xatol: float = 1e-8,
    trace: bool = False,
    n_jobs: int = 1,
) -> ScenarioBResult:
    """Multi-start Nelder-Mead over the four free orientations.

    Starting points are drawn uniformly from ``[0, 2 pi)^4`` by a generator
    seeded with ``seed``.  The best restart wins; ties go to the lowest index.
    """
    if abs(np.sin(beta)) < 1e-9:
        raise DegenerateSchemeError(f"retardance {beta!r} is a multiple of pi")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    starts = np.random.default_rng(seed).uniform(0.0, TWO_PI, size=(restarts, 4))
    jobs = [(i, starts[i], beta, xatol, trace) for i in range(restarts)]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(lambda args: _run_restart(*args), jobs))
    else:
        results = [_run_restart(*args) for args in jobs]
    best = min(range(restarts), key=lambda i: (results[i][0].fun, i))
    x = np.mod(results[best][0].x, TWO_PI)
    return ScenarioBResult(
        beta=float(beta),
        angles=tuple((float(p1), float(p2)) for p1, p2 in _angle_pairs(x)),
        ewv_opt=float(results[best][0].fun),
        restart_index=best,
        restarts=[r[1] for r in results],
        trace=[{"restart": r[1]["restart"], "path": r[2]} for r in results] if trace else None,
    )


def scenario_b_sweep(betas, restarts: int = 16, seed: int = 0, n_jobs: int = 1) -> np.ndarray:
    """Optimal ``<EWV> * N_T`` for each retardance in ``betas``."""
    return np.array([scenario_b(b, restarts, seed, n_jobs=n_jobs).ewv_opt for b in betas])
