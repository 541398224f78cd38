"""Monte Carlo checks of the analytic EWV.

Trials are processed in fixed-size blocks.  Block ``b`` draws from its own
generator seeded by ``SeedSequence(seed, spawn_key=(b,))``, so a run is
reproducible and independent of how blocks are scheduled across threads.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from .basis import coeffs_to_density, make_basis
from .errors import ContractViolation, InvalidDimensionError
from .ewv import ewv_average, ewv_state, ewv_weights
from .measmat import build_matrix, project_to_physical_batch
from .povm import Scheme

BLOCK_SIZE = 4096


def _block_rng(seed, block):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _check_spectrum(d, spectrum):
    spectrum = np.asarray(spectrum, dtype=float)
    if spectrum.shape != (d,):
        raise ContractViolation(f"spectrum must have {d} entries, got shape {spectrum.shape}")
    if np.any(spectrum < 0) or abs(spectrum.sum() - 1.0) > 1e-12:
        raise ContractViolation("spectrum must be nonnegative and sum to 1")
    return spectrum


def haar_unitaries(d: int, size: int, rng) -> np.ndarray:
    """``size`` Haar-random ``d x d`` unitaries, shape ``(size, d, d)``."""
    u = unitary_group.rvs(d, size=size, random_state=rng)
    return np.asarray(u).reshape(size, d, d)


def random_state(d: int, spectrum=None, seed=None) -> np.ndarray:
    """``Q diag(spectrum) Q^dag`` with ``Q`` Haar-distributed.

    ``spectrum`` defaults to a pure state.
    """
    if d < 2:
        raise InvalidDimensionError(f"dimension must be >= 2, got {d}")
    if spectrum is None:
        spectrum = np.eye(d)[0]
    spectrum = _check_spectrum(d, spectrum)
    q = haar_unitaries(d, 1, np.random.default_rng(seed))[0]
    return (q * spectrum) @ q.conj().T


def random_states_coeffs(d: int, samples: int, seed=None, spectrum=None) -> np.ndarray:
    """Coefficient vectors of Haar-random states.

    With ``spectrum=None`` each state gets its own eigenvalues drawn from the
    flat Dirichlet distribution on the simplex.
    """
    rng = np.random.default_rng(seed)
    q = haar_unitaries(d, samples, rng)
    if spectrum is None:
        lam = rng.dirichlet(np.ones(d), size=samples)
    else:
        lam = np.broadcast_to(_check_spectrum(d, spectrum), (samples, d))
    rho = np.einsum("sij,sj,skj->sik", q, lam, q.conj())
    basis = make_basis(d)
    return np.sqrt(d / 2.0) * np.einsum("sab,kba->sk", rho, basis.elements).real


@dataclass
class TrialConfig:
    scheme: Scheme
    true_state: np.ndarray
    trials: int
    seed: int
    project_physical: bool = False
    exact_counts: bool = False  # debug: replace Poisson draws by their means

    def __post_init__(self):
        self.true_state = np.asarray(self.true_state, dtype=float)
        if self.trials < 1:
            raise ContractViolation("trials must be >= 1")
        rho = coeffs_to_density(self.true_state)
        if abs(self.true_state[0] - 1) > 1e-9 or np.linalg.eigvalsh(rho).min() < -1e-10:
            raise ContractViolation("true_state must be a physical, normalized state")


@dataclass
class TrialReport:
    empirical_ewv: float
    standard_error: float
    analytic_ewv: float
    component_variances: np.ndarray
    analytic_component_variances: np.ndarray
    trials: int
    total_counts: float
    projected_error: float | None = None
    projected_standard_error: float | None = None

    @property
    def z_score(self) -> float:
        if self.standard_error == 0:
            return 0.0 if self.empirical_ewv == self.analytic_ewv else math.inf
        return (self.empirical_ewv - self.analytic_ewv) / self.standard_error

    @property
    def passed(self) -> bool:
        return abs(self.z_score) < 3

    def to_dict(self):
        return {
            "empirical_ewv": self.empirical_ewv,
            "standard_error": self.standard_error,
            "analytic_ewv": self.analytic_ewv,
            "z_score": self.z_score,
            "passed": self.passed,
            "trials": self.trials,
            "n_total": self.total_counts,
            "component_variances": self.component_variances.tolist(),
            "analytic_component_variances": self.analytic_component_variances.tolist(),
            "projected_error": self.projected_error,
            "projected_standard_error": self.projected_standard_error,
        }


def _run_block(block, size, cfg, m, means):
    rng = _block_rng(cfg.seed, block)
    if cfg.exact_counts:
        counts = np.broadcast_to(means, (size, means.size)).copy()
    else:
        counts = rng.poisson(means, size=(size, means.size)).astype(float)
    est = counts @ m.pinv.T
    dev = est - cfg.true_state
    err = np.sum(dev**2, axis=1)
    out = {
        "counts": counts,
        "est": est,
        "sum": math.fsum(err),
        "sumsq": math.fsum(err**2),
        "dev_sum": dev.sum(axis=0),
        "dev_sq": (dev**2).sum(axis=0),
    }
    if cfg.project_physical:
        ok = est[:, 0] > 0
        perr = np.full(size, np.nan)
        if ok.any():
            phys = project_to_physical_batch(est[ok])
            perr[ok] = np.sum((phys - cfg.true_state) ** 2, axis=1)
        out["perr"] = perr
    return out


def run_trials(cfg: TrialConfig, workers: int = 1, dump_csv=None) -> TrialReport:
    """Sample Poisson counts, invert linearly and compare with the analytic EWV."""
    m = build_matrix(cfg.scheme)
    m.require_complete()
    means = m.matrix @ cfg.true_state
    scale = max(1.0, np.abs(means).max())
    if np.any(means < -1e-9 * scale):
        raise ContractViolation("expected counts are negative; state and scheme are inconsistent")
    means = np.clip(means, 0.0, None)

    blocks = [(b, min(BLOCK_SIZE, cfg.trials - b * BLOCK_SIZE)) for b in range(math.ceil(cfg.trials / BLOCK_SIZE))]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda bs: _run_block(bs[0], bs[1], cfg, m, means), blocks))
    else:
        parts = [_run_block(b, s, cfg, m, means) for b, s in blocks]

    t = cfg.trials
    mean = math.fsum(p["sum"] for p in parts) / t
    meansq = math.fsum(p["sumsq"] for p in parts) / t
    var = max(meansq - mean * mean, 0.0) * t / (t - 1) if t > 1 else 0.0
    dev_mean = np.sum([p["dev_sum"] for p in parts], axis=0) / t
    dev_sq = np.sum([p["dev_sq"] for p in parts], axis=0) / t
    comp_var = (dev_sq - dev_mean**2) * (t / (t - 1) if t > 1 else 1.0)

    report = TrialReport(
        empirical_ewv=mean,
        standard_error=math.sqrt(var / t),
        analytic_ewv=ewv_state(m, cfg.true_state).value,
        component_variances=comp_var,
        analytic_component_variances=(m.pinv**2) @ means,
        trials=t,
        total_counts=m.total_counts,
    )
    if cfg.project_physical:
        perr = np.concatenate([p["perr"] for p in parts])
        perr = perr[np.isfinite(perr)]
        report.projected_error = float(perr.mean())
        report.projected_standard_error = float(perr.std(ddof=1) / np.sqrt(perr.size)) if perr.size > 1 else 0.0

    if dump_csv is not None:
        _dump(dump_csv, parts, m)
    return report


def _dump(path, parts, m):
    header = ["trial"] + [f"n_{j + 1}" for j in range(m.n_rows)] + [f"S_{k}" for k in range(m.n_params)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        trial = 0
        for p in parts:
            for n, s in zip(p["counts"], p["est"]):
                w.writerow([trial] + [repr(float(v)) for v in n] + [repr(float(v)) for v in s])
                trial += 1


@dataclass
class AverageReport:
    monte_carlo: float
    standard_error: float
    analytic: float
    samples: int

    @property
    def z_score(self) -> float:
        # symmetric schemes make EWV(a) constant up to rounding; floor the
        # error at rounding scale so that noise is not read as a deviation
        scale = math.hypot(self.standard_error, 1e-12 * abs(self.analytic))
        if scale == 0:
            return 0.0
        return (self.monte_carlo - self.analytic) / scale

    @property
    def passed(self) -> bool:
        return abs(self.z_score) < 3

    def to_dict(self):
        return {
            "monte_carlo": self.monte_carlo,
            "standard_error": self.standard_error,
            "analytic": self.analytic,
            "samples": self.samples,
            "z_score": self.z_score,
            "passed": self.passed,
        }


def verify_average(scheme: Scheme, samples: int = 10_000, seed=0) -> AverageReport:
    """Average the state-dependent EWV over random mixed states.

    The states have Haar eigenvectors and flat-Dirichlet eigenvalues; the
    result is compared with the closed-form average.
    """
    m = build_matrix(scheme)
    g = ewv_weights(m)
    a = random_states_coeffs(scheme.dimension, samples, seed)
    values = a @ g
    return AverageReport(
        monte_carlo=float(values.mean()),
        standard_error=float(values.std(ddof=1) / np.sqrt(samples)),
        analytic=ewv_average(m),
        samples=samples,
    )
