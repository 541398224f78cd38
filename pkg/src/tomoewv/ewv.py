"""Equally-weighted variance (EWV) of linear-inversion tomography under Poisson noise.

The state-dependent value is

    EWV(a) = sum_i 1/mu_i^2 sum_k r_ik a_k,   r_ik = sum_j U_ji^2 M_jk,

and averaging over Haar-random eigenbases leaves only the k = 0 column,

    <EWV> = 1/d sum_ij alpha_j U_ji^2 / mu_i^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, IncompleteSchemeError, NotMinimalError
from .measmat import MeasurementMatrix

S0_TOL = 1e-9
SIC_RTOL = 1e-9


@dataclass(frozen=True)
class EwvReport:
    value: float
    singular_values: np.ndarray
    r_matrix: np.ndarray
    total_counts: float
    lower_bound: float | None = None
    passes_sic: bool | None = None

    @property
    def value_times_nt(self) -> float:
        return self.value * self.total_counts

    def to_dict(self) -> dict:
        out = {
            "value": self.value,
            "lower_bound": self.lower_bound,
            "n_total": self.total_counts,
            "singular_values": [float(s) for s in self.singular_values],
            "value_times_nt": self.value_times_nt,
        }
        if self.passes_sic is not None:
            out["passes_sic"] = self.passes_sic
        return out


def _thin(m: MeasurementMatrix):
    m.require_complete()
    r = m.rank
    return m.u[:, :r], m.singular_values[:r]


def r_matrix(m: MeasurementMatrix) -> np.ndarray:
    """``r[i, k] = sum_j U[j, i]**2 M[j, k]``."""
    u, _ = _thin(m)
    return (u**2).T @ m.matrix


def _check_state(m, a):
    a = np.asarray(a, dtype=float)
    if a.shape != (m.n_params,):
        raise ContractViolation(f"coefficient vector must have shape ({m.n_params},), got {a.shape}")
    if abs(a[0] - 1.0) > S0_TOL:
        raise ContractViolation(f"state must be normalized (S_0 = 1), got S_0 = {a[0]!r}")
    return a


def ewv_weights(m: MeasurementMatrix) -> np.ndarray:
    """Vector ``g`` with ``EWV(a) = g . a``."""
    _, s = _thin(m)
    return (r_matrix(m) / s[:, None] ** 2).sum(axis=0)


def ewv_state(m: MeasurementMatrix, a) -> EwvReport:
    """State-dependent EWV through the SVD of ``M``."""
    a = _check_state(m, a)
    _, s = _thin(m)
    r = r_matrix(m)
    value = float(np.sum((r @ a) / s**2))
    return EwvReport(value, s.copy(), r, m.total_counts, lower_bound_for(m))


def ewv_state_direct(m: MeasurementMatrix, a) -> float:
    """Same quantity summed directly: ``sum_ij (M^+_ij)^2 n_j`` with ``n = M a``."""
    a = _check_state(m, a)
    m.require_complete()
    n = m.matrix @ a
    return float(np.sum(m.pinv**2 @ n))


def ewv_average(m: MeasurementMatrix, alphas=None) -> float:
    """Haar-averaged EWV.

    Within a degenerate singular subspace the individual columns of ``U``
    are arbitrary but ``sum_i U_ji^2`` over the subspace is not, and
    ``mu_i`` is constant there, so the plain double sum is basis-independent.
    """
    u, s = _thin(m)
    if alphas is None:
        alphas = m.alphas
    alphas = np.asarray(alphas, dtype=float)
    if alphas.shape != (m.n_rows,):
        raise ContractViolation(f"expected {m.n_rows} alphas, got shape {alphas.shape}")
    implied = m.dimension * m.matrix[:, 0]
    if np.abs(alphas - implied).max() > 1e-9 * max(1.0, np.abs(implied).max()):
        raise ContractViolation("alphas do not match the operator traces encoded in M")
    return float((alphas @ (u**2 / s**2)).sum() / m.dimension)


def ewv_lower_bound(d: int, n_ops: int, alpha: float) -> float:
    """``d^2 (d^2 + d - 1) / (N alpha)`` for N equally weighted operators."""
    if d < 2:
        raise ContractViolation(f"dimension must be >= 2, got {d}")
    if n_ops < d * d:
        raise IncompleteSchemeError(n_ops, d * d)
    if not alpha > 0:
        raise ContractViolation(f"alpha must be > 0, got {alpha}")
    return d * d * (d * d + d - 1) / (n_ops * alpha)


def lower_bound_for(m: MeasurementMatrix) -> float | None:
    """Bound for ``m`` when all operators carry the same trace, else ``None``."""
    alphas = m.alphas
    if np.ptp(alphas) > 1e-9 * np.abs(alphas).max() or m.n_rows < m.n_params:
        return None
    return ewv_lower_bound(m.dimension, m.n_rows, float(alphas.mean()))


def ewv_report(m: MeasurementMatrix, a=None) -> EwvReport:
    """Average report, or state-dependent when ``a`` is given."""
    if a is not None:
        return ewv_state(m, a)
    _, s = _thin(m)
    passes = None
    if m.n_rows == m.n_params:
        passes = verify_sic_structure(m).passed
    return EwvReport(ewv_average(m), s.copy(), r_matrix(m), m.total_counts, lower_bound_for(m), passes)


@dataclass(frozen=True)
class SicStructureReport:
    offdiag_max: float
    d1: float
    d1_expected: float
    d_rest: np.ndarray
    d_rest_expected: float
    average: float
    lower_bound: float
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def verify_sic_structure(m: MeasurementMatrix) -> SicStructureReport:
    """Check that ``M^T M`` has the diagonal form of a SIC-POVM scheme.

    With ``ncal`` the scheme's total counts, a SIC gives ``M^T M =
    diag(ncal^2/d^2, ncal^2/(d^2 (d+1)), ...)`` and its average EWV equals
    the lower bound.  All comparisons are relative at ``1e-9``.
    """
    d = m.dimension
    if m.n_rows != d * d:
        raise NotMinimalError(f"SIC structure needs N = d**2 = {d * d} operators, got {m.n_rows}")
    ncal = m.total_counts
    gram = m.matrix.T @ m.matrix
    diag = np.diag(gram).copy()
    d1_expected = ncal**2 / d**2
    d_rest_expected = ncal**2 / (d**2 * (d + 1))
    offdiag = float(np.abs(gram - np.diag(diag)).max())
    alpha = float(m.alphas.mean())
    bound = ewv_lower_bound(d, m.n_rows, alpha)
    try:
        average = ewv_average(m)
    except IncompleteSchemeError:
        average = float("inf")
    checks = {
        "diagonal": bool(offdiag <= SIC_RTOL * d1_expected),
        "d1": bool(abs(diag[0] - d1_expected) <= SIC_RTOL * d1_expected),
        "d_rest": bool(np.all(np.abs(diag[1:] - d_rest_expected) <= SIC_RTOL * d_rest_expected)),
        "attains_bound": bool(abs(average - bound) <= SIC_RTOL * bound),
    }
    return SicStructureReport(
        offdiag, float(diag[0]), d1_expected, diag[1:], d_rest_expected, average, bound, checks
    )


def ftt_singular_values_closed_form(beta: float, num_settings: int, ncal: float) -> np.ndarray:
    """Closed-form singular values of the equally spaced FTT matrix.

    ``num_settings`` counts plate orientations (two operators each); the
    formulas hold for ``num_settings >= 5``.  Returned in the order
    ``(mu_1, mu_2, mu_3, mu_4)``, which is not sorted for every ``beta``.
    """
    c = ncal * np.sqrt(num_settings)
    return np.array(
        [
            c / np.sqrt(2),
            c / (4 * np.sqrt(2)) * np.sqrt(9 + 4 * np.cos(beta) + 3 * np.cos(2 * beta)),
            c / 2 * abs(np.sin(beta)),
            c / 2 * np.sin(beta / 2) ** 2,
        ]
    )


def ftt_average_closed_form(beta) -> np.ndarray:
    """``<EWV> * N_T`` of the equally spaced FTT scheme as a function of retardance."""
    beta = np.asarray(beta, dtype=float)
    return 2 * (
        0.5
        + 1 / np.sin(beta / 2) ** 4
        + 1 / np.sin(beta) ** 2
        + 8 / (9 + 4 * np.cos(beta) + 3 * np.cos(2 * beta))
    )
