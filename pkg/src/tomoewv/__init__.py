"""Uncertainty analysis and design of quantum state tomography schemes.

The figure of merit is the equally-weighted variance (EWV) of the
linear-inversion estimate under Poisson counting noise, computed from the
singular value decomposition of the measurement matrix.
"""

from .basis import HermitianBasis, coeffs_to_density, density_to_coeffs, make_basis
from .errors import (
    ContractViolation,
    DegenerateReconstructionError,
    DegenerateSchemeError,
    IncompleteSchemeError,
    InvalidDimensionError,
    InvalidOperatorError,
    NotMinimalError,
    TomographyError,
)
from .estimators import LinearInversionTomography, PhysicalProjector
from .ewv import (
    EwvReport,
    SicStructureReport,
    ewv_average,
    ewv_lower_bound,
    ewv_report,
    ewv_state,
    ewv_state_direct,
    verify_sic_structure,
)
from .measmat import (
    MeasurementMatrix,
    build_matrix,
    expected_counts,
    project_to_physical,
    pseudo_inverse,
    reconstruct,
)
from .optimize import ScenarioAResult, ScenarioBResult, scenario_a, scenario_b
from .povm import (
    PovmGroup,
    ProbabilityOperator,
    Scheme,
    ftt_scheme,
    pauli_six_scheme,
    sic_povm_qubit,
    two_waveplate_operator,
    two_waveplate_scheme,
    waveplate_unitary,
)
from .simulate import TrialConfig, TrialReport, random_state, run_trials, verify_average

__version__ = "0.1.0"

__all__ = [
    "ContractViolation",
    "DegenerateReconstructionError",
    "DegenerateSchemeError",
    "EwvReport",
    "HermitianBasis",
    "IncompleteSchemeError",
    "InvalidDimensionError",
    "InvalidOperatorError",
    "LinearInversionTomography",
    "MeasurementMatrix",
    "NotMinimalError",
    "PhysicalProjector",
    "PovmGroup",
    "ProbabilityOperator",
    "ScenarioAResult",
    "ScenarioBResult",
    "Scheme",
    "SicStructureReport",
    "TomographyError",
    "TrialConfig",
    "TrialReport",
    "build_matrix",
    "coeffs_to_density",
    "density_to_coeffs",
    "ewv_average",
    "ewv_lower_bound",
    "ewv_report",
    "ewv_state",
    "ewv_state_direct",
    "expected_counts",
    "ftt_scheme",
    "make_basis",
    "pauli_six_scheme",
    "project_to_physical",
    "pseudo_inverse",
    "random_state",
    "reconstruct",
    "run_trials",
    "scenario_a",
    "scenario_b",
    "sic_povm_qubit",
    "two_waveplate_operator",
    "two_waveplate_scheme",
    "verify_average",
    "verify_sic_structure",
    "waveplate_unitary",
]
