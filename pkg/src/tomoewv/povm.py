"""Probability operators, POVM groups and the built-in measurement schemes.

Operators are *unnormalized*: each group sums to ``total_counts * I`` so that
``Tr[rho E_j]`` is directly an expected count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .errors import DegenerateSchemeError, InvalidDimensionError, InvalidOperatorError

OPERATOR_TOL = 1e-10

# Start of the FTT orientation grid.  With the literal E = N U^dag |a><a| U
# this offset lists the six settings in the standard row order of the
# 12 x 4 FTT measurement matrix; the angle set equals pi/6 + k pi/3.
FTT_OFFSET = 7 * np.pi / 6

_I2 = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)

_KETS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "A": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "R": np.array([1, 1j], dtype=complex) / np.sqrt(2),
    "L": np.array([1, -1j], dtype=complex) / np.sqrt(2),
}


def projector(ket) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    ket = ket / np.linalg.norm(ket)
    return np.outer(ket, ket.conj())


def polarization_projector(label: str) -> np.ndarray:
    """Projector onto one of ``H, V, D, A, R, L``."""
    try:
        return projector(_KETS[label])
    except KeyError:
        raise ValueError(f"unknown polarization label {label!r}") from None


def _read_only(m):
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class ProbabilityOperator:
    """Positive operator ``E`` with trace ``alpha``."""

    matrix: np.ndarray
    alpha: float

    def __post_init__(self):
        m = _read_only(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise InvalidOperatorError(f"operator must be a square matrix, got {m.shape}")
        scale = max(1.0, abs(float(self.alpha)))
        if np.abs(m - m.conj().T).max() > OPERATOR_TOL * scale:
            raise InvalidOperatorError("operator is not Hermitian")
        if np.linalg.eigvalsh(m).min() < -OPERATOR_TOL * scale:
            raise InvalidOperatorError("operator is not positive semidefinite")
        if not self.alpha > 0:
            raise InvalidOperatorError(f"operator trace alpha must be > 0, got {self.alpha}")
        if abs(np.trace(m).real - self.alpha) > OPERATOR_TOL * scale:
            raise InvalidOperatorError(
                f"Tr[E] = {np.trace(m).real!r} does not match alpha = {self.alpha!r}"
            )
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def from_matrix(cls, matrix):
        matrix = np.asarray(matrix, dtype=complex)
        return cls(matrix, float(np.trace(matrix).real))

    @property
    def dimension(self):
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class PovmGroup:
    """Operators recorded together; they sum to ``total_counts * I``."""

    operators: tuple
    total_counts: float

    def __post_init__(self):
        ops = tuple(self.operators)
        if not ops:
            raise InvalidOperatorError("a POVM group needs at least one operator")
        d = ops[0].dimension
        if any(op.dimension != d for op in ops):
            raise InvalidOperatorError("operators in a group must share one dimension")
        if not self.total_counts > 0:
            raise InvalidOperatorError(f"total_counts must be > 0, got {self.total_counts}")
        total = sum(op.matrix for op in ops)
        ncal = float(self.total_counts)
        if np.abs(total - ncal * np.eye(d)).max() > OPERATOR_TOL * max(1.0, ncal):
            raise InvalidOperatorError("group operators do not sum to total_counts * I")
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "total_counts", ncal)

    @property
    def dimension(self):
        return self.operators[0].dimension

    def __len__(self):
        return len(self.operators)


@dataclass(frozen=True, eq=False)
class Scheme:
    """An ordered collection of POVM groups acting on one Hilbert space."""

    groups: tuple

    def __post_init__(self):
        groups = tuple(self.groups)
        if not groups:
            raise InvalidOperatorError("a scheme needs at least one group")
        if len({g.dimension for g in groups}) != 1:
            raise InvalidOperatorError("all groups of a scheme must share one dimension")
        object.__setattr__(self, "groups", groups)

    @property
    def dimension(self) -> int:
        return self.groups[0].dimension

    @property
    def n_operators(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def total_counts(self) -> float:
        """``N_T``: counts summed over all groups."""
        return float(sum(g.total_counts for g in self.groups))

    @property
    def operators(self) -> list:
        return [op for g in self.groups for op in g.operators]

    @property
    def alphas(self) -> np.ndarray:
        return np.array([op.alpha for op in self.operators])

    def operator_matrices(self) -> np.ndarray:
        return np.array([op.matrix for op in self.operators])

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "groups": [
                {
                    "total_counts": g.total_counts,
                    "operators": [
                        {
                            "re": op.matrix.real.tolist(),
                            "im": op.matrix.imag.tolist(),
                            "alpha": op.alpha,
                        }
                        for op in g.operators
                    ],
                }
                for g in self.groups
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "Scheme":
        try:
            d = int(data["dimension"])
            groups = []
            for g in data["groups"]:
                ops = []
                for op in g["operators"]:
                    m = np.asarray(op["re"], dtype=float) + 1j * np.asarray(op["im"], dtype=float)
                    if m.shape != (d, d):
                        raise InvalidOperatorError(
                            f"operator has shape {m.shape}, expected {(d, d)}"
                        )
                    alpha = op.get("alpha", np.trace(m).real)
                    ops.append(ProbabilityOperator(m, float(alpha)))
                groups.append(PovmGroup(tuple(ops), float(g["total_counts"])))
        except (KeyError, TypeError) as exc:
            raise InvalidOperatorError(f"malformed scheme document: {exc!r}") from exc
        return cls(tuple(groups))

    @classmethod
    def from_json(cls, text: str) -> "Scheme":
        return cls.from_dict(json.loads(text))


def _group(matrices, ncal):
    return PovmGroup(tuple(ProbabilityOperator(m, float(np.trace(m).real)) for m in matrices), ncal)


def _check_ncal(ncal):
    if not ncal > 0:
        raise InvalidOperatorError(f"ncal must be > 0, got {ncal}")


def pauli_six_scheme(ncal: float) -> Scheme:
    """Three PVMs in the H/V, D/A and R/L bases, each with ``ncal`` counts."""
    _check_ncal(ncal)
    groups = [
        _group([ncal * polarization_projector(a), ncal * polarization_projector(b)], ncal)
        for a, b in (("H", "V"), ("D", "A"), ("R", "L"))
    ]
    return Scheme(tuple(groups))


def tetrahedron_vectors() -> np.ndarray:
    """Unit vectors of a regular tetrahedron, first at +z, second in the +x half of the x-z plane."""
    r = 2 * np.sqrt(2) / 3
    angles = 2 * np.pi * np.arange(3) / 3
    rest = np.column_stack([r * np.cos(angles), r * np.sin(angles), np.full(3, -1 / 3)])
    return np.vstack([[0.0, 0.0, 1.0], rest])


def bloch_operator(vector, scale=1.0) -> np.ndarray:
    """``scale * (I + v . sigma)`` for a qubit."""
    x, y, z = vector
    return scale * (_I2 + x * _SX + y * _SY + z * _SZ)


def bloch_vector(matrix) -> np.ndarray:
    """Bloch vector of a qubit operator normalized by its trace."""
    m = np.asarray(matrix, dtype=complex)
    m = m / np.trace(m).real
    return np.array([np.trace(m @ s).real for s in (_SX, _SY, _SZ)])


def sic_povm_qubit(ncal: float) -> Scheme:
    """Four-outcome qubit SIC-POVM ``E_j = ncal/4 (I + t_j . sigma)``."""
    _check_ncal(ncal)
    mats = [bloch_operator(t, ncal / 4) for t in tetrahedron_vectors()]
    return Scheme((_group(mats, ncal),))


def waveplate_unitary(beta: float, phi: float) -> np.ndarray:
    """``cos(beta/2) I - i sin(beta/2) (cos(phi) sigma_z + sin(phi) sigma_x)``."""
    axis = np.cos(phi) * _SZ + np.sin(phi) * _SX
    return np.cos(beta / 2) * _I2 - 1j * np.sin(beta / 2) * axis


def _outcome_projector(outcome):
    if outcome in ("H", 0):
        return polarization_projector("H")
    if outcome in ("V", 1):
        return polarization_projector("V")
    raise ValueError(f"outcome must be 'H' or 'V', got {outcome!r}")


def waveplate_stack_operator(plates: Sequence[tuple], outcome, ncal: float) -> ProbabilityOperator:
    """Operator for a PBS port behind a stack of wave plates.

    ``plates`` lists ``(beta, phi)`` pairs; the result is
    ``ncal * W^dag |a><a| W`` with ``W = U(plate_1) U(plate_2) ...``.
    """
    _check_ncal(ncal)
    w = _I2
    for beta, phi in plates:
        w = w @ waveplate_unitary(beta, phi)
    m = ncal * (w.conj().T @ _outcome_projector(outcome) @ w)
    return ProbabilityOperator(m, ncal)


def two_waveplate_operator(beta, phi1, phi2, outcome, ncal) -> ProbabilityOperator:
    """Two identical plates of retardance ``beta`` at orientations ``phi1``, ``phi2``."""
    return waveplate_stack_operator([(beta, phi1), (beta, phi2)], outcome, ncal)


def _pvm(plates, ncal):
    ops = tuple(waveplate_stack_operator(plates, a, ncal) for a in ("H", "V"))
    return PovmGroup(ops, ncal)


def _is_multiple_of_pi(beta, tol=1e-9):
    k = np.round(beta / np.pi)
    return abs(beta - k * np.pi) < tol


def ftt_angles(num_settings: int, offset: float = FTT_OFFSET) -> np.ndarray:
    return offset + 2 * np.pi * np.arange(num_settings) / num_settings


def ftt_scheme(beta: float, num_settings: int, ncal: float, offset: float = FTT_OFFSET) -> Scheme:
    """Single rotating wave plate: one H/V PVM per equally spaced orientation."""
    if num_settings < 3:
        raise DegenerateSchemeError(f"need at least 3 settings, got {num_settings}")
    if _is_multiple_of_pi(beta):
        raise DegenerateSchemeError(
            f"retardance {beta!r} is a multiple of pi; the scheme is not informationally complete"
        )
    groups = [_pvm([(beta, phi)], ncal) for phi in ftt_angles(num_settings, offset)]
    return Scheme(tuple(groups))


def two_waveplate_scheme(beta: float, angles: Sequence[tuple], ncal: float) -> Scheme:
    """One H/V PVM per ``(phi1, phi2)`` pair for two identical plates."""
    if not len(angles):
        raise DegenerateSchemeError("need at least one orientation pair")
    groups = [_pvm([(beta, p1), (beta, p2)], ncal) for p1, p2 in angles]
    return Scheme(tuple(groups))


def rotate_scheme(scheme: Scheme, unitary) -> Scheme:
    """Conjugate every operator by ``unitary``: ``E -> W E W^dag``."""
    w = np.asarray(unitary, dtype=complex)
    groups = []
    for g in scheme.groups:
        ops = tuple(ProbabilityOperator(w @ op.matrix @ w.conj().T, op.alpha) for op in g.operators)
        groups.append(PovmGroup(ops, g.total_counts))
    return Scheme(tuple(groups))


def random_projector_scheme(d: int, n_bases: int, ncal: float, seed=None) -> Scheme:
    """Groups of rank-1 projectors onto Haar-random orthonormal bases.

    ``n_bases >= d + 1`` gives ``N = d (d + 1) >= d**2`` operators, which is
    informationally complete with probability one.
    """
    if d < 2:
        raise InvalidDimensionError(f"dimension must be >= 2, got {d}")
    _check_ncal(ncal)
    rng = np.random.default_rng(seed)
    groups = []
    for _ in range(n_bases):
        q = unitary_group.rvs(d, random_state=rng)
        groups.append(_group([ncal * projector(q[:, i]) for i in range(d)], ncal))
    return Scheme(tuple(groups))
