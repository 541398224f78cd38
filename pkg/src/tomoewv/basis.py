"""Generalized Gell-Mann basis and the density matrix <-> coefficient map.

A d-level state is written as

    rho = 1/sqrt(2d) * sum_i S_i sigma_i,

with sigma_0 = sqrt(2/d) I and Tr[sigma_i sigma_j] = 2 delta_ij, so that
S_0 = Tr[rho] and S_0 = 1 for a normalized state.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractViolation, InvalidDimensionError

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class HermitianBasis:
    """Ordered Hilbert-Schmidt orthogonal basis of d x d Hermitian matrices.

    ``elements`` has shape ``(d**2, d, d)``; element 0 is ``sqrt(2/d) * I``.
    The matrices are symmetric off-diagonal pairs, then antisymmetric pairs,
    then the diagonal generators, each block in lexicographic index order.
    """

    dimension: int
    elements: np.ndarray

    def __len__(self):
        return self.elements.shape[0]

    def __getitem__(self, i):
        return self.elements[i]

    def __iter__(self):
        return iter(self.elements)


@lru_cache(maxsize=None)
def make_basis(d: int) -> HermitianBasis:
    """Build the generalized Gell-Mann basis for dimension ``d``.

    For ``d == 2`` this returns ``[I, sigma_x, sigma_y, sigma_z]`` with
    ``sigma_y = [[0, -1j], [1j, 0]]``.
    """
    if int(d) != d or d < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {d!r}")
    d = int(d)
    mats = [np.sqrt(2.0 / d) * np.eye(d, dtype=complex)]
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = 1.0
        mats.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = -1j
        m[k, j] = 1j
        mats.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.sqrt(2.0 / (l * (l + 1))) * np.diag(diag).astype(complex))
    elements = np.array(mats)
    elements.setflags(write=False)
    return HermitianBasis(d, elements)


def _dimension_from_length(n):
    d = int(round(np.sqrt(n)))
    if d * d != n or d < 2:
        raise ContractViolation(f"coefficient vector length {n} is not d**2 with d >= 2")
    return d


def coeffs_to_density(a, basis: HermitianBasis | None = None) -> np.ndarray:
    """Map a coefficient vector ``(S_0, ..., S_{d^2-1})`` to a Hermitian matrix.

    Positivity is not enforced; use
    :func:`tomoewv.measmat.project_to_physical` for that.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ContractViolation("coefficient vector must be one-dimensional")
    if basis is None:
        basis = make_basis(_dimension_from_length(a.size))
    elif a.size != len(basis):
        raise ContractViolation(
            f"coefficient vector has length {a.size}, basis has {len(basis)} elements"
        )
    d = basis.dimension
    return np.tensordot(a, basis.elements, axes=1) / np.sqrt(2 * d)


def density_to_coeffs(rho, basis: HermitianBasis | None = None) -> np.ndarray:
    """Return ``S_k = sqrt(d/2) Tr[rho sigma_k]``; ``S_0`` equals ``Tr[rho]``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ContractViolation(f"density matrix must be square, got shape {rho.shape}")
    d = rho.shape[0]
    if basis is None:
        basis = make_basis(d)
    elif basis.dimension != d:
        raise ContractViolation(f"basis dimension {basis.dimension} != matrix dimension {d}")
    if np.abs(rho - rho.conj().T).max() > HERMITIAN_TOL * max(1.0, np.abs(rho).max()):
        raise ContractViolation("density matrix is not Hermitian")
    # Tr[rho sigma_k] = sum_ab rho_ab (sigma_k)_ba
    traces = np.einsum("ab,kba->k", rho, basis.elements)
    return np.sqrt(d / 2.0) * traces.real


def is_density_matrix(rho, tol: float = 1e-10) -> bool:
    """Hermitian, unit trace and positive semidefinite within tolerance."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if np.abs(rho - rho.conj().T).max() > HERMITIAN_TOL:
        return False
    if abs(np.trace(rho).real - 1.0) > HERMITIAN_TOL:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -tol)
