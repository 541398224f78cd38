"""Measurement matrix, its SVD and pseudo-inverse, and linear inversion.

Row ``i`` of ``M`` holds ``Tr[sigma_j E_i] / sqrt(2d)`` so that the vector of
expected counts is ``n = M a``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import HermitianBasis, coeffs_to_density, make_basis
from .errors import ContractViolation, DegenerateReconstructionError, IncompleteSchemeError
from .povm import Scheme

# A singular value counts as zero below this fraction of the largest one.
RANK_RTOL = 1e-10


def _frozen(x):
    x = np.array(x)
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class MeasurementMatrix:
    """``N x d**2`` real measurement matrix with its SVD cached.

    Attributes
    ----------
    matrix : ndarray, shape (N, d**2)
    u : ndarray, shape (N, k)
        Thin left singular vectors, ``k = min(N, d**2)``.
    singular_values : ndarray, shape (k,)
        Non-increasing.
    vt : ndarray, shape (k, d**2)
    pinv : ndarray, shape (d**2, N)
        Moore-Penrose pseudo-inverse over the numerically nonzero singular values.
    rank : int
    alphas : ndarray, shape (N,)
        Operator traces in row order.
    total_counts : float
        ``N_T`` of the scheme.
    """

    dimension: int
    matrix: np.ndarray
    u: np.ndarray
    singular_values: np.ndarray
    vt: np.ndarray
    pinv: np.ndarray
    rank: int
    alphas: np.ndarray
    total_counts: float

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_params(self) -> int:
        return self.matrix.shape[1]

    @property
    def is_complete(self) -> bool:
        return self.rank == self.n_params

    def require_complete(self):
        if not self.is_complete:
            raise IncompleteSchemeError(self.rank, self.n_params)

    @classmethod
    def from_array(cls, matrix, alphas=None, total_counts=None) -> "MeasurementMatrix":
        """Wrap a raw matrix; ``alphas`` default to ``d * M[:, 0]``."""
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2:
            raise ContractViolation("measurement matrix must be two-dimensional")
        d = int(round(np.sqrt(matrix.shape[1])))
        if d * d != matrix.shape[1] or d < 2:
            raise ContractViolation(f"{matrix.shape[1]} columns is not d**2 with d >= 2")
        if alphas is None:
            # M[j, 0] = Tr[sigma_0 E_j] / sqrt(2d) = alpha_j / d
            alphas = d * matrix[:, 0]
        alphas = np.asarray(alphas, dtype=float)
        if total_counts is None:
            total_counts = alphas.sum() / d
        u, s, vt = np.linalg.svd(matrix, full_matrices=False)
        rank = int(np.count_nonzero(s > RANK_RTOL * s[0])) if s.size and s[0] > 0 else 0
        inv = np.zeros_like(s)
        inv[:rank] = 1.0 / s[:rank]
        pinv = (vt.T * inv) @ u.T
        return cls(
            dimension=d,
            matrix=_frozen(matrix),
            u=_frozen(u),
            singular_values=_frozen(s),
            vt=_frozen(vt),
            pinv=_frozen(pinv),
            rank=rank,
            alphas=_frozen(alphas),
            total_counts=float(total_counts),
        )


def _row_order(scheme: Scheme, row_order: str):
    if row_order == "group":
        return list(range(scheme.n_operators))
    if row_order == "outcome":
        sizes = {len(g) for g in scheme.groups}
        if len(sizes) != 1:
            raise ContractViolation("outcome-major order needs groups of equal size")
        (size,) = sizes
        return [g * size + k for k in range(size) for g in range(len(scheme.groups))]
    raise ValueError(f"row_order must be 'group' or 'outcome', got {row_order!r}")


def build_matrix(
    scheme: Scheme, basis: HermitianBasis | None = None, row_order: str = "group"
) -> MeasurementMatrix:
    """Build ``M`` for ``scheme``.

    ``row_order="group"`` lists operators group by group.  ``"outcome"``
    lists the first operator of every group, then the second, and so on;
    this is the layout of the reference FTT matrix in the tests.
    """
    d = scheme.dimension
    if basis is None:
        basis = make_basis(d)
    elif basis.dimension != d:
        raise ContractViolation(f"basis dimension {basis.dimension} != scheme dimension {d}")
    ops = scheme.operator_matrices()[_row_order(scheme, row_order)]
    # Tr[sigma_k E_i] = sum_ab (sigma_k)_ab (E_i)_ba
    traces = np.einsum("kab,iba->ik", basis.elements, ops).real
    alphas = scheme.alphas[_row_order(scheme, row_order)]
    return MeasurementMatrix.from_array(traces / np.sqrt(2 * d), alphas, scheme.total_counts)


def pseudo_inverse(m: MeasurementMatrix) -> np.ndarray:
    """``M^+ = V S^+ U^T``; raises for schemes that are not informationally complete."""
    m.require_complete()
    return m.pinv


def expected_counts(m: MeasurementMatrix, a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape[-1] != m.n_params:
        raise ContractViolation(f"coefficient vector length {a.shape[-1]} != {m.n_params}")
    return a @ m.matrix.T


def reconstruct(m: MeasurementMatrix, n) -> np.ndarray:
    """Linear inversion ``a = M^+ n``; ``n`` may be a batch of shape ``(k, N)``."""
    pinv = pseudo_inverse(m)
    n = np.asarray(n, dtype=float)
    if n.shape[-1] != m.n_rows:
        raise ContractViolation(f"count vector length {n.shape[-1]} != {m.n_rows}")
    return n @ pinv.T


def project_simplex(v) -> np.ndarray:
    """Euclidean projection of each row of ``v`` onto the probability simplex."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    k = v.shape[-1]
    u = -np.sort(-v, axis=-1, kind="stable")
    css = np.cumsum(u, axis=-1) - 1.0
    idx = np.arange(1, k + 1)
    cond = u - css / idx > 0
    # last index where the condition holds; at least the first entry always does
    rho = k - 1 - np.argmax(cond[:, ::-1], axis=-1)
    theta = css[np.arange(v.shape[0]), rho] / (rho + 1)
    return np.maximum(v - theta[:, None], 0.0)


def project_to_physical_batch(a) -> np.ndarray:
    """Vectorized :func:`project_to_physical`; returns coefficient rows with S_0 = 1."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if np.any(a[:, 0] <= 0):
        raise DegenerateReconstructionError("reconstructed S_0 must be > 0")
    d = int(round(np.sqrt(a.shape[1])))
    basis = make_basis(d)
    # Setting S_0 = 1 is the orthogonal projection onto the unit-trace plane,
    # so the nearest point of the plane's PSD part is also nearest to ``a``.
    a = a.copy()
    a[:, 0] = 1.0
    rho = np.tensordot(a, basis.elements, axes=1) / np.sqrt(2 * d)
    rho = 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
    w, vecs = np.linalg.eigh(rho)
    w = project_simplex(w)
    phys = np.einsum("tij,tj,tkj->tik", vecs, w, vecs.conj())
    traces = np.einsum("kab,tba->tk", basis.elements, phys).real
    return np.sqrt(d / 2.0) * traces


def project_to_physical(a) -> np.ndarray:
    """Nearest density matrix to ``a`` in Euclidean S-vector distance.

    Frobenius distance between the matrices is proportional to the
    Euclidean distance between S-vectors.  The minimizer replaces S_0 by 1
    (a shift along the identity), keeps the eigenvectors and projects the
    eigenvalues onto the probability simplex.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ContractViolation("coefficient vector must be one-dimensional")
    if a[0] <= 0:
        raise DegenerateReconstructionError(f"reconstructed S_0 = {a[0]!r} must be > 0")
    s = project_to_physical_batch(a[None, :])[0]
    return coeffs_to_density(s)
