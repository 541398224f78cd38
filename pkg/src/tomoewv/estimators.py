"""scikit-learn compatible wrappers around linear-inversion tomography.

Rows of ``X`` are count vectors (one experiment each); the transformed rows
are coefficient vectors ``(S_0, ..., S_{d^2-1})``.

>>> from tomoewv import LinearInversionTomography, PhysicalProjector, pauli_six_scheme
>>> from sklearn.pipeline import make_pipeline
>>> pipe = make_pipeline(LinearInversionTomography(pauli_six_scheme(100.0)), PhysicalProjector())
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .basis import coeffs_to_density
from .ewv import ewv_average, ewv_state_direct
from .measmat import build_matrix, project_to_physical_batch


class LinearInversionTomography(TransformerMixin, BaseEstimator):
    """Reconstruct coefficient vectors from counts with ``a = M^+ n``.

    Parameters
    ----------
    scheme : Scheme
        Measurement scheme; must be informationally complete.
    normalize : bool, default=False
        Divide each reconstructed vector by its ``S_0``.

    Attributes
    ----------
    measurement_matrix_ : MeasurementMatrix
    pinv_ : ndarray of shape (d**2, N)
    n_features_in_ : int
        Number of operators ``N``.
    """

    def __init__(self, scheme=None, normalize=False):
        self.scheme = scheme
        self.normalize = normalize

    def fit(self, X=None, y=None):
        if self.scheme is None:
            raise ValueError("LinearInversionTomography requires a scheme")
        m = build_matrix(self.scheme)
        m.require_complete()
        self.measurement_matrix_ = m
        self.pinv_ = m.pinv
        self.n_features_in_ = m.n_rows
        if X is not None:
            check_array(X, ensure_min_samples=1)
            self._check_width(np.asarray(X))
        return self

    def _check_width(self, X):
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but {type(self).__name__} "
                f"is expecting {self.n_features_in_} features as input"
            )

    def transform(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=float)
        self._check_width(X)
        if np.any(X < 0):
            raise ValueError("counts must be nonnegative")
        a = X @ self.pinv_.T
        if self.normalize:
            a = a / a[:, :1]
        return a

    def inverse_transform(self, A):
        """Expected counts ``M a`` for coefficient rows ``A``."""
        check_is_fitted(self)
        A = check_array(A, dtype=float)
        return A @ self.measurement_matrix_.matrix.T

    def average_ewv(self):
        check_is_fitted(self)
        return ewv_average(self.measurement_matrix_)

    def predicted_ewv(self, A):
        """Poisson EWV predicted for each normalized coefficient row."""
        check_is_fitted(self)
        A = check_array(A, dtype=float)
        return np.array([ewv_state_direct(self.measurement_matrix_, a) for a in A])

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.requires_fit = True
        tags.input_tags.positive_only = True
        return tags


class PhysicalProjector(TransformerMixin, BaseEstimator):
    """Map coefficient rows to the nearest physical state (stateless)."""

    def fit(self, X=None, y=None):
        if X is not None:
            X = check_array(X, dtype=float)
            self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        X = check_array(X, dtype=float)
        return project_to_physical_batch(X)

    def density_matrices(self, X):
        return np.array([coeffs_to_density(a) for a in self.transform(X)])

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.requires_fit = False
        return tags
