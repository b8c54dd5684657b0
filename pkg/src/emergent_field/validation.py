"""Input validation helpers shared by the estimators and the CLI."""
from __future__ import annotations

import numpy as np

from .exceptions import InvalidParameterError


def check_samples(X, allow_complex=True, n_features=None, name="X"):
    """2-d float or complex array with finite entries.

    scikit-learn's ``check_array`` rejects complex input, which mode
    coordinates always are.
    """
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise InvalidParameterError(f"{name} must be 2-d, got {X.ndim}-d")
    if np.iscomplexobj(X):
        if not allow_complex:
            raise InvalidParameterError(f"{name} must be real")
        X = X.astype(complex)
    else:
        X = X.astype(float)
    if not np.all(np.isfinite(X)):
        raise InvalidParameterError(f"{name} contains NaN or infinity")
    if n_features is not None and X.shape[1] != n_features:
        raise InvalidParameterError(f"{name} has {X.shape[1]} features, expected {n_features}")
    return X


def check_events(X):
    """Spacetime events as an ``(n, 4)`` float array of ``(t, x, y, z)``."""
    return check_samples(X, allow_complex=False, n_features=4, name="events")


def check_times(T):
    T = np.atleast_1d(np.asarray(T, dtype=float))
    if T.ndim != 1 or not np.all(np.isfinite(T)):
        raise InvalidParameterError("times must be a finite 1-d array")
    return T


def cube_side(n_features):
    m = int(round(n_features ** (1 / 3)))
    for c in (m - 1, m, m + 1):
        if c > 0 and c**3 == n_features:
            return c
    raise InvalidParameterError(f"{n_features} features is not a cubic grid")


def default_cutoff(mu, box_edge):
    """Smallest ``n_max`` whose lattice reaches the shell ``|k| = mu``."""
    return max(1, int(np.ceil(mu * box_edge / (2 * np.pi) - 1e-9)))
