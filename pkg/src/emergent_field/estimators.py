"""scikit-learn style front ends.

``ModeTransformer`` maps flattened box fields to mode coordinates and back,
``StandingWaveGuidance`` predicts guided shell coordinates at given times and
``EmergentField`` predicts the emergent field at spacetime events, optionally
for a moving particle.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import emergence, guidance, modes, relativity
from .exceptions import InvalidParameterError
from .validation import check_events, check_samples, check_times, cube_side, default_cutoff


class ModeTransformer(TransformerMixin, BaseEstimator):
    """Field samples on a periodic grid <-> box mode coordinates.

    Each row of ``X`` is one field flattened from an ``(m, m, m)`` grid that
    spans one box period. ``transform`` returns complex coordinates in
    lexicographic mode order.
    """

    def __init__(self, box_edge=2 * np.pi, n_max=2, mu=0.0, centered=True):
        self.box_edge = box_edge
        self.n_max = n_max
        self.mu = mu
        self.centered = centered

    def fit(self, X, y=None):
        X = check_samples(X)
        self.lattice_ = modes.build_lattice(self.box_edge, self.n_max, self.mu)
        m = cube_side(X.shape[1])
        if m < self.lattice_.side:
            raise InvalidParameterError(f"grid of {m}^3 points cannot resolve {self.lattice_.side} modes per axis")
        self.grid_ = modes.GridSpec.periodic(self.box_edge, m, centered=self.centered)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "lattice_")
        X = check_samples(X, n_features=self.n_features_in_)
        out = np.empty((len(X), self.lattice_.size), dtype=complex)
        for i, row in enumerate(X):
            sample = modes.FieldSample(self.grid_, row.reshape(self.grid_.shape))
            out[i] = modes.analyze_field(self.lattice_, sample).coefficients
        return out

    def inverse_transform(self, Q):
        check_is_fitted(self, "lattice_")
        Q = check_samples(Q, n_features=self.lattice_.size, name="Q")
        rows = [modes.synthesize_field(self.lattice_, modes.ModeState(self.lattice_, q), self.grid_).values
                for q in Q]
        out = np.array([r.reshape(-1) for r in rows])
        return out.real if not np.iscomplexobj(out) or np.all(out.imag == 0) else out


class StandingWaveGuidance(BaseEstimator):
    """Guided shell coordinates of the rest-frame standing wave.

    ``fit`` selects the shell and the initial state ``exp(-i w t0)/sqrt(2w)``;
    ``predict(T)`` integrates to each requested time and returns the shell
    representative coordinates, one row per time.
    """

    def __init__(self, mu=1.0, box_edge=2 * np.pi, n_max=None, shell_tol=None, dt=1e-3,
                 reading="collective", frequency=None):
        self.mu = mu
        self.box_edge = box_edge
        self.n_max = n_max
        self.shell_tol = shell_tol
        self.dt = dt
        self.reading = reading
        self.frequency = frequency

    def fit(self, X=None, y=None):
        n_max = default_cutoff(self.mu, self.box_edge) if self.n_max is None else self.n_max
        self.lattice_ = modes.build_lattice(self.box_edge, n_max, self.mu)
        self.shell_ = guidance.shell_modes(self.lattice_, self.shell_tol)
        self.state_ = guidance.standing_wave_state(self.shell_, frequency=self.frequency)
        self.omega_ = self.state_.shell_frequency()
        self.q0_ = guidance.analytic_mode_state(self.state_, 0.0)
        return self

    def trajectory(self, t1, t0=0.0, record_every=1):
        check_is_fitted(self, "state_")
        q0 = guidance.analytic_mode_state(self.state_, t0)
        return guidance.integrate_modes(self.state_, q0, t0, t1, self.dt, self.reading,
                                        record_every=record_every)

    def predict(self, T):
        check_is_fitted(self, "state_")
        T = check_times(T)
        if np.any(T < 0):
            raise InvalidParameterError("backward integration is not supported")
        reps = self.state_.support
        order = np.argsort(T)
        out = np.empty((len(T), len(reps)), dtype=complex)
        q, t = self.q0_, 0.0
        for j in order:
            if T[j] > t:
                rec = guidance.integrate_modes(self.state_, q, t, T[j], self.dt, self.reading,
                                               record_every=10**9)
                q, t = rec.state_at(-1), T[j]
            out[j] = q.coefficients[reps]
        return out

    def analytic(self, T):
        check_is_fitted(self, "state_")
        T = check_times(T)
        return np.repeat(guidance.analytic_mode_solution(self.omega_, T)[:, None], len(self.state_.support), 1)


class EmergentField(BaseEstimator):
    """Emergent field at spacetime events.

    ``kind="discrete"`` sums the lattice shell (the reconstruction);
    ``kind="closed_form"`` uses the continuum expression. A non-zero
    ``velocity`` evaluates the field of a particle moving along +z through
    the scalar transformation law.
    """

    def __init__(self, mu=5.0, box_edge=2 * np.pi, n_max=None, shell_tol=None, velocity=0.0,
                 kind="discrete", literal_boost=False):
        self.mu = mu
        self.box_edge = box_edge
        self.n_max = n_max
        self.shell_tol = shell_tol
        self.velocity = velocity
        self.kind = kind
        self.literal_boost = literal_boost

    def fit(self, X=None, y=None):
        if self.kind not in ("discrete", "closed_form"):
            raise InvalidParameterError(f"unknown kind {self.kind!r}")
        n_max = default_cutoff(self.mu, self.box_edge) if self.n_max is None else self.n_max
        self.lattice_ = modes.build_lattice(self.box_edge, n_max, self.mu)
        self.shell_ = guidance.shell_modes(self.lattice_, self.shell_tol) if self.kind == "discrete" else None
        self.boost_ = relativity.Boost(self.velocity)
        return self

    def predict(self, X):
        check_is_fitted(self, "boost_")
        E = check_events(X)
        V = self.lattice_.volume
        if self.kind == "closed_form":
            return relativity.boosted_emergent_field(self.mu, V, self.boost_, *E.T, literal=self.literal_boost)
        if self.literal_boost and self.velocity != 0:
            raise InvalidParameterError("the literal boost form applies to the closed form only")
        rest = relativity.boost_event(self.boost_, E)
        amp = np.array([emergence.mode_time_integral(self.mu, t) for t in rest[:, 0]]) / math.sqrt(V)
        phase = rest[:, 1:] @ self.shell_.wavevectors.T
        return amp * np.cos(phase).sum(axis=1)
