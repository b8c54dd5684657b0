"""Guidance dynamics of the shell mode coordinates.

The one-quantum standing wave lives on the shell ``|k| = mu``. Its profile is
placed on one representative of every ``{k, -k}`` pair; the partner
coordinates follow from the reality constraint, so the evolved field stays
real and each representative obeys ``dq/dt = 1 / (2i q*)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import EmptyShellError, InvalidParameterError, NodeError
from .modes import ModeLattice, ModeState
from .wavefunctional import NODE_TOL, OneQuantumState, grad_S, unwrap_phase


@dataclass(frozen=True, eq=False)
class ShellSet:
    """Lattice modes with ``| |k| - mu | <= tol``, closed under ``k -> -k``."""

    lattice: ModeLattice
    indices: np.ndarray
    tol: float

    @property
    def mu(self) -> float:
        return self.lattice.mu

    def __len__(self):
        return len(self.indices)

    @property
    def wavevectors(self) -> np.ndarray:
        return self.lattice.wavevectors[self.indices]

    @property
    def integers(self) -> np.ndarray:
        return self.lattice.integers[self.indices]

    @property
    def representatives(self) -> np.ndarray:
        """One index per ``{k, -k}`` pair (the lexicographically smaller one)."""
        neg = self.lattice.negate(self.indices)
        return self.indices[self.indices <= neg]


def shell_modes(lattice: ModeLattice, tol=None) -> ShellSet:
    """Select the shell ``|k| = mu``.

    With ``tol=None`` the tolerance is zero when some lattice radius equals
    ``mu`` and half a lattice spacing (``pi/L``) otherwise.
    """
    slack = 1e-9 * max(1.0, lattice.mu)
    dev = np.abs(lattice.norms - lattice.mu)
    if tol is None:
        tol = 0.0 if np.any(dev <= slack) else np.pi / lattice.box_edge
    if tol < 0:
        raise InvalidParameterError(f"shell tolerance must be non-negative, got {tol}")
    idx = np.flatnonzero(dev <= tol + slack)
    if idx.size == 0:
        raise EmptyShellError(
            f"no lattice mode within {tol} of |k| = {lattice.mu} (L = {lattice.box_edge}, n_max = {lattice.n_max})"
        )
    return ShellSet(lattice, idx, float(tol))


def standing_wave_state(shell: ShellSet, value=1.0, frequency=None) -> OneQuantumState:
    """Equal profile on the shell representatives, oscillating at ``frequency`` (default ``mu``)."""
    f = np.zeros(shell.lattice.size, dtype=complex)
    f[shell.representatives] = value
    return OneQuantumState(shell.lattice, f, shell, shell.mu if frequency is None else frequency)


def analytic_mode_solution(omega, t):
    """``exp(-i w t) / sqrt(2 w)``; vectorized over ``t``."""
    if not np.all(np.asarray(omega) > 0):
        raise InvalidParameterError(f"frequency must be positive, got {omega}")
    return np.exp(-1j * np.asarray(omega) * np.asarray(t)) / np.sqrt(2 * np.asarray(omega))


def analytic_mode_state(state: OneQuantumState, t, base=None) -> ModeState:
    """Mode state with the analytic solution on the profile support (others from ``base`` or zero)."""
    lattice = state.lattice
    q = np.zeros(lattice.size, dtype=complex) if base is None else np.array(base.coefficients)
    idx = state.support
    q[idx] = analytic_mode_solution(state.mode_frequencies(idx), t)
    q[lattice.negate(idx)] = np.conj(q[idx])
    return ModeState(lattice, q, t)


def guidance_rhs(state: OneQuantumState, q, t=0.0, reading="collective") -> np.ndarray:
    """Mode velocities ``dq_k/dt = dS/dq_k*`` on the profile support."""
    return grad_S(state, q, t, reading=reading)


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """Time series of the evolved coordinates.

    Only the evolved modes are stored (``values[:, j]`` is mode
    ``indices[j]``); the rest of the lattice is held in ``base``.
    """

    times: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    base: ModeState
    reality_drift: np.ndarray
    unwrap_count: int = 0
    log_phase: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise InvalidParameterError("trajectory times must be strictly increasing")
        if len(self.values) != len(self.times):
            raise InvalidParameterError("states are not aligned with times")

    def __len__(self):
        return len(self.times)

    def state_at(self, i) -> ModeState:
        q = np.array(self.base.coefficients)
        q[self.indices] = self.values[i]
        return ModeState(self.base.lattice, q, self.times[i])

    def mode(self, index) -> np.ndarray:
        return self.values[:, int(np.flatnonzero(self.indices == index)[0])]


def _evolved_indices(lattice, support):
    return np.unique(np.concatenate([support, lattice.negate(support)]))


def integrate_modes(state: OneQuantumState, q0: ModeState, t0, t1, dt, reading="collective",
                    node_tol=NODE_TOL, record_every=1) -> TrajectoryRecord:
    """Fixed-step RK4 integration of the guidance equation.

    The step is shrunk to divide ``t1 - t0`` evenly. After every step the
    reality constraint is re-imposed and the pre-projection drift recorded.
    Raises :class:`NodeError` if ``|sum f q*|`` drops below ``node_tol``.
    """
    lattice = state.lattice
    if not dt > 0:
        raise InvalidParameterError(f"time step must be positive, got {dt}")
    if not t1 > t0:
        raise InvalidParameterError(f"empty time range [{t0}, {t1}]")
    support = state.support
    w_max = float(np.max(state.mode_frequencies(support)))
    if dt >= 0.1 / w_max:
        raise InvalidParameterError(f"time step {dt} exceeds stability bound 0.1/omega_max = {0.1 / w_max}")

    if reading not in ("exact", "collective"):
        raise InvalidParameterError(f"unknown gradient reading {reading!r}")

    idx = _evolved_indices(lattice, support)
    pos = {int(i): j for j, i in enumerate(idx)}
    sup_pos = np.array([pos[int(i)] for i in support])
    neg_local = np.array([pos[int(i)] for i in lattice.negate(idx)])
    f = state.profile[support]
    coef = np.broadcast_to(f if reading == "exact" else np.sum(f), f.shape).copy()
    full = np.array(q0.coefficients)
    n = max(1, math.ceil((t1 - t0) / dt - 1e-9))
    h = (t1 - t0) / n

    def velocity(tt, ys, expand):
        a = np.vdot(ys, f)
        if abs(a) < node_tol:
            q = full.copy()
            q[idx] = expand(ys)
            raise NodeError(f"node approached at t = {tt:.6g} (|sum f q*| = {abs(a):.3e})", t=tt, state=q)
        return coef / (2j * a)

    times, values, drifts = [t0], [full[idx].copy()], [0.0]
    # Partners outside the support receive conjugate velocities, so RK4 keeps
    # them exact conjugates; only the support needs integrating then.
    decoupled = not np.any(np.isin(lattice.negate(support), support))
    if decoupled:
        def expand(ys):
            y = np.empty(len(idx), dtype=complex)
            y[sup_pos] = ys
            y[neg_local[sup_pos]] = np.conj(ys)
            return y

        y = full[support].copy()
        for step in range(1, n + 1):
            t = t0 + (step - 1) * h
            k1 = velocity(t, y, expand)
            k2 = velocity(t + h / 2, y + h / 2 * k1, expand)
            k3 = velocity(t + h / 2, y + h / 2 * k2, expand)
            k4 = velocity(t + h, y + h * k3, expand)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            if step % record_every == 0 or step == n:
                times.append(t0 + step * h)
                values.append(expand(y))
                drifts.append(0.0)
    else:
        def rhs(tt, y):
            out = np.zeros(len(idx), dtype=complex)
            out[sup_pos] = velocity(tt, y[sup_pos], lambda ys: y)
            return out

        y = full[idx].copy()
        for step in range(1, n + 1):
            t = t0 + (step - 1) * h
            k1 = rhs(t, y)
            k2 = rhs(t + h / 2, y + h / 2 * k1)
            k3 = rhs(t + h / 2, y + h / 2 * k2)
            k4 = rhs(t + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            drift = float(np.max(np.abs(y - np.conj(y[neg_local]))))
            y = 0.5 * (y + np.conj(y[neg_local]))
            if step % record_every == 0 or step == n:
                times.append(t0 + step * h)
                values.append(y.copy())
                drifts.append(drift)

    values = np.array(values)
    on_support = values[:, sup_pos]
    log_phase = 0.5 * (np.angle(np.conj(on_support) @ f) - np.angle(on_support @ f))
    _, unwraps = unwrap_phase(log_phase)
    return TrajectoryRecord(np.array(times), idx, values, q0, np.array(drifts), unwraps, log_phase)


def convergence_order(errors, steps) -> float:
    """Least-squares slope of log(error) against log(step)."""
    return float(np.polyfit(np.log(steps), np.log(errors), 1)[0])


def write_trajectory_csv(record: TrajectoryRecord, path, support=None) -> Path:
    """Columns ``t``, ``re_q``/``im_q`` per mode, ``reality_drift``."""
    path = Path(path)
    lattice = record.base.lattice
    cols = record.indices if support is None else np.asarray(support)
    where = [int(np.flatnonzero(record.indices == i)[0]) for i in cols]
    names = ["_".join(map(str, lattice.integers[i])) for i in cols]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", *[c for n in names for c in (f"re_q[{n}]", f"im_q[{n}]")], "reality_drift"])
        for t, row, d in zip(record.times, record.values, record.reality_drift):
            vals = []
            for j in where:
                vals += [f"{row[j].real:.17g}", f"{row[j].imag:.17g}"]
            w.writerow([f"{t:.17g}", *vals, f"{d:.17g}"])
    return path

