"""Vacuum and one-quantum wavefunctionals over mode coordinates.

Both are evaluated in log / prefactor form so that the Gaussian factor never
underflows on large lattices.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidParameterError, LatticeMismatchError, NodeError
from .modes import ModeLattice, ModeState

NODE_TOL = 1e-10


def _coeffs(lattice: ModeLattice, q) -> np.ndarray:
    """Accept a ModeState or a raw coefficient array (used by finite-difference oracles)."""
    if isinstance(q, ModeState):
        if q.lattice != lattice:
            raise LatticeMismatchError("mode state belongs to a different lattice")
        return q.coefficients
    q = np.asarray(q, dtype=complex)
    if q.shape != (lattice.size,):
        raise LatticeMismatchError(f"expected {lattice.size} coefficients, got shape {q.shape}")
    return q


@dataclass(frozen=True, eq=False)
class VacuumState:
    """Gaussian ground state; ``total_energy`` defaults to the half-lattice sum of frequencies."""

    lattice: ModeLattice
    total_energy: float | None = None
    log_norm: float = 0.0

    def __post_init__(self):
        if self.total_energy is None:
            e0 = float(np.sum(self.lattice.frequencies[self.lattice.half_indices]))
            object.__setattr__(self, "total_energy", e0)
        if not np.isfinite(self.total_energy):
            raise InvalidParameterError("vacuum energy must be finite")


@dataclass(frozen=True, eq=False)
class OneQuantumState:
    """Single excitation of the vacuum with mode profile ``profile``.

    ``shell`` optionally records the mode set the profile was built on.
    ``frequency``, when set, replaces the lattice dispersion for every
    supported mode (the rest-frame standing wave uses ``w = mu``).
    """

    lattice: ModeLattice
    profile: np.ndarray
    shell: object = field(default=None, repr=False)
    frequency: float | None = None

    def __post_init__(self):
        f = np.asarray(self.profile, dtype=complex)
        if f.shape != (self.lattice.size,):
            raise LatticeMismatchError(f"profile must have {self.lattice.size} entries, got {f.shape}")
        f = f.copy()
        f.setflags(write=False)
        object.__setattr__(self, "profile", f)
        if self.frequency is not None and not self.frequency > 0:
            raise InvalidParameterError(f"mode frequency must be positive, got {self.frequency}")

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.profile)

    def scaled(self, c) -> "OneQuantumState":
        return OneQuantumState(self.lattice, c * self.profile, self.shell, self.frequency)

    def mode_frequencies(self, idx=None) -> np.ndarray:
        idx = self.support if idx is None else np.asarray(idx)
        if self.frequency is not None:
            return np.full(idx.shape, float(self.frequency))
        return self.lattice.frequencies[idx]

    def shell_frequency(self) -> float:
        """Common frequency of the supported modes; raises if they are not degenerate."""
        w = self.mode_frequencies()
        if w.size == 0:
            raise InvalidParameterError("one-quantum profile is empty")
        if np.ptp(w) > 1e-9 * max(1.0, w.max()):
            raise InvalidParameterError("profile support is not a single frequency shell")
        return float(w.mean())


@dataclass(frozen=True)
class PhaseDecomposition:
    amplitude: float
    phase: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise InvalidParameterError("amplitude must be non-negative")

    def value(self) -> complex:
        return self.amplitude * np.exp(1j * self.phase)


def eval_log_vacuum(vac: VacuumState, q, t) -> complex:
    """``log N - sum_{k/2} w_k |q_k|^2 - i E0 t``."""
    c = _coeffs(vac.lattice, q)
    half = vac.lattice.half_indices
    quad = np.sum(vac.lattice.frequencies[half] * np.abs(c[half]) ** 2)
    return complex(vac.log_norm - quad, -vac.total_energy * t)


def eval_one_quantum(state: OneQuantumState, vac: VacuumState, q, t):
    """Return ``(prefactor, log_vacuum)`` with ``Psi1 = prefactor * exp(log_vacuum)``."""
    c = _coeffs(state.lattice, q)
    idx = state.support
    w = state.mode_frequencies(idx)
    pre = np.sum(state.profile[idx] * np.sqrt(2 * w) * np.conj(c[idx]) * np.exp(-1j * w * t))
    return complex(pre), eval_log_vacuum(vac, c, t)


def polar(state: OneQuantumState, vac: VacuumState, q, t) -> PhaseDecomposition:
    """``Psi1 = R exp(iS)`` by direct evaluation (not the closed-form phase)."""
    pre, logv = eval_one_quantum(state, vac, q, t)
    return PhaseDecomposition(float(abs(pre) * np.exp(logv.real)), float(np.angle(pre) + logv.imag))


def apply_creation(k, vac: VacuumState) -> OneQuantumState:
    """Single-mode excitation of the vacuum: unit profile at wavevector ``k``."""
    lattice = vac.lattice
    f = np.zeros(lattice.size, dtype=complex)
    f[lattice.index_of_wavevector(k)] = 1.0
    return OneQuantumState(lattice, f)


def _shell_sums(state: OneQuantumState, c):
    idx = state.support
    f = state.profile[idx]
    return np.sum(f * np.conj(c[idx])), np.sum(f * c[idx])


def phase_S(state: OneQuantumState, q, t, E0=None) -> float:
    """Phase functional of the standing-wave one-quantum state.

    The log-ratio term is evaluated as ``(arg A - arg B) / 2`` with
    ``A = sum f q*`` and ``B = sum f q`` on principal branches. For real
    profiles this equals ``-arg B``; continuity along a trajectory is
    restored with :func:`unwrap_phase`.
    """
    c = _coeffs(state.lattice, q)
    a, b = _shell_sums(state, c)
    if abs(a) < NODE_TOL or abs(b) < NODE_TOL:
        raise NodeError(f"one-quantum prefactor vanishes (|sum f q*| = {abs(a):.3e})", t=t)
    if E0 is None:
        E0 = VacuumState(state.lattice).total_energy
    w = state.shell_frequency()
    return 0.5 * (np.angle(a) - np.angle(b)) - w * t - E0 * t


def grad_S(state: OneQuantumState, q, t=0.0, reading="exact") -> np.ndarray:
    """Derivative of the phase with respect to each ``q_k*``.

    ``reading="exact"`` differentiates the log-ratio directly,
    ``f_k / (2i sum f q*)``. ``reading="collective"`` treats the equal shell
    amplitudes as one coordinate ``Q = sum f q* / sum f`` and gives every
    supported mode ``1 / (2i Q)``; on a single mode both agree.
    """
    c = _coeffs(state.lattice, q)
    idx = state.support
    a, _ = _shell_sums(state, c)
    if abs(a) < NODE_TOL:
        raise NodeError(f"one-quantum prefactor vanishes (|sum f q*| = {abs(a):.3e})", t=t)
    out = np.zeros(state.lattice.size, dtype=complex)
    if reading == "exact":
        out[idx] = state.profile[idx] / (2j * a)
    elif reading == "collective":
        out[idx] = np.sum(state.profile[idx]) / (2j * a)
    else:
        raise InvalidParameterError(f"unknown gradient reading {reading!r}")
    return out


def collective_gradient(q) -> complex:
    """``1 / (2i q*)`` for a single collective shell coordinate."""
    q = complex(q)
    if abs(q) < NODE_TOL:
        raise NodeError("collective coordinate is at a node")
    return 1.0 / (2j * np.conj(q))


def unwrap_phase(values):
    """Remove jumps of the log-ratio term along a trajectory.

    Returns the unwrapped array and the number of samples that were shifted.
    """
    v = np.asarray(values, dtype=float)
    u = np.unwrap(v, period=np.pi)
    return u, int(np.count_nonzero(np.abs(np.diff(u - v)) > 1e-12)) if v.size > 1 else 0


def _wirtinger(psi, c, i, eps):
    def at(z):
        qq = np.array(c, dtype=complex)
        qq[i] = z
        j = qq.size - 1 - i
        if j != i:
            qq[j] = np.conj(z)
        return psi(qq)

    z = c[i]
    dx = (at(z + eps) - at(z - eps)) / (2 * eps)
    dy = (at(z + 1j * eps) - at(z - 1j * eps)) / (2 * eps)
    return 0.5 * (dx - 1j * dy), 0.5 * (dx + 1j * dy)


def creation(psi, lattice: ModeLattice, k, eps=1e-5):
    """Raising operator for mode ``k`` acting on a callable wavefunctional.

    ``a+ = (w q* - d/dq) / sqrt(2w)`` with the derivative taken by central
    differences; the partner coordinate ``q_{-k}`` is kept conjugate.
    """
    i = lattice.index_of_wavevector(k)
    w = lattice.frequencies[i]

    def raised(q):
        c = np.asarray(q, dtype=complex)
        d_q, _ = _wirtinger(psi, c, i, eps)
        return (w * np.conj(c[i]) * psi(c) - d_q) / np.sqrt(2 * w)

    return raised


def annihilation(psi, lattice: ModeLattice, k, eps=1e-5):
    """Lowering operator ``a = (w q + d/dq*) / sqrt(2w)``, finite-difference realization."""
    i = lattice.index_of_wavevector(k)
    w = lattice.frequencies[i]

    def lowered(q):
        c = np.asarray(q, dtype=complex)
        _, d_qbar = _wirtinger(psi, c, i, eps)
        return (w * c[i] * psi(c) + d_qbar) / np.sqrt(2 * w)

    return lowered


def vacuum_callable(vac: VacuumState, t=0.0):
    return lambda q: np.exp(eval_log_vacuum(vac, q, t))


def one_quantum_callable(state: OneQuantumState, vac: VacuumState, t=0.0):
    def psi(q):
        pre, logv = eval_one_quantum(state, vac, q, t)
        return pre * np.exp(logv)

    return psi
