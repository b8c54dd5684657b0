"""Emergent particle field built from the guided shell modes.

Each shell mode contributes the time integral of ``Re q_k``; with the
analytic mode solution that is ``sin(w t) / (w sqrt(2 w))`` for ``t > 0``.
The continuum closed form is the spherical standing wave
``sin(mu r)/r * theta(t) sin(mu t)``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from .exceptions import InvalidParameterError
from .guidance import ShellSet, TrajectoryRecord, analytic_mode_solution
from .modes import FieldSample, GridSpec, ModeLattice


def sin_over_r(mu, r):
    """``sin(mu r) / r`` with the ``r -> 0`` limit ``mu``."""
    return mu * np.sinc(mu * np.asarray(r, dtype=float) / np.pi)


def _shell_sum(shell: ShellSet, grid: GridSpec, weights=None) -> np.ndarray:
    k = shell.wavevectors
    e1, e2, e3 = (np.exp(1j * np.outer(k[:, a], x)) for a, x in enumerate(grid.axes()))
    if weights is not None:
        e1 = e1 * np.asarray(weights)[:, None]
    s = np.einsum("mi,mj,mk->ijk", e1, e2, e3, optimize=True)
    peak = np.max(np.abs(s))
    if np.max(np.abs(s.imag)) > 1e-12 * max(peak, 1.0):
        raise InvalidParameterError("shell is not closed under k -> -k; reconstructed field is complex")
    return s.real


def mode_time_integral(mu, t, method="closed", n_nodes=64):
    """``int_0^t Re q(t') dt'`` for the analytic mode at ``w = mu``; zero for ``t <= 0``."""
    if t <= 0:
        return 0.0
    if method == "closed":
        return math.sin(mu * t) / (mu * math.sqrt(2 * mu))
    if method == "quadrature":
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        tt = 0.5 * t * (x + 1)
        return float(0.5 * t * np.sum(w * analytic_mode_solution(mu, tt).real))
    raise InvalidParameterError(f"unknown time-integral method {method!r}")


def reconstruct_field(lattice: ModeLattice, shell: ShellSet, t, grid: GridSpec, method="closed") -> FieldSample:
    """Emergent field on ``grid`` at time ``t`` from the analytic shell modes.

    ``phi(x, t) = theta(t) V**-1/2 (sin(mu t) / (mu sqrt(2 mu))) sum_{k in M} exp(i k.x)``
    """
    if len(shell) == 0:
        raise InvalidParameterError("empty shell")
    if lattice.mu <= 0:
        raise InvalidParameterError("reconstruction needs a positive mass")
    amp = mode_time_integral(lattice.mu, t, method) / math.sqrt(lattice.volume)
    if amp == 0.0:
        return FieldSample(grid, np.zeros(grid.shape), t)
    return FieldSample(grid, amp * _shell_sum(shell, grid), t)


def reconstruct_from_trajectory(record: TrajectoryRecord, shell: ShellSet, grid: GridSpec) -> FieldSample:
    """Same construction with the time integral taken over a recorded trajectory (Simpson rule)."""
    if record.times[0] != 0:
        raise InvalidParameterError("trajectory must start at t = 0")
    lattice = shell.lattice
    weights = np.array([simpson(record.mode(i).real, x=record.times) for i in shell.indices])
    phi = _shell_sum(shell, grid, weights) / math.sqrt(lattice.volume)
    return FieldSample(grid, phi, float(record.times[-1]))


def oracle_field(mu, V, r, t):
    """Closed-form emergent field, ``(2 V mu)**-1/2 / (2 pi^2) * sin(mu r)/r * theta(t) sin(mu t)``."""
    t = np.asarray(t, dtype=float)
    temporal = np.where(t > 0, np.sin(mu * t), 0.0)
    out = sin_over_r(mu, r) * temporal / (math.sqrt(2 * V * mu) * 2 * np.pi**2)
    return float(out) if np.ndim(out) == 0 else out


def shell_integral(mu, r, n_theta=None):
    """Delta-shell angular integral, which should equal ``sin(mu r) / (pi r)``.

    The radial delta fixes ``|k| = mu``; the azimuth gives ``2 pi`` and the
    polar angle is integrated by Gauss-Legendre in ``cos(theta)``. With
    ``n_theta=None`` the node count grows with ``mu r``.
    """
    r = float(r)
    if r < 0:
        raise InvalidParameterError("radius must be non-negative")
    if r == 0:
        return mu / np.pi
    n = n_theta if n_theta is not None else 40 + math.ceil(mu * r)
    if n < 2:
        raise InvalidParameterError("need at least two polar nodes")
    u, w = np.polynomial.legendre.leggauss(n)
    polar = np.sum(w * np.exp(1j * mu * r * u))
    # (1/2pi)^2 * 2pi (azimuth) * mu (delta(mu-k)/k * k^2 at k = mu)
    return float((mu / (2 * np.pi) * polar).real)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    radii: np.ndarray
    values: np.ndarray
    t: float
    convention: str = "discrete shell sum, 1/sqrt(V) normalization"

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if r.ndim != 1 or len(r) != len(self.values):
            raise InvalidParameterError("radii and values must be aligned 1-d arrays")
        if np.any(r < 0) or np.any(np.diff(r) <= 0):
            raise InvalidParameterError("radii must be non-negative and strictly increasing")


def radial_average(sample: FieldSample, window, values=None) -> RadialProfile:
    """Average grid values in radial bins of width ``h`` centred on ``0, h, 2h, ...``."""
    h = max(sample.grid.spacing)
    r = sample.grid.radii()
    v = sample.values if values is None else values
    sel = r <= window + 1e-12
    b = np.rint(r[sel] / h).astype(int)
    cnt = np.bincount(b)
    keep = cnt > 0
    radii = np.bincount(b, r[sel])[keep] / cnt[keep]
    vals = np.bincount(b, np.real(v[sel]))[keep] / cnt[keep]
    return RadialProfile(radii, vals, sample.t)


def first_zero(radii, values):
    """Radius of the first sign change, by linear interpolation; ``nan`` if none."""
    s = np.sign(values)
    ref = s[np.flatnonzero(s)[0]] if np.any(s) else 0
    hits = np.flatnonzero(s != ref)
    if ref == 0 or hits.size == 0:
        return float("nan")
    j = hits[0]
    if values[j] == 0:
        return float(radii[j])
    r0, r1, v0, v1 = radii[j - 1], radii[j], values[j - 1], values[j]
    return float(r0 - v0 * (r1 - r0) / (v1 - v0))


@dataclass(frozen=True)
class ProfileComparison:
    radii: np.ndarray
    reconstructed: np.ndarray
    oracle: np.ndarray
    l2_error: float
    first_zero: float
    first_zero_error: float
    grid_spacing: float
    amplitude_ratio: float

    @property
    def zero_within_spacing(self) -> bool:
        return bool(self.first_zero_error <= self.grid_spacing)


def _unit(v):
    n = np.linalg.norm(v)
    if n == 0:
        raise InvalidParameterError("profile vanishes identically; nothing to normalize")
    return v / n


def compare_profiles(sample, mu, t, V=None, window=None) -> ProfileComparison:
    """Shape comparison of a reconstructed field against the closed form.

    A :class:`FieldSample` is binned by radius together with the closed form
    evaluated at the same grid points, so both see identical sampling. A
    :class:`RadialProfile` is compared against the closed form at its radii.
    Both profiles are scaled to unit L2 norm over ``[0, window]`` before
    differencing.
    """
    if t <= 0:
        raise InvalidParameterError("profile comparison needs t > 0")
    V = 1.0 if V is None else V
    if isinstance(sample, FieldSample):
        grid = sample.grid
        h = max(grid.spacing)
        extent = min(min(-o, o + (n - 1) * s) for o, s, n in zip(grid.origin, grid.spacing, grid.shape))
        if window is None:
            window = extent + h
        if window > extent + h + 1e-12 or extent < 0:
            raise InvalidParameterError(f"window {window} extends outside the sampled grid")
        prof = radial_average(sample, window)
        ref = radial_average(sample, window, oracle_field(mu, V, grid.radii(), t)).values
    elif isinstance(sample, RadialProfile):
        prof = sample
        h = float(np.min(np.diff(prof.radii))) if len(prof.radii) > 1 else 0.0
        if window is not None and window > prof.radii[-1] + 1e-12:
            raise InvalidParameterError(f"window {window} extends beyond the profile")
        if window is not None:
            keep = prof.radii <= window + 1e-12
            prof = RadialProfile(prof.radii[keep], np.asarray(prof.values)[keep], prof.t)
        ref = oracle_field(mu, V, prof.radii, t)
    else:
        raise InvalidParameterError(f"cannot compare object of type {type(sample).__name__}")
    a, b = _unit(np.asarray(prof.values, dtype=float)), _unit(np.asarray(ref, dtype=float))
    z = first_zero(prof.radii, a)
    return ProfileComparison(
        radii=prof.radii,
        reconstructed=a,
        oracle=b,
        l2_error=float(np.linalg.norm(a - b)),
        first_zero=z,
        first_zero_error=abs(z - np.pi / mu),
        grid_spacing=h,
        amplitude_ratio=float(prof.values[0] / ref[0]) if ref[0] != 0 else float("nan"),
    )


def write_profile_csv(cmp: ProfileComparison, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "phi_reconstructed", "phi_oracle", "abs_diff"])
        for r, a, b in zip(cmp.radii, cmp.reconstructed, cmp.oracle):
            w.writerow([f"{r:.17g}", f"{a:.17g}", f"{b:.17g}", f"{abs(a - b):.17g}"])
    return path


def write_profile_summary(cmp: ProfileComparison, params, path, passed) -> Path:
    path = Path(path)
    doc = {
        "params": params,
        "l2_error": cmp.l2_error,
        "first_zero_error": cmp.first_zero_error,
        "pass": bool(passed),
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
