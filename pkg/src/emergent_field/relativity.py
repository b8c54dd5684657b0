"""Boosts along z, moving closed-form fields and their wave-operator and current checks.

Events are ``(t, x, y, z)`` in natural units; every sampler below is a
vectorized callable ``f(t, x, y, z)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .emergence import oracle_field, sin_over_r
from .exceptions import DegenerateCurrentError, InvalidParameterError, StencilError

CONVENTIONS = {"massless": 0.0, "kg_plus": 1.0, "kg_minus": -1.0}


@dataclass(frozen=True)
class Boost:
    """Boost with velocity ``v`` (units of c) along +z."""

    v: float

    def __post_init__(self):
        if not abs(self.v) < 1:
            raise InvalidParameterError(f"boost velocity must satisfy |v| < 1, got {self.v}")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt((1.0 - self.v) * (1.0 + self.v))

    @property
    def inverse(self) -> "Boost":
        return Boost(-self.v)

    def compose(self, other: "Boost") -> "Boost":
        return Boost((self.v + other.v) / (1 + self.v * other.v))


@dataclass(frozen=True)
class SpacetimeEvent:
    t: float
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __iter__(self):
        return iter((self.t, self.x, self.y, self.z))

    def as_array(self):
        return np.array([self.t, self.x, self.y, self.z], dtype=float)


def boost_event(b: Boost, e):
    """Coordinates of ``e`` in the frame moving with velocity ``v``.

    ``t' = gamma (t - v z)``, ``z' = gamma (z - v t)``. Accepts a
    :class:`SpacetimeEvent` or an array whose last axis is ``(t, x, y, z)``.
    """
    if isinstance(e, SpacetimeEvent):
        t, x, y, z = e
        g = b.gamma
        return SpacetimeEvent(g * (t - b.v * z), x, y, g * (z - b.v * t))
    a = np.asarray(e, dtype=float)
    out = a.copy()
    g = b.gamma
    out[..., 0] = g * (a[..., 0] - b.v * a[..., 3])
    out[..., 3] = g * (a[..., 3] - b.v * a[..., 0])
    return out


def interval(e):
    t, x, y, z = (e.as_array() if isinstance(e, SpacetimeEvent) else np.moveaxis(np.asarray(e), -1, 0))
    return t**2 - x**2 - y**2 - z**2


def mackinnon_field(mu, b: Boost, t, x=0.0, y=0.0, z=0.0):
    """Nondispersive packet ``sin(mu r)/r * exp(-i mu gamma (t - v z))``,
    ``r = sqrt(x^2 + y^2 + gamma^2 (z - v t)^2)``."""
    g = b.gamma
    t, x, y, z = (np.asarray(a, dtype=float) for a in (t, x, y, z))
    r = np.sqrt(x**2 + y**2 + (g * (z - b.v * t)) ** 2)
    out = sin_over_r(mu, r) * np.exp(-1j * mu * g * (t - b.v * z))
    return complex(out) if out.ndim == 0 else out


def boosted_emergent_field(mu, V, b: Boost, t, x=0.0, y=0.0, z=0.0, literal=False):
    """Closed-form emergent field moving with velocity ``v``.

    By default the rest-frame field is evaluated at the rest-frame
    coordinates of the event (scalar transformation law). ``literal=True``
    puts a single power of gamma on ``(z - v t)^2`` under the radical.
    """
    g = b.gamma
    t, x, y, z = (np.asarray(a, dtype=float) for a in (t, x, y, z))
    tr = g * (t - b.v * z)
    if literal:
        r = np.sqrt(x**2 + y**2 + g * (z - b.v * t) ** 2)
    else:
        r = np.sqrt(x**2 + y**2 + (g * (z - b.v * t)) ** 2)
    return oracle_field(mu, V, r, tr)


def kinematic_phase_check(mu, v, events=None, rng=0):
    """Residuals of the phase reduction ``mu gamma (t - v z) = w t - k z``.

    Returns ``(|mu gamma - w|, max |wrapped phase difference|)`` with
    ``k = mu gamma v`` and ``w = sqrt(k^2 + mu^2)``.
    """
    b = Boost(v)
    k = mu * b.gamma * v
    w = math.sqrt(k * k + mu * mu)
    if events is None:
        events = np.random.default_rng(rng).uniform(-10 / max(mu, 1e-12), 10 / max(mu, 1e-12), (64, 2))
    t, z = np.asarray(events, dtype=float).T
    packet = -mu * b.gamma * (t - v * z)
    plane = -(w * t - k * z)
    diff = np.angle(np.exp(1j * (packet - plane)))
    return abs(mu * b.gamma - w), float(np.max(np.abs(diff)))


class ClosedFormField:
    """Vectorized sampler ``f(t, x, y, z)`` with an optional non-smooth locus.

    ``kink`` maps an event to its distance from the locus in the units of
    the finite-difference step, or is ``None`` for a smooth field.
    """

    def __init__(self, func, kink=None, name=""):
        self.func = func
        self.kink = kink
        self.name = name

    def __call__(self, t, x, y, z):
        return self.func(t, x, y, z)

    def __repr__(self):
        return f"ClosedFormField({self.name!r})"


def plane_wave(mu, k):
    w = math.sqrt(k * k + mu * mu)
    return ClosedFormField(lambda t, x, y, z: np.exp(1j * (k * np.asarray(z) - w * np.asarray(t))),
                           name=f"plane wave k={k}")


def emergent_sampler(mu, V=1.0, b: Boost | None = None, literal=False):
    b = Boost(0.0) if b is None else b
    kink = lambda t, x, y, z: abs(b.gamma * (t - b.v * z)) / (b.gamma * (1 + abs(b.v)))
    return ClosedFormField(lambda t, x, y, z: boosted_emergent_field(mu, V, b, t, x, y, z, literal),
                           kink=kink, name=f"emergent field v={b.v}")


def mackinnon_sampler(mu, b: Boost | None = None):
    b = Boost(0.0) if b is None else b
    return ClosedFormField(lambda t, x, y, z: mackinnon_field(mu, b, t, x, y, z), name=f"packet v={b.v}")


_AXES = np.eye(4)


def _stencil(field, e, h):
    e = np.asarray(e.as_array() if isinstance(e, SpacetimeEvent) else e, dtype=float)
    if getattr(field, "kink", None) is not None and field.kink(*e) < 2 * h:
        raise StencilError(f"stencil of step {h} at {e.tolist()} crosses a non-smooth locus")
    pts = np.vstack([e, e + h * _AXES, e - h * _AXES])
    vals = np.asarray(field(*pts.T))
    return vals[0], vals[1:5], vals[5:9]


def wave_operator_residual(field, e, h, mu, mass_term="massless"):
    """Normalized ``lap(phi) - d_t^2 phi - s mu^2 phi`` by second-order central differences.

    ``s`` is 0, +1 or -1 for ``massless``, ``kg_plus`` or ``kg_minus``; the
    Klein-Gordon equation ``(d_t^2 - lap + mu^2) phi = 0`` is ``kg_plus``.
    The result is divided by ``mu^2 max|phi|`` over the stencil and is
    complex for complex fields.
    """
    if not h > 0:
        raise InvalidParameterError("finite-difference step must be positive")
    if mass_term not in CONVENTIONS:
        raise InvalidParameterError(f"unknown mass term {mass_term!r}")
    f0, fp, fm = _stencil(field, e, h)
    d2 = (fp + fm - 2 * f0) / h**2
    res = d2[1] + d2[2] + d2[3] - d2[0] - CONVENTIONS[mass_term] * mu**2 * f0
    scale = max(mu**2, 1e-300) * max(np.max(np.abs(fp)), np.max(np.abs(fm)), abs(f0))
    if scale == 0:
        return 0.0
    return res / scale


def richardson(values, ratio=2.0, order=2):
    """Repeated Richardson extrapolation of values at steps ``h, h/ratio, h/ratio^2, ...``."""
    v = [np.asarray(x) for x in values]
    p = order
    while len(v) > 1:
        f = ratio**p
        v = [(f * b - a) / (f - 1) for a, b in zip(v[:-1], v[1:])]
        p += order
    return v[0]


@dataclass(frozen=True)
class ResidualReport:
    event: tuple
    steps: tuple
    residuals: dict
    extrapolated: dict
    satisfied: str

    def rows(self):
        for i, h in enumerate(self.steps):
            yield (*self.event, h, *(self.residuals[c][i] for c in CONVENTIONS))


def residual_report(field, e, mu, steps, tol=1e-6) -> ResidualReport:
    """Residuals for all three operators and the one the field satisfies.

    ``satisfied`` names the operator whose extrapolated residual is below
    ``tol`` (``"none"`` if no operator qualifies).
    """
    ev = tuple(float(c) for c in (e.as_array() if isinstance(e, SpacetimeEvent) else e))
    res = {c: [complex(wave_operator_residual(field, ev, h, mu, c)) for h in steps] for c in CONVENTIONS}
    ext = {c: abs(complex(richardson(v, ratio=steps[0] / steps[1]))) for c, v in res.items()}
    best = min(ext, key=ext.get)
    clean = {c: [r.real if r.imag == 0 else abs(r) for r in v] for c, v in res.items()}
    return ResidualReport(ev, tuple(steps), clean, ext, best if ext[best] <= tol else "none")


def write_residual_csv(reports, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "z", "h", "residual_massless", "residual_kg_plus", "residual_kg_minus"])
        for rep in reports:
            for row in rep.rows():
                w.writerow([f"{v:.17g}" for v in row])
    return path


def current(field, e, h):
    """``(j0, j1, j2, j3)`` with ``j0 = -Im(phi* d_t phi)`` and ``ji = Im(phi* d_i phi)``."""
    f0, fp, fm = _stencil(field, e, h)
    d = (fp - fm) / (2 * h)
    j = np.array(np.imag(np.conj(f0) * d), dtype=float)
    j[0] = -j[0]
    return f0, d, j


def bohmian_velocity(field, e, h=1e-4):
    """``dx/dt = j / j0`` from the field's probability current."""
    f0, d, j = current(field, e, h)
    if not np.iscomplexobj(f0) and not np.iscomplexobj(d):
        raise DegenerateCurrentError("real-valued field carries no current")
    scale = abs(f0) * max(float(np.max(np.abs(d))), abs(f0))
    if scale == 0 or abs(j[0]) < 1e-12 * scale:
        raise DegenerateCurrentError(f"vanishing charge density at {np.asarray(e).tolist()}")
    return j[1:] / j[0]


@dataclass(frozen=True)
class ParticlePath:
    times: np.ndarray
    positions: np.ndarray


def integrate_particle_path(field, x0, t0, t1, dt, h=1e-4) -> ParticlePath:
    """RK4 path along the current velocity field."""
    if not dt > 0 or not t1 > t0:
        raise InvalidParameterError("need dt > 0 and t1 > t0")
    n = max(1, math.ceil((t1 - t0) / dt - 1e-9))
    step = (t1 - t0) / n
    x = np.asarray(x0, dtype=float).copy()
    ts, xs = [t0], [x.copy()]

    def vel(t, p):
        try:
            return bohmian_velocity(field, (t, *p), h)
        except DegenerateCurrentError as exc:
            raise DegenerateCurrentError(str(exc), last_position=xs[-1].copy(), t=ts[-1]) from exc

    for i in range(n):
        t = t0 + i * step
        k1 = vel(t, x)
        k2 = vel(t + step / 2, x + step / 2 * k1)
        k3 = vel(t + step / 2, x + step / 2 * k2)
        k4 = vel(t + step, x + step * k3)
        x = x + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ts.append(t0 + (i + 1) * step)
        xs.append(x.copy())
    return ParticlePath(np.array(ts), np.array(xs))


def write_path_csv(path_record: ParticlePath, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "y", "z"])
        for t, p in zip(path_record.times, path_record.positions):
            w.writerow([f"{t:.17g}", *(f"{c:.17g}" for c in p)])
    return path
