"""Box normal modes of a real scalar field.

The field in a periodic cube of edge ``L`` is expanded as

    phi(x) = V**-1/2 * sum_k q_k exp(i k.x),   k = 2*pi*n / L,

with complex mode coordinates obeying ``q_{-k} = conj(q_k)`` so that ``phi``
is real. Natural units (hbar = c = 1) throughout.
"""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .exceptions import InvalidParameterError, LatticeMismatchError

REALITY_TOL = 1e-12


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ModeLattice:
    """Wavevectors ``2*pi*n/L`` with ``n_i`` in ``[-n_max, n_max]``.

    Modes are enumerated lexicographically in ``(n1, n2, n3)``; with this
    order the mode ``-k`` of index ``i`` sits at index ``size - 1 - i`` and
    the zero mode is the middle entry.
    """

    box_edge: float
    n_max: int
    mu: float

    def __post_init__(self):
        if not np.isfinite(self.box_edge) or self.box_edge <= 0:
            raise InvalidParameterError(f"box edge must be positive, got {self.box_edge}")
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise InvalidParameterError(f"n_max must be a non-negative integer, got {self.n_max}")
        if not np.isfinite(self.mu) or self.mu < 0:
            raise InvalidParameterError(f"mass must be non-negative, got {self.mu}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def side(self) -> int:
        return 2 * self.n_max + 1

    @property
    def size(self) -> int:
        return self.side**3

    @property
    def volume(self) -> float:
        return self.box_edge**3

    @property
    def spacing(self) -> float:
        """Wavevector spacing ``2*pi/L``."""
        return 2 * np.pi / self.box_edge

    @cached_property
    def integers(self) -> np.ndarray:
        r = range(-self.n_max, self.n_max + 1)
        return _frozen(np.array(list(itertools.product(r, r, r)), dtype=np.int64).reshape(-1, 3))

    @cached_property
    def wavevectors(self) -> np.ndarray:
        return _frozen(self.spacing * self.integers)

    @cached_property
    def norms(self) -> np.ndarray:
        return _frozen(np.sqrt(np.sum(self.wavevectors**2, axis=1)))

    @cached_property
    def frequencies(self) -> np.ndarray:
        return _frozen(dispersion(self, self.wavevectors))

    @property
    def zero_index(self) -> int:
        return self.size // 2

    def negate(self, index):
        """Index (or indices) of the mode ``-k``."""
        return self.size - 1 - np.asarray(index)

    @property
    def half_indices(self) -> np.ndarray:
        """One representative per ``{k, -k}`` pair, zero mode included once."""
        return np.arange(self.size // 2 + 1)

    def index_of(self, n) -> int:
        n = np.asarray(n, dtype=np.int64)
        if n.shape != (3,) or np.any(np.abs(n) > self.n_max):
            raise LatticeMismatchError(f"integer triple {n.tolist()} is not on the lattice")
        d = self.side
        m = n + self.n_max
        return int((m[0] * d + m[1]) * d + m[2])

    def index_of_wavevector(self, k, atol=1e-9) -> int:
        n = np.asarray(k, dtype=float) / self.spacing
        rn = np.rint(n)
        if n.shape != (3,) or np.any(np.abs(n - rn) > atol):
            raise LatticeMismatchError(f"wavevector {np.asarray(k).tolist()} is not on the lattice")
        return self.index_of(rn.astype(np.int64))


def build_lattice(box_edge, n_max, mu) -> ModeLattice:
    return ModeLattice(float(box_edge), n_max, float(mu))


def dispersion(lattice: ModeLattice, k) -> np.ndarray | float:
    """Mode frequency ``sqrt(k.k + mu**2)``; accepts one wavevector or an ``(n, 3)`` array."""
    k = np.asarray(k, dtype=float)
    w = np.sqrt(np.sum(k**2, axis=-1) + lattice.mu**2)
    return float(w) if w.ndim == 0 else w


@dataclass(frozen=True, eq=False)
class ModeState:
    """Mode coordinates ``q_k`` on every lattice mode at time ``t``.

    Reality violations up to ``reality_tol`` are projected away on
    construction; larger ones raise.
    """

    lattice: ModeLattice
    coefficients: np.ndarray
    t: float = 0.0
    reality_tol: float = field(default=REALITY_TOL, repr=False)

    def __post_init__(self):
        q = np.asarray(self.coefficients, dtype=complex)
        if q.shape != (self.lattice.size,):
            raise LatticeMismatchError(
                f"expected {self.lattice.size} coefficients, got shape {q.shape}"
            )
        drift = reality_drift(self.lattice, q)
        if drift > self.reality_tol:
            raise InvalidParameterError(
                f"reality constraint q(-k) = conj(q(k)) violated by {drift:.3e}"
            )
        object.__setattr__(self, "coefficients", _frozen(project_reality(self.lattice, q)))
        object.__setattr__(self, "t", float(self.t))

    def __getitem__(self, n):
        return self.coefficients[self.lattice.index_of(n)]


def reality_drift(lattice: ModeLattice, q) -> float:
    q = np.asarray(q)
    return float(np.max(np.abs(q - np.conj(q[::-1])))) if q.size else 0.0


def project_reality(lattice: ModeLattice, q) -> np.ndarray:
    q = np.asarray(q, dtype=complex)
    return 0.5 * (q + np.conj(q[::-1]))


def random_mode_state(lattice: ModeLattice, rng=None, scale=1.0, t=0.0) -> ModeState:
    """Gaussian random coefficients with the reality constraint built in."""
    rng = np.random.default_rng(rng)
    z = rng.normal(size=lattice.size) + 1j * rng.normal(size=lattice.size)
    return ModeState(lattice, scale * project_reality(lattice, z), t)


@dataclass(frozen=True)
class GridSpec:
    """Regular grid ``origin + h * index`` with ``shape`` points per axis."""

    origin: tuple
    spacing: tuple
    shape: tuple

    def __post_init__(self):
        origin = tuple(float(o) for o in np.broadcast_to(self.origin, (3,)))
        spacing = tuple(float(h) for h in np.broadcast_to(self.spacing, (3,)))
        shape = tuple(int(s) for s in np.broadcast_to(self.shape, (3,)))
        if any(not np.isfinite(h) or h <= 0 for h in spacing):
            raise InvalidParameterError(f"grid spacing must be positive, got {spacing}")
        if any(s < 1 for s in shape):
            raise InvalidParameterError(f"grid shape must be positive, got {shape}")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "shape", shape)

    @classmethod
    def periodic(cls, box_edge, points, centered=True) -> "GridSpec":
        """``points`` samples per axis covering one period, endpoint excluded."""
        h = box_edge / points
        o = -box_edge / 2 if centered else 0.0
        return cls((o,) * 3, (h,) * 3, (points,) * 3)

    def axes(self):
        return tuple(o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.shape))

    def mesh(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def radii(self) -> np.ndarray:
        x, y, z = self.mesh()
        return np.sqrt(x**2 + y**2 + z**2)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))


@dataclass(frozen=True, eq=False)
class FieldSample:
    grid: GridSpec
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.grid.shape:
            raise InvalidParameterError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)


def _phase_tables(lattice, grid, sign):
    n = np.arange(-lattice.n_max, lattice.n_max + 1)
    return [np.exp(sign * 1j * lattice.spacing * np.outer(n, x)) for x in grid.axes()]


def synthesize_field(lattice: ModeLattice, state: ModeState, grid: GridSpec) -> FieldSample:
    """Evaluate the mode sum on a grid.

    The sum is separable over axes, so it is contracted one axis at a time.
    The result is returned real when the imaginary part is at roundoff level.
    """
    if state.lattice != lattice:
        raise LatticeMismatchError("mode state belongs to a different lattice")
    d = lattice.side
    q = state.coefficients.reshape(d, d, d)
    e1, e2, e3 = _phase_tables(lattice, grid, +1)
    phi = np.einsum("abc,ai,bj,ck->ijk", q, e1, e2, e3, optimize=True) / np.sqrt(lattice.volume)
    peak = np.max(np.abs(phi)) if phi.size else 0.0
    if peak == 0.0 or np.max(np.abs(phi.imag)) <= REALITY_TOL * peak:
        phi = phi.real.copy()
    return FieldSample(grid, phi, state.t)


def analyze_field(lattice: ModeLattice, sample: FieldSample) -> ModeState:
    """Project a field sampled over one box period onto the lattice modes.

    Uses the uniform periodic rule, which is exact for fields band-limited to
    the lattice provided each axis has at least ``2*n_max + 1`` points.
    """
    grid = sample.grid
    for n, h in zip(grid.shape, grid.spacing):
        if abs(n * h - lattice.box_edge) > 1e-12 * lattice.box_edge:
            raise LatticeMismatchError(
                f"grid of {n} points at spacing {h} does not span the box edge {lattice.box_edge}"
            )
        if n < lattice.side:
            raise LatticeMismatchError(
                f"{n} points per axis alias a lattice with {lattice.side} modes per axis"
            )
    e1, e2, e3 = _phase_tables(lattice, grid, -1)
    q = np.einsum("ijk,ai,bj,ck->abc", sample.values, e1, e2, e3, optimize=True)
    q *= grid.cell_volume / np.sqrt(lattice.volume)
    return ModeState(lattice, q.reshape(-1), sample.t, reality_tol=1e-9 * max(1.0, np.max(np.abs(q))))


def write_mode_state_csv(state: ModeState, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n1", "n2", "n3", "re_q", "im_q"])
        for n, q in zip(state.lattice.integers, state.coefficients):
            w.writerow([*map(int, n), f"{q.real:.17g}", f"{q.imag:.17g}"])
    return path


def read_mode_state_csv(path, lattice: ModeLattice, t=0.0) -> ModeState:
    q = np.zeros(lattice.size, dtype=complex)
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            i = lattice.index_of([int(row["n1"]), int(row["n2"]), int(row["n3"])])
            q[i] = complex(float(row["re_q"]), float(row["im_q"]))
    return ModeState(lattice, q, t)
