import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from emergent_field import modes
from emergent_field.exceptions import InvalidParameterError, LatticeMismatchError

TWO_PI = 2 * np.pi


def test_single_mode_lattice():
    lat = modes.build_lattice(TWO_PI, 0, 1.0)
    assert lat.size == 1
    np.testing.assert_array_equal(lat.wavevectors, [[0.0, 0.0, 0.0]])


def test_unit_spacing_lattice():
    lat = modes.build_lattice(TWO_PI, 1, 1.0)
    assert lat.size == 27
    assert set(np.unique(lat.wavevectors)) == {-1.0, 0.0, 1.0}


def test_small_box_lattice():
    lat = modes.build_lattice(1.0, 2, 0.0)
    assert lat.size == 125
    assert np.max(np.abs(lat.wavevectors)) == pytest.approx(4 * np.pi)


@pytest.mark.parametrize("L, n", [(0.0, 1), (-1.0, 1), (1.0, -1), (1.0, 1.5)])
def test_lattice_rejects_bad_parameters(L, n):
    with pytest.raises(InvalidParameterError):
        modes.build_lattice(L, n, 1.0)


def test_lexicographic_order_and_negation():
    lat = modes.build_lattice(TWO_PI, 2, 1.0)
    expected = list(itertools.product(range(-2, 3), repeat=3))
    np.testing.assert_array_equal(lat.integers, expected)
    i = np.arange(lat.size)
    np.testing.assert_array_equal(lat.integers[lat.negate(i)], -lat.integers)
    np.testing.assert_array_equal(lat.integers[lat.zero_index], [0, 0, 0])
    assert lat.index_of([1, -2, 0]) == expected.index((1, -2, 0))
    with pytest.raises(LatticeMismatchError):
        lat.index_of([3, 0, 0])
    with pytest.raises(LatticeMismatchError):
        lat.index_of_wavevector([0.5, 0, 0])


def test_half_indices_cover_each_pair_once():
    lat = modes.build_lattice(TWO_PI, 2, 1.0)
    half = set(lat.half_indices.tolist())
    for i in range(lat.size):
        assert (i in half) != (int(lat.negate(i)) in half) or i == lat.zero_index


def test_dispersion_examples():
    lat = modes.build_lattice(TWO_PI, 5, 12.0)
    assert modes.dispersion(lat, [0, 0, 0]) == pytest.approx(12.0)
    assert modes.dispersion(lat, [3, 4, 0]) == pytest.approx(13.0)
    assert modes.dispersion(modes.build_lattice(TWO_PI, 1, 1.0), [0, 0, 0]) == 1.0
    L = 3.0
    massless = modes.build_lattice(L, 1, 0.0)
    assert modes.dispersion(massless, [TWO_PI / L, 0, 0]) == pytest.approx(TWO_PI / L)


@given(st.floats(0, 50), st.floats(0, 50), st.floats(0, 10))
def test_dispersion_monotone(a, b, mu):
    lat = modes.build_lattice(1.0, 0, mu)
    lo, hi = sorted((a, b))
    assert modes.dispersion(lat, [lo, 0, 0]) <= modes.dispersion(lat, [0, hi, 0])


def test_zero_mode_synthesizes_uniform_field():
    lat = modes.build_lattice(2.0, 1, 1.0)
    q = np.zeros(lat.size, complex)
    q[lat.zero_index] = 3.0
    grid = modes.GridSpec((0.1, -0.3, 0.7), (0.37, 0.2, 0.11), (4, 5, 6))
    phi = modes.synthesize_field(lat, modes.ModeState(lat, q), grid)
    assert phi.is_real
    np.testing.assert_allclose(phi.values, 3.0 / math.sqrt(lat.volume), rtol=1e-14)


def test_conjugate_pair_synthesis():
    lat = modes.build_lattice(TWO_PI, 2, 1.0)
    a = 0.3 - 1.2j
    i = lat.index_of([1, -2, 1])
    q = np.zeros(lat.size, complex)
    q[i], q[lat.negate(i)] = a, np.conj(a)
    grid = modes.GridSpec.periodic(TWO_PI, 8)
    phi = modes.synthesize_field(lat, modes.ModeState(lat, q), grid)
    x, y, z = grid.mesh()
    k = lat.wavevectors[i]
    expected = 2 / math.sqrt(lat.volume) * np.real(a * np.exp(1j * (k[0] * x + k[1] * y + k[2] * z)))
    assert phi.is_real
    np.testing.assert_allclose(phi.values, expected, atol=1e-13)


def test_constant_field_analysis():
    lat = modes.build_lattice(TWO_PI, 2, 1.0)
    grid = modes.GridSpec.periodic(TWO_PI, 6)
    q = modes.analyze_field(lat, modes.FieldSample(grid, np.full(grid.shape, 2.5))).coefficients
    assert q[lat.zero_index] == pytest.approx(2.5 * math.sqrt(lat.volume), rel=1e-13)
    rest = np.delete(q, lat.zero_index)
    assert np.max(np.abs(rest)) <= 1e-12


def test_cosine_analysis():
    L = 3.0
    lat = modes.build_lattice(L, 2, 1.0)
    grid = modes.GridSpec.periodic(L, 7, centered=False)
    i = lat.index_of([0, 2, -1])
    k = lat.wavevectors[i]
    x, y, z = grid.mesh()
    phi = np.cos(k[0] * x + k[1] * y + k[2] * z) * 2 / math.sqrt(lat.volume)
    q = modes.analyze_field(lat, modes.FieldSample(grid, phi)).coefficients
    assert q[i] == pytest.approx(1.0, abs=1e-12)
    assert q[lat.negate(i)] == pytest.approx(1.0, abs=1e-12)
    mask = np.ones(lat.size, bool)
    mask[[i, lat.negate(i)]] = False
    assert np.max(np.abs(q[mask])) <= 1e-12


def test_analysis_rejects_bad_grids():
    lat = modes.build_lattice(TWO_PI, 2, 1.0)
    short = modes.GridSpec((0, 0, 0), (1.0, 1.0, 1.0), (6, 6, 6))
    with pytest.raises(LatticeMismatchError):
        modes.analyze_field(lat, modes.FieldSample(short, np.zeros(short.shape)))
    coarse = modes.GridSpec.periodic(TWO_PI, 4)
    with pytest.raises(LatticeMismatchError):
        modes.analyze_field(lat, modes.FieldSample(coarse, np.zeros(coarse.shape)))


def test_mismatched_state_rejected():
    a = modes.build_lattice(TWO_PI, 1, 1.0)
    b = modes.build_lattice(TWO_PI, 2, 1.0)
    st_b = modes.random_mode_state(b, 0)
    with pytest.raises(LatticeMismatchError):
        modes.synthesize_field(a, st_b, modes.GridSpec.periodic(TWO_PI, 5))
    with pytest.raises(LatticeMismatchError):
        modes.ModeState(a, np.zeros(b.size))


def test_reality_tolerance():
    lat = modes.build_lattice(TWO_PI, 1, 1.0)
    q = np.zeros(lat.size, complex)
    q[0] = 1.0
    q[-1] = 1.0 + 5e-13j
    s = modes.ModeState(lat, q)
    assert modes.reality_drift(lat, s.coefficients) == 0.0
    q[-1] = 1.0 + 1e-6j
    with pytest.raises(InvalidParameterError):
        modes.ModeState(lat, q)


states = st.tuples(st.integers(0, 4), st.floats(0.5, 20.0), st.integers(0, 2**31 - 1))


@given(states)
def test_round_trip_property(args):
    n_max, L, seed = args
    lat = modes.build_lattice(L, n_max, 1.0)
    state = modes.random_mode_state(lat, seed)
    grid = modes.GridSpec.periodic(L, lat.side + seed % 3)
    phi = modes.synthesize_field(lat, state, grid)
    back = modes.analyze_field(lat, phi).coefficients
    rel = np.linalg.norm(back - state.coefficients) / np.linalg.norm(state.coefficients)
    assert rel <= 1e-10


@given(states)
def test_reality_property(args):
    n_max, L, seed = args
    lat = modes.build_lattice(L, n_max, 1.0)
    grid = modes.GridSpec((0.1 * L,) * 3, (0.31,) * 3, (5, 4, 3))
    phi = modes.synthesize_field(lat, modes.random_mode_state(lat, seed), grid)
    assert phi.is_real


@given(states)
def test_parseval_property(args):
    n_max, L, seed = args
    lat = modes.build_lattice(L, n_max, 1.0)
    state = modes.random_mode_state(lat, seed)
    grid = modes.GridSpec.periodic(L, lat.side + 1)
    phi = modes.synthesize_field(lat, state, grid)
    quad = np.sum(np.abs(phi.values) ** 2) * grid.cell_volume
    assert quad == pytest.approx(np.sum(np.abs(state.coefficients) ** 2), rel=1e-10)


def test_direct_sum_oracle(rng):
    # independent point-by-point evaluation of the mode sum
    lat = modes.build_lattice(2.5, 2, 1.0)
    state = modes.random_mode_state(lat, rng)
    grid = modes.GridSpec((-0.4, 0.2, 1.0), (0.3, 0.25, 0.2), (3, 2, 4))
    phi = modes.synthesize_field(lat, state, grid).values
    x, y, z = grid.mesh()
    pts = np.stack([x, y, z], -1).reshape(-1, 3)
    direct = np.exp(1j * pts @ lat.wavevectors.T) @ state.coefficients / math.sqrt(lat.volume)
    np.testing.assert_allclose(phi.reshape(-1), direct.real, atol=1e-12)


def test_csv_round_trip(tmp_path):
    lat = modes.build_lattice(TWO_PI, 2, 1.0)
    state = modes.random_mode_state(lat, 3)
    path = modes.write_mode_state_csv(state, tmp_path / "q.csv")
    assert path.read_text().splitlines()[0] == "n1,n2,n3,re_q,im_q"
    back = modes.read_mode_state_csv(path, lat)
    np.testing.assert_array_equal(back.coefficients, state.coefficients)
