import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from emergent_field import emergence, relativity as rel
from emergent_field.exceptions import DegenerateCurrentError, InvalidParameterError, StencilError

velocities = st.floats(-0.99, 0.99)
coords = st.floats(-50, 50)


def test_identity_boost():
    e = rel.SpacetimeEvent(1.0, 2.0, 3.0, 4.0)
    assert rel.boost_event(rel.Boost(0.0), e) == e


def test_boost_example():
    b = rel.Boost(0.6)
    assert b.gamma == pytest.approx(1.25)
    out = rel.boost_event(b, rel.SpacetimeEvent(1.0))
    assert (out.t, out.z) == (pytest.approx(1.25), pytest.approx(-0.75))


def test_boost_rejects_superluminal():
    for v in (1.0, -1.0, 1.5, float("nan")):
        with pytest.raises(InvalidParameterError):
            rel.Boost(v)


@given(velocities, coords, coords, coords, coords)
def test_interval_invariance(v, t, x, y, z):
    e = np.array([t, x, y, z])
    s = rel.interval(e)
    assert rel.interval(rel.boost_event(rel.Boost(v), e)) == pytest.approx(s, abs=1e-12 * max(1.0, e @ e))


@given(velocities, velocities, coords, coords)
def test_composition(v1, v2, t, z):
    e = np.array([t, 0.3, -0.2, z])
    a, b = rel.Boost(v1), rel.Boost(v2)
    two = rel.boost_event(a, rel.boost_event(b, e))
    one = rel.boost_event(a.compose(b), e)
    np.testing.assert_allclose(two, one, atol=1e-12 * max(1.0, np.max(np.abs(two))) * max(a.gamma, b.gamma) ** 2)


@given(velocities, coords, coords)
def test_inverse(v, t, z):
    b = rel.Boost(v)
    e = np.array([t, 1.0, 2.0, z])
    np.testing.assert_allclose(rel.boost_event(b.inverse, rel.boost_event(b, e)), e, atol=1e-9)


def test_packet_at_rest():
    mu, r0, t = 2.0, 1.3, 0.7
    val = rel.mackinnon_field(mu, rel.Boost(0.0), t, 0.0, 0.0, r0)
    assert val == pytest.approx(math.sin(mu * r0) / r0 * np.exp(-1j * mu * t))


def test_packet_envelope_limit():
    mu, b, t = 2.0, rel.Boost(0.5), 0.4
    val = rel.mackinnon_field(mu, b, t, 0.0, 0.0, b.v * t)
    assert val == pytest.approx(mu * np.exp(-1j * mu * b.gamma * (t - b.v * b.v * t)))


@given(velocities, st.integers(0, 10**6))
def test_scalar_laws(v, seed):
    rng = np.random.default_rng(seed)
    e = rng.uniform(-5, 5, (50, 4))
    b = rel.Boost(v)
    rest = rel.boost_event(b, e)
    r = np.linalg.norm(rest[:, 1:], axis=1)
    moving = rel.boosted_emergent_field(3.0, 2.0, b, *e.T)
    np.testing.assert_allclose(moving, emergence.oracle_field(3.0, 2.0, r, rest[:, 0]), atol=1e-12)
    packet = rel.mackinnon_field(3.0, b, *e.T)
    np.testing.assert_allclose(packet, rel.mackinnon_field(3.0, rel.Boost(0.0), *rest.T), atol=1e-12)


def test_zero_velocity_matches_oracle():
    e = np.random.default_rng(1).uniform(-3, 3, (20, 4))
    r = np.linalg.norm(e[:, 1:], axis=1)
    np.testing.assert_allclose(rel.boosted_emergent_field(2.0, 1.0, rel.Boost(0.0), *e.T),
                               emergence.oracle_field(2.0, 1.0, r, e[:, 0]))


def test_literal_form_differs_when_moving():
    b = rel.Boost(0.6)
    args = (2.0, 1.0, b, 1.0, 0.1, 0.2, 0.3)
    assert rel.boosted_emergent_field(*args, literal=True) != pytest.approx(rel.boosted_emergent_field(*args))
    still = (2.0, 1.0, rel.Boost(0.0), 1.0, 0.1, 0.2, 0.3)
    assert rel.boosted_emergent_field(*still, literal=True) == rel.boosted_emergent_field(*still)


def test_kinematic_examples():
    assert rel.kinematic_phase_check(1.0, 0.0) == (0.0, 0.0)
    b = rel.Boost(0.6)
    assert 1.0 * b.gamma * 0.6 == pytest.approx(0.75)
    d, ph = rel.kinematic_phase_check(1.0, 0.6)
    assert d <= 1e-15 and ph <= 1e-12


@given(st.floats(-0.99, 0.99), st.floats(0.01, 10))
def test_kinematic_identity(v, mu):
    d, ph = rel.kinematic_phase_check(mu, v)
    assert d <= 1e-12 * max(1.0, mu * rel.Boost(v).gamma)
    assert ph <= 1e-12 * max(1.0, mu * rel.Boost(v).gamma * 20 / mu)


def test_constant_field_has_zero_residual():
    const = rel.ClosedFormField(lambda t, x, y, z: np.full(np.shape(t), 2.0))
    assert rel.wave_operator_residual(const, (0.3, 0, 0, 0), 1e-2, 1.0) == 0.0


def residual_order(field, e, mu, conv, h=1e-2):
    r1 = abs(rel.wave_operator_residual(field, e, h, mu, conv))
    r2 = abs(rel.wave_operator_residual(field, e, h / 2, mu, conv))
    return math.log2(r1 / r2)


def test_plane_wave_residual_order():
    mu = 1.0
    field = rel.plane_wave(mu, 0.75)
    assert residual_order(field, (0.3, 0.1, -0.2, 0.4), mu, "kg_plus") == pytest.approx(2.0, abs=0.2)
    assert abs(rel.wave_operator_residual(field, (0.3, 0, 0, 0.4), 1e-3, mu, "kg_minus")) > 1.0


@pytest.mark.parametrize("v", [0.0, 0.5])
def test_closed_forms_satisfy_massless_operator(v):
    mu = 2.0
    e = (2 / mu, 0.2 / mu, 0.3 / mu, 0.9 / mu)
    steps = np.array([1e-2, 5e-3, 2.5e-3]) / mu
    for field in (rel.emergent_sampler(mu, 1.0, rel.Boost(v)), rel.mackinnon_sampler(mu, rel.Boost(v))):
        rep = rel.residual_report(field, e, mu, steps)
        assert rep.satisfied == "massless"
        assert rep.extrapolated["kg_plus"] > 0.1 and rep.extrapolated["kg_minus"] > 0.1
        assert residual_order(field, e, mu, "massless", 1e-2 / mu) == pytest.approx(2.0, abs=0.2)


def test_boosted_residual_tracks_rest_residual():
    mu, b, h = 2.0, rel.Boost(0.4), 5e-3
    rest_event = np.array([1.0, 0.2, 0.3, 0.4])
    lab_event = rel.boost_event(b.inverse, rest_event)
    r0 = rel.wave_operator_residual(rel.mackinnon_sampler(mu), rest_event, h, mu)
    r1 = rel.wave_operator_residual(rel.mackinnon_sampler(mu, b), lab_event, h, mu)
    assert abs(r0 - r1) <= 10 * h**2


def test_stencil_across_t0_collar():
    field = rel.emergent_sampler(1.0)
    with pytest.raises(StencilError):
        rel.wave_operator_residual(field, (1e-3, 0.5, 0, 0), 1e-3, 1.0)


def test_richardson_removes_leading_term():
    h = np.array([0.1, 0.05, 0.025])
    vals = 3.0 + 2.0 * h**2 + 5.0 * h**4
    assert rel.richardson(vals) == pytest.approx(3.0, abs=1e-14)


@pytest.mark.parametrize("h", [1e-2, 5e-3])
def test_plane_wave_velocity(h):
    mu, k = 1.0, 0.75
    w = math.hypot(k, mu)
    vel = rel.bohmian_velocity(rel.plane_wave(mu, k), (0.2, 0.1, 0.0, 0.3), h)
    np.testing.assert_allclose(vel, [0, 0, k / w], atol=h**2)


def test_plane_wave_path_is_straight():
    mu, k = 1.0, 0.75
    path = rel.integrate_particle_path(rel.plane_wave(mu, k), [0.0, 0.0, 0.0], 0.0, 2.0, 0.1)
    np.testing.assert_allclose(path.positions[:, 2], k / math.hypot(k, mu) * path.times, atol=1e-8)


def test_packet_path_slope():
    mu, v = 2.0, 0.6
    path = rel.integrate_particle_path(rel.mackinnon_sampler(mu, rel.Boost(v)), [0.3, 0.1, 0.2], 0.0, 3.0, 0.05)
    slope = np.polyfit(path.times, path.positions[:, 2], 1)[0]
    assert slope == pytest.approx(v, abs=1e-6)
    np.testing.assert_allclose(path.positions[:, :2], [[0.3, 0.1]] * len(path.times), atol=1e-8)


def test_packet_at_rest_is_stationary():
    path = rel.integrate_particle_path(rel.mackinnon_sampler(1.0), [0.3, 0.1, 0.2], 0.0, 1.0, 0.1)
    np.testing.assert_allclose(path.positions, [[0.3, 0.1, 0.2]] * len(path.times), atol=1e-10)


def test_real_field_has_no_current():
    field = rel.emergent_sampler(2.0)
    with pytest.raises(DegenerateCurrentError):
        rel.bohmian_velocity(field, (1.0, 0.1, 0.2, 0.3))
    with pytest.raises(DegenerateCurrentError) as info:
        rel.integrate_particle_path(field, [0.1, 0.2, 0.3], 1.0, 2.0, 0.1)
    np.testing.assert_array_equal(info.value.last_position, [0.1, 0.2, 0.3])


def test_csv_writers(tmp_path):
    rep = rel.residual_report(rel.plane_wave(1.0, 0.5), (0.1, 0, 0, 0), 1.0, [1e-2, 5e-3, 2.5e-3])
    lines = rel.write_residual_csv([rep], tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "t,x,y,z,h,residual_massless,residual_kg_plus,residual_kg_minus"
    assert len(lines) == 4
    path = rel.integrate_particle_path(rel.plane_wave(1.0, 0.5), [0, 0, 0], 0.0, 0.2, 0.1)
    assert rel.write_path_csv(path, tmp_path / "p.csv").read_text().startswith("t,x,y,z\n")
