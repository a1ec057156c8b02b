import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from decolab.pilotwave import (NodeError, Trajectory, bohm_velocity, evolve_trajectories, grid_derivative,
                               ordering_preserved, probability_current, two_particle_velocity, velocity_field)
from decolab.wavefunction import Wavefunction1D, free_gaussian_width, gaussian_packet

X = np.linspace(0, 100, 4096, endpoint=False)


@settings(max_examples=20, deadline=None)
@given(st.integers(-40, 40).filter(bool), st.floats(0.5, 3.0))
def test_plane_wave_velocity(n, mass):
    k = 2 * np.pi * n / 100
    psi = Wavefunction1D(X, np.exp(1j * k * X))
    q = np.random.default_rng(n + 100).uniform(0, 99, 50)
    assert np.allclose(bohm_velocity(psi, q, mass, 1.0), k / mass, rtol=1e-6)


def test_velocity_is_current_over_density():
    psi = gaussian_packet(np.linspace(-20, 20, 2048, endpoint=False), 0.0, 1.5, 0.8)
    v = velocity_field(psi, 2.0, 1.0)
    ok = np.isfinite(v)
    assert np.allclose(v[ok], probability_current(psi, 2.0, 1.0)[ok] / psi.density[ok])


def test_fourth_order_derivative():
    errs = []
    for n in (64, 128):
        x = np.linspace(0, 2 * np.pi, n, endpoint=False)
        errs.append(np.max(np.abs(grid_derivative(np.sin(x), x[1] - x[0]) - np.cos(x))))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.05)


def test_node_raises():
    x = np.linspace(0, 2 * np.pi, 512, endpoint=False)
    psi = Wavefunction1D(x, np.sin(x))
    with pytest.raises(NodeError):
        bohm_velocity(psi, np.pi, 1.0, 1.0)
    assert bohm_velocity(psi, 1.0, 1.0, 1.0) == pytest.approx(0.0, abs=1e-12)


def test_equivariance_and_no_crossings():
    x = np.linspace(-30, 50, 4096, endpoint=False)
    ens = evolve_trajectories(gaussian_packet(x, 0.0, 1.0, 1.0), 1.0, 5.0, 0.01, 10_000,
                              np.random.default_rng(1), hbar=1.0, record_every=100)
    assert ens.excluded == 0
    for t, pos in zip(ens.times, ens.positions):
        assert stats.kstest(pos, stats.norm(t, free_gaussian_width(1.0, 1.0, t, 1.0)).cdf).statistic < 0.03
    assert ordering_preserved(ens.positions)
    # the Gaussian flow is a linear map of the initial position
    q0, q1 = ens.positions[0], ens.positions[-1]
    assert np.allclose(q1, 5.0 + q0 * free_gaussian_width(1.0, 1.0, 5.0, 1.0), atol=1e-4)


def test_trajectory_validation_and_inputs():
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0]), np.array([1.0, 2.0]))
    psi = gaussian_packet(X, 50.0, 2.0)
    with pytest.raises(ValueError):
        evolve_trajectories(psi, 1.0, 0.0, 0.1, 5, np.random.default_rng(0))
    assert not ordering_preserved(np.array([[0.0, 1.0], [2.0, 1.5]]))


def test_two_particle_product_and_entangled():
    x = np.linspace(-10, 10, 256, endpoint=False)
    a, b = gaussian_packet(x, -1.0, 1.0, 0.7), gaussian_packet(x, 1.0, 1.0, -0.4)
    prod = np.outer(a.amps, b.amps)
    i, j = 120, 140
    v1, v2 = two_particle_velocity(prod, x, 1.0, x[i], x[j], 1.0)
    assert v1 == pytest.approx(velocity_field(a, 1.0, 1.0)[i], rel=1e-9)
    assert v2 == pytest.approx(velocity_field(b, 1.0, 1.0)[j], rel=1e-9)
    c = gaussian_packet(x, 1.0, 1.0, 0.7)
    ent = np.outer(a.amps, b.amps) + np.outer(c.amps, a.amps)
    # particle 1's velocity changes when only particle 2 moves
    assert two_particle_velocity(ent, x, 1.0, x[i], x[100], 1.0)[0] != pytest.approx(
        two_particle_velocity(ent, x, 1.0, x[i], x[150], 1.0)[0], rel=1e-3)
