import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from decolab.wavefunction import (FreePropagator, Wavefunction1D, free_gaussian_amplitude, free_gaussian_width,
                                  gaussian_packet)


def test_grid_validation():
    with pytest.raises(ValueError):
        Wavefunction1D(np.array([0.0, 1.0, 3.0]), np.ones(3))
    with pytest.raises(ValueError):
        Wavefunction1D(np.array([0.0, 1.0]), np.ones(3))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 2.0), st.floats(-2, 2), st.floats(0, 8))
def test_spectral_propagation_matches_closed_form(sigma, k0, t):
    x = np.linspace(-80, 80, 4096, endpoint=False)
    psi = gaussian_packet(x, 0.0, sigma, k0)
    out = FreePropagator(x, 1.0, 1.0).evolve(psi, t)
    exact = free_gaussian_amplitude(x, 0.0, sigma, k0, 1.0, t, 1.0)
    assert np.max(np.abs(out.amps - exact)) < 1e-9
    assert out.norm2() == pytest.approx(1.0, abs=1e-12)


def test_width_and_drift():
    x = np.linspace(-80, 120, 8192, endpoint=False)
    out = FreePropagator(x, 2.0, 1.0).evolve(gaussian_packet(x, 0.0, 1.0, 3.0), 10.0)
    assert out.mean_x() == pytest.approx(3.0 * 10.0 / 2.0, abs=1e-9)
    var = np.sum((x - out.mean_x()) ** 2 * out.density) * out.dx
    assert np.sqrt(var) == pytest.approx(free_gaussian_width(1.0, 2.0, 10.0, 1.0), rel=1e-9)
