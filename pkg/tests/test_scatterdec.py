import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from decolab.constants import AMU, HBAR
from decolab.scatterdec import (PositionDensityMatrix, ScatterEnvParams, apply_scatter_decoherence, decay_factor,
                                decoherence_time, double_slit_pattern, fringe_spacing, fringe_visibility,
                                product_form_factor, two_source_spacing)
from decolab.wavefunction import gaussian_packet

ENV = ScatterEnvParams(1e20, 500.0, 1e-18, 1.0, 1e-9)


def test_decoherence_time_example():
    # air-like numbers: 1 / (C eta sigma v) = 2e-5 s
    assert decoherence_time(ENV) == pytest.approx(2e-5, rel=1e-12)


def test_params_validation():
    with pytest.raises(ValueError):
        ScatterEnvParams(0.0, 1.0, 1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(6, 10), st.floats(0.01, 1.0))
def test_product_form_converges_to_exponential(log_factor, t_over_tau):
    box = np.sqrt(10**log_factor * ENV.sigma_t)
    t = t_over_tau * decoherence_time(ENV)
    exact = np.exp(-t / decoherence_time(ENV))
    assert product_form_factor(ENV, box, t) / exact - 1 == pytest.approx(0.0, abs=1e-6)


def test_product_form_is_a_semigroup():
    box = np.sqrt(1e3 * ENV.sigma_t)  # far from the exponential limit, still multiplicative
    t1, t2 = 3e-6, 7e-6
    assert product_form_factor(ENV, box, t1 + t2) == pytest.approx(
        product_form_factor(ENV, box, t1) * product_form_factor(ENV, box, t2), rel=1e-12)


def test_short_separations_decohere_quadratically():
    tau = decoherence_time(ENV)
    assert decay_factor(ENV, 0.0, 1e-6, tau) == pytest.approx(np.exp(-1))
    assert decay_factor(ENV, 0.0, 0.5e-9, tau) == pytest.approx(np.exp(-0.25))
    with pytest.raises(ValueError):
        decay_factor(ENV, 0.0, 1.0, -1.0)


def test_density_matrix_decoherence_keeps_diagonal():
    x = np.linspace(-5e-9, 5e-9, 101)
    psi = gaussian_packet(x, 0.0, 1e-9)
    rho = PositionDensityMatrix.from_wavefunction(x, psi.amps)
    out = apply_scatter_decoherence(rho, ENV, 10 * decoherence_time(ENV))
    assert np.allclose(np.diag(out.entries), np.diag(rho.entries))
    assert out.trace() == pytest.approx(1.0)
    assert abs(out.entries[0, -1]) < abs(rho.entries[0, -1]) * np.exp(-9)
    full = apply_scatter_decoherence(rho, ENV, np.inf)
    assert np.count_nonzero(full.entries - np.diag(np.diag(full.entries))) == 0


def test_double_slit_limits():
    m, d, w, t = 720 * AMU, 1e-7, 5e-9, 1e-4
    x, coh = double_slit_pattern(d, w, m, t, 1.0)
    _, inc = double_slit_pattern(d, w, m, t, 0.0, x=x)
    dx = x[1] - x[0]
    assert np.sum(coh) * dx == pytest.approx(1.0, rel=1e-6)
    assert np.sum(inc) * dx == pytest.approx(1.0, rel=1e-6)
    width = HBAR * t / (2 * m * w)
    assert fringe_visibility(x, coh, inc, width) > 0.99
    assert fringe_visibility(x, inc, inc, width) == 0.0
    assert fringe_spacing(x, coh, 3 * width) == pytest.approx(two_source_spacing(d, m, t), rel=0.05)
