import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from decolab.qcore import FactorShape, Operator, StateVector, pure_density, spin_ops
from decolab.vonneumann import (PointerApparatus, PointerRangeError, born_sample, eigenspaces, measurement_sequence,
                                outcome_distribution, pointer_weights, premeasure, premeasure_unitary,
                                robust_pointer_check, system_density)

SZ = Operator(spin_ops(1.0)["z"])


def _apparatus(boundary="error"):
    return PointerApparatus(np.arange(-5.0, 6.0), 5, 2.0, boundary)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, np.pi / 2), st.floats(0, 2 * np.pi))
def test_premeasure_correlates_pointer(theta, phi):
    psi = StateVector([np.cos(theta), np.sin(theta) * np.exp(1j * phi)])
    joint = premeasure(psi, _apparatus(), SZ)
    w = pointer_weights(joint)
    assert w[6] == pytest.approx(np.cos(theta) ** 2, abs=1e-12)  # +1/2 moves the pointer up one step
    assert w[4] == pytest.approx(np.sin(theta) ** 2, abs=1e-12)
    rho_s = system_density(joint).entries
    assert abs(rho_s[0, 1]) < 1e-12  # orthogonal pointer states remove the coherence


def test_premeasure_unitary_is_unitary_and_agrees():
    app = _apparatus("periodic")
    u = premeasure_unitary(app, SZ)
    assert np.allclose(u.conj().T @ u, np.eye(u.shape[0]))
    psi = StateVector([0.6, 0.8j])
    ready = np.zeros(app.size)
    ready[app.ready_index] = 1
    assert np.allclose(u @ np.kron(psi.amps, ready), premeasure(psi, app, SZ).amps)


def test_pointer_leaving_grid():
    app = PointerApparatus(np.arange(3.0), 2, 2.0)
    with pytest.raises(PointerRangeError):
        premeasure(StateVector([1.0, 0.0]), app, SZ)
    with pytest.raises(PointerRangeError):
        PointerApparatus(np.arange(3.0), 1, 0.7).shift_steps(0.5)


def test_degenerate_eigenspaces():
    op = Operator(np.diag([1.0, 1.0, -1.0]))
    groups = eigenspaces(op)
    assert [g[1].shape[1] for g in groups] == [1, 2]


def test_born_sampling_frequencies():
    psi = StateVector([0.6, 0.8])
    rng = np.random.default_rng(0)
    n = 20_000
    ups = sum(born_sample(psi, SZ, rng).eigenvalue > 0 for _ in range(n))
    assert abs(ups / n - 0.36) < 4 * np.sqrt(0.36 * 0.64 / n)
    assert sum(p for _, p, _ in outcome_distribution(psi, SZ)) == pytest.approx(1.0)


@pytest.mark.parametrize("order", ["decohere-first", "collapse-first"])
def test_measurement_sequence_orders(order):
    psi = StateVector([0.6, 0.8])
    res = measurement_sequence(psi, _apparatus(), SZ, 0.0, order, np.random.default_rng(3))
    pre = res["stages"]["premeasured"]
    # branches are ordered by eigenvalue: -1/2 then +1/2
    assert np.allclose(pre, np.outer([0.8, 0.6], [0.8, 0.6]))
    dec = res["stages"]["decohered"]
    col = res["stages"]["collapsed"]
    assert np.trace(col) == pytest.approx(1.0)
    if order == "decohere-first":
        assert np.allclose(dec, np.diag([0.64, 0.36]))
    else:
        assert np.allclose(dec, col)
    assert res["pointer_position"] == pytest.approx(2.0 * res["eigenvalue"])


def test_robust_pointer():
    p = np.diag([1.0, 1.0, -1.0])
    h = np.zeros((3, 3))
    h[0, 1] = h[1, 0] = 0.5
    h[2, 2] = 2.0
    rep = robust_pointer_check(Operator(h), Operator(p))
    assert rep["commutes"]
    b = rep["basis"]
    assert np.allclose(b @ np.diag(rep["projector_decomposition"]) @ b.conj().T, h)
    h[0, 2] = h[2, 0] = 0.1
    assert not robust_pointer_check(Operator(h), Operator(p))["commutes"]


def test_joint_shape():
    joint = premeasure(StateVector([1.0, 0.0]), _apparatus(), SZ)
    assert joint.shape == FactorShape((2, 11))
    assert pure_density(joint).dim == 22
