import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from decolab.constants import HBAR
from decolab.qcore import (DensityMatrix, DimensionError, FactorShape, Operator, StateVector, coherence_offdiag,
                           entanglement_entropy, equal_up_to_phase, expectation, fidelity, mixture_density,
                           partial_trace, pure_density, random_state, reduced_state, schmidt_decompose,
                           schmidt_reconstruct, spin_ops, tensor_product)

dims_st = st.lists(st.integers(1, 4), min_size=2, max_size=3)


def _brute_partial_trace(rho: np.ndarray, dims, keep):
    """Oracle: explicit sum over the traced basis with Kronecker-embedded bra/ket vectors."""
    drop = [k for k in range(len(dims)) if k not in keep]
    d_keep = int(np.prod([dims[k] for k in keep]))
    out = np.zeros((d_keep, d_keep), dtype=complex)
    for idx in np.ndindex(*[dims[k] for k in drop]):
        # projector columns: basis states with dropped factors fixed at idx
        cols = []
        for kept in np.ndindex(*[dims[k] for k in keep]):
            full = [0] * len(dims)
            for k, v in zip(keep, kept):
                full[k] = v
            for k, v in zip(drop, idx):
                full[k] = v
            cols.append(np.ravel_multi_index(full, dims))
        out += rho[np.ix_(cols, cols)]
    return out


def test_mixture_vs_pure_sx():
    sx = Operator(spin_ops(HBAR)["x"])
    assert abs(expectation(sx, mixture_density([0.5, 0.5]))) < 1e-12 * HBAR
    psi = StateVector([2**-0.5, 2**-0.5])
    assert expectation(sx, psi) == pytest.approx(HBAR / 2, rel=1e-12)


@given(st.floats(0, np.pi / 2), st.floats(0, 2 * np.pi))
def test_sx_pure_is_hbar_re_alpha_beta_conj(theta, phi):
    a, b = np.cos(theta), np.sin(theta) * np.exp(1j * phi)
    val = expectation(Operator(spin_ops(1.0)["x"]), StateVector([a, b]))
    assert val.real == pytest.approx((a * np.conj(b)).real, abs=1e-12)
    assert abs(val.imag) < 1e-12


def test_row_major_first_factor_slowest():
    psi = StateVector.basis((1, 0), (2, 3))
    assert np.argmax(np.abs(psi.amps)) == 3


def test_state_rejects_bad_norm_and_size():
    with pytest.raises(ValueError):
        StateVector([1.0, 1.0])
    with pytest.raises(DimensionError):
        StateVector([1.0, 0, 0], (2, 2))
    assert StateVector([3.0, 4.0], normalize=True).amps[1] == pytest.approx(0.8)


def test_density_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        FactorShape([2, 0])


def test_operator_embedding_and_dim_mismatch():
    sz = spin_ops()["z"]
    op = Operator(sz, (2, 3), acts_on=0)
    assert np.allclose(op.full(), np.kron(sz, np.eye(3)))
    with pytest.raises(DimensionError):
        expectation(op, pure_density(StateVector.basis(0, (3, 2))))


@settings(max_examples=40, deadline=None)
@given(dims_st, st.integers(0, 2**31 - 1), st.data())
def test_partial_trace_matches_brute_force(dims, seed, data):
    rng = np.random.default_rng(seed)
    psi = random_state(dims, rng)
    keep = sorted(data.draw(st.sets(st.integers(0, len(dims) - 1), min_size=1, max_size=len(dims) - 1)))
    rho = pure_density(psi)
    got = partial_trace(rho, keep).entries
    assert np.allclose(got, _brute_partial_trace(rho.entries, dims, keep), atol=1e-12)
    assert np.allclose(reduced_state(psi, keep).entries, got, atol=1e-12)
    assert np.trace(got).real == pytest.approx(1.0, abs=1e-12)
    assert np.min(np.linalg.eigvalsh(got)) > -1e-12


@settings(max_examples=40, deadline=None)
@given(dims_st, st.integers(0, 2**31 - 1))
def test_schmidt_roundtrip(dims, seed):
    psi = random_state(dims, np.random.default_rng(seed))
    s, u, v = schmidt_decompose(psi, [0])
    assert np.all(np.diff(s) <= 1e-12)
    assert np.sum(s**2) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(schmidt_reconstruct(s, u, v), psi.amps, atol=1e-12)
    # the reduced spectrum of either side is s^2
    ev = np.sort(np.linalg.eigvalsh(reduced_state(psi, [0]).entries))[::-1][: s.size]
    assert np.allclose(ev, s**2, atol=1e-12)


def test_product_state_has_zero_entropy():
    rng = np.random.default_rng(1)
    psi = tensor_product(random_state(3, rng), random_state(2, rng))
    s, _, _ = schmidt_decompose(psi, [0])
    assert s.size == 1
    assert entanglement_entropy(s) == pytest.approx(0.0, abs=1e-12)


def test_bell_entropy_ln2():
    bell = StateVector([2**-0.5, 0, 0, 2**-0.5], (2, 2))
    s, _, _ = schmidt_decompose(bell, [0])
    assert entanglement_entropy(s) == pytest.approx(np.log(2))


def test_coherence_and_fidelity():
    plus = StateVector([2**-0.5, 2**-0.5])
    rho = pure_density(plus)
    assert coherence_offdiag(rho) == pytest.approx(1.0)
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert coherence_offdiag(rho, h) == pytest.approx(0.0, abs=1e-15)
    assert fidelity(plus, StateVector([2**-0.5, -(2**-0.5)])) == pytest.approx(0.0, abs=1e-15)
    assert equal_up_to_phase(plus.amps, 1j * plus.amps)
