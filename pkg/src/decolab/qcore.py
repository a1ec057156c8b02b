"""Hilbert-space primitives: states, density matrices and tensor structure.

Amplitudes are stored row-major over the factor indices (first factor
slowest), the same convention ``numpy.kron`` and ``reshape`` use.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-10
RENORM_TOL = 1e-6
HERMITIAN_TOL = 1e-10
POSITIVITY_FLOOR = -1e-10


class DimensionError(ValueError):
    """Raised when operands do not share a compatible tensor structure."""


@dataclass(frozen=True)
class FactorShape:
    dims: tuple[int, ...]

    def __init__(self, dims: Iterable[int]):
        dims = tuple(int(d) for d in dims)
        if not dims:
            raise ValueError("FactorShape needs at least one factor")
        if any(d < 1 for d in dims):
            raise ValueError(f"all dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_factors(self) -> int:
        return len(self.dims)

    def check_index(self, k: int) -> None:
        if not 0 <= k < self.n_factors:
            raise DimensionError(f"factor index {k} out of range for {self.dims}")

    def sub(self, factors: Sequence[int]) -> "FactorShape":
        return FactorShape(self.dims[k] for k in factors)

    def __add__(self, other: "FactorShape") -> "FactorShape":
        return FactorShape(self.dims + other.dims)


def _as_shape(shape, n: int | None = None) -> FactorShape:
    if shape is None:
        return FactorShape((n,))
    if isinstance(shape, FactorShape):
        return shape
    if isinstance(shape, (int, np.integer)):
        return FactorShape((shape,))
    return FactorShape(shape)


class StateVector:
    """Normalized pure state on a factorized Hilbert space.

    Small normalization drift (up to 1e-6) is silently removed; anything
    larger signals a logic error and is rejected.
    """

    __slots__ = ("amps", "shape")

    def __init__(self, amps, shape=None, *, normalize: bool = False):
        amps = np.array(amps, dtype=complex).reshape(-1)
        shape = _as_shape(shape, amps.size)
        if amps.size != shape.total:
            raise DimensionError(f"{amps.size} amplitudes for dims {shape.dims}")
        norm = float(np.linalg.norm(amps))
        if norm == 0.0:
            raise ValueError("zero vector is not a state")
        if not normalize and abs(norm - 1.0) > RENORM_TOL:
            raise ValueError(f"state norm {norm:.3e} deviates from 1 by more than {RENORM_TOL}")
        amps = amps / norm
        amps.setflags(write=False)
        self.amps = amps
        self.shape = shape

    @classmethod
    def basis(cls, index: int, shape) -> "StateVector":
        shape = _as_shape(shape)
        amps = np.zeros(shape.total, dtype=complex)
        if isinstance(index, (tuple, list)):
            index = int(np.ravel_multi_index(tuple(index), shape.dims))
        amps[index] = 1.0
        return cls(amps, shape)

    @property
    def dim(self) -> int:
        return self.shape.total

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per factor."""
        return self.amps.reshape(self.shape.dims)

    def inner(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amps, other.amps))

    def __repr__(self) -> str:
        return f"StateVector(dims={self.shape.dims})"


def random_state(shape, rng: np.random.Generator) -> StateVector:
    shape = _as_shape(shape)
    z = rng.normal(size=shape.total) + 1j * rng.normal(size=shape.total)
    return StateVector(z, shape, normalize=True)


class DensityMatrix:
    __slots__ = ("entries", "shape")

    def __init__(self, entries, shape=None, *, check: bool = True):
        entries = np.array(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionError("density matrix must be square")
        shape = _as_shape(shape, entries.shape[0])
        if entries.shape[0] != shape.total:
            raise DimensionError(f"matrix of size {entries.shape[0]} for dims {shape.dims}")
        if check:
            validate_density(entries)
        entries.setflags(write=False)
        self.entries = entries
        self.shape = shape

    @property
    def dim(self) -> int:
        return self.shape.total

    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))

    def __repr__(self) -> str:
        return f"DensityMatrix(dims={self.shape.dims})"


def validate_density(m: np.ndarray) -> None:
    if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(m)
    if abs(tr - 1.0) > NORM_TOL:
        raise ValueError(f"density matrix trace {tr} != 1")
    if np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min() < POSITIVITY_FLOOR:
        raise ValueError("density matrix has a negative eigenvalue")


class Operator:
    """Square matrix acting on one factor (``acts_on`` an index) or the whole space."""

    __slots__ = ("entries", "acts_on", "shape")

    def __init__(self, entries, shape=None, acts_on: int | str = "whole"):
        entries = np.array(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionError("operator must be square")
        shape = _as_shape(shape, entries.shape[0])
        if acts_on == "whole":
            expected = shape.total
        else:
            shape.check_index(int(acts_on))
            expected = shape.dims[int(acts_on)]
        if entries.shape[0] != expected:
            raise DimensionError(f"operator size {entries.shape[0]} does not match target dimension {expected}")
        entries.setflags(write=False)
        self.entries = entries
        self.acts_on = acts_on
        self.shape = shape

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0) <= tol)

    def full(self) -> np.ndarray:
        """Matrix on the total space (identity on the other factors)."""
        if self.acts_on == "whole":
            return np.array(self.entries)
        k = int(self.acts_on)
        left = int(np.prod(self.shape.dims[:k]))
        right = int(np.prod(self.shape.dims[k + 1:]))
        return np.kron(np.kron(np.eye(left), self.entries), np.eye(right))


def tensor_product(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(np.kron(a.amps, b.amps), a.shape + b.shape)


def tensor_density(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(np.kron(a.entries, b.entries), a.shape + b.shape)


def pure_density(psi: StateVector) -> DensityMatrix:
    # rank one by construction; skip the eigenvalue check
    return DensityMatrix(np.outer(psi.amps, psi.amps.conj()), psi.shape, check=False)


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every factor not listed in ``keep``."""
    keep = sorted(set(int(k) for k in keep))
    n = rho.shape.n_factors
    if not keep or len(keep) == n:
        raise ValueError("keep must be a nonempty strict subset of the factors")
    for k in keep:
        rho.shape.check_index(k)
    drop = [k for k in range(n) if k not in keep]
    dims = rho.shape.dims
    t = rho.entries.reshape(dims + dims)
    # contract each dropped ket axis with its bra axis, highest index first
    for k in sorted(drop, reverse=True):
        nk = t.ndim // 2
        t = np.trace(t, axis1=k, axis2=k + nk)
    d = int(np.prod([dims[k] for k in keep]))
    return DensityMatrix(t.reshape(d, d), rho.shape.sub(keep), check=False)


def reduced_state(psi: StateVector, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix of a pure state without forming the full outer product."""
    keep = sorted(set(int(k) for k in keep))
    n = psi.shape.n_factors
    if not keep or len(keep) == n:
        raise ValueError("keep must be a nonempty strict subset of the factors")
    drop = [k for k in range(n) if k not in keep]
    t = np.transpose(psi.tensor(), keep + drop)
    d = int(np.prod([psi.shape.dims[k] for k in keep]))
    m = t.reshape(d, -1)
    return DensityMatrix(m @ m.conj().T, psi.shape.sub(keep), check=False)


def expectation(op: Operator, rho: DensityMatrix | StateVector) -> complex:
    """Tr(op rho); the operator is embedded with identities on other factors."""
    if isinstance(rho, StateVector):
        rho = pure_density(rho)
    if op.shape.dims != rho.shape.dims:
        raise DimensionError(f"operator dims {op.shape.dims} vs state dims {rho.shape.dims}")
    return complex(np.trace(op.full() @ rho.entries))


def schmidt_decompose(psi: StateVector, left: Sequence[int]):
    """Schmidt coefficients (descending) with left and right bases as columns.

    ``left`` lists the factor indices of the first group; the remaining factors
    form the second group.  Degenerate coefficients keep the order returned by
    the SVD, then each pair of vectors is phase-fixed so the first nonzero
    component of the left vector is real positive.
    """
    left = list(left)
    n = psi.shape.n_factors
    right = [k for k in range(n) if k not in left]
    if not left or not right:
        raise ValueError("bipartition needs two nonempty groups")
    dl = int(np.prod([psi.shape.dims[k] for k in left]))
    m = np.transpose(psi.tensor(), left + right).reshape(dl, -1)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    r = int(np.sum(s > 1e-14 * max(s[0], 1e-300)))
    u, s, v = u[:, :r], s[:r], vh[:r].T
    for j in range(r):
        col = u[:, j]
        i0 = int(np.argmax(np.abs(col) > 1e-12))
        ph = col[i0] / abs(col[i0])
        u[:, j] = col / ph
        v[:, j] = v[:, j] * ph
    return s, u, v


def schmidt_reconstruct(coeffs, left_basis, right_basis) -> np.ndarray:
    """Flattened amplitudes in (left group, right group) order."""
    return np.einsum("k,ik,jk->ij", coeffs, left_basis, right_basis).reshape(-1)


def entanglement_entropy(coeffs) -> float:
    p = np.asarray(coeffs) ** 2
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def coherence_offdiag(rho: DensityMatrix | np.ndarray, basis=None) -> float:
    """l1 norm of the off-diagonal entries of rho expressed in ``basis`` (columns)."""
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if basis is not None:
        b = np.asarray(basis, dtype=complex)
        if np.max(np.abs(b.conj().T @ b - np.eye(b.shape[1]))) > NORM_TOL or b.shape[0] != b.shape[1]:
            raise ValueError("basis is not orthonormal")
        m = b.conj().T @ m @ b
    off = m - np.diag(np.diag(m))
    return float(np.sum(np.abs(off)))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2; maximal over global phase by construction."""
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def equal_up_to_phase(a, b, tol: float = 1e-10) -> bool:
    a = a.amps if isinstance(a, StateVector) else np.asarray(a, dtype=complex)
    b = b.amps if isinstance(b, StateVector) else np.asarray(b, dtype=complex)
    ov = np.vdot(a, b)
    if abs(ov) == 0:
        return bool(np.linalg.norm(a) < tol and np.linalg.norm(b) < tol)
    return bool(np.linalg.norm(a * (ov / abs(ov)) - b) <= tol)


def spin_ops(hbar: float = 1.0) -> dict[str, np.ndarray]:
    """Spin-1/2 matrices in the S_z eigenbasis (|+>, |->)."""
    return {
        "x": 0.5 * hbar * np.array([[0, 1], [1, 0]], dtype=complex),
        "y": 0.5 * hbar * np.array([[0, -1j], [1j, 0]], dtype=complex),
        "z": 0.5 * hbar * np.array([[1, 0], [0, -1]], dtype=complex),
    }


def mixture_density(weights) -> DensityMatrix:
    """Diagonal statistical mixture with the given probabilities."""
    return DensityMatrix(np.diag(np.asarray(weights, dtype=complex)))
