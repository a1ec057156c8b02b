"""Von Neumann premeasurement, projective Born sampling and pointer robustness.

The pointer lives on a uniform position grid.  Coupling the observable A to the
pointer momentum for a time tau shifts the pointer by a_k g tau for each
eigenvalue a_k; shifts are snapped to grid points so the pointer states stay
orthogonal basis vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .qcore import DensityMatrix, FactorShape, Operator, StateVector, reduced_state


class PointerRangeError(ValueError):
    """A shifted pointer position falls outside the grid."""


@dataclass(frozen=True)
class PointerApparatus:
    positions: np.ndarray
    ready_index: int
    coupling: float  # g * tau
    boundary: str = "error"  # or "periodic"

    def __post_init__(self):
        x = np.asarray(self.positions, dtype=float)
        if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
            raise ValueError("pointer grid must be strictly increasing")
        d = np.diff(x)
        if np.max(np.abs(d - d[0])) > 1e-9 * d[0]:
            raise ValueError("pointer grid must be uniform")
        if not 0 <= self.ready_index < x.size:
            raise ValueError("ready index outside the grid")
        if self.boundary not in ("error", "periodic"):
            raise ValueError("boundary must be 'error' or 'periodic'")
        x.setflags(write=False)
        object.__setattr__(self, "positions", x)

    @property
    def spacing(self) -> float:
        return float(self.positions[1] - self.positions[0])

    @property
    def size(self) -> int:
        return self.positions.size

    def shift_steps(self, eigenvalue: float) -> int:
        shift = eigenvalue * self.coupling / self.spacing
        steps = int(np.rint(shift))
        if abs(shift - steps) > 0.1:
            raise PointerRangeError(f"pointer shift {shift:.3f} grid steps is not within 1/10 step of a grid point")
        return steps

    def target_index(self, eigenvalue: float) -> int:
        j = self.ready_index + self.shift_steps(eigenvalue)
        if self.boundary == "periodic":
            return j % self.size
        if not 0 <= j < self.size:
            raise PointerRangeError(f"pointer position index {j} leaves the grid")
        return j


def eigenspaces(op: Operator, rel_tol: float = 1e-9) -> list[tuple[float, np.ndarray]]:
    """Eigenvalues grouped into degenerate eigenspaces, each with an orthonormal column basis."""
    if not op.is_hermitian():
        raise ValueError("observable must be Hermitian")
    w, v = np.linalg.eigh(op.entries)
    span = max(float(w[-1] - w[0]), 1.0) if w.size > 1 else 1.0
    groups: list[tuple[float, np.ndarray]] = []
    start = 0
    for i in range(1, w.size + 1):
        if i == w.size or w[i] - w[i - 1] > rel_tol * span:
            groups.append((float(np.mean(w[start:i])), v[:, start:i]))
            start = i
    return groups


def premeasure(system: StateVector, apparatus: PointerApparatus, observable: Operator) -> StateVector:
    """sum_k P_k|psi> (x) |X_0 + a_k g tau>  on the space system (x) pointer."""
    if observable.entries.shape[0] != system.dim:
        raise ValueError("observable dimension does not match the system")
    joint = np.zeros((system.dim, apparatus.size), dtype=complex)
    for a_k, basis in eigenspaces(observable):
        j = apparatus.target_index(a_k)
        joint[:, j] += basis @ (basis.conj().T @ system.amps)
    return StateVector(joint.reshape(-1), FactorShape((system.dim, apparatus.size)))


def premeasure_unitary(apparatus: PointerApparatus, observable: Operator) -> np.ndarray:
    """The full unitary on system (x) pointer; requires a periodic pointer for unitarity."""
    n_sys = observable.entries.shape[0]
    u = np.zeros((n_sys * apparatus.size,) * 2, dtype=complex)
    for a_k, basis in eigenspaces(observable):
        proj = basis @ basis.conj().T
        shift = np.roll(np.eye(apparatus.size), apparatus.shift_steps(a_k), axis=0)
        u += np.kron(proj, shift)
    return u


@dataclass(frozen=True)
class MeasurementRecord:
    eigenvalue: float
    collapsed_state: StateVector
    probability: float


def outcome_distribution(state: StateVector, observable: Operator) -> list[tuple[float, float, np.ndarray]]:
    out = []
    for a_k, basis in eigenspaces(observable):
        proj = basis @ (basis.conj().T @ state.amps)
        out.append((a_k, float(np.vdot(proj, proj).real), proj))
    return out


def born_sample(state: StateVector, observable: Operator, rng: np.random.Generator) -> MeasurementRecord:
    dist = outcome_distribution(state, observable)
    probs = np.array([p for _, p, _ in dist])
    probs = np.clip(probs, 0.0, 1.0)
    k = int(rng.choice(len(dist), p=probs / probs.sum()))
    a_k, p_k, proj = dist[k]
    return MeasurementRecord(a_k, StateVector(proj, state.shape, normalize=True), float(min(max(p_k, 0.0), 1.0)))


def robust_pointer_check(h_int: Operator, pointer_obs: Operator, tol: float = 1e-10) -> dict:
    """Does H commute with the pointer observable, and if so what are its projector weights?

    When the commutator vanishes H is block diagonal in the pointer eigenspaces;
    each block is diagonalized so H = sum_k h_k |p_k><p_k| in a common eigenbasis.
    """
    h = h_int.entries
    p = pointer_obs.entries
    if h.shape != p.shape:
        raise ValueError("operators must act on the same space")
    comm = float(np.linalg.norm(h @ p - p @ h))
    report = {"commutator_norm": comm, "commutes": comm < tol, "projector_decomposition": None, "basis": None}
    if not report["commutes"]:
        return report
    coeffs, vectors = [], []
    for _, basis in eigenspaces(pointer_obs):
        block = basis.conj().T @ h @ basis
        w, v = np.linalg.eigh(0.5 * (block + block.conj().T))
        coeffs.extend(w.tolist())
        vectors.append(basis @ v)
    report["projector_decomposition"] = np.array(coeffs)
    report["basis"] = np.hstack(vectors)
    return report


def couple_environment(joint: StateVector, hamiltonian: np.ndarray, t: float) -> StateVector:
    """Evolve a joint (system, pointer, environment) state under exp(-i H t)."""
    u = expm(-1j * t * np.asarray(hamiltonian, dtype=complex))
    return StateVector(u @ joint.amps, joint.shape)


def pointer_weights(joint: StateVector, pointer_factor: int = 1) -> np.ndarray:
    """Probability of each pointer position (diagonal of the pointer's reduced state)."""
    rho = reduced_state(joint, [pointer_factor])
    return np.real(np.diag(rho.entries))


def measurement_sequence(system: StateVector, apparatus: PointerApparatus, observable: Operator,
                         env_overlap: complex, order: str, rng: np.random.Generator) -> dict:
    """Premeasurement followed by decoherence and Born collapse in either order.

    Matrices are written in the branch basis |a_k>|X_k>, where the premeasured
    state is pure.  ``env_overlap`` multiplies every off-diagonal entry when the
    environment decoheres the branches.
    """
    if order not in ("decohere-first", "collapse-first"):
        raise ValueError("order must be 'decohere-first' or 'collapse-first'")
    joint = premeasure(system, apparatus, observable)
    dist = outcome_distribution(system, observable)
    amps = np.sqrt(np.array([p for _, p, _ in dist]))
    pure = np.outer(amps, amps).astype(complex)
    decohere = np.full(pure.shape, env_overlap, dtype=complex)
    np.fill_diagonal(decohere, 1.0)
    pointer_obs = Operator(np.diag(apparatus.positions), FactorShape((system.dim, apparatus.size)), acts_on=1)
    rec = born_sample(joint, Operator(pointer_obs.full()), rng)
    k = int(np.argmin([abs(apparatus.positions[apparatus.target_index(a)] - rec.eigenvalue) for a, _, _ in dist]))
    collapsed = np.zeros_like(pure)
    collapsed[k, k] = 1.0
    if order == "decohere-first":
        stages = {"premeasured": pure, "decohered": pure * decohere, "collapsed": collapsed}
    else:
        stages = {"premeasured": pure, "collapsed": collapsed, "decohered": collapsed * decohere}
    return {"stages": stages, "eigenvalue": dist[k][0], "pointer_position": rec.eigenvalue,
            "probability": rec.probability}


def pointer_density(joint: StateVector) -> DensityMatrix:
    return reduced_state(joint, [1])


def system_density(joint: StateVector) -> DensityMatrix:
    return reduced_state(joint, [0])

