"""Executable form of the linearity no-go argument for tolerant measurement schemes.

Joint space layout is system(2) x pointer(P) x environment(E), row-major.
Branch sets V_U and V_D are defined by windows on the pointer-position
expectation value.  For any linear, calibrated evolution the post-measurement
state of an equal superposition lies within distance 1 of the down image,
which contradicts the non-ambiguity requirement distance >= sqrt(2) - eps
for every eps < sqrt(2) - 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .parallel import seeded_map

BOUND_SLACK = 1e-9
LINEARITY_TOL = 1e-8
PURIFICATION_CAP = 4096


class CalibrationError(ValueError):
    """The evolution does not send ready states into the declared branch sets."""


@dataclass(frozen=True)
class TolerantScheme:
    evolution: Callable[[np.ndarray], np.ndarray]
    pointer_positions: np.ndarray
    env_dim: int
    ready_states: np.ndarray  # (n_ready, P*E) orthonormal rows on the apparatus space
    x_up: float
    x_down: float
    window: float
    unitary: np.ndarray | None = None  # set when evolution is a known matrix

    def __post_init__(self):
        x = np.asarray(self.pointer_positions, dtype=float)
        object.__setattr__(self, "pointer_positions", x)
        r = np.atleast_2d(np.asarray(self.ready_states, dtype=complex))
        object.__setattr__(self, "ready_states", r)
        if r.shape[1] != x.size * self.env_dim:
            raise ValueError("ready states must live on the pointer x environment space")
        if np.max(np.abs(r @ r.conj().T - np.eye(r.shape[0]))) > 1e-10:
            raise ValueError("ready states must be orthonormal")
        if abs(self.x_up - self.x_down) <= 2 * self.window:
            raise ValueError("up and down windows overlap")
        if self.unitary is not None:
            u = np.asarray(self.unitary)
            if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > 1e-10:
                raise ValueError("flagged unitary is not norm preserving")

    @property
    def dim(self) -> int:
        return 2 * self.pointer_positions.size * self.env_dim

    def pointer_mean(self, state: np.ndarray) -> float:
        t = np.abs(np.asarray(state).reshape(2, self.pointer_positions.size, self.env_dim, -1)) ** 2
        w = t.sum(axis=(0, 2, 3))
        return float(w @ self.pointer_positions / w.sum())

    def in_up(self, state) -> bool:
        return abs(self.pointer_mean(state) - self.x_up) <= self.window

    def in_down(self, state) -> bool:
        return abs(self.pointer_mean(state) - self.x_down) <= self.window

    def prepared(self, spin: np.ndarray, i: int) -> np.ndarray:
        return np.kron(np.asarray(spin, dtype=complex), self.ready_states[i])


UP = np.array([1.0, 0.0])
DOWN = np.array([0.0, 1.0])


def non_ambiguity_margin(scheme: TolerantScheme | None, samples_u, samples_d) -> float:
    """min ||u - d|| over the two sample sets (members are checked against the windows when a scheme is given)."""
    su = [np.asarray(s) for s in samples_u]
    sd = [np.asarray(s) for s in samples_d]
    if not su or not sd:
        raise ValueError("both sample sets must be non-empty")
    if scheme is not None:
        if not all(scheme.in_up(u) for u in su) or not all(scheme.in_down(d) for d in sd):
            raise ValueError("a sample lies outside its branch window")
    a = np.array(su)
    b = np.array(sd)
    dist = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
    return float(dist.min())


def linearity_residual(evolve: Callable, dim: int, rng: np.random.Generator, trials: int = 3) -> float:
    """Largest ||E(a u + b v) - a E(u) - b E(v)|| over random unit u, v and complex a, b."""
    worst = 0.0
    for _ in range(trials):
        u, v = (_random_unit(dim, rng) for _ in range(2))
        a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
        worst = max(worst, float(np.linalg.norm(evolve(a * u + b * v) - a * evolve(u) - b * evolve(v))))
    return worst


def _random_unit(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def check_calibration(scheme: TolerantScheme) -> tuple[list[np.ndarray], list[np.ndarray]]:
    ups, downs = [], []
    for i in range(scheme.ready_states.shape[0]):
        u = scheme.evolution(scheme.prepared(UP, i))
        d = scheme.evolution(scheme.prepared(DOWN, i))
        if not scheme.in_up(u):
            raise CalibrationError(f"up-ready state {i} does not reach the up window")
        if not scheme.in_down(d):
            raise CalibrationError(f"down-ready state {i} does not reach the down window")
        ups.append(u)
        downs.append(d)
    return ups, downs


@dataclass(frozen=True)
class WitnessReport:
    distance: float
    bound: float
    bound_holds: bool
    linear: bool
    linearity_residual: float
    margin: float
    eps_max: float  # contradiction holds for every eps below this
    contradiction: bool
    note: str


def impossibility_witness(scheme: TolerantScheme, rng: np.random.Generator | None = None,
                          ready_index: int = 0) -> WitnessReport:
    rng = np.random.default_rng(0) if rng is None else rng
    ups, downs = check_calibration(scheme)
    res = linearity_residual(scheme.evolution, scheme.dim, rng)
    linear = res <= LINEARITY_TOL
    psi_bf = scheme.prepared((UP + DOWN) / np.sqrt(2), ready_index)
    psi_aft = scheme.evolution(psi_bf)
    dist = float(np.linalg.norm(psi_aft - downs[ready_index]))
    bound = 1.0 + BOUND_SLACK
    margin = non_ambiguity_margin(None, ups, downs)
    contradiction = linear and dist <= bound
    if not linear:
        note = "linearity probe failed: the distance bound is not derivable"
    elif dist <= bound:
        note = "distance <= 1 contradicts non-ambiguity for every eps < sqrt(2) - distance"
    else:
        note = "bound violated for a linear evolution"
    return WitnessReport(dist, bound, dist <= bound, linear, res, margin, float(np.sqrt(2) - dist),
                         contradiction, note)


# --- random instances ------------------------------------------------------------

def _complete_unitary(cols: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Unitary whose leading columns are the given orthonormal columns."""
    dim, k = cols.shape
    filler = rng.normal(size=(dim, dim - k)) + 1j * rng.normal(size=(dim, dim - k))
    q, _ = np.linalg.qr(np.hstack([cols, filler]))
    q[:, :k] = cols
    return q


def random_calibrated_scheme(rng: np.random.Generator, n_pointer: int, env_dim: int, n_ready: int = 1,
                             window: float = 0.5, leak: float = 0.0) -> TolerantScheme:
    """Random unitary mapping |up, r_i> into the up window and |down, r_i> into the down window.

    Pointer positions are evenly spaced on [-1, 1] with the ready position in
    the middle.  ``leak`` mixes a little weight into the rest of the pointer
    range while keeping every image inside its window.
    """
    x = np.linspace(-1.0, 1.0, n_pointer)
    n_app = n_pointer * env_dim
    dim = 2 * n_app
    if n_ready > env_dim:
        raise ValueError("at most env_dim ready states")
    ready_idx = n_pointer // 2
    ready = np.zeros((n_ready, n_app), dtype=complex)
    for i in range(n_ready):
        ready[i, ready_idx * env_dim + i] = 1.0
    up_mask = np.repeat(x >= 1.0 - window, env_dim)
    down_mask = np.repeat(x <= -1.0 + window, env_dim)
    targets = []
    for mask in (up_mask, down_mask):
        for _ in range(n_ready):
            v = np.zeros(dim, dtype=complex)
            sub = np.zeros(n_app, dtype=complex)
            sub[mask] = rng.normal(size=mask.sum()) + 1j * rng.normal(size=mask.sum())
            if leak > 0:
                sub += leak * (rng.normal(size=n_app) + 1j * rng.normal(size=n_app)) * np.linalg.norm(sub) / np.sqrt(n_app)
            spin = rng.normal(size=2) + 1j * rng.normal(size=2)
            v[:] = np.kron(spin / np.linalg.norm(spin), sub)
            targets.append(v)
    outs, _ = np.linalg.qr(np.array(targets).T)  # orthonormalize all branch images together
    ins = np.array([np.kron(UP, r) for r in ready] + [np.kron(DOWN, r) for r in ready]).T
    u = _complete_unitary(outs, rng) @ _complete_unitary(ins, rng).conj().T
    scheme = TolerantScheme(lambda s, u=u: u @ s, x, env_dim, ready, 1.0, -1.0, window, unitary=u)
    check_calibration(scheme)
    return scheme


def random_shape(rng: np.random.Generator, dim_min: int = 8, dim_max: int = 64) -> tuple[int, int]:
    shapes = [(p, e) for p in (3, 4, 5) for e in range(1, 11) if dim_min <= 2 * p * e <= dim_max]
    return shapes[rng.integers(len(shapes))]


def nonlinear_stub(scheme: TolerantScheme, kappa: float = 0.7) -> TolerantScheme:
    """Same calibration, but the output picks up a phase exp(i kappa ||psi||^2)."""
    u = scheme.unitary

    def evolve(s):
        s = np.asarray(s)
        return np.exp(1j * kappa * np.vdot(s, s).real) * (u @ s)

    return TolerantScheme(evolve, scheme.pointer_positions, scheme.env_dim, scheme.ready_states,
                          scheme.x_up, scheme.x_down, scheme.window)


def sweep(n_schemes: int, seed: int, dim_min: int = 8, dim_max: int = 64) -> list[WitnessReport]:
    def one(_, rng):
        p, e = random_shape(rng, dim_min, dim_max)
        s = random_calibrated_scheme(rng, p, e, n_ready=int(rng.integers(1, e + 1)), leak=0.05)
        return impossibility_witness(s, rng)
    return seeded_map(one, seed, n_schemes)


# --- impure initial apparatus states -------------------------------------------------

def purify(rho0: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, int]:
    """Columns sqrt(p_j) phi_j of the nonzero spectrum; the ancilla dimension is their count."""
    w, v = np.linalg.eigh(0.5 * (rho0 + rho0.conj().T))
    if w.min() < -1e-10 or abs(w.sum() - 1) > 1e-10:
        raise ValueError("rho0 must be a positive, unit-trace matrix")
    keep = w > tol
    return v[:, keep] * np.sqrt(w[keep]), int(keep.sum())


def impure_variant(scheme: TolerantScheme, rho0, rng: np.random.Generator | None = None,
                   cap: int = PURIFICATION_CAP) -> WitnessReport:
    """Witness on a purification of an impure ready register.

    ``rho0`` is a density matrix over the span of the scheme's ready states.
    The purified register lives on apparatus x ancilla and the evolution acts
    as evolution x identity.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    n_ready = scheme.ready_states.shape[0]
    if rho0.shape != (n_ready, n_ready):
        raise ValueError("rho0 must act on the span of the ready states")
    cols, anc = purify(rho0)
    if scheme.dim * anc > cap:
        raise ValueError(f"purified dimension {scheme.dim * anc} exceeds the cap {cap}")
    # register state: sum_j sum_i cols[i, j] |r_i> |j>
    register = np.einsum("ij,ia->aj", cols, scheme.ready_states).reshape(-1)

    def evolve(s):
        t = np.asarray(s).reshape(scheme.dim, anc)
        return np.stack([scheme.evolution(t[:, j]) for j in range(anc)], axis=1).reshape(-1)

    ext = TolerantScheme(evolve, scheme.pointer_positions, scheme.env_dim * anc,
                         register[None, :], scheme.x_up, scheme.x_down, scheme.window)
    return impossibility_witness(ext, rng)


def random_density(n: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real
