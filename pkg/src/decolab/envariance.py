"""Environment-assisted invariance and the symmetry route to equal probabilities.

A bipartite state is stored as its coefficient matrix C[s, e] in fixed
orthonormal system and environment bases, so the state is
sum_{s,e} C[s, e] |s>|e>.  A system-side operator U acts as C -> U C and an
environment-side operator V as C -> C V^T.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

CHAIN_TOL = 1e-10
DENSE_LIMIT = 128


class ChainNotApplicable(ValueError):
    """The equal-probability argument needs coefficients of equal magnitude."""


@dataclass(frozen=True)
class SchmidtPair:
    matrix: np.ndarray

    def __post_init__(self):
        c = np.array(self.matrix, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("coefficient matrix must be square")
        n2 = float(np.sum(np.abs(c) ** 2))
        if abs(n2 - 1) > 1e-10:
            raise ValueError(f"state norm^2 is {n2}, expected 1")
        c.setflags(write=False)
        object.__setattr__(self, "matrix", c)

    @classmethod
    def from_coefficients(cls, coeffs) -> "SchmidtPair":
        return cls(np.diag(np.asarray(coeffs, dtype=complex)))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def amplitudes(self) -> np.ndarray:
        """Row-major joint amplitudes, system factor first."""
        return self.matrix.reshape(-1)

    def system_state(self) -> np.ndarray:
        return self.matrix @ self.matrix.conj().T

    def environment_state(self) -> np.ndarray:
        return self.matrix.T @ self.matrix.conj()


def _check_side(side: str) -> None:
    if side not in ("system", "environment"):
        raise ValueError("side must be 'system' or 'environment'")


def act(s: SchmidtPair, op: np.ndarray, side: str) -> SchmidtPair:
    _check_side(side)
    op = np.asarray(op, dtype=complex)
    return SchmidtPair(op @ s.matrix if side == "system" else s.matrix @ op.T)


def phase_operator(thetas, side: str) -> np.ndarray:
    """diag(e^{i theta}) on the system, diag(e^{-i theta}) on the environment."""
    _check_side(side)
    sign = 1.0 if side == "system" else -1.0
    return np.diag(np.exp(sign * 1j * np.asarray(thetas, dtype=float)))


def swap_operator(size: int, side: str, thetas=(0.0, 0.0), pair=(0, 1)) -> np.ndarray:
    """e^{i t1}|i><j| + e^{i t2}|j><i| on the chosen pair, identity elsewhere (conjugate phases on the environment)."""
    _check_side(side)
    i, j = pair
    if i == j or not (0 <= i < size and 0 <= j < size):
        raise ValueError("swap needs two distinct labels inside the basis")
    sign = 1.0 if side == "system" else -1.0
    op = np.eye(size, dtype=complex)
    op[i, i] = op[j, j] = 0.0
    op[i, j] = np.exp(sign * 1j * thetas[0])
    op[j, i] = np.exp(sign * 1j * thetas[1])
    return op


def apply_phase(s: SchmidtPair, thetas, side: str) -> SchmidtPair:
    if len(thetas) != s.size:
        raise ValueError("one angle per Schmidt term")
    return act(s, phase_operator(thetas, side), side)


def apply_swap(s: SchmidtPair, side: str, thetas=(0.0, 0.0), pair=(0, 1)) -> SchmidtPair:
    return act(s, swap_operator(s.size, side, thetas, pair), side)


def counter_swap_angles(s: SchmidtPair, thetas, pair=(0, 1)) -> tuple[float, float]:
    """Environment swap angles that exactly undo a system swap on a diagonal state.

    For c_i = |c| e^{i phi_i} these are (t1 + phi_j - phi_i, t2 + phi_i - phi_j);
    they reduce to (t1, t2) when the two phases agree.
    """
    i, j = pair
    d = np.angle(s.matrix[j, j]) - np.angle(s.matrix[i, i])
    return float(thetas[0] + d), float(thetas[1] - d)


def overlap_fidelity(a: SchmidtPair, b: SchmidtPair) -> float:
    return float(abs(np.vdot(a.amplitudes(), b.amplitudes())) ** 2)


@dataclass(frozen=True)
class EnvarianceReport:
    envariant: bool
    counter: np.ndarray | None
    fidelity: float


def find_counter(target: np.ndarray, moved: np.ndarray, tol: float = 1e-10) -> np.ndarray | None:
    """Monomial V (permutation times phases) with moved V^T = target, or None.

    Each target column must equal some unused moved column up to a unit phase;
    the match is exact, so this is an exhaustive search of the monomial family.
    """
    k = target.shape[1]
    scale = max(1.0, float(np.max(np.abs(target))))
    nt = np.linalg.norm(target, axis=0)
    nm = np.linalg.norm(moved, axis=0)
    ov = moved.conj().T @ target  # ov[e2, e] = <moved_e2 | target_e>
    candidate = (np.abs(nm[:, None] - nt[None, :]) <= tol * scale) & \
                (np.abs(np.abs(ov) - nm[:, None] * nt[None, :]) <= tol * scale**2)
    used = np.zeros(k, dtype=bool)
    v = np.zeros((k, k), dtype=complex)
    for e in range(k):
        for e2 in np.flatnonzero(candidate[:, e] & ~used):
            phase = ov[e2, e] / abs(ov[e2, e]) if abs(ov[e2, e]) > 0 else 1.0
            if np.max(np.abs(phase * moved[:, e2] - target[:, e])) <= tol * scale:
                v[e, e2] = phase
                used[e2] = True
                break
        else:
            return None
    return v


def verify_envariance(s: SchmidtPair, u_system: np.ndarray) -> EnvarianceReport:
    moved = act(s, u_system, "system")
    v = find_counter(s.matrix, moved.matrix)
    if v is None:
        return EnvarianceReport(False, None, overlap_fidelity(moved, s))
    restored = act(moved, v, "environment")
    fid = overlap_fidelity(restored, s)
    return EnvarianceReport(fid > 1 - 1e-10, v, fid)


@dataclass(frozen=True)
class ChainStep:
    claim: str
    residual: float


@dataclass(frozen=True)
class ChainReport:
    steps: tuple[ChainStep, ...]
    p_plus: Fraction
    p_minus: Fraction

    @property
    def max_residual(self) -> float:
        return max(st.residual for st in self.steps)


def _outcome_weight_leak(c: np.ndarray, s_label: int, e_label: int) -> float:
    # weight on |s_label> paired with any environment label other than e_label
    row = np.abs(c[s_label]) ** 2
    return float(np.sum(row) - row[e_label])


def equal_prob_chain(s: SchmidtPair, thetas=(0.3, -1.1)) -> ChainReport:
    """Check each link of the swap argument for a two-term equal-magnitude state.

    Probabilities are never computed from amplitudes.  The only admissible
    evidence about system outcomes is the system's reduced state, and about
    environment outcomes the environment's reduced state; each residual
    measures how far the corresponding equality of reduced descriptions (or
    perfect correlation) fails.  Exhaustiveness then fixes both values to 1/2.
    """
    c = s.matrix
    if s.size != 2 or np.max(np.abs(c - np.diag(np.diag(c)))) > CHAIN_TOL:
        raise ChainNotApplicable("the chain applies to a two-term Schmidt-form state")
    mags = np.abs(np.diag(c))
    if abs(mags[0] - mags[1]) > CHAIN_TOL:
        raise ChainNotApplicable(f"coefficient magnitudes differ by {abs(mags[0] - mags[1]):.3g}")
    xs = swap_operator(2, "system", thetas)
    xe = swap_operator(2, "environment", counter_swap_angles(s, thetas))
    swapped = act(s, xs, "system")
    restored = act(swapped, xe, "environment")
    # label 1 is the "-" outcome, paired with environment label 1
    steps = (
        ChainStep("p(+, Psi) = p(+, Xe Xs Psi): swap is envariant",
                  float(np.max(np.abs(restored.system_state() - s.system_state())))),
        ChainStep("p(+, Xe Xs Psi) = p(+, Xs Psi): environment action leaves the system state",
                  float(np.max(np.abs(restored.system_state() - swapped.system_state())))),
        ChainStep("p(+, Xs Psi) = p(eps-, Xs Psi): + is perfectly correlated with eps- after the swap",
                  _outcome_weight_leak(swapped.matrix, 0, 1)),
        ChainStep("p(eps-, Xs Psi) = p(eps-, Psi): system action leaves the environment state",
                  float(np.max(np.abs(swapped.environment_state() - s.environment_state())))),
        ChainStep("p(eps-, Psi) = p(-, Psi): - is perfectly correlated with eps-",
                  _outcome_weight_leak(c, 1, 1)),
    )
    if max(st.residual for st in steps) > CHAIN_TOL:
        raise ArithmeticError("a link of the chain failed numerically")
    return ChainReport(steps, Fraction(1, 2), Fraction(1, 2))


def _pair_chain(i: int, j: int, phases: np.ndarray) -> float:
    block = SchmidtPair.from_coefficients(np.exp(1j * phases[[i, j]]) / np.sqrt(2))
    return equal_prob_chain(block).max_residual


@lru_cache(maxsize=256)
def _certify_equiprobable(k: int, phases: tuple | None) -> None:
    """Raise unless every adjacent pair of the k equal branches passes the swap chain."""
    ph = np.zeros(k) if phases is None else np.asarray(phases)
    if ph.size != k:
        raise ValueError("one phase per fine-grained branch")
    full = SchmidtPair.from_coefficients(np.exp(1j * ph) / np.sqrt(k)) if k <= DENSE_LIMIT else None
    for i in range(k - 1):
        if _pair_chain(i, i + 1, ph) > CHAIN_TOL:
            raise ArithmeticError("pair chain failed")
        if full is not None:
            u = swap_operator(k, "system", (0.4, 0.9), (i, i + 1))
            if not verify_envariance(full, u).envariant:
                raise ArithmeticError(f"swap of branches {i}, {i + 1} is not envariant")


def born_from_counting(m: int, n: int, phases=None) -> Fraction:
    """P(+) for sqrt(m/N)|+>|A+> + sqrt(n/N)|->|A->, N = m + n, by fine-graining.

    The environment splits into N equally weighted branches, the first m
    correlated with +.  Adjacent-pair swap chains make all N fine-grained
    outcomes equiprobable; the answer is then a count.  Up to 128 branches
    every adjacent swap is also checked for envariance on the full state.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    k = m + n
    if k > 10_000:
        raise ValueError("m + n must not exceed 10^4")
    _certify_equiprobable(k, None if phases is None else tuple(float(p) for p in phases))
    each = Fraction(1, k)
    return m * each


def counting_convergence(weight: float, max_denominators=(2, 4, 8, 16, 32, 64, 128, 1024)) -> list[tuple[int, Fraction, float]]:
    """Counting answers for rational approximations of an arbitrary weight in (0, 1)."""
    if not 0 < weight < 1:
        raise ValueError("weight must lie strictly between 0 and 1")
    out = []
    for q in max_denominators:
        f = Fraction(weight).limit_denominator(q)
        if f.numerator == 0 or f.numerator == f.denominator:
            continue
        p = born_from_counting(f.numerator, f.denominator - f.numerator)
        out.append((q, p, abs(float(p) - weight)))
    return out
