"""Pendulum coupled to an oscillator bath: coherent states and dissipation-driven decoherence."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .constants import HBAR


class IntegrationError(RuntimeError):
    """The fixed-step integrator drifted beyond its conservation tolerance."""


@dataclass(frozen=True)
class CoherentState:
    alpha: complex

    def __post_init__(self):
        a = complex(self.alpha)
        if not np.isfinite(a):
            raise ValueError("alpha must be finite")
        object.__setattr__(self, "alpha", a)

    def fock_amplitudes(self, n_levels: int) -> np.ndarray:
        """exp(-|a|^2/2) a^n / sqrt(n!) for n < n_levels."""
        n = np.arange(n_levels)
        a = self.alpha
        if a == 0:
            out = np.zeros(n_levels, dtype=complex)
            out[0] = 1.0
            return out
        log_mod = -0.5 * abs(a) ** 2 + n * np.log(abs(a)) - 0.5 * gammaln(n + 1)
        return np.exp(log_mod + 1j * n * np.angle(a))


def coherent_overlap(a: CoherentState, b: CoherentState) -> complex:
    """<a|b> = exp(-(|a-b|^2 + i phi)/2) with phi = Im(a b* - a* b)."""
    x, y = a.alpha, b.alpha
    phi = (x * np.conj(y) - np.conj(x) * y).imag
    return complex(np.exp(-(abs(x - y) ** 2 + 1j * phi) / 2))


@dataclass(frozen=True)
class PendulumParams:
    mass: float
    omega: float
    gamma: float
    x01: float
    x02: float
    delta_omega: float = 0.0
    hbar: float = HBAR

    def __post_init__(self):
        if not (self.mass > 0 and self.omega > 0 and self.gamma > 0):
            raise ValueError("mass, omega and gamma must be positive")


def alpha_from_phase_space(p: PendulumParams, x0: float, p0: float) -> CoherentState:
    return CoherentState((p.mass * p.omega * x0 + 1j * p0) / np.sqrt(2 * p.mass * p.hbar * p.omega))


def damped_alpha(alpha0: CoherentState, p: PendulumParams, t: float) -> CoherentState:
    # the small fluctuating correction is not modelled
    if t < 0:
        raise ValueError("t must be >= 0")
    return CoherentState(alpha0.alpha * np.exp(-1j * (p.omega + p.delta_omega) * t - p.gamma * t))


def decoherence_exponent(p: PendulumParams, t) -> np.ndarray | float:
    """-ln|decoherence factor| = (m w^2 / 4 hbar) |x01 - x02|^2 (1 - exp(-2 gamma t))."""
    k = decoherence_ratio(p)["K"]
    out = k * -np.expm1(-2 * p.gamma * np.asarray(t, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def pendulum_decoherence_factor(p: PendulumParams, t: float) -> dict:
    """Magnitude of the bath-branch overlap; its phase is a fluctuating term and is not modelled."""
    if t < 0:
        raise ValueError("t must be >= 0")
    expo = decoherence_exponent(p, t)
    return {"magnitude": float(np.exp(-expo)), "log_magnitude": -float(expo),
            "phase": "fluctuating, convention-dependent"}


def decoherence_ratio(p: PendulumParams) -> dict:
    k = p.mass * p.omega**2 * (p.x01 - p.x02) ** 2 / (4 * p.hbar)
    return {"K": k, "tau_d_over_tau": np.inf if k == 0 else 1.0 / k}


@dataclass
class BathODEState:
    alpha: complex
    betas: np.ndarray
    omega: float
    omegas: np.ndarray
    lambdas: np.ndarray

    def __post_init__(self):
        self.betas = np.asarray(self.betas, dtype=complex).reshape(-1)
        self.omegas = np.asarray(self.omegas, dtype=float).reshape(-1)
        self.lambdas = np.asarray(self.lambdas, dtype=complex).reshape(-1)
        if not (self.betas.size == self.omegas.size == self.lambdas.size):
            raise ValueError("betas, omegas and lambdas must have equal lengths")
        self.alpha = complex(self.alpha)

    def vector(self) -> np.ndarray:
        return np.concatenate([[self.alpha], self.betas])


@dataclass
class BathTrajectory:
    times: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray  # (len(times), N)
    max_norm_drift: float = 0.0
    extra: dict = field(default_factory=dict)

    def state_at(self, i: int, template: BathODEState) -> BathODEState:
        return BathODEState(self.alphas[i], self.betas[i], template.omega, template.omegas, template.lambdas)


def _rhs(y: np.ndarray, omega: float, omegas: np.ndarray, lam: np.ndarray) -> np.ndarray:
    # i dy/dt = M y with the arrow-shaped Hermitian M; y[..., 0] is the pendulum
    a = y[..., :1]
    b = y[..., 1:]
    da = omega * a + np.sum(lam * b, axis=-1, keepdims=True)
    db = omegas * b + np.conj(lam) * a
    return -1j * np.concatenate([da, db], axis=-1)


def integrate_bath(s0: BathODEState | list, t: float, dt: float, record_every: int = 1,
                   drift_tol: float = 1e-4) -> BathTrajectory | list:
    """Fixed-step RK4 integration of the coherent-state amplitude flow.

    Passing a list of initial states integrates them jointly with the same
    step sequence and returns one trajectory per state.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    states = s0 if isinstance(s0, list) else [s0]
    ref = states[0]
    spread = np.ptp(ref.omegas) if ref.omegas.size > 1 else 0.0
    if spread > 0 and np.max(np.abs(ref.lambdas)) > spread:
        warnings.warn("couplings are not small relative to the bath frequency spread", RuntimeWarning)
    y = np.array([s.vector() for s in states])
    norm0 = np.sum(np.abs(y) ** 2, axis=1)
    n_steps = int(round(t / dt))
    n_rec = n_steps // record_every + 1
    times = np.empty(n_rec)
    rec = np.empty((len(states), n_rec, y.shape[1]), dtype=complex)
    times[0], rec[:, 0] = 0.0, y
    om, oms, lam = ref.omega, ref.omegas, ref.lambdas
    max_drift = 0.0
    j = 1
    for step in range(1, n_steps + 1):
        k1 = _rhs(y, om, oms, lam)
        k2 = _rhs(y + 0.5 * dt * k1, om, oms, lam)
        k3 = _rhs(y + 0.5 * dt * k2, om, oms, lam)
        k4 = _rhs(y + dt * k3, om, oms, lam)
        y = y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if step % record_every == 0:
            drift = float(np.max(np.abs(np.sum(np.abs(y) ** 2, axis=1) - norm0) / np.maximum(norm0, 1e-300)))
            max_drift = max(max_drift, drift)
            if drift > drift_tol:
                raise IntegrationError(f"norm drift {drift:.2e} exceeds {drift_tol:.0e}; reduce dt")
            times[j], rec[:, j] = step * dt, y
            j += 1
    out = [BathTrajectory(times[:j], rec[i, :j, 0], rec[i, :j, 1:], max_drift) for i in range(len(states))]
    return out if isinstance(s0, list) else out[0]


def weisskopf_wigner_invariant(tr1: BathTrajectory, tr2: BathTrajectory) -> np.ndarray:
    """alpha_1* alpha_2 + sum_k beta_1k* beta_2k along two trajectories."""
    return np.conj(tr1.alphas) * tr2.alphas + np.sum(np.conj(tr1.betas) * tr2.betas, axis=1)


def flat_band_bath(n: int, omega: float, bandwidth: float, gamma: float,
                   alpha0: complex = 1.0) -> BathODEState:
    """N oscillators evenly spaced across ``bandwidth`` around ``omega``.

    The uniform coupling is chosen from the golden-rule relation
    gamma = pi |lambda|^2 rho(omega), rho = N / bandwidth, so the pendulum
    amplitude should decay as exp(-gamma t) until the recurrence time
    2 pi rho.
    """
    spacing = bandwidth / n
    omegas = omega - 0.5 * bandwidth + spacing * (np.arange(n) + 0.5)
    lam = np.sqrt(gamma * spacing / np.pi)
    return BathODEState(alpha0, np.zeros(n, dtype=complex), omega, omegas, np.full(n, lam, dtype=complex))


def golden_rule_gamma(s: BathODEState, bandwidth: float) -> float:
    rho = s.omegas.size / bandwidth
    return float(np.pi * np.mean(np.abs(s.lambdas) ** 2) * rho)


def fit_decay_rate(times, alphas, t_max: float) -> float:
    """Least-squares slope of -ln|alpha(t)| over 0 <= t <= t_max."""
    times = np.asarray(times)
    sel = times <= t_max
    y = np.log(np.abs(np.asarray(alphas)[sel]))
    slope = np.polyfit(times[sel], y, 1)[0]
    return float(-slope)
