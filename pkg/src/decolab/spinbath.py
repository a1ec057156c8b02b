"""Spin-1/2 system coupled bit by bit to a bath of two-level systems.

Each bath spin k starts in a_k|0> + b_k|1> and couples with strength g_k to
the system's S_z.  The decoherence factor is the overlap of the two bath
branches,

    z(t) = prod_k (|a_k|^2 exp(-2i g_k t) + |b_k|^2 exp(+2i g_k t)).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

LOG_SPACE_ABOVE = 64


@dataclass(frozen=True)
class SpinBathParams:
    couplings: np.ndarray
    env_amps: np.ndarray  # shape (n, 2): columns a_k, b_k
    system_amps: tuple[complex, complex] = (2**-0.5, 2**-0.5)

    def __post_init__(self):
        g = np.asarray(self.couplings, dtype=float).reshape(-1)
        amps = np.asarray(self.env_amps, dtype=complex).reshape(-1, 2)
        if g.size < 1:
            raise ValueError("bath needs at least one spin")
        if amps.shape[0] != g.size:
            raise ValueError("one (a_k, b_k) pair per coupling is required")
        norms = np.sum(np.abs(amps) ** 2, axis=1)
        if np.max(np.abs(norms - 1)) > 1e-10:
            raise ValueError("every bath spin must satisfy |a|^2 + |b|^2 = 1")
        alpha, beta = (complex(c) for c in self.system_amps)
        if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > 1e-10:
            raise ValueError("system amplitudes must be normalized")
        g.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "couplings", g)
        object.__setattr__(self, "env_amps", amps)
        object.__setattr__(self, "system_amps", (alpha, beta))

    @property
    def n(self) -> int:
        return self.couplings.size

    @property
    def pa(self) -> np.ndarray:
        return np.abs(self.env_amps[:, 0]) ** 2

    @property
    def pb(self) -> np.ndarray:
        return np.abs(self.env_amps[:, 1]) ** 2


def bloch_amplitudes(n: int, rng: np.random.Generator) -> np.ndarray:
    """Amplitudes uniformly distributed on the Bloch sphere."""
    cos_theta = rng.uniform(-1.0, 1.0, size=n)
    phi = rng.uniform(0.0, 2 * np.pi, size=n)
    a = np.sqrt((1 + cos_theta) / 2)
    b = np.sqrt((1 - cos_theta) / 2) * np.exp(1j * phi)
    return np.column_stack([a, b])


def random_bath(n: int, rng: np.random.Generator, g_max: float = 1.0,
                system_amps=(2**-0.5, 2**-0.5)) -> SpinBathParams:
    """Default bath: couplings uniform on (0, g_max], Bloch-uniform spins."""
    g = g_max * (1.0 - rng.random(n))  # (0, g_max]
    return SpinBathParams(g, bloch_amplitudes(n, rng), system_amps)


def uniform_bath(n: int, g: float, a: complex, b: complex,
                 system_amps=(2**-0.5, 2**-0.5)) -> SpinBathParams:
    amps = np.tile(np.array([a, b], dtype=complex), (n, 1))
    return SpinBathParams(np.full(n, float(g)), amps, system_amps)


def _factors(p: SpinBathParams, t: np.ndarray) -> np.ndarray:
    ph = np.exp(-2j * np.outer(t, p.couplings))
    return p.pa * ph + p.pb * ph.conj()


def decoherence_factor(p: SpinBathParams, t):
    """Exact z(t); scalar in, scalar out, array in, array out.

    Baths larger than 64 spins are multiplied in log space (pairwise summation
    of the logs, which fixes the association order) so |z| does not underflow
    to zero before the product is complete.
    """
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(tt.size, dtype=complex)
    chunk = max(1, 2_000_000 // p.n)
    for s in range(0, tt.size, chunk):
        f = _factors(p, tt[s:s + chunk])
        if p.n > LOG_SPACE_ABOVE:
            with np.errstate(divide="ignore"):
                logmod = np.sum(np.log(np.abs(f)), axis=1)
            phase = np.sum(np.angle(f), axis=1)
            out[s:s + chunk] = np.exp(logmod + 1j * phase)
        else:
            out[s:s + chunk] = np.prod(f, axis=1)
    return complex(out[0]) if scalar else out


def modulus_squared(p: SpinBathParams, t):
    """|z(t)|^2 from the closed product of 1 + [(|a|^2-|b|^2)^2 - 1] sin^2(2 g t)."""
    scalar = np.ndim(t) == 0
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    w = (p.pa - p.pb) ** 2 - 1.0
    out = np.empty(tt.size)
    chunk = max(1, 2_000_000 // p.n)
    for s in range(0, tt.size, chunk):
        f = 1.0 + w * np.sin(2 * np.outer(tt[s:s + chunk], p.couplings)) ** 2
        with np.errstate(divide="ignore"):
            out[s:s + chunk] = np.exp(np.sum(np.log(f), axis=1))
    return float(out[0]) if scalar else out


def gaussian_params(p: SpinBathParams) -> tuple[float, float]:
    """Mean phase rate B_n and width s_n of the short-time Gaussian.

    Both are the first two cumulants of the per-spin phase +-2 g_k, i.e. the
    Taylor coefficients of ln z(t): B_n = -sum 2 g_k (|a|^2 - |b|^2) and
    s_n^2 = sum 4 |a|^2 |b|^2 (2 g_k)^2.
    """
    g2 = 2.0 * p.couplings
    b_n = -float(np.sum(g2 * (p.pa - p.pb)))
    s_n = float(np.sqrt(np.sum(4 * p.pa * p.pb * g2**2)))
    return b_n, s_n


def gaussian_factor(p: SpinBathParams, t):
    b_n, s_n = gaussian_params(p)
    t = np.asarray(t, dtype=float)
    out = np.exp(1j * b_n * t - 0.5 * s_n**2 * t**2)
    return complex(out) if out.ndim == 0 else out


def recurrence_order(n: int) -> float:
    """ln(n!), the growth of the recurrence time with bath size."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(gammaln(n + 1))


def reduced_density(p: SpinBathParams, t) -> np.ndarray:
    """System density matrix in the S_z basis at time t."""
    alpha, beta = p.system_amps
    z = decoherence_factor(p, float(t))
    # <eps_-|eps_+> = conj(z)
    return np.array([[abs(alpha) ** 2, alpha * np.conj(beta) * np.conj(z)],
                     [np.conj(alpha) * beta * z, abs(beta) ** 2]], dtype=complex)


def fluctuation_std(p: SpinBathParams, rng: np.random.Generator, n_samples: int = 2000,
                    t_min: float = 1e3, t_max: float = 1e6) -> float:
    """Standard deviation of |z|^2 sampled at random late times."""
    t = rng.uniform(t_min, t_max, size=n_samples)
    return float(np.std(modulus_squared(p, t)))


def weak_bath(n: int, rng: np.random.Generator, strength: float = 1.0, g_max: float = 1.0) -> SpinBathParams:
    """Bath whose summed entanglement weight sum_k 4|a_k|^2|b_k|^2 equals ``strength``.

    Each spin is only slightly tilted, so ln|z|^2 is a sum of n weak
    independent terms and its late-time fluctuations shrink like n^-1/2.
    """
    w = strength / n
    if w > 1:
        raise ValueError("strength must not exceed n")
    pb = 0.5 * (1 - np.sqrt(1 - w))
    phi = rng.uniform(0, 2 * np.pi, size=n)
    amps = np.column_stack([np.full(n, np.sqrt(1 - pb)), np.sqrt(pb) * np.exp(1j * phi)])
    g = g_max * (1.0 - rng.random(n))
    return SpinBathParams(g, amps)
