"""Decoherence of a position superposition by scattered environment particles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import HBAR
from .wavefunction import free_gaussian_amplitude


@dataclass(frozen=True)
class ScatterEnvParams:
    eta: float  # particle number density, m^-3
    v: float  # mean speed, m/s
    sigma_t: float  # total cross section, m^2
    c_geom: float = 1.0
    lambda_env: float = 1e-9  # environment de Broglie wavelength, m

    def __post_init__(self):
        for name in ("eta", "v", "sigma_t", "c_geom", "lambda_env"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


def decoherence_time(p: ScatterEnvParams) -> float:
    return 1.0 / (p.c_geom * p.eta * p.sigma_t * p.v)


def _suppression_exponent(p: ScatterEnvParams, sep, dt):
    # separations below lambda_env decohere quadratically (partial which-path information)
    scale = np.minimum(1.0, (np.asarray(sep, dtype=float) / p.lambda_env) ** 2)
    return -np.asarray(dt, dtype=float) / decoherence_time(p) * scale


def decay_factor(p: ScatterEnvParams, x1, x2, dt):
    if np.any(np.asarray(dt) < 0):
        raise ValueError("dt must be >= 0")
    out = np.exp(_suppression_exponent(p, np.abs(np.asarray(x1) - np.asarray(x2)), dt))
    return float(out) if np.ndim(out) == 0 else out


def product_form_factor(p: ScatterEnvParams, box_side: float, dt: float) -> float:
    """(1 - sigma_T / L^2)^(C eta L^2 v dt) for a finite enclosing box of side L."""
    n_hits = p.c_geom * p.eta * box_side**2 * p.v * dt
    return float(np.exp(n_hits * np.log1p(-p.sigma_t / box_side**2)))


@dataclass(frozen=True)
class PositionDensityMatrix:
    x: np.ndarray
    entries: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        m = np.asarray(self.entries, dtype=complex)
        if m.shape != (x.size, x.size):
            raise ValueError("entries must be an N x N matrix over the grid")
        if np.max(np.abs(m - m.conj().T)) > 1e-10 * max(1.0, np.max(np.abs(m))):
            raise ValueError("position density matrix must be Hermitian")
        if abs(self.trace_of(x, m) - 1) > 1e-8:
            raise ValueError("trace (sum of diagonal times dx) must equal 1")
        x.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "entries", m)

    @staticmethod
    def trace_of(x, m) -> float:
        return float(np.real(np.trace(m)) * (x[1] - x[0]))

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def trace(self) -> float:
        return self.trace_of(self.x, self.entries)

    @classmethod
    def from_wavefunction(cls, x, amps) -> "PositionDensityMatrix":
        return cls(x, np.outer(amps, np.conj(amps)))


def apply_scatter_decoherence(rho: PositionDensityMatrix, p: ScatterEnvParams, dt: float) -> PositionDensityMatrix:
    if dt < 0:
        raise ValueError("dt must be >= 0")
    sep = np.abs(rho.x[:, None] - rho.x[None, :])
    if np.isinf(dt):
        factor = np.where(sep == 0, 1.0, 0.0)
    else:
        factor = np.exp(_suppression_exponent(p, sep, dt))
    return PositionDensityMatrix(rho.x, rho.entries * factor)


def double_slit_grid(packet_sep: float, packet_width: float, mass: float, t: float,
                     hbar: float = HBAR, n: int = 4001) -> np.ndarray:
    width_t = packet_width * np.hypot(1.0, hbar * t / (2 * mass * packet_width**2))
    half = 0.5 * packet_sep + 8 * width_t
    return np.linspace(-half, half, n)


def double_slit_pattern(packet_sep: float, packet_width: float, mass: float, t: float,
                        coherence: float, x=None, hbar: float = HBAR,
                        weights=(0.5, 0.5)) -> tuple[np.ndarray, np.ndarray]:
    """Screen intensity of two freely spreading Gaussian packets.

    The cross terms are scaled by ``coherence``; the profile is normalized with
    the analytic norm so it integrates to one on a grid that covers the packets.
    Returns ``(x, intensity)``.
    """
    if not 0.0 <= coherence <= 1.0:
        raise ValueError("coherence must lie in [0, 1]")
    if x is None:
        x = double_slit_grid(packet_sep, packet_width, mass, t, hbar)
    x = np.asarray(x, dtype=float)
    c1, c2 = np.sqrt(weights[0]), np.sqrt(weights[1])
    g1 = free_gaussian_amplitude(x, -0.5 * packet_sep, packet_width, 0.0, mass, t, hbar)
    g2 = free_gaussian_amplitude(x, 0.5 * packet_sep, packet_width, 0.0, mass, t, hbar)
    cross = 2 * coherence * np.real(c1 * c2 * g1 * np.conj(g2))
    intensity = c1**2 * np.abs(g1) ** 2 + c2**2 * np.abs(g2) ** 2 + cross
    overlap = np.exp(-packet_sep**2 / (8 * packet_width**2))  # <g2|g1>, conserved in time
    norm = c1**2 + c2**2 + 2 * coherence * c1 * c2 * overlap
    return x, intensity / norm


def fringe_visibility(x, intensity, incoherent, window: float) -> float:
    """Largest relative deviation from the incoherent envelope within |x| <= window."""
    sel = np.abs(np.asarray(x)) <= window
    inc = np.asarray(incoherent)[sel]
    return float(np.max(np.abs(np.asarray(intensity)[sel] - inc) / inc))


def fringe_spacing(x, intensity, window: float) -> float:
    """Mean distance between adjacent local maxima within |x| <= window."""
    x = np.asarray(x)
    y = np.asarray(intensity)
    idx = np.where((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]))[0] + 1
    idx = idx[np.abs(x[idx]) <= window]
    if idx.size < 2:
        raise ValueError("fewer than two fringes inside the window")
    # refine each peak with a parabola through its neighbours
    y0, y1, y2 = y[idx - 1], y[idx], y[idx + 1]
    denom = y0 - 2 * y1 + y2
    shift = np.where(denom != 0, 0.5 * (y0 - y2) / denom, 0.0)
    peaks = x[idx] + shift * (x[1] - x[0])
    return float(np.mean(np.diff(peaks)))


def two_source_spacing(packet_sep: float, mass: float, t: float, hbar: float = HBAR) -> float:
    """Far-field fringe spacing h t / (m d)."""
    return 2 * np.pi * hbar * t / (mass * packet_sep)
