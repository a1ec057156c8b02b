"""Uniform-grid 1-D wavefunctions and exact free-particle propagation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import HBAR


@dataclass(frozen=True)
class Wavefunction1D:
    """Complex amplitudes on a uniform grid, normalized so sum |psi|^2 dx = 1."""

    x: np.ndarray
    amps: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        amps = np.asarray(self.amps, dtype=complex)
        if x.ndim != 1 or x.shape != amps.shape:
            raise ValueError("grid and amplitudes must be 1-D arrays of equal length")
        if x.size < 2 or np.any(np.diff(x) <= 0):
            raise ValueError("grid must be strictly increasing")
        d = np.diff(x)
        if np.max(np.abs(d - d[0])) > 1e-9 * abs(d[0]):
            raise ValueError("grid must be uniform")
        x.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "amps", amps)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def norm2(self) -> float:
        return float(np.sum(self.density) * self.dx)

    def normalized(self) -> "Wavefunction1D":
        n = self.norm2()
        if not n > 0:
            raise ValueError("cannot normalize a zero wavefunction")
        return Wavefunction1D(self.x, self.amps / np.sqrt(n))

    def mean_x(self) -> float:
        return float(np.sum(self.x * self.density) * self.dx / self.norm2())

    def with_amps(self, amps) -> "Wavefunction1D":
        return Wavefunction1D(self.x, amps)


def gaussian_packet(x, x0: float, sigma: float, k0: float = 0.0) -> Wavefunction1D:
    """Normalized Gaussian with position spread ``sigma`` (std of |psi|^2)."""
    x = np.asarray(x, dtype=float)
    amps = (2 * np.pi * sigma**2) ** -0.25 * np.exp(-((x - x0) ** 2) / (4 * sigma**2) + 1j * k0 * x)
    return Wavefunction1D(x, amps).normalized()


def free_gaussian_amplitude(x, x0: float, sigma: float, k0: float, mass: float, t: float,
                            hbar: float = HBAR) -> np.ndarray:
    """Closed-form free evolution of a Gaussian packet (continuum, no grid)."""
    x = np.asarray(x, dtype=float)
    tau = hbar * t / (2 * mass * sigma**2)
    st = sigma * (1 + 1j * tau)
    v0 = hbar * k0 / mass
    xc = x - x0 - v0 * t
    pref = (2 * np.pi * sigma**2) ** -0.25 * np.sqrt(sigma / st)
    phase = 1j * k0 * (x - x0) - 1j * 0.5 * k0 * v0 * t + 1j * k0 * x0
    return pref * np.exp(-xc**2 / (4 * sigma * st) + phase)


def free_gaussian_width(sigma: float, mass: float, t: float, hbar: float = HBAR) -> float:
    tau = hbar * t / (2 * mass * sigma**2)
    return float(sigma * np.sqrt(1 + tau**2))


class FreePropagator:
    """Spectral (FFT) free-particle propagator on a periodic grid.

    Exact for band-limited periodic states, so steps of any length are allowed.
    """

    def __init__(self, x, mass: float, hbar: float = HBAR):
        x = np.asarray(x, dtype=float)
        self.n = x.size
        self.dx = float(x[1] - x[0])
        self.k = 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)
        self.mass = mass
        self.hbar = hbar

    def phase(self, t: float) -> np.ndarray:
        return np.exp(-1j * self.hbar * self.k**2 * t / (2 * self.mass))

    def apply(self, amps: np.ndarray, t: float) -> np.ndarray:
        if t == 0:
            return np.asarray(amps, dtype=complex)
        return np.fft.ifft(np.fft.fft(amps) * self.phase(t))

    def evolve(self, psi: Wavefunction1D, t: float) -> Wavefunction1D:
        return psi.with_amps(self.apply(psi.amps, t))
