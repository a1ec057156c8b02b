"""Guiding-equation velocity fields and Bohmian trajectory ensembles on a periodic grid."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import HBAR
from .wavefunction import FreePropagator, Wavefunction1D

DENSITY_FLOOR = 1e-12  # relative to max |psi|^2


class NodeError(ValueError):
    """Velocity requested where the density is below the floor."""


def grid_derivative(amps: np.ndarray, dx: float, axis: int = -1) -> np.ndarray:
    """Fourth-order centred difference with periodic wrap."""
    f = np.asarray(amps)
    r = lambda s: np.roll(f, -s, axis=axis)  # noqa: E731  r(s)[i] = f[i + s]
    return (-r(2) + 8 * r(1) - 8 * r(-1) + r(-2)) / (12 * dx)


def velocity_field(psi: Wavefunction1D, mass: float, hbar: float = HBAR) -> np.ndarray:
    """(hbar / m) Im(psi* dpsi/dx) / |psi|^2 at every grid point; NaN below the density floor."""
    a = psi.amps
    rho = np.abs(a) ** 2
    dpsi = grid_derivative(a, psi.dx)
    ok = rho > DENSITY_FLOOR * rho.max()
    out = np.full(a.shape, np.nan)
    out[ok] = hbar / mass * np.imag(np.conj(a[ok]) * dpsi[ok]) / rho[ok]
    return out


def probability_current(psi: Wavefunction1D, mass: float, hbar: float = HBAR) -> np.ndarray:
    """J = (hbar / 2 m i)(psi* psi' - psi psi'*)."""
    a = psi.amps
    d = grid_derivative(a, psi.dx)
    return np.real((hbar / (2j * mass)) * (np.conj(a) * d - a * np.conj(d)))


def _interp_periodic(field: np.ndarray, x0: float, dx: float, q: np.ndarray) -> np.ndarray:
    n = field.size
    s = (np.asarray(q) - x0) / dx
    i = np.floor(s).astype(int)
    f = s - i
    return (1 - f) * field[i % n] + f * field[(i + 1) % n]


def bohm_velocity(psi: Wavefunction1D, x, mass: float, hbar: float = HBAR) -> np.ndarray | float:
    """Guiding velocity at arbitrary positions by linear interpolation of the grid field."""
    v = _interp_periodic(velocity_field(psi, mass, hbar), psi.x[0], psi.dx, x)
    if np.any(np.isnan(v)):
        raise NodeError("position lies in a node region below the density floor")
    return float(v) if np.ndim(v) == 0 else v


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.positions):
            raise ValueError("times and positions must have equal lengths")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")


@dataclass
class Ensemble:
    times: np.ndarray
    positions: np.ndarray  # (n_times, n_traj); NaN after a trajectory is excluded
    excluded: int

    def trajectories(self) -> list[Trajectory]:
        ok = ~np.any(np.isnan(self.positions), axis=0)
        return [Trajectory(self.times, self.positions[:, j]) for j in np.flatnonzero(ok)]


def sample_born(psi: Wavefunction1D, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws from the piecewise-linear interpolant of |psi|^2."""
    rho = psi.density
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]))])
    cdf /= cdf[-1]
    return np.interp(rng.random(n), cdf, psi.x)


def evolve_trajectories(psi0: Wavefunction1D, mass: float, T: float, dt: float, n_traj: int,
                        rng: np.random.Generator, hbar: float = HBAR, record_every: int = 1) -> Ensemble:
    """Free evolution of psi with an RK4 step for the positions.

    The wavefunction is propagated exactly to t, t + dt/2 and t + dt, and the
    stage velocities use the field at the matching time.  Trajectories that
    land in a node region are dropped and counted.
    """
    if dt <= 0 or T <= 0:
        raise ValueError("T and dt must be positive")
    prop = FreePropagator(psi0.x, mass, hbar)
    spec0 = np.fft.fft(psi0.amps)
    n_steps = int(round(T / dt))
    x0, dx = psi0.x[0], psi0.dx

    def field(t):
        return velocity_field(psi0.with_amps(np.fft.ifft(spec0 * prop.phase(t))), mass, hbar)

    def vel(f, q):
        return _interp_periodic(f, x0, dx, q)

    q = sample_born(psi0, n_traj, rng)
    rec = [q.copy()]
    times = [0.0]
    f_now = field(0.0)
    for k in range(n_steps):
        t = k * dt
        f_mid = field(t + 0.5 * dt)
        f_end = field(t + dt)
        k1 = vel(f_now, q)
        k2 = vel(f_mid, q + 0.5 * dt * k1)
        k3 = vel(f_mid, q + 0.5 * dt * k2)
        k4 = vel(f_end, q + dt * k3)
        q = q + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)  # NaN propagates for node hits
        f_now = f_end
        if (k + 1) % record_every == 0:
            rec.append(q.copy())
            times.append(t + dt)
    pos = np.array(rec)
    bad = np.any(np.isnan(pos), axis=0)
    pos[:, bad] = np.nan
    return Ensemble(np.array(times), pos, int(bad.sum()))


def ordering_preserved(positions: np.ndarray) -> bool:
    """True when no two trajectories swap order between consecutive outputs."""
    p = positions[:, ~np.any(np.isnan(positions), axis=0)]
    order = np.argsort(p[0], kind="stable")
    return bool(np.all(np.diff(p[:, order], axis=1) >= 0))


def two_particle_velocity(amps: np.ndarray, x: np.ndarray, mass: float, q1: float, q2: float,
                          hbar: float = HBAR) -> tuple[float, float]:
    """Guiding velocities of both particles for a wavefunction Psi(x1, x2) on a square grid.

    Each particle's velocity is read off at the joint configuration (q1, q2),
    so for an entangled Psi the first depends on where the second is.
    """
    dx = float(x[1] - x[0])
    i = int(np.argmin(np.abs(x - q1)))
    j = int(np.argmin(np.abs(x - q2)))
    a = np.asarray(amps)
    rho = abs(a[i, j]) ** 2
    if rho <= DENSITY_FLOOR * np.max(np.abs(a) ** 2):
        raise NodeError("configuration lies in a node region")
    d1 = grid_derivative(a, dx, axis=0)[i, j]
    d2 = grid_derivative(a, dx, axis=1)[i, j]
    return (hbar / mass * float(np.imag(np.conj(a[i, j]) * d1)) / rho,
            hbar / mass * float(np.imag(np.conj(a[i, j]) * d2)) / rho)
