"""Objective-collapse models.

GRW localization hits and trajectories, the gravitational density norm and
superposition lifetime built on a smeared-ball kernel, the fluctuating
anti-Hermitian step of the plate model, and the double-well tunnelling ratio.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .constants import G_NEWTON, HBAR
from .parallel import seeded_map
from .wavefunction import FreePropagator, Wavefunction1D

GRW_DEFAULT_D = 1e-7  # m
GRW_DEFAULT_LAMBDA = 1e-16  # 1/s per particle


class CollapseUnderflowError(ArithmeticError):
    """A localization hit landed where the wavefunction has no weight."""


# --- GRW -------------------------------------------------------------------

@dataclass(frozen=True)
class GRWParams:
    d: float = GRW_DEFAULT_D
    lam: float = GRW_DEFAULT_LAMBDA
    n_particles: int = 1

    def __post_init__(self):
        if not self.d > 0:
            raise ValueError("d must be positive")
        if not self.lam >= 0:
            raise ValueError("lam must be non-negative")
        if int(self.n_particles) < 1:
            raise ValueError("n_particles must be >= 1")

    @property
    def total_rate(self) -> float:
        return self.n_particles * self.lam


@dataclass(frozen=True)
class CollapseEvent:
    t: float
    center: float
    branch_weight_before: float  # probability within 3d of the centre, before the hit

    def __post_init__(self):
        if not -1e-12 <= self.branch_weight_before <= 1 + 1e-12:
            raise ValueError("branch weight must lie in [0, 1]")


def _localizer(x, center: float, d: float) -> np.ndarray:
    return np.exp(-((np.asarray(x) - center) ** 2) / (2 * d**2))


def grw_hit(psi: Wavefunction1D, center: float, d: float) -> Wavefunction1D:
    if not psi.x[0] <= center <= psi.x[-1]:
        raise ValueError("hit centre lies outside the grid")
    out = psi.amps * _localizer(psi.x, center, d)
    n2 = float(np.sum(np.abs(out) ** 2) * psi.dx)
    if not (n2 > 1e-300 and np.isfinite(n2)):
        raise CollapseUnderflowError(f"collapsed norm {n2:.3g} underflows; hit at {center:g} has no support")
    return psi.with_amps(out / np.sqrt(n2))


def grw_hit_nd(amps: np.ndarray, grids: list, axis: int, center: float, d: float) -> np.ndarray:
    """Hit one particle's coordinate in a many-particle grid wavefunction."""
    amps = np.asarray(amps, dtype=complex)
    if amps.ndim != len(grids):
        raise ValueError("one grid per axis is required")
    shape = [1] * amps.ndim
    shape[axis] = -1
    out = amps * _localizer(grids[axis], center, d).reshape(shape)
    dv = float(np.prod([g[1] - g[0] for g in grids]))
    n2 = float(np.sum(np.abs(out) ** 2) * dv)
    if not n2 > 1e-300:
        raise CollapseUnderflowError("collapsed norm underflows")
    return out / np.sqrt(n2)


def grw_center_density(psi: Wavefunction1D, d: float, centers) -> np.ndarray:
    """P(X) = (1 / (sqrt(pi) d)) sum_x |psi(x)|^2 exp(-(x - X)^2 / d^2) dx, normalized over X."""
    centers = np.asarray(centers, dtype=float)
    rho = psi.density / psi.norm2()
    out = np.empty(centers.size)
    chunk = max(1, 4_000_000 // psi.x.size)
    for s in range(0, centers.size, chunk):
        c = centers[s:s + chunk, None]
        out[s:s + chunk] = np.exp(-((psi.x[None, :] - c) ** 2) / d**2) @ rho
    return out * psi.dx / (np.sqrt(np.pi) * d)


def grw_sample_center(psi: Wavefunction1D, d: float, rng: np.random.Generator) -> float:
    # P(X) is |psi|^2 convolved with a normal of variance d^2/2: draw x, then blur
    p = psi.density / np.sum(psi.density)
    x = psi.x[rng.choice(psi.x.size, p=p)]
    return float(np.clip(x + rng.normal(0.0, d / np.sqrt(2)), psi.x[0], psi.x[-1]))


def _weight_near(psi: Wavefunction1D, center: float, radius: float) -> float:
    sel = np.abs(psi.x - center) <= radius
    return float(np.sum(psi.density[sel]) / np.sum(psi.density))


@dataclass
class GRWRun:
    psi: Wavefunction1D
    events: list[CollapseEvent] = field(default_factory=list)
    t_end: float = 0.0


def grw_trajectory(psi0: Wavefunction1D, p: GRWParams, mass: float | None, T: float, dt: float,
                   rng: np.random.Generator, hbar: float = HBAR, max_events: int | None = None) -> GRWRun:
    """Free evolution interleaved with hits at Poisson times of rate n * lam.

    Hit times are drawn exactly, and the spectral propagator is exact for any
    interval, so ``dt`` only enters the hit-resolution warning.
    ``mass=None`` switches the kinetic term off.  A run stops at ``T`` or after
    ``max_events`` hits.
    """
    if dt <= 0 or T < 0:
        raise ValueError("need dt > 0 and T >= 0")
    rate = p.total_rate
    if rate * dt > 1:
        warnings.warn("dt exceeds the mean time between hits", RuntimeWarning)
    prop = None if mass is None else FreePropagator(psi0.x, mass, hbar)
    amps = psi0.normalized().amps
    t = 0.0
    events: list[CollapseEvent] = []
    while max_events is None or len(events) < max_events:
        wait = rng.exponential(1.0 / rate) if rate > 0 else np.inf
        if t + wait > T:
            if prop is not None:
                amps = prop.apply(amps, T - t)
            t = T
            break
        if prop is not None:
            amps = prop.apply(amps, wait)
        t += wait
        psi = psi0.with_amps(amps)
        center = grw_sample_center(psi, p.d, rng)
        events.append(CollapseEvent(t, center, _weight_near(psi, center, 3 * p.d)))
        amps = grw_hit(psi, center, p.d).amps
    return GRWRun(psi0.with_amps(amps), events, t)


def grw_ensemble(psi0: Wavefunction1D, p: GRWParams, mass: float | None, T: float, dt: float,
                 n_runs: int, seed: int, **kw) -> list[GRWRun]:
    return seeded_map(lambda i, rng: grw_trajectory(psi0, p, mass, T, dt, rng, **kw), seed, n_runs)


# --- gravitational self-energy ---------------------------------------------

@dataclass(frozen=True)
class MassDensity:
    """Point masses, each smeared over a uniform ball of radius r0 (r0 = 0: bare points)."""

    points: np.ndarray
    weights: np.ndarray
    r0: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if pts.shape[0] != w.size:
            raise ValueError("one weight per point")
        if not self.r0 >= 0:
            raise ValueError("r0 must be non-negative")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def shifted(self, offset) -> "MassDensity":
        return MassDensity(self.points + np.asarray(offset, dtype=float), self.weights, self.r0)

    def scaled(self, c: float) -> "MassDensity":
        return MassDensity(self.points, c * self.weights, self.r0)

    def with_r0(self, r0: float) -> "MassDensity":
        return MassDensity(self.points, self.weights, r0)

    def minus(self, other: "MassDensity") -> "MassDensity":
        if self.r0 != other.r0:
            raise ValueError("densities must share the smearing radius")
        return MassDensity(np.vstack([self.points, other.points]),
                           np.concatenate([self.weights, -other.weights]), self.r0)


def ball_kernel(dist, r0: float) -> np.ndarray:
    """Mutual 1/r integral of two unit-mass uniform balls of radius r0 at centre distance dist."""
    dist = np.asarray(dist, dtype=float)
    if r0 == 0:
        with np.errstate(divide="ignore"):
            return 1.0 / dist
    x = np.minimum(dist / r0, 2.0)
    inner = (1.2 - x**2 / 2 + 3 * x**3 / 16 - x**5 / 160) / r0
    with np.errstate(divide="ignore"):
        return np.where(x < 2, inner, 1.0 / dist)


def _pair_sum(f: MassDensity) -> float:
    pts, w, n = f.points, f.weights, f.weights.size
    if f.r0 == 0:
        total = 0.0
    else:
        total = float(np.sum(w**2)) * 1.2 / f.r0
    chunk = max(1, 2_000_000 // max(n, 1))
    for s in range(0, n, chunk):
        d = np.linalg.norm(pts[s:s + chunk, None, :] - pts[None, :, :], axis=-1)
        rows = np.arange(s, min(s + chunk, n))
        d[rows - s, rows] = np.inf  # diagonal handled above
        if f.r0 == 0 and np.any(d == 0):
            raise ValueError("coincident points need a smearing radius r0 > 0")
        k = ball_kernel(d, f.r0) if f.r0 > 0 else 1.0 / d
        k[rows - s, rows] = 0.0
        total += float(w[s:s + chunk] @ k @ w)
    return total


def diosi_norm(f: MassDensity, n_pairs: int | None = None, rng: np.random.Generator | None = None,
               g_newton: float = G_NEWTON) -> float:
    """G sum_ij w_i w_j k(|r_i - r_j|) with the ball kernel k.

    Exact O(N^2) sum by default.  With ``n_pairs`` the off-diagonal part is a
    Monte-Carlo estimate from that many uniformly drawn ordered pairs i != j.
    """
    n = f.weights.size
    if n == 0 or not np.any(f.weights):
        return 0.0
    if n_pairs is None:
        return g_newton * _pair_sum(f)
    if rng is None:
        raise ValueError("Monte-Carlo evaluation needs an rng")
    i = rng.integers(0, n, size=n_pairs)
    j = (i + rng.integers(1, n, size=n_pairs)) % n  # uniform over j != i
    d = np.linalg.norm(f.points[i] - f.points[j], axis=1)
    if f.r0 == 0 and np.any(d == 0):
        raise ValueError("coincident points need a smearing radius r0 > 0")
    off = n * (n - 1) * float(np.mean(f.weights[i] * f.weights[j] * ball_kernel(d, f.r0)))
    self_term = float(np.sum(f.weights**2)) * 1.2 / f.r0 if f.r0 > 0 else 0.0
    return g_newton * (off + self_term)


def penrose_lifetime(rho1: MassDensity, rho2: MassDensity, hbar: float = HBAR,
                     g_newton: float = G_NEWTON) -> dict:
    """Delta E = 4 pi G |double integral of (rho1 - rho2)(rho1 - rho2) / r|, tau = hbar / Delta E."""
    delta_e = 4 * np.pi * abs(diosi_norm(rho1.minus(rho2), g_newton=g_newton))
    tau = np.inf if delta_e == 0 else hbar / delta_e
    return {"delta_e": delta_e, "tau": tau, "r0": rho1.r0}


def penrose_r0_sensitivity(rho1: MassDensity, rho2: MassDensity, factors=(0.5, 1.0, 2.0),
                           hbar: float = HBAR) -> list[dict]:
    return [dict(penrose_lifetime(rho1.with_r0(rho1.r0 * c), rho2.with_r0(rho2.r0 * c), hbar), r0_factor=c)
            for c in factors]


def lattice_sphere(radius: float, density: float, spacing: float, center=(0.0, 0.0, 0.0)) -> MassDensity:
    """Cubic lattice points inside a sphere; weights share the exact sphere mass, r0 = spacing."""
    m = int(np.ceil(radius / spacing))
    ax = spacing * np.arange(-m, m + 1)
    g = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)
    g = g[np.sum(g**2, axis=1) <= radius**2]
    mass = density * 4.0 / 3.0 * np.pi * radius**3
    return MassDensity(g + np.asarray(center), np.full(len(g), mass / len(g)), spacing)


def uniform_ball_samples(radius: float, mass: float, n: int, rng: np.random.Generator, r0: float) -> MassDensity:
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1 / 3)
    return MassDensity(v * r[:, None], np.full(n, mass / n), r0)


# --- fluctuating anti-Hermitian dynamics -------------------------------------

def van_wezel_kappa(mass: float, L: float, hbar: float = HBAR, g_newton: float = G_NEWTON) -> float:
    """Damping strength G m^2 / (2 L^3 hbar) multiplying (x - xi)^2."""
    return g_newton * mass**2 / (2 * L**3 * hbar)


def _damping(x, xi, h, kappa):
    """exp(-h kappa (x - xi)^2); an array of xi gives one row per value."""
    out = np.exp(-h * kappa * (np.asarray(x)[None, :] - np.atleast_1d(xi)[:, None]) ** 2)
    return out[0] if np.ndim(xi) == 0 else out


def van_wezel_step(psi: Wavefunction1D, mass: float, L: float, xi: float, dt: float,
                   hbar: float = HBAR, kinetic: bool = True, gravity: bool = True,
                   renormalize: bool = False, g_newton: float = G_NEWTON) -> Wavefunction1D:
    """One Strang step of d psi/dt = -(i/hbar) H psi - kappa (x - xi)^2 psi, with H the free Hamiltonian."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    amps = np.asarray(psi.amps, dtype=complex)
    half = _damping(psi.x, xi, 0.5 * dt, van_wezel_kappa(mass, L, hbar, g_newton)) if gravity else None
    if half is not None:
        amps = amps * half
    if kinetic:
        amps = FreePropagator(psi.x, mass, hbar).apply(amps, dt)
    if half is not None:
        amps = amps * half
    out = psi.with_amps(amps)
    return out.normalized() if renormalize else out


def van_wezel_two_site_coherence(mass: float, L: float, separation: float, dt: float, n_steps: int,
                                 n_members: int, rng: np.random.Generator, hbar: float = HBAR,
                                 g_newton: float = G_NEWTON) -> tuple[np.ndarray, np.ndarray]:
    """Ensemble mean of the normalized off-diagonal element 2 rho_12 for sites at +-separation/2.

    xi is redrawn each step, uniform on [-L/2, L/2].  Returns (times, coherence).
    """
    x = np.array([-0.5 * separation, 0.5 * separation])
    kappa = van_wezel_kappa(mass, L, hbar, g_newton)
    amps = np.full((n_members, 2), 2**-0.5, dtype=complex)  # site amplitudes, sum |c|^2 = 1
    out = np.empty(n_steps + 1)
    out[0] = 1.0
    for k in range(1, n_steps + 1):
        xi = rng.uniform(-0.5 * L, 0.5 * L, size=n_members)
        amps = amps * _damping(x, xi, dt, kappa)  # the two half steps of one Strang step
        amps /= np.linalg.norm(amps, axis=1, keepdims=True)
        out[k] = np.mean(2 * np.real(amps[:, 0] * np.conj(amps[:, 1])))
    return dt * np.arange(n_steps + 1), out


def van_wezel_coherence_rate(mass: float, L: float, separation: float, dt: float, hbar: float = HBAR,
                             g_newton: float = G_NEWTON) -> float:
    """Leading decay rate of the ensemble coherence for uniform xi redrawn every dt.

    ln(|c1|/|c2|) performs a random walk with step variance (2 kappa dt dx)^2 L^2 / 12,
    and the ensemble coherence <1/cosh> falls off at half that variance per unit time.
    """
    k = van_wezel_kappa(mass, L, hbar, g_newton)
    return k**2 * dt * separation**2 * L**2 / 6


# --- double well ---------------------------------------------------------------

def double_well_ratio(potential, x, mass: float, a1: float, a2: float, hbar: float = HBAR) -> float:
    """exp(-(1/hbar) int_a1^a2 sqrt(2 m V(x)) dx) on the tabulated profile."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(potential, dtype=float)
    if not (x[0] <= a1 < a2 <= x[-1]):
        raise ValueError("need x[0] <= a1 < a2 <= x[-1]")
    inside = (x > a1) & (x < a2)
    xs = np.concatenate([[a1], x[inside], [a2]])
    vs = np.concatenate([[np.interp(a1, x, v)], v[inside], [np.interp(a2, x, v)]])
    if np.any(vs < 0):
        raise ValueError("potential is negative inside the integration window")
    return float(np.exp(-trapezoid(np.sqrt(2 * mass * vs), xs) / hbar))
