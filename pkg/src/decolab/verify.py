"""Acceptance criteria as runnable checks.

Each criterion returns a :class:`Criterion` carrying the observed value, the
target, the tolerance and the wall time against its budget.  A criterion
passes only when every sub-check holds and it finishes within budget.
"""
from __future__ import annotations

import os
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import stats
from scipy.integrate import trapezoid

from .collapse import (GRWParams, grw_center_density, grw_hit_nd, grw_sample_center, grw_trajectory,
                       uniform_ball_samples, diosi_norm, penrose_r0_sensitivity, van_wezel_coherence_rate,
                       van_wezel_step, van_wezel_two_site_coherence, van_wezel_kappa)
from .constants import G_NEWTON, HBAR
from .envariance import SchmidtPair, born_from_counting, equal_prob_chain
from .nogo import impure_variant, random_calibrated_scheme, random_density, random_shape, sweep
from .oscdec import (BathODEState, PendulumParams, decoherence_exponent, decoherence_ratio, fit_decay_rate,
                     flat_band_bath, integrate_bath, weisskopf_wigner_invariant)
from .pilotwave import bohm_velocity, evolve_trajectories, ordering_preserved
from .presets import get_preset
from .qcore import Operator, StateVector, expectation, mixture_density, pure_density, spin_ops
from .scatterdec import ScatterEnvParams, decay_factor, decoherence_time, product_form_factor
from .spinbath import (SpinBathParams, bloch_amplitudes, decoherence_factor, fluctuation_std, gaussian_params,
                       modulus_squared, random_bath, uniform_bath, weak_bath)
from .wavefunction import Wavefunction1D, free_gaussian_amplitude, free_gaussian_width, gaussian_packet

SEED = 20240601


@dataclass(frozen=True)
class Criterion:
    id: int
    name: str
    observed: str
    expected: str
    tolerance: str
    checks_ok: bool
    seconds: float
    limit: float

    @property
    def passed(self) -> bool:
        return self.checks_ok and self.seconds <= self.limit

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.id:02d} {self.name}: observed {self.observed}; expected {self.expected}; "
                f"tol {self.tolerance}; {self.seconds:.2f}s/{self.limit:g}s")


class _Checks:
    """Collects named sub-checks and their observed values."""

    def __init__(self):
        self.parts: list[str] = []
        self.ok = True

    def add(self, label: str, value, ok: bool) -> None:
        self.parts.append(f"{label}={value:.4g}" if isinstance(value, float) else f"{label}={value}")
        self.ok &= bool(ok)

    @property
    def observed(self) -> str:
        return ", ".join(self.parts)


# --- 1 --------------------------------------------------------------------------

def c01_expectations(c: _Checks) -> tuple[str, str]:
    sx = Operator(spin_ops(HBAR)["x"])
    mix = expectation(sx, mixture_density([0.5, 0.5])) / HBAR
    pure = expectation(sx, pure_density(StateVector([2**-0.5, 2**-0.5]))) / HBAR
    c.add("<Sx>_mix/hbar", float(np.real(mix)), abs(mix) <= 1e-12)
    c.add("<Sx>_pure/hbar", float(np.real(pure)), abs(pure - 0.5) <= 1e-12)
    return "0 and 1/2 (hbar units)", "1e-12"


# --- 2, 3 -------------------------------------------------------------------------

def c02_spinbath(c: _Checks) -> tuple[str, str]:
    rng = np.random.default_rng(SEED)
    z1 = abs(decoherence_factor(random_bath(1000, rng), 1.0)) ** 2
    c.add("|z(1)|^2", z1, z1 < 1e-3)
    g = 0.7
    ub = uniform_bath(20, g, 0.8, 0.6j)
    t = rng.uniform(0, 10, 200)
    dev = float(np.max(np.abs(modulus_squared(ub, t + np.pi / g) - modulus_squared(ub, t))))
    c.add("period dev", dev, dev <= 1e-10)
    ratio = fluctuation_std(weak_bath(100, rng), rng) / fluctuation_std(weak_bath(10_000, rng), rng)
    c.add("std ratio n=1e2/1e4", ratio, 10 / 3 <= ratio <= 30)
    return "|z|^2<1e-3, period pi/g, std ratio 10", "ratio within x3"


def c03_gaussian(c: _Checks) -> tuple[str, str]:
    rng = np.random.default_rng(SEED + 3)
    g = 1.0 + 0.1 * (rng.random(500) - 0.5)
    bath = SpinBathParams(g, bloch_amplitudes(500, rng))
    _, s_n = gaussian_params(bath)
    t = np.linspace(0, 1 / s_n, 201)
    exact = np.abs(decoherence_factor(bath, t))
    err = float(np.max(np.abs(np.exp(-0.5 * s_n**2 * t**2) - exact) / exact))
    c.add("max rel err", err, err < 0.05)
    return "Gaussian envelope for t <= 1/s_n", "5%"


# --- 4, 5, 6 ------------------------------------------------------------------------

def c04_scatter(c: _Checks) -> tuple[str, str]:
    env = ScatterEnvParams(1e20, 500.0, 1e-18, 1.3, 1e-9)
    tau = decoherence_time(env)
    c.add("tau formula dev", abs(tau * env.c_geom * env.eta * env.sigma_t * env.v - 1),
          abs(tau * env.c_geom * env.eta * env.sigma_t * env.v - 1) <= 1e-15)
    worst = 0.0
    for factor in (1e6, 1e7, 1e8, 1e9):
        box = np.sqrt(factor * env.sigma_t)
        exp_form = decay_factor(env, 0.0, 1e-6, tau)
        worst = max(worst, abs(product_form_factor(env, box, tau) / exp_form - 1))
    c.add("max rel diff", worst, worst < 1e-6)
    return "product form = exp(-t/tau_d) at t = tau_d", "1e-6"


def c05_pendulum(c: _Checks) -> tuple[str, str]:
    pr = get_preset("omnes-1g", "pendulum").params
    p = PendulumParams(pr["mass"], pr["omega"], pr["gamma"], 0.0, pr["dx"])
    k = decoherence_ratio(p)["K"]
    c.add("K", k, 1e19 <= k <= 1e21)
    t = np.linspace(0, 0.01 / p.gamma, 101)[1:]
    rel = float(np.max(np.abs(decoherence_exponent(p, t) / (2 * k * p.gamma * t) - 1)))
    c.add("short-time dev", rel, rel <= 0.01)
    return "K in [1e19, 1e21]", "1% on ln|factor|"


def c06_weisskopf(c: _Checks) -> tuple[str, str]:
    rng = np.random.default_rng(SEED + 6)
    n = 5
    omegas = 1.0 + rng.uniform(-0.5, 0.5, n)
    lam = 0.02 * (rng.normal(size=n) + 1j * rng.normal(size=n))
    s1 = BathODEState(1.0, np.zeros(n), 1.0, omegas, lam)
    s2 = BathODEState(0.3 - 0.4j, rng.normal(size=n) + 1j * rng.normal(size=n), 1.0, omegas, lam)
    tr1, tr2 = integrate_bath([s1, s2], 200.0, 0.01, record_every=100)
    inv = weisskopf_wigner_invariant(tr1, tr2)
    d5 = float(np.max(np.abs(inv - inv[0])))
    c.add("drift N=5", d5, d5 < 1e-8)
    gamma = 0.02
    b1 = flat_band_bath(200, 1.0, 0.5, gamma)
    b2 = BathODEState(0.5j, 0.1 * rng.normal(size=200), 1.0, b1.omegas, b1.lambdas)
    f1, f2 = integrate_bath([b1, b2], 3 / gamma, 0.01, record_every=50)
    inv = weisskopf_wigner_invariant(f1, f2)
    d200 = float(np.max(np.abs(inv - inv[0])))
    c.add("drift N=200", d200, d200 < 1e-8)
    fit = fit_decay_rate(f1.times, f1.alphas, 3 / gamma)
    c.add("fit/gamma", fit / gamma, abs(fit / gamma - 1) <= 0.2)
    return "invariant constant; envelope exp(-gamma t)", "1e-8; 20%"


# --- 7 -----------------------------------------------------------------------------

def _grw_norm(c: _Checks, d: float) -> None:
    x = np.linspace(-5, 5, 2001)
    psi = Wavefunction1D(x, np.exp(-(x + 1.5) ** 2) + 0.6 * np.exp(-((x - 2) ** 2) / 0.5))
    centers = np.arange(x[0] - 8 * d, x[-1] + 8 * d, psi.dx)
    total = float(trapezoid(grw_center_density(psi, d, centers), centers))
    c.add("int P(X)dX - 1", abs(total - 1), abs(total - 1) <= 1e-6)


def _grw_frequencies(c: _Checks, d: float) -> None:
    x = np.linspace(-4, 4, 1601)
    w = 0.64
    left, right = gaussian_packet(x, -2.0, 0.1), gaussian_packet(x, 2.0, 0.1)
    psi = left.with_amps(np.sqrt(w) * left.amps + np.sqrt(1 - w) * right.amps)
    n = 10_000
    rng = np.random.default_rng(SEED + 7)
    hits = sum(grw_sample_center(psi, d, rng) < 0 for _ in range(n))
    sigma = np.sqrt(w * (1 - w) / n)
    c.add("left freq", hits / n, abs(hits / n - w) <= 3 * sigma)


def _grw_free_limit(c: _Checks) -> None:
    x = np.linspace(-60, 80, 4096, endpoint=False)
    psi0 = gaussian_packet(x, 0.0, 1.0, 1.0)
    run = grw_trajectory(psi0, GRWParams(0.5, 0.0, 1), 1.0, 5.0, 0.5, np.random.default_rng(0), hbar=1.0)
    exact = free_gaussian_amplitude(x, 0.0, 1.0, 1.0, 1.0, 5.0, 1.0)
    dev = float(np.max(np.abs(run.psi.amps - exact)) / np.max(np.abs(exact)))
    c.add("lambda=0 dev", dev, dev <= 1e-6 and not run.events)


def _grw_rigid(c: _Checks) -> None:
    x = np.linspace(-4, 4, 40)
    gl = np.exp(-((x + 2) ** 2) / (2 * 0.3**2))
    gr = np.exp(-((x - 2) ** 2) / (2 * 0.3**2))
    amps = np.einsum("i,j,k->ijk", gl, gl, gl) + np.einsum("i,j,k->ijk", gr, gr, gr)
    hit = grw_hit_nd(amps, [x, x, x], 0, -2.0, 0.5)
    rho = np.abs(hit) ** 2
    rho /= rho.sum()
    right_1 = float(rho[:, x > 0, :].sum())  # other constituents, never hit directly
    right_2 = float(rho[:, :, x > 0].sum())
    c.add("other-branch weight", max(right_1, right_2), max(right_1, right_2) < 1e-6)


def c07_grw(c: _Checks) -> tuple[str, str]:
    d = 0.3
    _grw_norm(c, d)
    _grw_frequencies(c, d)
    _grw_free_limit(c)
    _grw_rigid(c)
    return "norm 1, freq 0.64, free packet, global localization", "1e-6; 3 sigma; 1e-6; 1e-6"


# --- 8, 9, 10 ------------------------------------------------------------------------

def c08_diosi(c: _Checks) -> tuple[str, str]:
    rng = np.random.default_rng(SEED + 8)
    f = uniform_ball_samples(1.0, 1.0, 20_000, rng, 0.01)
    ratio = diosi_norm(f, n_pairs=100_000, rng=rng) / (1.2 * G_NEWTON)
    c.add("norm / (6/5 G m^2/R)", ratio, abs(ratio - 1) <= 0.02)
    return "1", "2%"


def c09_penrose(c: _Checks) -> tuple[str, str]:
    from .cli import penrose_pair  # shares the preset construction with the runner

    for name, target in (("droplet-10um", 1e-6), ("proton", 1e14)):
        rows = penrose_r0_sensitivity(*penrose_pair(name))
        tau = rows[1]["tau"]
        spread = max(r["tau"] for r in rows) / min(r["tau"] for r in rows)
        c.add(f"tau[{name}]", tau, abs(np.log10(tau / target)) <= 2)
        c.add(f"r0 spread[{name}]", spread, np.isfinite(spread))
    return "1e-6 s and 1e14 s", "two decades"


def c10_vanwezel(c: _Checks) -> tuple[str, str]:
    rng = np.random.default_rng(SEED + 10)
    x = np.linspace(-5, 5, 512, endpoint=False)
    u = Wavefunction1D(x, rng.normal(size=x.size) + 1j * rng.normal(size=x.size))
    v = Wavefunction1D(x, rng.normal(size=x.size) + 1j * rng.normal(size=x.size))
    a, b = 0.3 - 1.2j, 2.1 + 0.4j
    step = lambda w: van_wezel_step(w, 1.0, 1.0, 0.37, 0.05, hbar=1.0, g_newton=1.0).amps  # noqa: E731
    lhs = step(u.with_amps(a * u.amps + b * v.amps))
    res = float(np.max(np.abs(lhs - a * step(u) - b * step(v))) / np.max(np.abs(lhs)))
    c.add("linearity residual", res, res <= 1e-10)
    kappa = van_wezel_kappa(1.0, 1.0, 1.0, 1.0)
    dt = 6 / kappa
    t, coh = van_wezel_two_site_coherence(1.0, 1.0, 0.01, dt, 200, 1000, rng, 1.0, 1.0)
    fit = -float(np.polyfit(t, np.log(coh), 1)[0])
    ratio = fit / van_wezel_coherence_rate(1.0, 1.0, 0.01, dt, 1.0, 1.0)
    c.add("fit/analytic rate", ratio, 1 / 3 <= ratio <= 3)
    return "linear step; rate ratio 1", "1e-10; x3"


# --- 11, 12, 13 --------------------------------------------------------------------

def c11_envariance(c: _Checks) -> tuple[str, str]:
    rng = np.random.default_rng(SEED + 11)
    reps = [equal_prob_chain(SchmidtPair.from_coefficients(np.exp(1j * rng.uniform(0, 2 * np.pi, 2)) / np.sqrt(2)))
            for _ in range(20)]
    worst = max(r.max_residual for r in reps)
    halves = all(r.p_plus == r.p_minus == Fraction(1, 2) for r in reps)
    c.add("max step residual", worst, worst < 1e-10 and halves)
    wrong = [(m, k - m) for k in range(2, 65) for m in range(1, k) if born_from_counting(m, k - m) != Fraction(m, k)]
    c.add("counting mismatches", len(wrong), not wrong)
    return "p = 1/2; m/(m+n) for m+n <= 64", "1e-10; exact"


def c12_nogo(c: _Checks) -> tuple[str, str]:
    reps = sweep(100, SEED + 12)
    c.add("max distance", max(r.distance for r in reps), all(r.distance <= 1 + 1e-9 and r.contradiction for r in reps))
    rng = np.random.default_rng(SEED + 120)
    imp = []
    while len(imp) < 20:
        p, e = random_shape(rng)
        if e < 2:
            continue
        k = int(rng.integers(2, e + 1))
        s = random_calibrated_scheme(rng, p, e, n_ready=k, leak=0.05)
        imp.append(impure_variant(s, random_density(k, k, rng), rng))
    c.add("impure max distance", max(r.distance for r in imp), all(r.contradiction for r in imp))
    return "distance <= 1 < sqrt(2) - eps", "1e-9"


def c13_pilotwave(c: _Checks) -> tuple[str, str]:
    x = np.linspace(0, 100, 4096, endpoint=False)
    k = 2 * np.pi * 20 / 100
    psi = Wavefunction1D(x, np.exp(1j * k * x))
    q = np.random.default_rng(SEED + 13).uniform(0, 99, 200)
    dev = float(np.max(np.abs(bohm_velocity(psi, q, 1.0, 1.0) / k - 1)))
    c.add("plane-wave dev", dev, dev <= 1e-6)
    xg = np.linspace(-30, 50, 4096, endpoint=False)
    ens = evolve_trajectories(gaussian_packet(xg, 0.0, 1.0, 1.0), 1.0, 5.0, 0.01, 10_000,
                              np.random.default_rng(SEED + 130), hbar=1.0, record_every=50)
    ks = 0.0
    for t, pos in zip(ens.times, ens.positions):
        pos = pos[np.isfinite(pos)]
        ks = max(ks, stats.kstest(pos, stats.norm(t, free_gaussian_width(1.0, 1.0, t, 1.0)).cdf).statistic)
    c.add("max KS", float(ks), ks < 0.03)
    c.add("crossings", 0 if ordering_preserved(ens.positions) else 1, ordering_preserved(ens.positions))
    return "v = hbar k/m; |psi|^2 distribution kept", "1e-6; KS 0.03"


# --- 14 ----------------------------------------------------------------------------

DETERMINISM_RUNS = (
    ["spinbath", "--n", "200"], ["scatter"], ["pendulum"], ["vonneumann"], ["grw", "--runs", "50"],
    ["diosi", "--n-points", "2000", "--n-pairs", "10000"], ["penrose", "--preset", "proton"],
    ["vanwezel", "--members", "200", "--steps", "50"], ["doublewell"], ["envariance"], ["nogo", "--schemes", "20"],
    ["pilotwave", "--n-traj", "500", "--steps", "50"], ["doubleslit"], ["presets"],
)

_RUNNER = """
import sys, json
from decolab.cli import main
for argv in json.loads(sys.argv[1]):
    rc = main(argv + ["--seed", "7", "--out", sys.argv[2], "--svg"])
    if rc:
        sys.exit(rc)
"""


def _cli_snapshot(out: Path, threads: int) -> dict[str, bytes]:
    import json

    env = dict(os.environ, DECOLAB_THREADS=str(threads))
    proc = subprocess.run([sys.executable, "-c", _RUNNER, json.dumps(DETERMINISM_RUNS), str(out)],
                          env=env, capture_output=True, check=True)
    snap = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
    snap["<stdout>"] = proc.stdout
    return snap


def c14_determinism(c: _Checks) -> tuple[str, str]:
    with tempfile.TemporaryDirectory() as tmp:
        snaps = [_cli_snapshot(Path(tmp) / name, th) for name, th in (("a", 1), ("b", 1), ("c", 8))]
    diff = sorted({k for s in snaps[1:] for k in set(s) | set(snaps[0]) if s.get(k) != snaps[0].get(k)})
    c.add("files", len(snaps[0]) - 1, len(snaps[0]) > 1)
    c.add("differing outputs", ",".join(diff) or "none", not diff)
    return "byte-identical across runs and thread counts 1/8", "exact"


CRITERIA: dict[int, tuple[str, Callable, float]] = {
    1: ("mixture_vs_pure", c01_expectations, 0.001),
    2: ("spinbath_decay", c02_spinbath, 5),
    3: ("gaussian_approx", c03_gaussian, 5),
    4: ("scatter_semigroup", c04_scatter, 1),
    5: ("pendulum_ratio", c05_pendulum, 1),
    6: ("weisskopf_wigner", c06_weisskopf, 60),
    7: ("grw_statistics", c07_grw, 120),
    8: ("diosi_norm", c08_diosi, 30),
    9: ("penrose_lifetimes", c09_penrose, 10),
    10: ("van_wezel", c10_vanwezel, 60),
    11: ("envariance_born", c11_envariance, 10),
    12: ("nogo_sweep", c12_nogo, 60),
    13: ("pilot_wave", c13_pilotwave, 120),
    14: ("determinism", c14_determinism, 30),
}

SUITES: dict[str, tuple[int, ...]] = {
    "expectations": (1,), "spinbath": (2, 3), "scatter": (4,), "pendulum": (5,), "oscbath": (6,),
    "grw": (7,), "diosi": (8,), "penrose": (9,), "vanwezel": (10,), "envariance": (11,), "nogo": (12,),
    "pilotwave": (13,), "determinism": (14,), "all": tuple(range(1, 15)),
}


def run_criterion(cid: int) -> Criterion:
    name, fn, limit = CRITERIA[cid]
    checks = _Checks()
    start = time.perf_counter()
    try:
        expected, tol = fn(checks)
    except Exception as e:  # a crash is a failed criterion, reported rather than raised
        checks.add("error", f"{type(e).__name__}: {e}", False)
        expected, tol = "-", "-"
    return Criterion(cid, name, checks.observed, expected, tol, checks.ok, time.perf_counter() - start, limit)


def run_suite(name: str) -> list[Criterion]:
    return [run_criterion(i) for i in SUITES[name]]
