import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats
from scipy.integrate import trapezoid

from decolab.cli import penrose_pair
from decolab.collapse import (CollapseEvent, GRWParams, MassDensity, ball_kernel, diosi_norm, double_well_ratio,
                              grw_center_density, grw_ensemble, grw_hit, grw_hit_nd, grw_sample_center,
                              grw_trajectory, lattice_sphere, penrose_lifetime, penrose_r0_sensitivity,
                              uniform_ball_samples, van_wezel_coherence_rate, van_wezel_kappa, van_wezel_step,
                              van_wezel_two_site_coherence)
from decolab.constants import G_NEWTON, HBAR
from decolab.wavefunction import FreePropagator, Wavefunction1D, free_gaussian_amplitude, gaussian_packet

G = G_NEWTON


def _two_peaks(x, w=0.64, sep=4.0, width=0.1):
    a, b = gaussian_packet(x, -sep / 2, width), gaussian_packet(x, sep / 2, width)
    return a.with_amps(np.sqrt(w) * a.amps + np.sqrt(1 - w) * b.amps)


# --- GRW ---------------------------------------------------------------------

def test_params_validation():
    with pytest.raises(ValueError):
        GRWParams(d=0.0)
    with pytest.raises(ValueError):
        GRWParams(lam=-1.0)
    with pytest.raises(ValueError):
        CollapseEvent(0.0, 0.0, 1.5)
    assert GRWParams(n_particles=10**9).total_rate == pytest.approx(1e-7)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 1.0), st.floats(-2, 2))
def test_center_density_integrates_to_one(d, x0):
    x = np.linspace(-6, 6, 1201)
    psi = gaussian_packet(x, x0, 0.4)
    centers = np.arange(x[0] - 8 * d, x[-1] + 8 * d, psi.dx)
    assert trapezoid(grw_center_density(psi, d, centers), centers) == pytest.approx(1.0, abs=1e-6)


def test_center_density_of_gaussian_is_gaussian():
    # |psi|^2 with variance s^2 blurred by d^2/2 is normal with variance s^2 + d^2/2
    x = np.linspace(-8, 8, 2001)
    s, d = 0.5, 0.6
    psi = gaussian_packet(x, 0.3, s)
    c = np.linspace(-3, 3, 61)
    assert np.allclose(grw_center_density(psi, d, c), stats.norm(0.3, np.sqrt(s**2 + d**2 / 2)).pdf(c), atol=1e-9)


def test_sampled_centers_follow_density():
    x = np.linspace(-5, 5, 1001)
    psi = _two_peaks(x, sep=3.0, width=0.3)
    d = 0.4
    rng = np.random.default_rng(1)
    samples = np.array([grw_sample_center(psi, d, rng) for _ in range(4000)])
    grid = np.linspace(x[0] - 3, x[-1] + 3, 4001)
    cdf = np.cumsum(grw_center_density(psi, d, grid)) * (grid[1] - grid[0])
    assert stats.kstest(samples, lambda q: np.interp(q, grid, cdf)).pvalue > 1e-3


def test_branch_frequencies_within_three_sigma():
    x = np.linspace(-4, 4, 1601)
    psi = _two_peaks(x)
    rng = np.random.default_rng(2)
    n = 10_000
    left = sum(grw_sample_center(psi, 0.3, rng) < 0 for _ in range(n)) / n
    assert abs(left - 0.64) <= 3 * np.sqrt(0.64 * 0.36 / n)


def test_hit_localizes_and_rejects_outside_centre():
    x = np.linspace(-4, 4, 801)
    out = grw_hit(_two_peaks(x), -2.0, 0.3)
    assert out.norm2() == pytest.approx(1.0)
    assert np.sum(out.density[x > 0]) * out.dx < 1e-20
    with pytest.raises(ValueError):
        grw_hit(_two_peaks(x), 10.0, 0.3)


def test_hit_nd_reduces_to_1d():
    x = np.linspace(-4, 4, 81)
    psi = _two_peaks(x)
    one = grw_hit(psi, 1.7, 0.5).amps
    many = grw_hit_nd(psi.amps[:, None] * np.ones((1, 3)), [x, np.arange(3.0)], 0, 1.7, 0.5)
    assert np.allclose(many[:, 0] / np.linalg.norm(many[:, 0]), one / np.linalg.norm(one))


def test_rigid_body_single_hit_localizes_all_constituents():
    x = np.linspace(-4, 4, 40)
    gl = np.exp(-((x + 2) ** 2) / 0.18)
    gr = np.exp(-((x - 2) ** 2) / 0.18)
    amps = np.einsum("i,j,k->ijk", gl, gl, gl) + np.einsum("i,j,k->ijk", gr, gr, gr)
    rho = np.abs(grw_hit_nd(amps, [x] * 3, 2, -2.0, 0.5)) ** 2
    rho /= rho.sum()
    assert rho[x > 0].sum() < 1e-6
    assert rho[:, x > 0].sum() < 1e-6


def test_lambda_zero_is_free_evolution():
    x = np.linspace(-60, 80, 4096, endpoint=False)
    psi0 = gaussian_packet(x, 0.0, 1.0, 1.0)
    run = grw_trajectory(psi0, GRWParams(0.5, 0.0), 1.0, 5.0, 0.1, np.random.default_rng(0), hbar=1.0)
    assert not run.events and run.t_end == 5.0
    assert np.max(np.abs(run.psi.amps - free_gaussian_amplitude(x, 0.0, 1.0, 1.0, 1.0, 5.0, 1.0))) < 1e-6


def test_first_hit_times_are_exponential():
    x = np.linspace(-4, 4, 401)
    p = GRWParams(0.3, 1e-16, 10**15)  # rate 0.1
    runs = grw_ensemble(_two_peaks(x), p, None, 1e6, 1.0, 2000, seed=5, max_events=1)
    t = np.array([r.events[0].t for r in runs])
    assert stats.kstest(t, stats.expon(scale=10.0).cdf).pvalue > 1e-3


def test_ensemble_independent_of_thread_count(monkeypatch):
    x = np.linspace(-4, 4, 201)
    p = GRWParams(0.3, 0.5)
    runs = {}
    for th in ("1", "4"):
        monkeypatch.setenv("DECOLAB_THREADS", th)
        runs[th] = grw_ensemble(_two_peaks(x), p, 1.0, 5.0, 0.5, 16, seed=9, hbar=1.0)
    for a, b in zip(runs["1"], runs["4"]):
        assert [e.center for e in a.events] == [e.center for e in b.events]
        assert np.array_equal(a.psi.amps, b.psi.amps)


def test_coarse_dt_warns():
    x = np.linspace(-4, 4, 101)
    with pytest.warns(RuntimeWarning):
        grw_trajectory(_two_peaks(x), GRWParams(0.3, 2.0), None, 0.1, 1.0, np.random.default_rng(0), max_events=1)


# --- mass densities ----------------------------------------------------------------

def test_ball_kernel_against_monte_carlo():
    rng = np.random.default_rng(7)
    n = 400_000

    def ball(c):
        v = rng.normal(size=(n, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return c + v * rng.random(n)[:, None] ** (1 / 3)

    for dist in (0.0, 0.7, 1.5, 2.5):
        mc = np.mean(1 / np.linalg.norm(ball(np.zeros(3)) - ball(np.array([dist, 0, 0])), axis=1))
        assert ball_kernel(dist, 1.0) == pytest.approx(mc, rel=0.01)


def test_ball_kernel_continuity_and_far_field():
    assert ball_kernel(2.0, 1.0) == pytest.approx(0.5)
    assert ball_kernel(0.0, 2.0) == pytest.approx(0.6)
    assert ball_kernel(5.0, 1.0) == pytest.approx(0.2)


def test_diosi_exact_two_balls():
    f = MassDensity([[0, 0, 0], [3, 0, 0]], [2.0, 5.0], 1.0)
    expected = G * (1.2 * (4 + 25) + 2 * 10 / 3)
    assert diosi_norm(f) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        diosi_norm(f, n_pairs=10)


def test_diosi_monte_carlo_uniform_sphere():
    rng = np.random.default_rng(8)
    f = uniform_ball_samples(1.0, 1.0, 20_000, rng, 0.01)
    assert diosi_norm(f, n_pairs=100_000, rng=rng) == pytest.approx(1.2 * G, rel=0.02)


def test_monte_carlo_agrees_with_exact_sum():
    rng = np.random.default_rng(9)
    f = uniform_ball_samples(1.0, 3.0, 1500, rng, 0.05)
    assert diosi_norm(f, n_pairs=400_000, rng=rng) == pytest.approx(diosi_norm(f), rel=0.01)


def test_bare_points_reject_coincidence():
    f = MassDensity([[0, 0, 0], [0, 0, 0]], [1.0, 1.0], 0.0)
    with pytest.raises(ValueError):
        diosi_norm(f)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 5.0), st.floats(0.1, 0.5))
def test_lattice_conserves_mass(radius, frac):
    f = lattice_sphere(radius, 2.0, radius * frac)
    assert f.total_mass == pytest.approx(2.0 * 4 / 3 * np.pi * radius**3)
    assert np.all(np.linalg.norm(f.points, axis=1) <= radius + 1e-12)


def test_penrose_separated_spheres():
    m, r, d = 1e-12, 1e-6, 1e-4
    a = MassDensity(np.zeros((1, 3)), [m], r)
    out = penrose_lifetime(a, a.shifted([d, 0, 0]))
    expected = 4 * np.pi * G * (2 * 1.2 * m**2 / r - 2 * m**2 / d)
    assert out["delta_e"] == pytest.approx(expected, rel=1e-12)
    assert out["tau"] == pytest.approx(HBAR / expected)


@pytest.mark.parametrize("name,target", [("droplet-10um", 1e-6), ("proton", 1e14)])
def test_penrose_presets_order_of_magnitude(name, target):
    rows = penrose_r0_sensitivity(*penrose_pair(name))
    assert [r["r0_factor"] for r in rows] == [0.5, 1.0, 2.0]
    assert abs(np.log10(rows[1]["tau"] / target)) <= 2


# --- fluctuating damping --------------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(st.floats(-2, 2), st.floats(0.01, 0.2), st.integers(0, 2**31 - 1))
def test_fixed_xi_step_is_linear(xi, dt, seed):
    rng = np.random.default_rng(seed)
    x = np.linspace(-5, 5, 256, endpoint=False)
    u, v = (rng.normal(size=256) + 1j * rng.normal(size=256) for _ in range(2))
    a, b = complex(rng.normal(), rng.normal()), complex(rng.normal(), rng.normal())
    step = lambda w: van_wezel_step(Wavefunction1D(x, w), 1.0, 1.0, xi, dt, hbar=1.0, g_newton=1.0).amps  # noqa: E731
    lhs = step(a * u + b * v)
    assert np.max(np.abs(lhs - a * step(u) - b * step(v))) <= 1e-10 * np.max(np.abs(lhs))


def test_step_limits():
    x = np.linspace(-5, 5, 256, endpoint=False)
    psi = gaussian_packet(x, 0.5, 0.7, 1.0)
    free = van_wezel_step(psi, 1.0, 1.0, 0.0, 0.3, hbar=1.0, gravity=False, g_newton=1.0)
    assert np.allclose(free.amps, FreePropagator(x, 1.0, 1.0).apply(psi.amps, 0.3))
    damped = van_wezel_step(psi, 1.0, 1.0, 0.0, 0.3, hbar=1.0, g_newton=1.0)
    assert damped.norm2() < 1.0
    assert van_wezel_step(psi, 1.0, 1.0, 0.0, 0.3, hbar=1.0, renormalize=True, g_newton=1.0).norm2() == \
        pytest.approx(1.0)
    with pytest.raises(ValueError):
        van_wezel_step(psi, 1.0, 1.0, 0.0, 0.0)


def test_kappa_formula():
    assert van_wezel_kappa(2.0, 3.0, 0.5, 1.0) == pytest.approx(4.0 / (2 * 27 * 0.5))


def test_ensemble_rate_matches_two_level_reduction():
    kappa = van_wezel_kappa(1.0, 1.0, 1.0, 1.0)
    dt = 6 / kappa
    t, coh = van_wezel_two_site_coherence(1.0, 1.0, 0.01, dt, 200, 1000, np.random.default_rng(4), 1.0, 1.0)
    fit = -np.polyfit(t, np.log(coh), 1)[0]
    analytic = van_wezel_coherence_rate(1.0, 1.0, 0.01, dt, 1.0, 1.0)
    assert analytic == pytest.approx(kappa * 0.01**2)
    assert 1 / 3 <= fit / analytic <= 3


# --- double well ------------------------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.5, 2), st.floats(0.1, 5))
def test_double_well_quartic_closed_form(v0, a, m):
    x = np.linspace(-1.5 * a, 1.5 * a, 6001)
    v = v0 * ((x / a) ** 2 - 1) ** 2
    expected = np.exp(-np.sqrt(2 * m * v0) * 4 * a / 3)
    assert double_well_ratio(v, x, m, -a, a, 1.0) == pytest.approx(expected, rel=1e-5)


def test_double_well_validation():
    x = np.linspace(-1, 1, 11)
    with pytest.raises(ValueError):
        double_well_ratio(-np.ones(11), x, 1.0, -0.5, 0.5, 1.0)
    with pytest.raises(ValueError):
        double_well_ratio(np.ones(11), x, 1.0, 0.5, -0.5, 1.0)
