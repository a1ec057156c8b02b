"""Scenario runner: one subcommand per model, CSV (and optional SVG) output.

Exit status: 0 success, 1 numerical or criterion failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import configparser
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .collapse import (CollapseUnderflowError, GRWParams, MassDensity, diosi_norm, double_well_ratio,
                       grw_ensemble, lattice_sphere, penrose_r0_sensitivity, uniform_ball_samples,
                       van_wezel_coherence_rate, van_wezel_kappa, van_wezel_two_site_coherence)
from .constants import G_NEWTON, HBAR
from .envariance import SchmidtPair, born_from_counting, equal_prob_chain
from .nogo import CalibrationError, sweep
from .oscdec import IntegrationError, PendulumParams, decoherence_exponent, decoherence_ratio
from .output import Table, write_csv, write_svg
from .pilotwave import NodeError, evolve_trajectories
from .presets import get_preset, list_presets
from .qcore import Operator, StateVector, spin_ops
from .scatterdec import (ScatterEnvParams, decay_factor, decoherence_time, double_slit_pattern,
                         fringe_spacing, fringe_visibility, product_form_factor, two_source_spacing)
from .spinbath import decoherence_factor, gaussian_params, random_bath, recurrence_order
from .vonneumann import PointerApparatus, measurement_sequence
from .wavefunction import Wavefunction1D, free_gaussian_width, gaussian_packet

NUMERICAL_ERRORS = (ArithmeticError, IntegrationError, NodeError, CollapseUnderflowError, CalibrationError)


class UsageError(ValueError):
    def __init__(self, fld: str, msg: str):
        super().__init__(f"{fld}: {msg}")


def require(cond: bool, fld: str, msg: str) -> None:
    if not cond:
        raise UsageError(fld, msg)


@dataclass
class RunConfig:
    command: str
    params: dict
    seed: int = 0
    out: Path = Path(".")
    svg: bool = False
    natural_units: bool = False

    @property
    def hbar(self) -> float:
        return 1.0 if self.natural_units else HBAR


@dataclass
class ScenarioResult:
    table: Table | None
    echo: dict = field(default_factory=dict)
    report: list[str] = field(default_factory=list)
    plot: dict | None = None  # x column, y columns, labels
    failed: bool = False


# --- subcommands ----------------------------------------------------------------

def run_spinbath(c: RunConfig) -> ScenarioResult:
    p = c.params
    require(p["n"] >= 1, "n", "must be >= 1")
    require(p["g_max"] > 0, "g_max", "must be positive")
    require(p["n_t"] >= 2, "n_t", "must be >= 2")
    bath = random_bath(p["n"], np.random.default_rng(c.seed), p["g_max"])
    t = np.linspace(0.0, p["t_max"], p["n_t"])
    z = decoherence_factor(bath, t)
    tab = Table(["t", "re_z", "im_z", "abs2"])
    for ti, zi in zip(t, z):
        tab.add(ti, zi.real, zi.imag, abs(zi) ** 2)
    b_n, s_n = gaussian_params(bath)
    return ScenarioResult(tab, {"B_n": repr(b_n), "s_n": repr(s_n)},
                          [f"B_n = {b_n!r}", f"s_n = {s_n!r}", f"ln(n!) = {recurrence_order(p['n'])!r}"],
                          {"x": "t", "y": ["abs2"], "title": "spin bath |z(t)|^2"})


def run_scatter(c: RunConfig) -> ScenarioResult:
    p = c.params
    try:
        env = ScatterEnvParams(p["eta"], p["v"], p["sigma_t"], p["c_geom"], p["lambda_env"])
    except ValueError as e:
        raise UsageError("scatter", str(e)) from None
    tau = decoherence_time(env)
    t_max = p["t_max"] if p["t_max"] > 0 else 5 * tau
    box = np.sqrt(p["box_factor"] * env.sigma_t)
    tab = Table(["t", "decay", "product_form"])
    for t in np.linspace(0, t_max, p["n_t"]):
        tab.add(t, decay_factor(env, 0.0, p["sep"], t), product_form_factor(env, box, t))
    return ScenarioResult(tab, {"tau_d": repr(tau), "box_side": repr(box)}, [f"tau_d = {tau!r} s"],
                          {"x": "t", "y": ["decay", "product_form"], "title": "scattering decay"})


def run_pendulum(c: RunConfig) -> ScenarioResult:
    p = dict(c.params)
    if p["preset"]:
        p.update(get_preset(p["preset"], "pendulum").params)
    try:
        pp = PendulumParams(p["mass"], p["omega"], p["gamma"], 0.0, p["dx"], hbar=c.hbar)
    except ValueError as e:
        raise UsageError("pendulum", str(e)) from None
    r = decoherence_ratio(pp)
    t_max = p["t_max"] if p["t_max"] > 0 else 0.01 / pp.gamma
    tab = Table(["t", "log_magnitude", "short_time_log"])
    for t in np.linspace(0, t_max, p["n_t"]):
        tab.add(t, -decoherence_exponent(pp, t), -2 * r["K"] * pp.gamma * t)
    return ScenarioResult(tab, {"K": repr(r["K"]), "tau_d_over_tau": repr(r["tau_d_over_tau"])},
                          [f"K = {r['K']!r}", f"tau_d_over_tau = {r['tau_d_over_tau']!r}"],
                          {"x": "t", "y": ["log_magnitude", "short_time_log"], "title": "pendulum ln|factor|"})


def run_vonneumann(c: RunConfig) -> ScenarioResult:
    p = c.params
    require(0 <= p["alpha"] <= 1, "alpha", "must lie in [0, 1]")
    require(p["order"] in ("decohere-first", "collapse-first"), "order", "decohere-first or collapse-first")
    require(0 <= p["env_overlap"] <= 1, "env_overlap", "must lie in [0, 1]")
    beta = np.sqrt(1 - p["alpha"] ** 2) * np.exp(1j * p["phase"])
    system = StateVector([p["alpha"], beta])
    half = p["n_pointer"] // 2
    app = PointerApparatus(np.arange(-half, half + 1, dtype=float), half, p["coupling"])
    sz = Operator(spin_ops(1.0)["z"])
    res = measurement_sequence(system, app, sz, p["env_overlap"], p["order"], np.random.default_rng(c.seed))
    tab = Table(["step", "row", "col", "re_rho", "im_rho"])
    for k, name in enumerate(res["stages"]):
        m = res["stages"][name]
        for i in range(m.shape[0]):
            for j in range(m.shape[1]):
                tab.add(k, i, j, m[i, j].real, m[i, j].imag)
    steps = ", ".join(f"{k}={n}" for k, n in enumerate(res["stages"]))
    return ScenarioResult(tab, {"steps": steps}, [f"outcome S_z = {res['eigenvalue']!r} (hbar units)",
                                                  f"pointer position = {res['pointer_position']!r}"])


def run_grw(c: RunConfig) -> ScenarioResult:
    p = c.params
    require(p["runs"] >= 1, "runs", "must be >= 1")
    require(0 < p["weight"] < 1, "weight", "must lie in (0, 1)")
    require(p["sep"] > 6 * p["d"], "sep", "branches must be well separated compared with d")
    try:
        grw = GRWParams(p["d"], p["lam"], int(p["n_particles"]))
    except ValueError as e:
        raise UsageError("grw", str(e)) from None
    x = np.linspace(-p["sep"], p["sep"], 2001)
    w = p["weight"]
    branch = lambda x0: np.exp(-((x - x0) ** 2) / (4 * (p["d"] / 4) ** 2))  # noqa: E731
    psi = Wavefunction1D(x, np.sqrt(w) * branch(-p["sep"] / 2) + np.sqrt(1 - w) * branch(p["sep"] / 2)).normalized()
    mass = p["mass"] if p["mass"] > 0 else None
    dt = min(p["t_max"] / 10, 0.1 / grw.total_rate)
    runs = grw_ensemble(psi, grw, mass, p["t_max"], dt, p["runs"], c.seed, hbar=c.hbar, max_events=1)
    tab = Table(["run", "t_first", "center", "branch"])
    hits = []
    for i, r in enumerate(runs):
        if r.events:
            e = r.events[0]
            hits.append(e.t)
            tab.add(i, e.t, e.center, -1 if e.center < 0 else 1)
        else:
            tab.add(i, float("nan"), float("nan"), 0)
    left = sum(1 for row in tab.rows if row[3] == -1)
    report = [f"mean first-hit time = {float(np.mean(hits))!r} s (expected {1 / grw.total_rate!r})" if hits
              else "no hits within t_max",
              f"left-branch fraction = {left / p['runs']!r} (weight {w!r})"]
    return ScenarioResult(tab, {"total_rate": repr(grw.total_rate)}, report)


def run_diosi(c: RunConfig) -> ScenarioResult:
    p = c.params
    require(p["n_points"] >= 2, "n_points", "must be >= 2")
    rng = np.random.default_rng(c.seed)
    f = uniform_ball_samples(p["radius"], p["mass"], p["n_points"], rng, p["r0"])
    val = diosi_norm(f, n_pairs=p["n_pairs"], rng=rng)
    exact = 1.2 * G_NEWTON * p["mass"] ** 2 / p["radius"]
    tab = Table(["n_points", "n_pairs", "norm", "analytic", "rel_error"])
    tab.add(p["n_points"], p["n_pairs"], val, exact, val / exact - 1)
    return ScenarioResult(tab, {}, [f"norm = {val!r} J, uniform-sphere value = {exact!r} J"])


def penrose_pair(name: str) -> tuple[MassDensity, MassDensity]:
    pr = get_preset(name, "penrose").params
    if "lattice_per_radius" in pr:
        a = lattice_sphere(pr["radius"], pr["density"], pr["radius"] / pr["lattice_per_radius"])
    else:
        a = MassDensity(np.zeros((1, 3)), [pr["mass"]], pr["radius"])
    return a, a.shifted([pr["displacement"], 0.0, 0.0])


def run_penrose(c: RunConfig) -> ScenarioResult:
    try:
        a, b = penrose_pair(c.params["preset"])
    except KeyError as e:
        raise UsageError("preset", str(e)) from None
    rows = penrose_r0_sensitivity(a, b, hbar=c.hbar)
    tab = Table(["r0_factor", "r0", "delta_e", "tau"])
    for r in rows:
        tab.add(r["r0_factor"], r["r0"], r["delta_e"], r["tau"])
    nominal = rows[1]
    return ScenarioResult(tab, {"tau": repr(nominal["tau"])},
                          [f"tau = {nominal['tau']!r} s at r0 = {nominal['r0']!r} m",
                           "r0 sensitivity: " + ", ".join(f"x{r['r0_factor']}: {r['tau']:.3g} s" for r in rows)])


def run_vanwezel(c: RunConfig) -> ScenarioResult:
    p = c.params
    require(p["mass"] > 0 and p["L"] > 0 and p["sep"] > 0, "mass/L/sep", "must be positive")
    kappa = van_wezel_kappa(p["mass"], p["L"], c.hbar)
    dt = p["dt"] if p["dt"] > 0 else 6 / (kappa * p["L"] ** 2)
    t, coh = van_wezel_two_site_coherence(p["mass"], p["L"], p["sep"], dt, p["steps"], p["members"],
                                          np.random.default_rng(c.seed), c.hbar)
    rate = van_wezel_coherence_rate(p["mass"], p["L"], p["sep"], dt, c.hbar)
    fit = -float(np.polyfit(t, np.log(coh), 1)[0])
    tab = Table(["t", "coherence", "analytic"])
    for ti, ci in zip(t, coh):
        tab.add(ti, ci, np.exp(-rate * ti))
    return ScenarioResult(tab, {"dt": repr(dt), "rate_analytic": repr(rate)},
                          [f"fitted rate = {fit!r} 1/s", f"analytic rate = {rate!r} 1/s",
                           f"kappa dx^2 = {kappa * p['sep'] ** 2!r} 1/s"],
                          {"x": "t", "y": ["coherence", "analytic"], "title": "ensemble coherence"})


def run_doublewell(c: RunConfig) -> ScenarioResult:
    p = c.params
    require(p["v0"] >= 0, "v0", "must be non-negative")
    a = p["a"]
    x = np.linspace(-1.5 * a, 1.5 * a, 3001)
    v = p["v0"] * ((x / a) ** 2 - 1) ** 2
    tab = Table(["mass", "ratio", "log_ratio"])
    for m in np.geomspace(p["mass_min"], p["mass_max"], p["n_mass"]):
        r = double_well_ratio(v, x, m, -a, a, c.hbar)
        tab.add(m, r, np.log(r) if r > 0 else -np.inf)
    return ScenarioResult(tab, {}, [], {"x": "mass", "y": ["log_ratio"], "title": "ln psi(l)/psi(r)"})


def run_envariance(c: RunConfig) -> ScenarioResult:
    p = c.params
    require(p["m"] >= 1 and p["n"] >= 1, "m/n", "must be positive")
    require(p["m"] + p["n"] <= 10_000, "m/n", "m + n must not exceed 10^4")
    s = SchmidtPair.from_coefficients(np.exp(1j * np.array([p["phase1"], p["phase2"]])) / np.sqrt(2))
    rep = equal_prob_chain(s)
    tab = Table(["step", "residual"])
    for i, st in enumerate(rep.steps, 1):
        tab.add(i, st.residual)
    prob = born_from_counting(p["m"], p["n"])
    return ScenarioResult(tab, {"p_counting": str(prob)},
                          [f"equal-coefficient chain: p(+) = p(-) = {rep.p_plus}",
                           f"counting: p(+) = {prob} for m = {p['m']}, n = {p['n']}"])


def run_nogo(c: RunConfig) -> ScenarioResult:
    p = c.params
    require(8 <= p["dim_min"] <= p["dim_max"] <= 64, "dim_min/dim_max", "need 8 <= dim_min <= dim_max <= 64")
    require(p["schemes"] >= 1, "schemes", "must be >= 1")
    reps = sweep(p["schemes"], c.seed, p["dim_min"], p["dim_max"])
    tab = Table(["trial", "distance", "margin", "eps_max", "contradiction"])
    for i, r in enumerate(reps):
        tab.add(i, r.distance, r.margin, r.eps_max, r.contradiction)
    ok = sum(r.contradiction for r in reps)
    return ScenarioResult(tab, {}, [f"{ok}/{len(reps)} schemes bounded by 1 (contradiction certified)"],
                          failed=ok != len(reps))


def run_pilotwave(c: RunConfig) -> ScenarioResult:
    from scipy import stats

    p = c.params
    require(p["n_traj"] >= 1 and p["steps"] >= 1, "n_traj/steps", "must be positive")
    sig = p["sigma"]
    x = np.linspace(-30 * sig, 30 * sig + 2 * p["drift_room"], p["n_grid"], endpoint=False)
    psi = gaussian_packet(x, 0.0, sig, p["k0"])
    dt = p["T"] / p["steps"]
    ens = evolve_trajectories(psi, p["mass"], p["T"], dt, p["n_traj"], np.random.default_rng(c.seed),
                              c.hbar, record_every=max(1, p["steps"] // 10))
    v0 = c.hbar * p["k0"] / p["mass"]
    tab = Table(["t", "mean_x", "analytic_mean", "ks"])
    for i, t in enumerate(ens.times):
        q = ens.positions[i][np.isfinite(ens.positions[i])]
        ks = stats.kstest(q, stats.norm(v0 * t, free_gaussian_width(sig, p["mass"], t, c.hbar)).cdf).statistic
        tab.add(t, float(np.mean(q)), v0 * t, ks)
    return ScenarioResult(tab, {"excluded": str(ens.excluded)},
                          [f"excluded trajectories = {ens.excluded}",
                           f"max KS = {float(max(r[3] for r in tab.rows))!r}"],
                          {"x": "t", "y": ["ks"], "title": "equivariance KS statistic"})


def run_doubleslit(c: RunConfig) -> ScenarioResult:
    p = dict(c.params)
    pr = get_preset(p["preset"], "doubleslit").params
    require(0 <= p["coherence"] <= 1, "coherence", "must lie in [0, 1]")
    x, inten = double_slit_pattern(pr["packet_sep"], pr["packet_width"], pr["mass"], pr["t"], p["coherence"],
                                   hbar=c.hbar)
    _, inc = double_slit_pattern(pr["packet_sep"], pr["packet_width"], pr["mass"], pr["t"], 0.0, x=x, hbar=c.hbar)
    tab = Table(["x", "intensity", "incoherent"])
    for row in zip(x, inten, inc):
        tab.add(*row)
    width_t = free_gaussian_width(pr["packet_width"], pr["mass"], pr["t"], c.hbar)
    vis = fringe_visibility(x, inten, inc, width_t)
    report = [f"visibility = {vis!r}"]
    if p["coherence"] > 0:
        sp = fringe_spacing(x, inten, 3 * width_t)
        report.append(f"fringe spacing = {sp!r} m, two-source formula = "
                      f"{two_source_spacing(pr['packet_sep'], pr['mass'], pr['t'], c.hbar)!r} m")
    return ScenarioResult(tab, {}, report, {"x": "x", "y": ["intensity", "incoherent"], "title": "screen"})


def run_presets(c: RunConfig) -> ScenarioResult:
    lines = []
    for pr in list_presets(c.params["filter"]):
        vals = ", ".join(f"{k}={v!r}" for k, v in pr.params.items())
        lines.append(f"{pr.name} [{pr.command}]: {pr.description}; {vals}; source: {pr.source}")
    return ScenarioResult(None, {}, lines)


def run_verify(c: RunConfig) -> ScenarioResult:
    from .verify import SUITES, run_suite

    require(c.params["suite"] in SUITES, "suite", f"unknown suite; choose from {', '.join(SUITES)}")
    results = run_suite(c.params["suite"])
    return ScenarioResult(None, {}, [r.line() for r in results], failed=not all(r.passed for r in results))


# name: (runner, [(param, type, default, help)])
COMMANDS: dict[str, tuple] = {
    "spinbath": (run_spinbath, [("n", int, 1000, "bath size"), ("g_max", float, 1.0, "max coupling"),
                                ("t_max", float, 5.0, "end time"), ("n_t", int, 501, "time samples")]),
    "scatter": (run_scatter, [("eta", float, 1e20, "density, 1/m^3"), ("v", float, 500.0, "speed, m/s"),
                              ("sigma_t", float, 1e-18, "cross section, m^2"), ("c_geom", float, 1.0, "C"),
                              ("lambda_env", float, 1e-9, "env wavelength, m"), ("sep", float, 1e-6, "separation, m"),
                              ("t_max", float, 0.0, "end time (0: 5 tau_d)"), ("n_t", int, 101, "samples"),
                              ("box_factor", float, 1e6, "box area over sigma_t")]),
    "pendulum": (run_pendulum, [("preset", str, "", "preset name"), ("mass", float, 1e-3, "kg"),
                                ("omega", float, 2 * np.pi, "rad/s"), ("gamma", float, 1.0, "1/s"),
                                ("dx", float, 1e-6, "branch separation, m"), ("t_max", float, 0.0, "0: 0.01/gamma"),
                                ("n_t", int, 101, "samples")]),
    "vonneumann": (run_vonneumann, [("alpha", float, 2**-0.5, "|+> amplitude"), ("phase", float, 0.0, "relative phase"),
                                    ("n_pointer", int, 21, "pointer grid size"), ("coupling", float, 2.0, "g tau"),
                                    ("env_overlap", float, 0.0, "branch overlap after decoherence"),
                                    ("order", str, "decohere-first", "decohere-first or collapse-first")]),
    "grw": (run_grw, [("n_particles", float, 1e9, "constituents"), ("lam", float, 1e-16, "1/s per particle"),
                      ("d", float, 1e-7, "localization width, m"), ("sep", float, 1e-6, "branch separation, m"),
                      ("weight", float, 0.64, "left-branch weight"), ("mass", float, 0.0, "kg (0: static)"),
                      ("t_max", float, 1e9, "s"), ("runs", int, 200, "ensemble size")]),
    "diosi": (run_diosi, [("radius", float, 1.0, "m"), ("mass", float, 1.0, "kg"), ("n_points", int, 20000, "points"),
                          ("n_pairs", int, 100000, "Monte-Carlo pairs"), ("r0", float, 0.01, "smearing radius, m")]),
    "penrose": (run_penrose, [("preset", str, "droplet-10um", "droplet-10um or proton")]),
    "vanwezel": (run_vanwezel, [("mass", float, 1e-14, "kg"), ("L", float, 1e-6, "plate width, m"),
                                ("sep", float, 1e-8, "site separation, m"), ("dt", float, 0.0, "0: 6/(kappa L^2)"),
                                ("steps", int, 200, "steps"), ("members", int, 1000, "ensemble size")]),
    "doublewell": (run_doublewell, [("v0", float, 1e-21, "barrier height, J"), ("a", float, 1e-9, "well offset, m"),
                                    ("mass_min", float, 1.66e-27, "kg"), ("mass_max", float, 1.66e-25, "kg"),
                                    ("n_mass", int, 21, "samples")]),
    "envariance": (run_envariance, [("m", int, 3, "branches for +"), ("n", int, 5, "branches for -"),
                                    ("phase1", float, 0.0, "rad"), ("phase2", float, 0.0, "rad")]),
    "nogo": (run_nogo, [("schemes", int, 100, "random schemes"), ("dim_min", int, 8, "min dimension"),
                        ("dim_max", int, 64, "max dimension")]),
    "pilotwave": (run_pilotwave, [("mass", float, 9.1093837e-31, "kg"), ("sigma", float, 1e-9, "m"),
                                  ("k0", float, 1e9, "1/m"), ("T", float, 5e-14, "s"), ("steps", int, 200, "steps"),
                                  ("n_traj", int, 2000, "trajectories"), ("n_grid", int, 4096, "grid points"),
                                  ("drift_room", float, 5e-9, "extra grid length for the drift, m")]),
    "doubleslit": (run_doubleslit, [("preset", str, "gerlich-6910amu", "preset"),
                                    ("coherence", float, 1.0, "cross-term factor")]),
    "presets": (run_presets, [("filter", str, "", "substring filter")]),
    "verify": (run_verify, None),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", type=Path, default=Path("."))
    common.add_argument("--svg", action="store_true")
    common.add_argument("--config", type=Path)
    common.add_argument("--natural-units", action="store_true")
    parser = argparse.ArgumentParser(prog="decolab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)
    for name, (_, options) in COMMANDS.items():
        sp = subs.add_parser(name, parents=[common])
        if options is None:
            sp.add_argument("suite")
            continue
        for key, typ, default, hlp in options:
            sp.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=default, help=hlp)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str], path: Path, command: str) -> argparse.Namespace:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        parser.error(f"cannot read config file {path}")
    values = {}
    for section in ("common", command):
        if cp.has_section(section):
            values.update({k.replace("-", "_"): v for k, v in cp.items(section)})
    sub = parser._subparsers._group_actions[0].choices[command]
    known = {a.dest for a in sub._actions}
    unknown = sorted(set(values) - known)
    if unknown:
        parser.error(f"unknown config keys for {command}: {', '.join(unknown)}")
    for flag in ("svg", "natural_units"):
        if flag in values:
            values[flag] = cp.getboolean("common" if cp.has_option("common", flag) else command, flag)
    sub.set_defaults(**values)  # string defaults pass through each option's type
    return parser.parse_args(argv)


def parse(argv: list[str]) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.config is not None:
        ns = _apply_config(parser, argv, ns.config, ns.command)
    if not 0 <= ns.seed < 2**64:
        parser.error("--seed must be an unsigned 64-bit integer")
    params = {k: v for k, v in vars(ns).items()
              if k not in ("command", "seed", "out", "svg", "config", "natural_units")}
    return RunConfig(ns.command, params, ns.seed, ns.out, ns.svg, ns.natural_units)


def run(cfg: RunConfig) -> ScenarioResult:
    res = COMMANDS[cfg.command][0](cfg)
    if res.table is None:
        return res
    echo = {"program": f"decolab {__version__}", "command": cfg.command, "seed": str(cfg.seed),
            "hbar": repr(cfg.hbar), "G": repr(G_NEWTON)}
    echo.update({k: repr(v) if isinstance(v, float) else str(v) for k, v in sorted(cfg.params.items())})
    echo.update(res.echo)
    res.echo = echo
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_csv(cfg.out / f"{cfg.command}.csv", res.table, echo)
    if cfg.svg and res.plot:
        ys = {name: res.table.column(name) for name in res.plot["y"]}
        write_svg(cfg.out / f"{cfg.command}.svg", res.table.column(res.plot["x"]), ys,
                  title=res.plot.get("title", cfg.command), xlabel=res.plot["x"])
    return res


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse(argv)
    except SystemExit as e:
        return int(e.code or 0)
    start = time.perf_counter()
    try:
        res = run(cfg)
    except NUMERICAL_ERRORS as e:
        print(f"decolab: numerical failure: {e}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as e:
        print(f"decolab: error: {e}", file=sys.stderr)
        return 2
    for line in res.report:
        print(line)
    print(f"wall time {time.perf_counter() - start:.3f} s", file=sys.stderr)
    return 1 if res.failed else 0


if __name__ == "__main__":
    sys.exit(main())
