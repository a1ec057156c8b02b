import numpy as np
import pytest

from decolab import __version__
from decolab.cli import COMMANDS, main
from decolab.output import Table, fmt, render_csv, render_svg
from decolab.parallel import seeded_map, spawn_generators, thread_count
from decolab.presets import PRESETS, get_preset, list_presets

FAST_ARGS = {
    "spinbath": ["--n", "50", "--n-t", "11"], "grw": ["--runs", "20"],
    "diosi": ["--n-points", "500", "--n-pairs", "2000"], "penrose": ["--preset", "proton"],
    "vanwezel": ["--members", "50", "--steps", "20"], "nogo": ["--schemes", "5"],
    "pilotwave": ["--n-traj", "200", "--steps", "20"],
}


def _run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


@pytest.mark.parametrize("cmd", [c for c in COMMANDS if c not in ("verify", "presets")])
def test_every_command_writes_csv(cmd, tmp_path):
    assert _run(tmp_path, cmd, *FAST_ARGS.get(cmd, []), "--svg") == 0
    text = (tmp_path / f"{cmd}.csv").read_text()
    assert f"# program = decolab {__version__}" in text
    assert f"# command = {cmd}" in text
    assert "# seed = 0" in text
    assert "\r" not in text


def test_same_seed_is_byte_identical(tmp_path, monkeypatch):
    outs = []
    for i, th in enumerate(("1", "8", "8")):
        monkeypatch.setenv("DECOLAB_THREADS", th)
        assert main(["grw", "--runs", "30", "--seed", "11", "--out", str(tmp_path / str(i))]) == 0
        outs.append((tmp_path / str(i) / "grw.csv").read_bytes())
    assert outs[0] == outs[1] == outs[2]
    main(["grw", "--runs", "30", "--seed", "12", "--out", str(tmp_path / "x")])
    assert (tmp_path / "x" / "grw.csv").read_bytes() != outs[0]


def test_wall_time_only_on_stderr(tmp_path, capsys):
    _run(tmp_path, "scatter")
    out, err = capsys.readouterr()
    assert "wall time" in err and "wall time" not in out
    assert "wall" not in (tmp_path / "scatter.csv").read_text()


def test_usage_errors_exit_2(tmp_path):
    assert _run(tmp_path, "spinbath", "--n", "0") == 2
    assert _run(tmp_path, "spinbath", "--seed", "-1") == 2
    assert _run(tmp_path, "spinbath", "--bogus", "1") == 2
    assert _run(tmp_path, "penrose", "--preset", "omnes-1g") == 2
    assert main(["nosuch"]) == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[common]\nseed = 4\n[spinbath]\nn = 30\nn_t = 5\n")
    assert _run(tmp_path, "spinbath", "--config", str(cfg), "--n", "40") == 0
    text = (tmp_path / "spinbath.csv").read_text()
    assert "# seed = 4" in text and "# n = 40" in text and "# n_t = 5" in text
    cfg.write_text("[spinbath]\nunknown = 1\n")
    assert _run(tmp_path, "spinbath", "--config", str(cfg)) == 2


def test_natural_units_echo(tmp_path):
    assert _run(tmp_path, "pilotwave", "--natural-units", "--mass", "1", "--sigma", "1", "--k0", "1",
                "--T", "2", "--steps", "20", "--n-traj", "100", "--drift-room", "5") == 0
    assert "# hbar = 1.0" in (tmp_path / "pilotwave.csv").read_text()


def test_presets_and_verify(tmp_path, capsys):
    assert _run(tmp_path, "presets", "--filter", "penrose") == 0
    out = capsys.readouterr().out
    assert "droplet-10um" in out and "omnes-1g" not in out
    assert main(["verify", "expectations"]) == 0
    assert capsys.readouterr().out.startswith("PASS 01")
    assert main(["verify", "nonsense"]) == 2


def test_svg_written(tmp_path):
    _run(tmp_path, "spinbath", "--n", "20", "--svg")
    svg = (tmp_path / "spinbath.svg").read_text()
    assert svg.startswith("<svg") and "<polyline" in svg


def test_output_helpers():
    assert fmt(True) == "1" and fmt(np.int64(3)) == "3" and fmt(0.1) == "0.1"
    t = Table(["a", "b"])
    t.add(1, 2.5)
    with pytest.raises(ValueError):
        t.add(1)
    assert render_csv(t, {"k": "v"}) == "# k = v\na,b\n1,2.5\n"
    assert np.array_equal(t.column("b"), [2.5])
    assert "<polyline" in render_svg([0, 1], {"y": [np.nan, 1.0]})


def test_presets_catalog():
    assert len(list_presets()) == len(PRESETS)
    assert get_preset("proton").command == "penrose"
    with pytest.raises(KeyError):
        get_preset("nope")
    with pytest.raises(KeyError):
        get_preset("proton", "pendulum")


def test_parallel_helpers(monkeypatch):
    monkeypatch.setenv("DECOLAB_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("DECOLAB_THREADS", "0")
    with pytest.raises(ValueError):
        thread_count()
    monkeypatch.setenv("DECOLAB_THREADS", "4")
    a = seeded_map(lambda i, r: (i, r.random()), 1, 10)
    monkeypatch.setenv("DECOLAB_THREADS", "1")
    assert a == seeded_map(lambda i, r: (i, r.random()), 1, 10)
    assert [g.random() for g in spawn_generators(1, 2)] == [x[1] for x in a[:2]]
