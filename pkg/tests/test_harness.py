import math
from pathlib import Path

import numpy as np
import pytest

from intricacy import cli, config, io, plot
from intricacy.profile import integrate_front

GOLDEN = Path(__file__).parent / "golden"


def write_ini(tmp_path, text):
    p = tmp_path / "run.ini"
    p.write_text(text)
    return p


def test_defaults_cover_every_section():
    cfg = config.load(None)
    for sec in ("indexed", "kmc", "pde", "front", "census"):
        assert cfg[sec]
    assert cfg["pde"]["dt"] is None
    assert cfg["census"]["n_e"] == 2.7e25


def test_parse_overrides_and_types():
    cfg = config.parse("[pde]\ndx = 0.05\nconstraint.enabled = false\n[kmc]\nbox = 6 6 30\n")
    assert cfg["pde"]["dx"] == 0.05
    assert cfg["pde"]["constraint.enabled"] is False
    assert cfg["kmc"]["box"] == (6.0, 6.0, 30.0)
    assert "dx = 0.05" in cfg.echo()
    again = config.parse(cfg.echo())
    assert again.values == cfg.values


@pytest.mark.parametrize("text,match", [("[pde]\nbogus = 1\n", "unknown key"),
                                        ("[nope]\nx = 1\n", "unknown section"),
                                        ("[pde]\ndx = fast\n", "not a valid"),
                                        ("[kmc]\nbox = 8 8\n", "not a valid")])
def test_bad_config_rejected(text, match):
    with pytest.raises(config.ConfigError, match=match):
        config.parse(text)


def test_documentation_lists_units():
    doc = config.documentation()
    assert "[kmc]" in doc and "mean_free_path" in doc


def test_manifest_records_flags_and_config(tmp_path):
    man = io.RunManifest(command="pde", config_echo="[pde]\ndx = 0.1", seed=3)
    man.flags["simplex_laplacian"] = True
    man.add(tmp_path / "a.csv")
    text = man.write(tmp_path).read_text()
    assert "flag.simplex_laplacian = true" in text
    assert "flag.pair_operator_assembly = false" in text
    assert "seed = 3" in text and "outputs = a.csv" in text and "dx = 0.1" in text


def test_csv_round_trip_keeps_full_precision(tmp_path):
    rows = [{"a": 1 / 3, "b": 2}, {"a": math.pi, "b": -1}]
    io.write_csv(tmp_path / "x.csv", ["a", "b"], rows)
    header, data = io.read_csv(tmp_path / "x.csv")
    assert header == ["a", "b"]
    assert data[0, 0] == 1 / 3 and data[1, 0] == math.pi


@pytest.mark.parametrize("command,files", [
    ("front", ["front_profile.csv", "front_summary.csv"]),
    ("census", ["census.csv"]),
    ("pde", ["pde_fields.csv", "pde_front.csv"]),
    ("indexed", ["indexed_measures.csv"]),
])
def test_runs_are_byte_deterministic(tmp_path, command, files):
    assert cli.main([command, "--out", str(tmp_path / "a")]) == 0
    assert cli.main([command, "--out", str(tmp_path / "b")]) == 0
    for name in files:
        a = (tmp_path / "a" / command / name).read_bytes()
        assert a == (tmp_path / "b" / command / name).read_bytes()
    assert (tmp_path / "a" / command / "manifest.txt").exists()


@pytest.mark.parametrize("command,name", [("front", "front_summary.csv"),
                                          ("census", "census.csv")])
def test_outputs_match_golden(tmp_path, command, name):
    assert cli.main([command, "--out", str(tmp_path)]) == 0
    h_new, new = io.read_csv(tmp_path / command / name)
    h_ref, ref = io.read_csv(GOLDEN / name)
    assert h_new == h_ref
    np.testing.assert_allclose(new, ref, rtol=1e-9)


def test_golden_values_agree_with_closed_forms():
    _, front = io.read_csv(GOLDEN / "front_summary.csv")
    assert front[0, 1] == pytest.approx(3 - math.sqrt(3), rel=1e-15)
    _, census = io.read_csv(GOLDEN / "census.csv")
    n_e, v_e, v_p, L, lam, rate, box, active = census[0]
    assert rate == pytest.approx(n_e * v_e * L ** 2, rel=1e-15)
    assert box == pytest.approx(n_e * v_e / v_p * L ** 3, rel=1e-15)
    assert active == pytest.approx(1.89e16, rel=1e-15)


def test_multichannel_run_sets_flag(tmp_path):
    ini = write_ini(tmp_path, "[pde]\nmode = multichannel\nt_end = 2\n")
    assert cli.main(["pde", "--config", str(ini), "--out", str(tmp_path)]) == 0
    assert "flag.simplex_laplacian = true" in (tmp_path / "pde" / "manifest.txt").read_text()


def test_bad_dt_exits_2_and_names_bound(tmp_path, capsys):
    ini = write_ini(tmp_path, "[pde]\ndt = 1.0\n")
    assert cli.main(["pde", "--config", str(ini), "--out", str(tmp_path)]) == 2
    assert "3 dx^2" in capsys.readouterr().err


def test_unknown_key_exits_2(tmp_path, capsys):
    ini = write_ini(tmp_path, "[front]\nspeed = 1\n")
    assert cli.main(["front", "--config", str(ini), "--out", str(tmp_path)]) == 2
    assert "unknown key" in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path):
    assert cli.main(["census", "--config", str(tmp_path / "none.ini")]) == 2


def test_census_prints_three_lines_and_csv(tmp_path, capsys):
    assert cli.main(["census", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "active_waves" in out and "1.89" in out


def test_plot_rejects_empty_and_accepts_two_points(tmp_path):
    with pytest.raises(ValueError):
        plot.line_plot([], tmp_path / "e.svg", "x", "y")
    with pytest.raises(ValueError, match="fewer than two"):
        plot.line_plot([(np.array([1.0]), np.array([2.0]), "one")], tmp_path / "o.svg", "x", "y")
    p = plot.line_plot([(np.array([0.0, 1.0]), np.array([0.0, 1.0]), "two")], tmp_path / "t.svg", "x", "y")
    assert p.read_text().startswith("<svg")


def test_profile_plot_and_cli_plot_flag(tmp_path):
    assert plot.plot_profile(integrate_front(0.05), tmp_path / "p.svg").exists()
    assert cli.main(["front", "--plot", "--out", str(tmp_path)]) == 0
    assert list((tmp_path / "front").glob("*.svg"))


def test_small_kmc_run_writes_profiles_and_summary(tmp_path):
    ini = write_ini(tmp_path, "[kmc]\nn_particles = 2000\nbox = 6 6 20\nt_end = 4\nfit_t_min = 1\n")
    assert cli.main(["kmc", "--config", str(ini), "--seed", "3", "--out", str(tmp_path)]) == 0
    header, prof = io.read_csv(tmp_path / "kmc" / "kmc_profiles.csv")
    assert header == ["t", "z_bin_center", "f0", "f1", "f2", "count"]
    filled = prof[:, 5] > 0
    np.testing.assert_allclose(prof[filled, 2:5].sum(axis=1), 1.0)
    header, _ = io.read_csv(tmp_path / "kmc" / "kmc_summary.csv")
    assert header == ["t", "front_z", "fitted_speed", "r2"]
    assert "seed = 3" in (tmp_path / "kmc" / "manifest.txt").read_text()
