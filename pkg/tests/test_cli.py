"""Configuration parsing, subcommand dispatch, artifact emission."""

import json

import numpy as np
import pytest

from polyspin.cli import ConfigError, dispatch, main, parse_config

GAMMA_CONFIG = """
[field]
harmonics = [1, 2]
alphas = [1.0, 1.0]

[task]
epsilon = 1e-12
"""

SPECTRUM_CONFIG = """
[field]
harmonics = [4, 5, 6]
alphas = [10.0, 10.0, 10.0]
rabi = [0.2, 0.2, 0.2]

[basis]
depth = 4

[task]
samples = 41
delta_min = -1.5
delta_max = 1.5
crossings = [0, 1]
"""

EVOLVE_CONFIG = """
[field]
harmonics = [2, 3]
alphas = [1.0, 1.0]

[basis]
kind = "both"

[task]
time_samples = 1024
g_ratio = 0.1
"""


class TestParseConfig:
    def test_minimal_valid(self):
        cfg = parse_config(GAMMA_CONFIG)
        ms = cfg.modes()
        assert ms.harmonics == (1, 2)

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("[spin]\nomega_0_typo = 1.0\n")
        assert any("omega_0_typo" in e for e in exc.value.errors)

    def test_all_errors_collected(self):
        bad = """
[field]
harmonics = [2, 1]
alphas = [1.0]
bogus = 3

[task]
epsilon = 2.0
samples = 1
"""
        with pytest.raises(ConfigError) as exc:
            parse_config(bad)
        msgs = "\n".join(exc.value.errors)
        assert "bogus" in msgs
        assert "epsilon" in msgs
        assert "samples" in msgs
        assert "alphas" in msgs

    def test_negative_rabi_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("[field]\nharmonics=[1]\nalphas=[1.0]\nrabi=[-0.1]\n")

    def test_mutually_exclusive_couplings(self):
        with pytest.raises(ConfigError):
            parse_config(
                "[field]\nharmonics=[1]\nalphas=[1.0]\nrabi=[0.1]\ncouplings=[0.1]\n"
            )

    def test_toml_syntax_error(self):
        with pytest.raises(ConfigError):
            parse_config("not toml ][")

    def test_rabi_maps_to_couplings(self):
        cfg = parse_config(
            "[field]\nharmonics=[4,5,6]\nalphas=[10.0,10.0,10.0]\nrabi=[0.2,0.2,0.2]\n"
        )
        ms = cfg.modes()
        assert all(m.g == pytest.approx(0.01) for m in ms.modes)
        amps = cfg.amplitudes()
        assert amps.omega(5) == pytest.approx(0.2)
        assert amps.j == 5

    def test_fig3_recipe_valid(self):
        cfg = parse_config(SPECTRUM_CONFIG)
        assert cfg.resonant_harmonic() == 5
        assert cfg.omega0() == pytest.approx(5.0)


class TestDispatch:
    def test_gamma_rows_sum_to_one(self, tmp_path):
        cfg = parse_config(GAMMA_CONFIG)
        assert dispatch("gamma", cfg, tmp_path) == 0
        lines = (tmp_path / "gamma.csv").read_text().splitlines()
        assert lines[0] == "N,gamma_sq"
        total = sum(float(l.split(",")[1]) for l in lines[1:])
        assert total == pytest.approx(1.0, abs=1e-11)

    def test_spectrum_and_crossings(self, tmp_path):
        cfg = parse_config(SPECTRUM_CONFIG)
        assert dispatch("spectrum", cfg, tmp_path) == 0
        spec = (tmp_path / "spectrum.csv").read_text().splitlines()
        assert spec[0] == "delta0,level,energy,branch"
        crossings = (tmp_path / "crossings.csv").read_text().splitlines()
        rows = [l.split(",") for l in crossings[1:]]
        gaps = {int(r[0]): float(r[1]) for r in rows}
        assert gaps[0] == pytest.approx(0.2, rel=5e-3)
        assert float(rows[1][3]) < 0  # q=1 shift negative

    def test_effective_table(self, tmp_path):
        cfg = parse_config(SPECTRUM_CONFIG + "\n")
        cfg.task["q"] = 2
        assert dispatch("effective", cfg, tmp_path) == 0
        lines = (tmp_path / "effective.csv").read_text().splitlines()
        assert lines[0].startswith("q,delta,r_aa")
        mid = [l for l in lines[1:] if abs(float(l.split(",")[1])) < 1e-9]
        r_ab = float(mid[0].split(",")[4])
        assert r_ab == pytest.approx(-(0.2**3) / 4, rel=1e-9)

    def test_evolve_both_bases_and_l2(self, tmp_path):
        cfg = parse_config(EVOLVE_CONFIG)
        assert dispatch("evolve", cfg, tmp_path) == 0
        for name in ("trace_fock.csv", "trace_shell.csv", "l2.csv"):
            assert (tmp_path / name).exists()
        l2_line = (tmp_path / "l2.csv").read_text().splitlines()[1]
        g0, l2 = (float(x) for x in l2_line.split(","))
        assert g0 == pytest.approx(0.25)
        assert l2 >= 0

    def test_evolve_spin_resonant_with_lowest_mode(self, tmp_path):
        from polyspin.dynamics import compare_bases

        cfg = parse_config(
            "[field]\nharmonics=[2,3]\nalphas=[2.0,2.0]\n"
            "[basis]\nkind='both'\n[task]\ng_ratio=0.1\ntime_samples=2048\n"
        )
        assert cfg.omega0_rabi() == pytest.approx(2.0)
        dispatch("evolve", cfg, tmp_path)
        l2 = float((tmp_path / "l2.csv").read_text().splitlines()[1].split(",")[1])
        assert l2 == pytest.approx(compare_bases(2, 4.0, 0.1, t_samples=2048).l2, rel=1e-12)

    def test_pathology_table(self, tmp_path):
        cfg = parse_config(SPECTRUM_CONFIG)
        assert dispatch("pathology", cfg, tmp_path) == 0
        lines = (tmp_path / "pathology.csv").read_text().splitlines()
        kinds = {l.split(",")[0] for l in lines[1:]}
        assert kinds == {"fock_pair", "shell_doublet"}

    def test_scan_two_points(self, tmp_path):
        cfg = parse_config(
            """
[task]
x_axis = "omega_low"
y_axis = "alpha_sq"
omega_low_values = [2, 11]
alpha_sq_values = [1.0]
g_ratio_values = [0.1]
time_samples = 1024
"""
        )
        assert dispatch("scan", cfg, tmp_path) == 0
        lines = (tmp_path / "scan.csv").read_text().splitlines()
        assert lines[0] == "omega_low,alpha_sq,l2,valid"
        vals = {float(l.split(",")[0]): float(l.split(",")[2]) for l in lines[1:]}
        assert vals[2.0] > 10 * vals[11.0]

    def test_json_format(self, tmp_path):
        cfg = parse_config(GAMMA_CONFIG)
        assert dispatch("gamma", cfg, tmp_path, fmt="json") == 0
        payload = json.loads((tmp_path / "gamma.json").read_text())
        assert payload["columns"] == ["N", "gamma_sq"]

    def test_svg_emission(self, tmp_path):
        cfg = parse_config(GAMMA_CONFIG + "\n[output]\nsvg = true\n")
        assert dispatch("gamma", cfg, tmp_path) == 0
        svg = (tmp_path / "gamma.svg").read_text()
        assert svg.startswith("<svg") and "polyline" in svg

    def test_byte_identical_reruns(self, tmp_path):
        cfg = parse_config(SPECTRUM_CONFIG)
        dispatch("spectrum", cfg, tmp_path / "a")
        dispatch("spectrum", cfg, tmp_path / "b")
        assert (tmp_path / "a/spectrum.csv").read_bytes() == (
            tmp_path / "b/spectrum.csv"
        ).read_bytes()


class TestMain:
    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text("[field]\nharmonics = [2, 1]\nalphas = [1.0, 1.0]\n")
        status = main(["gamma", "--config", str(bad), "--out", str(tmp_path / "out")])
        assert status == 1
        err = capsys.readouterr().err
        assert json.loads(err.splitlines()[0])["error"] == "config"

    def test_missing_config_flag(self, tmp_path):
        assert main(["gamma", "--out", str(tmp_path)]) == 1

    def test_gamma_end_to_end(self, tmp_path):
        conf = tmp_path / "c.toml"
        conf.write_text(GAMMA_CONFIG)
        status = main(["gamma", "--config", str(conf), "--out", str(tmp_path / "out")])
        assert status == 0
        assert (tmp_path / "out/gamma.csv").exists()

    def test_spectrum_dump_basis(self, tmp_path):
        conf = tmp_path / "c.toml"
        conf.write_text(SPECTRUM_CONFIG)
        status = main(
            ["spectrum", "--config", str(conf), "--out", str(tmp_path / "out"), "--dump-basis"]
        )
        assert status == 0
        basis_lines = (tmp_path / "out/basis.csv").read_text().splitlines()
        assert basis_lines[0] == "index,shell,spin"
        assert len(basis_lines) > 4

    def test_numerical_failure_exit_code(self, tmp_path, capsys):
        conf = tmp_path / "c.toml"
        # seed shell far outside support: alpha = 0 gives a single shell at 0,
        # detuning scan then cannot find the resonance window states
        conf.write_text(
            """
[field]
harmonics = [1]
alphas = [3.0]

[basis]
caps = [4]
kind = "fock"

[task]
g0 = 0.1
time_samples = 1024
"""
        )
        status = main(["evolve", "--config", str(conf), "--out", str(tmp_path / "out")])
        assert status == 2  # truncation deficit reported as numerical failure
        err = capsys.readouterr().err
        assert "deficit" in json.loads(err.splitlines()[0])["message"]
