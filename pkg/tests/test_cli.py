import math
import subprocess
import sys

import numpy as np
import pytest

from hitchin.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main, parse_complex
from hitchin.output import read_config, read_csv


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExitCodes:
    def test_unknown_command(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["bogus"])
        assert info.value.code == EXIT_USAGE

    def test_bad_flag_value(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["solve-radial", "--n", "3"])
        assert info.value.code == EXIT_USAGE

    def test_precondition_is_usage_error(self, tmp_path, capsys):
        code, _, err = run(["solve-radial", "--n", "1", "--B", "0.5", "--out", tmp_path], capsys)
        assert code == EXIT_USAGE and "error" in err

    def test_asymptotic_needs_a_mode(self, tmp_path, capsys):
        code, _, _ = run(["asymptotic", "--out", tmp_path], capsys)
        assert code == EXIT_USAGE

    def test_non_convergence(self, tmp_path, capsys, monkeypatch):
        import hitchin.cli as cli
        from hitchin.errors import ConvergenceError

        def boom(*a, **k):
            raise ConvergenceError("stuck", 1.5, [2.0, 1.5])

        monkeypatch.setattr(cli, "solve_radial", boom)
        code, _, err = run(["solve-radial", "--out", tmp_path], capsys)
        assert code == EXIT_NUMERIC and "1.500e+00" in err

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "hitchin", "asymptotic", "--upsilon-test", "--out", str(tmp_path)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0 and "PASS" in proc.stdout


class TestCommands:
    def test_solve_radial(self, tmp_path, capsys):
        code, out, _ = run(["solve-radial", "--n", "1", "--out", tmp_path, "--svg"], capsys)
        assert code == EXIT_OK
        val = float(out.split("flux = ")[1].split()[0])
        assert val == pytest.approx(math.pi / 2, rel=1e-2)
        header, table = read_csv(tmp_path / "profile.csv")
        assert header == ["r", "psi", "dpsi_dr", "absF"] and table.shape == (2000, 4)
        assert (tmp_path / "profile.svg").exists()

    def test_scan_b(self, tmp_path, capsys):
        code, out, _ = run(["scan-b", "--B-max", "4", "--steps", "5", "--out", tmp_path], capsys)
        assert code == EXIT_OK and "strictly decreasing = true" in out
        header, table = read_csv(tmp_path / "scan.csv")
        assert header == ["B", "flux_over_pi"] and table.shape == (5, 2)

    def test_scan_b_rejects_single_step(self, tmp_path, capsys):
        assert run(["scan-b", "--steps", "1", "--out", tmp_path], capsys)[0] == EXIT_USAGE

    def test_solve_2d(self, tmp_path, capsys):
        code, out, _ = run(["solve-2d", "--coord", "8", "--grid-N", "65", "--out", tmp_path, "--svg"], capsys)
        assert code == EXIT_OK and "flux / (3 pi/2)" in out
        header, table = read_csv(tmp_path / "heatmap.csv")
        assert header == ["x", "y", "psi", "absF"] and table.shape == (65 * 65, 4)
        assert (tmp_path / "psi.svg").exists() and (tmp_path / "absF.svg").exists()

    def test_solve_2d_minus_sheet_complex_coord(self, tmp_path, capsys):
        code, out, _ = run(
            ["solve-2d", "--sheet", "minus", "--a", "3", "--coord", "0.5+0.5i", "--grid-N", "65", "--out", tmp_path],
            capsys,
        )
        assert code == EXIT_OK and "zeros" in out

    def test_surface(self, tmp_path, capsys):
        argv = ["surface", "--a", "0", "--radius", "2", "--steps", "9", "--grid-N", "33", "--grid-L", "8"]
        code, out, _ = run(argv + ["--out", tmp_path, "--svg"], capsys)
        assert code == EXIT_OK and "positive_peaks" in out
        header, table = read_csv(tmp_path / "surface.csv")
        assert header == ["coord_re", "coord_im", "omega", "curvature", "iso_spread", "resid_gauge"]
        assert table.shape == (81, 6) and np.all(table[:, 2] > 0)
        assert (tmp_path / "summary.txt").exists() and (tmp_path / "curvature.svg").exists()

    def test_asymptotic_checks(self, tmp_path, capsys):
        code, out, _ = run(["asymptotic", "--check-c", "--out", tmp_path], capsys)
        assert code == EXIT_OK and out.strip().endswith("PASS")
        code, out, _ = run(["asymptotic", "--upsilon-test", "--samples", "50", "--out", tmp_path], capsys)
        assert code == EXIT_OK and out.strip().endswith("PASS")

    @pytest.mark.parametrize("n, k, verdict", [(3, 3, "converges"), (3, 2, "diverges")])
    def test_norm_pk(self, tmp_path, capsys, n, k, verdict):
        code, out, _ = run(["asymptotic", "--norm-pk", n, k, "--out", tmp_path], capsys)
        assert code == EXIT_OK and out.splitlines()[0] == verdict
        assert read_csv(tmp_path / "norm_pk.csv")[0] == ["n", "k", "value", "converges"]


class TestManifest:
    def test_default_out_dir_from_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("HITCHIN_OUT_DIR", str(tmp_path / "env"))
        assert run(["asymptotic", "--upsilon-test"], capsys)[0] == EXIT_OK
        assert (tmp_path / "env" / "run-manifest.txt").exists()

    def test_manifest_contents(self, tmp_path, capsys):
        run(["solve-radial", "--n", "2", "--B", "1.5", "--out", tmp_path], capsys)
        text = (tmp_path / "run-manifest.txt").read_text()
        assert text.startswith("# written ")
        cfg = read_config(tmp_path / "run-manifest.txt")
        assert cfg["command"] == "solve-radial" and float(cfg["B"]) == 1.5 and cfg["n"] == "2"

    def test_config_roundtrip_reproduces_output(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        run(["solve-radial", "--n", "2", "--B", "1.5", "--points", "1000", "--out", a], capsys)
        run(["solve-radial", "--config", a / "run-manifest.txt", "--out", b], capsys)
        assert (a / "profile.csv").read_bytes() == (b / "profile.csv").read_bytes()

    def test_flag_overrides_config(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("# comment\nn = 2\nB = 3.0\n")
        run(["solve-radial", "--config", cfg, "--B", "0", "--out", tmp_path / "o"], capsys)
        params = read_config(tmp_path / "o" / "run-manifest.txt")
        assert float(params["B"]) == 0.0 and params["n"] == "2"

    def test_config_selects_asymptotic_mode(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("norm-pk = 4 4\nR-cut = 12\n")
        code, out, _ = run(["asymptotic", "--config", cfg, "--out", tmp_path / "o"], capsys)
        assert code == EXIT_OK and out.startswith("converges")

    @pytest.mark.parametrize(
        "text", ["command = scan-b\n", "bogus = 1\n", "n = 7\n", "B = abc\n", "no equals sign\n"]
    )
    def test_bad_config(self, tmp_path, capsys, text):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text(text)
        assert run(["solve-radial", "--config", cfg, "--out", tmp_path], capsys)[0] == EXIT_USAGE


def test_parse_complex():
    assert parse_complex("1+2i") == 1 + 2j
    assert parse_complex(" -0.5i ") == -0.5j
    assert parse_complex("3") == 3
