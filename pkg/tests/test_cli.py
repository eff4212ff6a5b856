"""Command-line interface: subcommands, artifacts, exit codes."""

import json
import math

import pytest

from capshift import cli

PDIAM_TOML = """\
theorem = "P-diam"
case_id = "cap-loglaw"
ladder = [0.16, 0.08, 0.04]
extrapolate = false

[domain]
kind = "disk"
r = 1.0

[template]
kind = "segment"
half_length = 1.0
"""

SQUARE_TOML = """\
theorem = "T-seg"
N = 2
ladder = [0.16, 0.08, 0.04]

[domain]
kind = "rectangle"
a = 1.0
b = 1.0

[template]
kind = "segment"
half_length = 1.0
"""


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


# --- constants ----------------------------------------------------------------


def test_constants_table(capsys):
    assert cli.main(["constants", "--k-max", "3"]) == 0
    out = capsys.readouterr().out
    assert "C[1]  = 1" in out
    assert "C[2]  = 0.5" in out
    assert "C[3]  = 0.75" in out
    assert "A[1,3] = 0.75" in out


def test_constants_k_zero_notes_log_law(capsys):
    assert cli.main(["constants", "--k-max", "0"]) == 0
    assert "k=0 uses log law" in capsys.readouterr().out


def test_constants_k_max_capped(capsys):
    assert cli.main(["constants", "--k-max", "13"]) == 1
    assert "k_max" in capsys.readouterr().err


def test_constants_polynomial_vertical_coordinate(capsys):
    # the energy constant of the x2 coordinate itself: k=1, beta=1 -> 2
    assert cli.main(["constants", "--k-max", "1", "--poly", f"1,1,{math.pi/2}"]) == 0
    assert "= 2" in capsys.readouterr().out.splitlines()[-1]


def test_constants_csv(tmp_path, capsys):
    assert cli.main(["constants", "--k-max", "2", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "constants.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# capshift-csv v1 constants"
    assert lines[1] == "quantity,j,k,value"


# --- capacity / spectrum ------------------------------------------------------


def test_capacity_command(tmp_path, capsys):
    rc = cli.main(
        [
            "capacity",
            "--domain", "disk:1.0",
            "--set", "disk:0.1",
            "--h", "0.03125",
            "--out", str(tmp_path),
        ]
    )
    assert rc == 0
    report = json.loads((tmp_path / "capacity.json").read_text(encoding="utf-8"))
    assert report["value"] == pytest.approx(2.0 * math.pi / math.log(10.0), rel=0.05)
    first = (tmp_path / "capacity.csv").read_text(encoding="utf-8").splitlines()[0]
    assert first == "# capshift-csv v1 capacity"


def test_capacity_rejects_bad_specs(capsys):
    assert cli.main(["capacity", "--domain", "torus:1", "--set", "disk:0.1", "--h", "0.1"]) == 1
    assert cli.main(["capacity", "--domain", "disk:1", "--set", "square:0.1", "--h", "0.1"]) == 1


def test_spectrum_command(tmp_path, capsys):
    rc = cli.main(
        ["spectrum", "--domain", "rectangle:1,0.8", "--h", "0.02", "--m", "2", "--out", str(tmp_path)]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "lambda_1" in out and "lambda_2" in out
    lines = (tmp_path / "spectrum.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# capshift-csv v1 spectrum"
    lam1 = float(lines[2].split(",")[3])
    assert lam1 == pytest.approx(2.5625 * math.pi**2, rel=2e-3)


def test_spectrum_two_pole(capsys):
    # pole half-distance offset from the nodes by half a spacing
    rc = cli.main(["spectrum", "--domain", "rectangle:1,0.8", "--h", "0.025", "--m", "1", "--a", "0.3125"])
    assert rc == 0
    lam1 = float(capsys.readouterr().out.split("=")[1])
    assert lam1 > 2.5625 * math.pi**2  # the poles push the bottom eigenvalue up


# --- verify -------------------------------------------------------------------


def test_verify_capacity_log_law(tmp_path, capsys):
    cfg = _write(tmp_path, "pdiam.toml", PDIAM_TOML)
    rc = cli.main(["verify", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 0
    assert "cap-loglaw [P-diam]: pass" in capsys.readouterr().out
    report = json.loads((tmp_path / "cap-loglaw.json").read_text(encoding="utf-8"))
    assert report["verdict"] is True
    assert report["fitted"]["constant"] == pytest.approx(2.0 * math.pi, rel=0.10)
    lines = (tmp_path / "cap-loglaw.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# capshift-csv v1 ladder"
    assert len(lines) == 2 + 3  # header comment, column row, one line per rung


def test_verify_byte_identical_reruns(tmp_path):
    cfg = _write(tmp_path, "pdiam.toml", PDIAM_TOML)
    for sub in ("run1", "run2"):
        (tmp_path / sub).mkdir()
        assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path / sub)]) == 0
    first = (tmp_path / "run1" / "cap-loglaw.csv").read_bytes()
    second = (tmp_path / "run2" / "cap-loglaw.csv").read_bytes()
    assert first == second
    assert (tmp_path / "run1" / "cap-loglaw.json").read_bytes() == (
        tmp_path / "run2" / "cap-loglaw.json"
    ).read_bytes()


def test_verify_plot_artifact(tmp_path):
    cfg = _write(tmp_path, "pdiam.toml", PDIAM_TOML)
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path), "--plot"]) == 0
    svg = (tmp_path / "cap-loglaw.svg").read_bytes()
    assert svg.lstrip().startswith(b"<?xml")


def test_verify_degenerate_eigenvalue_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, "square.toml", SQUARE_TOML)
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "simple eigenvalue" in capsys.readouterr().err


def test_verify_template_mismatch(tmp_path, capsys):
    cfg = _write(
        tmp_path,
        "mismatch.toml",
        PDIAM_TOML.replace('theorem = "P-diam"', 'theorem = "T-disk"'),
    )
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "disk templates" in capsys.readouterr().err


def test_verify_resolution_rule(tmp_path, capsys):
    cfg = _write(tmp_path, "pdiam.toml", PDIAM_TOML)
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path), "--h-rule", "4"]) == 1
    assert "h <= size/8" in capsys.readouterr().err


def test_verify_malformed_config(tmp_path, capsys):
    cfg = _write(tmp_path, "broken.toml", "theorem = [unclosed\n")
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "malformed config" in capsys.readouterr().err
    assert cli.main(["verify", "--config", str(tmp_path / "absent.toml"), "--out", str(tmp_path)]) == 1


def test_verify_requires_sections(tmp_path, capsys):
    cfg = _write(tmp_path, "nodomain.toml", 'theorem = "T-seg"\n')
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "[domain]" in capsys.readouterr().err


# --- isospectral --------------------------------------------------------------


def test_isospectral_default_passes(tmp_path, capsys):
    cfg = _write(
        tmp_path,
        "iso.toml",
        'a = 0.1\nh = 0.015625\nM = 4\ntol = 0.05\n[domain]\nkind = "rectangle"\na = 1.0\nb = 0.8\n',
    )
    rc = cli.main(["isospectral", "--config", cfg, "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "pass" in out
    lines = (tmp_path / "isospectral.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# capshift-csv v1 isospectral"
    assert len(lines) == 2 + 4


def test_isospectral_mismatched_grids(tmp_path, capsys):
    cfg = _write(
        tmp_path,
        "iso.toml",
        'a = 0.1\nh = 0.015625\nh_half = 0.03125\nM = 4\n[domain]\nkind = "rectangle"\na = 1.0\nb = 0.8\n',
    )
    assert cli.main(["isospectral", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "mismatched grids" in capsys.readouterr().err


def test_isospectral_grid_too_small_for_m(tmp_path, capsys):
    cfg = _write(
        tmp_path,
        "iso.toml",
        'a = 0.1\nh = 0.1\nM = 500\n[domain]\nkind = "rectangle"\na = 1.0\nb = 0.8\n',
    )
    assert cli.main(["isospectral", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "grid too small" in capsys.readouterr().err


# --- ab-collide ---------------------------------------------------------------


def test_ab_collide_smoke(tmp_path, capsys):
    rc = cli.main(
        ["ab-collide", "--ladder", "0.16,0.08,0.04", "--out", str(tmp_path)]
    )
    assert rc == 0
    assert "T-AB]: pass" in capsys.readouterr().out
    lines = (tmp_path / "T-AB.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# capshift-csv v1 ladder"
    assert len(lines) == 2 + 3


# --- usage --------------------------------------------------------------------


def test_usage_errors(capsys):
    assert cli.main(["no-such-command"]) == 1
    assert cli.main([]) == 1
    assert cli.main(["--help"]) == 0
