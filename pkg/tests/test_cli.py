import csv
import json
import xml.etree.ElementTree as ET

import pytest
from click.testing import CliRunner

from diffuselab.cli import main

GENERIC_1D = """
[domain]
lower = -1.0
upper = 1.0

[interface]
shape = interval
a = -0.5
b = 0.5

[coefficients]
alpha = 2.0
beta = 1.0
gamma = 1.0

[data]
q = "1"
g = "0.1"

[experiment]
eps = 0.1, 0.05, 0.025
"""

CONST_EXACT_1D = """
[domain]
lower = -1.0
upper = 1.0

[interface]
shape = interval
a = -0.5
b = 0.5

[coefficients]
alpha = 2.0
beta = 1.0
gamma = 1.0

[data]
q = "1"
h = "1"

[experiment]
eps = 0.1, 0.05, 0.025
"""


@pytest.fixture
def runner():
    return CliRunner()


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestSweep:
    def test_constant_exactness_exit_zero(self, runner, tmp_path):
        cfg = write(tmp_path, CONST_EXACT_1D)
        out = tmp_path / "out"
        result = runner.invoke(main, ["sweep", "--config", cfg, "--out", str(out)])
        assert result.exit_code == 0, result.output
        with open(out / "report.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert all(float(r["err_l2"]) <= 1e-10 for r in rows)
        assert all(float(r["err_h1"]) <= 1e-10 for r in rows)

    def test_generic_sweep_artifacts(self, runner, tmp_path):
        cfg = write(tmp_path, GENERIC_1D)
        out = tmp_path / "out"
        result = runner.invoke(main, ["sweep", "--config", cfg, "--out", str(out)])
        # three-point sweep: strict decrease asserted, honest-red ratio not
        assert result.exit_code == 0, result.output
        data = json.loads((out / "report.json").read_text())
        l2 = [r["err_l2"] for r in data["rows"]]
        assert all(b < a for a, b in zip(l2, l2[1:]))
        root = ET.parse(out / "convergence.svg").getroot()
        polylines = root.findall(".//{http://www.w3.org/2000/svg}polyline")
        assert len(polylines) >= 2

    def test_max_nodes_override(self, runner, tmp_path):
        cfg = write(tmp_path, GENERIC_1D.replace("eps = 0.1, 0.05, 0.025", "eps = 0.1, 0.05"))
        out = tmp_path / "out"
        result = runner.invoke(
            main, ["sweep", "--config", cfg, "--out", str(out), "--max-nodes", "150"])
        assert result.exit_code == 0, result.output
        data = json.loads((out / "report.json").read_text())
        assert any(r["capped"] for r in data["rows"])

    def test_row_failure_exits_one(self, runner, tmp_path):
        # capping all the way to an under-resolved layer fails that row
        cfg = write(tmp_path, GENERIC_1D)
        out = tmp_path / "out"
        result = runner.invoke(
            main, ["sweep", "--config", cfg, "--out", str(out), "--max-nodes", "150"])
        assert result.exit_code == 1
        data = json.loads((out / "report.json").read_text())
        assert any(r["failure"] for r in data["rows"])


class TestBrokenConfig:
    def test_exit_two_no_artifacts(self, runner, tmp_path):
        cfg = write(tmp_path, GENERIC_1D + "bogus = 1\n")
        out = tmp_path / "out"
        result = runner.invoke(main, ["sweep", "--config", cfg, "--out", str(out)])
        assert result.exit_code == 2
        assert not out.exists()

    def test_missing_file(self, runner, tmp_path):
        result = runner.invoke(
            main, ["sweep", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "o")])
        assert result.exit_code == 2

    def test_invalid_physics_exit_two(self, runner, tmp_path):
        cfg = write(tmp_path, GENERIC_1D.replace("alpha = 2.0", "alpha = -2.0"))
        result = runner.invoke(main, ["sweep", "--config", cfg, "--out", str(tmp_path / "o")])
        assert result.exit_code == 2


class TestOtherCommands:
    def test_solve(self, runner, tmp_path):
        cfg = write(tmp_path, GENERIC_1D)
        out = tmp_path / "out"
        result = runner.invoke(main, ["solve", "--config", cfg, "--out", str(out)])
        assert result.exit_code == 0, result.output
        data = json.loads((out / "report.json").read_text())
        assert data["kind"] == "solve"
        assert all(r["err_l2"] is None for r in data["rows"])

    def test_gamma_check(self, runner, tmp_path):
        cfg = write(tmp_path, GENERIC_1D + 'u = "cos(x)"\n')
        out = tmp_path / "out"
        result = runner.invoke(main, ["gamma-check", "--config", cfg, "--out", str(out)])
        assert result.exit_code == 0, result.output
        data = json.loads((out / "report.json").read_text())
        gaps = [r["gap"] for r in data["rows"]]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))

    def test_gamma_check_requires_candidate(self, runner, tmp_path):
        cfg = write(tmp_path, GENERIC_1D)
        result = runner.invoke(
            main, ["gamma-check", "--config", cfg, "--out", str(tmp_path / "o")])
        assert result.exit_code == 2

    def test_lemma_check(self, runner, tmp_path):
        cfg = write(tmp_path, GENERIC_1D)
        out = tmp_path / "out"
        result = runner.invoke(main, ["lemma-check", "--config", cfg, "--out", str(out)])
        assert result.exit_code == 0, result.output
        with open(out / "report.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert {"one", "linear", "cosine", "bump"} <= {r["w_name"] for r in rows}
