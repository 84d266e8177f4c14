"""
End-to-end tests of the command-line entry point.

Run with: pytest tests/test_cli.py -v
"""

import json

import pandas as pd
import pytest

import bounds.estimators as estimators
import registry.verification as verification
import solvers.exhaustive as exhaustive
from core.config import get_settings
from core.lattice import Lattice
from main import EXIT_CAPACITY, EXIT_INPUT, EXIT_OK, main
from registry import get_spec
from tests.helpers import recording_pool


def run_json(argv, tmp_path, name="out.json"):
    path = tmp_path / name
    assert main(argv + ["-o", str(path)]) == EXIT_OK
    return json.loads(path.read_text())


class TestLatticeCommand:
    """frustration-lab lattice"""

    def test_square_5x5(self, tmp_path):
        data = run_json(["lattice", "--kind", "square", "--rows", "5", "--cols", "5"], tmp_path)
        lattice = Lattice.from_dict(data)
        assert lattice.n_sites == 25
        assert lattice.n_bonds == 40

    def test_toroidal(self, tmp_path):
        data = run_json(
            ["lattice", "--kind", "square", "--rows", "3", "--cols", "3", "--boundary", "toroidal"], tmp_path
        )
        assert Lattice.from_dict(data).n_bonds == 18

    def test_stdout(self, capsys):
        assert main(["lattice", "--kind", "triangular", "--rows", "3", "--cols", "4"]) == EXIT_OK
        lattice = Lattice.from_json(capsys.readouterr().out)
        assert lattice.n_sites == 12

    def test_diluted_is_reproducible(self, tmp_path):
        argv = ["lattice", "--kind", "square", "--rows", "6", "--cols", "6", "--dilute", "0.9", "0.9", "--seed", "4"]
        first = run_json(argv, tmp_path, "a.json")
        second = run_json(argv, tmp_path, "b.json")
        assert first == second

    def test_invalid_dimensions(self, tmp_path):
        assert main(["lattice", "--kind", "square", "--rows", "1", "--cols", "5", "-o", str(tmp_path / "x.json")]) == EXIT_INPUT
        assert not (tmp_path / "x.json").exists()

    def test_missing_dimensions(self):
        assert main(["lattice", "--kind", "square"]) == EXIT_INPUT


class TestSolveCommand:
    """frustration-lab solve"""

    def test_ferromagnet(self, tmp_path):
        data = run_json(["solve", "--kind", "square", "--rows", "4", "--cols", "4", "--p", "0"], tmp_path)
        assert data["energy"] == -24
        assert data["degeneracy"] == "2"

    def test_lattice_and_coupling_files(self, tmp_path):
        lattice_path = tmp_path / "lattice.json"
        couplings_path = tmp_path / "couplings.json"
        assert main(["lattice", "--kind", "hexagonal", "--rows", "4", "--cols", "4", "-o", str(lattice_path)]) == EXIT_OK
        first = run_json(
            ["solve", "--lattice", str(lattice_path), "--p", "0.5", "--seed", "3",
             "--save-couplings", str(couplings_path)],
            tmp_path, "first.json",
        )
        second = run_json(
            ["solve", "--lattice", str(lattice_path), "--couplings", str(couplings_path), "--backend", "branch_and_bound"],
            tmp_path, "second.json",
        )
        assert (first["energy"], first["degeneracy"]) == (second["energy"], second["degeneracy"])
        assert second["backend"] == "branch_and_bound"

    def test_self_check(self, tmp_path):
        data = run_json(
            ["solve", "--kind", "triangular", "--rows", "3", "--cols", "4", "--p", "0.5", "--self-check"], tmp_path
        )
        assert int(data["degeneracy"]) >= 2

    def test_deterministic_output(self, tmp_path):
        argv = ["solve", "--kind", "square", "--rows", "4", "--cols", "5", "--p", "0.5", "--seed", "9", "--deterministic"]
        assert main(argv + ["-o", str(tmp_path / "a.json")]) == EXIT_OK
        assert main(argv + ["-o", str(tmp_path / "b.json")]) == EXIT_OK
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert "elapsed_ms" not in json.loads((tmp_path / "a.json").read_text())

    def test_missing_coupling_file(self, tmp_path):
        argv = ["solve", "--kind", "square", "--rows", "3", "--cols", "3", "--couplings", str(tmp_path / "nope.json")]
        assert main(argv) == EXIT_INPUT

    def test_no_couplings_given(self):
        assert main(["solve", "--kind", "square", "--rows", "3", "--cols", "3"]) == EXIT_INPUT

    def test_capacity(self):
        argv = ["solve", "--kind", "square", "--rows", "6", "--cols", "6", "--p", "0.5", "--backend", "exhaustive"]
        assert main(argv) == EXIT_CAPACITY

    def test_failed_solve_leaves_no_coupling_file(self, tmp_path):
        couplings_path = tmp_path / "couplings.json"
        argv = [
            "solve", "--kind", "square", "--rows", "6", "--cols", "6", "--p", "0.5",
            "--backend", "exhaustive", "--save-couplings", str(couplings_path), "-o", str(tmp_path / "out.json"),
        ]
        assert main(argv) == EXIT_CAPACITY
        assert not couplings_path.exists()
        assert not (tmp_path / "out.json").exists()

    def test_threads_reach_the_solver(self, tmp_path, monkeypatch):
        pools = []
        monkeypatch.setattr(exhaustive, "ProcessPoolExecutor", recording_pool(pools))
        monkeypatch.setattr(get_settings(), "exhaustive_chunk_bits", 4)
        data = run_json(
            ["solve", "--kind", "square", "--rows", "3", "--cols", "4", "--p", "0", "--threads", "2",
             "--backend", "exhaustive"],
            tmp_path,
        )
        assert pools == [2]
        assert data["degeneracy"] == "2"

    def test_nothing_fits(self):
        argv = ["solve", "--kind", "square", "--rows", "15", "--cols", "15", "--p", "0.5"]
        assert main(argv) == EXIT_CAPACITY


class TestModuleCommands:
    """frustration-lab verify-module / density"""

    def test_verify_triangular(self, tmp_path):
        data = run_json(
            ["verify-module", "--spec", "triangular", "--collar", "1", "--samples", "2", "--seed", "7"], tmp_path
        )
        assert data["passed"] is True
        assert len(data["samples"]) == 2

    def test_failing_module_is_a_verdict(self, tmp_path):
        spec_path = tmp_path / "corrupted.json"
        corrupted = get_spec("triangular").with_constraints({"p11": "U"})
        spec_path.write_text(json.dumps(corrupted.to_dict()))
        data = run_json(
            ["verify-module", "--spec", str(spec_path), "--collar", "1", "--samples", "20", "--seed", "1"], tmp_path
        )
        assert data["passed"] is False
        assert sum(not s["passed"] for s in data["samples"]) == 3

    def test_threads_reach_the_worker_pool(self, tmp_path, monkeypatch):
        pools = []
        monkeypatch.setattr(verification, "ProcessPoolExecutor", recording_pool(pools))
        data = run_json(
            ["verify-module", "--spec", "triangular", "--collar", "1", "--samples", "2", "--seed", "7", "--threads", "2"],
            tmp_path,
        )
        assert pools == [2]
        assert data["passed"] is True

    def test_density_threads_reach_the_worker_pool(self, tmp_path, monkeypatch):
        pools = []
        monkeypatch.setattr(estimators, "ProcessPoolExecutor", recording_pool(pools))
        monkeypatch.setattr(get_settings(), "mc_batch_size", 500)
        data = run_json(
            ["density", "--spec", "square", "--p", "0", "--samples", "1e3", "--threads", "2"], tmp_path
        )
        assert pools == [2]
        assert data["matches"] == 0

    def test_unknown_spec(self):
        assert main(["verify-module", "--spec", "kagome", "--samples", "1"]) == EXIT_INPUT

    def test_density_ferromagnetic_limit(self, tmp_path):
        data = run_json(["density", "--spec", "square", "--p", "0", "--samples", "1e3"], tmp_path)
        assert data["matches"] == 0
        assert data["samples"] == 1000


class TestBoundCommand:
    """frustration-lab bound"""

    def test_square_constant(self, tmp_path):
        data = run_json(["bound", "--spec", "square", "--lattice-size", "204800"], tmp_path)
        assert data["density_limit"] == "1/204800"
        assert data["k"] == 8192
        assert data["method"] == "closed_form"

    def test_all_specs(self, tmp_path):
        data = run_json(["bound"], tmp_path)
        assert [r["spec_id"] for r in data] == ["square", "triangular", "hexagonal"]
        assert [r["density_limit"] for r in data] == ["1/204800", "1/11010048", "1/28311552"]

    def test_csv(self, tmp_path):
        path = tmp_path / "bounds.csv"
        assert main(["bound", "-o", str(path)]) == EXIT_OK
        frame = pd.read_csv(path)
        assert list(frame["spec"]) == ["square", "triangular", "hexagonal"]
        assert frame["density"].iloc[0] == pytest.approx(0.99 / 204800)

    def test_monte_carlo(self, tmp_path):
        data = run_json(["bound", "--spec", "square", "--p", "0.3", "--samples", "2e4", "--seed", "1"], tmp_path)
        assert data["method"] == "monte_carlo"
        assert data["samples"] == 20000

    def test_repeatable(self, tmp_path):
        argv = ["bound", "--spec", "hexagonal", "--epsilon", "0.05"]
        assert main(argv + ["-o", str(tmp_path / "a.json")]) == EXIT_OK
        assert main(argv + ["-o", str(tmp_path / "b.json")]) == EXIT_OK
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_invalid_epsilon(self):
        assert main(["bound", "--spec", "square", "--epsilon", "0"]) == EXIT_INPUT

    def test_bad_probability_rejected_by_parser(self):
        with pytest.raises(SystemExit):
            main(["bound", "--p", "1.5"])
