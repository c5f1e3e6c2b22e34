import json
import math
from pathlib import Path

import numpy as np
import pytest

from tbgate import cli, expsim, metrics, qcore, timebin, tomo
from tbgate.cli import (
    ParseError, Scenario, ingest_counts, load_config, main, run_scenario,
    write_counts,
)

FAST_NOISY_CONFIG = {
    "seed": 5,
    "gate_duration_s": 1500.0,
    "input_duration_s": 3000.0,
    "single_qubit_duration_s": 1000.0,
    "cnot_duration_s": 2000.0,
    "bootstrap_replicas": 3,
    "projector_mode": "minimal",
}


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


class TestLoadConfig:
    def test_defaults_without_file(self):
        config, params = load_config(None)
        assert config == expsim.NoiseConfig()
        assert params["projector_mode"] == "full"

    def test_json_file_splits_noise_and_scenario_keys(self, tmp_path):
        path = write_config(tmp_path, {"seed": 9, "accidental_fraction": 0.05,
                                       "bootstrap_replicas": 12})
        config, params = load_config(path)
        assert config.seed == 9
        assert config.accidental_fraction == pytest.approx(0.05)
        assert params["bootstrap_replicas"] == 12

    def test_toml_file(self, tmp_path):
        path = tmp_path / "config.toml"
        path.write_text('seed = 4\ngate_duration_s = 123.0\n')
        config, params = load_config(str(path))
        assert config.seed == 4
        assert params["gate_duration_s"] == pytest.approx(123.0)

    def test_unknown_key_rejected(self, tmp_path):
        path = write_config(tmp_path, {"not_a_key": 1})
        with pytest.raises(ValueError, match="unknown config key"):
            load_config(path)

    def test_seed_override(self, tmp_path):
        path = write_config(tmp_path, {"seed": 9})
        config, _ = load_config(path, seed_override=123)
        assert config.seed == 123


class TestCountsFiles:
    def test_roundtrip_is_lossless(self, tmp_path):
        config = expsim.NoiseConfig(seed=21)
        projs = tomo.ProjectorSet.standard(2, "full")
        runs = expsim.simulate_gate_experiment(None, config, projs=projs,
                                               duration_s=800.0)
        path = tmp_path / "counts.csv"
        write_counts(path, runs, projs)
        by_input, parsed_projs = ingest_counts(path)
        assert parsed_projs.labels == projs.labels
        assert len(by_input) == 16
        for run in runs:
            records = by_input["_".join(run.input_label)]
            assert sorted(records, key=lambda r: r.setting_index) == \
                sorted(run.records, key=lambda r: r.setting_index)

    def test_single_input_file_has_36_records(self, tmp_path):
        config = expsim.NoiseConfig(seed=2)
        projs = tomo.ProjectorSet.standard(2, "full")
        runs = expsim.simulate_gate_experiment(None, config, projs=projs,
                                               duration_s=100.0)[:1]
        path = tmp_path / "counts.csv"
        write_counts(path, runs, projs)
        by_input, _ = ingest_counts(path)
        (records,) = by_input.values()
        assert len(records) == 36

    def _write_rows(self, tmp_path, rows):
        path = tmp_path / "bad.csv"
        lines = [",".join(cli.COUNTS_HEADER)] + rows
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_negative_count_rejected_with_line_number(self, tmp_path):
        rows = [f"{'_'.join(l)},t1_t1,5,1.0"
                for l in tomo.ProjectorSet.standard(2, "full").labels]
        rows[3] = rows[3].replace(",5,", ",-2,")
        with pytest.raises(ParseError, match="line 5"):
            ingest_counts(self._write_rows(tmp_path, rows))

    def test_unknown_label_rejected(self, tmp_path):
        with pytest.raises(ParseError, match="unknown basis label"):
            ingest_counts(self._write_rows(tmp_path, ["tX_t1,t1_t1,5,1.0"]))

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c,d\n")
        with pytest.raises(ParseError, match="line 1"):
            ingest_counts(path)

    def test_duplicate_setting_rejected(self, tmp_path):
        rows = [f"{'_'.join(l)},t1_t1,5,1.0"
                for l in tomo.ProjectorSet.standard(2, "full").labels]
        rows.append(rows[0])
        with pytest.raises(ParseError, match="duplicate"):
            ingest_counts(self._write_rows(tmp_path, rows))

    def test_nonstandard_setting_set_rejected(self, tmp_path):
        with pytest.raises(ParseError, match="standard projector set"):
            ingest_counts(self._write_rows(tmp_path, ["t1_t1,t1_t1,5,1.0"]))


def _assert_matrix_files_valid(out_dir: Path):
    for path in out_dir.glob("*.json"):
        doc = json.loads(path.read_text())
        if "rows" in doc:
            qcore.matrix_from_json(doc)
            assert "basis_ordering" in doc


class TestScenarios:
    def test_ideal_qpt(self, tmp_path):
        written = run_scenario(Scenario("ideal-qpt", out_dir=str(tmp_path)))
        assert all(Path(p).exists() for p in written)
        _assert_matrix_files_valid(tmp_path)
        report = json.loads((tmp_path / "gate_report.json").read_text())
        assert report["process_fidelity"] >= 1 - 1e-8
        assert report["average_fidelity"] == pytest.approx(1.0, abs=1e-8)
        assert report["entangling_capability"] == pytest.approx(1.0, abs=1e-8)
        chi = qcore.load_matrix(tmp_path / "chi_reconstructed.json")
        assert np.allclose(chi, tomo.ideal_cphase_chi(), atol=1e-9)

    def test_entangle_exact(self, tmp_path):
        run_scenario(Scenario("entangle", out_dir=str(tmp_path), exact=True))
        report = json.loads((tmp_path / "entangle_report.json").read_text())
        assert set(report) == {"plus_plus", "plus_L", "L_L", "L_plus"}
        for values in report.values():
            assert values["fidelity"] >= 1 - 1e-10
            assert values["chsh_max"] == pytest.approx(2 * math.sqrt(2), abs=1e-9)
        rho = qcore.load_matrix(tmp_path / "rho_L_L.json")
        target = (timebin.two_qubit_ket("t1", "L")
                  + 1j * timebin.two_qubit_ket("t2", "R")) / math.sqrt(2)
        assert metrics.state_fidelity(rho, target) >= 1 - 1e-10

    def test_cnot_table_exact(self, tmp_path):
        run_scenario(Scenario("cnot-table", out_dir=str(tmp_path), exact=True))
        report = json.loads((tmp_path / "cnot_report.json").read_text())
        assert report["logic_fidelity_zz"] == pytest.approx(1.0, abs=1e-12)
        assert report["logic_fidelity_xx"] == pytest.approx(1.0, abs=1e-12)
        assert report["cnot_bound_lower"] == pytest.approx(1.0, abs=1e-12)
        assert report["cnot_bound_upper"] == pytest.approx(1.0, abs=1e-12)
        table = np.loadtxt(tmp_path / "cnot_zz.csv", delimiter=",", skiprows=1,
                           usecols=(1, 2, 3, 4))
        assert np.allclose(table, timebin.CNOT_IDEAL_TABLES["zz"], atol=1e-12)

    def test_qst_single_exact(self, tmp_path):
        run_scenario(Scenario("qst-single", out_dir=str(tmp_path), exact=True))
        report = json.loads((tmp_path / "qst_report.json").read_text())
        assert set(report) == {"t1", "t2", "plus", "L"}
        for values in report.values():
            assert values["fidelity"] >= 1 - 1e-9

    def test_noisy_qpt(self, tmp_path):
        config_path = write_config(tmp_path, FAST_NOISY_CONFIG)
        out = tmp_path / "out"
        run_scenario(Scenario("noisy-qpt", config_path, str(out)))
        _assert_matrix_files_valid(out)
        report = json.loads((out / "gate_report.json").read_text())
        for key in ("process_fidelity", "process_fidelity_raw",
                    "input_process_fidelity", "process_fidelity_err",
                    "process_fidelity_raw_err", "average_fidelity",
                    "entangling_capability"):
            assert key in report
        chi = qcore.load_matrix(out / "chi_cphase.json")
        assert np.linalg.eigvalsh(chi).min() >= -1e-10
        assert 0.8 <= report["process_fidelity"] <= 1.0

    def test_deconvolve_scenario(self, tmp_path):
        chi_prep = np.kron(np.diag([0.99, 0, 0, 0.01]),
                           np.diag([0.99, 0, 0, 0.01])).astype(complex)
        chi_input = tomo.compose_processes(tomo.ideal_cphase_chi(), chi_prep)
        chi_total = tomo.compose_processes(tomo.ideal_cphase_chi(), chi_prep)
        qcore.save_matrix(tmp_path / "chi_total.json", chi_total)
        qcore.save_matrix(tmp_path / "chi_input.json", chi_input)
        out = tmp_path / "out"
        run_scenario(Scenario(
            "deconvolve", out_dir=str(out),
            chi_total_path=str(tmp_path / "chi_total.json"),
            chi_input_path=str(tmp_path / "chi_input.json")))
        report = json.loads((out / "gate_report.json").read_text())
        assert report["process_fidelity"] >= 0.999

    def test_deconvolve_requires_paths(self, tmp_path):
        with pytest.raises(ValueError, match="chi-total"):
            run_scenario(Scenario("deconvolve", out_dir=str(tmp_path)))

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ValueError, match="unknown scenario"):
            Scenario("make-coffee")


class TestDeterminism:
    @pytest.mark.parametrize("name", ["qst-single", "cnot-table"])
    def test_same_seed_byte_identical(self, tmp_path, name):
        config_path = write_config(tmp_path, FAST_NOISY_CONFIG)
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            run_scenario(Scenario(name, config_path, str(out), seed=99))
            outs.append(out)
        files_a = sorted(p.name for p in outs[0].iterdir())
        files_b = sorted(p.name for p in outs[1].iterdir())
        assert files_a == files_b
        for fname in files_a:
            assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()


class TestMainEntryPoint:
    def test_success_exit_code(self, tmp_path, capsys):
        code = main(["--scenario", "ideal-qpt", "--out", str(tmp_path)])
        assert code == 0
        assert "gate_report.json" in capsys.readouterr().out

    def test_missing_config_is_clean_error(self, tmp_path, capsys):
        code = main(["--scenario", "ideal-qpt", "--out", str(tmp_path),
                     "--config", str(tmp_path / "nope.json")])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_bad_scenario_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as excinfo:
            main(["--scenario", "bogus", "--out", str(tmp_path)])
        assert excinfo.value.code == 2

    def test_exact_flag_forwarded(self, tmp_path):
        code = main(["--scenario", "entangle", "--out", str(tmp_path), "--exact"])
        assert code == 0
        report = json.loads((tmp_path / "entangle_report.json").read_text())
        assert report["L_L"]["fidelity"] >= 1 - 1e-10
