"""Command-line harness: scenario pipelines, file I/O, reports.

Scenarios
    ideal-qpt   exact-probability process tomography of the noise-free gate
    noisy-qpt   full pipeline with counting noise: raw chi, input chi,
                input-compensated gate chi, bootstrap error bars
    entangle    gate outputs for the four entangling inputs (++, +L, LL, L+)
    cnot-table  encoded-CNOT truth tables in the zz and xx bases plus bounds
    qst-single  single-qubit state tomography of prepared inputs
    deconvolve  strip a measured input process from a measured total process

Every matrix lands in the repo-wide JSON schema (rows/cols/re/im) with a
``basis_ordering`` annotation; scalar reports are flat JSON.  All floats are
rounded to 12 significant digits so identical seeds give byte-identical
artifacts.  Verbosity is controlled by the ``TIMEBIN_LOG`` env var.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import expsim, metrics, qcore, timebin, tomo

log = logging.getLogger("tbgate")

SCENARIOS = ("ideal-qpt", "noisy-qpt", "entangle", "cnot-table",
             "qst-single", "deconvolve")

#: Scenario-level knobs accepted in config files next to NoiseConfig fields.
DEFAULT_SCENARIO_PARAMS = {
    "gate_duration_s": 10_000.0,
    "input_duration_s": 40_000.0,
    "single_qubit_duration_s": 2_000.0,
    "cnot_duration_s": 10_000.0,
    "bootstrap_replicas": 100,
    "projector_mode": "full",
}

ENTANGLE_INPUTS = (("plus", "plus"), ("plus", "L"), ("L", "L"), ("L", "plus"))


class ParseError(ValueError):
    """Malformed counts file; message carries the offending line number."""


@dataclass
class Scenario:
    name: str
    config_path: str | None = None
    out_dir: str = "."
    seed: int | None = None
    exact: bool = False
    chi_total_path: str | None = None
    chi_input_path: str | None = None

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.name!r}; choose from {SCENARIOS}")


# -- deterministic serialization -------------------------------------------------

def _round_sig(x: float, sig: int = 12) -> float:
    return float(f"{x:.{sig}g}")


def _round_tree(obj):
    if isinstance(obj, float):
        return _round_sig(obj)
    if isinstance(obj, dict):
        return {k: _round_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_tree(v) for v in obj]
    return obj


def emit_json(path: Path, obj: dict) -> Path:
    path.write_text(json.dumps(_round_tree(obj), sort_keys=True, indent=1) + "\n")
    return path


def emit_matrix(path: Path, m: np.ndarray, basis_ordering: list[str]) -> Path:
    doc = qcore.matrix_to_json(m, basis_ordering=list(basis_ordering))
    return emit_json(path, doc)


def emit_bars_csv(path: Path, m: np.ndarray, labels: list[str]) -> Path:
    """Bar-chart values of a matrix: one row per entry with real/imag parts."""
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row", "col", "re", "im"])
        for i, ri in enumerate(labels):
            for j, cj in enumerate(labels):
                writer.writerow([ri, cj, f"{m[i, j].real:.12g}", f"{m[i, j].imag:.12g}"])
    return path


_TWO_QUBIT_BASIS = ["t1t1", "t1t2", "t2t1", "t2t2"]
_ONE_QUBIT_BASIS = ["t1", "t2"]


def _state_basis(dim: int) -> list[str]:
    return _ONE_QUBIT_BASIS if dim == 2 else _TWO_QUBIT_BASIS


# -- counts files -----------------------------------------------------------------

COUNTS_HEADER = ["setting_label", "input_label", "counts", "duration_s"]


def write_counts(path: Path, runs: list[expsim.SimulatedRun],
                 projs: tomo.ProjectorSet) -> Path:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COUNTS_HEADER)
        for run in runs:
            input_label = "_".join(run.input_label)
            for rec in run.records:
                setting = "_".join(projs.labels[rec.setting_index])
                counts = int(rec.counts) if float(rec.counts).is_integer() \
                    else f"{rec.counts:.12g}"
                writer.writerow([setting, input_label, counts,
                                 f"{rec.duration_s:.12g}"])
    return path


def _parse_label(text: str, line_no: int) -> tuple[str, ...]:
    parts = tuple(text.split("_"))
    for part in parts:
        if part not in timebin.KET_LABELS:
            raise ParseError(f"line {line_no}: unknown basis label {part!r}")
    return parts


def ingest_counts(path) -> tuple[dict[str, list[tomo.CountRecord]], tomo.ProjectorSet]:
    """Parse a counts CSV back into per-input CountRecord lists.

    The setting labels must form one of the standard projector sets; rows are
    validated strictly (labels, non-negative counts, sane durations) and
    errors carry the line number.
    """
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != COUNTS_HEADER:
            raise ParseError(f"line 1: expected header {','.join(COUNTS_HEADER)}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"line {line_no}: expected 4 fields, got {len(row)}")
            setting = _parse_label(row[0], line_no)
            input_label = row[1]
            if input_label:
                _parse_label(input_label, line_no)
            try:
                counts = float(row[2])
                duration = float(row[3])
            except ValueError as exc:
                raise ParseError(f"line {line_no}: {exc}") from None
            if counts < 0:
                raise ParseError(f"line {line_no}: negative count {row[2]}")
            if duration < 0:
                raise ParseError(f"line {line_no}: negative duration {row[3]}")
            rows.append((setting, input_label, counts, duration, line_no))

    if not rows:
        raise ParseError("line 2: file contains no count rows")
    n_qubits = len(rows[0][0])
    for mode in ("full", "minimal"):
        projs = tomo.ProjectorSet.standard(n_qubits, mode)
        if {r[0] for r in rows} == set(projs.labels):
            break
    else:
        raise ParseError("line 2: setting labels do not form a standard projector set")

    by_input: dict[str, list[tomo.CountRecord]] = {}
    for setting, input_label, counts, duration, line_no in rows:
        rec = tomo.CountRecord(projs.index_of(setting), counts, duration)
        group = by_input.setdefault(input_label, [])
        if any(r.setting_index == rec.setting_index for r in group):
            raise ParseError(f"line {line_no}: duplicate setting for input "
                             f"{input_label!r}")
        group.append(rec)
    return by_input, projs


# -- config loading ----------------------------------------------------------------

def load_config(path: str | None, seed_override: int | None = None
                ) -> tuple[expsim.NoiseConfig, dict]:
    """Read a JSON/TOML config holding NoiseConfig fields plus scenario knobs."""
    doc = {}
    if path is not None:
        raw = Path(path).read_bytes()
        if str(path).endswith(".toml"):
            try:
                import tomllib  # py >= 3.11
            except ModuleNotFoundError:
                import tomli as tomllib
            doc = tomllib.loads(raw.decode())
        else:
            doc = json.loads(raw.decode())
    params = dict(DEFAULT_SCENARIO_PARAMS)
    noise_doc = {}
    noise_fields = set(expsim.NoiseConfig.__dataclass_fields__)
    for key, value in doc.items():
        if key in noise_fields:
            noise_doc[key] = value
        elif key in params:
            params[key] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    config = expsim.NoiseConfig.from_dict(noise_doc)
    if seed_override is not None:
        config = replace(config, seed=seed_override)
    return config, params


# -- reconstruction pipelines --------------------------------------------------------

def reconstruct_states(runs: list[expsim.SimulatedRun], projs: tomo.ProjectorSet,
                       use_mle: bool = True) -> list[np.ndarray]:
    """Per-run density matrices (MLE for counts, linear inversion for exact)."""
    rhos = []
    for run in runs:
        counts = run.counts()
        if run.exact or not use_mle:
            rhos.append(qcore.nearest_psd(tomo.qst_linear_inversion(counts, projs)))
        else:
            rhos.append(tomo.qst_mle(counts, projs))
    return rhos


def run_noisy_qpt_pipeline(config: expsim.NoiseConfig, *,
                           gate_duration_s: float = 10_000.0,
                           input_duration_s: float = 40_000.0,
                           projs: tomo.ProjectorSet | None = None,
                           exact: bool = False) -> dict:
    """One full gate characterization: raw chi, input chi, compensated chi.

    Returns a dict with the three process matrices, the per-input data, and
    the headline fidelities (raw, input, compensated).
    """
    projs = projs or tomo.ProjectorSet.standard(2, "full")
    inputs = tomo.standard_input_set()

    gate_runs = expsim.simulate_gate_experiment(
        inputs, config, projs=projs, duration_s=gate_duration_s, exact=exact)
    output_rhos = reconstruct_states(gate_runs, projs)
    chi_raw = tomo.qpt_mle(output_rhos)

    input_runs = []
    for idx, label_pair in enumerate(inputs.labels):
        rng = np.random.default_rng([config.seed, 1000 + idx])
        input_runs.append(expsim.simulate_product_state_qst(
            label_pair, config, projs=projs, duration_s=input_duration_s,
            rng=rng, exact=exact))
    measured_inputs = reconstruct_states(input_runs, projs)
    chi_input = tomo.build_chi_input(measured_inputs)
    chi_prep = tomo.preparation_channel_from_input_process(chi_input)
    chi_gate = tomo.deconvolve_input_imperfection(chi_raw, chi_prep)

    chi_ideal = tomo.ideal_cphase_chi()
    return {
        "gate_runs": gate_runs,
        "input_runs": input_runs,
        "output_rhos": output_rhos,
        "measured_inputs": measured_inputs,
        "chi_raw": chi_raw,
        "chi_input": chi_input,
        "chi_gate": chi_gate,
        "f_raw": metrics.process_fidelity(chi_raw, chi_ideal),
        "f_input": metrics.process_fidelity(chi_input, chi_ideal),
        "f_gate": metrics.process_fidelity(chi_gate, chi_ideal),
        "projs": projs,
    }


def _refit_from_counts(gate_counts: np.ndarray, input_counts: np.ndarray,
                       projs: tomo.ProjectorSet) -> tuple[float, float]:
    """Raw and compensated process fidelity from one set of count tables."""
    output_rhos = [tomo.qst_mle(row, projs) for row in gate_counts]
    chi_raw = tomo.qpt_mle(output_rhos)
    measured = [tomo.qst_mle(row, projs) for row in input_counts]
    chi_input = tomo.build_chi_input(measured)
    chi_prep = tomo.preparation_channel_from_input_process(chi_input)
    chi_gate = tomo.deconvolve_input_imperfection(chi_raw, chi_prep)
    chi_ideal = tomo.ideal_cphase_chi()
    return (metrics.process_fidelity(chi_raw, chi_ideal),
            metrics.process_fidelity(chi_gate, chi_ideal))


def bootstrap_gate_fidelities(result: dict, n_replicas: int,
                              seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Parametric bootstrap of (raw, compensated) process fidelity.

    Counts are redrawn as Poisson around the observed values and the whole
    reconstruction (state MLE, chi fit, input deconvolution) is repeated.
    """
    projs = result["projs"]
    gate_counts = np.array([run.counts() for run in result["gate_runs"]])
    input_counts = np.array([run.counts() for run in result["input_runs"]])
    rng = np.random.default_rng([result["gate_runs"][0].config.seed, 77])
    raw = np.empty(n_replicas)
    comp = np.empty(n_replicas)
    for r in range(n_replicas):
        g = rng.poisson(gate_counts)
        i = rng.poisson(input_counts)
        raw[r], comp[r] = _refit_from_counts(g, i, projs)
    return raw, comp


def noisy_qpt_study(base_config: expsim.NoiseConfig, n_runs: int, *,
                    gate_duration_s: float = 10_000.0,
                    input_duration_s: float = 40_000.0) -> dict:
    """Repeat the noisy pipeline over seeds; distributions of the fidelities."""
    raw = np.empty(n_runs)
    gate = np.empty(n_runs)
    f_input = np.empty(n_runs)
    for r in range(n_runs):
        config = replace(base_config, seed=base_config.seed + r)
        result = run_noisy_qpt_pipeline(config,
                                        gate_duration_s=gate_duration_s,
                                        input_duration_s=input_duration_s)
        raw[r], gate[r], f_input[r] = result["f_raw"], result["f_gate"], result["f_input"]
    return {"f_raw": raw, "f_gate": gate, "f_input": f_input,
            "improved": gate >= raw}


# -- scenarios ------------------------------------------------------------------------

def _chi_labels() -> list[str]:
    return qcore.pauli_labels(2)


def _scenario_ideal_qpt(scenario, config, params, out: Path) -> list[Path]:
    projs = tomo.ProjectorSet.standard(2, params["projector_mode"])
    runs = expsim.simulate_gate_experiment(None, config, projs=projs,
                                           duration_s=0.0, exact=True)
    rhos = reconstruct_states(runs, projs)
    chi = tomo.qpt_mle(rhos)
    chi_ideal = tomo.ideal_cphase_chi()
    f_p = metrics.process_fidelity(chi, chi_ideal)
    report = metrics.GateReport.from_process_fidelity(f_p)
    written = [
        emit_matrix(out / "chi_reconstructed.json", chi, _chi_labels()),
        emit_matrix(out / "chi_ideal.json", chi_ideal, _chi_labels()),
        emit_bars_csv(out / "chi_reconstructed_bars.csv", chi, _chi_labels()),
        emit_json(out / "gate_report.json", report.to_dict()),
        write_counts(out / "gate_counts.csv", runs, projs),
    ]
    log.info("ideal-qpt: F_p = %.12f", f_p)
    return written


def _scenario_noisy_qpt(scenario, config, params, out: Path) -> list[Path]:
    projs = tomo.ProjectorSet.standard(2, params["projector_mode"])
    result = run_noisy_qpt_pipeline(
        config, gate_duration_s=params["gate_duration_s"],
        input_duration_s=params["input_duration_s"], projs=projs,
        exact=scenario.exact)
    report = metrics.GateReport.from_process_fidelity(
        result["f_gate"], process_fidelity_raw=result["f_raw"],
        input_process_fidelity=result["f_input"])
    n_boot = int(params["bootstrap_replicas"])
    if n_boot > 0 and not scenario.exact:
        raw_boot, comp_boot = bootstrap_gate_fidelities(result, n_boot, config.seed)
        report.process_fidelity_raw_err = float(np.std(raw_boot))
        report.process_fidelity_err = float(np.std(comp_boot))
    written = [
        emit_matrix(out / "chi_mle.json", result["chi_raw"], _chi_labels()),
        emit_matrix(out / "chi_input.json", result["chi_input"], _chi_labels()),
        emit_matrix(out / "chi_cphase.json", result["chi_gate"], _chi_labels()),
        emit_bars_csv(out / "chi_cphase_bars.csv", result["chi_gate"], _chi_labels()),
        emit_json(out / "gate_report.json", report.to_dict()),
        write_counts(out / "gate_counts.csv", result["gate_runs"], projs),
        write_counts(out / "input_counts.csv", result["input_runs"], projs),
    ]
    log.info("noisy-qpt: F_raw = %.4f, F_input = %.4f, F_gate = %.4f",
             result["f_raw"], result["f_input"], result["f_gate"])
    return written


def _scenario_entangle(scenario, config, params, out: Path) -> list[Path]:
    projs = tomo.ProjectorSet.standard(2, params["projector_mode"])
    inputs = tomo.TomographyInputSet(ENTANGLE_INPUTS)
    runs = expsim.simulate_gate_experiment(
        inputs, config, projs=projs,
        duration_s=0.0 if scenario.exact else params["gate_duration_s"],
        exact=scenario.exact)
    rhos = reconstruct_states(runs, projs)
    written = []
    report = {}
    for run, rho in zip(runs, rhos):
        name = "_".join(run.input_label)
        target, _ = timebin.cphase_postselected(
            timebin.TimeBinQubit.from_label(run.input_label[0]),
            timebin.TimeBinQubit.from_label(run.input_label[1]))
        fid = metrics.state_fidelity(rho, target)
        chsh = metrics.chsh_max(rho)
        report[name] = {"fidelity": fid, "chsh_max": chsh}
        written.append(emit_matrix(out / f"rho_{name}.json", rho, _state_basis(4)))
        written.append(emit_bars_csv(out / f"rho_{name}_bars.csv", rho,
                                     _state_basis(4)))
        log.info("entangle %s: F = %.6f, CHSH = %.6f", name, fid, chsh)
    written.append(emit_json(out / "entangle_report.json", report))
    written.append(write_counts(out / "entangle_counts.csv", runs, projs))
    return written


def _scenario_cnot_table(scenario, config, params, out: Path) -> list[Path]:
    tables = {}
    for basis in ("zz", "xx"):
        rng = np.random.default_rng([config.seed, {"zz": 7, "xx": 8}[basis]])
        tables[basis] = expsim.simulate_cnot_table(
            basis, config, duration_s=params["cnot_duration_s"], rng=rng,
            exact=scenario.exact)
    f_zz = metrics.logic_fidelity(tables["zz"], timebin.CNOT_IDEAL_TABLES["zz"])
    f_xx = metrics.logic_fidelity(tables["xx"], timebin.CNOT_IDEAL_TABLES["xx"])
    lower, upper = metrics.hofmann_bounds(f_zz, f_xx)
    report = {"logic_fidelity_zz": f_zz, "logic_fidelity_xx": f_xx,
              "cnot_bound_lower": lower, "cnot_bound_upper": upper,
              "entangling_capability_lower": metrics.entangling_capability(
                  max(lower, 0.0))}
    written = []
    for basis, table in tables.items():
        path = out / f"cnot_{basis}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["input"] + [f"out_{b:02b}" for b in range(4)])
            for i in range(4):
                writer.writerow([f"in_{i:02b}"] +
                                [f"{table[i, j]:.12g}" for j in range(4)])
        written.append(path)
    written.append(emit_json(out / "cnot_report.json", report))
    log.info("cnot-table: F_zz = %.4f, F_xx = %.4f, bounds (%.4f, %.4f)",
             f_zz, f_xx, lower, upper)
    return written


def _scenario_qst_single(scenario, config, params, out: Path) -> list[Path]:
    projs = tomo.ProjectorSet.standard(1, params["projector_mode"])
    written = []
    report = {}
    for idx, label in enumerate(tomo.INPUT_LABELS):
        rng = np.random.default_rng([config.seed, 2000 + idx])
        run = expsim.simulate_single_qubit_qst(
            label, config, projs=projs,
            duration_s=params["single_qubit_duration_s"], rng=rng,
            exact=scenario.exact)
        rho = reconstruct_states([run], projs)[0]
        fid = metrics.state_fidelity(rho, timebin.ket(label))
        report[label] = {"fidelity": fid}
        written.append(emit_matrix(out / f"rho_{label}.json", rho,
                                   _state_basis(2)))
        log.info("qst-single %s: F = %.6f", label, fid)
    written.append(emit_json(out / "qst_report.json", report))
    return written


def _scenario_deconvolve(scenario, config, params, out: Path) -> list[Path]:
    if not scenario.chi_total_path or not scenario.chi_input_path:
        raise ValueError("deconvolve needs --chi-total and --chi-input files")
    chi_total = qcore.load_matrix(scenario.chi_total_path)
    chi_input = qcore.load_matrix(scenario.chi_input_path)
    chi_prep = tomo.preparation_channel_from_input_process(chi_input)
    chi_gate = tomo.deconvolve_input_imperfection(chi_total, chi_prep)
    f_p = metrics.process_fidelity(chi_gate, tomo.ideal_cphase_chi())
    report = metrics.GateReport.from_process_fidelity(
        f_p, process_fidelity_raw=metrics.process_fidelity(
            chi_total, tomo.ideal_cphase_chi()))
    return [
        emit_matrix(out / "chi_gate.json", chi_gate, _chi_labels()),
        emit_json(out / "gate_report.json", report.to_dict()),
    ]


_SCENARIO_RUNNERS = {
    "ideal-qpt": _scenario_ideal_qpt,
    "noisy-qpt": _scenario_noisy_qpt,
    "entangle": _scenario_entangle,
    "cnot-table": _scenario_cnot_table,
    "qst-single": _scenario_qst_single,
    "deconvolve": _scenario_deconvolve,
}


def run_scenario(scenario: Scenario) -> list[Path]:
    """Execute one scenario; returns the list of written artifact paths."""
    config, params = load_config(scenario.config_path, scenario.seed)
    out = Path(scenario.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = _SCENARIO_RUNNERS[scenario.name](scenario, config, params, out)
    missing = [str(p) for p in written if not Path(p).exists()]
    if missing:
        raise RuntimeError(f"artifacts not written: {missing}")
    return written


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("TIMEBIN_LOG", "WARNING"))
    parser = argparse.ArgumentParser(
        prog="tbgate",
        description="Time-bin controlled-phase gate simulator and tomography toolkit")
    parser.add_argument("--scenario", required=True, choices=SCENARIOS)
    parser.add_argument("--config", default=None, help="JSON/TOML config file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--exact", action="store_true",
                        help="infinite-statistics mode (no sampling noise)")
    parser.add_argument("--chi-total", default=None,
                        help="measured total-process chi file (deconvolve)")
    parser.add_argument("--chi-input", default=None,
                        help="measured input-process chi file (deconvolve)")
    args = parser.parse_args(argv)

    scenario = Scenario(args.scenario, args.config, args.out, args.seed,
                        args.exact, args.chi_total, args.chi_input)
    try:
        written = run_scenario(scenario)
    except Exception as exc:  # surface a clean one-line failure; exit nonzero
        print(f"tbgate: error: {exc}", file=sys.stderr)
        log.debug("scenario failed", exc_info=True)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
