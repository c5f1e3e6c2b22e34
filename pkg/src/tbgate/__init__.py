"""Time-bin qubit controlled-phase gate simulator and tomography toolkit."""

from .timebin import (
    TimeBinQubit, SwitchSetting, CPHASE_SWITCH, KET_LABELS,
    ket, two_qubit_ket, switch_map, apply_mda, cphase_postselected,
    ideal_cphase_unitary, cnot_via_bases, cnot_truth_table,
)
from .tomo import (
    ProjectorSet, CountRecord, TomographyInputSet, standard_input_set,
    measurement_probabilities, qst_linear_inversion, qst_mle,
    qpt_linear_inversion, qpt_mle, chi_to_superoperator, superoperator_to_chi,
    compose_processes, deconvolve_input_imperfection, build_chi_input,
    preparation_channel_from_input_process, ideal_cphase_chi, chi_from_unitary,
)
from .metrics import (
    GateReport, state_fidelity, process_fidelity, average_gate_fidelity,
    entangling_capability, logic_fidelity, hofmann_bounds, chsh_max,
)
from .expsim import (
    NoiseConfig, SimulatedRun, coincidence_rate_estimate, sample_counts,
    perturb_switch, simulate_gate_experiment,
)

__version__ = "0.1.0"
