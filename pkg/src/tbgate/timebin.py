"""Time-bin qubits, the 2x2 optical switch, and the post-selected C-Phase gate.

A time-bin qubit is a single photon spread over two temporal modes t1 and t2.
The gate hardware is modeled as:

* a mode-dependent attenuator (MDA) merged into state preparation, which
  scales the t1 amplitude by 1/sqrt(3);
* a 2x2 switch acting as a time-dependent beam splitter (TDBS): per time
  slot t_k it applies a real rotation by theta(t_k)/2 between input ports
  A/B and output ports C/D;
* coincidence post-selection keeping only events with one photon at C and
  one photon at D.

With theta(t1) = 0 and theta(t2) = 2*arccos(1/sqrt(3)) the post-selected
two-photon map is exactly a controlled-phase gate with success probability
1/9 for every normalized input pair.

Two-qubit basis ordering is (t1t1, t1t2, t2t1, t2t2), with the photon exiting
port C listed first (the control side).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

PORTS_IN = ("A", "B")
PORTS_OUT = ("C", "D")
TIMES = ("t1", "t2")

#: Basis-label string enum used in configs, CSV files and the CLI.
KET_LABELS = ("t1", "t2", "plus", "minus", "L", "R")

_SQRT_HALF = 1.0 / math.sqrt(2.0)

_KETS = {
    "t1": np.array([1.0, 0.0], dtype=complex),
    "t2": np.array([0.0, 1.0], dtype=complex),
    "plus": np.array([_SQRT_HALF, _SQRT_HALF], dtype=complex),
    "minus": np.array([_SQRT_HALF, -_SQRT_HALF], dtype=complex),
    "L": np.array([_SQRT_HALF, 1j * _SQRT_HALF], dtype=complex),
    "R": np.array([_SQRT_HALF, -1j * _SQRT_HALF], dtype=complex),
}


class InvalidEncoding(ValueError):
    """Basis label violates the requested encoding convention."""


def ket(label: str) -> np.ndarray:
    """Single-qubit state vector for a basis label in :data:`KET_LABELS`."""
    try:
        return _KETS[label].copy()
    except KeyError:
        raise InvalidEncoding(f"unknown basis label {label!r}") from None


def two_qubit_ket(label_a: str, label_b: str) -> np.ndarray:
    return np.kron(ket(label_a), ket(label_b))


@dataclass(frozen=True)
class TimeBinQubit:
    """Normalized single time-bin qubit n1|t1> + n2 e^{i phi}|t2>.

    n1 and n2 are non-negative real amplitudes with n1**2 + n2**2 = 1; phi is
    the relative phase of the second temporal mode in radians.
    """

    n1: float
    n2: float
    phi: float = 0.0

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("amplitudes n1, n2 must be non-negative")
        norm = self.n1 ** 2 + self.n2 ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"qubit not normalized: n1^2+n2^2 = {norm!r}")

    @classmethod
    def from_amplitudes(cls, c1: complex, c2: complex) -> "TimeBinQubit":
        """Build from a complex amplitude pair, dropping the global phase."""
        n1, n2 = abs(c1), abs(c2)
        norm = math.hypot(n1, n2)
        if norm == 0:
            raise ValueError("zero state vector")
        phi = cmath.phase(c2) - cmath.phase(c1) if (n1 > 0 and n2 > 0) else cmath.phase(c2)
        return cls(n1 / norm, n2 / norm, phi)

    @classmethod
    def from_label(cls, label: str) -> "TimeBinQubit":
        v = ket(label)
        return cls.from_amplitudes(v[0], v[1])

    def ket(self) -> np.ndarray:
        return np.array([self.n1, self.n2 * cmath.exp(1j * self.phi)], dtype=complex)

    def with_phase_offset(self, delta: float) -> "TimeBinQubit":
        return TimeBinQubit(self.n1, self.n2, self.phi + delta)

    @property
    def is_superposition(self) -> bool:
        return self.n1 > 1e-12 and self.n2 > 1e-12


@dataclass(frozen=True)
class SwitchSetting:
    """Per-time-slot MZI phase differences theta(t1), theta(t2) in radians."""

    theta_t1: float
    theta_t2: float

    def __post_init__(self):
        if not (math.isfinite(self.theta_t1) and math.isfinite(self.theta_t2)):
            raise ValueError("switch angles must be finite")

    def theta(self, time: str) -> float:
        return self.theta_t1 if time == "t1" else self.theta_t2


#: TDBS setting realizing the gate: pass t1, one-third beam splitter at t2.
CPHASE_SWITCH = SwitchSetting(0.0, 2.0 * math.acos(1.0 / math.sqrt(3.0)))

#: Complementary setting used when the attenuation step is done by a switch.
MDA_SWITCH = SwitchSetting(2.0 * math.acos(1.0 / math.sqrt(3.0)), 0.0)


def switch_map(setting: SwitchSetting, input_port: str, time: str) -> np.ndarray:
    """Amplitudes on output ports (C, D) for a photon entering one input port.

    Port A maps to (cos(theta/2), -sin(theta/2)) and port B to
    (sin(theta/2), cos(theta/2)); each time slot is acted on unitarily.
    """
    if input_port not in PORTS_IN:
        raise ValueError(f"input port must be A or B, got {input_port!r}")
    if time not in TIMES:
        raise ValueError(f"time must be t1 or t2, got {time!r}")
    half = 0.5 * setting.theta(time)
    c, s = math.cos(half), math.sin(half)
    if input_port == "A":
        return np.array([c, -s], dtype=complex)
    return np.array([s, c], dtype=complex)


def apply_mda(q: TimeBinQubit) -> np.ndarray:
    """Prepared (unnormalized) amplitude pair (n1/sqrt(3), n2 e^{i phi}).

    The one-third amplitude attenuation of the t1 mode is merged into state
    preparation; the discarded amplitude shows up later as gate success < 1.
    """
    return np.array([q.n1 / math.sqrt(3.0),
                     q.n2 * cmath.exp(1j * q.phi)], dtype=complex)


def _photon_through_switch(amps_by_time: np.ndarray, input_port: str,
                           setting: SwitchSetting) -> dict[tuple[str, str], complex]:
    """Single-photon output amplitudes over (output port, time) modes."""
    out: dict[tuple[str, str], complex] = {}
    for time, amp in zip(TIMES, amps_by_time):
        if amp == 0:
            continue
        cd = switch_map(setting, input_port, time)
        for port, factor in zip(PORTS_OUT, cd):
            out[(port, time)] = out.get((port, time), 0.0) + amp * factor
    return out


@dataclass
class TwoPhotonState:
    """Unnormalized two-photon amplitude map over (port, time) mode pairs.

    Keys are ``((port_x, time_x), (port_y, time_y))`` with the photon that
    entered port A listed first.  The squared amplitude sum never exceeds one
    (amplitudes originate from sub-normalized single-photon states).
    """

    amplitudes: dict[tuple[tuple[str, str], tuple[str, str]], complex]

    @classmethod
    def from_product(cls, photon_a: dict, photon_b: dict) -> "TwoPhotonState":
        joint = {}
        for mode_a, amp_a in photon_a.items():
            for mode_b, amp_b in photon_b.items():
                joint[(mode_a, mode_b)] = amp_a * amp_b
        return cls(joint)

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def coincidence_cd(self) -> np.ndarray:
        """Post-selected amplitudes on |t_x>_C |t_y>_D, ordered (t1t1..t2t2).

        The two photons are indistinguishable, so the two assignments
        (A-photon at C, B-photon at D) and (B-photon at C, A-photon at D)
        contributing to the same output mode pair are summed coherently.
        """
        amps = np.zeros(4, dtype=complex)
        for i, (tc, td) in enumerate(product(TIMES, TIMES)):
            direct = self.amplitudes.get((("C", tc), ("D", td)), 0.0)
            swapped = self.amplitudes.get((("D", td), ("C", tc)), 0.0)
            amps[i] = direct + swapped
        return amps


def switch_coincidence_amplitudes(amps_a: np.ndarray, amps_b: np.ndarray,
                                  setting: SwitchSetting = CPHASE_SWITCH) -> np.ndarray:
    """Full mode propagation of two photons and coincidence post-selection.

    ``amps_a``/``amps_b`` are (possibly unnormalized) per-time amplitude pairs
    of the photons entering ports A and B.  Returns the raw (unnormalized)
    coincidence amplitudes on C/D in basis order (t1t1, t1t2, t2t1, t2t2).
    """
    photon_a = _photon_through_switch(np.asarray(amps_a, dtype=complex), "A", setting)
    photon_b = _photon_through_switch(np.asarray(amps_b, dtype=complex), "B", setting)
    return TwoPhotonState.from_product(photon_a, photon_b).coincidence_cd()


def cphase_postselected(control: TimeBinQubit, target: TimeBinQubit,
                        setting: SwitchSetting = CPHASE_SWITCH
                        ) -> tuple[np.ndarray, float]:
    """Run both prepared qubits through the switch and post-select coincidences.

    Returns ``(state, success_prob)`` where ``state`` is the normalized
    two-qubit output vector and ``success_prob`` the post-selection
    probability (exactly 1/9 at the nominal setting, for any normalized
    inputs).  The state keeps the propagation phases: relative to the input
    product amplitudes only the |t2t2> component changes sign.
    """
    raw = switch_coincidence_amplitudes(apply_mda(control), apply_mda(target), setting)
    success = float(np.sum(np.abs(raw) ** 2))
    if success <= 0:
        raise ValueError("post-selected amplitude vanished; inputs not normalized?")
    return raw / math.sqrt(success), success


def ideal_cphase_unitary() -> np.ndarray:
    """The target controlled-phase unitary diag(1, 1, 1, -1)."""
    return np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)


def normalize_global_phase(state: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate a state vector so its first non-negligible amplitude is real >= 0."""
    state = np.asarray(state, dtype=complex)
    for amp in state:
        if abs(amp) > tol:
            return state * (amp.conjugate() / abs(amp))
    return state.copy()


# -- CNOT from the C-Phase gate via complementary computational bases --------
#
# zz basis: control logical 0/1 = t1/t2, target logical 0/1 = plus/minus
#           (the +/- encoding plays the role of Hadamards around the gate).
# xx basis: control logical 0/1 = plus/minus, target logical 0/1 = t1/t2;
#           in this basis the roles reverse (the target acts on the control).

CNOT_ENCODINGS = {
    "zz": {"control": ("t1", "t2"), "target": ("plus", "minus")},
    "xx": {"control": ("plus", "minus"), "target": ("t1", "t2")},
}

#: Ideal truth tables (rows = logical inputs 00..11, cols = outcomes 00..11).
CNOT_IDEAL_TABLES = {
    "zz": np.eye(4)[[0, 1, 3, 2]],
    "xx": np.eye(4)[[0, 3, 2, 1]],
}


def cnot_via_bases(control_label: str, target_label: str,
                   measurement_basis: str,
                   setting: SwitchSetting = CPHASE_SWITCH,
                   control_phase_offset: float = 0.0,
                   target_phase_offset: float = 0.0) -> np.ndarray:
    """Outcome probabilities of the encoded CNOT for one input pair.

    The labels must follow the encoding of ``measurement_basis`` ("zz" or
    "xx"); the gate output is projected onto the four logical outcomes of the
    same basis and the probabilities are renormalized to sum to one.  The
    optional phase offsets model preparation error on superposition inputs.
    """
    if measurement_basis not in CNOT_ENCODINGS:
        raise InvalidEncoding(f"measurement basis must be 'zz' or 'xx', got {measurement_basis!r}")
    enc = CNOT_ENCODINGS[measurement_basis]
    if control_label not in enc["control"]:
        raise InvalidEncoding(
            f"control label {control_label!r} not in {enc['control']} for basis {measurement_basis}")
    if target_label not in enc["target"]:
        raise InvalidEncoding(
            f"target label {target_label!r} not in {enc['target']} for basis {measurement_basis}")

    control = TimeBinQubit.from_label(control_label)
    target = TimeBinQubit.from_label(target_label)
    if control.is_superposition:
        control = control.with_phase_offset(control_phase_offset)
    if target.is_superposition:
        target = target.with_phase_offset(target_phase_offset)
    state, _ = cphase_postselected(control, target, setting)

    probs = np.empty(4)
    for i, c_out in enumerate(enc["control"]):
        for j, t_out in enumerate(enc["target"]):
            outcome = two_qubit_ket(c_out, t_out)
            probs[2 * i + j] = abs(np.vdot(outcome, state)) ** 2
    return probs / probs.sum()


def cnot_truth_table(measurement_basis: str,
                     setting: SwitchSetting = CPHASE_SWITCH) -> np.ndarray:
    """4x4 input-output probability table of the encoded CNOT (rows = inputs)."""
    enc = CNOT_ENCODINGS[measurement_basis]
    rows = []
    for c_label in enc["control"]:
        for t_label in enc["target"]:
            rows.append(cnot_via_bases(c_label, t_label, measurement_basis, setting))
    return np.array(rows)
