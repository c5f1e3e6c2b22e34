"""Scalar figures of merit for states, processes and truth tables."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .qcore import PAULI_X, PAULI_Y, PAULI_Z, hermitize, tensor_product


class OutOfRange(ValueError):
    """Scalar argument outside its admissible interval."""


class MalformedTable(ValueError):
    """Truth table rows are not probability distributions."""


class BasisMismatch(ValueError):
    """Matrices with incompatible shapes / basis conventions."""


def _check_unit_interval(name: str, value: float) -> float:
    if not (0.0 <= value <= 1.0):
        raise OutOfRange(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh(hermitize(m))
    return vec @ np.diag(np.sqrt(np.clip(lam, 0.0, None))) @ vec.conj().T


def state_fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    """Fidelity of ``rho`` against a pure state vector or a density matrix.

    Pure targets use <psi|rho|psi>; mixed targets the Uhlmann fidelity
    (Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2.
    """
    rho = np.asarray(rho, dtype=complex)
    target = np.asarray(target, dtype=complex)
    if target.ndim == 1:
        if rho.shape != (target.size, target.size):
            raise BasisMismatch(
                f"state dim {rho.shape} does not match target dim {target.size}")
        return float(np.real(np.vdot(target, rho @ target)))
    if target.shape != rho.shape:
        raise BasisMismatch(f"shapes {rho.shape} and {target.shape} differ")
    root = _sqrtm_psd(rho)
    lam = np.linalg.eigvalsh(hermitize(root @ target @ root))
    # round-off eigenvalues at eps*lam_max would leak ~1e-8 through the sqrt
    lam[lam < 1e-14 * max(lam.max(), 0.0)] = 0.0
    return float(np.sum(np.sqrt(np.clip(lam, 0.0, None))) ** 2)


def process_fidelity(chi: np.ndarray, chi_ideal: np.ndarray) -> float:
    """Overlap Tr(chi_ideal chi) of unit-trace process matrices.

    Exact for rank-1 (unitary-target) ideal matrices; for mixed ideal
    processes the Uhlmann formula on chi is used instead.
    """
    chi = np.asarray(chi, dtype=complex)
    chi_ideal = np.asarray(chi_ideal, dtype=complex)
    if chi.shape != chi_ideal.shape or chi.shape[0] != chi.shape[1]:
        raise BasisMismatch(
            f"process matrices of shapes {chi.shape} and {chi_ideal.shape}")
    lam = np.linalg.eigvalsh(hermitize(chi_ideal))
    if lam[-1] < 1.0 - 1e-9:  # not rank one: fall back to Uhlmann on chi
        return state_fidelity(chi, chi_ideal)
    return float(np.clip(np.real(np.trace(chi_ideal @ chi)), 0.0, 1.0))


def average_gate_fidelity(f_process: float) -> float:
    """Mean output fidelity over pure inputs: (4 F_p + 1) / 5 for two qubits."""
    return (4.0 * _check_unit_interval("process fidelity", f_process) + 1.0) / 5.0


def entangling_capability(f_process: float) -> float:
    """Lower bound max(0, 2 F_p - 1) on the entangling capability."""
    return max(0.0, 2.0 * _check_unit_interval("process fidelity", f_process) - 1.0)


def logic_fidelity(truth_table: np.ndarray, ideal_permutation: np.ndarray) -> float:
    """Average probability of the correct output over all truth-table inputs."""
    table = np.asarray(truth_table, dtype=float)
    ideal = np.asarray(ideal_permutation, dtype=float)
    if table.shape != ideal.shape or table.ndim != 2 or table.shape[0] != table.shape[1]:
        raise MalformedTable(
            f"table shape {table.shape} does not match ideal shape {ideal.shape}")
    if np.any(table < -1e-12):
        raise MalformedTable("truth table has negative entries")
    row_sums = table.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > 1e-9):
        raise MalformedTable(f"rows must sum to 1, got {row_sums}")
    return float(np.mean(np.sum(table * ideal, axis=1)))


def hofmann_bounds(f_zz: float, f_xx: float) -> tuple[float, float]:
    """Truth-table bounds (F_zz + F_xx - 1, min(F_zz, F_xx)) on process fidelity."""
    _check_unit_interval("F_zz", f_zz)
    _check_unit_interval("F_xx", f_xx)
    return (f_zz + f_xx - 1.0, min(f_zz, f_xx))


def correlation_matrix(rho: np.ndarray) -> np.ndarray:
    """3x3 two-qubit Pauli correlation matrix T[a, b] = Tr(rho sigma_a x sigma_b)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise BasisMismatch(f"need a two-qubit state, got shape {rho.shape}")
    paulis = (PAULI_X, PAULI_Y, PAULI_Z)
    t = np.empty((3, 3))
    for a, sig_a in enumerate(paulis):
        for b, sig_b in enumerate(paulis):
            t[a, b] = np.real(np.trace(rho @ tensor_product(sig_a, sig_b)))
    return t


def chsh_max(rho: np.ndarray) -> float:
    """Largest CHSH value over measurement settings (Horodecki criterion).

    Equals 2 sqrt(s1^2 + s2^2) with s1, s2 the two largest singular values of
    the correlation matrix; values above 2 certify a Bell violation, and the
    Tsirelson bound 2 sqrt(2) caps all physical states.
    """
    svals = np.linalg.svd(correlation_matrix(rho), compute_uv=False)
    return float(2.0 * math.sqrt(svals[0] ** 2 + svals[1] ** 2))


@dataclass
class GateReport:
    """Flat summary of gate metrics, mirroring the headline numbers.

    ``process_fidelity`` refers to the input-compensated gate when a raw /
    compensated pair is available; derived fields follow the affine formulas
    F_avg = (4 F_p + 1)/5 and C = max(0, 2 F_p - 1).
    """

    process_fidelity: float
    average_fidelity: float
    entangling_capability: float
    process_fidelity_raw: float | None = None
    input_process_fidelity: float | None = None
    process_fidelity_err: float | None = None
    process_fidelity_raw_err: float | None = None
    logic_fidelity_zz: float | None = None
    logic_fidelity_xx: float | None = None
    cnot_bound_lower: float | None = None
    cnot_bound_upper: float | None = None

    @classmethod
    def from_process_fidelity(cls, f_process: float, **kwargs) -> "GateReport":
        return cls(process_fidelity=f_process,
                   average_fidelity=average_gate_fidelity(f_process),
                   entangling_capability=entangling_capability(f_process),
                   **kwargs)

    def __post_init__(self):
        if self.cnot_bound_lower is not None and self.cnot_bound_upper is not None:
            if self.cnot_bound_lower > self.cnot_bound_upper + 1e-12:
                raise ValueError("cnot bounds out of order")

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=1))
