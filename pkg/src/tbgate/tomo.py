"""Quantum state and process tomography with physical (MLE) reconstruction.

State tomography
    * linear inversion: scale-invariant least squares over a Hermitian
      operator basis, unit trace enforced, output may be non-PSD;
    * MLE: conditional multinomial log-likelihood (per-acquisition flux
      profiled out) maximized over a Cholesky-style parameterization
      rho = T†T / Tr(T†T) by analytic-gradient ascent with backtracking
      line search, seeded from (PSD-projected) linear inversion.

Process tomography
    The channel is expanded over the lexicographic Pauli-product basis,
    E(rho) = sum_mn chi[m, n] A_m rho A_n†, and chi is normalized to unit
    trace.  Reconstruction runs per-input state tomography followed by a
    linear solve for chi; the physical (PSD) chi is obtained either by exact
    Frobenius projection (when starting from reconstructed density matrices)
    or by joint likelihood maximization over Cholesky parameters of chi (when
    starting from raw counts).

Superoperators use row-major vec: S @ vec(rho) = vec(E(rho)).  Composition,
inversion (deconvolution of input imperfections) and the chi <-> S maps are
exact linear-algebra identities on this convention.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import qcore, timebin
from .qcore import hermitize, pauli_basis, project_to_unit_trace_psd

#: Per-qubit preparation labels spanning the single-qubit operator space.
INPUT_LABELS = ("t1", "t2", "plus", "L")

#: Per-qubit measurement labels of the full (overcomplete) projector set.
FULL_MEASUREMENT_LABELS = ("t1", "t2", "plus", "minus", "L", "R")


class DimensionMismatch(ValueError):
    """Operator dimensions are inconsistent."""


class SingularDesign(ValueError):
    """Projector set is not informationally complete."""


class IncompleteInputSet(ValueError):
    """Process tomography needs all sixteen two-qubit input states."""


class BasisMismatch(ValueError):
    """Operators expressed in incompatible bases."""


class IllConditioned(ValueError):
    """Superoperator too ill-conditioned to invert."""

    def __init__(self, message: str, condition_number: float):
        super().__init__(message)
        self.condition_number = condition_number


class NonConvergence(RuntimeError):
    """Likelihood maximization hit the iteration limit.

    Carries the best iterate found (``result`` attribute) for diagnostics.
    """

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


# -- measurement settings ------------------------------------------------------

@dataclass(frozen=True)
class ProjectorSet:
    """Ordered rank-1 projector settings built from per-qubit basis kets."""

    n_qubits: int
    labels: tuple[tuple[str, ...], ...]

    @classmethod
    def standard(cls, n_qubits: int, mode: str = "full") -> "ProjectorSet":
        """The default tomography settings.

        ``mode="full"`` uses all six per-qubit kets (6 or 36 projectors);
        ``mode="minimal"`` uses the four preparation kets (4 or 16), the
        smallest informationally complete choice.
        """
        if mode == "full":
            per_qubit = FULL_MEASUREMENT_LABELS
        elif mode == "minimal":
            per_qubit = INPUT_LABELS
        else:
            raise ValueError(f"mode must be 'full' or 'minimal', got {mode!r}")
        if n_qubits == 1:
            labels = tuple((lab,) for lab in per_qubit)
        elif n_qubits == 2:
            labels = tuple((a, b) for a in per_qubit for b in per_qubit)
        else:
            raise ValueError("n_qubits must be 1 or 2")
        return cls(n_qubits, labels)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @functools.cached_property
    def matrices(self) -> np.ndarray:
        """Stacked projectors, shape (n_settings, dim, dim)."""
        mats = []
        for label in self.labels:
            v = timebin.ket(label[0])
            for extra in label[1:]:
                v = np.kron(v, timebin.ket(extra))
            mats.append(np.outer(v, v.conj()))
        out = np.array(mats)
        out.setflags(write=False)
        return out

    def label_strings(self) -> list[str]:
        return ["_".join(label) for label in self.labels]

    def index_of(self, label: tuple[str, ...]) -> int:
        return self.labels.index(tuple(label))


@dataclass(frozen=True)
class CountRecord:
    """Measured coincidences for one projector setting.

    ``counts`` is a non-negative integer for sampled data; exact-probability
    (infinite statistics) simulations store the Born probability instead,
    which every reconstruction here accepts because the estimators are
    invariant under an overall count scale.
    """

    setting_index: int
    counts: float
    duration_s: float

    def __post_init__(self):
        if self.setting_index < 0:
            raise ValueError("setting_index must be non-negative")
        if not (self.counts >= 0):
            raise ValueError(f"counts must be non-negative, got {self.counts!r}")
        if not (self.duration_s >= 0):
            raise ValueError("duration_s must be non-negative")


def counts_vector(records, n_settings: int) -> np.ndarray:
    """Collect records into a per-setting vector; each setting exactly once."""
    if isinstance(records, np.ndarray) or (
            records and not isinstance(records[0], CountRecord)):
        vec = np.asarray(records, dtype=float)
        if vec.shape != (n_settings,):
            raise ValueError(f"expected {n_settings} values, got shape {vec.shape}")
        return vec
    vec = np.full(n_settings, -1.0)
    for rec in records:
        if rec.setting_index >= n_settings:
            raise ValueError(f"setting_index {rec.setting_index} out of range")
        if vec[rec.setting_index] >= 0:
            raise ValueError(f"duplicate record for setting {rec.setting_index}")
        vec[rec.setting_index] = rec.counts
    if np.any(vec < 0):
        missing = int(np.nonzero(vec < 0)[0][0])
        raise ValueError(f"no record for setting {missing}")
    return vec


def measurement_probabilities(rho: np.ndarray, projs: ProjectorSet) -> np.ndarray:
    """Born-rule probabilities Tr(P_k rho) for every setting."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (projs.dim, projs.dim):
        raise DimensionMismatch(
            f"state shape {rho.shape} does not match projector dim {projs.dim}")
    p = np.einsum("kij,ji->k", projs.matrices, rho).real
    return np.clip(p, 0.0, None)


# -- state tomography ----------------------------------------------------------

@functools.lru_cache(maxsize=8)
def _hermitian_operator_basis(dim: int) -> np.ndarray:
    """Orthonormal (Frobenius) basis of dim x dim Hermitian matrices."""
    ops = []
    for i in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[i, i] = 1.0
        ops.append(e)
    for i in range(dim):
        for j in range(i + 1, dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = e[j, i] = 1.0 / math.sqrt(2.0)
            ops.append(e)
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = -1j / math.sqrt(2.0)
            e[j, i] = 1j / math.sqrt(2.0)
            ops.append(e)
    out = np.array(ops)
    out.setflags(write=False)
    return out


def qst_linear_inversion(records, projs: ProjectorSet) -> np.ndarray:
    """Least-squares state estimate: Hermitian, unit trace, possibly non-PSD.

    Works on raw counts (any overall scale) or exact probabilities: the
    measured vector is fit as ``scale * Tr(P_k rho)`` over a Hermitian
    operator basis and the trace is normalized afterwards.
    """
    values = counts_vector(records, len(projs))
    basis = _hermitian_operator_basis(projs.dim)
    design = np.einsum("kij,aji->ka", projs.matrices, basis).real
    if np.linalg.matrix_rank(design, tol=1e-10) < projs.dim ** 2:
        raise SingularDesign(
            f"projector set of rank < {projs.dim ** 2} cannot determine the state")
    coeff, *_ = np.linalg.lstsq(design, values, rcond=None)
    rho = np.einsum("a,aij->ij", coeff, basis)
    trace = np.trace(rho).real
    if abs(trace) < 1e-30:
        raise ValueError("reconstructed operator has vanishing trace")
    return hermitize(rho / trace)


@dataclass
class MLEInfo:
    """Diagnostics of one likelihood maximization run."""

    ll_history: np.ndarray
    n_iter: int
    converged: bool
    final_step: float
    params: np.ndarray = field(repr=False, default=None)


def _maximize_likelihood(counts: np.ndarray, effects: np.ndarray, t0: np.ndarray,
                         dim: int, max_iter: int = 100_000,
                         ll_rtol: float = 1e-10, step_tol: float = 1e-8,
                         groups: np.ndarray | None = None,
                         ) -> tuple[np.ndarray, MLEInfo]:
    """Gradient ascent with backtracking for the conditional count likelihood.

    Maximizes sum_k counts_k log(p_k / S_g(k)) with p_k = Tr(E_k rho(t)) and
    S_g the total probability mass of the acquisition group of setting k
    (one group per tomography input; the overall flux of each group is
    profiled out, as appropriate for post-selected counting data).  For
    settings forming complete bases S_g is parameter independent and the
    term is inert.

    rho(t) = T†T / Tr(T†T) over the packed lower-triangular parameters of
    :mod:`tbgate.qcore`.  Only improving steps are accepted, so the recorded
    log-likelihood history is non-decreasing by construction.
    """
    counts = np.asarray(counts, dtype=float)
    n_eff = len(effects)
    if groups is None:
        groups = np.zeros(n_eff, dtype=int)
    groups = np.asarray(groups, dtype=int)
    n_groups = int(groups.max()) + 1
    group_counts = np.bincount(groups, weights=counts, minlength=n_groups)
    mask = counts > 0
    counts_m = counts[mask]
    dim2 = dim * dim
    rows, cols = qcore._lower_index_arrays(dim)
    # Tr(E_k rho) as a flat matvec: row k of effects_flat is E_k transposed.
    effects_flat = np.ascontiguousarray(
        effects.transpose(0, 2, 1).reshape(n_eff, dim2))
    eye = np.eye(dim)

    def state(t):
        T = qcore.cholesky_matrix_from_params(t, dim)
        gram = T.conj().T @ T
        norm = gram.diagonal().sum().real
        return T, norm, gram / norm

    def loglike(rho):
        p = (effects_flat @ rho.ravel()).real
        np.clip(p, 1e-300, None, out=p)
        group_mass = np.bincount(groups, weights=p, minlength=n_groups)
        ll = float(counts_m @ np.log(p[mask]) - group_counts @ np.log(group_mass))
        return ll, p, group_mass

    def gradient(T, norm, rho, p, group_mass):
        w = np.zeros(n_eff)
        w[mask] = counts_m / p[mask]
        w -= (group_counts / group_mass)[groups]
        R = (w @ effects_flat).reshape(dim, dim).T
        Rp = R - (R.T.ravel() @ rho.ravel()).real * eye
        M = Rp @ T.conj().T
        grad = np.empty(dim2)
        grad[:dim] = (2.0 / norm) * np.diag(M).real
        vals = M[cols, rows]
        grad[dim::2] = (2.0 / norm) * vals.real
        grad[dim + 1::2] = -(2.0 / norm) * vals.imag
        return grad

    t = np.asarray(t0, dtype=float)
    t = t / np.linalg.norm(t)
    T, norm, rho = state(t)
    ll, p, mass = loglike(rho)
    history = [ll]
    step = 1.0
    converged = False
    n_iter = 0

    for n_iter in range(1, max_iter + 1):
        grad = gradient(T, norm, rho, p, mass)
        gnorm2 = float(grad @ grad)
        if gnorm2 < 1e-28:
            converged = True
            break
        accepted = False
        while step >= 1e-18:
            t_try = t + step * grad
            T_try, norm_try, rho_try = state(t_try)
            ll_try, p_try, mass_try = loglike(rho_try)
            if ll_try >= ll + 1e-4 * step * gnorm2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True  # no float-representable ascent direction left
            break
        param_step = step * math.sqrt(gnorm2)
        delta_ll = ll_try - ll
        # Renormalizing t leaves rho (hence the likelihood) unchanged.
        scale = np.linalg.norm(t_try)
        t = t_try / scale
        T, norm = T_try / scale, norm_try / scale ** 2
        rho, ll, p, mass = rho_try, ll_try, p_try, mass_try
        history.append(ll)
        if delta_ll <= ll_rtol * max(1.0, abs(ll)) or param_step < step_tol:
            converged = True
            break
        step = min(step * 2.0, 1e6)

    rho = hermitize(rho)
    info = MLEInfo(ll_history=np.array(history), n_iter=n_iter,
                   converged=converged, final_step=step, params=t)
    if not converged:
        raise NonConvergence(
            f"likelihood maximization did not converge in {max_iter} iterations "
            f"(last relative improvement {delta_ll:.3e})",
            result=(rho, info))
    return rho, info


def _mle_seed(rho_guess: np.ndarray) -> np.ndarray:
    """Cholesky parameters of the PSD projection of a (possibly non-PSD) guess."""
    psd = qcore.nearest_psd(hermitize(rho_guess))
    trace = np.trace(psd).real
    if trace < 1e-12:
        psd = np.eye(psd.shape[0], dtype=complex)
        trace = psd.shape[0]
    return qcore.cholesky_params_from_state(psd / trace, jitter=1e-6)


def qst_mle(records, projs: ProjectorSet, *, full_output: bool = False,
            max_iter: int = 100_000, ll_rtol: float = 1e-10,
            step_tol: float = 1e-8):
    """Physical density matrix maximizing the multinomial count likelihood.

    Returns ``rho`` (PSD, unit trace by construction); with
    ``full_output=True`` returns ``(rho, MLEInfo)`` including the
    non-decreasing log-likelihood history.
    """
    values = counts_vector(records, len(projs))
    try:
        seed = _mle_seed(qst_linear_inversion(values, projs))
    except ValueError:  # degenerate data: start from the maximally mixed state
        seed = qcore.cholesky_params_from_state(
            np.eye(projs.dim, dtype=complex) / projs.dim)
    rho, info = _maximize_likelihood(values, projs.matrices, seed, projs.dim,
                                     max_iter=max_iter, ll_rtol=ll_rtol,
                                     step_tol=step_tol)
    return (rho, info) if full_output else rho


# -- process tomography --------------------------------------------------------

@dataclass(frozen=True)
class TomographyInputSet:
    """The sixteen two-qubit product inputs over per-qubit (t1, t2, +, L)."""

    labels: tuple[tuple[str, str], ...]

    @classmethod
    def standard(cls) -> "TomographyInputSet":
        return cls(tuple((a, b) for a in INPUT_LABELS for b in INPUT_LABELS))

    def __len__(self) -> int:
        return len(self.labels)

    @functools.cached_property
    def kets(self) -> np.ndarray:
        out = np.array([timebin.two_qubit_ket(a, b) for a, b in self.labels])
        out.setflags(write=False)
        return out

    @functools.cached_property
    def rhos(self) -> np.ndarray:
        out = np.array([np.outer(v, v.conj()) for v in self.kets])
        out.setflags(write=False)
        return out

    def label_strings(self) -> list[str]:
        return ["_".join(label) for label in self.labels]


@functools.lru_cache(maxsize=2)
def standard_input_set() -> TomographyInputSet:
    return TomographyInputSet.standard()


def _pauli_stack(n_qubits: int) -> np.ndarray:
    return np.array(pauli_basis(n_qubits))


@functools.lru_cache(maxsize=4)
def _chi_kron_basis(n_qubits: int) -> np.ndarray:
    """B[m, n] = A_m kron conj(A_n); the chi <-> superoperator transfer basis."""
    paulis = _pauli_stack(n_qubits)
    k = len(paulis)
    d = paulis.shape[1]
    out = np.empty((k, k, d * d, d * d), dtype=complex)
    for m in range(k):
        for n in range(k):
            out[m, n] = np.kron(paulis[m], paulis[n].conj())
    out.setflags(write=False)
    return out


def _conjugation_stack(input_rhos: np.ndarray, n_qubits: int) -> np.ndarray:
    """C[j, m, n] = A_m rho_j A_n†, shape (J, k, k, d, d)."""
    paulis = _pauli_stack(n_qubits)
    left = np.einsum("mab,jbc->jmac", paulis, input_rhos)
    return np.einsum("jmac,ncd->jmnad", left, paulis.conj().transpose(0, 2, 1))


def _check_two_qubit_outputs(output_rhos) -> np.ndarray:
    arr = np.asarray(output_rhos, dtype=complex)
    if arr.shape != (16, 4, 4):
        raise IncompleteInputSet(
            f"need 16 two-qubit output density matrices, got shape {arr.shape}")
    return arr


def qpt_linear_inversion(output_rhos, input_states: TomographyInputSet | None = None,
                         *, full_output: bool = False):
    """Solve E(rho_j) = sum chi[m,n] A_m rho_j A_n† for chi by least squares.

    The result is Hermitian and normalized to Tr(chi) = 1 but may have
    (slightly) negative eigenvalues when the outputs carry noise.  With
    ``full_output=True`` also returns the residual Frobenius norm of the fit.
    """
    outputs = _check_two_qubit_outputs(output_rhos)
    inputs = input_states or standard_input_set()
    conj_stack = _conjugation_stack(inputs.rhos, 2)
    j, k = conj_stack.shape[0], conj_stack.shape[1]
    d = outputs.shape[1]
    design = conj_stack.transpose(0, 3, 4, 1, 2).reshape(j * d * d, k * k)
    rhs = outputs.reshape(j * d * d)
    sol, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    residual = float(np.linalg.norm(design @ sol - rhs))
    chi = hermitize(sol.reshape(k, k))
    chi = chi / np.trace(chi).real
    return (chi, residual) if full_output else chi


def qpt_mle(data, projs: ProjectorSet | None = None,
            input_states: TomographyInputSet | None = None, *,
            full_output: bool = False, max_iter: int = 100_000,
            ll_rtol: float = 1e-10, step_tol: float = 1e-8):
    """Physical (PSD, unit-trace) process matrix from tomography data.

    Two input forms are accepted:

    * sixteen reconstructed output density matrices: chi is the exact
      Frobenius projection of the linear-inversion solution onto the PSD
      unit-trace cone (the minimizer of the stated least-squares objective);
    * a (16, n_settings) array of raw counts plus the projector set used:
      chi maximizes the joint multinomial likelihood over all inputs and
      settings, via the same gradient ascent as :func:`qst_mle`.
    """
    inputs = input_states or standard_input_set()
    arr = np.asarray(data)
    if arr.ndim == 3 and arr.shape[1:] == (4, 4):
        chi_lin = qpt_linear_inversion(arr.astype(complex), inputs)
        chi = project_to_unit_trace_psd(chi_lin)
        if not full_output:
            return chi
        info = MLEInfo(ll_history=np.array([]), n_iter=0, converged=True,
                       final_step=0.0)
        return chi, info

    if projs is None:
        raise ValueError("raw-count reconstruction requires the projector set")
    counts = arr.astype(float)
    if counts.shape != (len(inputs), len(projs)):
        raise IncompleteInputSet(
            f"count table must be ({len(inputs)}, {len(projs)}), got {counts.shape}")

    conj_stack = _conjugation_stack(inputs.rhos, 2)
    effects = np.einsum("kab,jmnba->jkmn", projs.matrices, conj_stack).conj()
    effects = effects.reshape(-1, 16, 16)
    # One acquisition group per input: the post-selected flux of each input
    # run is unknown, so the likelihood is conditioned on per-input totals.
    groups = np.repeat(np.arange(len(inputs)), len(projs))
    # Seed from per-input state tomography followed by the linear chi solve.
    rho_seed = np.array([qst_linear_inversion(row, projs) for row in counts])
    chi_seed = project_to_unit_trace_psd(qpt_linear_inversion(rho_seed, inputs))
    t0 = qcore.cholesky_params_from_state(chi_seed, jitter=1e-6)
    chi, info = _maximize_likelihood(counts.reshape(-1), effects, t0, 16,
                                     max_iter=max_iter, ll_rtol=ll_rtol,
                                     step_tol=step_tol, groups=groups)
    return (chi, info) if full_output else chi


# -- chi algebra ----------------------------------------------------------------

def _n_qubits_of_chi(chi: np.ndarray) -> int:
    size = chi.shape[0]
    if chi.shape != (size, size) or size not in (4, 16):
        raise BasisMismatch(f"chi must be 4x4 or 16x16, got shape {chi.shape}")
    return 1 if size == 4 else 2


def chi_to_superoperator(chi: np.ndarray) -> np.ndarray:
    """Row-major-vec superoperator S with S vec(rho) = vec(E(rho))."""
    chi = np.asarray(chi, dtype=complex)
    basis = _chi_kron_basis(_n_qubits_of_chi(chi))
    return np.einsum("mn,mnab->ab", chi, basis)


def superoperator_to_chi(s: np.ndarray) -> np.ndarray:
    """Inverse of :func:`chi_to_superoperator` (exact, via basis orthogonality)."""
    s = np.asarray(s, dtype=complex)
    n_qubits = 1 if s.shape[0] == 4 else 2
    basis = _chi_kron_basis(n_qubits)
    d = 2 ** n_qubits
    return np.einsum("mnab,ab->mn", basis.conj(), s) / (d * d)


def compose_processes(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """chi of running ``inner`` first and ``outer`` second, trace renormalized."""
    if outer.shape != inner.shape:
        raise BasisMismatch(f"cannot compose chi of shapes {outer.shape} and {inner.shape}")
    s = chi_to_superoperator(outer) @ chi_to_superoperator(inner)
    chi = hermitize(superoperator_to_chi(s))
    return chi / np.trace(chi).real


def chi_from_unitary(u: np.ndarray) -> np.ndarray:
    """Rank-1 unit-trace chi of a unitary: chi = c c† with c_m = Tr(A_m† U)/d."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    n_qubits = 1 if d == 2 else 2
    paulis = _pauli_stack(n_qubits)
    coeff = np.einsum("mba,ab->m", paulis.conj(), u) / d
    return np.outer(coeff, coeff.conj())


@functools.lru_cache(maxsize=1)
def ideal_cphase_chi() -> np.ndarray:
    """Unit-trace chi of the target controlled-phase gate (read-only)."""
    chi = chi_from_unitary(timebin.ideal_cphase_unitary())
    chi.setflags(write=False)
    return chi


def identity_chi(n_qubits: int = 2) -> np.ndarray:
    chi = np.zeros((4 ** n_qubits, 4 ** n_qubits), dtype=complex)
    chi[0, 0] = 1.0
    return chi


def deconvolve_input_imperfection(chi_total: np.ndarray, chi_input: np.ndarray,
                                  cond_limit: float = 1e8,
                                  sv_cutoff: float = 1e-8) -> np.ndarray:
    """Strip a preparation-error channel from a measured total process.

    Computes S_gate = S_total @ pinv(S_input) and projects the result back to
    a PSD unit-trace chi.  ``chi_input`` is the (identity-like) preparation
    channel itself; when the measured input process still contains the ideal
    gate, strip it first with :func:`preparation_channel_from_input_process`.

    Raises
    ------
    IllConditioned
        If the input superoperator's condition number reaches ``cond_limit``.
    """
    if chi_total.shape != chi_input.shape:
        raise BasisMismatch("chi_total and chi_input must share dimensions")
    s_total = chi_to_superoperator(chi_total)
    s_input = chi_to_superoperator(chi_input)
    svals = np.linalg.svd(s_input, compute_uv=False)
    cond = float(svals[0] / svals[-1]) if svals[-1] > 0 else math.inf
    if cond >= cond_limit:
        raise IllConditioned(
            f"input-channel superoperator condition number {cond:.3e} "
            f"exceeds limit {cond_limit:.0e}", condition_number=cond)
    s_gate = s_total @ np.linalg.pinv(s_input, rcond=sv_cutoff)
    chi = hermitize(superoperator_to_chi(s_gate))
    return project_to_unit_trace_psd(chi)


def preparation_channel_from_input_process(chi_input_process: np.ndarray) -> np.ndarray:
    """Remove the ideal gate from a measured input process matrix.

    The input-characterization process is (ideal gate) o (preparation error);
    composing once more with the ideal gate cancels it (the gate is its own
    inverse) and leaves the bare preparation channel.
    """
    return compose_processes(ideal_cphase_chi(), chi_input_process)


def build_chi_input(measured_inputs) -> np.ndarray:
    """Process matrix of (ideal gate) o (preparation-error channel).

    ``measured_inputs`` is either the sixteen measured two-qubit input
    density matrices (standard input order) or a pair of four-element lists
    of single-qubit density matrices (control set, target set) whose products
    are formed in standard order.  The map ideal-input -> ideal-gate applied
    to the measured input is reconstructed with linear inversion and
    projected to a physical chi.
    """
    if isinstance(measured_inputs, tuple) and len(measured_inputs) == 2:
        control_set, target_set = measured_inputs
        if len(control_set) != 4 or len(target_set) != 4:
            raise IncompleteInputSet("need 4 control and 4 target single-qubit states")
        rhos = [np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
                for a in control_set for b in target_set]
    else:
        rhos = [np.asarray(m, dtype=complex) for m in measured_inputs]
    if len(rhos) != 16 or any(r.shape != (4, 4) for r in rhos):
        raise IncompleteInputSet("need 16 two-qubit measured input states")
    gate = timebin.ideal_cphase_unitary()
    outputs = np.array([gate @ rho @ gate.conj().T for rho in rhos])
    chi_lin = qpt_linear_inversion(outputs)
    return project_to_unit_trace_psd(chi_lin)


# -- error bars ------------------------------------------------------------------

def bootstrap_counts(counts: np.ndarray, n_replicas: int,
                     rng: np.random.Generator) -> np.ndarray:
    """Parametric bootstrap: redraw every count as Poisson(observed count).

    Returns an integer array of shape ``(n_replicas,) + counts.shape``.
    """
    counts = np.asarray(counts, dtype=float)
    return rng.poisson(counts, size=(n_replicas,) + counts.shape)
