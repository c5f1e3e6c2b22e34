"""Complex linear algebra and quantum primitives shared by the whole package.

Conventions used everywhere:

* Matrices are dense complex ``numpy`` arrays, row-major.
* ``vec`` means row-major flattening, so ``vec(A @ X @ B) = (A kron B.T) vec(X)``.
* Pauli-product operator bases are ordered lexicographically:
  ``I, X, Y, Z`` for one qubit and ``II, IX, IY, IZ, XI, ..., ZZ`` for two,
  i.e. index ``m = 4*i + j`` maps to ``P_i kron P_j``.
* Density matrices are Hermitian, positive semidefinite, trace one
  (tolerances below).

The JSON interchange schema for matrices is::

    {"rows": n, "cols": m, "re": [[...]], "im": [[...]]}

with ``re``/``im`` row-major nested lists.  Every matrix file emitted by the
CLI follows this schema (optionally with extra annotation keys).
"""

from __future__ import annotations

import functools
import json
from pathlib import Path

import numpy as np

# Shared numerical tolerances.
HERMITICITY_RTOL = 1e-10   # relative to Frobenius norm
EIGENVALUE_FLOOR = -1e-10  # most negative eigenvalue accepted as "physical"
TRACE_ATOL = 1e-12

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_SINGLE_QUBIT_PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)
_PAULI_NAMES = ("I", "X", "Y", "Z")


class NotHermitian(ValueError):
    """Matrix failed a Hermiticity check."""


class ZeroParameter(ValueError):
    """Cholesky parameter vector is numerically zero."""


def frobenius_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def is_hermitian(m: np.ndarray, rtol: float = HERMITICITY_RTOL) -> bool:
    m = np.asarray(m, dtype=complex)
    scale = max(frobenius_norm(m), 1.0)
    return frobenius_norm(m - m.conj().T) <= rtol * scale


def require_hermitian(m: np.ndarray, rtol: float = HERMITICITY_RTOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, rtol):
        dev = frobenius_norm(m - m.conj().T)
        raise NotHermitian(f"matrix deviates from Hermiticity by {dev:.3e} (Frobenius)")
    return m


def hermitize(m: np.ndarray) -> np.ndarray:
    """Symmetrize away round-off: return (m + m†)/2."""
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().T)


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices; dimensions multiply."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def pauli_basis(n_qubits: int) -> list[np.ndarray]:
    """Ordered Pauli-product operator basis for 1 or 2 qubits.

    Operators satisfy Tr(A_m† A_n) = d * delta_mn with d = 2**n_qubits.
    """
    if n_qubits == 1:
        return [p.copy() for p in _SINGLE_QUBIT_PAULIS]
    if n_qubits == 2:
        return [tensor_product(a, b) for a in _SINGLE_QUBIT_PAULIS
                for b in _SINGLE_QUBIT_PAULIS]
    raise ValueError(f"n_qubits must be 1 or 2, got {n_qubits}")


def pauli_labels(n_qubits: int) -> list[str]:
    """Labels matching :func:`pauli_basis` ordering (``II``, ``IX``, ...)."""
    if n_qubits == 1:
        return list(_PAULI_NAMES)
    if n_qubits == 2:
        return [a + b for a in _PAULI_NAMES for b in _PAULI_NAMES]
    raise ValueError(f"n_qubits must be 1 or 2, got {n_qubits}")


def hermitian_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(eigenvalues, eigenvectors)`` with columns of ``eigenvectors``
    matching the eigenvalue order, so ``m = V @ diag(lam) @ V†``.

    Raises
    ------
    NotHermitian
        If ``m`` deviates from Hermiticity by more than the shared tolerance.
    """
    m = require_hermitian(m)
    lam, vec = np.linalg.eigh(hermitize(m))
    order = np.argsort(lam)[::-1]
    return lam[order].real, vec[:, order]


def nearest_psd(m: np.ndarray) -> np.ndarray:
    """Project a Hermitian matrix onto the PSD cone (clip negative eigenvalues).

    Idempotent: PSD input is returned unchanged up to round-off.
    """
    lam, vec = hermitian_eig(m)
    lam = np.clip(lam, 0.0, None)
    return hermitize(vec @ np.diag(lam) @ vec.conj().T)


def project_to_unit_trace_psd(m: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) PSD trace-one matrix to a Hermitian ``m``.

    Eigenvalues are projected onto the probability simplex, which is the exact
    minimizer of the Frobenius distance subject to PSD and unit trace.
    """
    lam, vec = hermitian_eig(m)
    lam = _project_simplex(lam)
    return hermitize(vec @ np.diag(lam) @ vec.conj().T)


def _project_simplex(lam: np.ndarray) -> np.ndarray:
    """Euclidean projection of a descending real vector onto the simplex."""
    lam = np.asarray(lam, dtype=float)
    cumsum = np.cumsum(lam)
    k = np.arange(1, lam.size + 1)
    candidates = lam - (cumsum - 1.0) / k
    rho = int(np.max(np.nonzero(candidates > 0)[0])) if np.any(candidates > 0) else 0
    shift = (cumsum[rho] - 1.0) / (rho + 1)
    return np.clip(lam - shift, 0.0, None)


# -- Cholesky-style parameterization of physical density matrices ------------
#
# A dim x dim density matrix is parameterized by dim**2 real numbers packed as
#   t[0:dim]          -> real diagonal of a lower-triangular T
#   then, row-major over (r, c) with r > c: pairs (Re T[r,c], Im T[r,c])
# and mapped to rho = T†T / Tr(T†T), which is PSD with unit trace by
# construction for any nonzero t.

def _lower_triangle_indices(dim: int) -> list[tuple[int, int]]:
    return [(r, c) for r in range(dim) for c in range(r)]


@functools.lru_cache(maxsize=8)
def _lower_index_arrays(dim: int) -> tuple[np.ndarray, np.ndarray]:
    pairs = _lower_triangle_indices(dim)
    rows = np.array([r for r, _ in pairs], dtype=np.intp)
    cols = np.array([c for _, c in pairs], dtype=np.intp)
    return rows, cols


def cholesky_matrix_from_params(t: np.ndarray, dim: int) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.shape != (dim * dim,):
        raise ValueError(f"expected {dim * dim} parameters, got shape {t.shape}")
    T = np.zeros((dim, dim), dtype=complex)
    T[np.diag_indices(dim)] = t[:dim]
    rows, cols = _lower_index_arrays(dim)
    T[rows, cols] = t[dim::2] + 1j * t[dim + 1::2]
    return T


def params_from_cholesky_matrix(T: np.ndarray) -> np.ndarray:
    dim = T.shape[0]
    t = np.empty(dim * dim, dtype=float)
    t[:dim] = np.diag(T).real
    rows, cols = _lower_index_arrays(dim)
    vals = T[rows, cols]
    t[dim::2] = vals.real
    t[dim + 1::2] = vals.imag
    return t


def state_from_cholesky_params(t: np.ndarray, dim: int) -> np.ndarray:
    """Map dim**2 real parameters to a physical density matrix T†T / Tr(T†T).

    Raises
    ------
    ZeroParameter
        If the parameter vector is so small that Tr(T†T) underflows below
        1e-300 and the normalization is meaningless.
    """
    t = np.asarray(t, dtype=float)
    peak = float(np.max(np.abs(t))) if t.size else 0.0
    if peak < 1e-150:
        raise ZeroParameter("Tr(T†T) < 1e-300; parameters are numerically zero")
    # Rescale before squaring so extreme magnitudes cannot overflow; the
    # result is exactly scale invariant.
    T = cholesky_matrix_from_params(t / peak, dim)
    gram = T.conj().T @ T
    trace = np.trace(gram).real
    rho = hermitize(gram / trace)
    return rho


def cholesky_params_from_state(rho: np.ndarray, jitter: float = 1e-10) -> np.ndarray:
    """Inverse of :func:`state_from_cholesky_params` up to normalization.

    Finds a lower-triangular T with T†T = rho via a flip trick on the
    standard Cholesky factorization; ``jitter`` regularizes rank-deficient
    input.
    """
    rho = hermitize(np.asarray(rho, dtype=complex))
    dim = rho.shape[0]
    reg = rho + jitter * np.eye(dim)
    reg /= np.trace(reg).real
    flip = np.eye(dim)[::-1]
    lower = np.linalg.cholesky(flip @ reg @ flip)
    T = (flip @ lower @ flip).conj().T
    return params_from_cholesky_matrix(T)


# -- density-matrix validation ------------------------------------------------

def validate_density_matrix(rho: np.ndarray,
                            eig_floor: float = EIGENVALUE_FLOOR,
                            trace_atol: float = TRACE_ATOL) -> np.ndarray:
    """Check Hermiticity, positivity and unit trace; return rho unchanged.

    Raises ``NotHermitian`` / ``ValueError`` describing the first violated
    invariant.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not np.all(np.isfinite(rho.view(float))):
        raise ValueError("density matrix contains non-finite entries")
    require_hermitian(rho, rtol=1e-10)
    trace = np.trace(rho).real
    if abs(trace - 1.0) > trace_atol:
        raise ValueError(f"trace deviates from 1 by {trace - 1.0:.3e}")
    lam = np.linalg.eigvalsh(hermitize(rho))
    if lam.min() < eig_floor:
        raise ValueError(f"negative eigenvalue {lam.min():.3e} below floor {eig_floor:.0e}")
    return rho


def is_density_matrix(rho: np.ndarray) -> bool:
    try:
        validate_density_matrix(rho)
    except ValueError:
        return False
    return True


# -- JSON matrix schema -------------------------------------------------------

def matrix_to_json(m: np.ndarray, **extra) -> dict:
    """Encode a matrix in the repo-wide JSON schema (plus optional extra keys)."""
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    doc = {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": m.real.tolist(),
        "im": m.imag.tolist(),
    }
    doc.update(extra)
    return doc


def matrix_from_json(doc: dict) -> np.ndarray:
    """Decode the repo-wide JSON schema; validates shape and finiteness."""
    for key in ("rows", "cols", "re", "im"):
        if key not in doc:
            raise ValueError(f"matrix JSON missing key {key!r}")
    rows, cols = int(doc["rows"]), int(doc["cols"])
    if rows <= 0 or cols <= 0:
        raise ValueError(f"matrix dims must be positive, got {rows}x{cols}")
    re = np.asarray(doc["re"], dtype=float)
    im = np.asarray(doc["im"], dtype=float)
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise ValueError(
            f"re/im shapes {re.shape}/{im.shape} do not match dims {rows}x{cols}")
    m = re + 1j * im
    if not np.all(np.isfinite(re)) or not np.all(np.isfinite(im)):
        raise ValueError("matrix JSON contains non-finite entries")
    return m


def save_matrix(path: str | Path, m: np.ndarray, **extra) -> None:
    Path(path).write_text(json.dumps(matrix_to_json(m, **extra), sort_keys=True, indent=1))


def load_matrix(path: str | Path) -> np.ndarray:
    return matrix_from_json(json.loads(Path(path).read_text()))
