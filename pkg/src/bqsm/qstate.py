"""Dense complex linear algebra for multi-qubit systems.

States, bases, measurements, tensor products, partial traces, norms and
distances. Representation is dense throughout with a hard cap of 14 qubits;
everything the bound checks need fits comfortably below that.

Qubit indices are 0-based. Single-qubit basis labels: "+" (computational),
"x" (diagonal), "circ" (circular), "breitbart".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .bits import int_to_str
from .errors import CapacityError, InputError
from .entropy import Distribution

ATOL = 1e-10
MEAS_TOL = 1e-9
MAX_QUBITS = 14

_SQ2 = 1.0 / math.sqrt(2.0)

# columns are the basis vectors
_PLUS = np.eye(2, dtype=complex)
_TIMES = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
_CIRC = np.array([[_SQ2, _SQ2], [1j * _SQ2, -1j * _SQ2]], dtype=complex)
_BREITBART = np.array(
    [[math.cos(math.pi / 8), math.sin(math.pi / 8)],
     [math.sin(math.pi / 8), -math.cos(math.pi / 8)]], dtype=complex)

SINGLE_QUBIT_BASES = {
    "+": _PLUS,
    "x": _TIMES,
    "circ": _CIRC,
    "breitbart": _BREITBART,
}


def _check_qubits(n: int):
    if n < 1:
        raise InputError("need at least one qubit")
    if n > MAX_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the dense cap of {MAX_QUBITS}")


class PureState:
    """Normalized complex amplitude vector over 2^n computational states."""

    def __init__(self, amplitudes):
        a = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(math.log2(len(a))))
        if 2 ** n != len(a):
            raise InputError("amplitude vector length is not a power of two")
        _check_qubits(n)
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > ATOL:
            raise InputError(f"state norm {norm} deviates from 1")
        self.amplitudes = a
        self.n = n

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    def density(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amplitudes,
                                        self.amplitudes.conj()))

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def equals_up_to_phase(self, other: "PureState", tol: float = MEAS_TOL
                           ) -> bool:
        return abs(abs(self.overlap(other)) - 1.0) <= tol

    def to_json(self) -> str:
        inter = np.empty(2 * self.dim)
        inter[0::2] = self.amplitudes.real
        inter[1::2] = self.amplitudes.imag
        return json.dumps({"n": self.n, "amplitudes": inter.tolist()})

    @staticmethod
    def from_json(text: str) -> "PureState":
        obj = json.loads(text)
        inter = np.asarray(obj["amplitudes"])
        return PureState(inter[0::2] + 1j * inter[1::2])


class DensityOperator:
    """Hermitian, trace-one, positive semidefinite matrix.

    The dimension is arbitrary (block-diagonal classical-quantum assemblies
    are not always power-of-two sized); qubit-indexed operations require a
    power-of-two dimension.
    """

    def __init__(self, matrix, check: bool = True):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InputError("density operator must be a square matrix")
        d = m.shape[0]
        n = int(round(math.log2(d))) if d > 1 else 0
        if 2 ** n == d and n > MAX_QUBITS:
            raise CapacityError(
                f"{n} qubits exceeds the dense cap of {MAX_QUBITS}")
        if check:
            if np.abs(m - m.conj().T).max() > ATOL:
                raise InputError("matrix is not Hermitian")
            tr = np.trace(m).real
            if abs(tr - 1.0) > MEAS_TOL:
                raise InputError(f"trace {tr} deviates from 1")
            ev = np.linalg.eigvalsh(m)
            if ev.min() < -MEAS_TOL:
                raise InputError(f"negative eigenvalue {ev.min()}")
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        n = int(round(math.log2(self.dim)))
        if 2 ** n != self.dim:
            raise InputError(f"dimension {self.dim} is not a power of two")
        return n

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def log_rank(self, tol: float = MEAS_TOL) -> float:
        """Max-entropy H_0: log2 of the rank."""
        ev = self.eigenvalues()
        return math.log2(max(int((ev > tol).sum()), 1))

    def to_json(self) -> str:
        flat = self.matrix.reshape(-1)
        inter = np.empty(2 * flat.size)
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        return json.dumps({"dim": self.dim, "matrix": inter.tolist()})

    @staticmethod
    def from_json(text: str) -> "DensityOperator":
        obj = json.loads(text)
        d = obj["dim"]
        inter = np.asarray(obj["matrix"])
        return DensityOperator((inter[0::2] + 1j * inter[1::2]).reshape(d, d))

    @staticmethod
    def maximally_mixed(n: int) -> "DensityOperator":
        _check_qubits(n)
        d = 2 ** n
        return DensityOperator(np.eye(d, dtype=complex) / d, check=False)


@dataclass
class Basis:
    """Orthonormal basis of a d-dimensional space; vectors are the columns
    of `matrix`."""

    label: str
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = m.shape[0]
        if m.shape != (d, d):
            raise InputError("basis must consist of d vectors of dimension d")
        gram = m.conj().T @ m
        if np.abs(gram - np.eye(d)).max() > ATOL:
            raise InputError("basis vectors are not orthonormal")
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def vector(self, j: int) -> np.ndarray:
        return self.matrix[:, j]


@dataclass
class BasisSet:
    """Bases over a common dimension, optionally verified mutually
    unbiased: all cross overlaps have magnitude d^{-1/2}."""

    bases: list
    mutually_unbiased: bool = False
    labels: list = field(init=False)

    def __post_init__(self):
        d = self.bases[0].dim
        if any(b.dim != d for b in self.bases):
            raise InputError("bases must share one dimension")
        if self.mutually_unbiased:
            target = 1.0 / math.sqrt(d)
            for i in range(len(self.bases)):
                for j in range(i + 1, len(self.bases)):
                    ov = np.abs(self.bases[i].matrix.conj().T
                                @ self.bases[j].matrix)
                    if np.abs(ov - target).max() > ATOL:
                        raise InputError(
                            f"bases {i},{j} are not mutually unbiased")
        self.labels = [b.label for b in self.bases]

    @property
    def dim(self) -> int:
        return self.bases[0].dim

    def __len__(self) -> int:
        return len(self.bases)

    def __getitem__(self, i) -> Basis:
        return self.bases[i]


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def single_qubit_basis(label: str) -> Basis:
    if label not in SINGLE_QUBIT_BASES:
        raise InputError(f"unknown basis label {label!r}")
    return Basis(label, SINGLE_QUBIT_BASES[label])


def product_basis(labels) -> Basis:
    """Tensor product of single-qubit bases, e.g. ['+', 'x', '+']."""
    mats = [SINGLE_QUBIT_BASES[lab] if isinstance(lab, str) else lab.matrix
            for lab in labels]
    m = mats[0]
    for factor in mats[1:]:
        m = np.kron(m, factor)
    label = "".join(lab if isinstance(lab, str) else lab.label
                    for lab in labels)
    return Basis(label, m)


def standard_basis_set(kind: str, n: int) -> BasisSet:
    """Tensor powers of {+, x} ("bb84") or {+, x, circ} ("six-state"),
    verified mutually unbiased at construction."""
    _check_qubits(n)
    if kind == "bb84":
        labels = ["+", "x"]
    elif kind == "six-state":
        labels = ["+", "x", "circ"]
    else:
        raise InputError(f"unknown basis-set kind {kind!r}")
    bases = [product_basis([lab] * n) for lab in labels]
    return BasisSet(bases, mutually_unbiased=True)


def prepare_bb84(x: str, theta: str) -> PureState:
    """Encode bit-string x qubit-wise in bases theta (over '+', 'x')."""
    if len(x) != len(theta):
        raise InputError("length mismatch between data and basis strings")
    if len(x) == 0:
        raise InputError("empty string")
    amp = np.array([1.0 + 0j])
    for xi, ti in zip(x, theta):
        b = SINGLE_QUBIT_BASES.get(ti)
        if b is None or ti not in ("+", "x"):
            raise InputError(f"BB84 basis must be '+' or 'x', got {ti!r}")
        if xi not in "01":
            raise InputError(f"data must be bits, got {xi!r}")
        amp = np.kron(amp, b[:, int(xi)])
    return PureState(amp)


# ---------------------------------------------------------------------------
# measurements
# ---------------------------------------------------------------------------

def _probs_from_density(rho: DensityOperator, basis_matrix: np.ndarray
                        ) -> np.ndarray:
    if basis_matrix.shape[0] != rho.dim:
        raise InputError("dimension mismatch between state and basis")
    probs = np.einsum("ji,jk,ki->i", basis_matrix.conj(), rho.matrix,
                      basis_matrix).real
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > MEAS_TOL:
        raise InputError(f"measurement probabilities sum to {total}")
    return probs / total


def measure(rho: DensityOperator, basis: Basis) -> Distribution:
    """Born-rule outcome distribution of measuring rho in the basis,
    labeled by basis index."""
    probs = _probs_from_density(rho, basis.matrix)
    return Distribution(range(len(probs)), probs)


def measure_pure(psi: PureState, basis: Basis) -> np.ndarray:
    """Probability vector for a pure state (cheaper than via density)."""
    if basis.dim != psi.dim:
        raise InputError("dimension mismatch between state and basis")
    amps = basis.matrix.conj().T @ psi.amplitudes
    probs = np.abs(amps) ** 2
    return probs / probs.sum()


def _rotate_density(rho_matrix: np.ndarray, mats) -> np.ndarray:
    """Apply (U_1 x ... x U_n)^dagger rho (U_1 x ... x U_n) without forming
    the Kronecker product."""
    n = len(mats)
    t = rho_matrix.reshape((2,) * (2 * n))
    for i, u in enumerate(mats):
        t = np.tensordot(u.conj().T, t, axes=([1], [i]))
        t = np.moveaxis(t, 0, i)
    for i, u in enumerate(mats):
        ax = n + i
        t = np.tensordot(t, u, axes=([ax], [0]))
        t = np.moveaxis(t, -1, ax)
    return t.reshape(rho_matrix.shape)


def measure_per_qubit(rho: DensityOperator, theta) -> Distribution:
    """Measure an n-qubit state in the product basis given by per-qubit
    labels (or Basis objects); outcomes are bit-strings."""
    n = rho.n
    if len(theta) != n:
        raise InputError("basis choice vector length differs from qubit count")
    mats = [SINGLE_QUBIT_BASES[lab] if isinstance(lab, str) else lab.matrix
            for lab in theta]
    rotated = _rotate_density(rho.matrix, mats)
    probs = np.clip(np.diag(rotated).real, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > MEAS_TOL:
        raise InputError(f"measurement probabilities sum to {total}")
    outcomes = [int_to_str(v, n) for v in range(2 ** n)]
    return Distribution(outcomes, probs / total)


def measure_per_qubit_pure(psi: PureState, theta) -> np.ndarray:
    """Probability vector over bit-strings for a pure state, per-qubit
    product basis; O(n 2^n)."""
    n = psi.n
    if len(theta) != n:
        raise InputError("basis choice vector length differs from qubit count")
    amp = psi.amplitudes.reshape((2,) * n)
    for i, lab in enumerate(theta):
        u = SINGLE_QUBIT_BASES[lab] if isinstance(lab, str) else lab.matrix
        amp = np.tensordot(u.conj().T, amp, axes=([1], [i]))
        amp = np.moveaxis(amp, 0, i)
    probs = np.abs(amp.reshape(-1)) ** 2
    return probs / probs.sum()


BELL_LABELS = ("phi+", "psi+", "phi-", "psi-")

_BELL = np.array([
    [_SQ2, 0, _SQ2, 0],
    [0, _SQ2, 0, _SQ2],
    [0, _SQ2, 0, -_SQ2],
    [_SQ2, 0, -_SQ2, 0],
], dtype=complex)  # columns: phi+, psi+, phi-, psi-


def bell_basis() -> Basis:
    return Basis("bell", _BELL)


def bell_measure(rho: DensityOperator) -> Distribution:
    """Born-rule distribution over the four Bell projectors of a 2-qubit
    state."""
    if rho.dim != 4:
        raise InputError("Bell measurement needs a 2-qubit state")
    probs = _probs_from_density(rho, _BELL)
    return Distribution(BELL_LABELS, probs)


# ---------------------------------------------------------------------------
# composition and distances
# ---------------------------------------------------------------------------

def tensor(a, b):
    """Kronecker product of two states or two operators."""
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(np.kron(a.matrix, b.matrix), check=False)
    raise InputError("tensor requires two states or two operators")


def partial_trace(rho: DensityOperator, keep) -> DensityOperator:
    """Reduced state on the kept qubit subset (0-based indices). An empty
    keep set is only meaningful as the scalar trace and is refused."""
    n = rho.n
    keep = sorted(set(keep))
    if any(k < 0 or k >= n for k in keep):
        raise InputError("keep indices outside register")
    if not keep:
        raise InputError("empty keep set: use the trace directly")
    t = rho.matrix.reshape((2,) * (2 * n))
    traced = [i for i in range(n) if i not in keep]
    for count, i in enumerate(traced):
        ax = i - count  # axes shift as we trace
        t = np.trace(t, axis1=ax, axis2=ax + (n - count))
    d = 2 ** len(keep)
    return DensityOperator(t.reshape(d, d), check=False)


def trace_norm(a: np.ndarray) -> float:
    """Trace norm of a Hermitian matrix: sum of absolute eigenvalues."""
    return float(np.abs(np.linalg.eigvalsh(a)).sum())


def batched_trace_norm(a: np.ndarray) -> float:
    """Sum of trace norms over a (..., d, d) stack of Hermitian matrices.

    Closed forms for d = 1 and d = 2 keep large batches off the LAPACK
    path; larger d falls back to batched eigendecomposition.
    """
    a = np.asarray(a)
    d = a.shape[-1]
    if d == 1:
        return float(np.abs(a).sum())
    if d == 2:
        tr = (a[..., 0, 0] + a[..., 1, 1]).real
        det = (a[..., 0, 0] * a[..., 1, 1]
               - a[..., 0, 1] * a[..., 1, 0]).real
        root = np.sqrt(np.clip(tr * tr - 4.0 * det, 0.0, None))
        lam1 = 0.5 * (tr + root)
        lam2 = 0.5 * (tr - root)
        return float((np.abs(lam1) + np.abs(lam2)).sum())
    return float(np.abs(np.linalg.eigvalsh(a)).sum())


def trace_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    """delta(rho, sigma) = 1/2 tr|rho - sigma|, via Hermitian
    eigendecomposition of the difference."""
    if rho.dim != sigma.dim:
        raise InputError("dimension mismatch")
    return 0.5 * trace_norm(rho.matrix - sigma.matrix)


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value; equals the largest absolute eigenvalue for
    Hermitian input."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError("operator norm is defined for square matrices here")
    return float(np.linalg.norm(a, 2))


def projector_onto(vectors: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the span of the given columns (assumed
    orthonormal)."""
    return vectors @ vectors.conj().T


# ---------------------------------------------------------------------------
# random states
# ---------------------------------------------------------------------------

def haar_state(n: int, rng) -> PureState:
    """Haar-random pure state on n qubits."""
    _check_qubits(n)
    d = 2 ** n
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return PureState(v / np.linalg.norm(v))


def random_density(n: int, rng, rank: int | None = None) -> DensityOperator:
    """Random mixed state: normalized Wishart of the given rank."""
    _check_qubits(n)
    d = 2 ** n
    r = rank or d
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real, check=False)


def haar_unitary(d: int, rng) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with the
    phase-corrected diagonal."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r).copy()
    ph /= np.abs(ph)
    return q * ph
