"""Dense complex linear algebra and quantum-state utilities.

All matrices are plain ``complex128`` numpy arrays wrapped in small immutable
value types that remember the tensor-factor layout of the Hilbert space they
act on.  Propagators are computed by eigendecomposition, which is exact to
roundoff for the small dimensions (a few hundred at most) this package works
with.  Every operation here is pure, so values can be shared freely between
threads or worker processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import LayoutError

# Tolerance ladder: construction-time checks, derived unitarity checks, and
# integrator-facing comparisons.
ATOL_STRUCT = 1e-12
ATOL_UNITARY = 1e-10
ATOL_INTEGRATOR = 1e-6

__all__ = [
    "ATOL_STRUCT",
    "ATOL_UNITARY",
    "ATOL_INTEGRATOR",
    "HilbertLayout",
    "Operator",
    "QuantumState",
    "SvdTriple",
    "tensor",
    "expm_hermitian",
    "svd2x2",
    "partial_trace",
    "state_fidelity",
    "strip_global_phase",
    "ket",
    "eye",
    "sigma_z",
    "sigma_minus",
    "sigma_plus",
    "annihilation",
    "creation",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HilbertLayout:
    """Ordered tensor factors of a Hilbert space as (label, dimension) pairs."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        factors = tuple((str(label), int(dim)) for label, dim in self.factors)
        object.__setattr__(self, "factors", factors)
        if not factors:
            raise LayoutError("layout needs at least one factor")
        labels = [label for label, _ in factors]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate factor labels in {labels}")
        for label, dim in factors:
            if dim < 2:
                raise LayoutError(
                    f"factor {label!r} has dimension {dim}; every factor must have dimension >= 2"
                )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def total_dim(self) -> int:
        out = 1
        for _, dim in self.factors:
            out *= dim
        return out

    def concat(self, other: "HilbertLayout") -> "HilbertLayout":
        return HilbertLayout(self.factors + other.factors)

    @staticmethod
    def single(label: str, dim: int) -> "HilbertLayout":
        return HilbertLayout(((label, dim),))


@dataclass(frozen=True)
class Operator:
    """A dense square matrix tagged with the layout it acts on.

    Role-specific guarantees (Hermitian for Hamiltonians, unitary for
    propagators) are checked by the operations that promise them, via
    :meth:`is_hermitian` and :meth:`is_unitary`.
    """

    layout: HilbertLayout
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = _freeze(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise LayoutError(f"operator matrix must be square, got shape {m.shape}")
        if m.shape[0] != self.layout.total_dim:
            raise LayoutError(
                f"matrix dimension {m.shape[0]} does not match layout dimension "
                f"{self.layout.total_dim}"
            )
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.layout, self.matrix.conj().T)

    def is_hermitian(self, tol: float = ATOL_STRUCT) -> bool:
        # Max-entry norm, scaled by the magnitude of the matrix so that
        # physically large entries (rad/s scales) are not rejected for
        # sub-ulp asymmetry.
        scale = max(1.0, float(np.max(np.abs(self.matrix), initial=0.0)))
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T))) <= tol * scale

    def is_unitary(self, tol: float = ATOL_UNITARY) -> bool:
        d = self.dim
        return float(np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(d)))) <= tol

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.layout != other.layout:
            raise LayoutError("cannot multiply operators with different layouts")
        return Operator(self.layout, self.matrix @ other.matrix)


@dataclass(frozen=True)
class QuantumState:
    """A pure state vector or density matrix on a layout.

    Pure states must be normalized to within 1e-12; density matrices must be
    Hermitian with unit trace (1e-10) and no eigenvalue below -1e-8.
    """

    layout: HilbertLayout
    data: np.ndarray

    def __post_init__(self) -> None:
        a = _freeze(self.data)
        d = self.layout.total_dim
        if a.ndim == 1:
            if a.shape[0] != d:
                raise LayoutError(f"state vector length {a.shape[0]} != layout dimension {d}")
            norm = float(np.linalg.norm(a))
            if abs(norm - 1.0) > ATOL_STRUCT:
                raise ValueError(f"pure state norm {norm} deviates from 1 by more than 1e-12")
        elif a.ndim == 2:
            if a.shape != (d, d):
                raise LayoutError(f"density matrix shape {a.shape} != ({d}, {d})")
            if float(np.max(np.abs(a - a.conj().T))) > 1e-10:
                raise ValueError("density matrix is not Hermitian to 1e-10")
            tr = complex(np.trace(a))
            if abs(tr - 1.0) > 1e-10:
                raise ValueError(f"density matrix trace {tr} deviates from 1 by more than 1e-10")
            min_eig = float(np.linalg.eigvalsh(a)[0])
            if min_eig < -1e-8:
                raise ValueError(f"density matrix has eigenvalue {min_eig} below -1e-8")
        else:
            raise LayoutError(f"state data must be a vector or matrix, got ndim {a.ndim}")
        object.__setattr__(self, "data", a)

    @property
    def form(self) -> str:
        return "pure" if self.data.ndim == 1 else "density"

    def to_density(self) -> "QuantumState":
        if self.form == "density":
            return self
        return QuantumState(self.layout, np.outer(self.data, self.data.conj()))

    @staticmethod
    def from_vector(layout: HilbertLayout, vec: Iterable[complex]) -> "QuantumState":
        v = np.asarray(list(vec) if not isinstance(vec, np.ndarray) else vec, dtype=complex)
        return QuantumState(layout, v / np.linalg.norm(v))


@dataclass(frozen=True)
class SvdTriple:
    """Factors (W, D, V) of a 2x2 singular value decomposition T = W D V^dag.

    W and V are unitary to 1e-12 and D is a nonnegative diagonal.  For the
    coupling blocks produced by the gate machinery the two singular values
    additionally sum to one; :meth:`is_trace_normalized` checks that.  The
    canonical ordering (descending D, first nonzero entry of each W column
    real nonnegative) is applied by :func:`svd2x2`; closed-form constructions
    keep their natural ordering.
    """

    w: np.ndarray
    d: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        w, d, v = _freeze(self.w), _freeze(self.d), _freeze(self.v)
        for name, u in (("w", w), ("v", v)):
            if u.shape != (2, 2):
                raise ValueError(f"{name} must be 2x2, got {u.shape}")
            if float(np.max(np.abs(u.conj().T @ u - np.eye(2)))) > ATOL_STRUCT:
                raise ValueError(f"{name} is not unitary to 1e-12")
        if d.shape != (2, 2):
            raise ValueError(f"d must be 2x2, got {d.shape}")
        if abs(d[0, 1]) > ATOL_STRUCT or abs(d[1, 0]) > ATOL_STRUCT:
            raise ValueError("d must be diagonal")
        sv = np.real(np.diag(d))
        if np.max(np.abs(np.imag(np.diag(d)))) > ATOL_STRUCT or np.min(sv) < -ATOL_STRUCT:
            raise ValueError("d must have real nonnegative diagonal entries")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "v", v)

    @property
    def singular_values(self) -> np.ndarray:
        return np.real(np.diag(self.d))

    def is_descending(self) -> bool:
        sv = self.singular_values
        return sv[0] >= sv[1] - ATOL_STRUCT

    def is_trace_normalized(self, tol: float = ATOL_STRUCT) -> bool:
        sv = self.singular_values
        return abs(float(sv.sum()) - 1.0) <= tol and float(sv.max()) <= 1.0 + tol

    def reconstruct(self) -> np.ndarray:
        return self.w @ self.d @ self.v.conj().T


# ---------------------------------------------------------------------------
# elementary matrices


def ket(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def eye(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def sigma_z() -> np.ndarray:
    """Population-difference operator |1><1| - |0><0| on a qubit."""
    return np.diag([-1.0 + 0j, 1.0 + 0j])


def sigma_minus() -> np.ndarray:
    """Lowering operator |0><1| on a qubit."""
    m = np.zeros((2, 2), dtype=complex)
    m[0, 1] = 1.0
    return m


def sigma_plus() -> np.ndarray:
    return sigma_minus().conj().T


def annihilation(dim: int) -> np.ndarray:
    """Bosonic annihilation operator truncated to `dim` levels."""
    a = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        a[n - 1, n] = np.sqrt(n)
    return a


def creation(dim: int) -> np.ndarray:
    return annihilation(dim).conj().T


# ---------------------------------------------------------------------------
# operations


def tensor(a: Operator, b: Operator) -> Operator:
    """Kronecker product; the layout is the concatenation of the factor lists."""
    return Operator(a.layout.concat(b.layout), np.kron(a.matrix, b.matrix))


def expm_hermitian(h: Operator, t: float) -> Operator:
    """Exact propagator exp(-i h t) of a Hermitian generator.

    Uses the eigendecomposition of ``h``, so the result is unitary to
    roundoff; degenerate eigenvalues need no special casing.
    """
    if t < 0:
        raise ValueError(f"propagation time must be nonnegative, got {t}")
    if not h.is_hermitian():
        raise ValueError("generator is not Hermitian to tolerance")
    return Operator(h.layout, _expm_hermitian_matrix(h.matrix, t))


def _expm_hermitian_matrix(h: np.ndarray, t: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(h)
    phases = np.exp(-1j * vals * t)
    return (vecs * phases) @ vecs.conj().T


def svd2x2(t: np.ndarray) -> SvdTriple:
    """Canonical singular value decomposition of an invertible 2x2 matrix.

    Singular values are returned in descending order and the first nonzero
    entry of each column of W is made real nonnegative, which pins down the
    otherwise free per-column phases.  Singular input is rejected because the
    downstream loop construction requires an invertible coupling block.
    """
    t = np.asarray(t, dtype=complex)
    if t.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {t.shape}")
    w, sv, vh = np.linalg.svd(t)
    scale = max(float(sv[0]), 1.0)
    if float(sv[1]) <= 1e-14 * scale:
        raise ValueError(
            "coupling block is singular (det T == 0); an invertible block is required"
        )
    v = vh.conj().T
    for col in range(2):
        pivot = w[0, col] if abs(w[0, col]) > ATOL_STRUCT else w[1, col]
        phase = pivot / abs(pivot)
        w[:, col] = w[:, col] * phase.conjugate()
        v[:, col] = v[:, col] * phase.conjugate()
    return SvdTriple(w, np.diag(sv).astype(complex), v)


def partial_trace(state: QuantumState, keep: Sequence[str]) -> QuantumState:
    """Reduced density matrix over the kept factors, in their original order."""
    labels = state.layout.labels
    for label in keep:
        if label not in labels:
            raise LayoutError(f"unknown factor label {label!r}; layout has {labels}")
    keep_positions = [i for i, label in enumerate(labels) if label in set(keep)]
    if not keep_positions:
        raise LayoutError("must keep at least one factor")

    rho = state.to_density()
    dims = state.layout.dims
    k = len(dims)
    tensor_form = rho.data.reshape(dims + dims)

    # einsum with repeated indices on the traced factors
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:k])
    col = [letters[k + i] if i in keep_positions else letters[i] for i in range(k)]
    out = [letters[i] for i in keep_positions] + [letters[k + i] for i in keep_positions]
    reduced = np.einsum(f"{''.join(row)}{''.join(col)}->{''.join(out)}", tensor_form)

    kept_dims = [dims[i] for i in keep_positions]
    new_dim = int(np.prod(kept_dims))
    reduced = reduced.reshape(new_dim, new_dim)
    new_layout = HilbertLayout(tuple(state.layout.factors[i] for i in keep_positions))
    return QuantumState(new_layout, reduced)


def state_fidelity(rho_final: QuantumState, rho_ideal: QuantumState) -> float:
    """Gate/state fidelity [tr(rho_final rho_ideal)]^(1/2) for a pure target.

    The square-root-of-trace form coincides with the Uhlmann fidelity only
    when ``rho_ideal`` is pure, so mixed targets are rejected.
    """
    if rho_final.layout != rho_ideal.layout:
        raise LayoutError("states live on different layouts")
    if rho_ideal.form == "density":
        purity = float(np.real(np.trace(rho_ideal.data @ rho_ideal.data)))
        if abs(purity - 1.0) > 1e-8:
            raise ValueError("rho_ideal must be pure (purity deviates from 1)")
    rho = rho_final.to_density().data
    sigma = rho_ideal.to_density().data
    overlap = float(np.real(np.trace(rho @ sigma)))
    return float(np.sqrt(min(max(overlap, 0.0), 1.0 + 1e-9)))


def strip_global_phase(matrix: np.ndarray, tol: float = ATOL_STRUCT) -> tuple[np.ndarray, float]:
    """Normalize the first nonzero diagonal entry to be real positive.

    Returns the rephased matrix together with the stripped phase angle, so
    gate comparisons can be made modulo an overall phase while still
    reporting it.
    """
    m = np.asarray(matrix, dtype=complex)
    for i in range(m.shape[0]):
        if abs(m[i, i]) > tol:
            phase = m[i, i] / abs(m[i, i])
            return m * phase.conjugate(), float(np.angle(phase))
    return m.copy(), 0.0
