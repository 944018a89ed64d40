"""Single-ion holonomic gate synthesis.

The working space is (phonon qubit) x (ion qubit) with ordered basis
{|00>, |01>, |10>, |11>}, first index phonon.  The drive couples the two
2-dimensional blocks through an invertible 2x2 coupling block, and a loop of
two constant-amplitude path segments whose pulse areas satisfy a pair of
cosine-zero conditions produces a purely geometric block-diagonal gate on
the ion qubit.

Sign conventions: the segment conditions quantize the products of the pulse
area with the squared sine/cosine of a quarter mixing angle.  A segment's
``p_type`` records the signs of the corresponding sines, ``"I"`` for
(+1, +1) and ``"Z"`` for (+1, -1), which are the diagonal matrices inserted
into the loop closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .core import (
    ATOL_STRUCT,
    ATOL_UNITARY,
    HilbertLayout,
    Operator,
    SvdTriple,
    _expm_hermitian_matrix,
    annihilation,
    eye,
    sigma_minus,
)
from .errors import GateSynthesisError

__all__ = [
    "SINGLE_ION_LAYOUT",
    "ETA_DEFAULT",
    "EPSILON_DEFAULT",
    "OMEGA0_PRIME_DEFAULT",
    "J_DEFAULT",
    "THETA_OPERATING",
    "LabFrameParams",
    "SegmentSpec",
    "PType",
    "coupling_block",
    "coupling_block_svd",
    "effective_hamiltonian",
    "segment_propagator",
    "segment_condition_residuals",
    "solve_segment",
    "lattice_theta",
    "nearest_segment_solution",
    "compose_loop",
    "LoopUnitaries",
    "y_rotation_gate",
    "phase_gate",
    "fock_hamiltonian",
    "fock_leakage_probe",
    "LeakageReport",
]

PType = Literal["I", "Z"]

SINGLE_ION_LAYOUT = HilbertLayout((("a", 2), ("q", 2)))

# Experimentally quoted operating point (angular rad/s).
ETA_DEFAULT = 0.044
EPSILON_DEFAULT = 2 * math.pi * 2420.0
OMEGA0_PRIME_DEFAULT = 2 * math.pi * 4200.0
J_DEFAULT = math.hypot(EPSILON_DEFAULT, OMEGA0_PRIME_DEFAULT)
THETA_OPERATING = 2 * math.atan2(EPSILON_DEFAULT, OMEGA0_PRIME_DEFAULT)


@dataclass(frozen=True)
class LabFrameParams:
    """Passive record of the lab-frame drive parameters.

    Only the bookkeeping invariants are enforced; the lab-frame dynamics are
    never evolved here (the interaction-picture model below is the starting
    point).  All frequencies are angular (rad/s).
    """

    eta: float
    transition_freq: float
    mode_freq: float
    laser_freq: float
    drive_freq: float
    laser_coupling: float
    drive_coupling: float
    laser_phase: float
    resonant: bool = True

    def __post_init__(self) -> None:
        if self.eta <= 0:
            raise ValueError(f"Lamb-Dicke parameter must be positive, got {self.eta}")
        if self.resonant:
            detuning = self.transition_freq - self.laser_freq
            scale = max(1.0, abs(self.transition_freq))
            if abs(detuning - self.mode_freq) > 1e-9 * scale or abs(
                self.mode_freq - self.drive_freq
            ) > 1e-9 * scale:
                raise ValueError(
                    "record marked resonant but detuning != mode frequency or "
                    "mode frequency != drive frequency"
                )

    @property
    def effective_coupling(self) -> float:
        """Sideband coupling after the Lamb-Dicke reduction."""
        return self.eta * self.laser_coupling


def _theta_distance_to_multiple(theta: float, period: float) -> float:
    return abs(theta - period * round(theta / period))


def segment_condition_residuals(theta: float, area: float) -> tuple[float, float, float, float]:
    """Residuals (cos1, cos2, sin1, sin2) of the segment closing conditions.

    cos1/cos2 are the cosines of area*cos^2(theta/4) and area*sin^2(theta/4);
    a closed segment has both near zero with the sines giving the p_type
    signs.
    """
    d1 = math.cos(theta / 4) ** 2
    d2 = math.sin(theta / 4) ** 2
    return (
        math.cos(area * d1),
        math.cos(area * d2),
        math.sin(area * d1),
        math.sin(area * d2),
    )


@dataclass(frozen=True)
class SegmentSpec:
    """One constant-amplitude path segment with its closing conditions met.

    theta/phi are the mixing angle and laser phase (rad), amplitude is the
    drive magnitude (rad/s), area is its time integral over the segment, and
    duration = area / amplitude.
    """

    theta: float
    phi: float
    amplitude: float
    area: float
    duration: float
    p_type: PType

    def __post_init__(self) -> None:
        if self.p_type not in ("I", "Z"):
            raise ValueError(f"p_type must be 'I' or 'Z', got {self.p_type!r}")
        if _theta_distance_to_multiple(self.theta, math.pi) < 1e-9:
            raise GateSynthesisError(
                f"theta = {self.theta} is an integer multiple of pi; the loop "
                "construction requires theta != n*pi"
            )
        if self.area <= 0 or self.amplitude <= 0:
            raise ValueError("area and amplitude must be positive")
        if abs(self.duration * self.amplitude - self.area) > 1e-12 * max(1.0, self.area):
            raise ValueError("duration * amplitude must equal area")
        c1, c2, s1, s2 = segment_condition_residuals(self.theta, self.area)
        signs = (1.0, 1.0) if self.p_type == "I" else (1.0, -1.0)
        if abs(c1) > 1e-9 or abs(c2) > 1e-9:
            raise GateSynthesisError(
                f"segment conditions not met: |cos| residuals ({abs(c1):.3e}, {abs(c2):.3e})"
            )
        if s1 * signs[0] < 0 or s2 * signs[1] < 0:
            raise GateSynthesisError(
                f"segment sine signs ({s1:+.1f}, {s2:+.1f}) do not match p_type {self.p_type!r}"
            )

    @property
    def p_matrix(self) -> np.ndarray:
        return np.diag([1.0 + 0j, 1.0 + 0j if self.p_type == "I" else -1.0 + 0j])

    def propagator(self, running_area: float | None = None) -> np.ndarray:
        a_t = self.area if running_area is None else running_area
        return segment_propagator(self.theta, self.phi, a_t)

    @staticmethod
    def from_solution(
        p_type: PType,
        m: int,
        n: int,
        amplitude: float,
        phi: float,
    ) -> "SegmentSpec":
        theta, area = solve_segment(p_type, m, n)
        return SegmentSpec(
            theta=theta,
            phi=phi,
            amplitude=amplitude,
            area=area,
            duration=area / amplitude,
            p_type=p_type,
        )


def coupling_block(theta: float, phi: float) -> np.ndarray:
    """The 2x2 block that couples the two phonon sectors, at unit amplitude."""
    s = math.sin(theta / 2) / 2
    return np.array(
        [[s, 0.0], [math.cos(theta / 2) * np.exp(1j * phi), s]],
        dtype=complex,
    )


def coupling_block_svd(theta: float, phi: float) -> SvdTriple:
    """Closed-form SVD of the coupling block.

    The diagonal is (cos^2(theta/4), sin^2(theta/4)) in that fixed order,
    which is the order the segment sign conventions refer to; it is
    descending only for theta < pi.  All loop formulas are invariant under
    simultaneous column permutations and per-column phases, so this ordering
    choice never leaks into gate matrices.
    """
    if _theta_distance_to_multiple(theta, 2 * math.pi) < 1e-9:
        raise GateSynthesisError(
            f"theta = {theta} makes the coupling block singular (a zero singular value)"
        )
    c4, s4 = math.cos(theta / 4), math.sin(theta / 4)
    e = np.exp(1j * phi)
    w = np.array([[s4, c4 * e.conjugate()], [c4 * e, -s4]], dtype=complex)
    d = np.diag([c4 * c4, s4 * s4]).astype(complex)
    v = np.array([[c4, s4 * e.conjugate()], [s4 * e, -c4]], dtype=complex)
    return SvdTriple(w, d, v)


def effective_hamiltonian(amplitude: float, theta: float, phi: float) -> Operator:
    """Four-level exchange Hamiltonian on (phonon qubit) x (ion qubit).

    The drive strength is amplitude*sin(theta/2) and the sideband coupling
    amplitude*cos(theta/2); the matrix vanishes identically on both phonon
    sectors, which is what makes the loop gates purely geometric.
    """
    eps_half = amplitude * math.sin(theta / 2) / 2
    coupling = amplitude * math.cos(theta / 2) * np.exp(1j * phi)
    h = np.zeros((4, 4), dtype=complex)
    h[0, 2] = eps_half
    h[1, 2] = coupling
    h[1, 3] = eps_half
    h = h + h.conj().T
    return Operator(SINGLE_ION_LAYOUT, h)


def segment_propagator(theta: float, phi: float, area: float) -> np.ndarray:
    """Closed-form 4x4 propagator of one segment at running pulse area.

    Equals the eigendecomposition propagator of the effective Hamiltonian
    with area = amplitude * time; valid mid-segment as well, so it does not
    require the closing conditions.
    """
    triple = coupling_block_svd(theta, phi)
    w, v = triple.w, triple.v
    d = triple.singular_values
    cos_block = np.diag(np.cos(area * d)).astype(complex)
    sin_block = np.diag(np.sin(area * d)).astype(complex)
    u = np.zeros((4, 4), dtype=complex)
    u[:2, :2] = w @ cos_block @ w.conj().T
    u[:2, 2:] = -1j * (w @ sin_block @ v.conj().T)
    u[2:, :2] = -1j * (v @ sin_block @ w.conj().T)
    u[2:, 2:] = v @ cos_block @ v.conj().T
    return u


def lattice_theta(p_type: PType, m: int, n: int) -> float:
    """Mixing angle of the (m, n) lattice point, in (0, 2*pi)."""
    if m < 0 or n < 0:
        raise GateSynthesisError(f"lattice indices must be nonnegative, got ({m}, {n})")
    num = 1 + 4 * n if p_type == "I" else 3 + 4 * n
    den = 1 + 4 * m
    return 4 * math.atan(math.sqrt(num / den))


def solve_segment(p_type: PType, m: int, n: int) -> tuple[float, float]:
    """Solve the closing conditions for the (m, n) lattice point.

    Returns (theta, area) such that area*cos^2(theta/4) = pi/2 + 2*pi*m and
    area*sin^2(theta/4) = pi/2 + 2*pi*n (p_type "I") or 3*pi/2 + 2*pi*n
    (p_type "Z").  These are the only solutions with both cosines zero and
    unit-magnitude sines.  Index pairs forcing theta onto a multiple of pi
    (m == n for "I") are rejected.
    """
    if p_type not in ("I", "Z"):
        raise GateSynthesisError(f"p_type must be 'I' or 'Z', got {p_type!r}")
    theta = lattice_theta(p_type, m, n)
    if _theta_distance_to_multiple(theta, math.pi) < 1e-9:
        raise GateSynthesisError(
            f"indices (m={m}, n={n}) force theta = pi, which the loop "
            "construction excludes (theta != n*pi)"
        )
    if p_type == "I":
        area = math.pi * (1 + 2 * m + 2 * n)
    else:
        area = 2 * math.pi * (1 + m + n)
    return theta, area


def nearest_segment_solution(
    p_type: PType, theta_target: float, max_index: int = 10
) -> tuple[int, int, float]:
    """Exhaustive search for the lattice theta closest to a target angle.

    Ties prefer the smaller index sum, then the smaller m, so the result is
    deterministic.
    """
    best: tuple[float, int, int, int, float] | None = None
    for m in range(max_index + 1):
        for n in range(max_index + 1):
            if p_type == "I" and m == n:
                continue
            theta = lattice_theta(p_type, m, n)
            key = (abs(theta - theta_target), m + n, m)
            if best is None or key < (best[0], best[1], best[2]):
                best = (key[0], key[1], key[2], n, theta)
    assert best is not None
    _, _, m, n, theta = best
    return m, n, theta


class LoopUnitaries(NamedTuple):
    full: Operator
    u0: np.ndarray
    u1: np.ndarray


def compose_loop(seg1: SegmentSpec, seg2: SegmentSpec) -> LoopUnitaries:
    """Compose two closed segments into a loop and extract its blocks.

    The product propagator is block diagonal over the two phonon sectors; the
    returned u0/u1 act on the ion qubit conditioned on phonon vacuum and
    phonon one.  Both the block-diagonality and the agreement with the
    algebraic closed forms are verified to 1e-10 before returning.
    """
    if abs(seg1.theta - seg2.theta) > ATOL_STRUCT or abs(seg1.area - seg2.area) > ATOL_STRUCT:
        raise GateSynthesisError(
            "loop segments must share theta and area; only the phase may differ"
        )
    u_first = seg1.propagator()
    u_second = seg2.propagator()
    u_full = u_second @ u_first

    off = max(
        float(np.max(np.abs(u_full[:2, 2:]))),
        float(np.max(np.abs(u_full[2:, :2]))),
    )
    if off > ATOL_UNITARY:
        raise GateSynthesisError(f"loop is not block diagonal; off-block max {off:.3e}")

    t1 = coupling_block_svd(seg1.theta, seg1.phi)
    t2 = coupling_block_svd(seg2.theta, seg2.phi)
    p1, p2 = seg1.p_matrix, seg2.p_matrix
    u0_closed = -t2.w @ p2 @ t2.v.conj().T @ t1.v @ p1 @ t1.w.conj().T
    u1_closed = -t2.v @ p2 @ t2.w.conj().T @ t1.w @ p1 @ t1.v.conj().T

    u0 = u_full[:2, :2]
    u1 = u_full[2:, 2:]
    dev = max(
        float(np.max(np.abs(u0 - u0_closed))),
        float(np.max(np.abs(u1 - u1_closed))),
    )
    if dev > ATOL_UNITARY:
        raise GateSynthesisError(f"loop blocks deviate from closed form by {dev:.3e}")
    return LoopUnitaries(Operator(SINGLE_ION_LAYOUT, u_full), u0, u1)


def _gate_segments(
    p_type: PType, m: int, n: int, amplitude: float, phi1: float, phi2: float
) -> tuple[SegmentSpec, SegmentSpec]:
    seg1 = SegmentSpec.from_solution(p_type, m, n, amplitude, phi1)
    seg2 = SegmentSpec.from_solution(p_type, m, n, amplitude, phi2)
    return seg1, seg2


def y_rotation_gate(
    theta_target: float,
    m: int,
    n: int,
    amplitude: float = J_DEFAULT,
    max_index: int = 10,
) -> tuple[SegmentSpec, SegmentSpec, np.ndarray]:
    """Two-segment schedule realizing a Y-axis rotation by theta_target.

    The reachable angles form a discrete lattice indexed by (m, n); the
    target must sit on the requested lattice point to within 1e-9, otherwise
    the error lists the nearest reachable angle.
    """
    theta, _ = solve_segment("I", m, n)
    if abs(theta - theta_target) > 1e-9:
        nm, nn, nearest = nearest_segment_solution("I", theta_target, max_index)
        raise GateSynthesisError(
            f"target rotation angle {theta_target:.6f} is not on the (m={m}, n={n}) "
            f"lattice point (theta = {theta:.6f}); nearest reachable angle over "
            f"indices <= {max_index} is {nearest:.6f} at (m={nm}, n={nn})"
        )
    seg1, seg2 = _gate_segments("I", m, n, amplitude, 0.0, math.pi)
    loop = compose_loop(seg1, seg2)
    return seg1, seg2, loop.u0


def phase_gate(
    dphi: float,
    m: int,
    n: int,
    amplitude: float = J_DEFAULT,
    phi1: float = 0.0,
) -> tuple[SegmentSpec, SegmentSpec, np.ndarray]:
    """Two-segment schedule imprinting opposite phases +-dphi on the ion.

    The resulting block is -diag(exp(-i*dphi), exp(+i*dphi)): a Z-type
    diagonal gate (times a global minus sign), tunable through the
    segment-to-segment laser phase offset alone.
    """
    seg1, seg2 = _gate_segments("Z", m, n, amplitude, phi1, phi1 + dphi)
    loop = compose_loop(seg1, seg2)
    return seg1, seg2, loop.u0


def fock_hamiltonian(n_max: int, amplitude: float, theta: float, phi: float) -> Operator:
    """Exchange Hamiltonian with the phonon kept as a truncated Fock ladder.

    On (n_max+1) phonon levels x ion qubit.  Restricted to Fock levels
    {0, 1} it reproduces the four-level model except for the sqrt(2) drive
    element into level 2, which is exactly the leakage the probe below
    quantifies.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    dim_a = n_max + 1
    a = annihilation(dim_a)
    ad = a.conj().T
    coupling = amplitude * math.cos(theta / 2)
    drive = amplitude * math.sin(theta / 2)
    h = coupling * np.exp(-1j * phi) * np.kron(ad, sigma_minus())
    h = h + (drive / 2) * np.kron(ad, eye(2))
    h = h + h.conj().T
    layout = HilbertLayout((("a", dim_a), ("q", 2)))
    return Operator(layout, h)


@dataclass(frozen=True)
class LeakageReport:
    """Population escaping the phonon-qubit subspace, with a doubling check.

    ``converged`` is True only when doubling the cutoff moves the estimate by
    less than 1%, so an unconverged value is flagged rather than silently
    reported.
    """

    n_max: int
    leakage: float
    leakage_doubled: float
    relative_change: float
    converged: bool


def fock_leakage_probe(
    segments: tuple[SegmentSpec, ...] | list[SegmentSpec],
    n_max: int = 8,
) -> LeakageReport:
    """Evolve |00> through a schedule on the full Fock ladder.

    Reports the final population outside Fock levels {0, 1}, at cutoff
    ``n_max`` and its double.  Amplitudes cancel against durations, so the
    evolution depends only on (theta, phi, area) of each segment.
    """

    def leak_at(cutoff: int) -> float:
        dim = (cutoff + 1) * 2
        psi = np.zeros(dim, dtype=complex)
        psi[0] = 1.0
        for seg in segments:
            h = fock_hamiltonian(cutoff, 1.0, seg.theta, seg.phi)
            psi = _expm_hermitian_matrix(h.matrix, seg.area) @ psi
        inside = float(np.sum(np.abs(psi[:4]) ** 2))
        return max(0.0, 1.0 - inside)

    leak = leak_at(n_max)
    leak2 = leak_at(2 * n_max)
    denom = max(abs(leak2), 1e-300)
    rel = abs(leak - leak2) / denom
    return LeakageReport(
        n_max=n_max,
        leakage=leak,
        leakage_doubled=leak2,
        relative_change=rel,
        converged=rel < 0.01,
    )
