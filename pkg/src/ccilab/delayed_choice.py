"""Wave/particle superposition control via an entangled coherent cat state.

Instead of choosing between a fringe-producing and a which-way field
configuration, the incoming light is prepared in a coherent superposition
of both: a four-mode cat state whose branches drive the interferometer
open (particle statistics) or closed (wave statistics).  After the
interaction the branch label is carried by the outgoing light, so a field
measurement decides - arbitrarily late - whether the recorded port
statistics show fringes or not.  The branch overlap ``s`` is set purely by
the total mean photon content and interpolates between perfectly
distinguishable branches (s -> 0) and no light at all (s -> 1).

Phase locks between the two branch amplitude tables reduce the scenario
to two knobs, the control phase and the branch overlap, which is the form
the Bell analysis downstream consumes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .field import EffectiveModeBasis, FieldState, coherent_state, vacuum_state
from .interferometer import (
    LABELS,
    PLUS,
    MINUS,
    AmplitudeTable,
    JointState,
    ONE_PHOTON,
    N_PHOTON,
    span_basis,
)


class ConditionViolation(Exception):
    """Branch amplitude tables break an open/closed condition or phase lock."""


@dataclass(frozen=True)
class CatStateSpec:
    """Coherent amplitudes and relative phases of the two branches.

    ``open_norms`` and ``closed_norms`` are the moduli of the coherent
    amplitudes feeding the particle and the wave branch; the three phases
    lock the branch amplitude tables together (route phase within each
    branch, plus the inter-branch phase).
    """

    open_norms: tuple[float, float]
    closed_norms: tuple[float, float]
    gamma_open: float
    gamma_closed: float
    branch_phase: float

    def __post_init__(self):
        for v in (*self.open_norms, *self.closed_norms):
            if v < 0:
                raise ValueError("coherent amplitudes are moduli, must be >= 0")

    @property
    def overlap(self) -> float:
        """Branch overlap, set by the total mean photon content alone."""
        total = sum(v**2 for v in (*self.open_norms, *self.closed_norms))
        return math.exp(-0.5 * total)


def _mode_basis() -> EffectiveModeBasis:
    return EffectiveModeBasis.orthonormal(("open1", "open2", "closed1", "closed2"))


def _branch(z: tuple[float, float, float, float], basis, cutoff) -> FieldState:
    total = math.sqrt(sum(v**2 for v in z))
    if total == 0.0:
        return vacuum_state(basis, cutoff)
    return coherent_state(tuple(v / total for v in z), total, basis, cutoff)


def branch_states(spec: CatStateSpec, cutoff: int | None = None) -> tuple[FieldState, FieldState]:
    """Normalized open-branch and closed-branch field states (four modes)."""
    if cutoff is None:
        peak = max(*spec.open_norms, *spec.closed_norms) ** 2
        cutoff = max(16, 4 * math.ceil(peak) + 8)
    basis = _mode_basis()
    open_state = _branch((spec.open_norms[0], spec.open_norms[1], 0.0, 0.0), basis, cutoff)
    closed_state = _branch((0.0, 0.0, spec.closed_norms[0], spec.closed_norms[1]), basis, cutoff)
    return open_state, closed_state


def cat_state(spec: CatStateSpec, cutoff: int | None = None) -> tuple[FieldState, float]:
    """Normalized superposition of the two branch states plus their overlap.

    The branch overlap computed by Fock contraction must agree with the
    closed-form exponential of the total photon content; a disagreement
    beyond the truncation tolerance raises.
    """
    open_state, closed_state = branch_states(spec, cutoff)
    s = spec.overlap
    contracted = open_state.inner(closed_state).real
    if abs(contracted - s) > 1e-9:
        raise RuntimeError(f"branch overlap mismatch: contraction {contracted} vs formula {s}")
    norm = math.sqrt(2.0 * (1.0 + s))
    cat = FieldState.superpose([1.0 / norm, 1.0 / norm], [open_state, closed_state])
    return cat, s


def locked_phases(phi: float) -> tuple[float, float, float]:
    """The phase locks collapsing all branch phases onto one control phase."""
    return (-phi - math.pi / 2.0, phi, -2.0 * phi - math.pi)


def _phase_close(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(cmath.exp(1j * a) - cmath.exp(1j * b)) <= tol


def delayed_choice_state(
    open_table: AmplitudeTable,
    closed_table: AmplitudeTable,
    spec: CatStateSpec,
    phi: float,
    n_photon: int = 2,
) -> JointState:
    """Final joint state of the wave/particle-superposed interferometer.

    The input port is fixed to -1 and the branch tables must satisfy their
    configuration conditions: the open table fully biased, the closed
    table unbiased, route weights balanced within each branch with the
    locked phases, and the two branches balanced against each other.  Any
    violation beyond 1e-9 raises.
    """
    gamma_open, gamma_closed, branch_phase = locked_phases(phi)
    if not (
        _phase_close(spec.gamma_open, gamma_open)
        and _phase_close(spec.gamma_closed, gamma_closed)
        and _phase_close(spec.branch_phase, branch_phase)
    ):
        raise ConditionViolation("spec phases do not match the control-phase locks")

    sigma = MINUS
    t1o = open_table.amp(ONE_PHOTON, -sigma, sigma, 0)
    tno = open_table.amp(N_PHOTON, sigma, sigma, 0)
    _check_open_bias(open_table, sigma)
    _check_closed_bias(closed_table, sigma)

    w2o = spec.open_norms[1]
    w1o = spec.open_norms[0] ** n_photon
    w2c = spec.closed_norms[1]
    w1c = spec.closed_norms[0] ** n_photon
    t1c = closed_table.amp(ONE_PHOTON, PLUS, sigma, 0)
    tnc = closed_table.amp(N_PHOTON, PLUS, sigma, 0)

    # route balance inside each branch, with the locked phases
    lhs = w2o * t1o
    rhs = -cmath.exp(-1j * gamma_open) * w1o * tno
    _require(lhs, rhs, "open-branch route balance")
    lhs = w2c * t1c
    rhs = cmath.exp(-1j * gamma_closed) * w1c * tnc
    _require(lhs, rhs, "closed-branch route balance")
    # branch-against-branch balance: wave and particle statistics equally likely
    lhs = math.sqrt(2.0) * w2c * t1c
    rhs = cmath.exp(1j * branch_phase) * w2o * t1o
    _require(lhs, rhs, "branch weight balance")

    open_state, closed_state = branch_states(spec)
    basis, coords = span_basis([open_state, closed_state])
    d = len(basis)

    psi_open = np.zeros(2, dtype=complex)
    psi_closed = np.zeros(2, dtype=complex)
    for i, eta in enumerate(LABELS):
        psi_open[i] = w2o * open_table.amp(ONE_PHOTON, eta, sigma, 0) + w1o * open_table.amp(
            N_PHOTON, eta, sigma, 0
        )
        psi_closed[i] = w2c * closed_table.amp(ONE_PHOTON, eta, sigma, 0) + w1c * closed_table.amp(
            N_PHOTON, eta, sigma, 0
        )
    vec = np.kron(psi_open, coords[0]) + np.kron(psi_closed, coords[1])
    norm2 = float(np.vdot(vec, vec).real)
    rho = np.outer(vec, vec.conj()) / norm2
    return JointState(rho, tuple(basis), norm2, coords[0], coords[1], phi=phi, gamma=0.0)


def _require(lhs: complex, rhs: complex, what: str) -> None:
    scale = max(abs(lhs), abs(rhs), 1e-300)
    if abs(lhs - rhs) > 1e-9 * scale:
        raise ConditionViolation(f"{what} violated: {lhs} vs {rhs}")


def _check_open_bias(table: AmplitudeTable, sigma: int) -> None:
    scale = max(
        (abs(v) for v in (*table.one_photon.values(), *table.n_photon.values())), default=0.0
    )
    bad_one = abs(table.amp(ONE_PHOTON, sigma, sigma, 0))
    bad_n = abs(table.amp(N_PHOTON, -sigma, sigma, 0))
    if max(bad_one, bad_n) > 1e-9 * max(scale, 1e-300):
        raise ConditionViolation("open branch must route each process to exactly one port")


def _check_closed_bias(table: AmplitudeTable, sigma: int) -> None:
    t1p = table.amp(ONE_PHOTON, PLUS, sigma, 0)
    t1m = table.amp(ONE_PHOTON, MINUS, sigma, 0)
    tnp = table.amp(N_PHOTON, PLUS, sigma, 0)
    tnm = table.amp(N_PHOTON, MINUS, sigma, 0)
    scale = max(abs(t1p), abs(t1m), abs(tnp), abs(tnm), 1e-300)
    if abs(t1p - t1m) > 1e-9 * scale or abs(tnp + tnm) > 1e-9 * scale:
        raise ConditionViolation("closed branch must be unbiased in the ports")


def delayed_choice_scenario(
    phi: float, overlap: float, n_photon: int = 2
) -> tuple[JointState, CatStateSpec, FieldState, FieldState]:
    """Assembled wave/particle-superposition scenario with overlap ``overlap``.

    Builds a spec with all four coherent amplitudes equal (their size is
    fixed by the requested branch overlap) and amplitude tables satisfying
    every configuration condition and phase lock.
    """
    if not (0.0 < overlap < 1.0):
        raise ValueError("branch overlap must lie strictly between 0 and 1")
    norm = math.sqrt(-math.log(overlap) / 2.0)
    gamma_open, gamma_closed, branch_phase = locked_phases(phi)
    spec = CatStateSpec((norm, norm), (norm, norm), gamma_open, gamma_closed, branch_phase)

    sigma = MINUS
    w2o, w1o = norm, norm**n_photon
    w2c, w1c = norm, norm**n_photon
    t1o = 1.0 / w2o
    tno = -cmath.exp(1j * gamma_open) / w1o
    t1c = cmath.exp(1j * branch_phase) / (math.sqrt(2.0) * w2c)
    tnc = cmath.exp(1j * (branch_phase + gamma_closed)) / (math.sqrt(2.0) * w1c)
    open_table = AmplitudeTable(
        one_photon={(-sigma, sigma, 0): t1o},
        n_photon={(sigma, sigma, 0): tno},
    )
    closed_table = AmplitudeTable(
        one_photon={(PLUS, sigma, 0): t1c, (MINUS, sigma, 0): t1c},
        n_photon={(PLUS, sigma, 0): tnc, (MINUS, sigma, 0): -tnc},
    )
    state = delayed_choice_state(open_table, closed_table, spec, phi, n_photon)
    open_state, closed_state = branch_states(spec)
    return state, spec, open_state, closed_state


def branch_projector(state: JointState, branch: FieldState) -> np.ndarray:
    """Projector (in the state's span basis) onto one field branch."""
    coords = state.field_coords(branch)
    n2 = float(np.vdot(coords, coords).real)
    if abs(n2 - 1.0) > 1e-9:
        raise ValueError("branch state must be normalized and inside the span")
    return np.outer(coords, coords.conj())


def morphing_stats(state: JointState, projector: np.ndarray):
    """Port statistics sorted on a branch measurement of the field.

    Clicking the wave-branch projector yields fringes, clicking the
    particle branch yields flat statistics; the weighted average restores
    the unconditioned blend.
    """
    from .erasure import conditioned_ports

    return conditioned_ports(state, projector)


def label_branch_concurrence(state: JointState) -> float:
    """Two-qubit concurrence between the port label and the field span.

    Requires a two-dimensional field span; uses the spin-flip construction
    on the (label x span) density matrix.
    """
    if state.field_dim != 2:
        raise ValueError("branch concurrence needs a two-dimensional field span")
    rho = state.rho
    sy = np.array([[0.0, -1j], [1j, 0.0]])
    flip = np.kron(sy, sy)
    r = rho @ flip @ rho.conj() @ flip
    evals = np.sort(np.abs(np.linalg.eigvals(r)))[::-1]
    roots = np.sqrt(np.clip(evals, 0.0, None))
    return float(max(0.0, roots[0] - roots[1] - roots[2] - roots[3]))
