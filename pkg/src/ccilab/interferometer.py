"""Two-path interferometer on a dichotomous label qubit and the field.

The final state of a weak-field two-color experiment, postselected on the
interesting outcomes, is a density matrix on (label qubit) x (field).  Its
two branches are the one-photon and n-photon excitation routes, each
tagging the field with its own outgoing state.  This module assembles that
state from a table of labeled transition amplitudes and computes the full
set of wave/particle metrics: fringe visibility, predictability, the
optimal extractable path knowledge (distinguishability), the optimal
recoverable fringe contrast (coherence), Schmidt structure and concurrence.

The continuum of final material channels collapses to one effective
channel per (port, input port, degeneracy) combination: every metric in
scope depends on the continuum only through such contractions.  Field
operators act on the (at most two-dimensional) span of the outgoing field
states, extended by zero on the orthogonal complement.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .field import FieldState

PLUS, MINUS = +1, -1
LABELS = (PLUS, MINUS)

ONE_PHOTON = "one_photon"
N_PHOTON = "n_photon"


class DegenerateState(Exception):
    """No population reaches the postselected sector."""


class NotAProjector(Exception):
    """Field operator fails the projector test O^2 = O."""


class NotPure(Exception):
    """Schmidt analysis requested for a mixed joint state."""


def rotation(zeta: complex) -> np.ndarray:
    """Unitary label rotation; at pi/4 it is the beam-merger matrix."""
    z = complex(zeta)
    gen = np.array([[0.0, z], [-np.conj(z), 0.0]], dtype=complex)
    if z.imag == 0:
        c, s = math.cos(z.real), math.sin(z.real)
        return np.array([[c, s], [-s, c]], dtype=complex)
    from scipy.linalg import expm

    return expm(gen)


BEAM_MERGER = rotation(math.pi / 4)


@dataclass(frozen=True)
class InputDistribution:
    """Population of the two input ports, p[+1] + p[-1] = 1."""

    p: dict[int, float]

    def __post_init__(self):
        probs = {s: float(self.p.get(s, 0.0)) for s in LABELS}
        if any(v < -1e-15 for v in probs.values()):
            raise ValueError("input probabilities must be non-negative")
        if abs(sum(probs.values()) - 1.0) > 1e-12:
            raise ValueError("input probabilities must sum to one")
        object.__setattr__(self, "p", probs)

    @staticmethod
    def single_port(sigma: int) -> "InputDistribution":
        return InputDistribution({sigma: 1.0, -sigma: 0.0})


@dataclass(frozen=True)
class AmplitudeTable:
    """Labeled transition amplitudes for both excitation routes.

    Keys are ``(port, input_port, degeneracy_index)``; the degeneracy
    index runs over ground-state channels sharing the same input label.
    Continuum kernels and pulse-envelope integrals are already folded into
    the entries as scalar prefactors.
    """

    one_photon: dict[tuple[int, int, int], complex]
    n_photon: dict[tuple[int, int, int], complex]
    nu_counts: dict[int, int] = dataclass_field(default_factory=lambda: {PLUS: 1, MINUS: 1})

    def amp(self, process: str, eta: int, sigma: int, nu: int) -> complex:
        table = self.one_photon if process == ONE_PHOTON else self.n_photon
        return table.get((eta, sigma, nu), 0.0 + 0.0j)

    def channels(self, sigma: int) -> range:
        return range(self.nu_counts.get(sigma, 1))

    def scaled(self, factor: complex) -> "AmplitudeTable":
        return AmplitudeTable(
            {k: factor * v for k, v in self.one_photon.items()},
            {k: factor * v for k, v in self.n_photon.items()},
            dict(self.nu_counts),
        )

    @staticmethod
    def symmetric(gamma: float, one_norm2: float, n_norm2: float, sigma: int = PLUS) -> "AmplitudeTable":
        """Unbiased table obeying the balanced-route phase condition.

        Both ports receive the one-photon route with equal amplitude and
        the n-photon route with opposite signs; route weights (including
        the outgoing-field norms) are balanced with relative phase gamma.
        """
        t_n = 1.0 + 0.0j
        t_1 = cmath.exp(-1j * gamma) * math.sqrt(n_norm2 / one_norm2) * t_n
        one = {(eta, sigma, 0): t_1 for eta in LABELS}
        npho = {(eta, sigma, 0): eta * t_n for eta in LABELS}
        return AmplitudeTable(one, npho)

    @staticmethod
    def open_config(gamma: float, one_norm2: float, n_norm2: float) -> "AmplitudeTable":
        """Fully biased table: each route reaches exactly one port.

        From input port s the one-photon route exits at -s and the
        n-photon route at +s, with balanced weights so both routes are a
        priori equally likely.
        """
        one: dict[tuple[int, int, int], complex] = {}
        npho: dict[tuple[int, int, int], complex] = {}
        for sigma in LABELS:
            one[(-sigma, sigma, 0)] = 1.0 / math.sqrt(one_norm2)
            npho[(sigma, sigma, 0)] = -cmath.exp(1j * gamma) / math.sqrt(n_norm2)
        return AmplitudeTable(one, npho)


@dataclass(frozen=True)
class Metrics:
    """Wave/particle record of one assembled state."""

    visibility: float
    predictability: float
    distinguishability: float
    coherence: float
    concurrence: float
    lambda_plus: float
    lambda_minus: float
    phi: float
    gamma: float


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Biorthogonal decomposition of the pure balanced state.

    ``lambdas`` are the squared Schmidt coefficients (fringe/antifringe
    weights), ``material`` the two label-qubit vectors, ``field_states``
    the orthonormal fringe and antifringe marker states of the light.
    """

    lambdas: tuple[float, float]
    material: tuple[np.ndarray, np.ndarray]
    field_states: tuple[FieldState, FieldState]
    field_coords: tuple[np.ndarray, np.ndarray]


def span_basis(states: list[FieldState], tol: float = 1e-12) -> tuple[list[FieldState], np.ndarray]:
    """Orthonormal basis of the span of the given field states.

    Returns the basis states and the coordinate matrix ``coords`` with
    ``coords[i]`` the coefficients of ``states[i]`` on the basis.
    Linearly dependent inputs contribute no new basis vector.
    """
    basis: list[FieldState] = []
    coords = np.zeros((len(states), len(states)), dtype=complex)
    scale = max((s.computed_norm2() for s in states), default=0.0)
    for i, s in enumerate(states):
        residual = s
        for _ in range(2):  # one reorthogonalization pass for 1e-12 accuracy
            overlaps = [e.inner(residual) for e in basis]
            if overlaps:
                residual = FieldState.superpose(
                    [1.0] + [-o for o in overlaps], [residual] + basis
                )
            coords[i, : len(basis)] += overlaps
        r2 = residual.computed_norm2()
        if r2 > tol * max(scale, 1e-300):
            new = residual.scaled(1.0 / math.sqrt(r2))
            coords[i, len(basis)] = math.sqrt(r2)
            basis.append(new)
    return basis, coords[:, : len(basis)]


@dataclass(frozen=True)
class JointState:
    """Density matrix on (label qubit) x (field span), trace one.

    ``field_basis`` is the orthonormal basis of the span actually reached
    by the light; indices are label-major, ``index = label*dim + mode``.
    ``total_weight`` is the pre-normalization trace, the probability that any
    postselected event occurs at all.  The coordinates of the two
    generating outgoing states and the assembly phases are kept for the
    erasure and Bell constructions downstream.
    """

    rho: np.ndarray
    field_basis: tuple[FieldState, ...]
    total_weight: float
    one_coords: np.ndarray | None = None
    n_coords: np.ndarray | None = None
    phi: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        object.__setattr__(self, "rho", rho)
        d = len(self.field_basis)
        if rho.shape != (2 * d, 2 * d):
            raise ValueError(f"rho must be {2 * d}x{2 * d}")
        if abs(np.trace(rho).real - 1.0) > 1e-10:
            raise ValueError("state must have unit trace")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise ValueError("state must be Hermitian")
        if float(np.min(np.linalg.eigvalsh(rho))) < -1e-9:
            raise ValueError("state has a significantly negative eigenvalue")

    @property
    def field_dim(self) -> int:
        return len(self.field_basis)

    def label_block(self, l_row: int, l_col: int) -> np.ndarray:
        d = self.field_dim
        i, j = LABELS.index(l_row), LABELS.index(l_col)
        return self.rho[i * d : (i + 1) * d, j * d : (j + 1) * d]

    def rotated(self, label_unitary: np.ndarray | None = None) -> np.ndarray:
        u = BEAM_MERGER if label_unitary is None else label_unitary
        big = np.kron(u, np.eye(self.field_dim))
        return big @ self.rho @ big.conj().T

    def reduced_label(self) -> np.ndarray:
        d = self.field_dim
        out = np.zeros((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                out[i, j] = np.trace(self.rho[i * d : (i + 1) * d, j * d : (j + 1) * d])
        return out

    def reduced_field(self) -> np.ndarray:
        d = self.field_dim
        return self.rho[:d, :d] + self.rho[d:, d:]

    def field_coords(self, state: FieldState) -> np.ndarray:
        """Components of a field state on the span basis.

        For states outside the span this is the in-span part, which is all
        that matters for expectation values against this density matrix.
        """
        return np.array([e.inner(state) for e in self.field_basis], dtype=complex)

    def expectation(self, label_op: np.ndarray, field_op: np.ndarray) -> complex:
        return complex(np.trace(self.rho @ np.kron(label_op, field_op)))

    def conditioned_label_matrix(self, field_effect: np.ndarray) -> np.ndarray:
        """Unnormalized label matrix after a field outcome 0 <= F <= 1."""
        out = np.zeros((2, 2), dtype=complex)
        for i, li in enumerate(LABELS):
            for j, lj in enumerate(LABELS):
                out[i, j] = np.trace(self.label_block(li, lj) @ field_effect)
        return out


def assemble_final_state(
    table: AmplitudeTable,
    input_dist: InputDistribution,
    one_photon_out: FieldState,
    n_photon_out: FieldState,
) -> JointState:
    """Postselected joint state from amplitudes and outgoing field states.

    For every populated input channel the branch vector is
    ``sum_eta [T1(eta)|eta>(x)|one_out> + TN(eta)|eta>(x)|n_out>]``; the
    state is the channel-weighted mixture of those rank-one terms,
    normalized by the total postselection probability.
    """
    if one_photon_out.computed_norm2() == 0 and n_photon_out.computed_norm2() == 0:
        raise DegenerateState("both outgoing field states vanish")
    basis, coords = span_basis([one_photon_out, n_photon_out])
    d = len(basis)
    a_one, a_n = coords[0], coords[1]

    rho = np.zeros((2 * d, 2 * d), dtype=complex)
    for sigma in LABELS:
        p_sigma = input_dist.p.get(sigma, 0.0)
        if p_sigma == 0.0:
            continue
        w = p_sigma / table.nu_counts.get(sigma, 1)
        for nu in table.channels(sigma):
            v = np.zeros(2 * d, dtype=complex)
            for i, eta in enumerate(LABELS):
                t1 = table.amp(ONE_PHOTON, eta, sigma, nu)
                tn = table.amp(N_PHOTON, eta, sigma, nu)
                v[i * d : (i + 1) * d] = t1 * a_one + tn * a_n
            rho += w * np.outer(v, v.conj())
    total_weight = float(np.trace(rho).real)
    if total_weight <= 1e-300:
        raise DegenerateState("no population reaches the postselected sector")
    rho /= total_weight

    overlap = one_photon_out.inner(n_photon_out)
    phi = float(np.angle(overlap)) if abs(overlap) > 1e-300 else 0.0
    gamma = _table_gamma(table, input_dist, one_photon_out, n_photon_out)
    return JointState(rho, tuple(basis), total_weight, a_one, a_n, phi, gamma)


def _table_gamma(table, input_dist, one_out, n_out) -> float:
    """Relative route phase from the first populated channel, if defined."""
    n1 = one_out.computed_norm2()
    nn = n_out.computed_norm2()
    if n1 == 0.0 or nn == 0.0:
        return 0.0
    for sigma in LABELS:
        if input_dist.p.get(sigma, 0.0) == 0.0:
            continue
        for nu in table.channels(sigma):
            t1 = table.amp(ONE_PHOTON, PLUS, sigma, nu)
            tn = table.amp(N_PHOTON, PLUS, sigma, nu)
            if abs(t1) > 0 and abs(tn) > 0:
                return float(np.angle(math.sqrt(nn) * tn / (math.sqrt(n1) * t1)))
    return 0.0


def port_population(state: JointState, eta: int) -> float:
    d = state.field_dim
    i = LABELS.index(eta)
    return float(np.trace(state.rho[i * d : (i + 1) * d, i * d : (i + 1) * d]).real)


def port_populations(state: JointState) -> dict[int, float]:
    return {eta: port_population(state, eta) for eta in LABELS}


def _trace_norm(x: np.ndarray) -> float:
    return float(np.sum(np.linalg.svd(x, compute_uv=False)))


def metrics(state: JointState) -> Metrics:
    """All complementarity metrics of the assembled state.

    Everything is read off the beam-merged frame: predictability and
    visibility from the reduced label matrix, distinguishability and
    coherence from the trace norms of the conditional field blocks.
    """
    d = state.field_dim
    rot = state.rotated()
    pp, mm, pm = rot[:d, :d], rot[d:, d:], rot[:d, d:]
    w_plus = float(np.trace(pp).real)
    w_minus = float(np.trace(mm).real)
    predictability = abs(w_plus - w_minus)
    visibility = 2.0 * abs(np.trace(pm))
    distinguishability = _trace_norm(pp - mm)
    coherence = 2.0 * _trace_norm(pm)
    lam_plus = (1.0 + visibility) / 2.0
    lam_minus = (1.0 - visibility) / 2.0
    conc = math.sqrt(max(0.0, 1.0 - visibility**2))
    return Metrics(
        visibility=visibility,
        predictability=predictability,
        distinguishability=distinguishability,
        coherence=coherence,
        concurrence=conc,
        lambda_plus=lam_plus,
        lambda_minus=lam_minus,
        phi=state.phi,
        gamma=state.gamma,
    )


def concurrence(m: Metrics) -> float:
    """Entanglement of the balanced pure state, by both closed forms."""
    from_lambdas = math.sqrt(max(0.0, 2.0 * (1.0 - m.lambda_plus**2 - m.lambda_minus**2)))
    from_visibility = math.sqrt(max(0.0, 1.0 - m.visibility**2))
    if abs(from_lambdas - from_visibility) > 1e-12:
        raise ValueError("inconsistent Schmidt weights in metrics record")
    return from_visibility


def _require_projector(field_op: np.ndarray) -> None:
    if np.max(np.abs(field_op @ field_op - field_op)) > 1e-9:
        raise NotAProjector("field operator is not idempotent")


def knowledge(state: JointState, field_projector: np.ndarray) -> float:
    """Path knowledge from sorting on a projective field outcome.

    Sum of the absolute route imbalances of the click and no-click
    subensembles; reduces to the predictability for the trivial projector.
    """
    _require_projector(field_projector)
    d = state.field_dim
    rot = state.rotated()
    pp, mm = rot[:d, :d], rot[d:, d:]
    click = float((np.trace(pp @ field_projector) - np.trace(mm @ field_projector)).real)
    total = float(np.trace(pp).real - np.trace(mm).real)
    return abs(click) + abs(total - click)


def joint_visibility(state: JointState, field_projector: np.ndarray) -> float:
    """Fringe contrast recovered when sorting on a field outcome.

    Sorting-averaged contrast over the two subensembles; it can never fall
    below the unconditioned visibility and obeys the generalized duality
    against :func:`knowledge`.
    """
    _require_projector(field_projector)
    d = state.field_dim
    complement = np.eye(d) - field_projector
    total = 0.0
    for effect in (field_projector, complement):
        m = state.conditioned_label_matrix(effect)
        m_rot = BEAM_MERGER @ m @ BEAM_MERGER.conj().T
        total += 2.0 * abs(m_rot[0, 1])
    return total


def schmidt(state: JointState) -> SchmidtDecomposition:
    """Schmidt structure of the pure balanced state.

    The two field marker states are fixed to the canonical fringe and
    antifringe combinations of the outgoing states when those are
    available, which also pins the decomposition in the degenerate
    zero-visibility case.
    """
    evals, evecs = np.linalg.eigh(state.rho)
    if evals[-1] < 1.0 - 1e-6:
        raise NotPure(f"largest eigenvalue {evals[-1]:.8f} < 1")
    psi = evecs[:, -1]
    d = state.field_dim
    psi_mat = psi.reshape(2, d)
    vis = metrics(state).visibility
    lam = ((1.0 + vis) / 2.0, (1.0 - vis) / 2.0)

    canonical = _canonical_markers(state, vis)
    if canonical is not None:
        r_plus, r_minus = canonical
        mats, coords = [], []
        for lam_k, r in zip(lam, (r_plus, r_minus)):
            if lam_k < 1e-14:
                coords.append(r)
                mats.append(np.zeros(2, dtype=complex))
                continue
            m = psi_mat @ np.conj(r) / math.sqrt(lam_k)
            mats.append(m)
            coords.append(r)
        rebuilt = sum(
            math.sqrt(lam_k) * np.outer(m, r)
            for lam_k, m, r in zip(lam, mats, coords)
        )
        if np.max(np.abs(rebuilt - psi_mat)) < 1e-9:
            states = tuple(_materialize(state, r) for r in coords)
            return SchmidtDecomposition(lam, (mats[0], mats[1]), states, (coords[0], coords[1]))

    u, s, vh = np.linalg.svd(psi_mat)
    lam_svd = tuple(float(x) ** 2 for x in s[:2]) + (0.0,) * max(0, 2 - len(s))
    # a one-dimensional field span has no second Schmidt term: represent
    # the vanishing-weight partner by zero vectors
    zero = np.zeros(d, dtype=complex)
    coords = [vh[k, :] if k < vh.shape[0] else zero for k in range(2)]
    mats = [u[:, k] if k < u.shape[1] else np.zeros(2, dtype=complex) for k in range(2)]
    states = tuple(_materialize(state, r) for r in coords)
    return SchmidtDecomposition(
        (lam_svd[0], lam_svd[1]), (mats[0], mats[1]), states, (coords[0], coords[1])
    )


def _canonical_markers(state: JointState, vis: float) -> tuple[np.ndarray, np.ndarray] | None:
    if state.one_coords is None or state.n_coords is None:
        return None
    n1 = float(np.linalg.norm(state.one_coords))
    nn = float(np.linalg.norm(state.n_coords))
    if n1 < 1e-150 or nn < 1e-150 or vis >= 1.0 - 1e-12:
        return None
    a_one = state.one_coords / n1
    a_n = state.n_coords / nn
    phase = cmath.exp(1j * state.phi)
    lam_plus = (1.0 + vis) / 2.0
    lam_minus = (1.0 - vis) / 2.0
    r_plus = (phase * a_one + a_n) / (2.0 * math.sqrt(lam_plus))
    r_minus = (-phase * a_one + a_n) / (2.0 * math.sqrt(lam_minus))
    return r_plus, r_minus


def _materialize(state: JointState, coords: np.ndarray) -> FieldState:
    return FieldState.superpose(list(coords), list(state.field_basis))


def symmetric_state(
    one_photon_out: FieldState, n_photon_out: FieldState, gamma: float, sigma: int = PLUS
) -> JointState:
    """Pure balanced state assembled from a pair of outgoing field states."""
    table = AmplitudeTable.symmetric(
        gamma, one_photon_out.computed_norm2(), n_photon_out.computed_norm2(), sigma
    )
    return assemble_final_state(
        table, InputDistribution.single_port(sigma), one_photon_out, n_photon_out
    )


def synthetic_outgoing_pair(
    visibility: float, phi: float = 0.0, one_norm2: float = 1.0, n_norm2: float = 1.0
) -> tuple[FieldState, FieldState]:
    """Minimal pair of field states with a prescribed normalized overlap.

    Sweep utility: a single mode with photon cap one suffices to realize
    any overlap magnitude and phase, which is all the metrics depend on.
    """
    if not (0.0 <= visibility <= 1.0):
        raise ValueError("overlap magnitude must lie in [0, 1]")
    from .field import EffectiveModeBasis

    basis = EffectiveModeBasis.orthonormal(("probe",))
    one_out = FieldState(basis, 1, {(0,): math.sqrt(one_norm2) + 0.0j}, one_norm2)
    amp0 = visibility * cmath.exp(1j * phi) * math.sqrt(n_norm2)
    amp1 = math.sqrt(max(0.0, 1.0 - visibility**2)) * math.sqrt(n_norm2)
    amps = {occ: a for occ, a in (((0,), amp0), ((1,), amp1)) if a != 0}
    n_out = FieldState(basis, 1, amps, n_norm2)
    return one_out, n_out
