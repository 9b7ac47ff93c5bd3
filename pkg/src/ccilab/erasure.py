"""Optimal which-way readout, quantum erasure, and the homodyne threshold scheme.

Sorting the interferometer clicks on a field measurement either extracts
path knowledge (which-way strategy) or restores fringes (erasure).  Both
optima have closed forms on the balanced pure state; this module builds
the corresponding field observables, conditions port statistics on them,
and implements the experimentally minded variant: displace the outgoing
light by an auxiliary coherent field and feed it to a click/no-click
detector, so that the no-click events project onto a coherent state.
The auxiliary amplitude and direction that make the no-click fringes
perfect have analytic forms which are re-derived here by explicit
Fock-space projection every time they are evaluated.

A deliberately constructed mixed state with zero extractable path
knowledge that still shows conditional fringes (erasure without anything
to erase) closes the module.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .field import (
    EffectiveModeBasis,
    FieldState,
    PhotonStatistics,
    coherent_state,
    build_state,
)
from .interferometer import (
    LABELS,
    BEAM_MERGER,
    JointState,
    NotAProjector,
    SchmidtDecomposition,
    span_basis,
    symmetric_state,
)


class Indistinguishable(Exception):
    """Outgoing field states are proportional: no path information exists."""


class InvalidPhotonNumbers(Exception):
    """Photon numbers incompatible with the requested excitation routes."""


class DirectionUnreachable(Exception):
    """Auxiliary mode has no overlap with a wavepacket mode it must address."""


@dataclass(frozen=True)
class FieldObservable:
    """Hermitian operator on the span of a few field states.

    The matrix lives in the orthonormal basis spanned by ``basis`` and is
    extended by zero on the orthogonal complement.  ``dichotomous`` marks
    operators whose spectrum on the span is {+1,-1} (or {0,1} for
    projectors).
    """

    matrix: np.ndarray
    basis: tuple[FieldState, ...]
    dichotomous: bool = False

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        if np.max(np.abs(m - m.conj().T)) > 1e-9:
            raise ValueError("field observable must be Hermitian")
        if self.dichotomous:
            m2 = m @ m
            ident = np.eye(m.shape[0])
            if min(np.max(np.abs(m2 - ident)), np.max(np.abs(m2 - m))) > 1e-9:
                raise ValueError("dichotomous observable must square to identity or itself")

    def in_state_basis(self, state: JointState) -> np.ndarray:
        """Matrix of this operator on the span basis of a joint state."""
        c = np.array(
            [[e.inner(o) for o in self.basis] for e in state.field_basis], dtype=complex
        )
        return c @ self.matrix @ c.conj().T


@dataclass(frozen=True)
class ConditionedPorts:
    """Port statistics sorted on a two-outcome field measurement."""

    click: dict[int, float]
    noclick: dict[int, float]
    click_weight: float


@dataclass(frozen=True)
class ThresholdReport:
    """Displaced-threshold run: closed forms next to their matrix re-derivation."""

    v_noclick: float
    v_click: float
    weight_noclick: float
    aux_norm: float
    alpha_abs: float
    beta_abs: float
    u: float
    matrix_v_noclick: float
    matrix_v_click: float
    matrix_weight: float


def optimal_ww_observable(
    one_photon_out: FieldState, n_photon_out: FieldState
) -> FieldObservable:
    """Dichotomous field observable whose outcomes best reveal the route.

    The normalized difference of the projectors onto the two outgoing
    states; its positive/negative results extract all available path
    knowledge on the balanced pure state.
    """
    n1 = one_photon_out.computed_norm2()
    nn = n_photon_out.computed_norm2()
    if n1 <= 0 or nn <= 0:
        raise Indistinguishable("an outgoing state vanishes; route is already certain")
    vis = abs(one_photon_out.inner(n_photon_out)) / math.sqrt(n1 * nn)
    if vis >= 1.0 - 1e-9:
        raise Indistinguishable("outgoing states are proportional; nothing to read out")
    basis, coords = span_basis([one_photon_out, n_photon_out])
    a1 = coords[0] / math.sqrt(n1)
    an = coords[1] / math.sqrt(nn)
    matrix = (np.outer(an, an.conj()) - np.outer(a1, a1.conj())) / math.sqrt(1.0 - vis**2)
    return FieldObservable(matrix, tuple(basis), dichotomous=True)


def erasure_projector(decomposition: SchmidtDecomposition) -> FieldObservable:
    """Projector onto the fringe marker state: clicking it erases the route."""
    matrix = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    return FieldObservable(matrix, decomposition.field_states, dichotomous=True)


def erasure_balance_observable(decomposition: SchmidtDecomposition) -> FieldObservable:
    """Fringe-minus-antifringe marker observable (both outcomes labelled)."""
    matrix = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    return FieldObservable(matrix, decomposition.field_states, dichotomous=True)


def conditioned_ports(
    state: JointState, field_projector: "FieldObservable | np.ndarray"
) -> ConditionedPorts:
    """Exact Born-rule port statistics within click and no-click subensembles."""
    proj = (
        field_projector.in_state_basis(state)
        if isinstance(field_projector, FieldObservable)
        else np.asarray(field_projector, dtype=complex)
    )
    if np.max(np.abs(proj @ proj - proj)) > 1e-9:
        raise NotAProjector("conditioning requires an idempotent field operator")
    return _effect_conditioned_ports(state, proj)


def _effect_conditioned_ports(state: JointState, effect: np.ndarray) -> ConditionedPorts:
    m_click = state.conditioned_label_matrix(effect)
    m_total = state.reduced_label()
    m_noclick = m_total - m_click
    w_click = float(np.trace(m_click).real)
    w_noclick = float(np.trace(m_noclick).real)

    def ports(m: np.ndarray, w: float) -> dict[int, float]:
        if w <= 1e-300:
            return {eta: 0.0 for eta in LABELS}
        return {eta: float(m[i, i].real) / w for i, eta in enumerate(LABELS)}

    return ConditionedPorts(ports(m_click, w_click), ports(m_noclick, w_noclick), w_click)


def _harmonic_contrast(samples: tuple[float, float, float]) -> float:
    """Michelson contrast of p(g) = A + B cos g + C sin g from 3 samples."""
    p0, p90, p180 = samples
    mean = 0.5 * (p0 + p180)
    b = 0.5 * (p0 - p180)
    c = p90 - mean
    if mean <= 1e-300:
        return 0.0
    return math.sqrt(b * b + c * c) / mean


def threshold_closed_forms(
    n1: int, n2: int, n_photon: int, overlaps: tuple[float, float], aux_norm: float
) -> tuple[float, float]:
    """Closed-form no-click visibility and no-click weight.

    ``overlaps`` are the moduli of the auxiliary mode's projections on the
    two wavepacket modes; the projections on the unnormalized auxiliary
    amplitude are those moduli scaled by ``aux_norm``.
    """
    z1 = aux_norm * overlaps[0]
    z2 = aux_norm * overlaps[1]
    f_n1 = math.factorial(n1)
    f_rem = math.factorial(n1 - n_photon)
    bracket = f_rem * n2 * z1 ** (2 * n_photon) + f_n1 * z2**2
    if bracket <= 0:
        return 0.0, 0.0
    v_noclick = 2.0 * math.sqrt(f_n1 * f_rem * n2) * z1**n_photon * z2 / bracket
    weight = (
        z1 ** (2 * (n1 - n_photon))
        * z2 ** (2 * (n2 - 1))
        * bracket
        / (2.0 * math.exp(aux_norm**2) * f_n1 * f_rem * math.factorial(n2))
    )
    return v_noclick, weight


def threshold_scheme(
    n1: int,
    n2: int,
    n_photon: int,
    overlaps: tuple[float, float],
    aux_norm: float,
    phases: tuple[float, float] = (0.0, 0.0),
) -> ThresholdReport:
    """Displaced photon-threshold erasure on a two-Fock-wavepacket input.

    Evaluates the closed forms for the no-click fringe contrast and the
    no-click weight, and independently re-derives both by assembling the
    balanced state on sharp photon numbers (n1, n2), projecting the field
    onto the displaced coherent state, and reading the fringe contrast off
    three control-phase samples.  A disagreement beyond 1e-9 is a bug and
    raises.
    """
    if n_photon < 2 or n1 < n_photon or n2 < 1:
        raise InvalidPhotonNumbers(
            f"need n1 >= n_photon >= 2 and n2 >= 1, got n1={n1}, n2={n2}, n={n_photon}"
        )
    a1, a2 = overlaps
    if not (0.0 <= a1 <= 1.0 and 0.0 <= a2 <= 1.0) or a1**2 + a2**2 > 1.0 + 1e-12:
        raise ValueError("overlaps must be moduli of a unit vector's components")
    v_cf, w_cf = threshold_closed_forms(n1, n2, n_photon, overlaps, aux_norm)
    v_click_cf = w_cf * v_cf / (1.0 - w_cf) if w_cf < 1.0 else 0.0

    v_mx, v_click_mx, w_mx = _threshold_by_projection(
        n1, n2, n_photon, overlaps, aux_norm, phases
    )
    if abs(v_mx - v_cf) > 1e-9 or abs(w_mx - w_cf) > 1e-9 or abs(v_click_mx - v_click_cf) > 1e-9:
        raise RuntimeError(
            "threshold closed forms and Fock projection disagree: "
            f"v {v_cf} vs {v_mx}, w {w_cf} vs {w_mx}, v_click {v_click_cf} vs {v_click_mx}"
        )
    return ThresholdReport(
        v_noclick=v_cf,
        v_click=v_click_cf,
        weight_noclick=w_cf,
        aux_norm=aux_norm,
        alpha_abs=a1,
        beta_abs=a2,
        u=(1.0 / a1**2) if a1 > 0 else math.inf,
        matrix_v_noclick=v_mx,
        matrix_v_click=v_click_mx,
        matrix_weight=w_mx,
    )


def _threshold_by_projection(n1, n2, n_photon, overlaps, aux_norm, phases):
    """Fock-space oracle for the threshold scheme, no closed forms involved."""
    basis = EffectiveModeBasis.orthonormal(("wp1", "wp2", "aux_rest"))
    cutoff = max(16, n1 + n_photon + 4 * math.ceil(aux_norm**2) + 8)
    one_out = build_state(
        (PhotonStatistics.fock(n1), PhotonStatistics.fock(n2), PhotonStatistics.fock(0)),
        basis,
        cutoff,
        shifts=(0, 1, 0),
    )
    n_out = build_state(
        (PhotonStatistics.fock(n1), PhotonStatistics.fock(n2), PhotonStatistics.fock(0)),
        basis,
        cutoff,
        shifts=(n_photon, 0, 0),
    )
    a1, a2 = overlaps
    rest = math.sqrt(max(0.0, 1.0 - a1**2 - a2**2))
    direction = (a1 * cmath.exp(1j * phases[0]), a2 * cmath.exp(1j * phases[1]), rest)
    aux = coherent_state(direction, aux_norm, basis, cutoff)

    samples_noclick = []
    samples_click = []
    weight = None
    for gamma in (0.0, math.pi / 2.0, math.pi):
        state = symmetric_state(one_out, n_out, gamma)
        coords = state.field_coords(aux)
        effect = np.outer(coords, coords.conj())
        sorted_ports = _effect_conditioned_ports(state, effect)
        if weight is None:
            weight = sorted_ports.click_weight
        samples_noclick.append(sorted_ports.click[+1])
        samples_click.append(sorted_ports.noclick[+1])
    # the "click" slot of the sorter is the projection onto the coherent
    # state, i.e. the detector's NO-click outcome
    v_nc = _harmonic_contrast(tuple(samples_noclick))
    v_cl = _harmonic_contrast(tuple(samples_click))
    return v_nc, v_cl, weight


def optimal_aux_norm(
    n1: int, n2: int, n_photon: int, overlaps: tuple[float, float]
) -> float:
    """Auxiliary amplitude making the no-click fringe contrast perfect."""
    if n_photon < 2 or n1 < n_photon or n2 < 1:
        raise InvalidPhotonNumbers(f"invalid photon numbers n1={n1}, n2={n2}, n={n_photon}")
    a1, a2 = overlaps
    if a2 <= 0 or a1 <= 0:
        raise DirectionUnreachable("auxiliary mode must overlap both wavepacket modes")
    base = (a1**n_photon / a2) * math.sqrt(
        n2 * math.factorial(n1 - n_photon) / math.factorial(n1)
    )
    return base ** (1.0 / (1.0 - n_photon))


def optimal_aux_direction(n1: int, n2: int) -> tuple[float, float, float]:
    """Direction maximizing the no-click weight for the two-photon route.

    Returns the moduli of the auxiliary mode's components on the two
    wavepacket modes plus the optimization parameter they derive from.
    """
    if n1 < 2 or n2 < 1:
        raise InvalidPhotonNumbers(f"two-photon route needs n1 >= 2 and n2 >= 1, got {n1}, {n2}")
    u = 0.25 * (3.0 + math.sqrt(1.0 + 8.0 * n2 * (n1 + 2 * n2 - 2) / (n1 * (n1 - 1))))
    alpha = 1.0 / math.sqrt(u)
    beta = math.sqrt(1.0 - 1.0 / u)
    return alpha, beta, u


def max_noclick_weight(n1: int, n2: int) -> float:
    """Largest no-click weight over auxiliary directions (two-photon route)."""
    _, _, u = optimal_aux_direction(n1, n2)
    ratio = n1 * (n1 - 1) / n2
    return (
        (u - 1.0) ** (n1 + 2 * n2 - 2)
        / (math.factorial(n1) * math.factorial(n2 - 1))
        * ratio ** (n1 + n2 - 1)
        * math.exp(-ratio * u * (u - 1.0))
    )


def nonerasing_counterexample(
    gamma: float, one_photon_out: FieldState, n_photon_out: FieldState
) -> JointState:
    """Separable mixed state with conditional fringes but no path record.

    An equal mixture of the balanced pure state and its label-swapped
    twin: path labels and field are completely uncorrelated (zero
    predictability and zero distinguishability), yet sorting on the fringe
    marker can still produce full-contrast fringes.  Conditional fringe
    recovery therefore certifies neither entanglement nor erased
    which-way information.
    """
    n1 = one_photon_out.computed_norm2()
    nn = n_photon_out.computed_norm2()
    if n1 <= 0 or nn <= 0:
        raise ValueError("both outgoing states must be nonzero")
    basis, coords = span_basis([one_photon_out, n_photon_out])
    d = len(basis)
    a1 = coords[0] / math.sqrt(n1)
    an = coords[1] / math.sqrt(nn)
    phase = cmath.exp(1j * gamma)
    merger_dag = np.kron(BEAM_MERGER.conj().T, np.eye(d))

    def branch(first: np.ndarray, second: np.ndarray) -> np.ndarray:
        v = np.zeros(2 * d, dtype=complex)
        v[:d] = first / math.sqrt(2.0)
        v[d:] = -phase * second / math.sqrt(2.0)
        v = merger_dag @ v
        return np.outer(v, v.conj())

    rho = 0.5 * branch(a1, an) + 0.5 * branch(an, a1)
    overlap = one_photon_out.inner(n_photon_out)
    phi = float(np.angle(overlap)) if abs(overlap) > 1e-300 else 0.0
    return JointState(rho, tuple(basis), 1.0, coords[0], coords[1], phi, gamma)
