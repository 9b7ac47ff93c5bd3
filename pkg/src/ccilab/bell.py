"""CHSH tests joining the port label with measurements on the outgoing light.

Two constructive settings are provided.  The erasure setting pairs label
observables tilted by the fringe phase with the two antithetic field
strategies - the optimal which-way observable and the fringe/antifringe
marker observable - and reaches 2*sqrt(2 - V^2) on the balanced pure
state.  The wave/particle-superposition setting measures the field in the
branch span and follows a one-parameter family in the branch overlap,
reaching the quantum ceiling 2*sqrt(2) at overlap 1/sqrt(2).

The classical bound of 2 is established independently by exhausting all
deterministic outcome assignments; no quantum formalism enters there.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .erasure import FieldObservable, Indistinguishable, optimal_ww_observable
from .field import FieldState
from .interferometer import JointState, SchmidtDecomposition, span_basis

PAULI = {
    1: np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    2: np.array([[0.0, -1j], [1j, 0.0]], dtype=complex),
    3: np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

CHSH_SIGNS = (1, 1, 1, -1)
TSIRELSON = 2.0 * math.sqrt(2.0)


class OverlapOutOfRange(Exception):
    """Branch overlap outside the open interval (0, 1)."""


def pseudospin(axis: int) -> np.ndarray:
    """Hermitian unitary label operators; axis 3 is the port observable."""
    if axis not in PAULI:
        raise ValueError("axis must be 1, 2 or 3")
    return PAULI[axis].copy()


@dataclass(frozen=True)
class BellSetting:
    """Four dichotomous observables of one CHSH test."""

    o_m: np.ndarray
    o_m_prime: np.ndarray
    o_r: FieldObservable
    o_r_prime: FieldObservable

    def __post_init__(self):
        for name, op in (("o_m", self.o_m), ("o_m_prime", self.o_m_prime)):
            op = np.asarray(op, dtype=complex)
            if np.max(np.abs(op @ op - np.eye(2))) > 1e-9:
                raise ValueError(f"{name} must square to the identity")
        for name, obs in (("o_r", self.o_r), ("o_r_prime", self.o_r_prime)):
            m = obs.matrix
            if np.max(np.abs(m @ m - np.eye(m.shape[0]))) > 1e-9:
                raise ValueError(f"{name} must square to the identity on its span")


def erasure_setting(
    visibility: float,
    phi: float,
    gamma: float,
    one_photon_out: FieldState,
    n_photon_out: FieldState,
    decomposition: SchmidtDecomposition,
) -> BellSetting:
    """CHSH observables for the balanced erasure scenario.

    The label observables mix the fringe-phase rotation with a which-way
    component weighted by sqrt(1 - V^2); the field side pairs the
    fringe/antifringe marker observable with the optimal which-way
    observable.  Degenerate at V = 1, where no which-way record exists.

    ``phi`` must be the same overlap-phase convention the Schmidt markers
    were built with (the joint state's stored value); at zero visibility
    the phase is conventional but the two must still agree.
    """
    if visibility >= 1.0 - 1e-9:
        raise Indistinguishable("visibility 1 leaves no which-way observable to measure")
    pref = 1.0 / math.sqrt(2.0 - visibility**2)
    ww_weight = math.sqrt(1.0 - visibility**2)
    tilt = -math.sin(phi + gamma) * PAULI[2] + math.cos(phi + gamma) * PAULI[3]
    o_m = pref * (-ww_weight * PAULI[1] + tilt)
    o_m_prime = pref * (ww_weight * PAULI[1] + tilt)

    marker = FieldObservable(
        np.diag([1.0, -1.0]).astype(complex), decomposition.field_states, dichotomous=True
    )
    ww = optimal_ww_observable(one_photon_out, n_photon_out)
    return BellSetting(o_m, o_m_prime, o_r=marker, o_r_prime=ww)


def erasure_closed_form(visibility: float) -> float:
    return 2.0 * math.sqrt(2.0 - visibility**2)


def delayed_choice_setting(
    overlap: float, open_branch: FieldState, closed_branch: FieldState
) -> BellSetting:
    """CHSH observables for the wave/particle superposition at control phase 0.

    One-parameter family in the branch overlap; the field observables live
    on the two-dimensional branch span, the label observables interpolate
    between the port observable and the transverse pseudospin.
    """
    if not (0.0 < overlap < 1.0):
        raise OverlapOutOfRange(f"branch overlap must be in (0, 1), got {overlap}")
    s = float(overlap)
    basis, coords = span_basis([open_branch, closed_branch])
    v_open, v_closed = coords[0], coords[1]
    p_open = np.outer(v_open, v_open.conj())
    p_closed = np.outer(v_closed, v_closed.conj())
    cross = np.outer(v_closed, v_open.conj())
    o_r = (-s * (p_closed + p_open) + cross + cross.conj().T) / (1.0 - s**2)
    o_r_prime = (p_closed - p_open) / math.sqrt(1.0 - s**2)

    root = math.sqrt(1.0 - s**2)
    den = math.sqrt(6.0 - 4.0 * math.sqrt(2.0) * s)
    o_m = ((-math.sqrt(2.0) + s - root) * PAULI[2] + (-math.sqrt(2.0) + s + root) * PAULI[3]) / den
    o_m_prime = (
        (-math.sqrt(2.0) + s + root) * PAULI[2] + (-math.sqrt(2.0) + s - root) * PAULI[3]
    ) / den
    return BellSetting(
        o_m,
        o_m_prime,
        o_r=FieldObservable(o_r, tuple(basis), dichotomous=True),
        o_r_prime=FieldObservable(o_r_prime, tuple(basis), dichotomous=True),
    )


def delayed_choice_closed_form(phi: float, overlap: float) -> float:
    """CHSH value of the optimal family at control phase phi and overlap s.

    Exceeds 2 whenever the branches are distinguishable at all (s < 1);
    at phi = 0 it reduces to 2*sqrt(6 - 4*sqrt(2)*s)/(2 - sqrt(2)*s).
    """
    s = float(overlap)
    den = 2.0 - s / math.sqrt(2.0) * (math.cos(phi) + math.cos(2.0 * phi) - math.sin(phi))
    return 2.0 * math.sqrt(1.0 + (1.0 - s**2) * (2.0 + math.sin(2.0 * phi)) / den**2)


def bell_expectation(state: JointState, setting: BellSetting) -> float:
    """Expectation of the CHSH combination on a joint state."""
    r = setting.o_r.in_state_basis(state)
    rp = setting.o_r_prime.in_state_basis(state)
    total = (
        state.expectation(setting.o_m, r)
        + state.expectation(setting.o_m_prime, r)
        + state.expectation(setting.o_m, rp)
        - state.expectation(setting.o_m_prime, rp)
    )
    return float(total.real)


def lhv_bound(signs: tuple[int, int, int, int] = CHSH_SIGNS) -> float:
    """Classical ceiling of a signed four-correlator combination.

    Exhausts all 16 deterministic assignments of +-1 outcomes; for any
    CHSH-type sign pattern the result is exactly 2.
    """
    best = 0.0
    for a, ap, b, bp in itertools.product((1, -1), repeat=4):
        value = signs[0] * a * b + signs[1] * ap * b + signs[2] * a * bp + signs[3] * ap * bp
        best = max(best, abs(value))
    return float(best)
