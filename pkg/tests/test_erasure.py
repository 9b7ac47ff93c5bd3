"""Which-way readout, erasure conditioning, and the displaced threshold scheme."""

import math

import numpy as np
import pytest

from ccilab.erasure import (
    DirectionUnreachable,
    Indistinguishable,
    InvalidPhotonNumbers,
    conditioned_ports,
    erasure_projector,
    max_noclick_weight,
    nonerasing_counterexample,
    optimal_aux_direction,
    optimal_aux_norm,
    optimal_ww_observable,
    threshold_closed_forms,
    threshold_scheme,
)
from ccilab.field import EffectiveModeBasis, FieldState, PhotonStatistics, outgoing_pair
from ccilab.interferometer import (
    NotAProjector,
    knowledge,
    metrics,
    schmidt,
    symmetric_state,
    synthetic_outgoing_pair,
)


def fock_pair(n1=2, n2=1, n=2):
    basis = EffectiveModeBasis.orthonormal(("wp1", "wp2"))
    return outgoing_pair(PhotonStatistics.fock(n1), PhotonStatistics.fock(n2), n, basis)


def test_ww_observable_extracts_full_knowledge_on_fock():
    one_out, n_out = fock_pair()
    state = symmetric_state(one_out, n_out, 0.7)
    obs = optimal_ww_observable(one_out, n_out)
    matrix = obs.in_state_basis(state)
    positive = 0.5 * (matrix + np.eye(state.field_dim))  # spectrum {0, 1} here
    assert knowledge(state, positive) == pytest.approx(1.0, abs=1e-9)


def test_ww_observable_nearly_proportional():
    vis = 0.99
    one_out, n_out = synthetic_outgoing_pair(vis, 0.0)
    state = symmetric_state(one_out, n_out, 0.0)
    obs = optimal_ww_observable(one_out, n_out)
    matrix = obs.in_state_basis(state)
    evals, evecs = np.linalg.eigh(matrix)
    positive = evecs[:, evals > 0.5] @ evecs[:, evals > 0.5].conj().T
    target = math.sqrt(1.0 - vis**2)
    assert knowledge(state, positive) == pytest.approx(target, abs=1e-9)
    assert metrics(state).distinguishability == pytest.approx(target, abs=1e-9)


def test_ww_observable_indistinguishable_raises():
    one_out, n_out = synthetic_outgoing_pair(1.0, 0.0)
    with pytest.raises(Indistinguishable):
        optimal_ww_observable(one_out, n_out)


@pytest.mark.parametrize("vis,weights", [(0.0, (0.5, 0.5)), (0.6, (0.8, 0.2))])
def test_erasure_projector_full_contrast(vis, weights):
    gamma = 0.9
    one_out, n_out = synthetic_outgoing_pair(vis, 0.3)
    state = symmetric_state(one_out, n_out, gamma)
    ports = conditioned_ports(state, erasure_projector(schmidt(state)))
    assert ports.click_weight == pytest.approx(weights[0], abs=1e-9)
    target = 0.5 * (1 + math.cos(state.phi + gamma))
    assert ports.click[+1] == pytest.approx(target, abs=1e-9)
    # no-click side shows antifringes at full contrast
    assert ports.noclick[+1] == pytest.approx(1 - target, abs=1e-9)


def test_erasure_projector_trivial_at_unit_visibility():
    one_out, n_out = synthetic_outgoing_pair(1.0, 0.0)
    state = symmetric_state(one_out, n_out, 0.2)
    ports = conditioned_ports(state, erasure_projector(schmidt(state)))
    assert ports.click_weight == pytest.approx(1.0, abs=1e-9)
    assert ports.click[+1] == pytest.approx(0.5 * (1 + math.cos(0.2)), abs=1e-9)


def test_conditioned_ports_rejects_non_projector():
    one_out, n_out = fock_pair()
    state = symmetric_state(one_out, n_out, 0.0)
    with pytest.raises(NotAProjector):
        conditioned_ports(state, 0.7 * np.eye(state.field_dim))


def test_erasure_projector_carries_no_which_way_knowledge():
    # the fringe marker outcome cannot identify the route: zero knowledge
    for vis in (0.0, 0.4, 0.8):
        one_out, n_out = synthetic_outgoing_pair(vis, 0.6)
        state = symmetric_state(one_out, n_out, 0.3)
        proj = erasure_projector(schmidt(state)).in_state_basis(state)
        assert knowledge(state, proj) == pytest.approx(0.0, abs=1e-10)


def test_threshold_optimum_values():
    alpha, beta, u = optimal_aux_direction(2, 1)
    assert u == pytest.approx(1.5, abs=1e-12)
    assert alpha == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-12)
    assert beta == pytest.approx(math.sqrt(1.0 / 3.0), abs=1e-12)
    norm = optimal_aux_norm(2, 1, 2, (alpha, beta))
    assert norm == pytest.approx(math.sqrt(1.5), abs=1e-9)
    report = threshold_scheme(2, 1, 2, (alpha, beta), norm)
    assert report.v_noclick == pytest.approx(1.0, abs=1e-9)
    assert report.weight_noclick == pytest.approx(math.exp(-1.5) / 2.0, abs=1e-12)
    assert report.v_click == pytest.approx(1.0 / (2.0 * math.exp(1.5) - 1.0), abs=1e-12)
    assert report.matrix_weight == pytest.approx(report.weight_noclick, abs=1e-9)
    assert report.matrix_v_noclick == pytest.approx(report.v_noclick, abs=1e-9)
    # book-keeping identity between the two subensembles
    lhs = report.v_click * (1 - report.weight_noclick)
    assert lhs == pytest.approx(report.v_noclick * report.weight_noclick, abs=1e-10)


def test_threshold_small_amplitude_limit():
    report = threshold_scheme(2, 1, 2, (0.8, 0.6), 1e-4)
    # no vacuum component in either outgoing state: weight collapses
    assert report.weight_noclick < 1e-7
    assert report.v_noclick < 1e-3


def test_threshold_off_optimum_contrast_below_one():
    alpha, beta, _ = optimal_aux_direction(2, 1)
    report = threshold_scheme(2, 1, 2, (alpha, beta), 1.0)
    assert report.v_noclick < 1.0 - 1e-3


def test_threshold_phases_shift_fringes_not_contrast():
    alpha, beta, _ = optimal_aux_direction(2, 1)
    norm = optimal_aux_norm(2, 1, 2, (alpha, beta))
    plain = threshold_scheme(2, 1, 2, (alpha, beta), norm)
    shifted = threshold_scheme(2, 1, 2, (alpha, beta), norm, phases=(0.7, -0.4))
    assert shifted.v_noclick == pytest.approx(plain.v_noclick, abs=1e-9)
    assert shifted.weight_noclick == pytest.approx(plain.weight_noclick, abs=1e-12)


def test_threshold_matrix_agreement_across_photon_numbers():
    rng = np.random.default_rng(21)
    for n1 in range(2, 7):
        for n2 in range(1, 5):
            angle = rng.uniform(0.2, math.pi / 2 - 0.2)
            overlaps = (math.cos(angle), math.sin(angle))
            norm = rng.uniform(0.4, 2.0)
            report = threshold_scheme(n1, n2, 2, overlaps, norm)
            assert report.matrix_v_noclick == pytest.approx(report.v_noclick, abs=1e-9)
            assert report.matrix_weight == pytest.approx(report.weight_noclick, abs=1e-9)
            assert report.matrix_v_click == pytest.approx(report.v_click, abs=1e-9)


def test_optimal_norm_algebraic_specialization():
    # equal overlaps: the optimum reduces to the bare photon-number factor
    a = 1.0 / math.sqrt(2.0)
    for n1, n2 in [(2, 1), (3, 2), (5, 1)]:
        expected = 1.0 / (a * math.sqrt(n2 * math.factorial(n1 - 2) / math.factorial(n1)))
        assert optimal_aux_norm(n1, n2, 2, (a, a)) == pytest.approx(expected, rel=1e-12)
        report = threshold_scheme(n1, n2, 2, (a, a), optimal_aux_norm(n1, n2, 2, (a, a)))
        assert report.v_noclick == pytest.approx(1.0, abs=1e-9)


def test_optimal_norm_unreachable_direction():
    with pytest.raises(DirectionUnreachable):
        optimal_aux_norm(2, 1, 2, (1.0, 0.0))


def test_invalid_photon_numbers():
    with pytest.raises(InvalidPhotonNumbers):
        threshold_scheme(1, 1, 2, (0.7, 0.7), 1.0)
    with pytest.raises(InvalidPhotonNumbers):
        optimal_aux_direction(1, 1)


def test_direction_formula_for_larger_n1():
    _, _, u = optimal_aux_direction(4, 1)
    assert u == pytest.approx(0.25 * (3 + math.sqrt(1 + 8 * 4 / 12)), abs=1e-12)


def test_two_one_is_the_global_weight_maximum():
    best = max_noclick_weight(2, 1)
    assert best == pytest.approx(math.exp(-1.5) / 2.0, abs=1e-12)
    for n1 in range(2, 7):
        for n2 in range(1, 5):
            if (n1, n2) != (2, 1):
                assert max_noclick_weight(n1, n2) < best


def test_max_weight_formula_matches_threshold_evaluation():
    for n1, n2 in [(2, 1), (3, 1), (4, 2)]:
        alpha, beta, _ = optimal_aux_direction(n1, n2)
        norm = optimal_aux_norm(n1, n2, 2, (alpha, beta))
        _, weight = threshold_closed_forms(n1, n2, 2, (alpha, beta), norm)
        assert weight == pytest.approx(max_noclick_weight(n1, n2), rel=1e-12)


def test_nonerasing_counterexample_orthogonal():
    gamma = 1.1
    one_out, n_out = synthetic_outgoing_pair(0.0, 0.0)
    state = nonerasing_counterexample(gamma, one_out, n_out)
    m = metrics(state)
    assert m.predictability == pytest.approx(0.0, abs=1e-10)
    assert m.distinguishability == pytest.approx(0.0, abs=1e-10)
    assert m.visibility == pytest.approx(0.0, abs=1e-10)
    # conditioning on the balanced marker recovers full-contrast fringes
    marker = FieldState.superpose(
        [1 / math.sqrt(2), 1 / math.sqrt(2)], [one_out.normalized(), n_out.normalized()]
    )
    coords = state.field_coords(marker)
    ports = conditioned_ports(state, np.outer(coords, coords.conj()))
    assert ports.click[+1] == pytest.approx(0.5 * (1 + math.cos(gamma)), abs=1e-10)
    assert abs(ports.click[+1] - ports.click[-1]) == pytest.approx(
        abs(math.cos(gamma)), abs=1e-10
    )


def test_nonerasing_counterexample_gamma_zero_population():
    one_out, n_out = synthetic_outgoing_pair(0.0, 0.0)
    state = nonerasing_counterexample(0.0, one_out, n_out)
    marker = FieldState.superpose(
        [1 / math.sqrt(2), 1 / math.sqrt(2)], [one_out.normalized(), n_out.normalized()]
    )
    coords = state.field_coords(marker)
    ports = conditioned_ports(state, np.outer(coords, coords.conj()))
    assert ports.click[+1] == pytest.approx(1.0, abs=1e-10)


def test_nonerasing_counterexample_proportional_phase_grid():
    # proportional outgoing pair with overlap phase phi: recoverable
    # contrast collapses to |cos phi|
    for phi in np.linspace(-math.pi, math.pi, 15):
        one_out, n_out = synthetic_outgoing_pair(1.0, float(phi))
        state = nonerasing_counterexample(0.4, one_out, n_out)
        m = metrics(state)
        assert m.coherence == pytest.approx(abs(math.cos(phi)), abs=1e-9)
        assert m.visibility == pytest.approx(abs(math.cos(phi)), abs=1e-9)
        assert m.distinguishability == pytest.approx(0.0, abs=1e-10)


def test_nonerasing_counterexample_is_separable_mixture():
    # explicit convex mixture of two product-correlated terms stays positive
    one_out, n_out = synthetic_outgoing_pair(0.0, 0.0)
    state = nonerasing_counterexample(0.9, one_out, n_out)
    evals = np.linalg.eigvalsh(state.rho)
    assert np.min(evals) > -1e-12
    assert sorted(np.round(evals, 10))[-2:] == [0.5, 0.5]
