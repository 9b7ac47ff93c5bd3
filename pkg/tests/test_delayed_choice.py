"""Cat-state preparation and wave/particle superposition statistics."""

import math

import numpy as np
import pytest

from ccilab.delayed_choice import (
    CatStateSpec,
    ConditionViolation,
    branch_projector,
    branch_states,
    cat_state,
    delayed_choice_scenario,
    delayed_choice_state,
    label_branch_concurrence,
    locked_phases,
    morphing_stats,
)
from ccilab.interferometer import metrics, port_populations


def spec_with_total(total_intensity: float, phi: float = 0.0) -> CatStateSpec:
    norm = math.sqrt(total_intensity / 4.0)
    return CatStateSpec((norm, norm), (norm, norm), *locked_phases(phi))


def test_cat_state_vacuum_limit():
    spec = CatStateSpec((0.0, 0.0), (0.0, 0.0), *locked_phases(0.0))
    cat, s = cat_state(spec)
    assert s == pytest.approx(1.0)
    assert cat.amps == {(0, 0, 0, 0): pytest.approx(1.0)}


def test_cat_state_overlap_by_contraction():
    spec = spec_with_total(math.log(2.0))
    cat, s = cat_state(spec)
    assert s == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)
    open_state, closed_state = branch_states(spec)
    assert open_state.inner(closed_state).real == pytest.approx(s, abs=1e-12)
    assert cat.computed_norm2() == pytest.approx(1.0, abs=1e-9)


def test_cat_state_macroscopic_branches_distinguishable():
    spec = spec_with_total(40.0)
    _, s = cat_state(spec)
    assert s < 1e-8


def test_scenario_trace_normalization():
    # the pre-normalization trace carries the closed-form denominator
    for phi in (0.0, 0.7, -1.9):
        for s in (0.2, 0.6, 1.0 / math.sqrt(2.0)):
            state, *_ = delayed_choice_scenario(phi, s)
            denom = 2.0 - s / math.sqrt(2.0) * (
                math.cos(phi) + math.cos(2 * phi) - math.sin(phi)
            )
            assert state.total_weight == pytest.approx(2.0 * denom, rel=1e-9)
            assert np.max(np.linalg.eigvalsh(state.rho)) > 1.0 - 1e-8


def test_near_orthogonal_branches_morph_cleanly():
    phi = 0.9
    state, spec, open_state, closed_state = delayed_choice_scenario(phi, 1e-9)
    wave = morphing_stats(state, branch_projector(state, closed_state))
    particle = morphing_stats(state, branch_projector(state, open_state))
    assert wave.click[+1] == pytest.approx(0.5 * (1 + math.cos(phi)), abs=1e-6)
    assert abs(wave.click[+1] - wave.click[-1]) == pytest.approx(abs(math.cos(phi)), abs=1e-6)
    assert particle.click[+1] == pytest.approx(0.5, abs=1e-6)
    assert wave.click_weight == pytest.approx(0.5, abs=1e-6)


def test_morphing_identity_projector_recovers_blend():
    state, *_ = delayed_choice_scenario(0.5, 0.4)
    ports = morphing_stats(state, np.eye(state.field_dim))
    assert ports.click_weight == pytest.approx(1.0, abs=1e-12)
    assert ports.click == pytest.approx(port_populations(state))


def test_wave_branch_alone_shows_fringe_law():
    # conditioning on the wave branch at moderate overlap still gives the
    # (1 +- cos phi)/2 pattern: the branch states are exactly separable
    # from the label once projected
    phi = 1.3
    state, spec, open_state, closed_state = delayed_choice_scenario(phi, 1e-9)
    wave = morphing_stats(state, branch_projector(state, closed_state))
    assert wave.click[+1] == pytest.approx((1 + math.cos(phi)) / 2, abs=1e-6)
    assert wave.click[-1] == pytest.approx((1 - math.cos(phi)) / 2, abs=1e-6)


def test_weighted_recombination_is_exact():
    state, spec, open_state, closed_state = delayed_choice_scenario(0.8, 0.35)
    # orthogonalized complement of the open branch inside the span
    proj_open = branch_projector(state, open_state)
    ports = morphing_stats(state, proj_open)
    blended = {
        eta: ports.click_weight * ports.click[eta]
        + (1 - ports.click_weight) * ports.noclick[eta]
        for eta in ports.click
    }
    assert blended == pytest.approx(port_populations(state), abs=1e-12)


def test_phase_lock_violation_raises():
    state, spec, *_ = delayed_choice_scenario(0.4, 0.5)
    bad_spec = CatStateSpec(
        spec.open_norms, spec.closed_norms, spec.gamma_open + 0.3, spec.gamma_closed, spec.branch_phase
    )
    from ccilab.interferometer import AmplitudeTable

    with pytest.raises(ConditionViolation):
        delayed_choice_state(
            AmplitudeTable({(1, -1, 0): 1.0}, {(-1, -1, 0): 1.0}),
            AmplitudeTable(
                {(1, -1, 0): 1.0, (-1, -1, 0): 1.0}, {(1, -1, 0): 1.0, (-1, -1, 0): -1.0}
            ),
            bad_spec,
            0.4,
        )


def test_table_bias_violation_raises():
    _, spec, *_ = delayed_choice_scenario(0.0, 0.5)
    from ccilab.interferometer import AmplitudeTable

    broken_open = AmplitudeTable(
        {(1, -1, 0): 1.0, (-1, -1, 0): 0.5}, {(-1, -1, 0): 1.0}
    )
    closed = AmplitudeTable(
        {(1, -1, 0): 1.0, (-1, -1, 0): 1.0}, {(1, -1, 0): 1.0, (-1, -1, 0): -1.0}
    )
    with pytest.raises(ConditionViolation):
        delayed_choice_state(broken_open, closed, spec, 0.0)


def test_entanglement_positive_for_intermediate_overlap():
    for s in (0.1, 0.5, 0.9):
        state, *_ = delayed_choice_scenario(0.0, s)
        assert label_branch_concurrence(state) > 0.01


def test_scenario_rejects_degenerate_overlap():
    with pytest.raises(ValueError):
        delayed_choice_scenario(0.0, 0.0)
    with pytest.raises(ValueError):
        delayed_choice_scenario(0.0, 1.0)


def test_unconditioned_blend_is_mixed_metrics():
    state, *_ = delayed_choice_scenario(0.6, 1e-9)
    m = metrics(state)
    # half particle (flat) plus half wave (full fringes): intermediate blend
    assert 0.0 < m.visibility < 1.0
