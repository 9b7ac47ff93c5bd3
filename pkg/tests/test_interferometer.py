"""Joint-state assembly and the wave/particle metric suite."""

import math

import numpy as np
import pytest

from ccilab.field import EffectiveModeBasis, PhotonStatistics, outgoing_pair
from ccilab.interferometer import (
    PLUS,
    MINUS,
    AmplitudeTable,
    DegenerateState,
    InputDistribution,
    NotAProjector,
    NotPure,
    assemble_final_state,
    concurrence,
    joint_visibility,
    knowledge,
    metrics,
    port_population,
    port_populations,
    rotation,
    schmidt,
    symmetric_state,
    synthetic_outgoing_pair,
)


def fock_pair(n1=2, n2=1, n=2):
    basis = EffectiveModeBasis.orthonormal(("wp1", "wp2"))
    return outgoing_pair(PhotonStatistics.fock(n1), PhotonStatistics.fock(n2), n, basis)


def coherent_pair(f1=1.1, f2=0.7, n=2, theta1=0.0, theta2=0.0):
    basis = EffectiveModeBasis.orthonormal(("wp1", "wp2"))
    return outgoing_pair(
        PhotonStatistics.coherent(f1, theta1), PhotonStatistics.coherent(f2, theta2), n, basis
    )


def random_state(rng, dist=None):
    one_out, n_out = synthetic_outgoing_pair(
        rng.uniform(0, 1), rng.uniform(-math.pi, math.pi), rng.uniform(0.3, 2), rng.uniform(0.3, 2)
    )
    one = {(e, s, 0): complex(rng.normal(), rng.normal()) for e in (1, -1) for s in (1, -1)}
    npho = {(e, s, 0): complex(rng.normal(), rng.normal()) for e in (1, -1) for s in (1, -1)}
    if dist is None:
        p = rng.uniform(0, 1)
        dist = InputDistribution({PLUS: p, MINUS: 1 - p})
    return assemble_final_state(AmplitudeTable(one, npho), dist, one_out, n_out)


def random_projector(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def test_rotation_identity_and_merger():
    assert np.allclose(rotation(0.0), np.eye(2))
    merger = rotation(math.pi / 4)
    assert np.allclose(merger, np.array([[1, 1], [-1, 1]]) / math.sqrt(2))
    zeta = 0.3 + 0.2j
    assert np.allclose(rotation(zeta) @ rotation(-zeta), np.eye(2), atol=1e-12)
    r = rotation(zeta)
    assert np.allclose(r @ r.conj().T, np.eye(2), atol=1e-12)


def test_open_configuration_flat_ports():
    # fully biased table: each route exits at one port, populations stay
    # half/half whatever the control phases do
    for theta1 in (0.0, 0.9):
        for theta2 in (0.0, -1.4):
            one_out, n_out = coherent_pair(theta1=theta1, theta2=theta2)
            table = AmplitudeTable.open_config(
                0.3, one_out.computed_norm2(), n_out.computed_norm2()
            )
            state = assemble_final_state(
                table, InputDistribution.single_port(PLUS), one_out, n_out
            )
            assert port_population(state, PLUS) == pytest.approx(0.5, abs=1e-12)
            assert port_population(state, MINUS) == pytest.approx(0.5, abs=1e-12)


def test_symmetric_fringe_law():
    gamma = 0.8
    for theta1, theta2 in [(0.0, 0.0), (0.5, -0.3)]:
        one_out, n_out = coherent_pair(theta1=theta1, theta2=theta2)
        state = symmetric_state(one_out, n_out, gamma)
        phi = state.phi
        expected = 0.5 * (1 + math.cos(phi + gamma))
        assert port_population(state, PLUS) == pytest.approx(expected, abs=1e-12)
        assert sum(port_populations(state).values()) == pytest.approx(1.0, abs=1e-12)


def test_one_route_only():
    one_out, n_out = fock_pair()
    table = AmplitudeTable(
        one_photon={(e, PLUS, 0): 1.0 for e in (PLUS, MINUS)}, n_photon={}
    )
    state = assemble_final_state(table, InputDistribution.single_port(PLUS), one_out, n_out)
    m = metrics(state)
    assert m.visibility == pytest.approx(0.0, abs=1e-12)
    assert m.predictability == pytest.approx(1.0, abs=1e-12)


def test_degenerate_assembly_raises():
    one_out, n_out = fock_pair()
    with pytest.raises(DegenerateState):
        assemble_final_state(
            AmplitudeTable({}, {}), InputDistribution.single_port(PLUS), one_out, n_out
        )


def test_metrics_fock_saturation():
    one_out, n_out = fock_pair()
    m = metrics(symmetric_state(one_out, n_out, 0.4))
    assert m.visibility == pytest.approx(0.0, abs=1e-12)
    assert m.predictability == pytest.approx(0.0, abs=1e-12)
    assert m.distinguishability == pytest.approx(1.0, abs=1e-12)
    assert m.coherence == pytest.approx(1.0, abs=1e-12)


def test_metrics_coherent_full_visibility():
    one_out, n_out = coherent_pair()
    m = metrics(symmetric_state(one_out, n_out, 0.0))
    assert m.visibility == pytest.approx(1.0, abs=1e-9)
    assert m.distinguishability == pytest.approx(0.0, abs=1e-6)


def test_knowledge_identity_gives_predictability():
    rng = np.random.default_rng(0)
    for _ in range(10):
        state = random_state(rng)
        m = metrics(state)
        k = knowledge(state, np.eye(state.field_dim))
        assert k == pytest.approx(m.predictability, abs=1e-12)


def test_knowledge_requires_projector():
    one_out, n_out = fock_pair()
    state = symmetric_state(one_out, n_out, 0.0)
    with pytest.raises(NotAProjector):
        knowledge(state, 0.5 * np.eye(state.field_dim))


def test_schmidt_weights_against_field_eigenvalues():
    # independent oracle: Schmidt weights are the eigenvalues of the
    # reduced field matrix
    for vis in (0.0, 0.35, 0.6, 0.95):
        one_out, n_out = synthetic_outgoing_pair(vis, 0.4)
        state = symmetric_state(one_out, n_out, 1.2)
        dec = schmidt(state)
        assert dec.lambdas[0] == pytest.approx((1 + vis) / 2, abs=1e-12)
        assert dec.lambdas[1] == pytest.approx((1 - vis) / 2, abs=1e-12)
        evals = np.sort(np.linalg.eigvalsh(state.reduced_field()))[::-1]
        assert evals[0] == pytest.approx(dec.lambdas[0], abs=1e-10)
        assert evals[1] == pytest.approx(dec.lambdas[1], abs=1e-10)


def test_schmidt_reconstruction_and_orthonormality():
    rng = np.random.default_rng(7)
    for _ in range(10):
        vis = rng.uniform(0, 0.98)
        one_out, n_out = synthetic_outgoing_pair(vis, rng.uniform(-3, 3))
        state = symmetric_state(one_out, n_out, rng.uniform(-3, 3))
        dec = schmidt(state)
        r_plus, r_minus = dec.field_coords
        assert abs(np.vdot(r_plus, r_minus)) < 1e-9
        assert np.vdot(r_plus, r_plus).real == pytest.approx(1.0, abs=1e-9)
        evals, evecs = np.linalg.eigh(state.rho)
        psi = evecs[:, -1].reshape(2, state.field_dim)
        rebuilt = sum(
            math.sqrt(lam) * np.outer(m, r)
            for lam, m, r in zip(dec.lambdas, dec.material, dec.field_coords)
        )
        # global phase freedom between psi and the reconstruction
        phase = np.vdot(rebuilt.ravel(), psi.ravel())
        phase /= abs(phase)
        assert np.max(np.abs(psi - phase * rebuilt)) < 1e-9


def test_schmidt_product_state_limit():
    one_out, n_out = synthetic_outgoing_pair(1.0, 0.0)
    state = symmetric_state(one_out, n_out, 0.0)
    dec = schmidt(state)
    assert dec.lambdas[0] == pytest.approx(1.0, abs=1e-12)
    assert dec.lambdas[1] == pytest.approx(0.0, abs=1e-12)


def test_schmidt_requires_purity():
    rng = np.random.default_rng(1)
    state = random_state(rng, InputDistribution({PLUS: 0.5, MINUS: 0.5}))
    if np.max(np.linalg.eigvalsh(state.rho)) < 1 - 1e-6:
        with pytest.raises(NotPure):
            schmidt(state)


def test_concurrence_closed_forms():
    for vis, expected in [(0.0, 1.0), (1.0, 0.0), (0.6, 0.8)]:
        one_out, n_out = synthetic_outgoing_pair(vis, 0.0)
        m = metrics(symmetric_state(one_out, n_out, 0.0))
        assert concurrence(m) == pytest.approx(expected, abs=1e-12)


def test_metrics_invariant_under_table_rescaling():
    rng = np.random.default_rng(3)
    one_out, n_out = synthetic_outgoing_pair(0.45, 1.0)
    one = {(e, s, 0): complex(rng.normal(), rng.normal()) for e in (1, -1) for s in (1, -1)}
    npho = {(e, s, 0): complex(rng.normal(), rng.normal()) for e in (1, -1) for s in (1, -1)}
    table = AmplitudeTable(one, npho)
    dist = InputDistribution({PLUS: 0.7, MINUS: 0.3})
    base = metrics(assemble_final_state(table, dist, one_out, n_out))
    scaled = metrics(
        assemble_final_state(table.scaled(0.3 - 1.7j), dist, one_out, n_out)
    )
    for name in (
        "visibility",
        "predictability",
        "distinguishability",
        "coherence",
        "concurrence",
        "lambda_plus",
        "lambda_minus",
    ):
        assert getattr(base, name) == pytest.approx(getattr(scaled, name), abs=1e-10)


def test_duality_and_sorting_properties():
    rng = np.random.default_rng(11)
    for _ in range(40):
        state = random_state(rng)
        m = metrics(state)
        assert m.visibility**2 + m.predictability**2 <= 1 + 1e-9
        for _ in range(5):
            proj = random_projector(rng, state.field_dim)
            k = knowledge(state, proj)
            v = joint_visibility(state, proj)
            assert v**2 + k**2 <= 1 + 1e-9
            assert k <= m.distinguishability + 1e-9
            assert v >= m.visibility - 1e-9


def test_law_of_total_expectation():
    from ccilab.erasure import conditioned_ports

    rng = np.random.default_rng(13)
    for _ in range(20):
        state = random_state(rng)
        proj = random_projector(rng, state.field_dim)
        ports = conditioned_ports(state, proj)
        for eta in (PLUS, MINUS):
            combined = (
                ports.click_weight * ports.click[eta]
                + (1 - ports.click_weight) * ports.noclick[eta]
            )
            assert combined == pytest.approx(port_population(state, eta), abs=1e-12)
