"""Brute-force oracles: dense metrics, toy dynamics, enumeration, grids."""

import math

import numpy as np
import pytest

from ccilab.field import coherent_amplitude
from ccilab.interferometer import (
    AmplitudeTable,
    InputDistribution,
    assemble_final_state,
    metrics,
    symmetric_state,
    synthetic_outgoing_pair,
)
from ccilab.oracle import (
    ToySystem,
    dense_metrics,
    grid_optimize,
    lhv_enumerate,
    toy_first_order,
)

METRIC_FIELDS = (
    "visibility",
    "predictability",
    "distinguishability",
    "coherence",
    "concurrence",
    "lambda_plus",
    "lambda_minus",
)


def test_dense_metrics_on_saturated_case():
    one_out, n_out = synthetic_outgoing_pair(0.0, 0.0)
    m = dense_metrics(symmetric_state(one_out, n_out, 0.3))
    assert m.visibility == pytest.approx(0.0, abs=1e-12)
    assert m.predictability == pytest.approx(0.0, abs=1e-12)
    assert m.distinguishability == pytest.approx(1.0, abs=1e-12)
    assert m.coherence == pytest.approx(1.0, abs=1e-12)


def test_dense_metrics_product_state():
    one_out, n_out = synthetic_outgoing_pair(1.0, 0.0)
    m = dense_metrics(symmetric_state(one_out, n_out, 0.0))
    # sqrt(1 - V^2) amplifies machine roundoff in V to ~1e-8
    assert m.concurrence == pytest.approx(0.0, abs=1e-7)


def test_dense_metrics_matches_primary_randomized():
    rng = np.random.default_rng(51)
    for _ in range(40):
        one_out, n_out = synthetic_outgoing_pair(
            rng.uniform(0, 1), rng.uniform(-3, 3), rng.uniform(0.3, 2), rng.uniform(0.3, 2)
        )
        table = AmplitudeTable(
            {(e, s, 0): complex(rng.normal(), rng.normal()) for e in (1, -1) for s in (1, -1)},
            {(e, s, 0): complex(rng.normal(), rng.normal()) for e in (1, -1) for s in (1, -1)},
        )
        p = rng.uniform(0, 1)
        state = assemble_final_state(
            table, InputDistribution({1: p, -1: 1 - p}), one_out, n_out
        )
        a, b = metrics(state), dense_metrics(state)
        for name in METRIC_FIELDS:
            assert getattr(a, name) == pytest.approx(getattr(b, name), abs=1e-9)


def test_toy_zero_coupling():
    system = ToySystem.two_level(gap=3.0)
    assert toy_first_order(system, g=0.0, duration=2.0) == 0.0


def test_toy_resonant_linear_growth():
    system = ToySystem.two_level(gap=5.0)
    g, duration = 0.01, 1.0
    amp = toy_first_order(system, g, duration)
    expected = g * duration / 1j
    assert abs(amp - expected) <= max(1e-3, (g * duration) ** 2) * abs(expected)
    assert abs(amp) == pytest.approx(g * duration, rel=1e-4)


def test_toy_population_quadratic_in_coupling():
    system = ToySystem.two_level(gap=5.0)
    duration = 0.5
    p1 = abs(toy_first_order(system, 0.01, duration)) ** 2
    p2 = abs(toy_first_order(system, 0.02, duration)) ** 2
    assert p2 / p1 == pytest.approx(4.0, rel=1e-3)


def test_toy_detuned_sinc_suppression():
    detuning, duration, g = 8.0, 4.0, 0.01
    system = ToySystem.two_level(gap=5.0, detuning=detuning)
    amp = toy_first_order(system, g, duration)
    half = detuning * duration / 2.0
    predicted = g * duration * abs(math.sin(half) / half)
    assert abs(amp) == pytest.approx(predicted, rel=2e-3)


def test_toy_dimension_cap():
    with pytest.raises(ValueError):
        ToySystem((0.0, 1.0, 2.0), 1.0, np.zeros((3, 3)), photon_cutoff=100)


def test_lhv_patterns():
    assert lhv_enumerate((1, 1, 1, -1)) == 2.0
    assert lhv_enumerate((1, 1, -1, 1)) == 2.0
    assert lhv_enumerate((-1, -1, -1, 1)) == 2.0
    assert lhv_enumerate((0, 0, 1, 0)) == 1.0


def test_grid_optimize_quadratic_vertex():
    point, value = grid_optimize(lambda x: 1.0 - (x - 0.37) ** 2, [(0.0, 1.0)], resolution=64)
    assert point[0] == pytest.approx(0.37, abs=1e-7)
    assert value == pytest.approx(1.0, abs=1e-12)


def test_grid_optimize_threshold_weight_objective():
    # generic Born-rule objective, no closed forms from the threshold
    # analysis: product of the projection amplitudes of the two outgoing
    # Fock states onto a two-mode coherent state (the usable weight)
    n1, n2, n = 2, 1, 2

    def usable_weight(a, norm):
        b = math.sqrt(max(0.0, 1.0 - a * a))
        z = (norm * a, norm * b)
        one = coherent_amplitude(z, (n1, n2 - 1))
        multi = coherent_amplitude(z, (n1 - n, n2))
        return abs(one) * abs(multi)

    (a_best, norm_best), best = grid_optimize(
        usable_weight, [(0.0, 1.0), (1e-6, 4.0)], resolution=400
    )
    assert a_best**2 == pytest.approx(2.0 / 3.0, abs=1e-6)
    assert norm_best**2 == pytest.approx(1.5, abs=1e-6)
    assert best == pytest.approx(math.exp(-1.5) / 2.0, abs=1e-9)
