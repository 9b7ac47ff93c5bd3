"""Numerical laboratory for two-color phase-control interferometry.

Builds finite bipartite models of 1-vs-n photon control experiments:
truncated Fock-space field states, the postselected label/field joint
state, wave-particle complementarity metrics, optimal which-way and
erasure measurements, the displaced-threshold homodyne scheme, coherent
wave/particle superpositions, CHSH tests, and the alkali photoionization
geometry that realizes the configurations.
"""

from . import alkali, bell, delayed_choice, erasure, field, interferometer, oracle, response

__all__ = [
    "alkali",
    "bell",
    "delayed_choice",
    "erasure",
    "field",
    "interferometer",
    "oracle",
    "response",
]

__version__ = "0.1.0"
