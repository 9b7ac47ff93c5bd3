"""Slow, simple cross-checks for the analytic machinery.

Everything here is deliberately brute force and shares no code path with
the implementations it validates: metrics from explicit loops and
eigendecompositions, the classical Bell ceiling from exhaustive outcome
enumeration, optimization from dense grids refined by golden sections,
and first-order amplitude growth from direct integration of the
Schrodinger equation on a toy atom-plus-mode system.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .interferometer import JointState, Metrics


class StepSizeUnderflow(Exception):
    """Adaptive integrator failed to reach the final time."""


def _eig_trace_norm(x: np.ndarray) -> float:
    """Trace norm via the eigenvalues of x^dag x (no SVD)."""
    evals = np.linalg.eigvalsh(x.conj().T @ x)
    return float(np.sum(np.sqrt(np.clip(evals, 0.0, None))))


def dense_metrics(state: JointState) -> Metrics:
    """Re-derivation of all complementarity metrics with explicit loops."""
    d = state.field_dim
    rot2 = np.zeros((2, 2), dtype=complex)
    merger = np.array(
        [[1.0, 1.0], [-1.0, 1.0]], dtype=complex
    ) / math.sqrt(2.0)
    big = np.zeros((2 * d, 2 * d), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    big[i * d : (i + 1) * d, j * d : (j + 1) * d] += (
                        merger[i, k]
                        * np.conj(merger[j, l])
                        * state.rho[k * d : (k + 1) * d, l * d : (l + 1) * d]
                    )
    for i in range(2):
        for j in range(2):
            for f in range(d):
                rot2[i, j] += big[i * d + f, j * d + f]
    predictability = abs(float(rot2[0, 0].real) - float(rot2[1, 1].real))
    visibility = 2.0 * abs(rot2[0, 1])
    diff = big[:d, :d] - big[d:, d:]
    distinguishability = float(np.sum(np.abs(np.linalg.eigvalsh(diff))))
    coherence = 2.0 * _eig_trace_norm(big[:d, d:])
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


def lhv_enumerate(signs: Sequence[int]) -> float:
    """Classical ceiling of a signed four-correlator combination.

    Walks every deterministic strategy explicitly; twin of the in-module
    enumeration used by the Bell machinery.
    """
    if len(signs) != 4:
        raise ValueError("need exactly four signs")
    best = 0.0
    for a in (1, -1):
        for ap in (1, -1):
            for b in (1, -1):
                for bp in (1, -1):
                    value = (
                        signs[0] * a * b
                        + signs[1] * ap * b
                        + signs[2] * a * bp
                        + signs[3] * ap * bp
                    )
                    if abs(value) > best:
                        best = abs(value)
    return float(best)


def _golden_1d(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-8) -> float:
    """Golden-section maximizer on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def grid_optimize(
    objective: Callable[..., float],
    bounds: Sequence[tuple[float, float]],
    resolution: int = 400,
    refine_iters: int = 4,
) -> tuple[tuple[float, ...], float]:
    """Dense-grid maximizer with coordinate-wise golden-section refinement."""
    axes = [np.linspace(lo, hi, resolution) for lo, hi in bounds]
    best_point = None
    best_value = -math.inf
    for point in itertools.product(*axes):
        value = objective(*point)
        if value > best_value:
            best_value = value
            best_point = point
    point = list(best_point)
    steps = [(hi - lo) / (resolution - 1) for lo, hi in bounds]
    for _ in range(refine_iters):
        for axis, (lo, hi) in enumerate(bounds):
            a = max(lo, point[axis] - 2 * steps[axis])
            b = min(hi, point[axis] + 2 * steps[axis])

            def along(x: float, axis=axis) -> float:
                trial = list(point)
                trial[axis] = x
                return objective(*trial)

            point[axis] = _golden_1d(along, a, b)
        steps = [s * 0.25 for s in steps]
    return tuple(point), objective(*point)


@dataclass(frozen=True)
class ToySystem:
    """Few-level emitter coupled to one quantized mode.

    ``level_energies`` lists the material levels (ground first),
    ``mode_frequency`` the photon energy, ``coupling`` the dipole matrix
    between levels (used in rotating-wave form: raising the level absorbs
    one photon).  ``photon_cutoff`` caps the photon number.
    """

    level_energies: tuple[float, ...]
    mode_frequency: float
    coupling: np.ndarray
    photon_cutoff: int = 4

    def __post_init__(self):
        c = np.array(self.coupling, dtype=complex)
        object.__setattr__(self, "coupling", c)
        n = len(self.level_energies)
        if c.shape != (n, n):
            raise ValueError("coupling must be a square matrix over the levels")
        dim = n * (self.photon_cutoff + 1)
        if dim > 200:
            raise ValueError("toy system dimension capped at 200")

    @staticmethod
    def two_level(gap: float, detuning: float = 0.0, photon_cutoff: int = 2) -> "ToySystem":
        coupling = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        return ToySystem((0.0, gap), gap - detuning, coupling, photon_cutoff)


def toy_first_order(system: ToySystem, g: float, duration: float) -> complex:
    """Excited-state amplitude after one absorption, by direct integration.

    Starts from (ground, one photon) and integrates the interaction-picture
    Schrodinger equation with adaptive stepping; at weak coupling the
    result reproduces first-order perturbation theory, linear in time on
    resonance and sinc-suppressed off resonance.
    """
    n_levels = len(system.level_energies)
    n_phot = system.photon_cutoff + 1
    dim = n_levels * n_phot

    def idx(level: int, photons: int) -> int:
        return level * n_phot + photons

    energies = np.array(
        [
            system.level_energies[l] + system.mode_frequency * n
            for l in range(n_levels)
            for n in range(n_phot)
        ]
    )
    v = np.zeros((dim, dim), dtype=complex)
    for l_hi in range(n_levels):
        for l_lo in range(n_levels):
            if system.level_energies[l_hi] <= system.level_energies[l_lo]:
                continue
            d = system.coupling[l_hi, l_lo]
            if d == 0:
                continue
            for n in range(1, n_phot):
                # raise the level, absorb a photon (rotating-wave coupling)
                v[idx(l_hi, n - 1), idx(l_lo, n)] += d * math.sqrt(n)
                v[idx(l_lo, n), idx(l_hi, n - 1)] += np.conj(d) * math.sqrt(n)

    psi0 = np.zeros(dim, dtype=complex)
    psi0[idx(0, 1)] = 1.0

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        psi = y[:dim] + 1j * y[dim:]
        phase = np.exp(1j * energies * t)
        dpsi = -1j * phase * (g * v @ (np.conj(phase) * psi))
        return np.concatenate([dpsi.real, dpsi.imag])

    y0 = np.concatenate([psi0.real, psi0.imag])
    sol = solve_ivp(rhs, (0.0, duration), y0, method="DOP853", rtol=1e-10, atol=1e-12)
    if not sol.success:
        raise StepSizeUnderflow(sol.message)
    psi = sol.y[:dim, -1] + 1j * sol.y[dim:, -1]
    return complex(psi[idx(1, 0)])
