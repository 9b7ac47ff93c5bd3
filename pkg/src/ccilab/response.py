"""Discrete-line nonlinear response: the classical face of two-color control.

A perturbative response series evaluated on line spectra shows everything
a conventional two-color phase-control signal shows - nonadditivity, and
sensitivity to the combined phase of the two colors - without any quantum
ingredient.  The kernels here are user-supplied toy functions; only the
structure is asserted: the time-averaged cross response of an (omega,
2*omega) pair traces a pure cosine in 2*phi_1 - phi_2, while each direct
response is phase-blind.

Fields are real, so spectra enforce Hermitian symmetry (the line at -omega
is the conjugate of the line at +omega), and kernels must satisfy the same
conjugation symmetry for the response to be real.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

ABS_TOL = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """Line spectrum of a real signal; contains each line and its mirror."""

    lines: dict[float, complex]

    def __post_init__(self):
        full: dict[float, complex] = {}
        for omega, amp in self.lines.items():
            omega = float(omega)
            if omega == 0.0:
                if abs(amp.imag) > ABS_TOL:
                    raise ValueError("the zero-frequency line must be real")
                full[0.0] = complex(amp.real)
                continue
            mirror = full.get(-omega)
            if mirror is not None and abs(mirror - np.conj(amp)) > ABS_TOL:
                raise ValueError(f"lines at +-{abs(omega)} violate Hermitian symmetry")
            full[omega] = complex(amp)
            full.setdefault(-omega, complex(np.conj(amp)))
        object.__setattr__(self, "lines", full)

    @staticmethod
    def from_cosines(components: list[tuple[float, float, float]]) -> "Spectrum":
        """Spectrum of sum_i a_i cos(omega_i t + phase_i) with omega_i > 0."""
        lines: dict[float, complex] = {}
        for omega, amplitude, phase in components:
            if omega <= 0:
                raise ValueError("cosine components need positive frequencies")
            lines[omega] = lines.get(omega, 0.0) + 0.5 * amplitude * np.exp(1j * phase)
        return Spectrum(lines)

    def merged(self, other: "Spectrum") -> "Spectrum":
        lines = dict(self.lines)
        for omega, amp in other.lines.items():
            lines[omega] = lines.get(omega, 0.0) + amp
        return Spectrum({w: a for w, a in lines.items() if w >= 0.0})

    def signal(self, t: float) -> float:
        return float(
            sum(amp * np.exp(1j * omega * t) for omega, amp in self.lines.items()).real
        )


@dataclass(frozen=True)
class KernelSet:
    """Constant, quadratic, and cubic response kernels in the frequency domain.

    ``r2`` takes (omega_1, omega_1 + omega_2); ``r3`` takes the cumulative
    sums (omega_1, omega_1 + omega_2, omega_1 + omega_2 + omega_3).  Both
    must obey conjugation symmetry under negating all arguments.
    """

    r0: float = 0.0
    r2: Callable[[float, float], complex] | None = None
    r3: Callable[[float, float, float], complex] | None = None


def phase_shift(spectrum: Spectrum, phi: float) -> Spectrum:
    """Advance the instantaneous phase of every cosine component by phi."""
    factor = np.exp(1j * phi)
    lines = {
        omega: amp * (factor if omega > 0 else np.conj(factor) if omega < 0 else 1.0)
        for omega, amp in spectrum.lines.items()
    }
    return Spectrum({w: a for w, a in lines.items() if w >= 0.0})


def _terms(kernels: KernelSet, spectrum: Spectrum):
    """Yield (total frequency, complex weight) for every series term."""
    items = list(spectrum.lines.items())
    if kernels.r2 is not None:
        for (w1, a1), (w2, a2) in itertools.product(items, repeat=2):
            yield w1 + w2, kernels.r2(w1, w1 + w2) * a1 * a2
    if kernels.r3 is not None:
        for (w1, a1), (w2, a2), (w3, a3) in itertools.product(items, repeat=3):
            yield w1 + w2 + w3, kernels.r3(w1, w1 + w2, w1 + w2 + w3) * a1 * a2 * a3


def response(kernels: KernelSet, spectrum: Spectrum, t: float) -> float:
    """Perturbative response at time t, truncated at third order."""
    total = complex(kernels.r0)
    for freq, weight in _terms(kernels, spectrum):
        total += weight * np.exp(1j * freq * t)
    if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
        raise ValueError("response is not real; kernels violate conjugation symmetry")
    return float(total.real)


def time_averaged_response(kernels: KernelSet, spectrum: Spectrum) -> float:
    """Long-time average: only the zero-total-frequency terms survive."""
    total = complex(kernels.r0)
    for freq, weight in _terms(kernels, spectrum):
        if abs(freq) < 1e-12:
            total += weight
    if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
        raise ValueError("averaged response is not real; check kernel symmetry")
    return float(total.real)


def cross_term(kernels: KernelSet, field_1: Spectrum, field_2: Spectrum, t: float) -> float:
    """Nonadditive part of the response: joint minus the two direct terms."""
    both = field_1.merged(field_2)
    return response(kernels, both, t) - response(kernels, field_1, t) - response(
        kernels, field_2, t
    )


def time_averaged_cross_term(kernels: KernelSet, field_1: Spectrum, field_2: Spectrum) -> float:
    both = field_1.merged(field_2)
    return (
        time_averaged_response(kernels, both)
        - time_averaged_response(kernels, field_1)
        - time_averaged_response(kernels, field_2)
    )


def fit_cosine(phis: np.ndarray, values: np.ndarray) -> tuple[float, float, float]:
    """Least-squares fit of values ~ a*cos(phi - theta) + offset.

    Returns (amplitude, theta, max residual).
    """
    design = np.column_stack([np.cos(phis), np.sin(phis), np.ones_like(phis)])
    coeffs, *_ = np.linalg.lstsq(design, values, rcond=None)
    fit = design @ coeffs
    amplitude = math.hypot(coeffs[0], coeffs[1])
    theta = math.atan2(coeffs[1], coeffs[0])
    return amplitude, theta, float(np.max(np.abs(values - fit)))


def toy_kernels(decay: float = 0.35, cubic_scale: float = 0.8) -> KernelSet:
    """Smooth demonstration kernels obeying conjugation symmetry."""

    def r2(w1: float, w12: float) -> complex:
        return 1.0 / ((1.0 + 1j * decay * w1) * (1.5 + 1j * decay * w12))

    def r3(w1: float, w12: float, w123: float) -> complex:
        return cubic_scale / (
            (1.0 + 1j * decay * w1) * (1.5 + 1j * decay * w12) * (2.0 + 1j * decay * w123)
        )

    return KernelSet(r0=0.25, r2=r2, r3=r3)
