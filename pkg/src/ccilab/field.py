"""Truncated Fock-space machinery on a small set of effective photon modes.

A continuous wavepacket mode never needs to be discretized here: every
quantity in the lab depends on mode functions only through their mutual
inner products, so a mode is an abstract label plus a declared Gram matrix
of overlaps.  States live on an orthonormal effective-mode set with a
per-mode photon-number cutoff and are stored sparsely as a map from
occupation tuples to complex amplitudes.

Photon statistics of a wavepacket are encoded by a generating function
``g`` whose derivatives at zero are the Fock-expansion coefficients,
``amplitude(n) = g_deriv(n) / sqrt(n!)``.  Three families are supported:
sharp photon number, coherent, and squeezed vacuum.  Interaction with the
two-path target shifts the derivative family of one mode, which is how the
outgoing (post-absorption) field states are produced.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TRUNCATION_TOL = 1e-10

FOCK = "fock"
COHERENT = "coherent"
SQUEEZED_VACUUM = "squeezed_vacuum"


class CutoffTooSmall(Exception):
    """Per-mode photon cap leaves a truncation residual above tolerance."""


class ZeroTarget(Exception):
    """Projection target has (numerically) zero norm."""


@dataclass(frozen=True)
class EffectiveModeBasis:
    """Labelled set of effective modes with their Gram matrix of overlaps.

    The Gram matrix must be Hermitian and positive semidefinite; diagonal
    entries are squared mode norms.  Fock bookkeeping requires an
    orthonormal set, obtained from :meth:`orthonormalize` when the declared
    modes overlap.
    """

    labels: tuple[str, ...]
    gram: np.ndarray

    def __post_init__(self):
        gram = np.array(self.gram, dtype=complex)
        object.__setattr__(self, "gram", gram)
        n = len(self.labels)
        if gram.shape != (n, n):
            raise ValueError(f"gram must be {n}x{n}, got {gram.shape}")
        if np.max(np.abs(gram - gram.conj().T)) > 1e-10:
            raise ValueError("gram matrix is not Hermitian")
        if np.min(np.diag(gram).real) < -1e-12:
            raise ValueError("gram diagonal must be non-negative")
        if np.min(np.linalg.eigvalsh(gram)) < -1e-10:
            raise ValueError("gram matrix is not positive semidefinite")

    @property
    def n_modes(self) -> int:
        return len(self.labels)

    @property
    def orthonormalized(self) -> bool:
        return bool(np.allclose(self.gram, np.eye(self.n_modes), atol=1e-10))

    @staticmethod
    def orthonormal(labels: Sequence[str]) -> "EffectiveModeBasis":
        labels = tuple(labels)
        return EffectiveModeBasis(labels, np.eye(len(labels), dtype=complex))

    def orthonormalize(self) -> tuple["EffectiveModeBasis", np.ndarray]:
        """Return an orthonormal basis for the span plus the mixing matrix.

        The returned matrix ``w`` has one column per new mode, expressing it
        as a combination of the declared modes; ``w.conj().T @ gram @ w`` is
        the identity.  Modes that are linearly dependent on earlier ones are
        dropped, so the new basis spans the same space.
        """
        evals, evecs = np.linalg.eigh(self.gram)
        keep = evals > 1e-12 * max(1.0, float(evals.max(initial=0.0)))
        w = evecs[:, keep] / np.sqrt(evals[keep])
        labels = tuple(f"ortho{i}" for i in range(int(keep.sum())))
        return EffectiveModeBasis.orthonormal(labels), w


@dataclass(frozen=True)
class PhotonStatistics:
    """Photon statistics of one wavepacket via its generating function.

    ``kind`` selects the family; only the matching parameters are
    meaningful.  ``number`` is the sharp photon number, ``amplitude`` and
    ``phase`` the coherent amplitude (modulus and argument), ``squeeze``
    the squeezing parameter of a squeezed vacuum.
    """

    kind: str
    number: int = 0
    amplitude: float = 0.0
    phase: float = 0.0
    squeeze: float = 0.0

    @classmethod
    def fock(cls, n: int) -> "PhotonStatistics":
        if n < 0 or n != int(n):
            raise ValueError("photon number must be a non-negative integer")
        return cls(kind=FOCK, number=int(n))

    @classmethod
    def coherent(cls, amplitude: float, phase: float = 0.0) -> "PhotonStatistics":
        if amplitude < 0:
            raise ValueError("coherent amplitude is a modulus, must be >= 0")
        return cls(kind=COHERENT, amplitude=float(amplitude), phase=float(phase))

    @classmethod
    def squeezed_vacuum(cls, squeeze: float) -> "PhotonStatistics":
        return cls(kind=SQUEEZED_VACUUM, squeeze=float(squeeze))

    @property
    def mean_intensity(self) -> float:
        """Mean photon number, used for cutoff sizing."""
        if self.kind == FOCK:
            return float(self.number)
        if self.kind == COHERENT:
            return self.amplitude**2
        return math.sinh(self.squeeze) ** 2


def derivative_at_zero(g: PhotonStatistics, n: int) -> complex:
    """n-th derivative of the generating function at the origin.

    Closed forms per family; the squeezed-vacuum case vanishes for odd n
    and carries the double-factorial weight of Gaussian moments otherwise.
    """
    if n < 0:
        raise ValueError("derivative order must be non-negative")
    if g.kind == FOCK:
        if n != g.number:
            return 0.0
        return math.sqrt(math.factorial(g.number))
    if g.kind == COHERENT:
        alpha = g.amplitude * np.exp(1j * g.phase)
        return alpha**n * math.exp(-0.5 * g.amplitude**2)
    if g.kind == SQUEEZED_VACUUM:
        if n % 2:
            return 0.0
        m = n // 2
        double_fact = math.factorial(n) // (2**m * math.factorial(m))
        return double_fact * (-math.tanh(g.squeeze)) ** m / math.sqrt(math.cosh(g.squeeze))
    raise ValueError(f"unknown photon statistics kind {g.kind!r}")


def _family_coefficients(g: PhotonStatistics, cutoff: int, shift: int = 0) -> np.ndarray:
    """Fock coefficients derivative(n + shift)/sqrt(n!) for n = 0..cutoff."""
    out = np.zeros(cutoff + 1, dtype=complex)
    for n in range(cutoff + 1):
        d = derivative_at_zero(g, n + shift)
        if d != 0:
            out[n] = d / math.sqrt(math.factorial(n))
    return out


def _check_tail(coeffs: np.ndarray, what: str) -> None:
    total = float(np.sum(np.abs(coeffs) ** 2))
    tail = float(np.sum(np.abs(coeffs[-2:]) ** 2))
    if tail > TRUNCATION_TOL * max(total, 1e-300):
        raise CutoffTooSmall(
            f"{what}: truncation tail {tail:.3e} exceeds {TRUNCATION_TOL:.0e} of norm {total:.3e}"
        )


def default_cutoff(statistics: Iterable[PhotonStatistics], extra_shift: int = 0) -> int:
    """Per-mode cap sized so the truncation tails are negligible.

    Poisson tails decay super-exponentially, but squeezed-vacuum
    coefficients fall off only geometrically in tanh^2 of the squeezing
    parameter, so those request substantially deeper caps.
    """
    n_max = 0
    intensity = 0.0
    geometric = 16
    for g in statistics:
        if g.kind == FOCK:
            n_max = max(n_max, g.number)
        if g.kind == SQUEEZED_VACUUM:
            ratio = math.tanh(abs(g.squeeze)) ** 2
            if ratio > 0:
                geometric = max(geometric, 2 * math.ceil(13.0 / -math.log10(ratio)) + 6)
        intensity = max(intensity, g.mean_intensity)
    return max(16, geometric, n_max + extra_shift + 4 * math.ceil(intensity) + 8)


@dataclass(frozen=True)
class FieldState:
    """Sparse state vector on the truncated multimode Fock space.

    ``amps`` maps occupation tuples to complex amplitudes.  ``norm2`` is
    the declared squared norm: outgoing states are deliberately kept
    unnormalized because their true norms enter the interference metrics,
    so the norm is carried explicitly instead of being divided out.
    """

    basis: EffectiveModeBasis
    cutoff: int
    amps: dict[tuple[int, ...], complex]
    norm2: float

    def __post_init__(self):
        declared = self.norm2
        stored = self.computed_norm2()
        if abs(declared - stored) > 1e-8 * max(1.0, declared):
            raise ValueError(
                f"declared squared norm {declared} disagrees with amplitudes ({stored})"
            )

    @property
    def n_modes(self) -> int:
        return self.basis.n_modes

    def computed_norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amps.values()))

    def inner(self, other: "FieldState") -> complex:
        """Hermitian inner product <self|other> over shared occupations."""
        if self.n_modes != other.n_modes:
            raise ValueError("states live on different mode sets")
        small, large, conj_small = (
            (self.amps, other.amps, True)
            if len(self.amps) <= len(other.amps)
            else (other.amps, self.amps, False)
        )
        total = 0.0 + 0.0j
        for occ, a in small.items():
            b = large.get(occ)
            if b is None:
                continue
            total += (np.conj(a) * b) if conj_small else (np.conj(b) * a)
        return complex(total)

    def scaled(self, factor: complex) -> "FieldState":
        amps = {occ: factor * a for occ, a in self.amps.items()}
        return FieldState(self.basis, self.cutoff, amps, self.norm2 * abs(factor) ** 2)

    def normalized(self) -> "FieldState":
        n2 = self.computed_norm2()
        if n2 <= 0:
            raise ZeroTarget("cannot normalize a zero state")
        return self.scaled(1.0 / math.sqrt(n2))

    @staticmethod
    def superpose(coeffs: Sequence[complex], states: Sequence["FieldState"]) -> "FieldState":
        if not states:
            raise ValueError("need at least one state")
        basis, cutoff = states[0].basis, max(s.cutoff for s in states)
        amps: dict[tuple[int, ...], complex] = {}
        for c, s in zip(coeffs, states):
            if c == 0:
                continue
            for occ, a in s.amps.items():
                amps[occ] = amps.get(occ, 0.0) + c * a
        amps = {occ: a for occ, a in amps.items() if a != 0}
        norm2 = float(sum(abs(a) ** 2 for a in amps.values()))
        return FieldState(basis, cutoff, amps, norm2)


def vacuum_state(basis: EffectiveModeBasis, cutoff: int = 16) -> FieldState:
    occ = (0,) * basis.n_modes
    return FieldState(basis, cutoff, {occ: 1.0 + 0.0j}, 1.0)


def build_state(
    g_list: Sequence[PhotonStatistics],
    basis: EffectiveModeBasis,
    cutoff: int | None = None,
    shifts: Sequence[int] | None = None,
) -> FieldState:
    """Product state with one generating function per mode.

    The amplitude on occupation ``(n_1, ..., n_k)`` is the product of the
    per-mode coefficients ``derivative(n_i + shift_i)/sqrt(n_i!)``.  With
    zero shifts this is the incoming wavepacket state (normalized up to the
    truncation residual); nonzero shifts produce the unnormalized
    post-absorption families, with the true squared norm recorded.
    """
    if not basis.orthonormalized:
        raise ValueError("build_state requires an orthonormal effective-mode basis")
    if len(g_list) != basis.n_modes:
        raise ValueError("need exactly one photon statistics per mode")
    shifts = tuple(shifts) if shifts is not None else (0,) * len(g_list)
    auto = cutoff is None
    if auto:
        cutoff = default_cutoff(g_list, extra_shift=max(shifts))
    for attempt in range(4):
        try:
            for g, shift in zip(g_list, shifts):
                coeffs = _family_coefficients(g, cutoff, shift)
                _check_tail(coeffs, f"mode with {g.kind} statistics (shift {shift})")
            break
        except CutoffTooSmall:
            # auto-sized caps may grow; pinned caps are a hard contract
            if not auto or attempt == 3:
                raise
            cutoff *= 2
    per_mode = []
    for g, shift in zip(g_list, shifts):
        coeffs = _family_coefficients(g, cutoff, shift)
        per_mode.append([(n, c) for n, c in enumerate(coeffs) if c != 0])
    amps: dict[tuple[int, ...], complex] = {}
    for combo in itertools.product(*per_mode):
        occ = tuple(n for n, _ in combo)
        amp = 1.0 + 0.0j
        for _, c in combo:
            amp *= c
        amps[occ] = amp
    norm2 = float(sum(abs(a) ** 2 for a in amps.values()))
    return FieldState(basis, cutoff, amps, norm2)


def outgoing_pair(
    g1: PhotonStatistics,
    g2: PhotonStatistics,
    n_photon: int,
    basis: EffectiveModeBasis,
    cutoff: int | None = None,
) -> tuple[FieldState, FieldState]:
    """Unnormalized field states left behind by the two excitation routes.

    The one-photon route removes a quantum from the second wavepacket
    (its generating family shifts by one); the n-photon route removes
    ``n_photon`` quanta from the first.  True norms stay recorded on the
    returned states - they carry the which-way weight of each route.
    """
    if n_photon < 2:
        raise ValueError("the multiphoton route needs n_photon >= 2")
    if basis.n_modes != 2:
        raise ValueError("outgoing_pair expects a two-mode basis")
    if cutoff is None:
        cutoff = default_cutoff((g1, g2), extra_shift=n_photon)
    one_out = build_state((g1, g2), basis, cutoff, shifts=(0, 1))
    n_out = build_state((g1, g2), basis, cutoff, shifts=(n_photon, 0))
    return one_out, n_out


def outgoing_overlap_series(
    g1: PhotonStatistics,
    g2: PhotonStatistics,
    n_photon: int,
    cutoff: int = 80,
    normalized: bool = False,
) -> complex:
    """Overlap of the two outgoing states as a factorized double series.

    Equals the direct Fock contraction of :func:`outgoing_pair`; its
    argument is the interference phase carried purely by the light.  With
    ``normalized`` the raw series is divided by the outgoing norms, which
    changes the magnitude (then the fringe visibility) but never the
    phase; both values are legitimate readings of the series.
    """
    s1 = 0.0 + 0.0j
    for n in range(cutoff + 1):
        a = derivative_at_zero(g1, n)
        if a == 0:
            continue
        b = derivative_at_zero(g1, n_photon + n)
        s1 += np.conj(a) * b / math.factorial(n)
    s2 = 0.0 + 0.0j
    for m in range(cutoff + 1):
        a = derivative_at_zero(g2, 1 + m)
        if a == 0:
            continue
        b = derivative_at_zero(g2, m)
        s2 += np.conj(a) * b / math.factorial(m)
    raw = complex(s1 * s2)
    if not normalized:
        return raw
    norm1 = sum(
        abs(derivative_at_zero(g1, n_photon + n)) ** 2 / math.factorial(n)
        for n in range(cutoff + 1)
    ) * sum(abs(derivative_at_zero(g2, m)) ** 2 / math.factorial(m) for m in range(cutoff + 1))
    norm2 = sum(
        abs(derivative_at_zero(g1, n)) ** 2 / math.factorial(n) for n in range(cutoff + 1)
    ) * sum(
        abs(derivative_at_zero(g2, 1 + m)) ** 2 / math.factorial(m) for m in range(cutoff + 1)
    )
    if norm1 <= 0 or norm2 <= 0:
        raise ZeroTarget("an outgoing state vanishes; normalized overlap undefined")
    return raw / math.sqrt(norm1 * norm2)


def coherent_amplitude(z: Sequence[complex], occupation: Sequence[int]) -> complex:
    """Fock amplitude <occupation|z> of a multimode coherent state.

    Evaluated in log space so large occupations and amplitudes neither
    overflow nor lose the phase.
    """
    log_mag = -0.5 * float(sum(abs(zi) ** 2 for zi in z))
    phase = 0.0
    for zi, n in zip(z, occupation):
        if n == 0:
            continue
        zi = complex(zi)
        if zi == 0:
            return 0.0
        log_mag += n * math.log(abs(zi)) - 0.5 * math.lgamma(n + 1)
        phase += n * cmath.phase(zi)
    if log_mag < -700.0:
        return 0.0
    return cmath.rect(math.exp(log_mag), phase)


def coherent_state(
    direction: Sequence[complex],
    norm: float,
    basis: EffectiveModeBasis,
    cutoff: int | None = None,
) -> FieldState:
    """Normalized coherent state along a unit combination of the modes."""
    direction = np.asarray(direction, dtype=complex)
    dnorm = float(np.linalg.norm(direction))
    if dnorm < 1e-300:
        raise ZeroTarget("coherent direction must be nonzero")
    z = norm * direction / dnorm
    if cutoff is None:
        cutoff = max(16, 4 * math.ceil(norm**2) + 8)
    # per-mode Poisson coefficients, dropping numerically dead entries
    per_mode = []
    for zi in z:
        coeffs = [(n, coherent_amplitude([zi], (n,))) for n in range(cutoff + 1)]
        per_mode.append([(n, c) for n, c in coeffs if abs(c) > 1e-18] or [(0, 0.0 + 0.0j)])
    amps: dict[tuple[int, ...], complex] = {}
    for combo in itertools.product(*per_mode):
        occ = tuple(n for n, _ in combo)
        a = 1.0 + 0.0j
        for _, c in combo:
            a *= c
        if a != 0:
            amps[occ] = a
    norm2 = float(sum(abs(a) ** 2 for a in amps.values()))
    if 1.0 - norm2 > 1e3 * TRUNCATION_TOL:
        raise CutoffTooSmall(f"coherent state truncation residual {1.0 - norm2:.3e}")
    return FieldState(basis, cutoff, amps, norm2)


def project_onto(
    state: "FieldState | Sequence[tuple[float, FieldState]]",
    target: FieldState,
) -> tuple[float, FieldState]:
    """Born weight of a projection onto ``target`` plus the conditioned state.

    ``state`` is a pure state or an ensemble of ``(probability, state)``
    pairs; mixtures use the quadratic form of the projector.  The weight is
    ``|<target|state>|^2 / <target|target>`` per component, and the
    conditioned state is the normalized target.
    """
    t2 = target.computed_norm2()
    if t2 <= 0:
        raise ZeroTarget("projection target has zero norm")
    if isinstance(state, FieldState):
        components: list[tuple[float, FieldState]] = [(1.0, state)]
    else:
        components = list(state)
    weight = 0.0
    for p, psi in components:
        weight += p * abs(target.inner(psi)) ** 2 / t2
    return weight, target.normalized()
