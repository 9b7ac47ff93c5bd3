"""Angular-momentum algebra for two-color photoionization spin control.

A heavy one-valence-electron atom is ionized by an (omega, 2*omega) field
pair; the controlled quantity is the photoelectron spin along the lab
axis, detected in a single narrow direction.  The one- and two-photon
transition amplitudes factor into Clebsch-Gordan contractions of the
field polarizations with spherical harmonics at the detection direction
(computed exactly here) times radial integrals, which are opaque
empirical inputs: spin-orbit coupling splits them by total angular
momentum, and that splitting is the only reason the amplitudes survive.

Two concrete scattering geometries are provided.  One drives the fully
biased (which-way) configuration where the one-photon route flips the
spin and the two-photon route preserves it; the other realizes the
unbiased fringe configuration for the spin-down input port, up to one
radial-integral constraint on the highest two-photon channel.  Everything
is verified structurally: coefficient patterns must hold for arbitrary
radial inputs, with energy prefactors dropped as common scale factors.

Half-integer angular momenta are carried as doubled integers so selection
rules stay exact; Clebsch-Gordan values use the closed factorial form
with exact rational arithmetic before the final square root.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.special import lpmv

SQRT2 = math.sqrt(2.0)

# spherical unit vectors, Condon-Shortley convention
SPHERICAL_UNIT = {
    +1: np.array([-1.0, -1j, 0.0]) / SQRT2,
    0: np.array([0.0, 0.0, 1.0], dtype=complex),
    -1: np.array([1.0, -1j, 0.0]) / SQRT2,
}

TWO_MS = (+1, -1)  # doubled spin projections of the outgoing electron
TWO_MJ = (+1, -1)  # doubled spin projections of the ground state

ONE_PHOTON_CHANNELS = ((1, 1), (1, 3))  # (l', 2j') reached by one dipole step
TWO_PHOTON_CHANNELS = (
    (0, 1, 1),
    (0, 1, 3),
    (2, 3, 1),
    (2, 3, 3),
    (2, 5, 3),
)  # (l', 2j', 2j'') reached by two dipole steps from an s_1/2 ground state


class InvalidQuantumNumbers(Exception):
    """Angular momentum arguments are not consistent half-integers."""


class GeometryInvalid(Exception):
    """Beam or detection vectors fail unit-norm or transversality checks."""


def _doubled(x: float, name: str) -> int:
    two_x = 2.0 * x
    if abs(two_x - round(two_x)) > 1e-9:
        raise InvalidQuantumNumbers(f"{name}={x} is not a half-integer")
    return int(round(two_x))


def _fact2(two_x: int) -> Fraction:
    if two_x % 2 or two_x < 0:
        raise InvalidQuantumNumbers("factorial argument must be a non-negative integer")
    return Fraction(math.factorial(two_x // 2))


def clebsch_gordan(j1: float, m1: float, j2: float, m2: float, j: float, m: float) -> float:
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | j m>, Condon-Shortley.

    Evaluated from the closed factorial sum with exact integer arithmetic;
    selection-rule violations return zero, malformed quantum numbers raise.
    """
    tj1, tm1 = _doubled(j1, "j1"), _doubled(m1, "m1")
    tj2, tm2 = _doubled(j2, "j2"), _doubled(m2, "m2")
    tj, tm = _doubled(j, "j"), _doubled(m, "m")
    for tjj, tmm in ((tj1, tm1), (tj2, tm2), (tj, tm)):
        if tjj < 0 or abs(tmm) > tjj or (tjj - tmm) % 2:
            raise InvalidQuantumNumbers("need j >= 0 and m in {-j ... j} in integer steps")
    if tm1 + tm2 != tm:
        return 0.0
    if not (abs(tj1 - tj2) <= tj <= tj1 + tj2) or (tj1 + tj2 - tj) % 2:
        return 0.0
    pre = Fraction(tj + 1)
    pre *= _fact2(tj1 + tj2 - tj) * _fact2(tj1 - tj2 + tj) * _fact2(-tj1 + tj2 + tj)
    pre /= _fact2(tj1 + tj2 + tj + 2)
    pre *= (
        _fact2(tj1 + tm1)
        * _fact2(tj1 - tm1)
        * _fact2(tj2 + tm2)
        * _fact2(tj2 - tm2)
        * _fact2(tj + tm)
        * _fact2(tj - tm)
    )
    total = Fraction(0)
    k_min = max(0, (tj2 - tj - tm1) // 2, (tj1 + tm2 - tj) // 2)
    k_max = min((tj1 + tj2 - tj) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    for k in range(k_min, k_max + 1):
        den = (
            Fraction(math.factorial(k))
            * _fact2(tj1 + tj2 - tj - 2 * k)
            * _fact2(tj1 - tm1 - 2 * k)
            * _fact2(tj2 + tm2 - 2 * k)
            * _fact2(tj - tj2 + tm1 + 2 * k)
            * _fact2(tj - tj1 - tm2 + 2 * k)
        )
        total += Fraction((-1) ** k) / den
    if total == 0:
        return 0.0
    value = math.sqrt(float(pre)) * float(total)
    return value


def spherical_harmonic(l: int, m: int, direction: np.ndarray) -> complex:
    """Spherical harmonic with Condon-Shortley phase at a unit direction."""
    if l < 0 or abs(m) > l:
        raise InvalidQuantumNumbers(f"need |m| <= l, got l={l}, m={m}")
    n = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    theta = math.acos(max(-1.0, min(1.0, n[2])))
    azimuth = math.atan2(n[1], n[0])
    am = abs(m)
    norm = math.sqrt(
        (2 * l + 1) / (4.0 * math.pi) * math.factorial(l - am) / math.factorial(l + am)
    )
    base = norm * float(lpmv(am, l, math.cos(theta))) * np.exp(1j * am * azimuth)
    if m >= 0:
        return complex(base)
    return complex((-1) ** am * np.conj(base))


@dataclass(frozen=True)
class Geometry:
    """Beam directions, polarizations, and the detection direction.

    All five vectors are unit vectors; polarizations may be complex but
    must be transverse to their beams.
    """

    k_hat_1: np.ndarray
    k_hat_2: np.ndarray
    eps_1: np.ndarray
    eps_2: np.ndarray
    k_hat_plus: np.ndarray

    def __post_init__(self):
        for name in ("k_hat_1", "k_hat_2", "k_hat_plus"):
            v = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, v)
            if abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise GeometryInvalid(f"{name} must be a unit vector")
        for name, khat in (("eps_1", self.k_hat_1), ("eps_2", self.k_hat_2)):
            e = np.asarray(getattr(self, name), dtype=complex)
            object.__setattr__(self, name, e)
            if abs(np.linalg.norm(e) - 1.0) > 1e-12:
                raise GeometryInvalid(f"{name} must be a unit vector")
            if abs(np.dot(e, khat)) > 1e-12:
                raise GeometryInvalid(f"{name} must be transverse to its beam")

    @staticmethod
    def open_config() -> "Geometry":
        """Linearly polarized beams realizing the fully biased configuration."""
        k2 = np.array([0.0, 1.0, 0.0])
        e2 = np.array([1.0, 0.0, SQRT2]) / math.sqrt(3.0)
        k1 = -np.array([1.0, 0.0, SQRT2]) / math.sqrt(3.0)
        e1 = np.array([0.0, 1.0, 0.0])
        kplus = np.array([SQRT2, 0.0, -1.0]) / math.sqrt(3.0)
        return Geometry(k1, k2, e1, e2, kplus)

    @staticmethod
    def closed_config() -> "Geometry":
        """Elliptic/circular beams realizing the unbiased configuration.

        The short-wavelength beam arrives along the detection direction
        with elliptical polarization; the sign of its imaginary component
        is fixed by requiring the published amplitude pattern (the
        opposite sign transposes the port bias between input channels).
        """
        kplus = np.array([SQRT2, 0.0, -1.0]) / math.sqrt(3.0)
        k2 = kplus.copy()
        e2 = (
            math.sqrt(5.0 + 3.0 * SQRT2) * np.array([-1.0, 0.0, -SQRT2]) / math.sqrt(3.0)
            + 1j * math.sqrt(9.0 - 3.0 * SQRT2) * np.array([0.0, 1.0, 0.0])
        ) / math.sqrt(14.0)
        k1 = np.array([1.0, 0.0, -2.0 * SQRT2]) / 3.0
        e1 = (np.array([2.0 * SQRT2, 0.0, 1.0]) / 3.0 + 1j * np.array([0.0, 1.0, 0.0])) / SQRT2
        return Geometry(k1, k2, e1, e2, kplus)


@dataclass(frozen=True)
class RadialParams:
    """Empirical radial integrals per photoionization channel.

    ``d1`` maps (l', 2j') to the one-step integral at the detection
    energy; ``d2`` maps (l', 2j', 2j'') to the two-step integral through
    the intermediate fine-structure level.  Values are complex and carry
    whatever normalization the user likes - all structural checks are
    prefactor-free.
    """

    d1: dict[tuple[int, int], complex]
    d2: dict[tuple[int, int, int], complex]

    @staticmethod
    def random(rng: np.random.Generator) -> "RadialParams":
        draw = lambda: complex(rng.normal(), rng.normal())
        return RadialParams(
            d1={k: draw() for k in ONE_PHOTON_CHANNELS},
            d2={k: draw() for k in TWO_PHOTON_CHANNELS},
        )

    @staticmethod
    def degenerate(d1_value: complex = 1.0, d2_value: complex = 1.0) -> "RadialParams":
        """No spin-orbit splitting: every channel shares one integral."""
        return RadialParams(
            d1={k: complex(d1_value) for k in ONE_PHOTON_CHANNELS},
            d2={k: complex(d2_value) for k in TWO_PHOTON_CHANNELS},
        )

    def with_top_channel_suppressed(self) -> "RadialParams":
        """Copy with the d_5/2 two-photon integral forced to zero."""
        d2 = dict(self.d2)
        d2[(2, 5, 3)] = 0.0 + 0.0j
        return RadialParams(dict(self.d1), d2)

    def with_alternative_constraint(self) -> "RadialParams":
        """Copy with the d_5/2 integral tied to the d_3/2 ones.

        The alternative to suppressing the top channel: fixes its value so
        the spin-down input column becomes unbiased in magnitude (the sign
        relation of the two-photon amplitudes then flips from odd to even;
        see :func:`verify_configuration`).
        """
        d2 = dict(self.d2)
        combo = 5.0 * d2[(2, 3, 1)] + d2[(2, 3, 3)]
        d2[(2, 5, 3)] = (2.0 / 93.0) * (9.0 + 5.0 * SQRT2) * combo
        return RadialParams(dict(self.d1), d2)


def _parse_channel(key: str) -> tuple[str, tuple]:
    """Parse keys like ``D1:E+:1:3/2`` or ``D2:E+:2:5/2:3/2``."""

    def as_two_j(tok: str) -> int:
        if "/" in tok:
            num, den = tok.split("/")
            if den != "2":
                raise ValueError(f"half-integer token {tok!r} must have denominator 2")
            return int(num)
        return 2 * int(tok)

    parts = key.split(":")
    if len(parts) == 4 and parts[0] == "D1" and parts[1] == "E+":
        return "d1", (int(parts[2]), as_two_j(parts[3]))
    if len(parts) == 5 and parts[0] == "D2" and parts[1] == "E+":
        return "d2", (int(parts[2]), as_two_j(parts[3]), as_two_j(parts[4]))
    raise ValueError(f"unrecognized radial channel key {key!r}")


def load_radial_params(path: "str | Path") -> RadialParams:
    """Read radial integrals from a JSON file.

    The file maps channel strings (``D1:E+:<l'>:<j'>`` for one-photon,
    ``D2:E+:<l'>:<j'>:<j''>`` for two-photon channels, with half-integer
    j written like ``3/2``) to two-element ``[re, im]`` arrays.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("radial parameter file must contain a JSON object")
    d1: dict[tuple[int, int], complex] = {}
    d2: dict[tuple[int, int, int], complex] = {}
    for key, value in raw.items():
        kind, channel = _parse_channel(key)
        if (
            not isinstance(value, (list, tuple))
            or len(value) != 2
            or not all(isinstance(v, (int, float)) for v in value)
        ):
            raise ValueError(f"value for {key!r} must be a [re, im] pair")
        c = complex(value[0], value[1])
        (d1 if kind == "d1" else d2)[channel] = c  # type: ignore[arg-type]
    missing = [k for k in ONE_PHOTON_CHANNELS if k not in d1]
    missing += [k for k in TWO_PHOTON_CHANNELS if k not in d2]
    if missing:
        raise ValueError(f"radial parameter file is missing channels: {missing}")
    return RadialParams(d1, d2)


def angular_a1(
    l_out: int,
    j_out: float,
    mj_out: float,
    l_in: int,
    j_in: float,
    mj_in: float,
    polarization: np.ndarray,
) -> complex:
    """First-order angular dipole matrix element between fine-structure states.

    Sums the polarization's spherical components against the orbital and
    spin recoupling coefficients; vanishes unless l changes by one.
    """
    pol = np.asarray(polarization, dtype=complex)
    tj_out = _doubled(j_out, "j_out")
    tmj_out = _doubled(mj_out, "mj_out")
    tj_in = _doubled(j_in, "j_in")
    tmj_in = _doubled(mj_in, "mj_in")
    prefactor = math.sqrt((2 * l_in + 1) / (2 * l_out + 1)) * clebsch_gordan(
        l_in, 0, 1, 0, l_out, 0
    )
    if prefactor == 0.0:
        return 0.0 + 0.0j
    out = 0.0 + 0.0j
    for q in (-1, 0, 1):
        eps_q = complex(pol @ np.conj(SPHERICAL_UNIT[q]))
        if eps_q == 0:
            continue
        for ml_in in range(-l_in, l_in + 1):
            ml_out = ml_in + q
            if abs(ml_out) > l_out:
                continue
            orbital = clebsch_gordan(l_in, ml_in, 1, q, l_out, ml_out)
            if orbital == 0.0:
                continue
            spin_sum = 0.0
            for tms in (-1, 1):
                spin_sum += clebsch_gordan(
                    l_out, ml_out, 0.5, tms / 2.0, tj_out / 2.0, tmj_out / 2.0
                ) * clebsch_gordan(l_in, ml_in, 0.5, tms / 2.0, tj_in / 2.0, tmj_in / 2.0)
            out += eps_q * orbital * spin_sum
    return prefactor * out


def angular_a2(
    l_out: int,
    j_out: float,
    mj_out: float,
    l_mid: int,
    j_mid: float,
    l_in: int,
    j_in: float,
    mj_in: float,
    polarization_1: np.ndarray,
    polarization_2: np.ndarray,
) -> complex:
    """Second-order angular element: two dipole steps through one level."""
    tj_mid = _doubled(j_mid, "j_mid")
    out = 0.0 + 0.0j
    for tmj_mid in range(-tj_mid, tj_mid + 1, 2):
        first = angular_a1(
            l_out, j_out, mj_out, l_mid, j_mid, tmj_mid / 2.0, polarization_1
        )
        if first == 0:
            continue
        out += first * angular_a1(
            l_mid, j_mid, tmj_mid / 2.0, l_in, j_in, mj_in, polarization_2
        )
    return out


@dataclass(frozen=True)
class SpinAmplitudeTable:
    """Labeled amplitudes per (outgoing spin, ground-state spin), doubled keys.

    Entries are defined modulo one common complex prefactor per process;
    only intra-table ratios and patterns are physical here.
    """

    t1: dict[tuple[int, int], complex]
    t2: dict[tuple[int, int], complex]

    def max_abs(self, which: str) -> float:
        table = self.t1 if which == "t1" else self.t2
        return max((abs(v) for v in table.values()), default=0.0)


def spin_amplitudes(geometry: Geometry, radial: RadialParams) -> SpinAmplitudeTable:
    """Contract geometry, angular algebra and radial integrals into amplitudes.

    The one-photon process is driven by the second (short-wavelength)
    beam, the two-photon process by the first; detection-side recoupling
    happens at the single detection direction.  Common energy and
    pulse-envelope prefactors are set to one.
    """
    t1: dict[tuple[int, int], complex] = {}
    t2: dict[tuple[int, int], complex] = {}
    for tms in TWO_MS:
        for tmj in TWO_MJ:
            amp1 = 0.0 + 0.0j
            for ml in (-1, 0, 1):
                harmonic = spherical_harmonic(1, ml, geometry.k_hat_plus)
                for _, tj in ONE_PHOTON_CHANNELS:
                    tmj_out = 2 * ml + tms
                    if abs(tmj_out) > tj:
                        continue
                    detect = clebsch_gordan(1, ml, 0.5, tms / 2.0, tj / 2.0, tmj_out / 2.0)
                    if detect == 0.0:
                        continue
                    amp1 += (
                        harmonic
                        * detect
                        * angular_a1(1, tj / 2.0, tmj_out / 2.0, 0, 0.5, tmj / 2.0, geometry.eps_2)
                        * radial.d1[(1, tj)]
                    )
            t1[(tms, tmj)] = amp1

            amp2 = 0.0 + 0.0j
            for l_out, tj_out, tj_mid in TWO_PHOTON_CHANNELS:
                for ml in range(-l_out, l_out + 1):
                    harmonic = spherical_harmonic(l_out, ml, geometry.k_hat_plus)
                    tmj_out = 2 * ml + tms
                    if abs(tmj_out) > tj_out:
                        continue
                    detect = clebsch_gordan(
                        l_out, ml, 0.5, tms / 2.0, tj_out / 2.0, tmj_out / 2.0
                    )
                    if detect == 0.0:
                        continue
                    amp2 += (
                        harmonic
                        * detect
                        * angular_a2(
                            l_out,
                            tj_out / 2.0,
                            tmj_out / 2.0,
                            1,
                            tj_mid / 2.0,
                            0,
                            0.5,
                            tmj / 2.0,
                            geometry.eps_1,
                            geometry.eps_1,
                        )
                        * radial.d2[(l_out, tj_out, tj_mid)]
                    )
            t2[(tms, tmj)] = amp2
    return SpinAmplitudeTable(t1, t2)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float


@dataclass(frozen=True)
class ConfigReport:
    """Per-condition verdicts for one interferometer configuration."""

    which: str
    checks: tuple[CheckResult, ...]
    balance_factors: dict[int, float] = dataclass_field(default_factory=dict)
    zero_table: bool = False

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _rel(err: float, scale: float) -> float:
    return err / max(scale, 1e-300)


def verify_configuration(
    table: SpinAmplitudeTable, which: str, tol: float = 1e-10
) -> ConfigReport:
    """Check the bias/sign conditions of the open or closed configuration.

    For the open configuration: the one-photon process must flip the spin
    and the two-photon process preserve it, with odd/even signatures.  For
    the closed configuration: both processes must feed both ports with
    equal one-photon amplitudes and opposite-sign two-photon amplitudes,
    column by column in the input spin.  Results are reported with
    relative residuals; a vanishing table passes vacuously but is flagged.
    Balance factors give the outgoing-norm ratio |t2/t1| per input column
    needed to equalize the a priori route weights.
    """
    if which not in ("open", "closed"):
        raise ValueError("which must be 'open' or 'closed'")
    s1, s2 = table.max_abs("t1"), table.max_abs("t2")
    if s1 == 0.0 and s2 == 0.0:
        return ConfigReport(which, (CheckResult("nonzero amplitudes", True, 0.0),), {}, True)
    t1, t2 = table.t1, table.t2
    checks: list[CheckResult] = []

    def record(name: str, err: float, scale: float):
        r = _rel(err, scale)
        checks.append(CheckResult(name, r <= tol, r))

    if which == "open":
        record("t1 spin-preserving entries vanish", max(abs(t1[(1, 1)]), abs(t1[(-1, -1)])), s1)
        record("t1 spin-flip entries odd", abs(t1[(1, -1)] + t1[(-1, 1)]), s1)
        record("t2 spin-flip entries vanish", max(abs(t2[(1, -1)]), abs(t2[(-1, 1)])), s2)
        record("t2 spin-preserving entries even", abs(t2[(1, 1)] - t2[(-1, -1)]), s2)
    else:
        for tmj, column in ((+1, "spin-up input"), (-1, "spin-down input")):
            record(f"t1 unbiased ({column})", abs(t1[(1, tmj)] - t1[(-1, tmj)]), s1)
            record(f"t2 odd in ports ({column})", abs(t2[(1, tmj)] + t2[(-1, tmj)]), s2)

    balance = {}
    for tmj in TWO_MJ:
        denom = abs(t1[(1, tmj)])
        balance[tmj] = abs(t2[(1, tmj)]) / denom if denom > 0 else math.inf
    return ConfigReport(which, tuple(checks), balance, False)
