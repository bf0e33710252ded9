"""Closed-form effective two-level Hamiltonians per resonance q.

The resonance q couples |N, down> (called b) to |N - (j+q), up> (called a),
where j is the harmonic nearest the spin splitting.  Virtual processes
through the detuned modes give level shifts (second order) and multi-photon
couplings (order q for odd q, order q+1 for even q).  Energies are relative
to the mean energy of the two resonant states; the resolvent argument z is
approximated by zero unless a caller supplies it.

Convention: Omega_k is defined as twice the assembled shell coupling element
for mode k (Omega_k = 2 g_k alpha_k gamma_{N-k}/gamma_N, or 2 g_k alpha_k
with unit ratios), so the first-order q = 0 dressed gap equals |Omega_j|
exactly and every formula below is consistent with exact diagonalization.
Only the three harmonics j-1, j, j+1 enter the closed forms; other mode
sets need the numerical route in `spectra`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .shell import GammaTable, ModeSet

SMALL_DENOMINATOR = 1e-6


class SmallDenominatorError(ZeroDivisionError):
    """A virtual-state denominator is too small for the two-level reduction."""


@dataclass(frozen=True)
class RabiAmplitudes:
    """Per-mode complex Rabi amplitudes Omega_k (units of omega_f) around harmonic j."""

    omega_by_mode: Mapping[int, complex]
    j: int
    omega_f: float = 1.0

    def __post_init__(self):
        for k, om in self.omega_by_mode.items():
            if not math.isfinite(abs(om)):
                raise ValueError(f"Omega for harmonic {k} is not finite")

    def omega(self, k: int) -> complex:
        return complex(self.omega_by_mode.get(k, 0.0))


def rabi_amplitudes(
    modes: ModeSet,
    j: int,
    table: GammaTable | None = None,
    N: int | None = None,
) -> RabiAmplitudes:
    """Omega_k = 2 g_k alpha_k, with the exact ladder ratio when a table and
    anchor shell N are supplied (ratio gamma_{N-k}/gamma_N)."""
    om = {}
    for m in modes.modes:
        ratio = 1.0
        if table is not None and N is not None:
            ratio = table.gamma_at(N - m.k) / table.gamma_at(N)
        om[m.k] = 2.0 * m.g * m.alpha * ratio
    return RabiAmplitudes(om, j=j, omega_f=modes.omega_f)


def uniform_amplitudes(omega: float, j: int, omega_f: float = 1.0) -> RabiAmplitudes:
    """Equal real Omega on the three harmonics j-1, j, j+1."""
    return RabiAmplitudes({j - 1: omega, j: omega, j + 1: omega}, j=j, omega_f=omega_f)


@dataclass(frozen=True)
class EffectiveTwoLevel:
    """2x2 effective Hamiltonian for resonance q.

    Implied matrix (basis a = |N-(j+q), up>, b = |N, down>):
        [[ delta/2 + r_aa,  r_ab          ],
         [ conj(r_ab),     -delta/2 + r_bb]]
    """

    q: int
    delta: float
    r_aa: float
    r_bb: float
    r_ab: complex
    order: int
    z: float = 0.0

    def __post_init__(self):
        if self.order <= 1 and (self.r_aa != 0.0 or self.r_bb != 0.0):
            raise ValueError("level shifts require order >= 2")


class DressedEnergies(NamedTuple):
    e_plus: float
    e_minus: float
    mean_shift: float


def _checked_inverse(value: float, omega_f: float) -> float:
    if abs(value) < SMALL_DENOMINATOR * omega_f:
        raise SmallDenominatorError(
            f"virtual-state denominator {value:.3e} below {SMALL_DENOMINATOR} omega_f; "
            "two-level reduction invalid here"
        )
    return 1.0 / value


def first_order(q: int, amps: RabiAmplitudes, delta: float) -> EffectiveTwoLevel:
    """Direct coupling Omega_{j+q}/2; zero for |q| > 1 where no mode matches."""
    r_ab = 0.5 * amps.omega(amps.j + q) if abs(q) <= 1 else 0.0j
    return EffectiveTwoLevel(q=q, delta=delta, r_aa=0.0, r_bb=0.0, r_ab=complex(r_ab), order=1)


def second_order_shifts(q: int, amps: RabiAmplitudes, delta: float, z: float = 0.0):
    """Level shifts (r_aa, r_bb) from virtual excitation of the p != q modes.

    r_aa = sum_{p != q, |p|<=1} |Omega_{j+p}|^2/4 / (z + delta/2 + (q-p) omega_f)
    r_bb = sum_{p != q, |p|<=1} |Omega_{j+p}|^2/4 / (z - delta/2 - (q-p) omega_f)

    Balanced sidebands cancel both shifts exactly at q = 0, delta = 0; for
    q = +1 the net shift moves the resonance to negative detuning and for
    q = -1 to positive, the multi-frequency analogue of the Bloch-Siegert
    shift.
    """
    w = amps.omega_f
    r_aa = 0.0
    r_bb = 0.0
    for p in (-1, 0, 1):
        if p == q:
            continue
        weight = abs(amps.omega(amps.j + p)) ** 2 / 4.0
        if weight == 0.0:
            continue
        r_aa += weight * _checked_inverse(z + 0.5 * delta + (q - p) * w, w)
        r_bb += weight * _checked_inverse(z - 0.5 * delta - (q - p) * w, w)
    return r_aa, r_bb


def third_order_q0(amps: RabiAmplitudes, delta: float, z: float = 0.0) -> complex:
    """Three-photon correction to the q = 0 coupling.

    Two paths (one climbing through N+1, one through N-1) connect the
    resonant pair at third order:

    R3 = (Omega_{j-1} Omega_j^* Omega_{j+1}/8) *
         [1/((z - w - d/2)(z - w + d/2)) + 1/((z + w - d/2)(z + w + d/2))]
    """
    w = amps.omega_f
    j = amps.j
    pref = amps.omega(j - 1) * np.conj(amps.omega(j)) * amps.omega(j + 1) / 8.0
    if pref == 0.0:
        return 0.0j
    term1 = _checked_inverse(z - w - 0.5 * delta, w) * _checked_inverse(z - w + 0.5 * delta, w)
    term2 = _checked_inverse(z + w - 0.5 * delta, w) * _checked_inverse(z + w + 0.5 * delta, w)
    return pref * (term1 + term2)


def odd_q_coupling(q: int, amps: RabiAmplitudes, delta: float, z: float = 0.0) -> complex:
    """Lowest-order multi-photon coupling for odd q >= 3.

    A single process climbs with (q+1)/2 photons from mode j+1 while
    returning (q-1)/2 through mode j-1:

    R_ab^(q) = Omega_{j+1}^{(q+1)/2} (Omega_{j-1}^*)^{(q-1)/2} / 2^q *
               prod_{n=1}^{(q-1)/2} 1/[(z + d/2 + 2n w)(z - d/2 - 2n w)]
    """
    if q < 3 or q % 2 == 0:
        raise ValueError("odd_q_coupling requires odd q >= 3")
    w = amps.omega_f
    j = amps.j
    num = amps.omega(j + 1) ** ((q + 1) // 2) * np.conj(amps.omega(j - 1)) ** ((q - 1) // 2)
    if num == 0.0:
        return 0.0j
    out = num / 2.0**q
    for n in range(1, (q - 1) // 2 + 1):
        out *= _checked_inverse(z + 0.5 * delta + 2 * n * w, w)
        out *= _checked_inverse(z - 0.5 * delta - 2 * n * w, w)
    return complex(out)


def odd_q_on_resonance(q: int, amps: RabiAmplitudes) -> complex:
    """Closed form of odd_q_coupling at delta = 0, z = 0:

    (Omega_{j+1}/2)^{(q+1)/2} (-Omega_{j-1}^*/2)^{(q-1)/2}
        / [(2 w)^{q-1} (((q-1)/2)!)^2]
    """
    if q < 3 or q % 2 == 0:
        raise ValueError("odd q >= 3 required")
    w = amps.omega_f
    j = amps.j
    half = (q - 1) // 2
    return complex(
        (amps.omega(j + 1) / 2.0) ** (half + 1)
        * (-np.conj(amps.omega(j - 1)) / 2.0) ** half
        / ((2.0 * w) ** (q - 1) * math.factorial(half) ** 2)
    )


def _even_q_paths(q: int):
    """Denominator layouts of the q+1 processes coupling an even-q resonance.

    Each process is an alternating absorb/emit chain of order q+1.  Class 1
    (s = 1..q/2): every absorption is on mode j+1 and one emission (the s-th)
    is on mode j instead of j-1.  Class 2 (s = 0..q/2): every emission is on
    mode j-1 and the (s+1)-th absorption is on mode j.  Yields
    (cls, s, up_offsets, down_offsets) where the denominators are
    z - delta/2 - u*w for u in up_offsets and z + delta/2 + d*w for d in
    down_offsets.
    """
    half = q // 2
    for s in range(1, half + 1):
        ups = [(q + 1 - 2 * i) + (1 if i >= s + 1 else 0) for i in range(1, half + 1)]
        downs = [2 * i - (1 if i >= s else 0) for i in range(1, half + 1)]
        yield 1, s, ups, downs
    for s in range(0, half + 1):
        ups = [(q + 1 - 2 * i) + (1 if i >= s + 1 else 0) for i in range(1, half + 1)]
        downs = [2 * i - (1 if i >= s + 1 else 0) for i in range(1, half + 1)]
        yield 2, s, ups, downs


def even_q_coupling(q: int, amps: RabiAmplitudes, delta: float, z: float = 0.0) -> complex:
    """Lowest-order multi-photon coupling for even q >= 2 (order q+1).

    Sums the q+1 distinct processes: q/2 of them borrow one emission on the
    resonant mode j (numerator Omega_{j+1}^{q/2+1} Omega_j^* Omega_{j-1}^*{}^{q/2-1}),
    and q/2+1 of them borrow one absorption on mode j (numerator
    Omega_j Omega_{j+1}^{q/2} Omega_{j-1}^*{}^{q/2}).  Each process carries q
    virtual-state denominators referenced to the mean energy of the resonant
    pair.
    """
    if q < 2 or q % 2 == 1:
        raise ValueError("even_q_coupling requires even q >= 2")
    w = amps.omega_f
    j = amps.j
    half = q // 2
    om_p, om_0, om_m = amps.omega(j + 1), amps.omega(j), amps.omega(j - 1)
    total = 0.0j
    for cls, _s, ups, downs in _even_q_paths(q):
        if cls == 1:
            num = om_p ** (half + 1) * np.conj(om_0) * np.conj(om_m) ** (half - 1)
        else:
            num = om_0 * om_p**half * np.conj(om_m) ** half
        if num == 0.0:
            continue
        term = num / 2.0 ** (q + 1)
        for u in ups:
            term *= _checked_inverse(z - 0.5 * delta - u * w, w)
        for d in downs:
            term *= _checked_inverse(z + 0.5 * delta + d * w, w)
        total += term
    return complex(total)


def even_q2_specialization(amps: RabiAmplitudes, delta: float, z: float = 0.0) -> complex:
    """Hand-written three-process form of the q = 2 coupling.

    The three third-order chains are (absorb j+1, emit j, absorb j+1),
    (absorb j+1, emit j-1, absorb j) and (absorb j, emit j-1, absorb j+1).
    On resonance (delta = 0, z = 0, omega_f = 1) the sum collapses to
    -Omega_j Omega_{j-1}^* Omega_{j+1}/4 for equal amplitudes.  Kept as an
    independent algebraic cross-check of even_q_coupling.
    """
    w = amps.omega_f
    j = amps.j
    om_p, om_0, om_m = amps.omega(j + 1), amps.omega(j), amps.omega(j - 1)
    d2 = 0.5 * delta
    t1 = (
        om_p * np.conj(om_0) * om_p / 8.0
        * _checked_inverse(z - d2 - w, w)
        * _checked_inverse(z + d2 + w, w)
    )
    t2 = (
        om_p * np.conj(om_m) * om_0 / 8.0
        * _checked_inverse(z - d2 - w, w)
        * _checked_inverse(z + d2 + 2 * w, w)
    )
    t3 = (
        om_0 * np.conj(om_m) * om_p / 8.0
        * _checked_inverse(z - d2 - 2 * w, w)
        * _checked_inverse(z + d2 + w, w)
    )
    return complex(t1 + t2 + t3)


def effective_hamiltonian(
    q: int,
    amps: RabiAmplitudes,
    delta: float,
    order: int = 3,
    z: float = 0.0,
) -> EffectiveTwoLevel:
    """Assemble the effective two-level Hamiltonian for resonance q.

    order = 1 keeps the direct coupling only; order >= 2 adds the level
    shifts; order >= 3 adds the three-photon q = 0 correction and, when the
    order reaches it, the lowest multi-photon coupling of a |q| >= 2
    resonance (order q for odd q, q + 1 for even q).  Negative q <= -2 has
    no closed form here; use the numerical scan.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if q <= -2 and order >= abs(q):
        raise ValueError("multi-photon couplings are implemented for positive q only")
    r_ab = first_order(q, amps, delta).r_ab
    r_aa = r_bb = 0.0
    if order >= 2:
        r_aa, r_bb = second_order_shifts(q, amps, delta, z)
    if order >= 3:
        if q == 0:
            r_ab += third_order_q0(amps, delta, z)
        elif q >= 3 and q % 2 == 1 and order >= q:
            r_ab += odd_q_coupling(q, amps, delta, z)
        elif q >= 2 and q % 2 == 0 and order >= q + 1:
            r_ab += even_q_coupling(q, amps, delta, z)
    return EffectiveTwoLevel(q=q, delta=delta, r_aa=r_aa, r_bb=r_bb, r_ab=r_ab, order=order, z=z)


def dressed_energies(eff: EffectiveTwoLevel) -> DressedEnergies:
    """E_± = ±(1/2) sqrt([delta - (r_bb - r_aa)]^2 + |2 r_ab|^2), measured
    from the mean energy; the common shift (r_aa + r_bb)/2 is reported
    alongside."""
    deff = eff.delta - (eff.r_bb - eff.r_aa)
    root = 0.5 * math.hypot(deff, 2.0 * abs(eff.r_ab))
    return DressedEnergies(root, -root, 0.5 * (eff.r_aa + eff.r_bb))


def splitting(eff: EffectiveTwoLevel) -> float:
    e = dressed_energies(eff)
    return e.e_plus - e.e_minus


def analytic_crossing(
    q: int,
    amps: RabiAmplitudes,
    order: int = 3,
    z: float = 0.0,
    half_width: float = 0.5,
    samples: int = 2001,
):
    """Minimum of the analytic dressed splitting over the resonance window.

    Returns (gap, position) with position in Delta_0 units, refined by a
    parabola through the squared splitting, mirroring the numerical
    extraction in `spectra`.
    """
    ds = np.linspace(-half_width, half_width, samples)
    gaps = np.array([splitting(effective_hamiltonian(q, amps, d, order, z)) for d in ds])
    i = int(np.argmin(gaps))
    if 0 < i < len(ds) - 1:
        a, b, c = np.polyfit(ds[i - 1 : i + 2], gaps[i - 1 : i + 2] ** 2, 2)
        if a > 0:
            dv = float(np.clip(-b / (2 * a), ds[i - 1], ds[i + 1]))
            return float(math.sqrt(max(a * dv * dv + b * dv + c, 0.0))), q + dv
    return float(gaps[i]), q + float(ds[i])


def rabi_excitation(eff: EffectiveTwoLevel, t: float) -> float:
    """Excitation probability after driving the resonance for time t.

    |Omega_eff / Omega_tilde|^2 sin^2(Omega_tilde t / 2) with
    Omega_eff = 2 r_ab and Omega_tilde the generalized Rabi frequency.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    om_eff = 2.0 * abs(eff.r_ab)
    om_tilde = math.hypot(eff.delta - (eff.r_bb - eff.r_aa), om_eff)
    if om_tilde == 0.0:
        return 0.0
    return (om_eff / om_tilde) ** 2 * math.sin(0.5 * om_tilde * t) ** 2


def excitation_spectrum(q: int, amps: RabiAmplitudes, deltas, order: int = 3, z: float = 0.0):
    """Peak excitation probability per detuning for a pi pulse.

    At each grid point the pulse duration is t = pi / Omega_tilde, giving
    probability (Omega_eff / Omega_tilde)^2.
    """
    out = np.empty(len(deltas))
    for i, d in enumerate(np.asarray(deltas, dtype=float)):
        eff = effective_hamiltonian(q, amps, d, order, z)
        om_eff = 2.0 * abs(eff.r_ab)
        om_tilde = math.hypot(eff.delta - (eff.r_bb - eff.r_aa), om_eff)
        out[i] = 0.0 if om_tilde == 0.0 else (om_eff / om_tilde) ** 2
    return out
