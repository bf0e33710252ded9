"""Energy-shell description of a multimode coherent field.

A field whose mode frequencies are integer multiples k of a fundamental
omega_f partitions its Fock space into shells of total energy N*omega_f
(N = sum_k k*n_k).  A product of coherent states puts weight gamma_N^2 on
shell N; the shell states together with these weights give a non-degenerate
ladder on which annihilation acts as N -> N-k with amplitude
alpha_k * gamma_{N-k}/gamma_N.

The weights are computed exactly by convolving, mode by mode, the Poisson
photon-number distribution of each mode stretched onto the energy axis by
its harmonic index.  Brute-force enumeration of shell occupation vectors is
kept as an independent test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

SUPPORT_FLOOR = 1e-300


class SupportError(ValueError):
    """A shell outside the usable support of a GammaTable was requested."""


@dataclass(frozen=True)
class Mode:
    """One field mode: harmonic index k, coherent amplitude, spin coupling."""

    k: int
    alpha: complex
    g: float = 0.0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"harmonic index must be a positive integer, got {self.k}")
        if not math.isfinite(abs(self.alpha)):
            raise ValueError("coherent amplitude must be finite")
        if not (math.isfinite(self.g) and self.g >= 0.0):
            raise ValueError(f"coupling must be finite and >= 0, got {self.g}")

    @property
    def nbar(self) -> float:
        return abs(self.alpha) ** 2


@dataclass(frozen=True)
class ModeSet:
    """Ordered set of field modes sharing a fundamental frequency omega_f.

    All energies produced elsewhere in the package are in units of omega_f
    unless stated otherwise; omega_f defaults to 1.
    """

    modes: tuple[Mode, ...]
    omega_f: float = 1.0

    def __post_init__(self):
        if len(self.modes) == 0:
            raise ValueError("ModeSet requires at least one mode")
        ks = [m.k for m in self.modes]
        if sorted(ks) != ks or len(set(ks)) != len(ks):
            raise ValueError(f"harmonics must be distinct and sorted ascending, got {ks}")
        if not (math.isfinite(self.omega_f) and self.omega_f > 0):
            raise ValueError(f"omega_f must be positive and finite, got {self.omega_f}")

    @property
    def harmonics(self) -> tuple[int, ...]:
        return tuple(m.k for m in self.modes)

    @property
    def k0(self) -> int:
        """gcd of the harmonics: the lattice spacing of populated shells."""
        return math.gcd(*self.harmonics) if len(self.modes) > 1 else self.modes[0].k

    @property
    def nbar(self) -> float:
        """Mean shell index, sum_k k |alpha_k|^2."""
        return sum(m.k * m.nbar for m in self.modes)

    @property
    def sigma_sq(self) -> float:
        """Shell-index variance, sum_k k^2 |alpha_k|^2."""
        return sum(m.k**2 * m.nbar for m in self.modes)

    def index_of_harmonic(self, k: int) -> int:
        for i, m in enumerate(self.modes):
            if m.k == k:
                return i
        raise KeyError(f"no mode with harmonic {k}")


def mode_set(harmonics, alphas, couplings=None, omega_f=1.0) -> ModeSet:
    """Convenience constructor from parallel sequences."""
    if couplings is None:
        couplings = [0.0] * len(harmonics)
    if not (len(harmonics) == len(alphas) == len(couplings)):
        raise ValueError("harmonics, alphas and couplings must have equal length")
    modes = tuple(Mode(int(k), complex(a), float(g)) for k, a, g in zip(harmonics, alphas, couplings))
    return ModeSet(modes, omega_f)


def shell_index(occupations, modes: ModeSet) -> int:
    """Total energy quantum number N = sum_k k*n_k, exact integer arithmetic."""
    ks = modes.harmonics
    if len(occupations) != len(ks):
        raise ValueError(f"got {len(occupations)} occupations for {len(ks)} modes")
    return sum(int(k) * int(n) for k, n in zip(ks, occupations))


def enumerate_shell(modes: ModeSet, N: int, n_cap: int) -> list[tuple[int, ...]]:
    """All occupation vectors with 0 <= n_k <= n_cap and sum k*n_k = N.

    Returned in descending lexicographic order.  Exponential in mode count;
    used as the test oracle for gamma_table and in degeneracy demonstrations.
    """
    if N < 0:
        raise ValueError("shell index must be >= 0")
    if n_cap < 0:
        raise ValueError("per-mode cap must be >= 0")
    ks = modes.harmonics
    out: list[tuple[int, ...]] = []
    occ = [0] * len(ks)

    def rec(i: int, remaining: int):
        k = ks[i]
        if i == len(ks) - 1:
            if remaining % k == 0 and remaining // k <= n_cap:
                occ[i] = remaining // k
                out.append(tuple(occ))
            return
        for n in range(min(n_cap, remaining // k), -1, -1):
            occ[i] = n
            rec(i + 1, remaining - k * n)
        occ[i] = 0

    rec(0, N)
    return out


@dataclass(frozen=True)
class GammaTable:
    """Shell weights gamma_N^2 of a coherent product state, on the k0 lattice.

    Index i of the arrays corresponds to shell N = n_min + i*k0.  Shells off
    the lattice carry exactly zero weight and are not stored.  `mean` and
    `variance` are the closed-form moments sum k|alpha|^2 and sum k^2|alpha|^2;
    the empirical moments of the table agree with them to within the
    truncation tolerance used at construction.
    """

    n_min: int
    n_max: int
    k0: int
    harmonics: tuple[int, ...]
    gamma_sq: np.ndarray
    gamma: np.ndarray
    mean: float
    variance: float
    tail_mass: float
    support_c: float = 8.0
    support_floor: float = SUPPORT_FLOOR

    def __post_init__(self):
        self.gamma_sq.flags.writeable = False
        self.gamma.flags.writeable = False

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    def lattice_shells(self) -> np.ndarray:
        return self.n_min + self.k0 * np.arange(len(self.gamma_sq))

    def _idx(self, N: int):
        if N < self.n_min or N > self.n_max or (N - self.n_min) % self.k0 != 0:
            return None
        return (N - self.n_min) // self.k0

    def in_window(self, N: int) -> bool:
        return self._idx(N) is not None

    def gamma_sq_at(self, N: int) -> float:
        i = self._idx(N)
        return 0.0 if i is None else float(self.gamma_sq[i])

    def gamma_at(self, N: int) -> float:
        i = self._idx(N)
        return 0.0 if i is None else float(self.gamma[i])

    def in_support(self, N: int) -> bool:
        """True when gamma_N is large enough for stable ladder ratios.

        Requires weight above the underflow floor and N within
        support_c standard deviations of the mean.
        """
        if self.gamma_sq_at(N) <= self.support_floor:
            return False
        return abs(N - self.mean) <= self.support_c * self.sigma

    def support_shells(self) -> list[int]:
        return [int(N) for N in self.lattice_shells() if self.in_support(int(N))]

    def empirical_mean(self) -> float:
        w = self.gamma_sq / self.gamma_sq.sum()
        return float(np.dot(self.lattice_shells(), w))

    def empirical_variance(self) -> float:
        w = self.gamma_sq / self.gamma_sq.sum()
        ns = self.lattice_shells()
        mu = np.dot(ns, w)
        return float(np.dot((ns - mu) ** 2, w))

    def csv_rows(self):
        """(N, gamma_sq) rows for inspection dumps."""
        return [(int(N), float(g2)) for N, g2 in zip(self.lattice_shells(), self.gamma_sq)]


def _poisson_pmf_truncated(nbar: float, tail: float) -> np.ndarray:
    """Poisson pmf on 0..cap with P(X > cap) < tail."""
    if nbar == 0.0:
        return np.array([1.0])
    # generous initial cap, extend if the tail bound is not yet met
    cap = int(nbar + 12.0 * math.sqrt(nbar) + 20.0)
    while stats.poisson.sf(cap, nbar) >= tail:
        cap = int(1.5 * cap) + 10
    return stats.poisson.pmf(np.arange(cap + 1), nbar)


def gamma_table(modes: ModeSet, epsilon: float, support_c: float = 8.0) -> GammaTable:
    """Shell-weight distribution gamma_N^2 by stretched-Poisson convolution.

    Each mode contributes an independent Poisson photon distribution; on the
    energy axis mode k advances the shell index in steps of k, so the joint
    shell distribution is the convolution of the per-mode distributions
    stretched by their harmonics.  Per-mode tails are truncated below
    epsilon/(number of modes) and the final window is trimmed so the total
    discarded mass stays at or below epsilon.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    per_mode_tail = epsilon / len(modes.modes)
    dist = np.array([1.0])
    for m in modes.modes:
        pmf = _poisson_pmf_truncated(m.nbar, per_mode_tail)
        new = np.zeros(len(dist) + m.k * (len(pmf) - 1))
        for n, p in enumerate(pmf):
            if p > 0.0:
                new[n * m.k : n * m.k + len(dist)] += p * dist
        dist = new

    discarded = 1.0 - dist.sum()
    lo, hi = 0, len(dist) - 1
    while lo < hi and dist[lo] == 0.0:
        lo += 1
    while hi > lo and dist[hi] == 0.0:
        hi -= 1
    # trim further only while the epsilon budget allows it
    while lo < hi:
        side = lo if dist[lo] <= dist[hi] else hi
        if discarded + dist[side] > epsilon:
            break
        discarded += dist[side]
        if side == lo:
            lo += 1
        else:
            hi -= 1

    k0 = modes.k0
    if lo % k0 != 0:  # populated shells always sit on the k0 lattice
        lo -= lo % k0
    window = dist[lo : hi + 1]
    off_lattice = window[np.arange(len(window)) % k0 != 0]
    if off_lattice.size and off_lattice.max() > 0.0:
        raise AssertionError("nonzero weight off the k0 lattice")
    g2 = np.ascontiguousarray(window[::k0])
    return GammaTable(
        n_min=lo,
        n_max=lo + k0 * (len(g2) - 1),
        k0=k0,
        harmonics=modes.harmonics,
        gamma_sq=g2,
        gamma=np.sqrt(g2),
        mean=modes.nbar,
        variance=modes.sigma_sq,
        tail_mass=float(1.0 - g2.sum()),
        support_c=support_c,
    )


def gamma_gaussian(modes: ModeSet, N: int) -> float:
    """Large-field Gaussian limit of gamma_N^2 on the k0 lattice.

    k0/(sqrt(2 pi) sigma) * exp(-(N - Nbar)^2 / (2 sigma^2)); exactly zero
    off the lattice.  Undefined for an unexcited field (sigma = 0).
    """
    if N < 0:
        raise ValueError("shell index must be >= 0")
    var = modes.sigma_sq
    if var == 0.0:
        raise ValueError("Gaussian limit undefined when every mode has alpha = 0")
    if N % modes.k0 != 0:
        return 0.0
    sigma = math.sqrt(var)
    z = (N - modes.nbar) / sigma
    return modes.k0 / (math.sqrt(2.0 * math.pi) * sigma) * math.exp(-0.5 * z * z)


def ladder_element(table: GammaTable, modes: ModeSet, N: int, mode_index: int) -> complex:
    """Annihilation matrix element <N| a_j |N + k_j> = alpha_j gamma_N / gamma_{N+k_j}.

    The creation element <N + k_j| a_j^dag |N> is its complex conjugate, so
    operators assembled from these are Hermitian by construction.  Returns 0
    when shell N is out of support; raises SupportError when the destination
    shell N + k_j is out of support while N is not, since the ratio is then
    numerically meaningless.
    """
    mode = modes.modes[mode_index]
    upper = N + mode.k
    if not (table.in_window(N) and table.in_window(upper)):
        raise ValueError(
            f"shells {N} and {upper} must lie inside the table window "
            f"[{table.n_min}, {table.n_max}]"
        )
    if not table.in_support(N):
        return 0.0
    if not table.in_support(upper):
        raise SupportError(
            f"shell {upper} is outside support (gamma^2 = {table.gamma_sq_at(upper):.3e}) "
            f"while shell {N} is not; ladder ratio undefined"
        )
    return mode.alpha * (table.gamma_at(N) / table.gamma_at(upper))
