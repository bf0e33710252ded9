"""Hermitian matrix assembly for the spin-field models.

Covers the rotating-wave (Jaynes-Cummings) coupling in either the Fock-spin
or shell-spin basis, and the full Rabi coupling with co- and counter-rotating
terms.  Storage keeps one triangle only, so Hermiticity is structural rather
than numerical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .bases import SPIN_DOWN, SPIN_UP, Basis, FockSpinState, ShellSpinState
from .shell import GammaTable, ModeSet, SupportError, ladder_element

DENSE_LIMIT = 4096


@dataclass(frozen=True)
class SpinFieldParams:
    """Spin splitting omega0 (units of omega_f) and the coupling form."""

    omega0: float
    rwa: bool = True

    def __post_init__(self):
        if not math.isfinite(self.omega0):
            raise ValueError("omega0 must be finite")


def detuning(params: SpinFieldParams, modes: ModeSet, j: int, q: int = 0) -> float:
    """Delta_q = omega0 - (j + q) * omega_f."""
    return params.omega0 - (j + q) * modes.omega_f


@dataclass
class HermitianOperator:
    """Sparse Hermitian matrix tied to a Basis.

    `entries` holds <i|H|j> for i <= j only; the lower triangle is mirrored
    by conjugation on access.  `energy_offset` has already been subtracted
    from the stored diagonal.  `dropped` counts couplings that left the
    basis during assembly.
    """

    dim: int
    entries: dict
    basis: Basis
    energy_offset: float = 0.0
    dropped: int = 0
    _csr: sp.csr_matrix | None = field(default=None, repr=False, compare=False)

    def value(self, i: int, j: int) -> complex:
        if i <= j:
            return self.entries.get((i, j), 0.0 + 0.0j)
        return np.conj(self.entries.get((j, i), 0.0 + 0.0j))

    def to_csr(self) -> sp.csr_matrix:
        if self._csr is None:
            rows, cols, vals = [], [], []
            for (i, j), v in self.entries.items():
                rows.append(i)
                cols.append(j)
                vals.append(v)
                if i != j:
                    rows.append(j)
                    cols.append(i)
                    vals.append(np.conj(v))
            self._csr = sp.csr_matrix(
                (np.array(vals, dtype=complex), (np.array(rows), np.array(cols))),
                shape=(self.dim, self.dim),
            )
        return self._csr

    def to_dense(self, limit: int = DENSE_LIMIT) -> np.ndarray:
        if self.dim > limit:
            raise ValueError(f"dense conversion refused above dimension {limit} (dim={self.dim})")
        return self.to_csr().toarray()

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.to_csr() @ v

    def inf_norm(self) -> float:
        m = self.to_csr()
        return float(abs(m).sum(axis=1).max()) if m.nnz else 0.0

    def coo_rows(self):
        """Sorted (row, col, re, im) rows of the stored triangle."""
        return [
            (i, j, float(np.real(v)), float(np.imag(v)))
            for (i, j), v in sorted(self.entries.items())
        ]


def _add(entries: dict, i: int, j: int, value: complex):
    """Accumulate <i|H|j> into the stored (upper) triangle."""
    if i <= j:
        key, val = (i, j), value
    else:
        key, val = (j, i), np.conj(value)
    if key in entries:
        entries[key] += val
    else:
        entries[key] = complex(val)


def _fock_diagonal(state: FockSpinState, modes: ModeSet, params: SpinFieldParams) -> float:
    field_energy = sum(m.k * n for m, n in zip(modes.modes, state.occupations)) * modes.omega_f
    return 0.5 * params.omega0 * state.spin + field_energy


def assemble_jcm_fock(
    basis: Basis,
    modes: ModeSet,
    params: SpinFieldParams,
    energy_offset: float = 0.0,
) -> HermitianOperator:
    """Rotating-wave spin-field Hamiltonian on a Fock-spin basis.

    Diagonal: +-omega0/2 + sum_i k_i omega_f n_i - energy_offset.
    Off-diagonal: g_i sqrt(n_i) between |.., n_i, .., down> and
    |.., n_i - 1, .., up>.  Couplings whose partner lies outside the basis
    are dropped and counted.
    """
    if basis.kind != "fock":
        raise ValueError("assemble_jcm_fock requires a Fock-spin basis")
    entries: dict = {}
    dropped = 0
    for i, st in enumerate(basis.states):
        _add(entries, i, i, _fock_diagonal(st, modes, params) - energy_offset)
        if st.spin != SPIN_DOWN:
            continue
        occ = st.occupations
        for mi, m in enumerate(modes.modes):
            if occ[mi] == 0:
                continue
            partner = FockSpinState(occ[:mi] + (occ[mi] - 1,) + occ[mi + 1 :], SPIN_UP)
            t = basis.index.get(partner)
            if t is None:
                dropped += 1
                continue
            _add(entries, t, i, m.g * math.sqrt(occ[mi]))
    return HermitianOperator(
        len(basis), entries, basis, energy_offset=energy_offset, dropped=dropped
    )


def assemble_jcm_shell(
    basis: Basis,
    table: GammaTable,
    modes: ModeSet,
    params: SpinFieldParams,
    exact_ratios: bool = True,
    energy_offset: float = 0.0,
) -> HermitianOperator:
    """Rotating-wave Hamiltonian on the non-degenerate shell-spin basis.

    Diagonal: +-omega0/2 + N omega_f.  The coupling between |N, up> and
    |N + k_j, down> is g_j alpha_j gamma_N / gamma_{N+k_j}; with
    exact_ratios=False the ratio is replaced by 1, which is the large-field
    approximation with every element equal to g_j alpha_j.
    """
    if basis.kind != "shell":
        raise ValueError("assemble_jcm_shell requires a shell-spin basis")
    entries: dict = {}
    dropped = 0
    for i, st in enumerate(basis.states):
        if not table.in_support(st.N):
            raise SupportError(f"basis state shell {st.N} is outside the table support")
        _add(entries, i, i, 0.5 * params.omega0 * st.spin + st.N * modes.omega_f - energy_offset)
        if st.spin != SPIN_UP:
            continue
        for mi, m in enumerate(modes.modes):
            partner = ShellSpinState(st.N + m.k, SPIN_DOWN)
            t = basis.index.get(partner)
            if t is None:
                dropped += 1
                continue
            if exact_ratios:
                try:
                    elem = m.g * ladder_element(table, modes, st.N, mi)
                except SupportError as exc:
                    raise SupportError(f"assembly failed at shell {st.N}: {exc}") from exc
            else:
                elem = m.g * m.alpha
            _add(entries, i, t, elem)
    return HermitianOperator(len(basis), entries, basis, energy_offset=energy_offset, dropped=dropped)


def rabi_couplings(modes: ModeSet, g0: float) -> list[float]:
    """Per-mode couplings g_i = sqrt(omega_i / omega_lowest) * g0."""
    k_low = modes.harmonics[0]
    return [math.sqrt(m.k / k_low) * g0 for m in modes.modes]


def assemble_rabi(
    basis: Basis,
    modes: ModeSet,
    params: SpinFieldParams,
    g0: float,
    table: GammaTable | None = None,
) -> HermitianOperator:
    """Multimode Rabi Hamiltonian with co- and counter-rotating couplings.

    H = omega0/2 sigma_z + sum_i k_i omega_f n_i + g_i (a_i + a_i^dag) sigma_x
    with g_i = sqrt(k_i/k_lowest) g0.  In the shell basis a_i takes N to
    N - k_i and a_i^dag to N + k_i, each flipping the spin, with the exact
    gamma ladder ratios (the state dependence responsible for collapse).
    """
    if params.rwa:
        raise ValueError("assemble_rabi requires params.rwa = False")
    gs = rabi_couplings(modes, g0)
    entries: dict = {}
    dropped = 0
    if basis.kind == "fock":
        for i, st in enumerate(basis.states):
            _add(entries, i, i, _fock_diagonal(st, modes, params))
            occ = st.occupations
            for mi, m in enumerate(modes.modes):
                raised = FockSpinState(occ[:mi] + (occ[mi] + 1,) + occ[mi + 1 :], -st.spin)
                t = basis.index.get(raised)
                if t is None:
                    dropped += 1
                    continue
                _add(entries, t, i, gs[mi] * math.sqrt(occ[mi] + 1))
    elif basis.kind == "shell":
        if table is None:
            raise ValueError("shell-basis Rabi assembly requires a GammaTable")
        for i, st in enumerate(basis.states):
            if not table.in_support(st.N):
                raise SupportError(f"basis state shell {st.N} is outside the table support")
            _add(entries, i, i, 0.5 * params.omega0 * st.spin + st.N * modes.omega_f)
            for mi, m in enumerate(modes.modes):
                raised = ShellSpinState(st.N + m.k, -st.spin)
                t = basis.index.get(raised)
                if t is None:
                    dropped += 1
                    continue
                try:
                    elem = ladder_element(table, modes, st.N, mi)
                except SupportError as exc:
                    raise SupportError(f"assembly failed at shell {st.N}: {exc}") from exc
                # <N + k_i, -s| a_i^dag |N, s> = alpha_i^* gamma_N / gamma_{N+k_i}
                _add(entries, t, i, gs[mi] * np.conj(elem))
    else:
        raise ValueError(f"unknown basis kind {basis.kind!r}")
    return HermitianOperator(len(basis), entries, basis, dropped=dropped)
