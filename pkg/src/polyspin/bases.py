"""Ordered state bases for the coupled spin-field problem.

Three flavours: the interaction-connected Fock-spin basis (breadth-first
closure under the rotating-wave generators, which reproduces the degeneracy
pathology), the plain per-mode-cutoff Fock-spin grid (oracle basis), and the
non-degenerate shell-spin basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .shell import GammaTable, ModeSet

SPIN_DOWN = -1
SPIN_UP = +1

FOCK_DIM_LIMIT = 2_000_000


class FockSpinState(NamedTuple):
    occupations: tuple[int, ...]
    spin: int  # SPIN_DOWN or SPIN_UP (twice the z projection)


class ShellSpinState(NamedTuple):
    N: int
    spin: int


class EmptyBasisError(ValueError):
    pass


@dataclass(frozen=True)
class Basis:
    """Ordered sequence of labelled states with its inverse index map.

    `pruned` counts connected-basis branches dropped at the vacuum boundary;
    `resonant_k` and `seed_N` record how a shell basis was grown.
    """

    kind: str  # "fock" or "shell"
    states: tuple
    index: dict = field(repr=False)
    pruned: int = 0
    resonant_k: int | None = None
    seed_N: int | None = None

    def __post_init__(self):
        if self.kind not in ("fock", "shell"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if len(self.index) != len(self.states):
            raise ValueError("duplicate state labels in basis")

    def __len__(self) -> int:
        return len(self.states)

    def csv_rows(self):
        rows = []
        for i, s in enumerate(self.states):
            if self.kind == "fock":
                rows.append((i, *s.occupations, s.spin))
            else:
                rows.append((i, s.N, s.spin))
        return rows


def _make_basis(kind: str, states, **meta) -> Basis:
    states = tuple(states)
    return Basis(kind=kind, states=states, index={s: i for i, s in enumerate(states)}, **meta)


def fock_basis_connected(modes: ModeSet, seed: FockSpinState, depth: int) -> Basis:
    """Breadth-first closure of `seed` under the rotating-wave generators.

    From a spin-down state each mode may absorb one photon while raising the
    spin; from a spin-up state each mode may emit one photon while lowering
    it.  Branches that would push an occupation below zero are silently
    pruned but counted.  Ordering is by BFS layer, then lexicographic on
    (occupations, spin), which makes spectra and golden files reproducible.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if len(seed.occupations) != len(modes.modes):
        raise ValueError("seed occupations do not match the mode set")
    seen = {seed}
    ordered = [seed]
    frontier = [seed]
    pruned = 0
    for _ in range(depth):
        nxt = []
        for st in frontier:
            occ, spin = st
            for i, m in enumerate(modes.modes):
                if spin == SPIN_DOWN:
                    if occ[i] == 0:
                        pruned += 1
                        continue
                    new = FockSpinState(occ[:i] + (occ[i] - 1,) + occ[i + 1 :], SPIN_UP)
                else:
                    new = FockSpinState(occ[:i] + (occ[i] + 1,) + occ[i + 1 :], SPIN_DOWN)
                if new not in seen:
                    seen.add(new)
                    nxt.append(new)
        nxt = sorted(set(nxt))
        ordered.extend(nxt)
        frontier = nxt
    return _make_basis("fock", ordered, pruned=pruned)


def fock_basis_cutoff(modes: ModeSet, caps, dim_limit: int = FOCK_DIM_LIMIT) -> Basis:
    """Full tensor grid 0..cap_i per mode times two spins."""
    caps = tuple(int(c) for c in caps)
    if len(caps) != len(modes.modes):
        raise ValueError("need one cap per mode")
    if any(c < 0 for c in caps):
        raise ValueError("caps must be >= 0")
    dim = 2
    for c in caps:
        dim *= c + 1
    if dim > dim_limit:
        raise ValueError(f"requested dimension {dim} exceeds limit {dim_limit}")
    states = []
    occ = [0] * len(caps)

    def rec(i):
        if i == len(caps):
            t = tuple(occ)
            states.append(FockSpinState(t, SPIN_DOWN))
            states.append(FockSpinState(t, SPIN_UP))
            return
        for n in range(caps[i] + 1):
            occ[i] = n
            rec(i + 1)
        occ[i] = 0

    rec(0)
    return _make_basis("fock", states)


def shell_basis(
    table: GammaTable,
    seed_N: int,
    depth: int,
    resonant_k: int,
    transitions: str = "rwa",
) -> Basis:
    """Closure of |seed_N, down> under shell transitions with spin flip.

    transitions="rwa" applies the Jaynes-Cummings generators only (shell
    drops by k_j when the spin rises and vice versa); "both" also closes
    under the counter-rotating direction, as appropriate for the Rabi model.
    States outside the table support are not entered.  Ordering is by
    (N, spin).
    """
    if transitions not in ("rwa", "both"):
        raise ValueError(f"unknown transition set {transitions!r}")
    if not table.in_support(seed_N):
        raise EmptyBasisError(f"seed shell {seed_N} is outside the table support")
    seed = ShellSpinState(int(seed_N), SPIN_DOWN)
    seen = {seed}
    frontier = [seed]
    for _ in range(depth):
        nxt = []
        for N, spin in frontier:
            if transitions == "rwa":
                steps = [-k for k in table.harmonics] if spin == SPIN_DOWN else list(table.harmonics)
            else:
                steps = [s * k for k in table.harmonics for s in (-1, +1)]
            for dN in steps:
                cand = ShellSpinState(N + dN, -spin)
                if cand not in seen and table.in_support(cand.N):
                    seen.add(cand)
                    nxt.append(cand)
        frontier = nxt
    return _make_basis("shell", sorted(seen), resonant_k=resonant_k, seed_N=int(seed_N))


def shell_window_basis(table: GammaTable) -> Basis:
    """Every supported shell with both spins, ordered by (N, spin)."""
    shells = table.support_shells()
    if not shells:
        raise EmptyBasisError("gamma table has empty support")
    states = [ShellSpinState(int(N), s) for N in shells for s in (SPIN_DOWN, SPIN_UP)]
    states.sort()
    return _make_basis("shell", states)
