"""Dressed-state spectra: diagonalization, detuning scans, avoided crossings.

Branch identity across a scan is maintained by maximal eigenvector overlap
(a linear assignment per step), so genuine crossings and avoided crossings
are distinguished.  Gap extraction refines the minimum by a parabola through
the squared branch separation, which is exact for an isolated two-level
anticrossing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bases import SPIN_DOWN, SPIN_UP, Basis, ShellSpinState, fock_basis_connected, shell_basis
from .hamiltonian import HermitianOperator, SpinFieldParams, assemble_jcm_fock, assemble_jcm_shell
from .shell import GammaTable, ModeSet, gamma_table, shell_index

RESIDUAL_TOL = 1e-10
ORTHO_TOL = 1e-10
OVERLAP_THRESHOLD = 0.5


class ConvergenceError(RuntimeError):
    pass


class AmbiguousBranchError(RuntimeError):
    pass


class WindowError(ValueError):
    pass


def eigensystem(op: HermitianOperator, check: bool = True):
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns).

    Verifies the residual ||Hv - lambda v|| <= 1e-10 ||H|| per pair and the
    orthonormality of the eigenvector matrix; failure raises
    ConvergenceError with the worst residual.
    """
    if op.dim < 1:
        raise ValueError("operator dimension must be >= 1")
    H = op.to_dense()
    vals, vecs = np.linalg.eigh(H)
    if check:
        scale = max(op.inf_norm(), 1.0)
        resid = np.linalg.norm(op.to_csr() @ vecs - vecs * vals, axis=0)
        worst = float(resid.max()) if resid.size else 0.0
        if worst > RESIDUAL_TOL * scale:
            raise ConvergenceError(f"worst eigenpair residual {worst:.3e} exceeds tolerance")
        gram = vecs.conj().T @ vecs
        if float(np.abs(gram - np.eye(op.dim)).max()) > ORTHO_TOL:
            raise ConvergenceError("eigenvector overlap matrix deviates from identity")
    return vals, vecs


@dataclass(frozen=True)
class DetuningScan:
    """Eigenvalues and branch tracks over a grid of detunings Delta_0.

    levels[t] is the ascending spectrum at delta_values[t]; tracks[t, b] is
    the level index occupied by branch b at that step; vectors[t] holds the
    eigenvector columns in level order.
    """

    delta_values: np.ndarray
    levels: np.ndarray
    tracks: np.ndarray
    vectors: np.ndarray
    basis: Basis
    resonant_j: int

    def branch_energy(self, b: int) -> np.ndarray:
        return self.levels[np.arange(len(self.delta_values)), self.tracks[:, b]]

    def csv_rows(self):
        rows = []
        level_to_branch = np.empty_like(self.tracks)
        for t in range(len(self.delta_values)):
            level_to_branch[t, self.tracks[t]] = np.arange(self.tracks.shape[1])
        for t, d in enumerate(self.delta_values):
            for lv in range(self.levels.shape[1]):
                rows.append((float(d), lv, float(self.levels[t, lv]), int(level_to_branch[t, lv])))
        return rows


@dataclass(frozen=True)
class CrossingReport:
    """Minimal branch separation near resonance q and where it occurs."""

    q: int
    gap: float
    position: float  # Delta_0 at the minimum gap, units of omega_f
    shift: float  # position - q

    def csv_rows(self):
        return [(self.q, self.gap, self.position, self.shift)]


def detuning_scan(
    basis: Basis,
    table: GammaTable,
    modes: ModeSet,
    delta_values,
    exact_ratios: bool = False,
) -> DetuningScan:
    """Diagonalize the shell Hamiltonian on a grid of detunings Delta_0.

    The spin splitting at each point is omega0 = (j + Delta_0) omega_f with
    j = basis.resonant_k.  Branches are matched step to step by maximal
    eigenvector overlap through a linear assignment, which is a permutation
    by construction.
    """
    if basis.kind != "shell" or basis.resonant_k is None:
        raise ValueError("detuning_scan requires a shell basis built around a resonant harmonic")
    deltas = np.asarray(delta_values, dtype=float)
    if deltas.size < 2:
        raise ValueError("need at least two scan samples")
    j = basis.resonant_k
    dim = len(basis)
    levels = np.empty((deltas.size, dim))
    vectors = np.empty((deltas.size, dim, dim), dtype=complex)
    tracks = np.empty((deltas.size, dim), dtype=int)
    prev = None
    for t, d in enumerate(deltas):
        params = SpinFieldParams(omega0=(j + d) * modes.omega_f)
        op = assemble_jcm_shell(basis, table, modes, params, exact_ratios=exact_ratios)
        vals, vecs = eigensystem(op)
        levels[t] = vals
        vectors[t] = vecs
        if prev is None:
            tracks[t] = np.arange(dim)
        else:
            overlap = np.abs(prev.conj().T @ vecs) ** 2
            rows, cols = linear_sum_assignment(-overlap)
            perm = np.empty(dim, dtype=int)
            perm[rows] = cols  # previous level index -> current level index
            tracks[t] = perm[tracks[t - 1]]
        prev = vecs
    return DetuningScan(deltas, levels, tracks, vectors, basis, j)


def _refine_minimum(x: np.ndarray, y_sq: np.ndarray):
    """Vertex of the parabola through the three points around argmin(y_sq)."""
    i = int(np.argmin(y_sq))
    if i == 0 or i == len(x) - 1:
        return float(x[i]), float(math.sqrt(max(y_sq[i], 0.0)))
    a, b, c = np.polyfit(x[i - 1 : i + 2], y_sq[i - 1 : i + 2], 2)
    if a <= 0:
        return float(x[i]), float(math.sqrt(max(y_sq[i], 0.0)))
    xv = float(np.clip(-b / (2 * a), x[i - 1], x[i + 1]))
    yv = max(a * xv * xv + b * xv + c, 0.0)
    return xv, float(math.sqrt(yv))


def avoided_crossing(scan: DetuningScan, q: int, half_width: float = 0.5) -> CrossingReport:
    """Gap and position of the avoided crossing at resonance q.

    Follows the two branches adiabatically connected to |N0, down> and
    |N0 - (j + q), up>, anchored at the edge of the window |Delta_0 - q| <=
    half_width where they are nearly bare.  The scan must cover the window.
    """
    deltas = scan.delta_values
    if deltas.min() > q - half_width + 1e-12 or deltas.max() < q + half_width - 1e-12:
        raise WindowError(
            f"scan range [{deltas.min()}, {deltas.max()}] does not cover "
            f"resonance {q} with half-width {half_width}"
        )
    in_window = np.where(np.abs(deltas - q) <= half_width)[0]
    anchor = int(in_window[0])
    basis = scan.basis
    n0 = basis.seed_N
    down = ShellSpinState(n0, SPIN_DOWN)
    up = ShellSpinState(n0 - (scan.resonant_j + q), SPIN_UP)
    if up not in basis.index:
        raise WindowError(f"state {up} absent from the scan basis; deepen the basis")
    branches = []
    for target in (down, up):
        weights = np.abs(scan.vectors[anchor][basis.index[target], :]) ** 2
        level = int(np.argmax(weights))
        if weights[level] < OVERLAP_THRESHOLD:
            raise AmbiguousBranchError(
                f"bare-state overlap {weights[level]:.3f} below {OVERLAP_THRESHOLD} "
                f"for {target} at Delta_0 = {deltas[anchor]:.3f}"
            )
        branches.append(int(np.where(scan.tracks[anchor] == level)[0][0]))
    ea = scan.branch_energy(branches[0])[in_window]
    eb = scan.branch_energy(branches[1])[in_window]
    gap_sq = (ea - eb) ** 2
    position, gap = _refine_minimum(deltas[in_window], gap_sq)
    return CrossingReport(q=q, gap=gap, position=position, shift=position - q)


@dataclass(frozen=True)
class DoubletRecord:
    N: int
    offset_from_seed: int
    splitting: float
    center_offset: float  # doublet midpoint minus the bare rung energy


@dataclass(frozen=True)
class PathologyReport:
    """Dressed-energy symptoms of the degenerate Fock basis versus the shell basis.

    Each exactly degenerate Fock pair (equal shell index and spin) is matched
    to dressed levels by maximal-overlap assignment; a nonzero energy spread
    within a pair is the pathology.  The shell ladder's doublet table gives
    the correct picture for comparison.
    """

    degenerate_groups: tuple  # ((shell_index, spin), state indices, spread)
    max_fock_spread: float
    doublets: tuple  # DoubletRecord, ordered by rung
    depth: int
    rabi_scale: float  # 2 g alpha of the middle mode

    def central_doublets(self) -> list[DoubletRecord]:
        return [d for d in self.doublets if abs(d.offset_from_seed) <= self.depth - 2]

    def central_reflection_asymmetry(self) -> float:
        """Max |center_offset(+m) + center_offset(-m)| over central rungs.

        Measures the symmetry of the doublet levels about the bare ladder;
        exact doublets about symmetric rungs give zero.
        """
        by_m = {d.offset_from_seed: d for d in self.central_doublets()}
        worst = 0.0
        for m, d in by_m.items():
            if -m in by_m:
                worst = max(worst, abs(d.center_offset + by_m[-m].center_offset))
        return worst

    def csv_rows(self):
        rows = [("fock_pair", int(k[0]), int(k[1]), len(idx), float(s), "") for k, idx, s in self.degenerate_groups]
        rows += [
            ("shell_doublet", d.N, d.offset_from_seed, d.splitting, d.center_offset, "")
            for d in self.doublets
        ]
        return rows


def _middle_harmonic(modes: ModeSet) -> int:
    ks = modes.harmonics
    if len(ks) != 3 or ks[1] != ks[0] + 1 or ks[2] != ks[1] + 1:
        raise ValueError(f"expected three consecutive harmonics (j-1, j, j+1), got {ks}")
    return ks[1]


def degenerate_basis_pathology(
    modes: ModeSet,
    seed,
    depth: int,
    epsilon: float = 1e-12,
    support_c: float = 8.0,
) -> PathologyReport:
    """Demonstrate the broken degeneracies of the connected Fock basis.

    Takes three consecutive harmonics with the spin resonant on the middle
    one, diagonalizes the depth-truncated connected Fock basis, and reports
    the dressed-energy spread of every exactly degenerate bare pair.  The
    same problem is then solved on the shell ladder (unit ladder ratios,
    couplings g_k alpha_k), where the levels form clean doublets.
    """
    j = _middle_harmonic(modes)
    params = SpinFieldParams(omega0=j * modes.omega_f)

    fbasis = fock_basis_connected(modes, seed, depth)
    fop = assemble_jcm_fock(fbasis, modes, params)
    fvals, fvecs = eigensystem(fop)
    # injective bare -> dressed matching by maximal overlap
    cost = -np.abs(fvecs) ** 2
    rows, cols = linear_sum_assignment(cost)
    assigned = np.empty(len(fbasis), dtype=int)
    assigned[rows] = cols
    groups: dict = {}
    for i, st in enumerate(fbasis.states):
        groups.setdefault((shell_index(st.occupations, modes), st.spin), []).append(i)
    degenerate = []
    for key, idx in sorted(groups.items()):
        if len(idx) < 2:
            continue
        energies = fvals[assigned[idx]]
        degenerate.append((key, tuple(idx), float(energies.max() - energies.min())))
    max_spread = max((s for _, _, s in degenerate), default=0.0)

    table = gamma_table(modes, epsilon, support_c=support_c)
    n0 = shell_index(seed.occupations, modes)
    sbasis = shell_basis(table, n0, depth, resonant_k=j)
    sop = assemble_jcm_shell(sbasis, table, modes, params, exact_ratios=False)
    svals, svecs = eigensystem(sop)
    doublets = []
    for st in sbasis.states:
        if st.spin != SPIN_DOWN:
            continue
        partner = ShellSpinState(st.N - j, SPIN_UP)
        if partner not in sbasis.index:
            continue
        wd = np.abs(svecs[sbasis.index[st], :]) ** 2
        wu = np.abs(svecs[sbasis.index[partner], :]) ** 2
        order = np.argsort(-(wd + wu), kind="stable")
        pair = np.sort(svals[order[:2]])
        bare = (st.N - 0.5 * j) * modes.omega_f
        doublets.append(
            DoubletRecord(
                N=st.N,
                offset_from_seed=st.N - n0,
                splitting=float(pair[1] - pair[0]),
                center_offset=float(0.5 * (pair[0] + pair[1]) - bare),
            )
        )
    doublets.sort(key=lambda d: d.N)
    mid = modes.modes[1]
    return PathologyReport(
        degenerate_groups=tuple(degenerate),
        max_fock_spread=max_spread,
        doublets=tuple(doublets),
        depth=depth,
        rabi_scale=2.0 * mid.g * abs(mid.alpha),
    )
