"""Time evolution, population inversion, and the shell-versus-Fock comparison.

States are propagated under exp(-i H t), by dense eigendecomposition below a
dimension threshold and by the adaptive Lanczos propagator above it.  The
L2 measure g0 * integral_0^{1/g0} |f - g|^2 dt quantifies the discrepancy
between inversion traces computed in the two bases; scanning it over field
parameters maps out where the separable shell description holds (small L2)
and where inter-mode entanglement invalidates it (large L2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import krylov
from .bases import SPIN_UP, Basis, fock_basis_cutoff, shell_window_basis
from .hamiltonian import HermitianOperator, SpinFieldParams, assemble_rabi
from .shell import ModeSet, mode_set, gamma_table

DENSE_PROPAGATION_LIMIT = 2048
NORM_TOL = 1e-8


class TruncationError(ValueError):
    pass


class StepSizeError(RuntimeError):
    pass


class InitialState(NamedTuple):
    vector: np.ndarray
    deficit: float  # probability lost to truncation before renormalizing


def initial_state(basis: Basis, modes: ModeSet, table=None, spin: int = SPIN_UP) -> InitialState:
    """Coherent product state with definite spin, renormalized on the basis.

    Fock basis: amplitudes prod_k e^{-|a_k|^2/2} a_k^{n_k}/sqrt(n_k!).
    Shell basis: amplitude gamma_N on every supported shell.  A truncation
    deficit above 1e-6 raises TruncationError.
    """
    psi = np.zeros(len(basis), dtype=complex)
    if basis.kind == "fock":
        log_norm = -0.5 * sum(m.nbar for m in modes.modes)
        for i, st in enumerate(basis.states):
            if st.spin != spin:
                continue
            amp = math.exp(log_norm)
            for m, n in zip(modes.modes, st.occupations):
                amp = amp * m.alpha**n / math.sqrt(math.factorial(n))
            psi[i] = amp
    elif basis.kind == "shell":
        if table is None:
            raise ValueError("shell-basis initial state requires a GammaTable")
        for i, st in enumerate(basis.states):
            if st.spin == spin:
                psi[i] = table.gamma_at(st.N)
    else:
        raise ValueError(f"unknown basis kind {basis.kind!r}")
    captured = float(np.linalg.norm(psi) ** 2)
    deficit = 1.0 - captured
    if deficit > 1e-6:
        raise TruncationError(
            f"initial-state truncation deficit {deficit:.3e} exceeds 1e-6; widen the basis"
        )
    return InitialState(psi / math.sqrt(captured), deficit)


@dataclass(frozen=True)
class EvolutionTrace:
    """Population inversion and sanity observables along a time grid."""

    times: np.ndarray
    inversion: np.ndarray
    norm: np.ndarray
    energy: np.ndarray
    basis_kind: str

    def __post_init__(self):
        for arr in (self.times, self.inversion, self.norm, self.energy):
            arr.flags.writeable = False


def _observables(psi_cols: np.ndarray, up_mask: np.ndarray, H) -> tuple:
    pops = np.abs(psi_cols) ** 2
    p_up = pops[up_mask].sum(axis=0)
    p_dn = pops[~up_mask].sum(axis=0)
    norms = np.sqrt(p_up + p_dn)
    energy = np.real(np.sum(np.conj(psi_cols) * (H @ psi_cols), axis=0))
    return p_up - p_dn, norms, energy


def evolve(
    op: HermitianOperator,
    psi0: np.ndarray,
    t_grid,
    method: str = "auto",
    dense_limit: int = DENSE_PROPAGATION_LIMIT,
    krylov_tol: float = 1e-12,
) -> EvolutionTrace:
    """Propagate psi0 under exp(-i H t) and record inversion, norm, energy.

    method "dense" diagonalizes once and evaluates every grid point exactly;
    "krylov" steps between samples with the adaptive Lanczos propagator;
    "auto" picks dense below `dense_limit`.  Norm drift beyond 1e-8 raises
    StepSizeError with the achieved value.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be increasing and start at 0")
    if method == "auto":
        method = "dense" if op.dim <= dense_limit else "krylov"
    up_mask = np.array([s.spin == SPIN_UP for s in op.basis.states])
    H = op.to_csr()
    if method == "dense":
        Hd = op.to_dense(limit=max(dense_limit, op.dim))
        vals, vecs = np.linalg.eigh(Hd)
        c = vecs.conj().T @ psi0
        phases = np.exp(-1j * np.outer(vals, t))
        psi_cols = vecs @ (phases * c[:, None])
    elif method == "krylov":
        cols = [np.asarray(psi0, dtype=complex)]
        for i in range(1, t.size):
            dt = t[i] - t[i - 1]
            cols.append(krylov.expm_multiply(lambda v: H @ v, cols[-1], dt, tol=krylov_tol))
        psi_cols = np.stack(cols, axis=1)
    else:
        raise ValueError(f"unknown method {method!r}")
    inversion, norms, energy = _observables(psi_cols, up_mask, H)
    drift = float(np.abs(norms - 1.0).max())
    if drift > NORM_TOL:
        raise StepSizeError(f"norm drift {drift:.3e} exceeds {NORM_TOL}; achieved tolerance too loose")
    return EvolutionTrace(t, inversion, norms, energy, op.basis.kind)


def l2_discrepancy(f: EvolutionTrace, g: EvolutionTrace, g0: float) -> float:
    """g0 * integral_0^{1/g0} |f - g|^2 dt by trapezoidal quadrature.

    The traces must share a uniform grid that covers [0, 1/g0] with at
    least 1000 samples in the window.
    """
    if f.times.shape != g.times.shape or not np.array_equal(f.times, g.times):
        raise ValueError("traces do not share a time grid")
    horizon = 1.0 / g0
    sel = f.times <= horizon * (1.0 + 1e-12)
    if sel.sum() < 1000:
        raise ValueError("need at least 1000 samples on [0, 1/g0]")
    if f.times[sel].max() < horizon * (1.0 - 1e-9):
        raise ValueError("time grid does not cover [0, 1/g0]")
    diff = (f.inversion[sel] - g.inversion[sel]) ** 2
    return float(g0 * np.trapezoid(diff, f.times[sel]))


@dataclass(frozen=True)
class ComparisonPoint:
    """Shell-versus-Fock comparison at one field parameter set."""

    modes: ModeSet
    g0: float
    fock_trace: EvolutionTrace
    shell_trace: EvolutionTrace
    l2: float
    fock_dim: int
    shell_dim: int


def fock_caps(alpha_sq: float) -> int:
    """Per-mode cutoff ceil(|alpha|^2 + 8|alpha| + 10), eight Poisson sigmas."""
    return math.ceil(alpha_sq + 8.0 * math.sqrt(alpha_sq) + 10.0)


def compare_bases(
    omega_low: int,
    alpha_sq: float,
    g_ratio: float,
    n_modes: int = 2,
    epsilon: float = 1e-12,
    support_c: float = 8.0,
    t_samples: int = 2048,
    horizon_factor: float = 1.0,
    dense_limit: int = DENSE_PROPAGATION_LIMIT,
) -> ComparisonPoint:
    """Evolve the multimode Rabi model in both bases and measure their L2 gap.

    Modes sit at omega_low, omega_low + 1, ... (unit spacing); the spin is
    resonant with the lowest mode; g0 = g_ratio * mean mode frequency; the
    initial state is the coherent product with equal amplitudes and spin up.
    The grid is `t_samples` uniform points on [0, horizon_factor/g0].
    """
    if int(omega_low) != omega_low or omega_low < 1:
        raise ValueError("omega_low must be a positive integer in units of omega_f")
    ks = [int(omega_low) + i for i in range(n_modes)]
    alpha = math.sqrt(alpha_sq)
    modes = mode_set(ks, [alpha] * n_modes)
    omega_bar = (ks[0] + ks[-1]) / 2.0
    g0 = g_ratio * omega_bar
    params = SpinFieldParams(omega0=float(ks[0]), rwa=False)

    caps = [fock_caps(alpha_sq)] * n_modes
    fbasis = fock_basis_cutoff(modes, caps)
    fop = assemble_rabi(fbasis, modes, params, g0)
    fpsi = initial_state(fbasis, modes)

    table = gamma_table(modes, epsilon, support_c=support_c)
    sbasis = shell_window_basis(table)
    sop = assemble_rabi(sbasis, modes, params, g0, table=table)
    spsi = initial_state(sbasis, modes, table=table)

    t_grid = np.linspace(0.0, horizon_factor / g0, t_samples)
    ftrace = evolve(fop, fpsi.vector, t_grid, dense_limit=dense_limit)
    strace = evolve(sop, spsi.vector, t_grid, dense_limit=dense_limit)
    if horizon_factor == 1.0:
        l2 = l2_discrepancy(ftrace, strace, g0)
    else:
        # same measure restricted to the shorter window
        l2 = float(g0 * np.trapezoid((ftrace.inversion - strace.inversion) ** 2, t_grid))
    return ComparisonPoint(modes, g0, ftrace, strace, l2, len(fbasis), len(sbasis))


@dataclass(frozen=True)
class RegionScan:
    """Grid of L2 discrepancies over two field-parameter axes."""

    x_name: str
    y_name: str
    x_values: np.ndarray
    y_values: np.ndarray
    l2: np.ndarray  # shape (len(y), len(x)); NaN where a point failed
    valid: np.ndarray
    contour_level: float = 1e-3

    def csv_rows(self):
        rows = []
        for iy, y in enumerate(self.y_values):
            for ix, x in enumerate(self.x_values):
                rows.append((float(x), float(y), float(self.l2[iy, ix]), int(self.valid[iy, ix])))
        return rows

    def contour_segments(self):
        """Marching-squares segments of log10(l2) at the contour level."""
        return _contour_segments(self.x_values, self.y_values, self.l2, self.contour_level)


_AXES = ("alpha_sq", "omega_low", "g_ratio")


def region_scan(
    x_name: str,
    x_values,
    y_name: str,
    y_values,
    fixed: dict,
    contour_level: float = 1e-3,
    progress: Callable | None = None,
    threads: int = 1,
    **point_kwargs,
) -> RegionScan:
    """L2 between shell and Fock inversions over a 2-D parameter grid.

    Axis names come from {alpha_sq, omega_low, g_ratio}; `fixed` supplies the
    remaining one.  Failed points (truncation, dimension limits) are marked
    invalid rather than aborting the scan.
    """
    if x_name not in _AXES or y_name not in _AXES or x_name == y_name:
        raise ValueError(f"axes must be two distinct of {_AXES}")
    missing = [a for a in _AXES if a not in (x_name, y_name)]
    if missing[0] not in fixed:
        raise ValueError(f"fixed parameters must supply {missing[0]}")
    xs = np.asarray(x_values, dtype=float)
    ys = np.asarray(y_values, dtype=float)
    l2 = np.full((ys.size, xs.size), np.nan)
    valid = np.zeros((ys.size, xs.size), dtype=bool)

    def run_point(iy, ix):
        kw = dict(fixed)
        kw[x_name] = xs[ix]
        kw[y_name] = ys[iy]
        kw["omega_low"] = int(round(kw["omega_low"]))
        return compare_bases(
            kw["omega_low"], kw["alpha_sq"], kw["g_ratio"], **point_kwargs
        ).l2

    points = [(iy, ix) for iy in range(ys.size) for ix in range(xs.size)]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda p: _safe_point(run_point, *p), points))
    else:
        results = [_safe_point(run_point, iy, ix) for iy, ix in points]
    for (iy, ix), value in zip(points, results):
        if value is not None:
            l2[iy, ix] = value
            valid[iy, ix] = True
        if progress is not None:
            progress(ix, iy, value)
    return RegionScan(x_name, y_name, xs, ys, l2, valid, contour_level)


def _safe_point(fn, iy, ix):
    try:
        return fn(iy, ix)
    except (ValueError, RuntimeError):
        return None


def _contour_segments(xs, ys, grid, level):
    """Linear marching squares on log10(grid) - log10(level)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.log10(grid) - math.log10(level)
    segs = []
    for iy in range(len(ys) - 1):
        for ix in range(len(xs) - 1):
            corners = [
                (xs[ix], ys[iy], f[iy, ix]),
                (xs[ix + 1], ys[iy], f[iy, ix + 1]),
                (xs[ix + 1], ys[iy + 1], f[iy + 1, ix + 1]),
                (xs[ix], ys[iy + 1], f[iy + 1, ix]),
            ]
            if any(not np.isfinite(c[2]) for c in corners):
                continue
            pts = []
            for a, b in ((0, 1), (1, 2), (2, 3), (3, 0)):
                fa, fb = corners[a][2], corners[b][2]
                if (fa < 0) == (fb < 0):
                    continue
                t = fa / (fa - fb)
                pts.append(
                    (
                        corners[a][0] + t * (corners[b][0] - corners[a][0]),
                        corners[a][1] + t * (corners[b][1] - corners[a][1]),
                    )
                )
            if len(pts) == 2:
                segs.append((pts[0], pts[1]))
    return segs
