"""Lanczos approximation of exp(-i H t) v for sparse Hermitian H.

Subspace dimension adapts until the standard residual estimate drops below
the requested local tolerance; steps that fail to converge at the maximum
subspace size are bisected.  Full reorthogonalization is used, which is
cheap at the subspace sizes involved and keeps the projected problem
numerically Hermitian, so norms are preserved to the projection error.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigh_tridiagonal


class PropagatorError(RuntimeError):
    pass


def _lanczos_expm(matvec, v, dt, tol, m_max):
    """One step: returns (result, converged, err_estimate)."""
    beta0 = np.linalg.norm(v)
    if beta0 == 0.0:
        return v.copy(), True, 0.0
    V = [v / beta0]
    alphas: list[float] = []
    betas: list[float] = []
    y = None
    for m in range(1, m_max + 1):
        w = matvec(V[-1])
        a = float(np.real(np.vdot(V[-1], w)))
        w = w - a * V[-1]
        if len(V) > 1:
            w = w - betas[-1] * V[-2]
        for u in V:  # full reorthogonalization
            w = w - np.vdot(u, w) * u
        b = float(np.linalg.norm(w))
        alphas.append(a)
        evals, evecs = eigh_tridiagonal(alphas, betas)
        phases = np.exp(-1j * dt * evals)
        y = evecs @ (phases * evecs[0, :].conj())  # e^{-i dt T} e_1
        err = beta0 * abs(b * y[-1])
        if b < 1e-14 * max(abs(a), 1.0) or err < tol:
            basis = np.stack(V, axis=1)
            return beta0 * (basis @ y), True, err
        betas.append(b)
        V.append(w / b)
    basis = np.stack(V[:-1], axis=1)
    return beta0 * (basis @ y), False, err


def expm_multiply(matvec, v, t, tol=1e-12, m_max=48, max_bisections=30):
    """exp(-i A t) v for Hermitian A given through its matvec."""
    if t == 0.0:
        return v.copy()
    remaining = float(t)
    dt = remaining
    psi = v
    guard = 0
    while remaining != 0.0:
        step = dt if abs(dt) <= abs(remaining) else remaining
        out, ok, _err = _lanczos_expm(matvec, psi, step, tol * abs(step) / abs(t), m_max)
        if ok:
            psi = out
            remaining -= step
            if remaining == 0.0:
                break
        else:
            dt = step / 2.0
            guard += 1
            if guard > max_bisections:
                raise PropagatorError(
                    f"Krylov step failed to reach tolerance {tol} after "
                    f"{max_bisections} bisections (dt = {dt})"
                )
    return psi
