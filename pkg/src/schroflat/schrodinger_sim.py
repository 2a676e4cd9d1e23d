"""Crank-Nicolson verification solver for i theta_t + theta_xx = 0.

The implicit trapezoidal step is unconditionally stable and exactly
norm-preserving for the skew-Hermitian semidiscretization with homogeneous
Dirichlet data, which makes terminal-norm measurements meaningful: any
residual L2 mass at t=T is attributable to the control, the truncation, or
the grid, not to numerical dissipation.

Boundary data enter through the right-hand side at both time levels of the
step.  The interior tridiagonal system has constant coefficients, so the
Thomas elimination coefficients are computed once; the time loop is a
numba kernel with a scipy banded-solve fallback.
"""
from dataclasses import dataclass

import numpy as np

from ._backend import HAS_NUMBA, njit


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    Nx: int
    Nt: int
    T: float
    snapshot_count: int = 9

    def __post_init__(self):
        if self.Nx < 16 or self.Nt < 16:
            raise ValueError("need Nx >= 16 and Nt >= 16")
        if self.T <= 0:
            raise ValueError("final time must be positive")
        if self.snapshot_count < 2:
            raise ValueError("need at least initial and terminal snapshots")

    @property
    def dx(self):
        return 1.0 / self.Nx

    @property
    def dt(self):
        return self.T / self.Nt

    def times(self):
        return np.linspace(0.0, self.T, self.Nt + 1)

    def snapshot_indices(self):
        idx = np.round(np.linspace(0, self.Nt, self.snapshot_count)).astype(np.int64)
        return np.unique(idx)


@dataclass(eq=False)
class FieldSnapshot:
    t: float
    grid: np.ndarray
    values: np.ndarray
    l2_norm: float


def grid_l2_norm(values, dx):
    w = np.abs(values) ** 2
    return float(np.sqrt(dx * (np.sum(w) - 0.5 * w[0] - 0.5 * w[-1])))


@njit(cache=True)
def _march_thomas(theta, ub, lam, snap_idx):
    half = 0.5j * lam
    n = theta.size - 2
    off = -half
    diag = 1.0 + 1j * lam
    cp = np.empty(n, dtype=np.complex128)
    denom = np.empty(n, dtype=np.complex128)
    denom[0] = diag
    cp[0] = off / diag
    for j in range(1, n):
        denom[j] = diag - off * cp[j - 1]
        cp[j] = off / denom[j]
    out = np.empty((snap_idx.size, theta.size), dtype=np.complex128)
    ptr = 0
    if snap_idx[ptr] == 0:
        out[ptr] = theta
        ptr += 1
    theta = theta.copy()
    theta[-1] = ub[0]
    rhs = np.empty(n, dtype=np.complex128)
    d = np.empty(n, dtype=np.complex128)
    for step in range(ub.size - 1):
        for j in range(1, n + 1):
            rhs[j - 1] = theta[j] + half * (theta[j - 1] - 2.0 * theta[j] + theta[j + 1])
        rhs[n - 1] += half * ub[step + 1]
        d[0] = rhs[0] / denom[0]
        for j in range(1, n):
            d[j] = (rhs[j] - off * d[j - 1]) / denom[j]
        theta[n] = d[n - 1]
        for j in range(n - 2, -1, -1):
            d[j] = d[j] - cp[j] * d[j + 1]
            theta[j + 1] = d[j]
        theta[-1] = ub[step + 1]
        theta[0] = 0.0
        if ptr < snap_idx.size and snap_idx[ptr] == step + 1:
            out[ptr] = theta
            ptr += 1
    return out


def _march_banded(theta, ub, lam, snap_idx):
    from scipy.linalg import solve_banded

    half = 0.5j * lam
    n = theta.size - 2
    ab = np.zeros((3, n), dtype=np.complex128)
    ab[0, 1:] = -half
    ab[1, :] = 1.0 + 1j * lam
    ab[2, :-1] = -half
    out = np.empty((snap_idx.size, theta.size), dtype=np.complex128)
    ptr = 0
    if snap_idx[ptr] == 0:
        out[ptr] = theta
        ptr += 1
    theta = theta.copy()
    theta[-1] = ub[0]
    for step in range(ub.size - 1):
        rhs = theta[1:-1] + half * (theta[:-2] - 2.0 * theta[1:-1] + theta[2:])
        rhs[-1] += half * ub[step + 1]
        theta[1:-1] = solve_banded((1, 1), ab, rhs)
        theta[-1] = ub[step + 1]
        theta[0] = 0.0
        if ptr < snap_idx.size and snap_idx[ptr] == step + 1:
            out[ptr] = theta
            ptr += 1
    return out


def simulate(theta0, control, cfg: SimConfig):
    """Advance the controlled equation; returns snapshots, first at t=0,
    last at t=T.

    theta0 is any callable sampled on the grid; control is a ControlTrace
    (linearly interpolated onto the time grid) or None for u = 0.
    """
    x = np.linspace(0.0, 1.0, cfg.Nx + 1)
    theta = np.asarray(theta0(x), dtype=np.complex128)
    if theta.shape != x.shape:
        raise ValueError("initial profile must evaluate elementwise on the grid")
    times = cfg.times()
    if control is None:
        ub = np.zeros(times.size, dtype=np.complex128)
    else:
        ub = control.interpolate(times)
    lam = cfg.dt / cfg.dx ** 2
    if abs(1.0 + 1j * lam) == 0.0:
        raise SimulationError("degenerate tridiagonal diagonal")
    snap_idx = cfg.snapshot_indices()
    march = _march_thomas if HAS_NUMBA else _march_banded
    frames = march(theta, ub, lam, snap_idx)
    snapshots = []
    for row, idx in zip(frames, snap_idx):
        snapshots.append(FieldSnapshot(
            t=float(times[idx]), grid=x, values=row,
            l2_norm=grid_l2_norm(row, cfg.dx)))
    return snapshots


def terminal_report(snapshots):
    if not snapshots:
        raise ValueError("no snapshots to report on")
    initial = snapshots[0].l2_norm
    terminal = snapshots[-1].l2_norm
    relative = terminal / initial if initial > 0 else 0.0
    history = [(s.t, s.l2_norm) for s in snapshots]
    return {
        "initial_l2": initial,
        "terminal_l2": terminal,
        "relative": relative,
        "history": history,
    }
