"""Phase 2: flat output on [tau,T] and the boundary-control series.

The flat output multiplies the analytic continuation of the seed data,
ybar(t) = sum y_k (t-tau)^k / k!, by a Gevrey step in the rescaled time
sigma = (t-tau)/(T-tau).  The step factor is exactly 1 (all derivatives
zero) at tau and exactly 0 at T, so the product matches the seed jets at
tau and vanishes identically at T.  Control and state come from the same
truncated series

    u(t)       = sum_k (-i)^k y^(k)(t) / (2k+1)!
    theta(t,x) = sum_k (-i)^k y^(k)(t) x^(2k+1) / (2k+1)!

evaluated through one shared term computation, so the state at x=1
reproduces the control bit for bit.

Derivatives are carried unnormalized (y^(0), y^(1), ...) and combined with
an explicit Leibniz rule.  At the endpoints the step factor's derivative
vector is exactly (1,0,...) or (0,0,...), and multiplying by exact ones
and zeros keeps the endpoint identities y^(k)(tau)=y_k and y^(k)(T)=0
bit-exact; a normalized-coefficient representation would lose that to the
y/k!*k! round trip.
"""
import math
from dataclasses import dataclass

import numpy as np

from .gevrey import MAX_JET_ORDER, ComplexJet, step_jet
from .smoothing import PHASE_FLATNESS, ControlTrace, FlatSeed

DEFAULT_SERIES_TRUNCATION = 15
# headroom above the series truncation for u' and residual checks
JET_ORDER_MARGIN = 6

_MIPOW = (1.0 + 0.0j, -1.0j, -1.0 + 0.0j, 1.0j)


@dataclass(eq=False)
class FlatOutput:
    seed: FlatSeed
    T: float
    s: float
    jet_order: int = DEFAULT_SERIES_TRUNCATION + JET_ORDER_MARGIN

    def __post_init__(self):
        tau = self.seed.tau
        if not tau < self.T:
            raise ValueError("need tau < T")
        if not tau > 2.0 * self.T / 3.0:
            raise ValueError(
                f"tau={tau} must exceed 2T/3={2 * self.T / 3:.6g} for the "
                "analytic part to converge on [tau,T]")
        if not 1.0 < self.s < 2.0:
            raise ValueError("Gevrey order s must lie in (1,2)")
        if not 1 <= self.jet_order <= MAX_JET_ORDER:
            raise ValueError(f"jet order must lie in [1, {MAX_JET_ORDER}]")

    @property
    def tau(self):
        return self.seed.tau

    def _check_time(self, t):
        if not self.tau <= t <= self.T:
            raise ValueError(f"t={t} outside [tau, T] = [{self.tau}, {self.T}]")


def _analytic_derivatives(fo: FlatOutput, t: float) -> np.ndarray:
    """ybar^(m)(t) = sum_{j>=m} y_j (t-tau)^(j-m)/(j-m)!, m = 0..jet_order."""
    dt = t - fo.tau
    K = fo.seed.K
    out = np.zeros(fo.jet_order + 1, dtype=np.complex128)
    for m in range(min(fo.jet_order, K) + 1):
        acc = 0.0 + 0.0j
        for j in range(K, m, -1):
            acc += fo.seed.y[j] * dt ** (j - m) / math.factorial(j - m)
        out[m] = acc + fo.seed.y[m]
    return out


def _step_derivatives(fo: FlatOutput, t: float) -> np.ndarray:
    """Derivatives in t of phi_s((t-tau)/(T-tau)) up to the jet order."""
    delta = fo.T - fo.tau
    sigma = (t - fo.tau) / delta
    phi = step_jet(sigma, fo.s, fo.jet_order)
    orders = np.arange(fo.jet_order + 1)
    facts = np.array([math.factorial(j) for j in orders], dtype=np.float64)
    return phi.coeffs * facts * (1.0 / delta) ** orders


def flat_output_derivatives(fo: FlatOutput, t: float) -> np.ndarray:
    """y^(m)(t) for m = 0..jet_order via the Leibniz rule.

    This is the canonical representation; both series below consume it.
    """
    fo._check_time(t)
    ybar = _analytic_derivatives(fo, t)
    phi = _step_derivatives(fo, t)
    n = fo.jet_order
    out = np.zeros(n + 1, dtype=np.complex128)
    for m in range(n + 1):
        acc = 0.0 + 0.0j
        for k in range(m + 1):
            acc += float(math.comb(m, k)) * phi[k] * ybar[m - k]
        out[m] = acc
    return out


def analytic_part_jet(fo: FlatOutput, t: float) -> ComplexJet:
    """Normalized-coefficient view of ybar at t."""
    fo._check_time(t)
    derivs = _analytic_derivatives(fo, t)
    facts = np.array([math.factorial(j) for j in range(derivs.size)])
    return ComplexJet(t, derivs / facts)


def flat_output_jet(fo: FlatOutput, t: float) -> ComplexJet:
    """Normalized-coefficient view of the flat output at t."""
    derivs = flat_output_derivatives(fo, t)
    facts = np.array([math.factorial(j) for j in range(derivs.size)])
    return ComplexJet(t, derivs / facts)


def _series_terms(fo: FlatOutput, t: float, truncation: int):
    """Per-order contributions to u and u' plus the tail magnitude."""
    if truncation < 0:
        raise ValueError("series truncation must be nonnegative")
    if fo.jet_order < truncation + 1:
        raise ValueError(
            f"jet order {fo.jet_order} too small for truncation {truncation}")
    derivs = flat_output_derivatives(fo, t)
    terms = np.zeros(truncation + 1, dtype=np.complex128)
    dterms = np.zeros(truncation + 1, dtype=np.complex128)
    for k in range(truncation + 1):
        fact = math.factorial(2 * k + 1)
        terms[k] = _MIPOW[k % 4] * derivs[k] / fact
        dterms[k] = _MIPOW[k % 4] * derivs[k + 1] / fact
    return terms, dterms, float(abs(terms[truncation]))


def control_series(fo: FlatOutput, t: float, truncation: int = DEFAULT_SERIES_TRUNCATION):
    """Boundary control u(t), its time derivative, and the tail indicator.

    Returns (u, du, tail) where tail is the magnitude of the last retained
    series term, the natural resolution limit of the truncation.
    """
    terms, dterms, tail = _series_terms(fo, t, truncation)
    return complex(np.sum(terms)), complex(np.sum(dterms)), tail


def state_series(fo: FlatOutput, t: float, x,
                 truncation: int = DEFAULT_SERIES_TRUNCATION):
    """Interior state theta(t,x); identical to the control at x=1."""
    terms, _, _ = _series_terms(fo, t, truncation)
    xa = np.asarray(x, dtype=np.float64)
    powers = xa[..., None] ** (2 * np.arange(truncation + 1) + 1)
    value = np.sum(terms * powers, axis=-1)
    return complex(value) if np.ndim(x) == 0 else value


def control_trace(fo: FlatOutput, t_grid,
                  truncation: int = DEFAULT_SERIES_TRUNCATION) -> ControlTrace:
    """Sample the phase-2 control on a time grid."""
    t_grid = np.asarray(t_grid, dtype=np.float64)
    u = np.zeros(t_grid.size, dtype=np.complex128)
    du = np.zeros(t_grid.size, dtype=np.complex128)
    err = np.zeros(t_grid.size)
    for i, t in enumerate(t_grid):
        u[i], du[i], err[i] = control_series(fo, t, truncation)
    phase = np.full(t_grid.size, PHASE_FLATNESS, dtype=np.uint8)
    return ControlTrace(t_grid, u, du, phase, err)
