"""Adaptive Gauss-Kronrod quadrature for complex integrands on [0,1].

Panels are processed in batches: every pending panel is evaluated in one
vectorized call per refinement generation, which keeps the Python overhead
away from the innermost kernel evaluations.  Declared breakpoints seed the
initial panel edges, so no panel ever straddles a discontinuity of the
integrand.  Summation order is fixed (panels sorted by left edge), making
results bit-reproducible for a given problem.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# 15-point Kronrod extension of 7-point Gauss (positive half, descending).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full symmetric node/weight vectors on [-1,1]
NODES15 = np.concatenate([-_XGK[:-1], _XGK[::-1]])
WEIGHTS15 = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
WEIGHTS7 = np.concatenate([_WG[:-1], _WG[::-1]])


class QuadratureError(RuntimeError):
    """Subdivision budget exhausted; carries the best value obtained."""

    def __init__(self, message, value, err_estimate):
        super().__init__(message)
        self.value = value
        self.err_estimate = err_estimate


@dataclass(frozen=True)
class IntegrationProblem:
    integrand: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple = ()
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2 ** 14

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        if any(not (0.0 < b < 1.0) for b in bps):
            raise ValueError("breakpoints must lie strictly inside (0,1)")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        object.__setattr__(self, "breakpoints", bps)


def _panel_sums(f, lo, hi):
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    xs = mid[:, None] + half[:, None] * NODES15[None, :]
    fv = np.asarray(f(xs.ravel()), dtype=np.complex128).reshape(xs.shape)
    kron = half * (fv @ WEIGHTS15)
    gauss = half * (fv[:, GAUSS_IDX] @ WEIGHTS7)
    diff = kron - gauss
    err = np.abs(diff.real) + np.abs(diff.imag)
    scale = half * (np.abs(fv) @ WEIGHTS15)
    return kron, err, scale


# A panel whose error estimate is at the rounding floor of its own L1 mass
# cannot improve under bisection; integrands with large oscillatory
# cancellation (kernel derivatives at small t) would otherwise exhaust the
# budget chasing unreachable tolerances.
_FLOOR_FACTOR = 100.0 * np.finfo(np.float64).eps


def integrate(problem: IntegrationProblem):
    """Integral of problem.integrand over [0,1] -> (value, err_estimate)."""
    edges = np.array([0.0, *problem.breakpoints, 1.0])
    lo, hi = edges[:-1].copy(), edges[1:].copy()
    acc_lo = []
    acc_val = []
    acc_err = []
    used = 0
    prev_errsum = math.inf
    stalled = 0

    while lo.size:
        used += lo.size
        if used > problem.max_subdivisions:
            kron, err, _ = _panel_sums(problem.integrand, lo, hi)
            order = np.argsort(np.concatenate([np.array(acc_lo), lo]), kind="stable")
            vals = np.concatenate([np.array(acc_val, dtype=np.complex128), kron])
            errs = np.concatenate([np.array(acc_err), err])
            best = complex(vals[order].sum())
            best_err = float(errs[order].sum())
            raise QuadratureError(
                f"no convergence within {problem.max_subdivisions} panel evaluations",
                best, best_err)
        kron, err, scale = _panel_sums(problem.integrand, lo, hi)

        total = kron.sum() + (np.sum(acc_val) if acc_val else 0.0)
        tol = max(problem.abs_tol, problem.rel_tol * abs(total))
        ok = (err <= tol * (hi - lo)) | (err <= _FLOOR_FACTOR * scale)
        errsum = err.sum() + (np.sum(acc_err) if acc_err else 0.0)
        # the width-proportional budget is only a splitting heuristic; once
        # the summed estimate meets the target there is nothing left to chase
        if errsum <= tol:
            ok = np.ones_like(ok)
        # two generations without material improvement mean the estimate sits
        # on the integrand's own noise floor; a genuine unresolved feature
        # keeps halving the sum.  Return the best value with an honest err.
        # Guard: only panels already in the asymptotic regime count, else an
        # unresolved oscillation (err comparable to the panel L1 mass) would
        # stall too and a confidently wrong value would be accepted.
        resolved = err.sum() <= 1e-6 * scale.sum()
        stalled = stalled + 1 if (resolved and errsum > 0.7 * prev_errsum) else 0
        if stalled >= 2:
            ok = np.ones_like(ok)
        prev_errsum = errsum

        acc_lo.extend(lo[ok].tolist())
        acc_val.extend(kron[ok].tolist())
        acc_err.extend(err[ok].tolist())

        bad_lo, bad_hi = lo[~ok], hi[~ok]
        mid = 0.5 * (bad_lo + bad_hi)
        lo = np.concatenate([bad_lo, mid])
        hi = np.concatenate([mid, bad_hi])

    order = np.argsort(np.array(acc_lo), kind="stable")
    vals = np.array(acc_val, dtype=np.complex128)[order]
    errs = np.array(acc_err)[order]
    return complex(vals.sum()), float(errs.sum())


def integrate_function(f, breakpoints=(), **kwargs):
    """Convenience wrapper building the problem inline."""
    return integrate(IntegrationProblem(f, tuple(breakpoints), **kwargs))
