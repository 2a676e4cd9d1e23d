"""Phase 1: free evolution of the odd extension and flat-output seeds.

Between t=0 and t=tau the boundary value is the trace at x=1 of the free
Schrodinger evolution of the odd extension of the initial profile,

    v(t,x) = integral of (E(t,x-y) - E(t,x+y)) v0(y) dy over the support,

which smooths arbitrary L2 data into an entire function of x.  At t=tau
the odd-power Taylor coefficients of v(tau,.) around x=0 seed the phase-2
flat output: y_k = i^k * integral of (-2) d^(2k+1)E(tau,y) v0(y) dy, using
the odd-in-y parity of odd-order x-derivatives at x=0.
"""
import math
from dataclasses import dataclass

import numpy as np

from .kernel import MAX_ORDER, kernel_derivative, odd_kernel
from .quadrature import IntegrationProblem, QuadratureError, integrate

# i^k and (-i)^k, indexed by k mod 4
_IPOW = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)
_MIPOW = (1.0 + 0.0j, -1.0j, -1.0 + 0.0j, 1.0j)

PHASE_SMOOTHING = 0
PHASE_FLATNESS = 1
PHASE_NAMES = {PHASE_SMOOTHING: "smoothing", PHASE_FLATNESS: "flatness"}


class SmoothingError(RuntimeError):
    pass


def _polyval_ascending(coeffs, x):
    out = np.zeros_like(x, dtype=np.complex128) + coeffs[-1]
    for c in coeffs[-2::-1]:
        out = out * x + c
    return out


class PiecewiseProfile:
    """Complex piecewise polynomial on [0,1].

    Coefficients are ascending-degree in the global variable x.  Values at
    interior breakpoints are the midpoint of the one-sided limits (the L2
    representative); the domain endpoints take one-sided limits and points
    outside [0,1] evaluate to zero.
    """

    def __init__(self, breakpoints, pieces):
        self.breakpoints = tuple(float(b) for b in breakpoints)
        if any(not (0.0 < b < 1.0) for b in self.breakpoints):
            raise ValueError("breakpoints must lie strictly inside (0,1)")
        if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len(pieces) != len(self.breakpoints) + 1:
            raise ValueError("need exactly one piece per subinterval")
        self.pieces = [np.atleast_1d(np.asarray(p, dtype=np.complex128)) for p in pieces]
        for p in self.pieces:
            if p.ndim != 1 or not np.all(np.isfinite(p)):
                raise ValueError("piece coefficients must be finite 1-d arrays")
        self.edges = np.array([0.0, *self.breakpoints, 1.0])

    @classmethod
    def zero(cls):
        return cls((), [[0.0]])

    @classmethod
    def constant(cls, value):
        return cls((), [[value]])

    @classmethod
    def from_callable(cls, f, n_pieces=16, degree=3):
        """Piecewise polynomial interpolant of a smooth callable.

        Each piece interpolates at degree+1 equispaced nodes including both
        piece edges, so the result is continuous and matches f exactly at
        0 and 1.
        """
        edges = np.linspace(0.0, 1.0, n_pieces + 1)
        pieces = []
        for a, b in zip(edges[:-1], edges[1:]):
            xs = np.linspace(a, b, degree + 1)
            ys = np.asarray(f(xs), dtype=np.complex128)
            cr = np.polynomial.polynomial.polyfit(xs, ys.real, degree)
            ci = np.polynomial.polynomial.polyfit(xs, ys.imag, degree)
            pieces.append(cr + 1j * ci)
        return cls(tuple(edges[1:-1]), pieces)

    def __call__(self, x):
        scalar = np.ndim(x) == 0
        xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = np.zeros(xa.shape, dtype=np.complex128)
        idx = np.searchsorted(self.edges, xa, side="right") - 1
        np.clip(idx, 0, len(self.pieces) - 1, out=idx)
        inside = (xa >= 0.0) & (xa <= 1.0)
        for i, coeffs in enumerate(self.pieces):
            mask = inside & (idx == i)
            if np.any(mask):
                out[mask] = _polyval_ascending(coeffs, xa[mask])
        for b in self.breakpoints:
            hit = inside & (xa == b)
            if np.any(hit):
                i = int(np.searchsorted(self.edges, b)) - 1
                left = _polyval_ascending(self.pieces[i], xa[hit])
                right = _polyval_ascending(self.pieces[i + 1], xa[hit])
                out[hit] = 0.5 * (left + right)
        return complex(out[0]) if scalar else out

    def l2_norm(self):
        """Exact L2 norm: |p|^2 integrates in closed form per piece."""
        total = 0.0
        for (a, b), c in zip(zip(self.edges[:-1], self.edges[1:]), self.pieces):
            q = np.convolve(c, np.conj(c))
            powers = np.arange(1, q.size + 1)
            anti = q / powers
            total += float(np.real(np.sum(anti * (b ** powers - a ** powers))))
        return math.sqrt(max(total, 0.0))


@dataclass(eq=False)
class ControlTrace:
    """Sampled boundary control with per-sample phase tag.

    err holds the quadrature error estimate in phase 1 and the magnitude of
    the last retained series term in phase 2.
    """

    t: np.ndarray
    u: np.ndarray
    du: np.ndarray
    phase: np.ndarray
    err: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.float64)
        self.u = np.asarray(self.u, dtype=np.complex128)
        self.du = np.asarray(self.du, dtype=np.complex128)
        self.phase = np.asarray(self.phase, dtype=np.uint8)
        self.err = np.asarray(self.err, dtype=np.float64)
        n = self.t.size
        if not all(a.shape == (n,) for a in (self.u, self.du, self.phase, self.err)):
            raise ValueError("trace arrays must share one length")
        if n > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("trace times must be strictly increasing")

    @classmethod
    def concat(cls, first, second):
        return cls(
            np.concatenate([first.t, second.t]),
            np.concatenate([first.u, second.u]),
            np.concatenate([first.du, second.du]),
            np.concatenate([first.phase, second.phase]),
            np.concatenate([first.err, second.err]),
        )

    def interpolate(self, times):
        re = np.interp(times, self.t, self.u.real)
        im = np.interp(times, self.t, self.u.imag)
        return re + 1j * im

    def interpolate_derivative(self, times):
        re = np.interp(times, self.t, self.du.real)
        im = np.interp(times, self.t, self.du.imag)
        return re + 1j * im


@dataclass(eq=False)
class FlatSeed:
    """Odd-power Taylor data of the smoothed state at (t,x)=(tau,0)."""

    tau: float
    K: int
    y: np.ndarray
    bound_constant: float

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.complex128)
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.y.shape != (self.K + 1,):
            raise ValueError("seed needs exactly K+1 coefficients")
        limits = np.array([self.bound_constant * (2.0 / self.tau) ** k * math.factorial(k)
                           for k in range(self.K + 1)])
        if np.any(np.abs(self.y) > limits * (1.0 + 1e-12)):
            raise ValueError("seed violates its own growth bound")

    def series_at(self, x):
        """Sum y_k (-i)^k x^(2k+1)/(2k+1)! -- the smoothed state at t=tau."""
        total = 0.0 + 0.0j
        for k in range(self.K, -1, -1):
            total += self.y[k] * _MIPOW[k % 4] * x ** (2 * k + 1) / math.factorial(2 * k + 1)
        return total


def convolution_integral(v0, t, x, m=0, support=1.0, breakpoints=(),
                         abs_tol=1e-10, rel_tol=1e-8, max_subdivisions=2 ** 14):
    """(value, err) of the odd-folded kernel convolution at (t,x).

    Integrates d^m_x (E(t,x-y) - E(t,x+y)) v0(y) over y in [0, support],
    rescaled to the unit interval so declared breakpoints become panel
    edges for the quadrature.
    """
    if t <= 0:
        raise ValueError("convolution requires t > 0")

    def integrand(sig):
        y = support * sig
        return odd_kernel(t, x, y, m) * v0(y)

    bps = tuple(b / support for b in breakpoints if 0.0 < b / support < 1.0)
    value, err = integrate(IntegrationProblem(integrand, bps,
                                              abs_tol=abs_tol, rel_tol=rel_tol,
                                              max_subdivisions=max_subdivisions))
    return support * value, support * err


def free_evolution(theta0, t, x):
    """Smoothed state v(t,x) for the odd extension of theta0."""
    value, _ = convolution_integral(theta0, t, x, m=0, support=1.0,
                                    breakpoints=theta0.breakpoints)
    return value


def boundary_trace(theta0, t_grid, support=1.0, breakpoints=None, v0=None,
                   derivative=True, abs_tol=1e-10, rel_tol=1e-8,
                   max_subdivisions=2 ** 14):
    """Phase-1 control samples u(t)=v(t,1) and u'(t)=i*v_xx(t,1).

    The optional (v0, support, breakpoints) triple lets the beam pipeline
    reuse this for its extended datum; by default the profile itself is the
    datum with unit support.  derivative=False skips the v_xx integral when
    only u itself is needed.
    """
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if np.any(t_grid <= 0):
        raise ValueError("trace times must be positive")
    if v0 is None:
        v0 = theta0
    if breakpoints is None:
        breakpoints = theta0.breakpoints
    u = np.zeros(t_grid.size, dtype=np.complex128)
    du = np.zeros(t_grid.size, dtype=np.complex128)
    err = np.zeros(t_grid.size)
    for i, t in enumerate(t_grid):
        val0, e0 = convolution_integral(v0, t, 1.0, 0, support, breakpoints,
                                        abs_tol, rel_tol, max_subdivisions)
        u[i] = val0
        err[i] = e0
        if derivative:
            val2, e2 = convolution_integral(v0, t, 1.0, 2, support, breakpoints,
                                            abs_tol, rel_tol, max_subdivisions)
            du[i] = 1j * val2
            err[i] = e0 + e2
    phase = np.full(t_grid.size, PHASE_SMOOTHING, dtype=np.uint8)
    return ControlTrace(t_grid, u, du, phase, err)


def flat_coefficients(theta0, tau, K, support=1.0, breakpoints=None, v0=None):
    """Extract the flat-output seed y_0..y_K at t=tau."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    if not 0 <= K <= min(30, (MAX_ORDER - 1) // 2):
        raise ValueError(f"K={K} outside the supported truncation range")
    if v0 is None:
        v0 = theta0
    if breakpoints is None:
        breakpoints = theta0.breakpoints
    bps = tuple(b / support for b in breakpoints if 0.0 < b / support < 1.0)
    y = np.zeros(K + 1, dtype=np.complex128)
    for k in range(K + 1):
        order = 2 * k + 1

        def integrand(sig, _order=order):
            ys = support * sig
            return -2.0 * kernel_derivative(tau, ys, _order) * v0(ys)

        try:
            value, _ = integrate(IntegrationProblem(integrand, bps))
        except QuadratureError as exc:
            raise SmoothingError(
                f"flat coefficient extraction failed at order k={k}: {exc}") from exc
        y[k] = _IPOW[k % 4] * support * value
    fit = [float(abs(y[k])) * tau ** k / (2.0 ** k * math.factorial(k))
           for k in range(K + 1)]
    return FlatSeed(tau, K, y, max(fit))
