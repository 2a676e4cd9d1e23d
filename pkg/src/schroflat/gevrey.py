"""Gevrey step profile and truncated-Taylor (jet) arithmetic.

The step profile

    phi_s(t) = exp(-(1-t)^(-kappa)) / (exp(-(1-t)^(-kappa)) + exp(-t^(-kappa)))

with kappa = 1/(s-1) decreases smoothly from 1 at t=0 to 0 at t=1 and is
Gevrey of order s for 1 < s < 2.  Derivatives of any order are obtained
without symbolic differentiation by propagating normalized Taylor
coefficients c_j = f^(j)/j! through the defining formula.  Near the
endpoints the exponentials drop below the smallest positive normal double;
there the profile is flat to machine precision and the jet snaps to an
exact constant.
"""
import math
from dataclasses import dataclass

import numpy as np

from ._backend import njit

MAX_JET_ORDER = 40

# -log of smallest positive normal double; beyond this the exponentials
# underflow and the profile is constant in floating point.
_SNAP_EXPONENT = -math.log(np.finfo(np.float64).tiny)


@njit(cache=True)
def _mul(a, b):
    n = a.shape[0]
    c = np.zeros(n, dtype=np.complex128)
    for j in range(n):
        acc = 0.0 + 0.0j
        for k in range(j + 1):
            acc += a[k] * b[j - k]
        c[j] = acc
    return c


@njit(cache=True)
def _div(a, b):
    n = a.shape[0]
    q = np.zeros(n, dtype=np.complex128)
    for j in range(n):
        acc = a[j]
        for k in range(1, j + 1):
            acc -= b[k] * q[j - k]
        q[j] = acc / b[0]
    return q


@njit(cache=True)
def _exp(u):
    n = u.shape[0]
    h = np.zeros(n, dtype=np.complex128)
    h[0] = np.exp(u[0])
    for j in range(1, n):
        acc = 0.0 + 0.0j
        for k in range(1, j + 1):
            acc += k * u[k] * h[j - k]
        h[j] = acc / j
    return h


@njit(cache=True)
def _pow(u, alpha):
    n = u.shape[0]
    w = np.zeros(n, dtype=np.complex128)
    w[0] = u[0] ** alpha
    for j in range(1, n):
        acc = 0.0 + 0.0j
        for k in range(1, j + 1):
            acc += ((alpha + 1.0) * k - j) * u[k] * w[j - k]
        w[j] = acc / (j * u[0])
    return w


@dataclass(eq=False)
class ComplexJet:
    """Normalized Taylor coefficients c_j = f^(j)(center)/j!."""

    center: float
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise ValueError("coeffs must be a nonempty 1-d array")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("jet coefficients must be finite")

    @classmethod
    def constant(cls, value, center, order):
        c = np.zeros(order + 1, dtype=np.complex128)
        c[0] = value
        return cls(center, c)

    @classmethod
    def variable(cls, center, order):
        c = np.zeros(order + 1, dtype=np.complex128)
        c[0] = center
        if order >= 1:
            c[1] = 1.0
        return cls(center, c)

    @property
    def order(self):
        return self.coeffs.size - 1

    @property
    def value(self):
        return self.coeffs[0]

    def derivative(self, k):
        if not 0 <= k <= self.order:
            raise ValueError(f"derivative order {k} outside jet range")
        return self.coeffs[k] * math.factorial(k)

    def _check(self, other):
        if self.center != other.center or self.order != other.order:
            raise ValueError("jet centers and orders must match")

    def __add__(self, other):
        self._check(other)
        return ComplexJet(self.center, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return ComplexJet(self.center, self.coeffs - other.coeffs)

    def __mul__(self, other):
        if isinstance(other, ComplexJet):
            self._check(other)
            return ComplexJet(self.center, _mul(self.coeffs, other.coeffs))
        return ComplexJet(self.center, self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        self._check(other)
        if other.coeffs[0] == 0:
            raise ZeroDivisionError("jet division by zero constant term")
        return ComplexJet(self.center, _div(self.coeffs, other.coeffs))

    def __neg__(self):
        return ComplexJet(self.center, -self.coeffs)

    def exp(self):
        return ComplexJet(self.center, _exp(self.coeffs))

    def power(self, alpha):
        if self.coeffs[0] == 0:
            raise ZeroDivisionError("jet power needs nonzero constant term")
        return ComplexJet(self.center, _pow(self.coeffs, float(alpha)))


def _kappa(s):
    if not 1.0 < s < 2.0:
        raise ValueError(f"Gevrey order s={s} must lie in (1, 2)")
    return 1.0 / (s - 1.0)


def step_function(t, s):
    """Evaluate phi_s pointwise; scalar or array argument.

    Dividing numerator and denominator by the first exponential turns the
    ratio into a sigmoid in d = (1-t)^(-kappa) - t^(-kappa), which avoids
    0/0 when both exponentials underflow.
    """
    kappa = _kappa(s)
    t_arr = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t_arr)
    out[t_arr <= 0.0] = 1.0
    inner = (t_arr > 0.0) & (t_arr < 1.0)
    ti = t_arr[inner]
    d = (1.0 - ti) ** (-kappa) - ti ** (-kappa)
    with np.errstate(over="ignore", under="ignore"):
        out[inner] = 1.0 / (1.0 + np.exp(d))
    return out if np.ndim(t) else float(out)


def step_jet(t, s, order):
    """Jet of phi_s at t, snapping to an exact constant in the flat tails.

    Jets use the two-exponential ratio a/(a+b) directly: both factors stay
    in (0,1], so coefficient recurrences cannot overflow the way the
    sigmoid form's exp((1-t)^(-kappa) - t^(-kappa)) does inside the
    boundary layers.  Whenever an exponent passes the underflow threshold
    the profile is constant in double precision and the jet snaps exactly.
    """
    kappa = _kappa(s)
    if not 0 <= order <= MAX_JET_ORDER:
        raise ValueError(f"jet order must lie in [0, {MAX_JET_ORDER}]")
    t = float(t)
    if t <= 0.0:
        return ComplexJet.constant(1.0, t, order)
    if t >= 1.0:
        return ComplexJet.constant(0.0, t, order)
    # compare the would-be exponents in log space: the powers themselves
    # overflow the float range long before the comparison is decided
    log_snap = math.log(_SNAP_EXPONENT)
    a_under = -kappa * math.log1p(-t) > log_snap   # exp(-(1-t)^-kappa) == 0
    b_under = -kappa * math.log(t) > log_snap      # exp(-t^-kappa) == 0
    if a_under and b_under:
        raise ValueError(
            f"both exponentials of phi_s underflow at t={t} for s={s}; "
            "jets need s further from 1")
    if a_under:
        return ComplexJet.constant(0.0, t, order)
    if b_under:
        return ComplexJet.constant(1.0, t, order)
    tt = ComplexJet.variable(t, order)
    one_minus = ComplexJet.constant(1.0, t, order) - tt
    a = (-one_minus.power(-kappa)).exp()
    b = (-tt.power(-kappa)).exp()
    return a / (a + b)


@dataclass(frozen=True)
class GevreyBound:
    """|f^(j)| <= M * (j!)^s / R^j for all tabulated orders."""

    M: float
    R: float
    s: float

    def log_limit(self, j):
        return math.log(self.M) + self.s * math.lgamma(j + 1) - j * math.log(self.R)


def verify_gevrey_bound(jets, bound):
    """Check every jet coefficient against the bound, in log space.

    Returns (ok, witness) where witness is (center, order) of the first
    violation, or None.
    """
    for jet in jets:
        for j in range(jet.order + 1):
            mag = abs(jet.coeffs[j])
            if mag == 0.0:
                continue
            log_deriv = math.log(mag) + math.lgamma(j + 1)
            if log_deriv > bound.log_limit(j):
                return False, (jet.center, j)
    return True, None
