"""Fundamental solution of the free Schrodinger equation and its x-derivatives.

E(t,x) = e^{i x^2 / 4t} / sqrt(4 pi i t) solves i E_t + E_xx = 0 for t != 0.
Every x-derivative has the form d^m E = p_m(x) E(t,x) where p_m is a
polynomial of degree m with the parity of m, obtained from

    p_0 = 1,    p_{m+1} = p_m' + (i x / 2t) p_m.

The odd-symmetrized kernel F(t,x,y) = E(t,x-y) - E(t,x+y) realizes the
Dirichlet condition at x = 0 for odd data.
"""
import threading

import numpy as np

from ._backend import HAS_NUMBA, njit

MAX_ORDER = 64


class KernelError(ValueError):
    """Domain or capability violation in kernel evaluation."""


@njit(cache=True)
def _horner_complex(coeffs, x, out):
    # coeffs ascending; evaluates at each x into out
    n = coeffs.shape[0]
    for i in range(x.shape[0]):
        acc = coeffs[n - 1]
        for j in range(n - 2, -1, -1):
            acc = acc * x[i] + coeffs[j]
        out[i] = acc


def _horner_numpy(coeffs, x, out):
    acc = np.full_like(x, coeffs[-1], dtype=np.complex128)
    for j in range(len(coeffs) - 2, -1, -1):
        acc *= x
        acc += coeffs[j]
    out[:] = acc


_horner = _horner_complex if HAS_NUMBA else _horner_numpy


class KernelDerivPoly:
    """The polynomial p_m for a fixed (t, m), with Horner evaluation.

    coeffs[j] multiplies x^j; entries of the parity opposite to m are
    exactly zero by construction.
    """

    __slots__ = ("t", "order", "coeffs")

    def __init__(self, t, order, coeffs):
        self.t = t
        self.order = order
        self.coeffs = coeffs

    @classmethod
    def build(cls, t, order):
        if order < 0 or order > MAX_ORDER:
            raise KernelError(f"derivative order {order} outside [0, {MAX_ORDER}]")
        c = np.zeros(order + 1, dtype=np.complex128)
        c[0] = 1.0
        half = 1j / (2.0 * t)
        for m in range(order):
            nxt = np.zeros(order + 1, dtype=np.complex128)
            nxt[: m + 1] = np.arange(1, m + 2) * c[1 : m + 2]
            nxt[1 : m + 2] += half * c[: m + 1]
            c = nxt
        if not np.all(np.isfinite(c)):
            raise KernelError(f"coefficient overflow at order {order}, t={t}")
        return cls(t, order, c)

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        out = np.empty(x.shape[0], dtype=np.complex128)
        _horner(self.coeffs, x, out)
        return out


_poly_cache = {}
_poly_lock = threading.Lock()


def _poly(t, order):
    key = (float(t), int(order))
    p = _poly_cache.get(key)
    if p is None:
        p = KernelDerivPoly.build(float(t), int(order))
        with _poly_lock:
            _poly_cache.setdefault(key, p)
    return p


def fundamental_solution(t, x):
    """E(t,x) with the principal branch of the square root.

    Accepts scalar or array x; t must be a nonzero scalar.
    """
    if t == 0:
        raise KernelError("kernel is singular at t = 0")
    x = np.asarray(x, dtype=np.float64)
    return np.exp(1j * x * x / (4.0 * t)) / np.sqrt(4j * np.pi * t)


def kernel_derivative(t, x, m):
    """d^m/dx^m E(t,x) = p_m(x) E(t,x) for scalar or array x."""
    if t == 0:
        raise KernelError("kernel is singular at t = 0")
    scalar = np.isscalar(x) or np.asarray(x).ndim == 0
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    vals = _poly(t, m)(xa) * fundamental_solution(t, xa)
    return vals[0] if scalar else vals


def odd_kernel(t, x, y, m=0):
    """d^m/dx^m F(t,x,y) with F(t,x,y) = E(t,x-y) - E(t,x+y).

    x is a scalar; y may be an array (the quadrature variable).
    """
    if t == 0:
        raise KernelError("kernel is singular at t = 0")
    scalar = np.isscalar(y) or np.asarray(y).ndim == 0
    ya = np.atleast_1d(np.asarray(y, dtype=np.float64))
    p = _poly(t, m)
    vals = p(x - ya) * fundamental_solution(t, x - ya) - p(x + ya) * fundamental_solution(t, x + ya)
    return vals[0] if scalar else vals
