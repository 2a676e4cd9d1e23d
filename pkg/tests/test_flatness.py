"""Flat-output construction: endpoint jets, series identities, validation.

The two endpoint conditions are contracts, not approximations: the step
factor carries exact ones and zeros at the interval ends, so the assembled
derivatives must reproduce the seed and the terminal rest bit for bit.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schroflat import FlatOutput, analytic_part_jet, control_series, control_trace, flat_coefficients, flat_output_derivatives, flat_output_jet, state_series
from schroflat.flatness import JET_ORDER_MARGIN
from schroflat.gevrey import step_function
from schroflat.smoothing import PHASE_FLATNESS, FlatSeed


@pytest.fixture(scope="module")
def fo():
    from schroflat.cli import reference_datum
    seed = flat_coefficients(reference_datum(), 0.35, 15)
    return FlatOutput(seed, 0.5, 1.9)


# --------------------------------------------------------------- endpoints

def test_seed_jets_reproduced_exactly_at_start(fo):
    derivs = flat_output_derivatives(fo, fo.tau)
    K = fo.seed.K
    # bit-exact: the step factor contributes an exact (1, 0, 0, ...) there
    assert all(derivs[k] == fo.seed.y[k] for k in range(K + 1))
    assert np.all(derivs[K + 1:] == 0.0)


def test_all_derivatives_vanish_exactly_at_terminal_time(fo):
    derivs = flat_output_derivatives(fo, fo.T)
    assert np.all(derivs == 0.0)


def test_control_and_derivative_zero_at_terminal_time(fo):
    u, du, tail = control_series(fo, fo.T)
    assert u == 0.0 and du == 0.0 and tail == 0.0


def test_control_at_start_matches_seed_series(fo):
    u, _, _ = control_series(fo, fo.tau)
    expect = fo.seed.series_at(1.0)
    assert abs(u - expect) <= 1e-14 * abs(expect)


# ------------------------------------------------------------------ series

def test_state_at_right_edge_is_the_control(fo):
    for t in np.linspace(fo.tau, fo.T, 7):
        u, _, _ = control_series(fo, float(t))
        theta = state_series(fo, float(t), 1.0)
        assert theta == u  # same terms, x-powers exactly one


def test_state_at_left_edge_is_zero(fo):
    for t in np.linspace(fo.tau, fo.T, 5):
        assert state_series(fo, float(t), 0.0) == 0.0


def test_state_series_array_argument(fo):
    t = 0.42
    x = np.array([0.0, 0.3, 0.7, 1.0])
    vals = state_series(fo, t, x)
    assert vals.shape == (4,)
    for xi, v in zip(x, vals):
        assert v == state_series(fo, t, float(xi))


def test_flat_output_factorizes(fo):
    # y(t) = phi(sigma) * ybar(t) with both factors known independently
    for t in (0.37, 0.42, 0.48):
        sigma = (t - fo.tau) / (fo.T - fo.tau)
        phi = step_function(sigma, fo.s)
        ybar = analytic_part_jet(fo, t).value
        y = flat_output_derivatives(fo, t)[0]
        assert abs(y - phi * ybar) <= 1e-14 * abs(y)


def test_first_derivative_matches_difference_quotient(fo):
    t, h = 0.43, 1e-6
    f = lambda u: flat_output_derivatives(fo, u)[0]
    d1 = (f(t + h) - f(t - h)) / (2 * h)
    d2 = (f(t + h / 2) - f(t - h / 2)) / h
    fd = (4 * d2 - d1) / 3
    exact = flat_output_derivatives(fo, t)[1]
    assert abs(fd - exact) <= 1e-7 * abs(exact)


def test_jet_views_consistent_with_derivatives(fo):
    t = 0.45
    derivs = flat_output_derivatives(fo, t)
    jet = flat_output_jet(fo, t)
    for k in range(jet.order + 1):
        assert abs(jet.derivative(k) - derivs[k]) <= 1e-14 * max(abs(derivs[k]), 1.0)


def test_analytic_part_at_start_is_seed(fo):
    jet = analytic_part_jet(fo, fo.tau)
    assert jet.value == fo.seed.y[0]


def test_tail_is_last_retained_term(fo):
    t = 0.44
    u8, _, tail8 = control_series(fo, t, truncation=8)
    derivs = flat_output_derivatives(fo, t)
    expect = abs(derivs[8] / math.factorial(17))
    assert abs(tail8 - expect) <= 1e-15 * expect


def test_truncation_refinement_changes_by_tail(fo):
    t = 0.44
    u8, _, _ = control_series(fo, t, truncation=8)
    u9, _, tail9 = control_series(fo, t, truncation=9)
    assert abs(u9 - u8) == pytest.approx(tail9, rel=1e-12)


def test_control_trace_sampling(fo):
    ts = np.linspace(fo.tau + 0.01, fo.T, 6)
    trace = control_trace(fo, ts, truncation=10)
    assert np.all(trace.phase == PHASE_FLATNESS)
    u, du, tail = control_series(fo, float(ts[2]), truncation=10)
    assert trace.u[2] == u and trace.du[2] == du and trace.err[2] == tail


@settings(deadline=None, max_examples=20, derandomize=True)
@given(frac=st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
def test_derivatives_finite_across_interval(fo, frac):
    t = fo.tau + frac * (fo.T - fo.tau)
    derivs = flat_output_derivatives(fo, t)
    assert np.all(np.isfinite(derivs))


# -------------------------------------------------------------- validation

def _seed(tau=0.35, K=3):
    y = np.zeros(K + 1, dtype=np.complex128)
    y[0] = 1.0
    return FlatSeed(tau=tau, K=K, y=y, bound_constant=2.0)


def test_flat_output_validation():
    with pytest.raises(ValueError, match="tau < T"):
        FlatOutput(_seed(tau=0.6), 0.5, 1.9)
    with pytest.raises(ValueError, match="2T/3"):
        FlatOutput(_seed(tau=0.3), 0.5, 1.9)
    with pytest.raises(ValueError, match="s must lie"):
        FlatOutput(_seed(), 0.5, 2.3)
    with pytest.raises(ValueError, match="jet order"):
        FlatOutput(_seed(), 0.5, 1.9, jet_order=0)


def test_time_domain_enforced(fo):
    with pytest.raises(ValueError):
        flat_output_derivatives(fo, fo.tau - 1e-9)
    with pytest.raises(ValueError):
        control_series(fo, fo.T + 1e-9)


def test_truncation_needs_jet_headroom():
    seed = _seed()
    fo_small = FlatOutput(seed, 0.5, 1.9, jet_order=5)
    with pytest.raises(ValueError, match="jet order"):
        control_series(fo_small, 0.4, truncation=5)
    with pytest.raises(ValueError):
        control_series(fo_small, 0.4, truncation=-1)
    # margin in the default jet order leaves room for the derivative shift
    fo_ok = FlatOutput(seed, 0.5, 1.9, jet_order=5 + JET_ORDER_MARGIN)
    control_series(fo_ok, 0.4, truncation=5)
