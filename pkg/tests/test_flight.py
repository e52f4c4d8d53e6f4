import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vibroimpact import (ContractViolation, EventKind, PhaseState, make_arc,
                         make_params, next_event)


def test_force_free_drift_arc():
    p = make_params(F=0.0, f=0.0, omega=1.0, l=-10.0, r=10.0)
    arc = make_arc(p, PhaseState(0.1, 0.5, 0.0), 1)
    for t in (0.0, 0.7, 2.0):
        assert arc.x(t) == pytest.approx(0.1 + 0.5 * t, abs=1e-15)
        assert arc.v(t) == pytest.approx(0.5, abs=1e-15)


def test_cosine_arc_from_rest():
    # zero-velocity start is valid with sign +1 (force 1 > f = 0) and gives
    # x(t) = 1 - cos t, v(t) = sin t
    p = make_params(F=1.0, f=0.0, omega=1.0, l=-10.0, r=10.0)
    arc = make_arc(p, PhaseState(0.0, 0.0, 0.0), 1)
    for t in (0.2, 1.0, 2.5):
        assert arc.x(t) == pytest.approx(1 - math.cos(t), abs=1e-14)
        assert arc.v(t) == pytest.approx(math.sin(t), abs=1e-14)
    with pytest.raises(ContractViolation):
        make_arc(p, PhaseState(0.0, 0.0, 0.0), -1)   # force points the other way


def test_arc_sign_contract():
    p = make_params(F=1.0, f=0.0, omega=1.0, l=-10.0, r=10.0)
    with pytest.raises(ContractViolation):
        make_arc(p, PhaseState(0.0, -1.0, 0.0), 1)
    with pytest.raises(ContractViolation):
        make_arc(p, PhaseState(0.0, 1.0, 0.0), -1)


def test_friction_arc_against_quadrature():
    """v(t) = 1 + sin t - 0.1 t checked against a fixed-step RK4 oracle."""
    p = make_params(F=1.0, f=0.1, omega=1.0, l=-100.0, r=100.0)
    arc = make_arc(p, PhaseState(0.0, 1.0, 0.0), 1)
    x, v, t = 0.0, 1.0, 0.0
    h = 1e-4

    def acc(tt):
        return math.cos(tt) - 0.1

    while t < 1.0 - h / 2:
        k1x, k1v = v, acc(t)
        k2x, k2v = v + 0.5 * h * k1v, acc(t + 0.5 * h)
        k3x, k3v = v + 0.5 * h * k2v, acc(t + 0.5 * h)
        k4x, k4v = v + h * k3v, acc(t + h)
        x += (h / 6) * (k1x + 2 * k2x + 2 * k3x + k4x)
        v += (h / 6) * (k1v + 2 * k2v + 2 * k3v + k4v)
        t += h
    assert arc.v(1.0) == pytest.approx(1 + math.sin(1.0) - 0.1, abs=1e-12)
    assert abs(arc.v(1.0) - v) < 1e-8
    assert abs(arc.x(1.0) - x) < 1e-8


def test_first_impact_at_analytic_time():
    # 1 - cos t reaches the wall at 0.8 when t = arccos(0.2)
    p = make_params(F=1.0, f=0.0, omega=1.0, l=0.0, r=0.8)
    arc = make_arc(p, PhaseState(0.0, 0.0, 0.0), 1)
    ev = next_event(p, arc, 20.0)
    assert ev.kind is EventKind.IMPACT_RIGHT
    assert ev.time == pytest.approx(math.acos(0.2), abs=1e-12)
    assert ev.state.x == 0.8


def test_drift_impact():
    p = make_params(F=0.0, f=0.0, omega=1.0, l=0.0, r=1.0)
    arc = make_arc(p, PhaseState(0.1, 0.5, 0.0), 1)
    ev = next_event(p, arc, 10.0)
    assert ev.kind is EventKind.IMPACT_RIGHT
    assert ev.time == pytest.approx(1.8, abs=1e-12)


def test_velocity_zero_at_pi():
    # from rest at t=0 with f=0: v(t) = sin t vanishes next at t = pi
    p = make_params(F=1.0, f=0.0, omega=1.0, l=-100.0, r=100.0)
    arc = make_arc(p, PhaseState(0.0, 0.0, 0.0), 1)
    ev = next_event(p, arc, 10.0)
    assert ev.kind is EventKind.VELOCITY_ZERO
    assert ev.time == pytest.approx(math.pi, abs=1e-12)
    assert ev.state.v == 0.0


def test_horizon_event():
    p = make_params(F=1.0, f=0.0, omega=1.0, l=-100.0, r=100.0)
    arc = make_arc(p, PhaseState(0.0, 0.0, 0.0), 1)
    ev = next_event(p, arc, 1.0)
    assert ev.kind is EventKind.HORIZON
    assert ev.time == 1.0
    with pytest.raises(ContractViolation):
        next_event(p, arc, -1.0)


@given(x0=st.floats(-0.5, 0.5), v0=st.floats(0.05, 3.0),
       f=st.floats(0.0, 0.4), om=st.floats(0.5, 3.0),
       t0=st.floats(0.0, 6.0))
@settings(max_examples=40, deadline=None)
def test_event_is_first_by_dense_sampling(x0, v0, f, om, t0):
    """No earlier sign change of the event functions exists on the arc."""
    p = make_params(F=1.0, f=f, omega=om, l=-1.0, r=1.0)
    arc = make_arc(p, PhaseState(x0, v0, t0), 1)
    ev = next_event(p, arc, t0 + 3 * p.T)
    ts = np.linspace(t0, ev.time, 10_000, endpoint=False)[1:]
    xs = np.array([arc.x(t) for t in ts])
    vs = np.array([arc.v(t) for t in ts])
    assert np.all(vs > 0), "velocity sign change before the reported event"
    assert np.all(xs < 1.0 + 1e-10), "wall crossing before the reported event"
    assert np.all(xs > -1.0 - 1e-10)
    # continuity at the event
    if ev.kind is EventKind.IMPACT_RIGHT:
        assert abs(arc.x(ev.time) - 1.0) < 1e-12
    elif ev.kind is EventKind.VELOCITY_ZERO:
        assert abs(arc.v(ev.time)) < 1e-12


def test_wall_vanishing_arc_events(wall_vanishing):
    p = wall_vanishing
    arc_state = PhaseState(0.0, 1.2, 0.0)
    arc = make_arc(p, arc_state, 1)
    ev = next_event(p, arc, 5.0 * p.T)
    assert ev.kind in (EventKind.IMPACT_RIGHT, EventKind.VELOCITY_ZERO)
    # residual of the event condition on the integrated arc
    if ev.kind is EventKind.IMPACT_RIGHT:
        assert abs(arc.x(ev.time) - 1.0) < 1e-10
    else:
        assert abs(arc.v(ev.time)) < 1e-10
