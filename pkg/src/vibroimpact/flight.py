"""Single free-flight arcs and guaranteed first-event location.

Under the uniform law an arc with fixed velocity sign s solves

    x'' = F cos(omega t) - s f,

which integrates to a sinusoid plus a quadratic: events (wall hit,
velocity zero) are roots of closed-form functions.  Detection walks
quarter-period windows, inside which the acceleration is monotone, so the
velocity has at most one interior extremum per window and every sign
change is bracketed before being polished by Brent's method.  While the
velocity keeps its sign the position is monotone, which reduces wall
detection to a single bracketed root.

Wall-vanishing arcs have no elementary closed form; they are integrated
with DOP853 (dense output) and events are located on the dense-output
interpolant with the same window/bracket discipline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .model import (TWO_PI, ContractViolation, ForceLaw, Params, PhaseState,
                    applied_force)

_EPS = float(np.finfo(float).eps)
_BRENT_KW = dict(xtol=1e-14, rtol=4.0 * _EPS, maxiter=200)

# Fraction of T used as the event-time tie window (simultaneous events).
GRAZE_TIE = 1e-12

# Dense-output sampling density per quarter-period window (wall-vanishing law).
_WV_SAMPLES = 48

# Integrator tolerances for wall-vanishing arcs.
_WV_RTOL = 1e-12
_WV_ATOL = 1e-13


class EventKind(str, Enum):
    IMPACT_LEFT = "impact_left"
    IMPACT_RIGHT = "impact_right"
    VELOCITY_ZERO = "velocity_zero"
    HORIZON = "horizon"


@dataclass(frozen=True)
class Event:
    """First event on an arc.  ``wall`` is -1/+1 for left/right (0: none);
    ``velocity_zero`` is set when v vanishes there.  Both set at once means
    a grazing contact; ``kind`` reports the primary classification."""

    kind: EventKind
    time: float
    state: PhaseState
    wall: int = 0
    velocity_zero: bool = False

    @property
    def grazing(self) -> bool:
        return self.wall != 0 and self.velocity_zero


class SinusoidArc:
    """Closed-form arc under acceleration a_cos*cos(omega t) + a_k.

    Covers uniform-law flight (a_cos = F, a_k = -s f) and the tent-lift
    segments used by the conjugacy check (a_cos = +-F/R, a_k = -+f/R).
    """

    __slots__ = ("t0", "x0", "v0", "sign", "a_cos", "a_k", "omega",
                 "_sin0", "_cos0")

    def __init__(self, t0, x0, v0, sign, a_cos, a_k, omega):
        self.t0 = t0
        self.x0 = x0
        self.v0 = v0
        self.sign = sign
        self.a_cos = a_cos
        self.a_k = a_k
        self.omega = omega
        self._sin0 = math.sin(omega * t0)
        self._cos0 = math.cos(omega * t0)

    def accel(self, t: float) -> float:
        return self.a_cos * math.cos(self.omega * t) + self.a_k

    def v(self, t: float) -> float:
        dt = t - self.t0
        return (self.v0 + (self.a_cos / self.omega) * (math.sin(self.omega * t) - self._sin0)
                + self.a_k * dt)

    def x(self, t: float) -> float:
        dt = t - self.t0
        w = self.omega
        return (self.x0 + self.v0 * dt
                - (self.a_cos / (w * w)) * (math.cos(w * t) - self._cos0)
                - (self.a_cos / w) * self._sin0 * dt
                + 0.5 * self.a_k * dt * dt)

    def state(self, t: float) -> PhaseState:
        return PhaseState(self.x(t), self.v(t), t)

    # -- event machinery ---------------------------------------------------

    def _accel_zeros_in(self, a: float, b: float) -> list[float]:
        """Times in (a, b) where the acceleration vanishes (v extrema)."""
        if self.a_cos == 0.0:
            return []
        c0 = -self.a_k / self.a_cos
        if abs(c0) > 1.0:
            return []
        w = self.omega
        base = math.acos(max(-1.0, min(1.0, c0)))
        out = []
        for sgn in (base, -base):
            n = math.floor((w * a - sgn) / (2.0 * math.pi))
            for k in (n, n + 1, n + 2):
                t = (sgn + 2.0 * math.pi * k) / w
                if a < t < b:
                    out.append(t)
        out.sort()
        return out

    def first_velocity_zero(self, t_hi: float) -> float | None:
        """First root of v(t) in (t0, t_hi], honoring the departure sign
        when v(t0) == 0.

        Arcs released from sticking depart with both v and the acceleration
        at zero; a small guard after t0 keeps roundoff in v from reporting
        the departure point itself as a root.
        """
        w = self.omega
        window = 0.5 * math.pi / w  # T/4
        # 1e-7 T puts the guard safely above the roundoff floor of v while
        # staying far below any genuine re-crossing time
        guard = self.t0 + (1e-7 * TWO_PI / w if self.v0 == 0.0 else 0.0)
        a = self.t0
        sign_a = self.sign if self.v0 == 0.0 else (1 if self.v0 > 0 else -1)
        while a < t_hi:
            b = min(a + window, t_hi)
            knots = [a] + [k for k in self._accel_zeros_in(a, b) if k > guard] + [b]
            va = sign_a
            for k1, k2 in zip(knots[:-1], knots[1:]):
                v2 = self.v(k2)
                if k2 <= guard:
                    continue
                if v2 == 0.0:
                    return k2
                if (v2 > 0) != (va > 0):
                    return brentq(self.v, max(k1, guard), k2, **_BRENT_KW)
                va = v2
            a = b
            sign_a = va
        return None

    def wall_crossing(self, target: float, t_lo: float, t_hi: float) -> float | None:
        """Root of x(t) = target on [t_lo, t_hi], where x is monotone toward
        the target (velocity sign constant on the span)."""
        g_lo = self.x(t_lo) - target
        g_hi = self.x(t_hi) - target
        if g_hi == 0.0:
            return t_hi
        if (g_hi > 0) == (g_lo > 0):
            return None
        return brentq(lambda t: self.x(t) - target, t_lo, t_hi, **_BRENT_KW)


def make_arc(p: Params, start: PhaseState, sign: int) -> "FlightArc":
    """Public constructor enforcing the start contract: the velocity sign
    matches, or v = 0 with the net force exceeding friction toward ``sign``."""
    if sign not in (-1, 1):
        raise ContractViolation(f"sign must be +-1, got {sign}")
    if start.v != 0.0:
        if (start.v > 0) != (sign > 0):
            raise ContractViolation(
                f"arc sign {sign} inconsistent with start velocity {start.v}")
    else:
        g = applied_force(p, start.x, start.t)
        if abs(g) <= p.f or (g > 0) != (sign > 0):
            raise ContractViolation(
                "zero-velocity start requires |force| > f with force toward the arc sign")
    return _arc(p, start.x, start.v, start.t, sign)


def _arc(p: Params, x: float, v: float, t: float, sign: int):
    if p.force_law is ForceLaw.UNIFORM:
        return UniformFlightArc(p, x, v, t, sign)
    return WallVanishingArc(p, x, v, t, sign)


class UniformFlightArc(SinusoidArc):
    """Flight arc of the uniform law (exact closed form)."""

    __slots__ = ("params",)

    def __init__(self, p: Params, x, v, t, sign):
        super().__init__(t, x, v, sign, p.F, -sign * p.f, p.omega)
        self.params = p

    @property
    def start(self) -> PhaseState:
        return PhaseState(self.x0, self.v0, self.t0)

    def transport(self, t_a: float, t_b: float) -> np.ndarray:
        """Fixed-time linearization of the flight over [t_a, t_b]; the
        force is x-independent so this is the unit shear."""
        return np.array([[1.0, t_b - t_a], [0.0, 1.0]])


class WallVanishingArc:
    """Flight arc of the wall-vanishing law, integrated on demand.

    The arc extends itself lazily in quarter-period windows; positions and
    velocities are read off the dense output.  When ``with_transport`` the
    2x2 variational system is integrated alongside so the fixed-time flow
    linearization is available at event times.
    """

    __slots__ = ("params", "t0", "x0", "v0", "sign", "omega",
                 "_segments", "_t_reached", "_with_transport")

    def __init__(self, p: Params, x, v, t, sign, with_transport=False):
        self.params = p
        self.t0 = t
        self.x0 = x
        self.v0 = v
        self.sign = sign
        self.omega = p.omega
        self._segments = []
        self._t_reached = t
        self._with_transport = with_transport

    @property
    def start(self) -> PhaseState:
        return PhaseState(self.x0, self.v0, self.t0)

    def _rhs(self, t, y):
        p = self.params
        half_pi = 0.5 * math.pi
        env = p.F * math.cos(half_pi * y[0])
        a = env * math.cos(p.omega * t) - self.sign * p.f
        if not self._with_transport:
            return (y[1], a)
        # variational block: d/dt (dx, dv) rows of the 2x2 flow derivative
        gx = -p.F * half_pi * math.sin(half_pi * y[0]) * math.cos(p.omega * t)
        return (y[1], a, y[4], y[5], gx * y[2], gx * y[3])

    def _extend_to(self, t_target: float) -> None:
        while self._t_reached < t_target - 1e-15:
            t_a = self._t_reached
            t_b = min(t_a + 0.5 * math.pi / self.omega, t_target)
            if self._segments:
                y0 = self._segments[-1].sol(t_a)
            else:
                y0 = ([self.x0, self.v0] if not self._with_transport
                      else [self.x0, self.v0, 1.0, 0.0, 0.0, 1.0])
            sol = solve_ivp(self._rhs, (t_a, t_b), np.asarray(y0, dtype=float),
                            method="DOP853", rtol=_WV_RTOL, atol=_WV_ATOL,
                            dense_output=True)
            if not sol.success:  # pragma: no cover - integrator failure
                raise RuntimeError(f"arc integration failed: {sol.message}")
            self._segments.append(sol)
            self._t_reached = t_b

    def _eval(self, t: float) -> np.ndarray:
        self._extend_to(t)
        for seg in self._segments:
            if t <= seg.t[-1] + 1e-15:
                return seg.sol(t)
        return self._segments[-1].sol(t)

    def x(self, t: float) -> float:
        return float(self._eval(t)[0])

    def v(self, t: float) -> float:
        return float(self._eval(t)[1])

    def accel(self, t: float) -> float:
        p = self.params
        return applied_force(p, self.x(t), t) - self.sign * p.f

    def state(self, t: float) -> PhaseState:
        y = self._eval(t)
        return PhaseState(float(y[0]), float(y[1]), t)

    def transport(self, t_a: float, t_b: float) -> np.ndarray:
        """Variational flow derivative over [t_a, t_b] (requires
        with_transport=True and t_a == t0)."""
        if not self._with_transport:
            raise ContractViolation("arc built without variational transport")
        y = self._eval(t_b)
        return np.array([[y[2], y[3]], [y[4], y[5]]])

    def first_velocity_zero(self, t_hi: float) -> float | None:
        return self._scan(t_hi, want="v")

    def wall_crossing(self, target: float, t_lo: float, t_hi: float) -> float | None:
        g = lambda t: self.x(t) - target
        g_lo, g_hi = g(t_lo), g(t_hi)
        if g_hi == 0.0:
            return t_hi
        if (g_hi > 0) == (g_lo > 0):
            return None
        return brentq(g, t_lo, t_hi, **_BRENT_KW)

    def _scan(self, t_hi: float, want: str) -> float | None:
        window = 0.5 * math.pi / self.omega
        a = self.t0
        sign_a = self.sign if self.v0 == 0.0 else (1 if self.v0 > 0 else -1)
        while a < t_hi - 1e-15:
            b = min(a + window, t_hi)
            self._extend_to(b)
            ts = np.linspace(a, b, _WV_SAMPLES)
            vs = np.array([self.v(t) for t in ts])
            va = sign_a
            for i in range(1, len(ts)):
                v2 = vs[i]
                if v2 == 0.0:
                    return float(ts[i])
                if (v2 > 0) != (va > 0):
                    return brentq(self.v, float(ts[i - 1]), float(ts[i]), **_BRENT_KW)
                va = v2
            a = b
            sign_a = va
        return None


FlightArc = UniformFlightArc | WallVanishingArc


def next_event(p: Params, arc: FlightArc, horizon: float) -> Event:
    """Earliest of: velocity zero, wall contact, horizon.

    Wall detection exploits monotonicity of x while v keeps its sign: the
    search span is capped at the first velocity zero.  Coinciding wall and
    velocity-zero times (within GRAZE_TIE * T) are reported on one event.
    """
    if horizon <= arc.t0:
        raise ContractViolation("horizon must exceed the arc start time")
    p_l, p_r = p.l, p.r
    tie = GRAZE_TIE * p.T

    t_v = arc.first_velocity_zero(horizon)
    t_stop = horizon if t_v is None else min(t_v, horizon)
    target = p_r if arc.sign > 0 else p_l
    t_x = arc.wall_crossing(target, arc.t0, t_stop)

    if t_x is not None:
        wall = 1 if arc.sign > 0 else -1
        graze = t_v is not None and abs(t_v - t_x) <= tie
        v_at = 0.0 if graze else arc.v(t_x)
        kind = EventKind.IMPACT_RIGHT if wall > 0 else EventKind.IMPACT_LEFT
        return Event(kind=kind, time=t_x,
                     state=PhaseState(target, v_at, t_x),
                     wall=wall, velocity_zero=graze)
    if t_v is not None and t_v <= horizon:
        x_at = arc.x(t_v)
        # velocity zero landing exactly on a wall is a grazing contact
        wall = 0
        if abs(x_at - p_r) <= 1e-12 * max(1.0, abs(p_r)):
            wall, x_at = 1, p_r
        elif abs(x_at - p_l) <= 1e-12 * max(1.0, abs(p_l)):
            wall, x_at = -1, p_l
        return Event(kind=EventKind.VELOCITY_ZERO, time=t_v,
                     state=PhaseState(x_at, 0.0, t_v),
                     wall=wall, velocity_zero=True)
    return Event(kind=EventKind.HORIZON, time=horizon,
                 state=arc.state(horizon))
