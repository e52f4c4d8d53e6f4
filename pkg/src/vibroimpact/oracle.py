"""Brute-force reference integrator for validation.

Classical fixed-step RK4 between event checks, with wall crossings and
velocity zeros located by bisection on the step size and the same
stick/turn classification rules as the event-driven engine.  It shares no
integration or event-location code with the flight/simulator modules.

For the uniform law the acceleration is state-independent within one slide
phase, so the RK4 recurrences reduce to prefix sums over precomputed force
samples; those are evaluated in vectorized chunks that reproduce the
scalar loop bit for bit.  The wall-vanishing law falls back to a plain
scalar loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ForceLaw, Params, PhaseState, applied_force


class OracleError(ValueError):
    pass


@dataclass
class OracleEvent:
    kind: str        # impact / turning / stick_start / stick_release
    time: float
    x: float
    wall: int = 0


@dataclass
class OracleTrajectory:
    ts: np.ndarray
    xs: np.ndarray
    vs: np.ndarray
    events: list[OracleEvent]
    final: PhaseState

    def signature(self) -> tuple[str, ...]:
        """Event codes matching Trajectory.event_signature()."""
        code = {"turning": "T", "stick_start": "S", "stick_release": "s"}
        out = []
        for e in self.events:
            if e.kind == "impact":
                out.append("R" if e.wall > 0 else "L")
            else:
                out.append(code[e.kind])
        return tuple(out)


def _rk4_step(p: Params, s: int, t: float, x: float, v: float, h: float):
    """One RK4 step of x'' = force(x, t) - s f."""
    f = p.f

    def acc(tt, xx):
        return applied_force(p, xx, tt) - s * f

    k1x = v
    k1v = acc(t, x)
    k2x = v + 0.5 * h * k1v
    k2v = acc(t + 0.5 * h, x + 0.5 * h * k1x)
    k3x = v + 0.5 * h * k2v
    k3v = acc(t + 0.5 * h, x + 0.5 * h * k2x)
    k4x = v + h * k3v
    k4v = acc(t + h, x + h * k3x)
    xn = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
    vn = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
    return xn, vn


def _uniform_chunk(p: Params, s: int, t: float, x: float, v: float,
                   n: int, h: float):
    """n RK4 steps of the uniform law as prefix sums.  With the
    state-independent acceleration g(t) = F cos(omega t) - s f the scheme
    collapses to v_{k+1} = v_k + (h/6)(g_k + 4 g_{k+1/2} + g_{k+1}) and
    x_{k+1} = x_k + h v_k + (h^2/6)(g_k + 2 g_{k+1/2})."""
    g0 = p.F * np.cos(p.omega * (t + h * np.arange(n + 1))) - s * p.f
    gh = p.F * np.cos(p.omega * (t + h * (np.arange(n) + 0.5))) - s * p.f
    dv = (h / 6.0) * (g0[:-1] + 4.0 * gh + g0[1:])
    vs = np.empty(n + 1)
    vs[0] = v
    vs[1:] = v + np.cumsum(dv)
    dx = h * vs[:-1] + (h * h / 6.0) * (g0[:-1] + 2.0 * gh)
    xs = np.empty(n + 1)
    xs[0] = x
    xs[1:] = x + np.cumsum(dx)
    return xs, vs


def _bisect_event(p, s, t, x, v, h, crossed):
    """Locate ``crossed(x, v) = 0`` within a step of size at most h by
    bisection on the step size."""
    lo, hi = 0.0, h
    g_hi = crossed(*_rk4_step(p, s, t, x, v, hi))
    for _ in range(80):
        if hi - lo <= 1e-16 * max(1.0, abs(t)):
            break
        mid = 0.5 * (lo + hi)
        g_mid = crossed(*_rk4_step(p, s, t, x, v, mid))
        if abs(g_mid) < 1e-13:
            hi = mid
            break
        if (g_mid > 0) == (g_hi > 0):
            hi = mid
            g_hi = g_mid
        else:
            lo = mid
    xe, ve = _rk4_step(p, s, t, x, v, hi)
    return t + hi, xe, ve


def _release_scan(p: Params, x: float, t: float) -> tuple[float, int] | None:
    """First upward crossing of |force(x, .)| through f after t, by coarse
    scan plus bisection (independent of the engine's closed form)."""
    f = p.f
    n = 4000
    dt = 2.0 * p.T / n
    g_prev = abs(applied_force(p, x, t)) - f
    for i in range(1, n + 1):
        ti = t + i * dt
        g = abs(applied_force(p, x, ti)) - f
        if g_prev <= 0.0 < g:
            lo, hi = ti - dt, ti
            for _ in range(70):
                mid = 0.5 * (lo + hi)
                if abs(applied_force(p, x, mid)) - f > 0.0:
                    hi = mid
                else:
                    lo = mid
            direction = 1 if applied_force(p, x, hi) > 0 else -1
            return hi, direction
        g_prev = g
    return None


def oracle_simulate(p: Params, initial: PhaseState, duration: float,
                    dt: float) -> OracleTrajectory:
    """Reference trajectory sampled on the fixed-step grid (plus event
    times); requires dt <= T/1000 so events stay isolated per step."""
    if dt > p.T / 1000.0:
        raise OracleError(f"dt = {dt} too coarse for event isolation "
                          f"(need dt <= T/1000 = {p.T / 1000.0})")
    t_end = initial.t + duration
    t, x, v = initial.t, initial.x, initial.v
    ts_out = [t]
    xs_out = [x]
    vs_out = [v]
    events: list[OracleEvent] = []
    uniform = p.force_law is ForceLaw.UNIFORM
    chunk = 8192
    finished = False

    def emit(tt, xx, vv):
        ts_out.append(tt)
        xs_out.append(xx)
        vs_out.append(vv)

    def classify_zero():
        """Returns the new slide sign, advancing through sticking; 0 means
        at rest until t_end."""
        nonlocal t, x, v
        g = applied_force(p, x, t)
        if abs(g) > p.f:
            events.append(OracleEvent("turning", t, x))
            return 1 if g > 0 else -1
        events.append(OracleEvent("stick_start", t, x))
        rel = _release_scan(p, x, t)
        if rel is None or rel[0] >= t_end:
            t = t_end
            emit(t, x, 0.0)
            return 0
        events.append(OracleEvent("stick_release", rel[0], x))
        t = rel[0]
        emit(t, x, 0.0)
        return rel[1]

    if v > 0:
        s = 1
    elif v < 0:
        s = -1
    else:
        s = classify_zero()
        finished = s == 0

    while not finished and t < t_end - 1e-12:
        n_full = int((t_end - t) / dt)
        if n_full == 0:
            x, v = _rk4_step(p, s, t, x, v, t_end - t)
            t = t_end
            emit(t, x, v)
            break
        n = min(chunk, n_full)
        if uniform:
            xs, vs = _uniform_chunk(p, s, t, x, v, n, dt)
        else:
            xs = np.empty(n + 1)
            vs = np.empty(n + 1)
            xs[0], vs[0] = x, v
            for i in range(n):
                xs[i + 1], vs[i + 1] = _rk4_step(p, s, t + i * dt,
                                                 xs[i], vs[i], dt)

        bad = ((vs[1:] * s) <= 0.0) | (xs[1:] > p.r) | (xs[1:] < p.l)
        idx = int(np.argmax(bad)) if bad.any() else -1
        keep = n if idx < 0 else idx
        for i in range(keep):
            emit(t + (i + 1) * dt, float(xs[i + 1]), float(vs[i + 1]))
        if idx < 0:
            t = t + n * dt
            x, v = float(xs[n]), float(vs[n])
            continue

        t0 = t + idx * dt
        x0, v0 = float(xs[idx]), float(vs[idx])
        cand = []
        if xs[idx + 1] > p.r:
            cand.append(("wall", 1, lambda xx, vv: xx - p.r))
        if xs[idx + 1] < p.l:
            cand.append(("wall", -1, lambda xx, vv: xx - p.l))
        if (vs[idx + 1] * s) <= 0.0:
            cand.append(("vzero", 0, lambda xx, vv: vv))
        located = sorted(
            (_bisect_event(p, s, t0, x0, v0, dt, fn) + (kind, wall)
             for kind, wall, fn in cand),
            key=lambda z: z[0])
        te, xe, ve, kind, wall = located[0]

        if kind == "wall":
            xe = p.r if wall > 0 else p.l
            events.append(OracleEvent("impact", te, xe, wall))
            t, x, v = te, xe, -ve
            s = -s
            emit(t, x, v)
        else:
            t, x, v = te, xe, 0.0
            emit(t, x, v)
            s = classify_zero()
            finished = s == 0

    if ts_out[-1] < t_end - 1e-12:
        emit(t_end, x, v)
    return OracleTrajectory(np.array(ts_out), np.array(xs_out),
                            np.array(vs_out), events,
                            PhaseState(xs_out[-1], vs_out[-1], t_end))
