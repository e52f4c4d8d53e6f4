"""Periodic orbits: the closed-form symmetric two-impact family, general
orbit location by Newton on the period map, pseudo-arclength continuation
in the friction parameter with fold detection, and the tent-map lift
conjugacy check.

Symmetric two-impact orbits bounce wall to wall in exactly half an orbit
period.  For an odd multiple m of the forcing period, departing the left
wall at phase psi with speed v0 and requiring (i) equal departure and
arrival speeds and (ii) travel distance R gives

    sin(psi) = -m pi f / (2 F),
    v0 = (omega / (m pi)) (R - (2 F / omega^2) cos(psi)),

with the two sign choices of cos(psi) forming the saddle-center pair that
collides when m pi f = 2 F.  For m = 1 these reduce to the classic
(psi, tau, C, D) coefficient form, exposed as SymmetricOrbitFormula.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import (ContractViolation, ForceLaw, Params, PhaseState, TWO_PI,
                    applied_force)
from .flight import SinusoidArc
from .simulator import FlightSegment, simulate
from .strobemap import MapResult, period_map, period_map_jacobian
from .strobemap import period_map_jacobian as _pmj


class OrbitError(RuntimeError):
    pass


class Nonexistence(OrbitError):
    """Requested closed-form orbit does not exist; .reason explains why."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


class OrbitType(str, Enum):
    CENTER = "center"
    SADDLE = "saddle"
    ATTRACTING = "attracting"      # node or focus, |multipliers| < 1
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class OrbitRecord:
    fixed_state: tuple[float, float]
    t0: float
    k: int
    multipliers: tuple[complex, complex]
    trace: float
    det: float
    orbit_type: OrbitType
    signature: tuple[str, ...]
    residual: float
    params: Params


@dataclass(frozen=True)
class SymmetricOrbitFormula:
    """Coefficient set of the closed-form symmetric orbit (m = 1 prints the
    classic psi/tau/C/D values; general odd m keeps the same anchors)."""

    branch: int                 # 1 (cos psi < 0) or 2 (cos psi > 0)
    m: int                      # odd period multiple
    psi: float                  # left-wall departure phase
    tau: float                  # right-wall impact phase in [0, 2 pi)
    C: float                    # linear flight coefficient, = v0 - (F/w) sin psi
    D: float                    # constant flight coefficient, = l + (F/w^2) cos psi
    v0: float                   # departure speed off the left wall
    min_flight_velocity: float  # minimum of v over the wall-to-wall flight


def classify_multipliers(trace: float, det: float,
                         det_tol: float = 1e-6) -> OrbitType:
    if abs(det - 1.0) <= det_tol:
        if abs(abs(trace) - 2.0) <= 1e-9:
            return OrbitType.DEGENERATE
        return OrbitType.CENTER if abs(trace) < 2.0 else OrbitType.SADDLE
    if abs(det) <= det_tol and abs(trace) < 1.0:
        return OrbitType.DEGENERATE
    lam1, lam2 = _eig(trace, det)
    if max(abs(lam1), abs(lam2)) < 1.0:
        return OrbitType.ATTRACTING
    return OrbitType.DEGENERATE


def _eig(tr: float, dt: float) -> tuple[complex, complex]:
    disc = tr * tr - 4.0 * dt
    if disc >= 0.0:
        s = math.sqrt(disc)
        return (0.5 * (tr - s), 0.5 * (tr + s))
    s = math.sqrt(-disc)
    return (complex(0.5 * tr, -0.5 * s), complex(0.5 * tr, 0.5 * s))


# ---------------------------------------------------------------------------
# closed-form symmetric orbits
# ---------------------------------------------------------------------------

def symmetric_orbit_formula(p: Params, branch: int, m: int = 1) -> SymmetricOrbitFormula:
    """Coefficients of the symmetric two-impact orbit, or Nonexistence."""
    if p.force_law is not ForceLaw.UNIFORM:
        raise ContractViolation("symmetric orbits are defined for the uniform law")
    if branch not in (1, 2):
        raise ContractViolation("branch must be 1 or 2")
    if m < 1 or m % 2 == 0:
        raise ContractViolation("period multiple m must be odd")
    if p.F <= 0.0:
        raise Nonexistence("fold passed", "zero forcing amplitude")
    arg = m * math.pi * p.f / (2.0 * p.F)
    if arg > 1.0:
        raise Nonexistence("fold passed",
                           f"m pi f / (2F) = {arg:.6g} > 1")
    sigma = math.asin(arg)
    psi = math.pi + sigma if branch == 1 else -sigma
    w = p.omega
    cos_psi = math.cos(psi)
    v0 = (w / (m * math.pi)) * (p.R - (2.0 * p.F / (w * w)) * cos_psi)
    vmin = _min_flight_velocity(p, psi, v0, m)
    if v0 <= 0.0 or vmin <= 0.0:
        raise Nonexistence("sticking",
                           f"minimum flight velocity {min(v0, vmin):.6g} <= 0")
    C = v0 - (p.F / w) * math.sin(psi)
    D = p.l + (p.F / (w * w)) * cos_psi
    tau = math.fmod(psi + m * math.pi, TWO_PI)
    if tau < 0.0:
        tau += TWO_PI
    return SymmetricOrbitFormula(branch=branch, m=m, psi=psi, tau=tau, C=C,
                                 D=D, v0=v0, min_flight_velocity=vmin)


def _min_flight_velocity(p: Params, psi: float, v0: float, m: int) -> float:
    """Minimum of v(t) over the rightward flight window, taken over the
    endpoints and the interior stationary points (phases with
    cos = f/F)."""
    w = p.omega

    def vel(th):  # th = omega t, flight departs at phase psi
        return v0 + (p.F / w) * (math.sin(th) - math.sin(psi)) \
            - (p.f / w) * (th - psi)

    cands = [psi, psi + m * math.pi]
    if p.F > 0.0 and p.f / p.F <= 1.0:
        alpha = math.acos(p.f / p.F)
        for base in (alpha, -alpha):
            n0 = math.floor((psi - base) / TWO_PI)
            k = n0
            while True:
                th = base + TWO_PI * k
                if th > psi + m * math.pi:
                    break
                if th > psi:
                    cands.append(th)
                k += 1
    return min(vel(th) for th in cands)


def symmetric_orbit_state(p: Params, formula: SymmetricOrbitFormula,
                          t: float) -> PhaseState:
    """Evaluate the closed-form orbit at absolute time t.

    The rightward flight anchored at (l, v0) covers phase offsets
    [0, m pi) from psi; the leftward half follows by the antisymmetry
    x(t + m pi / w) = -x(t) + r + l."""
    w = p.omega
    m = formula.m
    u = math.fmod(w * t - formula.psi, 2.0 * m * math.pi)
    if u < 0.0:
        u += 2.0 * m * math.pi
    mirror = u >= m * math.pi
    if mirror:
        u -= m * math.pi
    te = t - (m * math.pi / w if mirror else 0.0)  # time on the rightward pass
    arc = SinusoidArc(t0=te - u / w, x0=p.l, v0=formula.v0, sign=1,
                      a_cos=p.F, a_k=-p.f, omega=w)
    x, v = arc.x(te), arc.v(te)
    if mirror:
        return PhaseState(p.r + p.l - x, -v, t)
    return PhaseState(x, v, t)


def symmetric_orbit(p: Params, branch: int, m: int = 1) -> OrbitRecord:
    """Closed-form symmetric orbit as an OrbitRecord at t = 0, with
    multipliers from the saltation-product Jacobian."""
    formula = symmetric_orbit_formula(p, branch, m)
    st = symmetric_orbit_state(p, formula, 0.0)
    res = period_map_jacobian(p, (st.x, st.v), 0.0, m)
    lam = res.multipliers()
    tr = res.trace
    rnorm = math.hypot(res.output[0] - st.x, res.output[1] - st.v)
    return OrbitRecord(fixed_state=(st.x, st.v), t0=0.0, k=m,
                       multipliers=lam, trace=tr, det=res.det,
                       orbit_type=classify_multipliers(tr, res.det),
                       signature=res.signature, residual=rnorm, params=p)


def nonsticking_margin(p: Params) -> float:
    """Closed-form non-sticking margin of the symmetric m = 1 family:

        sqrt(4F^2 - pi^2 f^2) - pi sqrt(F^2 - f^2)
        + pi f (asin(pi f / 2F) - asin(f / F)) + R omega^2

    positive iff the slower minimum of the flight velocity is positive
    (the margin equals pi omega times that minimum)."""
    if not (p.f < p.F):
        raise ContractViolation("margin requires f < F")
    if p.f / p.F > 2.0 / math.pi:
        raise ContractViolation("margin requires f/F <= 2/pi")
    F, f = p.F, p.f
    return (math.sqrt(4.0 * F * F - math.pi ** 2 * f * f)
            - math.pi * math.sqrt(F * F - f * f)
            + math.pi * f * (math.asin(math.pi * f / (2.0 * F))
                             - math.asin(f / F))
            + p.R * p.omega ** 2)


def symmetric_fold_friction(p: Params, m: int = 1) -> float:
    """Friction value where the two symmetric branches collide."""
    return 2.0 * p.F / (m * math.pi)


# ---------------------------------------------------------------------------
# Newton solver on the period map
# ---------------------------------------------------------------------------

def find_periodic(p: Params, guess: tuple[float, float], k: int = 1,
                  t0: float = 0.0, *, tol: float = 1e-10,
                  max_iter: int = 40, event_cap: int = 1_000_000) -> OrbitRecord:
    """Damped Newton solve of period_map^k(z) = z.

    Steps that change the trajectory's event signature are rejected and
    halved: the map is only piecewise smooth and the iteration must stay
    inside one smooth piece unless the residual still improves.
    """
    def period_map_jacobian(pp, zz, tt, kk):  # shadow with the cap applied
        return _pmj(pp, zz, tt, kk, event_cap=event_cap)

    z = np.array([min(max(guess[0], p.l), p.r), guess[1]], dtype=float)
    res = period_map_jacobian(p, (z[0], z[1]), t0, k)
    sig = res.signature
    rvec = np.array(res.output) - z
    rnorm = float(np.hypot(*rvec))
    for _ in range(max_iter):
        if rnorm <= tol:
            break
        if res.jacobian is None:
            raise OrbitError("map derivative undefined along the iteration "
                             "(grazing trajectory)")
        A = res.jacobian - np.eye(2)
        try:
            step = np.linalg.solve(A, -rvec)
        except np.linalg.LinAlgError:
            raise OrbitError("singular Newton system (fold or stick)")
        lam = 1.0
        while True:
            z_try = z + lam * step
            z_try[0] = min(max(z_try[0], p.l), p.r)
            try:
                res_try = period_map_jacobian(p, (z_try[0], z_try[1]), t0, k)
            except Exception:
                res_try = None
            if res_try is not None:
                r_try = np.array(res_try.output) - z_try
                ok_sig = res_try.signature == sig
                better = float(np.hypot(*r_try)) < rnorm
                if ok_sig or better:
                    z, res, rvec = z_try, res_try, r_try
                    rnorm = float(np.hypot(*rvec))
                    sig = res.signature
                    break
            lam *= 0.5
            if lam < 2.0 ** -24:
                raise OrbitError("no periodic orbit found: step damping "
                                 "exhausted (event signature keeps changing)")
    else:
        raise OrbitError(f"no periodic orbit found: residual {rnorm:.3g} "
                         f"after {max_iter} iterations")
    if res.jacobian is None:
        raise OrbitError("converged point has undefined derivative")
    tr = res.trace
    return OrbitRecord(fixed_state=(float(z[0]), float(z[1])), t0=t0, k=k,
                       multipliers=res.multipliers(), trace=tr, det=res.det,
                       orbit_type=classify_multipliers(tr, res.det),
                       signature=res.signature, residual=rnorm, params=p)


# ---------------------------------------------------------------------------
# pseudo-arclength continuation in f
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BranchPoint:
    f: float
    state: tuple[float, float]
    trace: float
    det: float
    orbit_type: OrbitType
    signature: tuple[str, ...]


@dataclass(frozen=True)
class FoldReport:
    f_crit: float
    state: tuple[float, float]


@dataclass
class ContinuationResult:
    points: list[BranchPoint]
    fold: FoldReport | None
    termination: str     # "range end" | "fold refined" | "sticking boundary" | ...

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["f", "x0", "v0", "tr", "det", "type"])
        for pt in self.points:
            w.writerow([f"{pt.f:.17g}", f"{pt.state[0]:.17g}",
                        f"{pt.state[1]:.17g}", f"{pt.trace:.17g}",
                        f"{pt.det:.17g}", pt.orbit_type.value])
        return buf.getvalue()


def _df_map(p: Params, z, t0, k, f, hf) -> np.ndarray:
    """Central difference of the period map in the friction parameter."""
    lo = max(0.0, f - hf)
    hi = f + hf
    r_hi = period_map(p.replace_friction(hi), (z[0], z[1]), t0, k)
    r_lo = period_map(p.replace_friction(lo), (z[0], z[1]), t0, k)
    return (np.array(r_hi.output) - np.array(r_lo.output)) / (hi - lo)


def continue_in_friction(p: Params, orbit: OrbitRecord, *,
                         f_min: float = 0.0, f_max: float | None = None,
                         k: int | None = None, direction: int = +1,
                         ds: float = 1e-3, ds_min: float = 1e-7,
                         ds_max: float = 2e-2, max_points: int = 5000,
                         tol: float = 1e-10) -> ContinuationResult:
    """Pseudo-arclength continuation of a fixed point of the k-period map
    in the friction parameter f.

    Detects folds by a sign reversal of the f-component of the branch
    tangent (refined by shrinking steps across the reversal); terminates
    with "sticking boundary" when the orbit's event signature acquires
    sticking or grazing, and at the range ends otherwise.
    """
    if k is None:
        k = orbit.k
    if f_max is None:
        f_max = symmetric_fold_friction(p) * 1.05
    t0 = orbit.t0
    f = p.f
    y = np.array([orbit.fixed_state[0], orbit.fixed_state[1], f])
    base_sig = orbit.signature

    def eval_at(y):
        pp = p.replace_friction(max(y[2], 0.0))
        return pp, period_map_jacobian(pp, (y[0], y[1]), t0, k)

    def corrector(y_pred, tangent):
        y_c = y_pred.copy()
        if y_c[2] < 0.0:
            y_c[2] = 0.0
        for _ in range(25):
            if not (p.l - 1e-9 <= y_c[0] <= p.r + 1e-9):
                return None, None
            y_c[0] = min(max(y_c[0], p.l), p.r)
            try:
                pp, res = eval_at(y_c)
            except Exception:
                return None, None
            if res.jacobian is None:
                return None, None
            g = np.array(res.output) - y_c[:2]
            arc = float(tangent @ (y_c - y_pred))
            rhs = -np.array([g[0], g[1], arc])
            if max(abs(g[0]), abs(g[1]), abs(arc)) < tol:
                return y_c, res
            gf = _df_map(pp, y_c[:2], t0, k, y_c[2],
                         1e-7 * max(1.0, y_c[2]))
            A = np.zeros((3, 3))
            A[:2, :2] = res.jacobian - np.eye(2)
            A[:2, 2] = gf
            A[2, :] = tangent
            try:
                dy = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError:
                return None, None
            y_c = y_c + dy
            if y_c[2] < -1e-12:
                return None, None
            y_c[2] = max(y_c[2], 0.0)
        return None, None

    def tangent_at(y, res, prev_tangent):
        pp = p.replace_friction(y[2])
        gf = _df_map(pp, y[:2], t0, k, y[2], 1e-7 * max(1.0, y[2]))
        A = np.zeros((3, 3))
        A[:2, :2] = res.jacobian - np.eye(2)
        A[:2, 2] = gf
        A[2, :] = prev_tangent
        try:
            tau = np.linalg.solve(A, np.array([0.0, 0.0, 1.0]))
        except np.linalg.LinAlgError:
            return prev_tangent
        n = np.linalg.norm(tau)
        if n == 0.0:
            return prev_tangent
        tau = tau / n
        if float(tau @ prev_tangent) < 0.0:
            tau = -tau
        return tau

    pp, res = eval_at(y)
    if res.jacobian is None:
        raise OrbitError("starting orbit has undefined derivative")
    points = [_branch_point(y, res)]
    tau = tangent_at(y, res, np.array([0.0, 0.0, float(direction)]))

    fold: FoldReport | None = None
    termination = "max points"
    step = ds
    n_ok = 0
    while len(points) < max_points:
        advanced = False
        while step >= ds_min:
            y_pred = y + step * tau
            y_new, res_new = corrector(y_pred, tau)
            if y_new is not None and res_new.signature == base_sig:
                advanced = True
                break
            if y_new is not None and ("S" in res_new.signature
                                      or "G" in res_new.signature):
                termination = "sticking boundary"
                return ContinuationResult(points, fold, termination)
            step *= 0.5
        if not advanced:
            termination = "step collapse"
            last = points[-1]
            if last.signature and all(c in "RL" for c in last.signature):
                pp = p.replace_friction(last.f)
                vmin = _orbit_min_speed(pp, last.state, t0, k)
                if vmin < 0.05 * max(1.0, abs(last.state[1])):
                    termination = "sticking boundary"
            break
        tau_new = tangent_at(y_new, res_new, tau)
        if fold is None and tau[2] > 0.0 and tau_new[2] < 0.0:
            fold = _refine_fold(y, tau, y_new, corrector, tangent_at)
        y, res, tau = y_new, res_new, tau_new
        points.append(_branch_point(y, res))
        impact_only = all(c in "RL" for c in res.signature)
        if impact_only and res.signature:
            pp = p.replace_friction(y[2])
            if _orbit_min_speed(pp, y[:2], t0, k) < 1e-3:
                termination = "sticking boundary"
                break
        n_ok += 1
        if n_ok >= 3:
            step = min(step * 1.4, ds_max)
            n_ok = 0
        if y[2] > f_max and tau[2] > 0.0:
            termination = "range end (f_max)"
            break
        if y[2] < f_min + 1e-12 and tau[2] < 0.0:
            termination = "range end (f_min)"
            break
    if fold is not None and termination.startswith("range end (f_min)"):
        termination = "fold refined"
    return ContinuationResult(points, fold, termination)


def _branch_point(y, res: MapResult) -> BranchPoint:
    return BranchPoint(f=float(y[2]), state=(float(y[0]), float(y[1])),
                       trace=res.trace, det=res.det,
                       orbit_type=classify_multipliers(res.trace, res.det),
                       signature=res.signature)


def _orbit_min_speed(p: Params, state, t0: float, k: int) -> float:
    """Minimum |v| along the orbit's flight arcs (dense sampling)."""
    traj = simulate(p, PhaseState(state[0], state[1], t0), k * p.T)
    vmin = math.inf
    for seg in traj.segments:
        if not isinstance(seg, FlightSegment):
            return 0.0
        n = 32
        for i in range(n + 1):
            t = seg.t0 + (seg.t1 - seg.t0) * i / n
            vmin = min(vmin, abs(seg.arc.v(t)))
    return vmin


def _refine_fold(y_a, tau_a, y_b, corrector, tangent_at) -> FoldReport:
    """Bisect the arclength across a tangent reversal; near the fold the
    branch is quadratic in arclength so the parameter error shrinks like
    the square of the bracket."""
    a, b = y_a.copy(), y_b.copy()
    tau = tau_a.copy()
    best = max(a[2], b[2])
    best_state = (a[0], a[1]) if a[2] >= b[2] else (b[0], b[1])
    for _ in range(60):
        mid_pred = 0.5 * (a + b)
        y_m, res_m = corrector(mid_pred, tau)
        if y_m is None:
            break
        if y_m[2] > best:
            best = y_m[2]
            best_state = (y_m[0], y_m[1])
        tau_m = tangent_at(y_m, res_m, tau)
        if tau_m[2] > 0.0:
            a = y_m
        else:
            b = y_m
        if np.linalg.norm(a - b) < 1e-9:
            break
    return FoldReport(f_crit=float(best), state=(float(best_state[0]),
                                                 float(best_state[1])))


# ---------------------------------------------------------------------------
# tent-map lift conjugacy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConjugacyReport:
    applicable: bool
    reason: str
    max_defect: float | None
    n_samples: int


def tent_value(q: float) -> float:
    """2-periodic tent map: q on [0,1), 2-q on [1,2)."""
    u = math.fmod(q, 2.0)
    if u < 0.0:
        u += 2.0
    return u if u < 1.0 else 2.0 - u


def lift_conjugacy_check(p: Params, initial: PhaseState, duration: float,
                         n_samples: int = 1000) -> ConjugacyReport:
    """Verify x(t) = R * W(q(t)) + l against the unfolded oscillator.

    The unfolded coordinate q obeys q'' = W'(q) F cos(omega t) / R
    - sgn(q') f / R between corners of the tent map W; on trajectories
    whose velocity never vanishes, sgn(q') is constant and the friction
    term is a constant tilt, which is what makes the unfolded system
    conservative.  Any velocity zero under f > 0 (sticking or turning)
    breaks the correspondence and is reported as not applicable.
    """
    if p.force_law is not ForceLaw.UNIFORM:
        raise ContractViolation("the tent-map lift is defined for the uniform law")
    traj = simulate(p, initial, duration)
    sig = traj.event_signature()
    if "S" in sig or "G" in sig:
        return ConjugacyReport(False, "trajectory sticks", None, 0)
    if p.f > 0.0 and ("T" in sig or initial.v == 0.0):
        return ConjugacyReport(False, "velocity vanishes (friction direction flips)",
                               None, 0)
    if initial.v == 0.0 and p.f == 0.0:
        g0 = applied_force(p, initial.x, initial.t)
        if g0 == 0.0:
            return ConjugacyReport(False, "degenerate rest start", None, 0)

    # pull the initial state back to the monotone branch of the tent map
    if initial.v > 0.0 or (initial.v == 0.0 and
                           applied_force(p, initial.x, initial.t) > 0.0):
        q = (initial.x - p.l) / p.R
        qdot = initial.v / p.R
    else:
        q = 2.0 - (initial.x - p.l) / p.R
        qdot = -initial.v / p.R

    t = initial.t
    t_end = initial.t + duration
    ts = np.linspace(initial.t, t_end, n_samples)
    qs = np.empty(n_samples)
    filled = 0

    while t < t_end - 1e-14:
        cell = math.floor(q + 1e-13) if qdot >= 0.0 else math.ceil(q - 1e-13) - 1
        wprime = 1.0 if (cell % 2 == 0) else -1.0
        if qdot != 0.0:
            direction = 1 if qdot > 0.0 else -1
        else:
            acc0 = wprime * (p.F / p.R) * math.cos(p.omega * t)
            if acc0 == 0.0:
                return ConjugacyReport(False, "degenerate tangency", None, 0)
            direction = 1 if acc0 > 0.0 else -1
        sgn = float(direction) if p.f > 0.0 else 0.0
        arc = SinusoidArc(t0=t, x0=q, v0=qdot, sign=direction,
                          a_cos=wprime * p.F / p.R,
                          a_k=-sgn * p.f / p.R, omega=p.omega)
        t_v = arc.first_velocity_zero(t_end)
        t_stop = t_end if t_v is None else min(t_v, t_end)
        lo, hi = float(cell), float(cell + 1)
        target = hi if direction > 0 else lo
        t_x = arc.wall_crossing(target, t, t_stop)
        te = min(x for x in (t_x, t_v, t_end) if x is not None)
        while filled < n_samples and ts[filled] <= te + 1e-14:
            qs[filled] = arc.x(min(ts[filled], te))
            filled += 1
        if te >= t_end - 1e-14:
            t = t_end
            break
        if t_x is not None and te == t_x:
            q, qdot, t = target, arc.v(te), te   # corner: W' flips, state continuous
        else:
            # velocity zero in the lift
            if p.f > 0.0:
                return ConjugacyReport(False,
                                       "velocity vanishes (friction direction flips)",
                                       None, 0)
            q, qdot, t = arc.x(te), 0.0, te
            if arc.accel(te) == 0.0:
                return ConjugacyReport(False, "degenerate tangency", None, 0)

    while filled < n_samples:
        qs[filled] = q
        filled += 1

    defect = 0.0
    for tt, qq in zip(ts, qs):
        s = traj.state_at(float(tt))
        defect = max(defect, abs(s.x - (p.R * tent_value(qq) + p.l)))
    return ConjugacyReport(True, "", defect, n_samples)
