"""The stroboscopic period map, its Jacobian as a saltation-matrix product,
and the per-point contraction classification.

The Jacobian of the time-T map is assembled from four factor types:

    free flight [t1, t2]   [[1, t2-t1], [0, 1]]           det 1
    sticking episode       [[1, 0], [0, 0]]               det 0
    wall reflection at t*  [[-1, 0], [2 g*/v-, -1]]       det 1
    turning point at t~    [[1, 0], [0, (|g|-f)/(|g|+f)]] det in [0, 1)

with g the local applied force at the event and v- the pre-impact
velocity.  Factors compose chronologically, latest leftmost.  The
reflection entry with the pre-impact velocity is exact for state-
independent forces (differentiating the closed-form flow through the
impact-time condition reproduces it term by term); for the wall-vanishing
law the flight factors come from the integrated variational system and the
event entries use the local force value.

The reported determinant is structural: the product of the factor
determinants, so impacts-only maps give exactly 1 and any sticking gives
exactly 0; turning points contribute their contraction ratio.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import ContractViolation, Params, PhaseState
from .simulator import RunResult, _advance


class MapClass(str, Enum):
    AREA_PRESERVING = "area_preserving"
    CONTRACTING = "contracting"
    SINGULAR = "singular"
    UNDEFINED = "undefined"


DET_TOL = 1e-9


@dataclass(frozen=True)
class SaltationFactor:
    kind: str          # flight | stick | reflection | turning
    matrix: np.ndarray

    @property
    def det(self) -> float:
        if self.kind in ("flight", "reflection"):
            return 1.0
        if self.kind == "stick":
            return 0.0
        return float(self.matrix[1, 1])


@dataclass(frozen=True)
class MapResult:
    input: tuple[float, float]
    output: tuple[float, float]
    t0: float
    k: int
    event_summary: dict
    signature: tuple[str, ...]
    det: float
    undefined: bool
    jacobian: np.ndarray | None = None
    factors: tuple[SaltationFactor, ...] | None = None

    @property
    def classification(self) -> MapClass:
        if self.undefined:
            return MapClass.UNDEFINED
        if abs(self.det - 1.0) <= DET_TOL:
            return MapClass.AREA_PRESERVING
        if abs(self.det) <= DET_TOL:
            return MapClass.SINGULAR
        return MapClass.CONTRACTING

    @property
    def trace(self) -> float:
        if self.jacobian is None:
            raise ContractViolation("map evaluated without a Jacobian")
        return float(self.jacobian[0, 0] + self.jacobian[1, 1])

    def multipliers(self) -> tuple[complex, complex]:
        tr, dt = self.trace, self.det
        disc = tr * tr - 4.0 * dt
        if disc >= 0.0:
            s = math.sqrt(disc)
            return (0.5 * (tr - s), 0.5 * (tr + s))
        s = math.sqrt(-disc)
        return (complex(0.5 * tr, -0.5 * s), complex(0.5 * tr, 0.5 * s))

    def csv_row(self) -> list:
        c = self.event_summary
        return [self.input[0], self.input[1], self.output[0], self.output[1],
                self.det, self.classification.value,
                c["impacts_left"] + c["impacts_right"], c["turnings"],
                c["sticks"], c["grazings"]]


def _result_from_run(res: RunResult, x, v, t0, k, with_jac) -> MapResult:
    jac = None
    factors = None
    if with_jac:
        if res.undefined:
            jac = None
            factors = None
        else:
            m = np.eye(2)
            fs = []
            for kind, mat in res.factors:
                m = mat @ m
                fs.append(SaltationFactor(kind, mat))
            jac = m
            factors = tuple(fs)
    return MapResult(input=(x, v), output=(res.x, res.v), t0=t0, k=k,
                     event_summary=dict(res.counts), signature=res.signature,
                     det=res.det, undefined=res.undefined,
                     jacobian=jac, factors=factors)


def period_map(p: Params, state: tuple[float, float] | PhaseState,
               t0: float = 0.0, k: int = 1, *,
               event_cap: int = 1_000_000) -> MapResult:
    """Advance (x, v) at phase time t0 by k forcing periods."""
    if k < 1:
        raise ContractViolation("k must be >= 1")
    if isinstance(state, PhaseState):
        x, v = state.x, state.v
    else:
        x, v = float(state[0]), float(state[1])
    res = _advance(p, x, v, t0, t0 + k * p.T, record=False, jac=False,
                   event_cap=event_cap)
    return _result_from_run(res, x, v, t0, k, with_jac=False)


def period_map_jacobian(p: Params, state, t0: float = 0.0, k: int = 1, *,
                        event_cap: int = 1_000_000) -> MapResult:
    """Period map with the saltation-product Jacobian attached.

    Grazing or wall-pressed episodes leave the derivative undefined; the
    result carries jacobian=None and classifies as UNDEFINED.
    """
    if k < 1:
        raise ContractViolation("k must be >= 1")
    if isinstance(state, PhaseState):
        x, v = state.x, state.v
    else:
        x, v = float(state[0]), float(state[1])
    res = _advance(p, x, v, t0, t0 + k * p.T, record=False, jac=True,
                   event_cap=event_cap)
    return _result_from_run(res, x, v, t0, k, with_jac=True)


def finite_difference_jacobian(p: Params, state, t0: float = 0.0, k: int = 1,
                               h: float | None = None) -> np.ndarray:
    """Central-difference Jacobian of the period map.

    Refuses when the four probe points do not share one event signature
    (the map is only piecewise smooth); use it away from event-topology
    boundaries.
    """
    if isinstance(state, PhaseState):
        x, v = state.x, state.v
    else:
        x, v = float(state[0]), float(state[1])
    if h is None:
        h = 1e-7 * max(1.0, abs(x), abs(v))
    probes = [(x + h, v), (x - h, v), (x, v + h), (x, v - h)]
    outs = []
    sigs = []
    for px, pv in probes:
        px = min(max(px, p.l), p.r)
        r = period_map(p, (px, pv), t0, k)
        outs.append(r.output)
        sigs.append(r.signature)
    if len(set(sigs)) != 1:
        raise ContractViolation(
            "probe points straddle an event-topology boundary; "
            f"signatures {sorted(set(sigs))}")
    (xp, vp), (xm, vm), (xq, vq), (xr, vr) = outs
    return np.array([[(xp - xm) / (2 * h), (xq - xr) / (2 * h)],
                     [(vp - vm) / (2 * h), (vq - vr) / (2 * h)]])


def reflection_factor(force_value: float, v_pre: float) -> np.ndarray:
    """Saltation matrix of an elastic wall reflection."""
    return np.array([[-1.0, 0.0], [2.0 * force_value / v_pre, -1.0]])


def turning_factor(force_value: float, f: float) -> np.ndarray:
    """Saltation matrix of a turning point."""
    ratio = (abs(force_value) - f) / (abs(force_value) + f)
    return np.array([[1.0, 0.0], [0.0, ratio]])


def flight_factor(dt: float) -> np.ndarray:
    return np.array([[1.0, dt], [0.0, 1.0]])


STICK_FACTOR_MATRIX = np.array([[1.0, 0.0], [0.0, 0.0]])


def results_csv(results: list[MapResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "v", "x_out", "v_out", "det", "classification",
                "impacts", "turnings", "sticks", "grazings"])
    for r in results:
        row = r.csv_row()
        w.writerow([f"{c:.17g}" if isinstance(c, float) else c for c in row])
    return buf.getvalue()
