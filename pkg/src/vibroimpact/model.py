"""Domain types, parameter validation and the force-law abstraction.

Everything downstream (flight arcs, the event-driven simulator, the
stroboscopic map, orbit solvers) works on the immutable ``Params`` object
produced by :func:`validate_params`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum


TWO_PI = 2.0 * math.pi


class ForceLaw(str, Enum):
    """Spatial shape of the periodic driving force."""

    UNIFORM = "uniform"                  # F cos(omega t), independent of x
    WALL_VANISHING = "wall_vanishing"    # F cos(pi x / 2) cos(omega t), walls at +-1


class ParameterError(ValueError):
    """Raised for physically inadmissible oscillator parameters."""


class ContractViolation(RuntimeError):
    """Raised when an operation is called outside its stated preconditions."""


@dataclass(frozen=True)
class OscillatorParams:
    """Raw physical parameters of the forced impact oscillator.

    F      : forcing amplitude (force per unit mass), >= 0
    f      : kinetic friction magnitude (same units), >= 0
    omega  : forcing angular frequency, > 0
    l, r   : left / right wall positions, r > l
    force_law : spatial force law selector
    """

    F: float
    f: float
    omega: float
    l: float
    r: float
    force_law: ForceLaw = ForceLaw.UNIFORM


@dataclass(frozen=True)
class Params:
    """Validated parameters with derived quantities cached.

    ``globally_sticking`` flags configurations where friction can hold the
    particle at rest everywhere for all phases (uniform law with f >= F);
    such runs are legal but every velocity-zero event is a permanent stop.
    """

    F: float
    f: float
    omega: float
    l: float
    r: float
    force_law: ForceLaw
    R: float
    T: float
    globally_sticking: bool

    def replace_friction(self, f: float) -> "Params":
        return validate_params(OscillatorParams(self.F, f, self.omega, self.l,
                                                self.r, self.force_law))


# Spec alias: the validated-parameter type.
ValidatedParams = Params


@dataclass(frozen=True)
class PhaseState:
    """A point of the extended phase space: position, velocity, absolute time."""

    x: float
    v: float
    t: float = 0.0


@dataclass(frozen=True)
class ForceSample:
    """Instantaneous applied force, plus the rest-band edge for the
    wall-vanishing law (None under the uniform law)."""

    value: float
    wall_vanishing_eta: float | None


@dataclass(frozen=True)
class StickingBand:
    """Equilibrium set of the wall-vanishing law.

    ``eta`` is the inner edge of the band: states with v = 0 and |x| >= eta
    stay at rest forever because the force envelope F cos(pi x / 2) never
    exceeds friction there.  ``intervals`` lists the closed x-intervals.
    """

    eta: float
    intervals: tuple[tuple[float, float], ...]

    def contains(self, x: float) -> bool:
        return any(a <= x <= b for a, b in self.intervals)


def validate_params(p: OscillatorParams) -> Params:
    """Check admissibility and cache derived quantities R and T."""
    if not all(math.isfinite(v) for v in (p.F, p.f, p.omega, p.l, p.r)):
        raise ParameterError("parameters must be finite")
    if p.r <= p.l:
        raise ParameterError(f"need r > l, got l={p.l}, r={p.r}")
    if p.omega <= 0.0:
        raise ParameterError(f"need omega > 0, got {p.omega}")
    if p.F < 0.0 or p.f < 0.0:
        raise ParameterError("F and f must be non-negative")
    law = ForceLaw(p.force_law)
    if law is ForceLaw.WALL_VANISHING and not (p.l == -1.0 and p.r == 1.0):
        raise ParameterError("wall-vanishing law requires walls at l=-1, r=1")
    return Params(
        F=float(p.F), f=float(p.f), omega=float(p.omega),
        l=float(p.l), r=float(p.r), force_law=law,
        R=float(p.r - p.l), T=TWO_PI / float(p.omega),
        globally_sticking=(p.f >= p.F),
    )


def make_params(F: float, f: float, omega: float, l: float, r: float,
                force_law: ForceLaw | str = ForceLaw.UNIFORM) -> Params:
    """Convenience constructor: build and validate in one call."""
    return validate_params(OscillatorParams(F, f, omega, l, r, ForceLaw(force_law)))


def spatial_envelope(p: Params, x: float) -> float:
    """Force amplitude at position x (the factor multiplying cos(omega t))."""
    if p.force_law is ForceLaw.UNIFORM:
        return p.F
    return p.F * math.cos(0.5 * math.pi * x)


def applied_force(p: Params, x: float, t: float) -> float:
    """External force at (x, t) under the selected law."""
    return spatial_envelope(p, x) * math.cos(p.omega * t)


def sample_force(p: Params, x: float, t: float) -> ForceSample:
    eta = None
    if p.force_law is ForceLaw.WALL_VANISHING and p.F > 0.0:
        eta = sticking_band(p).eta if p.f < p.F else 0.0
    return ForceSample(value=applied_force(p, x, t), wall_vanishing_eta=eta)


def sticking_band(p: Params) -> StickingBand:
    """Rest band of the wall-vanishing law.

    The inner edge eta solves F cos(pi eta / 2) = f, i.e.
    eta = (2/pi) arccos(f/F); friction dominates the force envelope on
    [-1, -eta] and [eta, 1].  With f >= F the whole interval is at rest
    (eta = 0); the band is undefined for the uniform law.
    """
    if p.force_law is not ForceLaw.WALL_VANISHING:
        raise ParameterError("sticking band is defined for the wall-vanishing law only")
    if p.f >= p.F:
        return StickingBand(eta=0.0, intervals=((-1.0, 1.0),))
    eta = (2.0 / math.pi) * math.acos(p.f / p.F)
    return StickingBand(eta=eta, intervals=((-1.0, -eta), (eta, 1.0)))


# ---------------------------------------------------------------------------
# serialization: flat key/value text and JSON
# ---------------------------------------------------------------------------

_PARAM_KEYS = ("F", "f", "omega", "l", "r", "force_law")


def params_to_dict(p: Params) -> dict:
    return {"F": p.F, "f": p.f, "omega": p.omega, "l": p.l, "r": p.r,
            "force_law": p.force_law.value}


def params_from_dict(d: dict) -> Params:
    missing = [k for k in ("F", "f", "omega", "l", "r") if k not in d]
    if missing:
        raise ParameterError(f"missing parameter keys: {missing}")
    law = d.get("force_law", ForceLaw.UNIFORM.value)
    try:
        raw = OscillatorParams(float(d["F"]), float(d["f"]), float(d["omega"]),
                               float(d["l"]), float(d["r"]), ForceLaw(str(law)))
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"malformed parameters: {exc}") from exc
    return validate_params(raw)


def params_to_json(p: Params) -> str:
    return json.dumps(params_to_dict(p), sort_keys=True)


def params_from_json(text: str) -> Params:
    return params_from_dict(json.loads(text))


def params_to_text(p: Params) -> str:
    """Flat diff-friendly ``key = value`` form."""
    d = params_to_dict(p)
    return "".join(f"{k} = {d[k]}\n" for k in _PARAM_KEYS)


def params_from_text(text: str) -> Params:
    d: dict[str, str] = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"malformed config line: {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        d[k] = v
    return params_from_dict(d)
