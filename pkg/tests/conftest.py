import math

import numpy as np
import pytest

from vibroimpact import make_params


@pytest.fixture
def narrow():
    """Narrow chamber, frictionless: islands + chaotic sea."""
    return make_params(F=1.0, f=0.0, omega=1.0, l=0.0, r=0.8)


@pytest.fixture
def narrow_lowfric():
    """Narrow chamber with small friction: attracting focus appears."""
    return make_params(F=1.0, f=0.005, omega=1.0, l=0.0, r=0.8)


@pytest.fixture
def wide():
    """Wide chamber, unit forcing/frequency (fold study geometry)."""
    return make_params(F=1.0, f=0.3, omega=1.0, l=0.0, r=20.0)


@pytest.fixture
def fast():
    """Fast forcing, unit walls: region decomposition geometry."""
    return make_params(F=1.0, f=0.05, omega=2.0 * math.pi, l=-1.0, r=1.0)


@pytest.fixture
def wall_vanishing():
    return make_params(F=1.0, f=0.1, omega=2.0 * math.pi, l=-1.0, r=1.0,
                       force_law="wall_vanishing")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_valid_symmetric_params(rng, n):
    """Parameter sets whose symmetric two-impact orbits exist and are
    non-sticking on both branches (rejection sampling)."""
    from vibroimpact.orbits import Nonexistence, symmetric_orbit_formula
    out = []
    while len(out) < n:
        F = rng.uniform(0.5, 2.0)
        f = rng.uniform(0.0, 0.6) * F
        omega = rng.uniform(0.5, 3.0)
        R = rng.uniform(0.5, 30.0)
        l = rng.uniform(-5.0, 5.0)
        p = make_params(F=F, f=f, omega=omega, l=l, r=l + R)
        try:
            symmetric_orbit_formula(p, 1)
            symmetric_orbit_formula(p, 2)
        except Nonexistence:
            continue
        out.append(p)
    return out
