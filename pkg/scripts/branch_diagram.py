"""Trace the symmetric two-impact branch through its saddle-center
collision and write the bifurcation diagram data.

Usage: python scripts/branch_diagram.py [out.csv]
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from vibroimpact import make_params
from vibroimpact.orbits import (continue_in_friction, symmetric_fold_friction,
                                symmetric_orbit)


def main(out="branch_diagram.csv"):
    p = make_params(F=1.0, f=0.01, omega=1.0, l=0.0, r=20.0)
    orbit = symmetric_orbit(p, branch=1)
    res = continue_in_friction(p, orbit, f_min=1e-4, ds=2e-3)
    Path(out).write_text(res.csv())
    print(f"{len(res.points)} branch points -> {out}")
    if res.fold:
        err = abs(res.fold.f_crit - symmetric_fold_friction(p))
        print(f"fold at f = {res.fold.f_crit:.8f} "
              f"(closed form 2F/pi = {symmetric_fold_friction(p):.8f}, "
              f"difference {err:.2e})")
    print(f"termination: {res.termination}")


if __name__ == "__main__":
    main(*sys.argv[1:])
