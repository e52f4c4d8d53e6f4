"""Shadow the unstable direction of the saddle fixed point.

Perturbs the saddle of the fast-forcing setup along its unstable
eigenvector and iterates the period map: the trajectory follows the
island boundary and eventually settles on the impact-free attractor.

Usage: python scripts/unstable_manifold.py [out.csv]
"""

import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from vibroimpact import make_params
from vibroimpact.orbits import symmetric_orbit
from vibroimpact.strobemap import period_map, period_map_jacobian


def main(out="unstable_manifold.csv", n_iter=400, eps=1e-6):
    p = make_params(F=1.0, f=0.05, omega=2.0 * math.pi, l=-1.0, r=1.0)
    saddle = symmetric_orbit(p, branch=2)
    res = period_map_jacobian(p, saddle.fixed_state)
    evals, evecs = np.linalg.eig(res.jacobian)
    i_un = int(np.argmax(np.abs(evals)))
    direction = np.real(evecs[:, i_un])
    direction /= np.hypot(*direction)
    print(f"saddle at {saddle.fixed_state}, multipliers {saddle.multipliers}")

    rows = ["iteration,x,v,sticks"]
    for sgn in (+1, -1):
        z = np.array(saddle.fixed_state) + sgn * eps * direction
        z = (float(z[0]), float(z[1]))
        for n in range(n_iter):
            r = period_map(p, z, event_cap=50_000)
            z = r.output
            rows.append(f"{sgn * (n + 1)},{z[0]:.10g},{z[1]:.10g},"
                        f"{r.event_summary['sticks']}")
    Path(out).write_text("\n".join(rows) + "\n")
    print(f"wrote {out} ({2 * n_iter} iterates, both manifold sides)")


if __name__ == "__main__":
    main(*sys.argv[1:])
