"""Write gnuplot-ready edge profiles: g_n(u), the thermal delta~(u) and (1/2) erfc(sqrt(2) u).

    python scripts/edge_profiles.py --n 256 --n 1024 --theta 2 --out out/profiles
"""
import argparse
from pathlib import Path

import numpy as np
from scipy.special import erfc

from coulomb2d.edge import DETERMINANTAL, THERMAL, default_u_grid, rescale_profile
from coulomb2d.potential import make_potential
from coulomb2d.thermal import GridConfig, solve_thermal


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, action="append")
    p.add_argument("--theta", type=float, default=2.0)
    p.add_argument("--m", type=int, default=4096)
    p.add_argument("--out", default="out/profiles")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pot = make_potential("ginibre")
    u = default_u_grid()
    for n in args.n or [256, 1024]:
        density, report = solve_thermal(pot, n, args.theta, GridConfig(m=args.m))
        det = rescale_profile(DETERMINANTAL, pot, n, u)
        th = rescale_profile(THERMAL, pot, n, u, theta=args.theta, density=density)
        path = out / f"edge_n{n}_theta{args.theta:g}.dat"
        header = (f"n={n} theta={args.theta:g} converged={report.converged}\n"
                  f"g_n(0)={det.value_at_0:.10f} Dlog g_n(0)={det.laplace_log_at_0:.10f}\n"
                  f"delta~(0)={th.value_at_0:.10f} Dlog delta~(0)={th.laplace_log_at_0:.10f}\n"
                  "u g_n delta_tilde erfc_limit")
        np.savetxt(path, np.column_stack([u, det.values, th.values, 0.5 * erfc(np.sqrt(2) * u)]),
                   header=header, fmt="%.12e")
        print(path)


if __name__ == "__main__":
    main()
