"""Command-line front end: ``coulomb2d {equilibrium,thermal,onepoint,fluct,edge,compare}``.

Exit codes: 0 success, 1 numeric failure, 2 config error, 3 non-convergence.
Errors go to stderr as one JSON line.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import config as cfgmod
from .config import RunConfig
from .determinantal import ginibre_moment, one_point_function, radial_moment
from .edge import (
    DETERMINANTAL,
    THERMAL,
    discrepancy_norm,
    edge_identity_gap,
    pointwise_rescaled_residual,
    rescale_profile,
    theta_sweep,
)
from .errors import ConfigError, ConvergenceError, DomainError, PreconditionError
from .fluct import bulk_coefficients, expansion_compare, fluctuation_correction, make_test_function
from .potential import (
    droplet_radius,
    equilibrium_density,
    log_laplacian,
    make_potential,
    normal_derivative_gap,
    poisson_modification,
)
from .thermal import el_defect, solve_thermal

log = logging.getLogger("coulomb2d")

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG, EXIT_NONCONVERGED = 0, 1, 2, 3


class Emitter:
    """Writes CSV/JSON outputs with a provenance block; no timestamps, so reruns are byte-identical."""

    def __init__(self, cfg: RunConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.out = Path(cfg.output.dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.fmt = cfg.output.format
        self.written: list[str] = []

    def provenance(self) -> dict:
        return {
            "command": self.command,
            "config_sha256": cfgmod.config_hash(self.cfg),
            "versions": {"coulomb2d": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
            "tolerances": {"solver.tol": self.cfg.solver.tol, "grid.m": self.cfg.grid.m,
                           "grid.rmax_headroom": self.cfg.grid.rmax_headroom},
        }

    def table(self, name: str, columns: dict[str, np.ndarray]) -> dict:
        cols = {k: np.asarray(v, dtype=float).tolist() for k, v in columns.items()}
        if self.fmt in ("csv", "both"):
            path = self.out / f"{name}.csv"
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(list(cols))
                for row in zip(*cols.values()):
                    w.writerow([repr(float(x)) for x in row])
            self._json(f"{name}.provenance", {"file": path.name, "provenance": self.provenance()})
            self.written.append(path.name)
        return cols

    def summary(self, name: str, payload: dict) -> None:
        self._json(name, {**payload, "provenance": self.provenance()})

    def _json(self, name, payload):
        path = self.out / f"{name}.json"
        path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
        self.written.append(path.name)

    def arrays(self, cols: dict) -> dict:
        """Arrays embedded in the JSON summary only when JSON output is requested."""
        return cols if self.fmt in ("json", "both") else {}


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _potential(cfg: RunConfig):
    return make_potential(cfg.potential.name, **cfg.potential.params)


def cmd_equilibrium(cfg: RunConfig) -> int:
    em = Emitter(cfg, "equilibrium")
    pot = _potential(cfg)
    drop = droplet_radius(pot)
    rho0 = equilibrium_density(pot, drop)
    r = np.linspace(0.0, 2.0 * drop.radius, 401)
    # L is only defined where Delta Q > 0 (r^4 vanishes at the origin)
    ok = np.asarray(pot.lap_derivs(r)[0]) > 0
    L = np.full(r.shape, np.nan)
    LS = np.full(r.shape, np.nan)
    L[ok] = log_laplacian(pot, r[ok])
    LS[ok] = poisson_modification(pot, drop, r[ok])
    cols = em.table("equilibrium", {"r": r, "rho0": rho0(r) * (r <= drop.radius), "L": L, "L_S": LS})
    summary = {
        "potential": cfg.potential.name,
        "params": cfg.potential.params,
        "droplet_radius": drop.radius,
        "equilibrium_mass": drop.mass,
        "grid_mass": rho0.mass(),
        "L_at_R": float(log_laplacian(pot, drop.radius)),
        "normal_derivative_gap": normal_derivative_gap(pot, drop),
        **em.arrays(cols),
    }
    em.summary("equilibrium", summary)
    print(f"droplet_radius={drop.radius!r} mass={drop.mass!r}")
    return EXIT_OK


def cmd_thermal(cfg: RunConfig) -> int:
    em = Emitter(cfg, "thermal")
    pot = _potential(cfg)
    theta = cfg.effective_theta()
    runs = []
    status = EXIT_OK
    for n in cfg.n:
        density, report = solve_thermal(pot, n, theta, cfg.grid, cfg.solver)
        defect = el_defect(density, pot, n, theta, report.lambda_)
        cols = em.table(f"thermal_n{n}", {
            "r": density.r, "delta": density.values, "log_delta": density.log_values, "el_defect": defect,
        })
        runs.append({"n": n, "theta": theta, "report": report, "center": float(density.values[0]),
                     "mass": density.mass(), **em.arrays(cols)})
        print(f"n={n} theta={theta!r} converged={report.converged} residual={report.final_residual:.3e} "
              f"delta(0)={density.values[0]!r}")
        if not report.converged:
            status = EXIT_NONCONVERGED
    em.summary("thermal", {"potential": cfg.potential.name, "runs": runs, "partial": status != EXIT_OK})
    return status


def cmd_onepoint(cfg: RunConfig) -> int:
    if cfg.beta_star != 1.0:
        raise PreconditionError("one-point functions are exact only at beta* = 1")
    em = Emitter(cfg, "onepoint")
    pot = _potential(cfg)
    drop = droplet_radius(pot)
    runs = []
    for n in cfg.n:
        R = one_point_function(pot, n)
        r = np.linspace(0.0, drop.radius + 6.0 / math.sqrt(n), 401)
        vals = R(r)
        cols = em.table(f"onepoint_n{n}", {"r": r, "R_n": vals, "g_n": vals / n})
        mass = radial_moment(R, lambda s: 1.0)
        runs.append({"n": n, "R_n_at_0": float(R(0.0)), "R_n_at_edge_over_n": float(R(drop.radius)) / n,
                     "mass": mass, **em.arrays(cols)})
        print(f"n={n} R_n(0)={float(R(0.0))!r} mass={mass!r}")
    em.summary("onepoint", {"potential": cfg.potential.name, "runs": runs})
    return EXIT_OK


def cmd_fluct(cfg: RunConfig) -> int:
    em = Emitter(cfg, "fluct")
    pot = _potential(cfg)
    f = make_test_function(cfg.test_function.name, **cfg.test_function.params)
    terms = fluctuation_correction(f, pot, cfg.beta_star)
    payload = {"potential": cfg.potential.name, "test_function": f.name, "beta_star": cfg.beta_star,
               "terms": dataclasses.asdict(terms), "total": terms.total}
    # exact finite-n cross-check for Ginibre monomials r^(2m)
    p = cfg.test_function.params.get("p")
    ginibre = pot.name == "quadratic" and pot.params.get("c", 1.0) == 1.0
    if ginibre and cfg.test_function.name == "power" and p and p % 2 == 0 and cfg.beta_star == 1.0:
        m = p // 2
        rows = []
        for n in cfg.n:
            exact = ginibre_moment(n, m) - n / (m + 1)
            rows.append({"n": n, "exact_difference": exact, "gap_to_total": exact - terms.total})
        payload["ginibre_moment_check"] = rows
    em.summary("fluct", payload)
    print(f"total={terms.total!r} prefactor={terms.prefactor!r} bulk={terms.bulk!r} "
          f"boundary_gap={terms.boundary_gap!r} boundary_flux={terms.boundary_flux!r}")
    return EXIT_OK


def cmd_edge(cfg: RunConfig) -> int:
    em = Emitter(cfg, "edge")
    pot = _potential(cfg)
    theta = cfg.effective_theta()
    u = np.linspace(cfg.edge.u_min, cfg.edge.u_max, cfg.edge.u_points)
    runs = []
    status = EXIT_OK
    for n in cfg.n:
        density, report = solve_thermal(pot, n, theta, cfg.grid, cfg.solver)
        if not report.converged:
            status = EXIT_NONCONVERGED
        therm = rescale_profile(THERMAL, pot, n, u, theta=theta, density=density)
        row = {"n": n, "theta": theta, "converged": report.converged,
               "thermal_value_at_0": therm.value_at_0, "thermal_laplace_log_at_0": therm.laplace_log_at_0,
               "thermal_identity_gap": edge_identity_gap(therm.value_at_0, therm.laplace_log_at_0, theta)}
        cols = {"u": u, "delta_tilde": therm.values,
                "residual": pointwise_rescaled_residual(density, pot, n, theta, u)}
        if cfg.beta_star == 1.0:
            det = rescale_profile(DETERMINANTAL, pot, n, u)
            cols = {"u": u, "g_n": det.values, **{k: v for k, v in cols.items() if k != "u"}}
            row.update({
                "g_n_at_0": det.value_at_0,
                "laplace_log_g_n_at_0": det.laplace_log_at_0,
                "determinantal_identity_violation": abs(edge_identity_gap(det.value_at_0, det.laplace_log_at_0, theta)),
            })
        cols = em.table(f"edge_n{n}", cols)
        runs.append({**row, **em.arrays(cols)})
        print(" ".join(f"{k}={v!r}" for k, v in row.items()))
    em.summary("edge", {"potential": cfg.potential.name, "runs": runs, "partial": status != EXIT_OK})
    return status


def cmd_compare(cfg: RunConfig) -> int:
    em = Emitter(cfg, "compare")
    pot = _potential(cfg)
    if cfg.beta_star != 1.0:
        raise PreconditionError("compare contrasts thermal and determinantal measures; needs beta* = 1")
    theta1 = cfg.effective_theta()
    coeffs = bulk_coefficients(pot, cfg.beta_star, 0.0)

    expansion = expansion_compare(pot, cfg.n, theta=cfg.beta_star, beta_star=cfg.beta_star,
                                  grid_config=cfg.grid, solver=cfg.solver)
    em.table("compare_expansion", {
        "n": [r.n for r in expansion.rows],
        "thermal_center": [r.thermal_center for r in expansion.rows],
        "determinantal_center": [r.determinantal_center for r in expansion.rows],
        "pred_one_point": [r.pred_one_point for r in expansion.rows],
        "pred_thermal_claim": [r.pred_thermal_claim for r in expansion.rows],
    })

    disc_rows = []
    edge_rows = []
    for n in cfg.n:
        density, report = solve_thermal(pot, n, theta1, cfg.grid, cfg.solver)
        if not report.converged:
            raise ConvergenceError(f"thermal solve n={n} theta={theta1} did not converge")
        sup, where = discrepancy_norm(pot, n, theta1, density)
        disc_rows.append({"n": n, "sup": sup, "argmax_r": where,
                          "argmax_u": (where - droplet_radius(pot).radius) * math.sqrt(n)})
        therm = rescale_profile(THERMAL, pot, n, [0.0], theta=theta1, density=density)
        det = rescale_profile(DETERMINANTAL, pot, n, [0.0])
        edge_rows.append({
            "n": n,
            "g_n_at_0": det.value_at_0,
            "laplace_log_g_n_at_0": det.laplace_log_at_0,
            "thermal_value_at_0": therm.value_at_0,
            "thermal_laplace_log_at_0": therm.laplace_log_at_0,
            "thermal_identity_gap": edge_identity_gap(therm.value_at_0, therm.laplace_log_at_0, theta1),
            "determinantal_violation": abs(edge_identity_gap(det.value_at_0, det.laplace_log_at_0, theta1)),
        })
    sups = [r["sup"] for r in disc_rows]
    em.table("compare_discrepancy", {k: [r[k] for r in disc_rows] for k in ("n", "sup", "argmax_r", "argmax_u")})

    sweep_n = cfg.sweep.n or cfg.n[0]
    sweep = theta_sweep(pot, sweep_n, cfg.sweep.thetas, cfg.sweep.bulk_tol, cfg.sweep.edge_tol,
                        cfg.grid, cfg.solver)
    em.table("compare_sweep", {
        "theta": [r.theta for r in sweep.rows],
        "bulk_slope": [r.bulk_slope for r in sweep.rows],
        "bulk_mismatch": [r.bulk_mismatch for r in sweep.rows],
        "edge_sup": [r.edge_sup for r in sweep.rows],
    })

    headline = {
        "v_convention_coefficients": {"one_point": coeffs.v_one_point, "claimed_thermal": coeffs.v_claimed},
        "edge_limits": {"laplace_log_g_limit": -2.0 / math.pi, "thermal_forced_value": theta1 * (0.5 - 1.0),
                        "violation_limit": 1.0 - 2.0 / math.pi},
        "liminf_proxy": {"values": sups, "min_over_max": min(sups) / max(sups)},
        "theta_sweep_simultaneous_agreement": sweep.any_simultaneous_agreement,
    }
    em.summary("compare", {
        "potential": cfg.potential.name, "theta1": theta1, "headline": headline,
        "bulk_coefficients": coeffs, "expansion": expansion, "edge": edge_rows,
        "discrepancy": disc_rows, "sweep": sweep,
    })
    print(f"n^-1 Delta log Delta V coefficient, one-point expansion vs claimed thermal expansion: {coeffs.v_one_point!r} vs {coeffs.v_claimed!r}")
    print(f"bulk slopes at r=0: thermal {expansion.thermal_slope!r}, determinantal {expansion.determinantal_slope!r}"
          f" (Delta log Delta Q(0) = {coeffs.lap_log_lap!r})")
    for row in edge_rows:
        print(f"n={row['n']} g_n(0)={row['g_n_at_0']!r} Dlog g_n(0)={row['laplace_log_g_n_at_0']!r} "
              f"(-2/pi={-2 / math.pi!r}) violation={row['determinantal_violation']!r}")
    print(f"liminf proxy sup|R_n/n - delta|: {sups} min/max={min(sups) / max(sups)!r}")
    print(f"theta sweep (n={sweep_n}): simultaneous bulk+edge agreement: {sweep.any_simultaneous_agreement}")
    return EXIT_OK


COMMANDS = {
    "equilibrium": cmd_equilibrium,
    "thermal": cmd_thermal,
    "onepoint": cmd_onepoint,
    "fluct": cmd_fluct,
    "edge": cmd_edge,
    "compare": cmd_compare,
}


def _parse_param(text: str) -> tuple[str, float]:
    if "=" not in text:
        raise ConfigError(f"--param expects NAME=VALUE, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k.strip(), float(v)
    except ValueError:
        raise ConfigError(f"--param value for {k!r} is not a number") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--potential", metavar="NAME")
    common.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    common.add_argument("--n", action="append", type=int, metavar="N")
    common.add_argument("--beta-star", type=float, metavar="X")
    common.add_argument("--theta", type=float, metavar="X")
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--format", choices=cfgmod.FORMATS)
    common.add_argument("--m", type=int, metavar="M", help="radial grid nodes")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="coulomb2d", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = cfgmod.load(args.config) if args.config else RunConfig()
    if args.potential:
        cfg.potential = cfgmod.PotentialSpec(args.potential, {})
    if args.param:
        cfg.potential.params = {**cfg.potential.params, **dict(_parse_param(p) for p in args.param)}
    if args.n:
        cfg.n = list(args.n)
    if args.beta_star is not None:
        cfg.beta_star = args.beta_star
    if args.theta is not None:
        cfg.theta = args.theta
    if args.out:
        cfg.output.dir = args.out
    if args.format:
        cfg.output.format = args.format
    if args.m:
        cfg.grid = dataclasses.replace(cfg.grid, m=args.m)
    if any(n < 1 for n in cfg.n):
        raise ConfigError("n must be positive")
    cfgmod.validate(cfg)
    return cfg


def _fail(code: int, exc: BaseException) -> int:
    msg = " ".join(str(exc).split())
    print(json.dumps({"error": type(exc).__name__, "exit_code": code, "message": msg}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except ConvergenceError as exc:
        return _fail(EXIT_NONCONVERGED, exc)
    except (DomainError, PreconditionError, FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_NUMERIC, exc)
