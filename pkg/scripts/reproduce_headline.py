"""Run the headline comparison (bulk coefficients, edge curvature, liminf proxy, theta sweep).

    python scripts/reproduce_headline.py [--config scripts/configs/headline.toml] [--out DIR]

Thin wrapper around ``coulomb2d compare``; the full run takes a couple of minutes.
"""
import argparse
import sys
from pathlib import Path

from coulomb2d.cli import main

HERE = Path(__file__).parent


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", default=str(HERE / "configs" / "headline.toml"))
    p.add_argument("--out", default=None)
    return p.parse_args()


if __name__ == "__main__":
    args = parse_args()
    argv = ["compare", "--config", args.config]
    if args.out:
        argv += ["--out", args.out]
    sys.exit(main(argv))
