"""Magnetization curves for both star plaquettes, from exact sector
energies and from per-sector solver runs on exact overlap series."""
import argparse
from pathlib import Path

from starkrylov.cli import cmd_magnetization
from starkrylov.config import RunConfig


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("results/magnetization"))
    args = parser.parse_args()
    for n_tri in (4, 6):
        out = args.out / f"star{2 * n_tri}"
        out.mkdir(parents=True, exist_ok=True)
        print(f"running {2 * n_tri}-spin star -> {out}")
        cmd_magnetization(RunConfig(n_triangles=n_tri), out)


if __name__ == "__main__":
    main()
