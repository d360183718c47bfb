"""Shot-allocation study: typical overlap error versus the F1 shot fraction
and the magnitude-reconstruction mode, for budgets of 100 / 1000 / 10000."""
import argparse
from pathlib import Path

from starkrylov.cli import cmd_allocation
from starkrylov.config import RunConfig


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("results/allocation"))
    parser.add_argument("--realizations", type=int, default=300)
    args = parser.parse_args()
    cfg = RunConfig.from_dict({
        "n_triangles": 4,
        "allocation": {"m_totals": [100, 1000, 10000],
                       "realizations": args.realizations},
    })
    args.out.mkdir(parents=True, exist_ok=True)
    print(f"running allocation sweep -> {args.out}")
    cmd_allocation(cfg, args.out)


if __name__ == "__main__":
    main()
