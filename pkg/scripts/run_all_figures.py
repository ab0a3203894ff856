#!/usr/bin/env python3
"""Reproduce every experiment with full-scale defaults into results/.

Run from the repository root:

    python scripts/run_all_figures.py [--seed N] [--out DIR]

Each experiment writes plot-ready CSVs plus a summary.json recording the
spec, the seed and the headline numbers.
"""

import argparse
from pathlib import Path

from weaksep.experiments import DEFAULT_MASTER_SEED, EXPERIMENTS, ExperimentSpec, run


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=DEFAULT_MASTER_SEED)
    parser.add_argument("--out", type=Path, default=Path("results"))
    args = parser.parse_args()

    for name in sorted(EXPERIMENTS):
        spec = ExperimentSpec(
            experiment=name,
            master_seed=args.seed,
            output_dir=str(args.out / name),
        )
        summary = run(spec)
        print(f"{name}: {summary.wall_seconds:.1f}s")
        for key, value in summary.headline.items():
            print(f"  {key}: {value}")


if __name__ == "__main__":
    main()
