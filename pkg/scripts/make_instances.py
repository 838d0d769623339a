"""Regenerate the shipped instance set in ``instances/``.

Rule: walk seeds 0, 1, 2, ... of each family and keep an instance when the
no-cuts solver needs at least ``MIN_NODES`` nodes (so root cuts have work to
do), until ``PER_FAMILY`` instances of the family are kept.
"""

import argparse
from pathlib import Path

from cutselect.bench.harness import PRESETS
from cutselect.engine import branch_and_bound
from cutselect.instances import generalized_assignment, multi_knapsack
from cutselect.mps import write_mps

PER_FAMILY = 6
MIN_NODES = 10

FAMILIES = {
    "mknap": lambda seed: multi_knapsack(25, 8, 0.3, seed, name=f"mknap_25x8_{seed}"),
    "gap": lambda seed: generalized_assignment(4, 10, seed, name=f"gap_4x10_{seed}"),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "instances"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for family, make in FAMILIES.items():
        kept, seed = 0, 0
        while kept < PER_FAMILY:
            inst = make(seed)
            stats = branch_and_bound(inst, PRESETS["nocuts"], seed=1)
            if stats.nodes >= MIN_NODES:
                (out / f"{inst.name}.mps").write_text(write_mps(inst))
                print(f"{inst.name}: nocuts nodes {stats.nodes}")
                kept += 1
            seed += 1


if __name__ == "__main__":
    main()
