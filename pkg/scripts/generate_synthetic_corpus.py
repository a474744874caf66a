#!/usr/bin/env python3
"""Write a seeded two-class demo corpus (fire/ and nofire/ PNG trees).

The same seed always produces byte-identical files, so generated corpora
can be compared across machines.
"""

import argparse
from pathlib import Path

from pyroclass.synthetic import write_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out", type=Path, help="corpus root to create")
    parser.add_argument("--n-per-class", type=int, default=100,
                        help="images per class (default 100)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--min-side", type=int, default=24,
                        help="smallest image edge in pixels")
    parser.add_argument("--max-side", type=int, default=40,
                        help="largest image edge in pixels")
    args = parser.parse_args()

    write_corpus(args.out, args.n_per_class, seed=args.seed,
                 min_side=args.min_side, max_side=args.max_side)
    total = 2 * args.n_per_class
    print(f"wrote {total} images under {args.out}/fire and {args.out}/nofire")


if __name__ == "__main__":
    main()
