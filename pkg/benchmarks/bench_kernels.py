#!/usr/bin/env python3
"""Time the compiled bubble kernels against their pure-python fallbacks.

Runs each integration kernel through both backends on identical inputs,
reports the best-of-N wall times and the speedup, and exits nonzero if the
two trajectories are not bitwise identical. Set BUBBLEWAVE_NUMBA=0 before
launching to benchmark the numpy fallback against itself (speedup ~1).
"""

import argparse
import sys

from bubblewave.benchmark import run_benchmark


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3,
                        help="timing repetitions per kernel (best is kept)")
    args = parser.parse_args(argv)

    rows = run_benchmark(repeat=args.repeat)
    print(f"backend: {rows[0].backend}")
    for row in rows:
        print(f"{row.name}: {row.n_steps} steps, "
              f"compiled {row.compiled_s:.4f} s, "
              f"python {row.python_s:.4f} s, "
              f"speedup {row.speedup:.1f}x, "
              f"bitwise_equal={row.bitwise_equal}")
    if not all(row.bitwise_equal for row in rows):
        print("error: backends disagree", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
