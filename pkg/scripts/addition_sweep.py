"""Exhaustive addition-inequality sweep over all pairs of n-bit strings."""
import argparse
import time

from randlab.information import addition_csv, addition_sweep
from randlab.machine import MACHINE_CONSTANTS, Budget


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nbits", type=int, default=6)
    ap.add_argument("--budget", default="24:100000")
    ap.add_argument("--c", type=int, default=MACHINE_CONSTANTS["c_addition"])
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="addition_sweep.csv")
    a = ap.parse_args(argv)
    b = Budget.parse(a.budget)
    t0 = time.perf_counter()
    reports, needed = addition_sweep(a.nbits, b, a.c, a.threads)
    with open(a.out, "w") as fh:
        fh.write(addition_csv(reports, b))
    held = sum(r.holds for r in reports)
    gaps = [r.reverse_gap for r in reports if r.reverse_gap is not None]
    print(f"{held}/{len(reports)} pairs hold with c={a.c}; smallest global c = {needed}")
    print(f"reverse gap (reported only): min {min(gaps)}, max {max(gaps)}")
    print(f"{time.perf_counter() - t0:.1f}s, rows in {a.out}")


if __name__ == "__main__":
    main()
