"""Deficiency lower bounds as the enumeration budget grows.

Prints CSV rows (measure, x, max_len, bound).  The curves are recorded as
data only; whether they settle for moderately complex measures is left open.
"""
import argparse
import random
from fractions import Fraction

from randlab.integration import BernoulliSequenceMeasure
from randlab.machine import Budget
from randlab.measures import uniform
from randlab.numerics import rat_to_str
from randlab.randomness import NEG_INF, deficiency_discrete, deficiency_sequence
from randlab.spaces import DiscreteStrings


def fmt(v):
    return "-inf" if v == NEG_INF else rat_to_str(v)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lengths", default="12,14,16,18,20,22,24")
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)
    rng = random.Random(a.seed)
    D = DiscreteStrings()
    u8 = uniform(D, [format(v, "08b") for v in range(256)])
    strings = ["0" * 8, "01" * 4, format(rng.getrandbits(8), "08b")]
    coin = BernoulliSequenceMeasure(Fraction(1, 2))
    prefixes = ["0" * 16, "01" * 8, format(rng.getrandbits(16), "016b")]
    print(f"# seed {a.seed}")
    print("measure,x,max_len,bound")
    for L in (int(v) for v in a.lengths.split(",")):
        b = Budget(L, a.steps)
        for x in strings:
            print(f"uniform8,{x},{L},{fmt(deficiency_discrete(x, u8, b).lower_bound)}")
        for x in prefixes:
            print(f"coin,{x},{L},{fmt(deficiency_sequence(x, coin, b).lower_bound)}")


if __name__ == "__main__":
    main()
