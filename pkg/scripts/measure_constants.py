"""Re-derive the pinned machine constants and compare with the registry.

c_machine: max over |x| <= 12 of H_t(x) - |x| - 2 ceil(log2(|x| + 2)).
c_copy: max over |x| <= 8 of H_t(x | x).
c_addition: smallest c with H_t(x, y) <= H_t(x) + H_t(y | x, H_t(x)) + c on all 6-bit pairs.
"""
import argparse
import json
import math

from randlab.information import addition_sweep
from randlab.machine import MACHINE_CONSTANTS, Budget, enumerate_halting, make_tape


def strings(max_len):
    for n in range(max_len + 1):
        for v in range(1 << n):
            yield format(v, "0%db" % n) if n else ""


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budget", default="24:100000")
    ap.add_argument("--threads", type=int, default=1)
    a = ap.parse_args(argv)
    b = Budget.parse(a.budget)
    t = enumerate_halting(b)
    c_machine = max(t.H(x) - len(x) - 2 * math.ceil(math.log2(len(x) + 2)) for x in strings(12))
    c_copy = max(enumerate_halting(b, make_tape([x])).H(x) for x in strings(8))
    _, c_add = addition_sweep(6, b, MACHINE_CONSTANTS["c_addition"], a.threads)
    measured = {"c_machine": c_machine, "c_copy": c_copy, "c_addition": c_add}
    print(json.dumps({"budget": str(b), "measured": measured, "pinned": MACHINE_CONSTANTS}, indent=1))
    return 0 if all(measured[k] <= MACHINE_CONSTANTS[k] for k in measured) else 1


if __name__ == "__main__":
    raise SystemExit(main())
