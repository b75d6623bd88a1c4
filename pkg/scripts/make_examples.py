"""Write the example input files used in the README and the CLI tests."""
import json
import os
from fractions import Fraction as F

from randlab.measures import FiniteRationalMeasure, dirac, uniform
from randlab.spaces import DiscreteStrings, Naturals, UnitInterval

HERE = os.path.join(os.path.dirname(os.path.abspath(__file__)), "examples")


def write(name, obj):
    with open(os.path.join(HERE, name), "w") as fh:
        fh.write(obj if isinstance(obj, str) else json.dumps(obj, indent=1))
        fh.write("\n")


def main():
    os.makedirs(HERE, exist_ok=True)
    U, N, D = UnitInterval(), Naturals(), DiscreteStrings()
    write("delta0.json", dirac(U, F(0)).dumps())
    write("delta1.json", dirac(U, F(1)).dumps())
    write("half.json", FiniteRationalMeasure.from_pairs(U, [(F(0), F(1, 2)), (F(1), F(1, 2))]).dumps())
    write("uniform8.json", uniform(D, [format(v, "08b") for v in range(256)]).dumps())
    write("nu_uniform4.json", uniform(N, range(4)).dumps())
    write("mu_block.json", FiniteRationalMeasure.from_pairs(N, [(0, F(1, 8)), (1, F(1, 2)), (4, F(3, 8))]).dumps())
    write("trim_test.json", {
        "space": {"kind": "Naturals"}, "points": ["0", "1"],
        "test": {"terms": [
            {"V": ["0"], "r": "1/1", "U": {"center": dirac(N, 0).to_json(), "radius": "1/2"}},
            {"V": ["0"], "r": "1/1", "U": {"center": dirac(N, 1).to_json(), "radius": "1/2"}},
        ]},
    })
    write("kernel.json", {
        "source": {"kind": "Naturals"}, "target": {"kind": "Naturals"},
        "rows": [{"point": "0", "measure": dirac(N, 1).to_json()},
                 {"point": "1", "measure": uniform(N, [0, 1]).to_json()}],
    })
    write("mu01.json", FiniteRationalMeasure.from_pairs(N, [(0, F(1, 2)), (1, F(1, 2))]).dumps())
    write("test_f.json", {"values": [{"point": "0", "value": "1/1"}, {"point": "1", "value": "1/1"}]})
    write("coin_a.json", FiniteRationalMeasure.from_pairs(N, [(0, F(3, 4)), (1, F(1, 4))]).dumps())
    write("coin_b.json", FiniteRationalMeasure.from_pairs(N, [(0, F(1, 4)), (1, F(3, 4))]).dumps())


if __name__ == "__main__":
    main()
