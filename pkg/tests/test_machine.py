import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from randlab.machine import (MACHINE_CONSTANTS, NON_HALT, Budget, H_upper, bits_to_hex, clear_caches,
                             encode_measure_condition, enumerate_halting, eg3, hex_to_bits,
                             int_to_str, literal_program, m_lower, make_tape, pair, read_programs,
                             run, str_to_int, table_to_csv, unwrap_items, wrap, write_programs)
from randlab.measures import dirac, uniform
from randlab.spaces import DiscreteStrings, UnitInterval
from oracles import brute_force_table, pairwise_prefix_free, shortest_programs

B16 = Budget(16, 10_000)
B20 = Budget(20, 100_000)
B24 = Budget(24, 100_000)


def eg3_decode(bits: str):
    """Oracle decoder: count leading zeros z, read z + 4 bits, subtract 8."""
    z = len(bits) - len(bits.lstrip("0"))
    word = bits[z:2 * z + 4]
    return int(word, 2) - 8, bits[2 * z + 4:]


@given(st.integers(0, 10 ** 6))
def test_exp_golomb_round_trip(n):
    code = eg3(n)
    assert eg3_decode(code + "1") == (n, "1")


def test_exp_golomb_lengths():
    assert [len(eg3(n)) for n in (0, 7, 8, 23, 24)] == [4, 4, 6, 6, 8]


@given(st.text("01", max_size=20))
def test_wrap_round_trip(x):
    assert wrap(x) == "110" + "0".join(x) + "011"
    assert unwrap_items(wrap(x) + wrap(x[::-1])) == (x, x[::-1])


@given(st.integers(0, 10 ** 5))
def test_int_string_bijection(n):
    assert str_to_int(int_to_str(n)) == n
    assert [int_to_str(i) for i in range(4)] == ["", "0", "1", "00"]


@given(st.text("01", max_size=40), st.text("01", max_size=20))
def test_literal_programs(x, cond):
    assert run(literal_program(x)) == x
    assert run(literal_program(x), cond) == x


def test_empty_program_does_not_halt():
    assert run("") is NON_HALT


@given(st.text("01", max_size=30))
def test_halting_runs_consume_exactly(p):
    out = run(p, "", 10_000)
    if out is not NON_HALT:
        # any extension of a halting program must not halt
        assert run(p + "0", "", 10_000) is NON_HALT
        assert run(p + "1", "", 10_000) is NON_HALT


def test_step_budget_cuts_runs():
    p = literal_program("0" * 30)
    assert run(p, "", 31) == "0" * 30
    assert run(p, "", 30) is NON_HALT


@pytest.mark.parametrize("cond", ["", make_tape(["0101"]), make_tape(["", "1", "11"])])
def test_enumeration_matches_brute_force(cond):
    halting = brute_force_table(14, 40, cond)
    table = enumerate_halting(Budget(14, 40), cond)
    assert sorted(table.programs()) == sorted(halting)
    best = shortest_programs(halting)
    assert {x: table.H(x) for x in best} == best
    assert table.kraft == sum((F(1, 2 ** len(p)) for p in halting), F(0))


def test_zero_budget_is_empty():
    t = enumerate_halting(Budget(0, 0))
    assert t.kraft == 0 and not t.entries
    assert H_upper("0", "", Budget(0, 0)) == math.inf
    assert m_lower("0101", "", Budget(0, 0)) == 0


def test_literal_length_bound_small_budget():
    t = enumerate_halting(B20)
    for n in range(9):
        for v in range(1 << n):
            x = format(v, "0%db" % n) if n else ""
            if len(literal_program(x)) <= 20:
                assert t.H(x) <= len(literal_program(x))


def test_known_shortest_programs():
    # frozen from the brute-force oracle at 24 bits: the repeat program for 0^16
    t = enumerate_halting(B24)
    assert t.H("") == 5
    assert t.H("0" * 8) == 7
    assert t.H("0" * 16) == 9


def test_prefix_free_and_kraft():
    prev = F(0)
    for b in (B16, B20):
        t = enumerate_halting(b)
        assert pairwise_prefix_free(t.programs()) if b is B16 else t.is_prefix_free()
        assert t.kraft <= 1 and t.kraft >= prev
        prev = t.kraft


@pytest.mark.parametrize("b", [Budget(12, 100), B16, B20])
def test_counting_bound(b):
    t = enumerate_halting(b)
    for m in range(13):
        assert t.count_below(m) < 2 ** m


def test_budget_monotonicity():
    small, big = enumerate_halting(Budget(16, 200)), enumerate_halting(B20)
    longer = enumerate_halting(Budget(16, 10_000))
    for x in small.entries:
        assert big.H(x) <= small.H(x)
        assert longer.H(x) <= small.H(x)
        assert big.m(x) >= small.m(x)


def test_thread_count_does_not_change_tables():
    cond = make_tape(["0110", "11"])
    clear_caches()
    one = enumerate_halting(B20, cond, threads=1)
    clear_caches()
    many = enumerate_halting(B20, cond, threads=8)
    assert one.entries == many.entries and one.kraft == many.kraft


def test_copy_constant():
    x = "01101001"
    t = enumerate_halting(B24, make_tape([x]))
    assert t.H(x) <= MACHINE_CONSTANTS["c_copy"]


def test_measure_conditions():
    D = DiscreteStrings()
    mu = uniform(D, ["0", "1"])
    assert encode_measure_condition(mu, 16) == encode_measure_condition(mu, 16)
    U = UnitInterval()
    assert encode_measure_condition(dirac(U, F(0)), 16) != encode_measure_condition(dirac(U, F(1)), 16)


def test_program_file_vectors():
    data = write_programs(["", "1", "0110", "101010101"])
    assert data.hex() == "0000" "000180" "000460" "0009aa80"
    assert read_programs(data) == ["", "1", "0110", "101010101"]
    with pytest.raises(ValueError):
        read_programs(bytes.fromhex("000181"))


@given(st.lists(st.text("01", max_size=40), max_size=6))
def test_program_file_round_trip(progs):
    assert read_programs(write_programs(progs)) == progs


@given(st.text("01", max_size=40))
def test_hex_bits_round_trip(x):
    assert hex_to_bits(bits_to_hex(x)) == x
    assert hex_to_bits("b:" + x) == x


def test_table_csv():
    t = enumerate_halting(B16)
    text = table_to_csv(t, ["", "0" * 8])
    assert text.splitlines() == ["output_hex,condition_id,H_t", "0:,-,5", "8:00,-,7"]


def test_pair_encoding():
    assert pair("1", "0") == "1101011" + "0"
