"""A small self-delimiting machine and its budgeted halting enumeration.

Programs are bit strings (``str`` over ``"0"``/``"1"``) written in prefix
(Polish) notation.  Each expression starts with an opcode from a complete
prefix code::

    0        LIT   g(n) d1..dn      -> d1..dn
    10       SEQ   p q              -> iota(x) + y, x = p(cond), y = q(iota(x) iota(bin |p|))
    110      ZEROS g(m)             -> 0^(m+1)
    1110     COND  1^i 0            -> i-th item of the condition tape
    11110    CAT   a b              -> a + b
    111110   PAIR  a b              -> iota(a) + b
    111111   REP   a g(n)           -> a repeated n times

``g`` is the order-3 Exp-Golomb code of a natural number (4 bits for 0..7,
6 bits for 8..23, ...).  A run halts only if the parse of the whole program
consumes every bit exactly, so the halting domain is prefix-free.

Every node costs ``1 + len(output)`` steps; a run whose total exceeds
``max_steps`` does not halt.

The condition tape is a bit string holding iota-wrapped items.  A tape that
does not decode as a sequence of wrapped items is seen as one raw item.
"""
from __future__ import annotations

import hashlib
import json
import struct
import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

__all__ = [
    "NonHalt",
    "NON_HALT",
    "Budget",
    "ComplexityTable",
    "run",
    "eg3",
    "wrap",
    "unwrap_items",
    "make_tape",
    "pair",
    "literal_program",
    "enumerate_halting",
    "H_upper",
    "m_lower",
    "int_to_str",
    "str_to_int",
    "condition_id",
    "text_bits",
    "encode_measure_condition",
    "write_programs",
    "read_programs",
    "table_to_csv",
    "MACHINE_CONSTANTS",
    "registry_digest",
]

# Measured once on this machine and pinned; the test suite re-derives them.
MACHINE_CONSTANTS = {
    # H_t(x) <= |x| + 2*ceil(log2(|x|+2)) + c_machine via literals
    "c_machine": 3,
    # H_t(x | x) <= c_copy via COND 0
    "c_copy": 5,
    # H_t(x, y) <= H_t(x) + H_t(y | x, H_t(x)) + c_addition via SEQ
    "c_addition": 2,
}


def registry_digest() -> str:
    blob = json.dumps(MACHINE_CONSTANTS, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


class NonHalt:
    """Result of a run that does not halt within its budget."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "NON_HALT"

    def __bool__(self):
        return False


NON_HALT = NonHalt()


@dataclass(frozen=True)
class Budget:
    max_len: int
    max_steps: int

    def __post_init__(self):
        if self.max_len < 0 or self.max_steps < 0:
            raise ValueError("budget coordinates must be non-negative")

    @classmethod
    def parse(cls, s: str) -> "Budget":
        try:
            a, b = s.split(":")
            return cls(int(a), int(b))
        except ValueError as e:
            raise ValueError(f"budget must look like L:S, got {s!r}") from e

    def __str__(self):
        return f"{self.max_len}:{self.max_steps}"


# ---------------------------------------------------------------- codes


@lru_cache(maxsize=None)
def eg3(n: int) -> str:
    """Order-3 Exp-Golomb code word of ``n >= 0``."""
    m = n + 8
    b = m.bit_length()
    return "0" * (b - 4) + format(m, "b")


def _eg3_len(n: int) -> int:
    return 2 * (n + 8).bit_length() - 4


def wrap(x: str) -> str:
    """The self-delimiting wrapping iota: ``110 x1 0 x2 0 ... xn 011``."""
    return "110" + "0".join(x) + "011"


def unwrap_items(tape: str) -> Optional[Tuple[str, ...]]:
    """Split a tape of concatenated wrapped words; ``None`` if it does not parse."""
    items = []
    i, n = 0, len(tape)
    while i < n:
        if tape[i:i + 3] != "110":
            return None
        i += 3
        if tape[i:i + 3] == "011":
            items.append("")
            i += 3
            continue
        bits = []
        while True:
            if i + 2 > n:
                return None
            b, s = tape[i], tape[i + 1]
            if s != "0":
                return None
            bits.append(b)
            i += 2
            if tape[i:i + 2] == "11":
                i += 2
                break
        items.append("".join(bits))
    return tuple(items)


def make_tape(items: Iterable[str]) -> str:
    return "".join(wrap(x) for x in items)


def pair(x: str, y: str) -> str:
    """Bit-string encoding of the ordered pair ``(x, y)``."""
    return wrap(x) + y


def int_to_str(n: int) -> str:
    """Standard bijection 0 -> '', 1 -> '0', 2 -> '1', 3 -> '00', ..."""
    return format(n + 1, "b")[1:]


def str_to_int(s: str) -> int:
    return int("1" + s, 2) - 1


def literal_program(x: str) -> str:
    return "0" + eg3(len(x)) + x


def condition_id(tape: str) -> str:
    if not tape:
        return "-"
    return hashlib.sha256(tape.encode()).hexdigest()[:12]


def text_bits(s: str) -> str:
    return "".join(format(b, "08b") for b in s.encode("utf-8"))


def encode_measure_condition(mu, k: int) -> str:
    """Canonical condition tape for a measure truncated to precision ``k``.

    Items: ``bin(k)``, the UTF-8 bits of a kind tag, then for a finite measure
    each atom's point followed by ``bin(floor(mass 2^k))`` in canonical atom
    order.  Points of string spaces are stored as their own bits so that the
    machine can copy them; other points are stored as UTF-8 codec strings.
    Other measures supply ``condition_items(k)``.
    """
    items = [format(k, "b")]
    if hasattr(mu, "atoms"):
        items.append(text_bits("finite:" + json.dumps(mu.space.to_json(), sort_keys=True)))
        for x, m in mu.atoms:
            raw = mu.space.kind == "DiscreteStrings"
            items.append(x if raw else text_bits(mu.space.encode(x)))
            items.append(format((m * 2 ** k).__floor__(), "b"))
    elif hasattr(mu, "condition_items"):
        items.extend(mu.condition_items(k))
    else:
        raise TypeError(f"cannot encode {type(mu).__name__} as a condition")
    return make_tape(items)


def _items_of(tape: str) -> Tuple[str, ...]:
    if not tape:
        return ()
    items = unwrap_items(tape)
    return items if items is not None else (tape,)


# ---------------------------------------------------------------- interpreter


class _Stop(Exception):
    pass


class _Reader:
    __slots__ = ("bits", "pos", "steps", "max_steps")

    def __init__(self, bits: str, max_steps: int):
        self.bits = bits
        self.pos = 0
        self.steps = 0
        self.max_steps = max_steps

    def bit(self) -> str:
        if self.pos >= len(self.bits):
            raise _Stop
        b = self.bits[self.pos]
        self.pos += 1
        return b

    def take(self, n: int) -> str:
        if self.pos + n > len(self.bits):
            raise _Stop
        s = self.bits[self.pos:self.pos + n]
        self.pos += n
        return s

    def eg3(self) -> int:
        zeros = 0
        while self.bit() == "0":
            zeros += 1
        rest = self.take(zeros + 3)
        return int("1" + rest, 2) - 8

    def charge(self, out_len: int):
        self.steps += 1 + out_len
        if self.steps > self.max_steps:
            raise _Stop


def _eval(r: _Reader, items: Tuple[str, ...]) -> str:
    if r.bit() == "0":
        n = r.eg3()
        out = r.take(n)
        r.charge(n)
        return out
    if r.bit() == "0":  # SEQ
        start = r.pos
        x = _eval(r, items)
        plen = r.pos - start
        y = _eval(r, (x, format(plen, "b")))
        out = wrap(x) + y
        r.charge(len(out))
        return out
    if r.bit() == "0":  # ZEROS
        m = r.eg3()
        r.charge(m + 1)
        return "0" * (m + 1)
    if r.bit() == "0":  # COND
        i = 0
        while r.bit() == "1":
            i += 1
        if i >= len(items):
            raise _Stop
        r.charge(len(items[i]))
        return items[i]
    if r.bit() == "0":  # CAT
        a = _eval(r, items)
        b = _eval(r, items)
        r.charge(len(a) + len(b))
        return a + b
    if r.bit() == "0":  # PAIR
        a = _eval(r, items)
        b = _eval(r, items)
        out = wrap(a) + b
        r.charge(len(out))
        return out
    a = _eval(r, items)  # REP
    n = r.eg3()
    r.charge(len(a) * n)
    return a * n


def run(p: str, cond: str = "", max_steps: int = 100_000):
    """Run program ``p`` on condition tape ``cond``; output bit string or ``NON_HALT``."""
    if any(c not in "01" for c in p):
        raise ValueError("program must be a bit string")
    r = _Reader(p, max_steps)
    try:
        out = _eval(r, _items_of(cond))
    except _Stop:
        return NON_HALT
    if r.pos != len(p):
        return NON_HALT
    return out


# ---------------------------------------------------------------- enumeration
#
# Programs are generated bottom-up by exact bit length.  A program is "free"
# when its output does not depend on the outer condition tape (no COND outside
# the second operand of a SEQ); free programs are stored with their output and
# step count.  Dependent programs are stored as small trees whose free subtrees
# are folded into constants, and are evaluated once per condition.

_K, _C, _CAT, _PAIR, _SEQ, _REP = range(6)


def _dep_eval(node, items, max_steps):
    """Evaluate a dependent tree; returns ``(out, steps)`` or ``None``."""
    tag = node[0]
    if tag == _K:
        return node[1], node[2]
    if tag == _C:
        i = node[1]
        if i >= len(items):
            return None
        out = items[i]
        s = 1 + len(out)
        return (out, s) if s <= max_steps else None
    if tag == _REP:
        a = _dep_eval(node[1], items, max_steps)
        if a is None:
            return None
        n = node[2]
        s = a[1] + 1 + len(a[0]) * n
        if s > max_steps:
            return None
        return a[0] * n, s
    a = _dep_eval(node[1], items, max_steps)
    if a is None:
        return None
    if tag == _SEQ:
        x = a[0]
        b = _dep_eval(node[2], (x, format(node[3], "b")), max_steps)
        if b is None:
            return None
        out = wrap(x) + b[0]
    else:
        b = _dep_eval(node[2], items, max_steps)
        if b is None:
            return None
        out = a[0] + b[0] if tag == _CAT else wrap(a[0]) + b[0]
    s = a[1] + b[1] + 1 + len(out)
    return (out, s) if s <= max_steps else None


@dataclass
class _Enumeration:
    budget: Budget
    # free[L]: list of (code, output, steps); dep[L]: list of (code, tree)
    free: List[List[Tuple[int, str, int]]]
    dep: List[List[Tuple[int, tuple]]]


_ENUM_CACHE: Dict[Budget, _Enumeration] = {}


def _const(entry):
    return (_K, entry[1], entry[2])


def _build(budget: Budget) -> _Enumeration:
    L_max, S = budget.max_len, budget.max_steps
    free: List[list] = [[] for _ in range(L_max + 1)]
    dep: List[list] = [[] for _ in range(L_max + 1)]

    for L in range(1, L_max + 1):
        fl, dl = free[L], dep[L]
        # LIT: 0 g(n) data
        n = 0
        while 1 + _eg3_len(n) + n <= L:
            if 1 + _eg3_len(n) + n == L and 1 + n <= S:
                head = int(eg3(n), 2) << n
                fmt = "0%db" % n
                for v in range(1 << n):
                    fl.append((head | v, format(v, fmt) if n else "", 1 + n))
            n += 1
        # SEQ: 10 p q
        for la in range(1, L - 2):
            lb = L - 2 - la
            shift = lb
            head = 0b10 << (la + lb)
            bl = format(la, "b")
            for ca, x, sa in free[la]:
                wx = wrap(x)
                base = head | (ca << shift)
                inner = (x, bl)
                for cb, y, sb in free[lb]:
                    out = wx + y
                    s = sa + sb + 1 + len(out)
                    if s <= S:
                        fl.append((base | cb, out, s))
                for cb, tree in dep[lb]:
                    r = _dep_eval(tree, inner, S)
                    if r is None:
                        continue
                    out = wx + r[0]
                    s = sa + r[1] + 1 + len(out)
                    if s <= S:
                        fl.append((base | cb, out, s))
            for ca, pt in dep[la]:
                base = head | (ca << shift)
                for cb, y, sb in free[lb]:
                    dl.append((base | cb, (_SEQ, pt, (_K, y, sb), la)))
                for cb, qt in dep[lb]:
                    dl.append((base | cb, (_SEQ, pt, qt, la)))
        # ZEROS: 110 g(m)
        m = 0
        while 3 + _eg3_len(m) <= L:
            if 3 + _eg3_len(m) == L and m + 2 <= S:
                fl.append(((0b110 << _eg3_len(m)) | int(eg3(m), 2), "0" * (m + 1), m + 2))
            m += 1
        # COND: 1110 1^i 0
        if L >= 5:
            i = L - 5
            dl.append((((0b1110 << (i + 1)) | (((1 << i) - 1) << 1)), (_C, i)))
        # CAT / PAIR: 11110 a b, 111110 a b
        for op, olen, tag in ((0b11110, 5, _CAT), (0b111110, 6, _PAIR)):
            for la in range(1, L - olen):
                lb = L - olen - la
                head = op << (la + lb)
                for ca, x, sa in free[la]:
                    base = head | (ca << lb)
                    pre = x if tag == _CAT else wrap(x)
                    for cb, y, sb in free[lb]:
                        out = pre + y
                        s = sa + sb + 1 + len(out)
                        if s <= S:
                            fl.append((base | cb, out, s))
                    ka = (_K, x, sa)
                    for cb, bt in dep[lb]:
                        dl.append((base | cb, (tag, ka, bt)))
                for ca, at in dep[la]:
                    base = head | (ca << lb)
                    for entry in free[lb]:
                        dl.append((base | entry[0], (tag, at, _const(entry))))
                    for cb, bt in dep[lb]:
                        dl.append((base | cb, (tag, at, bt)))
        # REP: 111111 a g(n)
        for la in range(1, L - 6):
            rest = L - 6 - la
            ns = [n for n in range(0, 1 << rest) if _eg3_len(n) == rest] if rest >= 4 else []
            if not ns:
                continue
            head = 0b111111 << (la + rest)
            for n in ns:
                tail = int(eg3(n), 2)
                for ca, x, sa in free[la]:
                    s = sa + 1 + len(x) * n
                    if s <= S:
                        fl.append((head | (ca << rest) | tail, x * n, s))
                for ca, at in dep[la]:
                    dl.append((head | (ca << rest) | tail, (_REP, at, n)))
    return _Enumeration(budget, free, dep)


def _enumeration(budget: Budget) -> _Enumeration:
    e = _ENUM_CACHE.get(budget)
    if e is None:
        e = _build(budget)
        _ENUM_CACHE[budget] = e
    return e


@dataclass
class ComplexityTable:
    """Budgeted complexities for one condition tape.

    ``entries`` maps each output found to the length of its shortest halting
    program; ``kraft`` is the exact sum of ``2**-len(p)`` over every halting
    program found.
    """

    budget: Budget
    condition: str
    entries: Dict[str, int]
    kraft: Fraction
    halting: List[Tuple[int, int]] = field(repr=False, default_factory=list)

    @property
    def condition_id(self) -> str:
        return condition_id(self.condition)

    def H(self, x: str):
        return self.entries.get(x, float("inf"))

    def m(self, x: str) -> Fraction:
        h = self.entries.get(x)
        return Fraction(0) if h is None else Fraction(1, 1 << h)

    def programs(self) -> List[str]:
        """All halting programs found, as bit strings, in sorted order."""
        return sorted(format(c, "0%db" % L) if L else "" for L, c in self.halting)

    def is_prefix_free(self) -> bool:
        ps = self.programs()
        return all(not ps[i + 1].startswith(ps[i]) for i in range(len(ps) - 1))

    def count_below(self, m: int) -> int:
        return sum(1 for h in self.entries.values() if h < m)

    def m_total(self) -> Fraction:
        return sum((Fraction(1, 1 << h) for h in self.entries.values()), Fraction(0))


def _eval_dep_shard(shard, items, S):
    out = []
    for L, code, tree in shard:
        r = _dep_eval(tree, items, S)
        if r is not None:
            out.append((L, code, r[0]))
    return out


# conditioned tables are large (one record per halting program), so only
# the most recently used few are kept
_TABLE_CACHE: "OrderedDict[Tuple[Budget, str], ComplexityTable]" = OrderedDict()
_TABLE_CACHE_SIZE = 8
_TABLE_LOCK = threading.Lock()


def enumerate_halting(budget: Budget, cond: str = "", threads: int = 1) -> ComplexityTable:
    """Every halting program of length ``<= max_len`` within ``max_steps`` steps.

    Results do not depend on ``threads``; sharded partial results are merged
    in a fixed order.
    """
    key = (budget, cond)
    with _TABLE_LOCK:
        if key in _TABLE_CACHE:
            _TABLE_CACHE.move_to_end(key)
            return _TABLE_CACHE[key]
    e = _enumeration(budget)
    S = budget.max_steps
    entries: Dict[str, int] = {}
    halting: List[Tuple[int, int]] = []
    weight = 0
    top = budget.max_len
    for L in range(top + 1):
        for code, out, _ in e.free[L]:
            halting.append((L, code))
            weight += 1 << (top - L)
            if out not in entries:
                entries[out] = L
    items = _items_of(cond)
    work = [(L, code, tree) for L in range(top + 1) for code, tree in e.dep[L]]
    if items and work:
        if threads > 1:
            size = max(1, len(work) // (threads * 4))
            shards = [work[i:i + size] for i in range(0, len(work), size)]
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(lambda sh: _eval_dep_shard(sh, items, S), shards))
        else:
            parts = [_eval_dep_shard(work, items, S)]
        for part in parts:
            for L, code, out in part:
                halting.append((L, code))
                weight += 1 << (top - L)
                if entries.get(out, top + 1) > L:
                    entries[out] = L
    table = ComplexityTable(budget, cond, entries, Fraction(weight, 1 << top), halting)
    with _TABLE_LOCK:
        _TABLE_CACHE[key] = table
        while len(_TABLE_CACHE) > _TABLE_CACHE_SIZE:
            _TABLE_CACHE.popitem(last=False)
    return table


def H_upper(x: str, cond: str = "", budget: Budget = Budget(24, 100_000)):
    """Budgeted upper bound on the prefix complexity; ``inf`` if nothing found."""
    return enumerate_halting(budget, cond).H(x)


def m_lower(x: str, cond: str = "", budget: Budget = Budget(24, 100_000)) -> Fraction:
    return enumerate_halting(budget, cond).m(x)


def clear_caches():
    _ENUM_CACHE.clear()
    _TABLE_CACHE.clear()


# ---------------------------------------------------------------- file formats


def write_programs(programs: Sequence[str]) -> bytes:
    """Each record: 2-byte big-endian bit count, then the bits MSB-first, zero padded."""
    out = bytearray()
    for p in programs:
        n = len(p)
        out += struct.pack(">H", n)
        if n:
            padded = p + "0" * (-n % 8)
            out += int(padded, 2).to_bytes(len(padded) // 8, "big")
    return bytes(out)


def read_programs(data: bytes) -> List[str]:
    progs, i = [], 0
    while i < len(data):
        if i + 2 > len(data):
            raise ValueError("truncated program record header")
        (n,) = struct.unpack(">H", data[i:i + 2])
        i += 2
        nb = (n + 7) // 8
        if i + nb > len(data):
            raise ValueError("truncated program record body")
        chunk = data[i:i + nb]
        i += nb
        bits = format(int.from_bytes(chunk, "big"), "0%db" % (8 * nb)) if nb else ""
        if bits[n:].strip("0"):
            raise ValueError("nonzero padding bits")
        progs.append(bits[:n])
    return progs


def bits_to_hex(x: str) -> str:
    """``"<nbits>:<hex>"`` with the bits left-aligned in whole bytes."""
    n = len(x)
    if not n:
        return "0:"
    padded = x + "0" * (-n % 8)
    return f"{n}:" + int(padded, 2).to_bytes(len(padded) // 8, "big").hex()


def hex_to_bits(s: str) -> str:
    """Inverse of :func:`bits_to_hex`; plain hex means whole bytes, ``b:0101`` raw bits."""
    if s.startswith("b:"):
        bits = s[2:]
        if any(c not in "01" for c in bits):
            raise ValueError(f"bad bit string {s!r}")
        return bits
    if ":" in s:
        n, h = s.split(":", 1)
        n = int(n)
        bits = format(int(h, 16), "0%db" % (4 * len(h))) if h else ""
        if n > len(bits):
            raise ValueError(f"bad hex bit string {s!r}")
        return bits[:n]
    if len(s) % 2:
        raise ValueError(f"hex string must have whole bytes: {s!r}")
    return format(int(s, 16), "0%db" % (4 * len(s))) if s else ""


def table_to_csv(table: ComplexityTable, outputs: Optional[Iterable[str]] = None) -> str:
    cid = table.condition_id
    keys = sorted(table.entries, key=lambda x: (len(x), x)) if outputs is None else list(outputs)
    lines = ["output_hex,condition_id,H_t"]
    for x in keys:
        h = table.H(x)
        lines.append(f"{bits_to_hex(x)},{cid},{'inf' if h == float('inf') else h}")
    return "\n".join(lines) + "\n"
