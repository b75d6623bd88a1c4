"""Command-line front end: ``randlab <subcommand> ...``.

Every output starts with ``#`` header lines (tool version, config echo,
machine-constant registry digest, seed); JSON outputs carry the same data
under a ``"meta"`` key.  ``--threads`` only changes how work is scheduled and
is left out of the config echo, so outputs are byte-identical across thread
counts.

Exit codes: 0 success, 1 malformed input, 2 capacity exceeded, 3 internal
invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from math import inf
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .information import (COUNTING, addition_csv, addition_sweep, relative_entropy)
from .integration import (BernoulliSequenceMeasure, IntegrationBudgetError, UniformMeasure,
                          AtomicMeasure, cell_measure, integrate_expr, partition_csv)
from .machine import (Budget, bits_to_hex, enumerate_halting, hex_to_bits, registry_digest,
                      table_to_csv)
from .measures import (DiscreteKernel, FiniteRationalMeasure, MeasureError, prokhorov_distance,
                       strassen_couple, Coupling, uniform)
from .numerics import rat_from_str, rat_to_str
from .randomness import (CapacityExceeded, FiniteSpace, NotATestError, NotInJ, TestApproximant,
                         Term, conservation_pullback, counterexample_measure, deficiency_discrete,
                         neutrality_probe, test_trim, universal_test_finite)
from .spaces import (DiscreteStrings, Naturals, UnitInterval, enumerate_E, from_sexpr,
                     separating_sequence, space_from_json, to_sexpr)

EXIT_OK, EXIT_MALFORMED, EXIT_CAPACITY, EXIT_INVARIANT = 0, 1, 2, 3

SUBCOMMANDS = ("prokhorov", "couple", "integrate", "cells", "complexity", "deficiency", "trim",
               "conserve", "counterexample", "neutrality", "entropy", "addition", "report")


class MalformedInput(Exception):
    pass


class InvariantViolation(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    inputs: List[str] = field(default_factory=list)
    budget: Budget = Budget(24, 100_000)
    k: int = 20
    seed: int = 0
    out: Optional[str] = None
    threads: int = 1
    extra: Dict[str, Any] = field(default_factory=dict)

    def echo(self) -> str:
        d = {"subcommand": self.subcommand, "inputs": self.inputs, "budget": str(self.budget),
             "k": self.k, "seed": self.seed}
        d.update({key: str(v) for key, v in sorted(self.extra.items())})
        return json.dumps(d, sort_keys=True)


def header(cfg: RunConfig) -> str:
    return (f"# randlab {__version__}\n# config {cfg.echo()}\n"
            f"# constants {registry_digest()}\n# seed {cfg.seed}\n")


def meta(cfg: RunConfig) -> dict:
    return {"version": __version__, "config": json.loads(cfg.echo()),
            "constants": registry_digest(), "seed": cfg.seed}


def _emit(cfg: RunConfig, body: str, json_mode: bool = False):
    text = body if json_mode else header(cfg) + body
    if cfg.out:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(cfg: RunConfig, payload: dict) -> str:
    return json.dumps({"meta": meta(cfg), **payload}, sort_keys=True, indent=1) + "\n"


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise MalformedInput(f"cannot read {path}: {e}") from e


def _load_measure(path: str) -> FiniteRationalMeasure:
    return FiniteRationalMeasure.from_json(_load_json(path))


def _rat(s: str) -> Fraction:
    try:
        return rat_from_str(s)
    except (ValueError, ZeroDivisionError) as e:
        raise MalformedInput(f"bad rational {s!r}") from e


def _computable_measure(text: str):
    if text == "uniform":
        return UniformMeasure()
    if text.startswith("uniform:"):
        _, a, b = text.split(":")
        return UniformMeasure(_rat(a), _rat(b))
    if text.startswith("bernoulli:"):
        return BernoulliSequenceMeasure(_rat(text.split(":", 1)[1]))
    return AtomicMeasure(_load_measure(text))


def _fmt_h(h) -> str:
    return "inf" if h == inf else str(h)


# ---------------------------------------------------------------- subcommands


def cmd_prokhorov(cfg, a):
    mu, nu = _load_measure(a.a), _load_measure(a.b)
    iv = prokhorov_distance(mu, nu, cfg.k)
    return f"lo,hi\n{rat_to_str(iv.lo)},{rat_to_str(iv.hi)}\n"


def cmd_couple(cfg, a):
    mu, nu = _load_measure(a.a), _load_measure(a.b)
    res = strassen_couple(mu, nu, _rat(a.eps))
    if isinstance(res, Coupling):
        m1, m2 = res.marginals()
        if m1 != mu or m2 != nu or res.mismatch > res.eps:
            raise InvariantViolation("coupling marginals or mismatch check failed")
        return _dump_json(cfg, {"feasible": True, "joint": res.joint.to_json(),
                                "mismatch": rat_to_str(res.mismatch)})
    return _dump_json(cfg, {"feasible": False, "flow": rat_to_str(res.flow),
                            "required": rat_to_str(res.required)})


def cmd_integrate(cfg, a):
    mu = _computable_measure(a.measure)
    space = mu.space
    if a.expr:
        f = from_sexpr(a.expr, space)
    elif a.index:
        f = enumerate_E(space, a.index)
    else:
        raise MalformedInput("give --expr or --index")
    iv = integrate_expr(mu, f, _rat(a.eps))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["expr", "lo", "hi"])
    w.writerow([to_sexpr(f), rat_to_str(iv.lo), rat_to_str(iv.hi)])
    return buf.getvalue()


def cmd_cells(cfg, a):
    mu = _computable_measure(a.measure)
    seq = separating_sequence(mu.space)
    eps = _rat(a.eps)
    cells = [format(v, "0%db" % a.depth) if a.depth else "" for v in range(1 << a.depth)]
    br = {s: cell_measure(seq, mu, s, eps, use_closed_form=not a.generic) for s in cells}
    return partition_csv(br, label=lambda s: s or "-")


def cmd_complexity(cfg, a):
    cond = hex_to_bits(a.cond) if a.cond else ""
    table = enumerate_halting(cfg.budget, cond, cfg.threads)
    if a.x:
        outs = [hex_to_bits(x) for x in a.x]
    elif a.all_strings is not None:
        outs = [format(v, "0%db" % n) if n else "" for n in range(a.all_strings + 1) for v in range(1 << n)]
    else:
        outs = None
    if table.kraft > 1:
        raise InvariantViolation("Kraft sum exceeds 1")
    body = table_to_csv(table, outs)
    return body + f"# kraft {rat_to_str(table.kraft)}\n# programs {len(table.halting)}\n"


def cmd_deficiency(cfg, a):
    mu = _load_measure(a.measure)
    lines = ["x,neg_log_mu_lower,H_t,bound"]
    for xs in a.x:
        x = hex_to_bits(xs)
        est = deficiency_discrete(x, mu, cfg.budget, cfg.k)
        bound = "-inf" if est.lower_bound == -inf else rat_to_str(est.lower_bound)
        lines.append(f"{bits_to_hex(x)},{rat_to_str(est.witness['neg_log_mu_lower'])},"
                     f"{_fmt_h(est.witness['H_t'])},{bound}")
    return "\n".join(lines) + "\n"


def cmd_trim(cfg, a):
    d = _load_json(a.test)
    try:
        space = space_from_json(d["space"])
        pts = tuple(space.decode(p) for p in d["points"])
        fs = FiniteSpace(space, pts)
        h = TestApproximant.from_json(d["test"], space)
    except (KeyError, TypeError) as e:
        raise MalformedInput(f"malformed trim input: {e}") from e
    res = test_trim(h, fs)
    out = res.certificate(fs)
    out["trimmed"] = res.trimmed.to_json(space)
    return _dump_json(cfg, out)


def _load_kernel(path: str) -> DiscreteKernel:
    d = _load_json(path)
    try:
        src, tgt = space_from_json(d["source"]), space_from_json(d["target"])
        rows = tuple((src.decode(r["point"]), FiniteRationalMeasure.from_json(r["measure"]))
                     for r in d["rows"])
    except (KeyError, TypeError) as e:
        raise MalformedInput(f"malformed kernel: {e}") from e
    return DiscreteKernel(src, tgt, rows)


def cmd_conserve(cfg, a):
    kernel = _load_kernel(a.kernel)
    mu = _load_measure(a.measure)
    fd = _load_json(a.test)
    f = {kernel.target.decode(r["point"]): _rat(r["value"]) for r in fd["values"]}
    try:
        u, cert = conservation_pullback(kernel, f, mu)
    except NotATestError as e:
        raise MalformedInput(str(e)) from e
    if not cert.verified:
        raise InvariantViolation("pullback certificate failed")
    return _dump_json(cfg, {
        "u": [{"point": kernel.source.encode(x), "value": rat_to_str(v)} for x, v in u.items()],
        "mu_u": rat_to_str(cert.mu_u), "pushed_f": rat_to_str(cert.pushed_f), "verified": cert.verified})


def cmd_counterexample(cfg, a):
    mu, rows = counterexample_measure(a.n_max, cfg.budget)
    lines = ["n,x,y,neg_log_mu,H_t,margin,m_t(n),test_value"]
    for r in rows:
        margin = "-inf" if r.H_t == inf else str(r.margin)
        lines.append(f"{r.n},{bits_to_hex(r.x)},{bits_to_hex(r.y)},{r.neg_log_mu},{_fmt_h(r.H_t)},"
                     f"{margin},{rat_to_str(r.m_t_n)},{rat_to_str(r.test_value)}")
    total = sum((r.m_t_n for r in rows), Fraction(0))
    if total >= 1 or any(r.H_t <= r.n for r in rows):
        raise InvariantViolation("counterexample construction violated its guarantees")
    return "\n".join(lines) + f"\n# mean_test {rat_to_str(total)}\n"


def _naturals_dict(path: str) -> Dict[int, Fraction]:
    mu = _load_measure(path)
    if not isinstance(mu.space, Naturals):
        raise MalformedInput("neutrality probes need measures on the naturals")
    return mu.as_dict()


def cmd_neutrality(cfg, a):
    nu = _naturals_dict(a.nu)
    mus = [_naturals_dict(p) for p in a.mu]
    try:
        pr = neutrality_probe(lambda i: nu, a.n, a.kk, a.max_stage, mus)
    except NotInJ as e:
        raise MalformedInput(str(e)) from e
    lines = ["n,k,j,x,measure,f,normalization"]
    for i, (f, s) in enumerate(zip(pr.f_values, pr.normalizations)):
        lines.append(f"{pr.n},{pr.k},{pr.j},{pr.x},{i},{rat_to_str(f)},{rat_to_str(s)}")
    if not mus:
        lines.append(f"{pr.n},{pr.k},{pr.j},{pr.x},-,-,-")
    return "\n".join(lines) + "\n"


def cmd_entropy(cfg, a):
    mu = _load_measure(a.a)
    nu = COUNTING if a.b is None else _load_measure(a.b)
    r = relative_entropy(mu, nu, cfg.k)
    if r.value is None:
        return "lo,hi\n-inf,-inf\n"
    return f"lo,hi\n{rat_to_str(r.value.lo)},{rat_to_str(r.value.hi)}\n"


def cmd_addition(cfg, a):
    reports, needed = addition_sweep(a.nbits, cfg.budget, a.c, cfg.threads)
    body = addition_csv(reports, cfg.budget)
    held = all(r.holds for r in reports)
    return body + f"# needed_c {needed}\n# pinned_c {a.c}\n# holds {str(held).lower()}\n"


# ---------------------------------------------------------------- report


def _seeded_measure(rng: random.Random, space, points, denom=8):
    k = rng.randint(1, len(points))
    chosen = rng.sample(points, k)
    cuts = sorted(rng.randint(0, denom) for _ in range(k - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [denom])]
    return FiniteRationalMeasure.from_pairs(space, ((x, Fraction(p, denom)) for x, p in zip(chosen, parts)))


def run_report(cfg: RunConfig, outdir: str) -> List[str]:
    """Write the standard suite of reports into ``outdir``; returns file names."""
    os.makedirs(outdir, exist_ok=True)
    rng = random.Random(cfg.seed)
    written = []

    def put(name, body):
        sub = RunConfig(cfg.subcommand, [name], cfg.budget, cfg.k, cfg.seed)
        with open(os.path.join(outdir, name), "w", newline="\n") as fh:
            fh.write(header(sub) + body)
        written.append(name)

    U = UnitInterval()
    pts = [Fraction(i, 4) for i in range(5)]
    lines = ["pair,mu,nu,lo,hi"]
    for i in range(40):
        mu, nu = _seeded_measure(rng, U, pts), _seeded_measure(rng, U, pts)
        iv = prokhorov_distance(mu, nu, cfg.k)
        lines.append(f"{i},{_short(mu)},{_short(nu)},{rat_to_str(iv.lo)},{rat_to_str(iv.hi)}")
    put("prokhorov.csv", "\n".join(lines) + "\n")

    seq = separating_sequence(U)
    br = {format(v, "04b"): cell_measure(seq, UniformMeasure(), format(v, "04b"), Fraction(1, 64))
          for v in range(16)}
    put("cells_uniform_depth4.csv", partition_csv(br))

    table = enumerate_halting(cfg.budget, "", cfg.threads)
    outs = [format(v, "0%db" % n) if n else "" for n in range(9) for v in range(1 << n)]
    put("complexity_le8.csv", table_to_csv(table, outs) + f"# kraft {rat_to_str(table.kraft)}\n")

    D = DiscreteStrings()
    u8 = uniform(D, [format(v, "08b") for v in range(256)])
    lines = ["x,neg_log_mu_lower,H_t,bound"]
    for x, _ in u8.atoms:
        est = deficiency_discrete(x, u8, cfg.budget, cfg.k)
        b = "-inf" if est.lower_bound == -inf else rat_to_str(est.lower_bound)
        lines.append(f"{bits_to_hex(x)},{rat_to_str(est.witness['neg_log_mu_lower'])},"
                     f"{_fmt_h(est.witness['H_t'])},{b}")
    put("deficiency_uniform8.csv", "\n".join(lines) + "\n")

    mu, rows = counterexample_measure(min(16, cfg.budget.max_len), cfg.budget)
    lines = ["n,y,H_t,m_t(n),test_value"]
    lines += [f"{r.n},{bits_to_hex(r.y)},{_fmt_h(r.H_t)},{rat_to_str(r.m_t_n)},{rat_to_str(r.test_value)}"
              for r in rows]
    put("counterexample.csv", "\n".join(lines) + "\n")

    reports, needed = addition_sweep(6, cfg.budget, 2, cfg.threads)
    put("addition_6bit.csv", addition_csv(reports, cfg.budget) + f"# needed_c {needed}\n")

    N = Naturals()
    fs = FiniteSpace(N, (0, 1, 2))
    cands = []
    for _ in range(4):
        terms = []
        for _ in range(rng.randint(1, 3)):
            V = frozenset(rng.sample([0, 1, 2], rng.randint(1, 2)))
            r = Fraction(rng.randint(1, 8), 4)
            if rng.random() < 0.5:
                terms.append(Term(V, r))
            else:
                terms.append(Term(V, r, _seeded_measure(rng, N, [0, 1, 2], 4), Fraction(rng.randint(1, 4), 4)))
        cands.append(TestApproximant(tuple(terms)))
    t = universal_test_finite(cands, fs)
    sup = t.sup(fs)
    payload = {"parts": [{"weight": rat_to_str(w), "test": h.to_json(N)} for w, h in t.parts],
               "sup": rat_to_str(sup.value)}
    put("universal_test.json", json.dumps(payload, sort_keys=True, indent=1) + "\n")
    return written


def _short(mu: FiniteRationalMeasure) -> str:
    return " ".join(f"{mu.space.encode(x)}:{rat_to_str(m)}" for x, m in mu.atoms)


def cmd_report(cfg, a):
    if not cfg.out:
        raise MalformedInput("report needs --out DIR")
    names = run_report(cfg, cfg.out)
    sys.stdout.write(header(cfg) + "\n".join(names) + "\n")
    return None


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise MalformedInput(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--budget", default="24:100000", help="max_len:max_steps")
    common.add_argument("-k", type=int, default=20, help="precision (bits)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default=None)

    p = _Parser(prog="randlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"randlab {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    s = sub.add_parser("prokhorov", parents=[common])
    s.add_argument("a")
    s.add_argument("b")

    s = sub.add_parser("couple", parents=[common])
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--eps", required=True)

    s = sub.add_parser("integrate", parents=[common])
    s.add_argument("--measure", default="uniform")
    s.add_argument("--expr")
    s.add_argument("--index", type=int)
    s.add_argument("--eps", default="1/1024")

    s = sub.add_parser("cells", parents=[common])
    s.add_argument("--measure", default="uniform")
    s.add_argument("--depth", type=int, default=3)
    s.add_argument("--eps", default="1/64")
    s.add_argument("--generic", action="store_true", help="bracket without closed forms")

    s = sub.add_parser("complexity", parents=[common])
    s.add_argument("--all-strings", type=int, dest="all_strings")
    s.add_argument("--x", nargs="*")
    s.add_argument("--cond", help="condition tape (hex, n:hex or b:bits)")

    s = sub.add_parser("deficiency", parents=[common])
    s.add_argument("--measure", required=True)
    s.add_argument("--x", nargs="+", required=True)

    s = sub.add_parser("trim", parents=[common])
    s.add_argument("test")

    s = sub.add_parser("conserve", parents=[common])
    s.add_argument("--kernel", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--measure", required=True)

    s = sub.add_parser("counterexample", parents=[common])
    s.add_argument("--n-max", type=int, default=16, dest="n_max")

    s = sub.add_parser("neutrality", parents=[common])
    s.add_argument("--nu", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--kk", type=int, required=True, help="the block index k")
    s.add_argument("--mu", nargs="*", default=[])
    s.add_argument("--max-stage", type=int, default=64, dest="max_stage")

    s = sub.add_parser("entropy", parents=[common])
    s.add_argument("a")
    s.add_argument("b", nargs="?")

    s = sub.add_parser("addition", parents=[common])
    s.add_argument("--nbits", type=int, default=6)
    s.add_argument("--c", type=int, default=2)

    sub.add_parser("report", parents=[common])
    return p


HANDLERS = {name: globals()[f"cmd_{name}"] for name in SUBCOMMANDS}
JSON_OUTPUT = {"couple", "trim", "conserve"}
_COMMON = {"budget", "k", "seed", "threads", "out", "subcommand"}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        a = build_parser().parse_args(argv)
        budget = Budget.parse(a.budget)
        if budget.max_len <= 0 or budget.max_steps <= 0 or a.k < 0 or a.threads < 1:
            raise MalformedInput("budget, precision and threads must be positive")
        extra = {key: v for key, v in vars(a).items() if key not in _COMMON}
        inputs = [v for key, v in sorted(extra.items()) if key in ("a", "b", "measure", "test", "kernel", "nu")
                  and isinstance(v, str)]
        cfg = RunConfig(a.subcommand, inputs, budget, a.k, a.seed, a.out, a.threads, extra)
        body = HANDLERS[a.subcommand](cfg, a)
        if body is not None:
            _emit(cfg, body, json_mode=a.subcommand in JSON_OUTPUT)
        return EXIT_OK
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    except CapacityExceeded as e:
        sys.stderr.write(f"randlab: capacity exceeded: {e}\n")
        return EXIT_CAPACITY
    except (MalformedInput, MeasureError, ValueError, KeyError, IntegrationBudgetError) as e:
        sys.stderr.write(f"randlab: malformed input: {e}\n")
        return EXIT_MALFORMED
    except (InvariantViolation, AssertionError, ArithmeticError) as e:
        sys.stderr.write(f"randlab: internal invariant violated: {e}\n"
                         "This is a bug; please report it with the command line and input files.\n")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
