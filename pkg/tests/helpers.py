"""Shared test utilities: signatures, random formulas, tree transcriptions."""

from __future__ import annotations

import random
import re
from pathlib import Path

from dlx.calculus import DISPLAY, SYNTH, Derivation, INTRO_INV, CONTR, Meta, display_key, metas, parse_structural_sequent
from dlx.language import BOT, TOP, App, Var, ensure_expanded, load_signature

DATA = Path(__file__).parent / "data"

SIG_TEXT = (DATA / "sig.le").read_text()

# the random pool adds an antitone binary F and unary order-reversing pair
RANDOM_SIG_TEXT = """
F: dia 1 (1)
G: box 1 (1)
F: otimes 2 (1,1)
G: oplus 2 (1,1)
G: to 2 (d,1)
F: minus 2 (d,1)
F: fd 1 (d)
G: gd 1 (d)
"""

RANDOM_OPS = [
    ("dia", 1), ("box", 1), ("otimes", 2), ("oplus", 2), ("to", 2),
    ("minus", 2), ("fd", 1), ("gd", 1), ("and", 2), ("or", 2),
]


def signature(mode="le", text=SIG_TEXT):
    return ensure_expanded(load_signature(text).with_mode(mode))


def random_formula(rng: random.Random, depth: int, ops=RANDOM_OPS, names="pqr", constants=0.05):
    if depth == 0 or rng.random() < 0.25:
        r = rng.random()
        if r < constants:
            return TOP
        if r < 2 * constants:
            return BOT
        return Var(rng.choice(names))
    op, n = rng.choice(ops)
    return App(op, tuple(random_formula(rng, depth - 1, ops, names, constants) for _ in range(n)))


def random_sequent(rng, depth=3, **kw):
    return random_formula(rng, depth, **kw), random_formula(rng, depth, **kw)


# ---------------------------------------------------------------- transcribed trees

_LINE = re.compile(r"^( *)(.*?)\s+\[([^\]]+)\]\s*$")


def parse_tree(text: str, sig) -> Derivation:
    """Indented ``sequent [rule]`` lines, conclusion first."""
    rows = []
    for raw in text.strip("\n").splitlines():
        if not raw.strip():
            continue
        m = _LINE.match(raw)
        assert m, raw
        rows.append((len(m.group(1)) // 2, parse_structural_sequent(m.group(2), sig), m.group(3)))

    def build(i):
        depth, seq, rule = rows[i]
        kids, j = [], i + 1
        while j < len(rows) and rows[j][0] > depth:
            assert rows[j][0] == depth + 1, rows[j]
            kid, j = build(j)
            kids.append(kid)
        return Derivation(seq, rule, tuple(kids)), j

    d, end = build(0)
    assert end == len(rows)
    return d


_STRUCTURAL = {"W_L", "W_R", "E_L", "E_R"}


def canonical_tree(d: Derivation, rules: dict):
    """Comparison form of a derivation.

    Display steps and weakening/exchange runs are contracted, sequents are
    compared up to display equivalence, synthesized rules are named ``SYN``,
    premise order is ignored, and unary runs of invertible introductions
    (with contraction) are compared as multisets of rule names.
    """

    def kind(name):
        if name == "disp":
            return DISPLAY
        if re.fullmatch(r"R\d+", name):
            return SYNTH
        return rules[name].kind

    def skip(n):
        while n.premises and (kind(n.rule) == DISPLAY or n.rule in _STRUCTURAL):
            n = n.premises[0]
        return n

    def label(n):
        return "SYN" if kind(n.rule) == SYNTH else n.rule

    def chainable(n):
        return len(n.premises) == 1 and kind(n.rule) in (INTRO_INV, CONTR)

    def canon(n):
        n = skip(n)
        if chainable(n):
            key = display_key(n.sequent, rules)
            names = []
            while chainable(n):
                names.append(label(n))
                n = skip(n.premises[0])
            return ("chain", key, tuple(sorted(names)), canon(n))
        kids = tuple(sorted((canon(p) for p in n.premises), key=repr))
        return (display_key(n.sequent, rules), label(n), kids)

    return canon(d)


def canonical_rule(rule) -> tuple:
    """Rule text with metavariables renamed by first occurrence; premises sorted."""
    from dlx.calculus import format_sequent, instantiate

    order = []

    def visit(s):
        if isinstance(s, Meta):
            if s.name not in order:
                order.append(s.name)
        elif hasattr(s, "args"):
            for a in s.args:
                visit(a)

    visit(rule.conclusion.lhs)
    visit(rule.conclusion.rhs)
    for p in rule.premises:
        for m in sorted(metas(p)):
            if m not in order:
                order.append(m)
    ren = {m: Meta(f"M{i}") for i, m in enumerate(order)}
    concl = format_sequent(instantiate(rule.conclusion, ren))
    prem = sorted(format_sequent(instantiate(p, ren)) for p in rule.premises)
    return tuple(prem), concl
