"""Structures, rule schemas, rule application and the derivation checker.

A structure is a formula leaf (``SF``), a structural connective applied to
structures (``SApp``, printed ``@name(...)``) or a metavariable (``Meta``).
Metavariables of kind ``"S"`` stand for structures, ``"F"`` for formulas and
``"A"`` for atoms; structure metavariables are the names matching
``X1``, ``Y2``, ... in rule text.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field

from .language import (
    DLE,
    LE,
    ONE,
    App,
    ParseError,
    Signature,
    TokenStream,
    Var,
    ensure_expanded,
    format_formula,
    parse_formula_tokens,
)

# rule kinds
ID = "Id"
CUT = "Cut"
DISPLAY = "Display"
STRUCT = "StructuralBase"
INTRO_INV = "LogicalIntroInvertible"
INTRO = "LogicalIntroNonInvertible"
WEAK = "Weakening"
EXCH = "Exchange"
CONTR = "Contraction"
ASSOC = "Associativity"
SYNTH = "Synthesized"

METAVAR_RE = re.compile(r"[XYZW]\d+$")


@dataclass(frozen=True, slots=True)
class Meta:
    name: str
    kind: str = "S"


@dataclass(frozen=True, slots=True)
class SF:
    formula: object


@dataclass(frozen=True, slots=True)
class SApp:
    op: str
    args: tuple = ()


@dataclass(frozen=True, slots=True)
class Sequent:
    lhs: object
    rhs: object

    def side(self, s: str):
        return self.lhs if s == "L" else self.rhs

    def with_side(self, s: str, new) -> "Sequent":
        return Sequent(new, self.rhs) if s == "L" else Sequent(self.lhs, new)

    def __str__(self):
        return format_sequent(self)


def other(side: str) -> str:
    return "R" if side == "L" else "L"


# ---------------------------------------------------------------- printing / parsing


def format_structure(s) -> str:
    if isinstance(s, Meta):
        return s.name
    if isinstance(s, SF):
        return format_formula(s.formula)
    if not s.args:
        return "@" + s.op
    return "@" + s.op + "(" + ", ".join(format_structure(a) for a in s.args) + ")"


def format_sequent(seq: Sequent) -> str:
    return f"{format_structure(seq.lhs)} |- {format_structure(seq.rhs)}"


def parse_structure_tokens(ts: TokenStream, sig: Signature):
    t = ts.peek()
    if t.kind == "at":
        ts.next()
        name = t.text[1:]
        if name not in sig.connectives:
            raise ParseError(f"unknown structural connective {t.text!r}", t.pos)
        conn = sig[name]
        if conn.lattice and conn.arity and sig.mode == LE:
            raise ParseError(f"{t.text!r} has no structural counterpart in mode le", t.pos)
        args = []
        if ts.peek().text == "(":
            ts.next()
            if ts.peek().text != ")":
                args.append(parse_structure_tokens(ts, sig))
                while ts.peek().text == ",":
                    ts.next()
                    args.append(parse_structure_tokens(ts, sig))
            ts.expect(")")
        if len(args) != conn.arity:
            raise ParseError(f"{t.text!r} expects {conn.arity} argument(s), got {len(args)}", t.pos)
        return SApp(name, tuple(args))
    if t.kind == "name" and METAVAR_RE.match(t.text) and ts.toks[ts.i + 1].text != "(":
        ts.next()
        return Meta(t.text)
    return SF(parse_formula_tokens(ts, sig))


def parse_structure(text: str, sig: Signature):
    ts = TokenStream(text)
    s = parse_structure_tokens(ts, ensure_expanded(sig))
    if ts.peek().kind != "eof":
        raise ParseError(f"trailing input {ts.peek().text!r}", ts.peek().pos)
    return s


def parse_structural_sequent(text: str, sig: Signature) -> Sequent:
    sig = ensure_expanded(sig)
    ts = TokenStream(text)
    lhs = parse_structure_tokens(ts, sig)
    ts.expect("|-")
    rhs = parse_structure_tokens(ts, sig)
    if ts.peek().kind != "eof":
        raise ParseError(f"trailing input {ts.peek().text!r}", ts.peek().pos)
    return Sequent(lhs, rhs)


def side_errors(seq: Sequent, sig: Signature) -> list:
    """Structural connectives sitting on the wrong side of the turnstile."""
    errs = []

    def walk(s, side):
        if not isinstance(s, SApp):
            return
        conn = sig[s.op]
        want = "L" if conn.family == "F" else "R"
        if side != want:
            errs.append(f"@{s.op} occurs in {'precedent' if side == 'L' else 'succedent'} position")
        for i, a in enumerate(s.args):
            walk(a, side if conn.eps(i) == ONE else other(side))

    walk(seq.lhs, "L")
    walk(seq.rhs, "R")
    return errs


# ---------------------------------------------------------------- matching


def match(pat, term, sub: dict) -> bool:
    """Extend ``sub`` so that ``pat`` instantiates to ``term`` (non-linear)."""
    if isinstance(pat, Meta):
        if pat.kind == "S":
            ok = isinstance(term, (SF, SApp, Meta))
        elif pat.kind == "A":
            ok = isinstance(term, Var)
        else:
            ok = isinstance(term, (Var, App))
        if not ok:
            return False
        if pat.name in sub:
            return sub[pat.name] == term
        sub[pat.name] = term
        return True
    if type(pat) is not type(term):
        return False
    if isinstance(pat, SF):
        return match(pat.formula, term.formula, sub)
    if isinstance(pat, Var):
        return pat == term
    if pat.op != term.op or len(pat.args) != len(term.args):
        return False
    return all(match(p, t, sub) for p, t in zip(pat.args, term.args))


def match_sequent(pat: Sequent, seq: Sequent, sub: dict | None = None) -> dict | None:
    sub = dict(sub or {})
    if match(pat.lhs, seq.lhs, sub) and match(pat.rhs, seq.rhs, sub):
        return sub
    return None


def instantiate(pat, sub: dict):
    if isinstance(pat, Meta):
        if pat.name not in sub:
            raise KeyError(pat.name)
        return sub[pat.name]
    if isinstance(pat, Sequent):
        return Sequent(instantiate(pat.lhs, sub), instantiate(pat.rhs, sub))
    if isinstance(pat, SF):
        return SF(instantiate(pat.formula, sub))
    if isinstance(pat, Var):
        return pat
    if isinstance(pat, SApp):
        return SApp(pat.op, tuple(instantiate(a, sub) for a in pat.args))
    return App(pat.op, tuple(instantiate(a, sub) for a in pat.args))


def metas(pat, out: set | None = None) -> set:
    out = set() if out is None else out
    if isinstance(pat, Meta):
        out.add(pat.name)
    elif isinstance(pat, Sequent):
        metas(pat.lhs, out)
        metas(pat.rhs, out)
    elif isinstance(pat, SF):
        metas(pat.formula, out)
    elif isinstance(pat, (SApp, App)):
        for a in pat.args:
            metas(a, out)
    return out


class RuleError(ValueError):
    pass


@dataclass(frozen=True)
class RuleSchema:
    name: str
    premises: tuple
    conclusion: Sequent
    kind: str
    principal: object = None  # formula pattern of the principal formula
    side: str | None = None  # side of the principal formula in the conclusion
    conn: str | None = None
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __str__(self):
        return format_rule(self)


def format_rule(rule: RuleSchema) -> str:
    prem = [format_sequent(p) for p in rule.premises]
    concl = format_sequent(rule.conclusion)
    width = max([len(concl)] + [len(p) for p in prem])
    return "\n".join(prem + ["-" * width + f" {rule.name}", concl])


def match_and_apply(rule: RuleSchema, conclusion: Sequent) -> list:
    """Premises obtained by applying ``rule`` backward to ``conclusion``."""
    sub = match_sequent(rule.conclusion, conclusion)
    if sub is None:
        raise RuleError(f"{rule.name}: conclusion does not match {format_sequent(conclusion)}")
    missing = set().union(*(metas(p) for p in rule.premises)) - set(sub) if rule.premises else set()
    if missing:
        raise RuleError(f"{rule.name}: ambiguous backward application, {sorted(missing)} unbound")
    return [instantiate(p, sub) for p in rule.premises]


def apply(rule: RuleSchema, premises: list) -> Sequent:
    """Conclusion obtained by applying ``rule`` forward to ``premises``."""
    if len(premises) != len(rule.premises):
        raise RuleError(f"{rule.name}: expects {len(rule.premises)} premise(s)")
    sub: dict = {}
    for pat, seq in zip(rule.premises, premises):
        sub = match_sequent(pat, seq, sub)
        if sub is None:
            raise RuleError(f"{rule.name}: premise does not match {format_sequent(seq)}")
    missing = metas(rule.conclusion) - set(sub)
    if missing:
        raise RuleError(f"{rule.name}: ambiguous forward application, {sorted(missing)} unbound")
    return instantiate(rule.conclusion, sub)


# ---------------------------------------------------------------- base rules

P, Q, T = Meta("P"), Meta("Q"), Meta("U")


def _s(i):
    return Meta(f"S{i}")


def _a(i):
    return Meta(f"A{i}", "F")


def _seq(l, r):
    return Sequent(l, r)


def display_rules(sig: Signature) -> list:
    """Both directions of every display postulate of the expanded signature."""
    sig = ensure_expanded(sig)
    out = []
    for c in sig.connectives.values():
        if c.is_residual or c.arity == 0 or (c.lattice and sig.mode == LE):
            continue
        for i in range(c.arity):
            r = sig.residual(c.name, i)
            args = [_s(j) for j in range(c.arity)]
            if c.family == "F":
                a = _seq(SApp(c.name, tuple(args[:i] + [P] + args[i + 1 :])), T)
                res = SApp(r, tuple(args[:i] + [T] + args[i + 1 :]))
                b = _seq(P, res) if c.eps(i) == ONE else _seq(res, P)
            else:
                a = _seq(P, SApp(c.name, tuple(args[:i] + [Q] + args[i + 1 :])))
                res = SApp(r, tuple(args[:i] + [P] + args[i + 1 :]))
                b = _seq(res, Q) if c.eps(i) == ONE else _seq(Q, res)
            out.append(RuleSchema(f"disp[{c.name}>{r}]", (a,), b, DISPLAY, conn=c.name))
            out.append(RuleSchema(f"disp[{r}>{c.name}]", (b,), a, DISPLAY, conn=c.name))
    return out


def intro_rules(sig: Signature, c) -> list:
    n = c.arity
    principal = App(c.name, tuple(_a(i) for i in range(n)))
    pf = SF(principal)
    struct = SApp(c.name, tuple(SF(_a(i)) for i in range(n)))
    svars = SApp(c.name, tuple(_s(i) for i in range(n)))
    if c.family == "F":
        left = RuleSchema(f"{c.name}_L", (_seq(struct, T),), _seq(pf, T), INTRO_INV, principal, "L", c.name)
        prem = tuple(_seq(_s(i), SF(_a(i))) if c.eps(i) == ONE else _seq(SF(_a(i)), _s(i)) for i in range(n))
        right = RuleSchema(f"{c.name}_R", prem, _seq(svars, pf), INTRO, principal, "R", c.name)
    else:
        prem = tuple(_seq(SF(_a(i)), _s(i)) if c.eps(i) == ONE else _seq(_s(i), SF(_a(i))) for i in range(n))
        left = RuleSchema(f"{c.name}_L", prem, _seq(pf, svars), INTRO, principal, "L", c.name)
        right = RuleSchema(f"{c.name}_R", (_seq(P, struct),), _seq(P, pf), INTRO_INV, principal, "R", c.name)
    return [left, right]


def _le_lattice_rules() -> list:
    a, b = _a(0), _a(1)
    conj, disj = App("and", (a, b)), App("or", (a, b))
    return [
        RuleSchema("and_L1", (_seq(SF(a), T),), _seq(SF(conj), T), INTRO, conj, "L", "and"),
        RuleSchema("and_L2", (_seq(SF(b), T),), _seq(SF(conj), T), INTRO, conj, "L", "and"),
        RuleSchema("and_R", (_seq(P, SF(a)), _seq(P, SF(b))), _seq(P, SF(conj)), INTRO_INV, conj, "R", "and"),
        RuleSchema("or_L", (_seq(SF(a), T), _seq(SF(b), T)), _seq(SF(disj), T), INTRO_INV, disj, "L", "or"),
        RuleSchema("or_R1", (_seq(P, SF(a)),), _seq(P, SF(disj)), INTRO, disj, "R", "or"),
        RuleSchema("or_R2", (_seq(P, SF(b)),), _seq(P, SF(disj)), INTRO, disj, "R", "or"),
    ]


def _dle_structural_rules() -> list:
    AND, OR = "and", "or"
    X, Y, Z = Meta("X"), Meta("Y"), Meta("Z")
    top_s, bot_s = SApp("top"), SApp("bot")
    out = [
        RuleSchema("W_L", (_seq(Y, Z),), _seq(SApp(AND, (X, Y)), Z), WEAK),
        RuleSchema("W_R", (_seq(Z, X),), _seq(Z, SApp(OR, (X, Y))), WEAK),
        RuleSchema("E_L", (_seq(SApp(AND, (X, Y)), Z),), _seq(SApp(AND, (Y, X)), Z), EXCH),
        RuleSchema("E_R", (_seq(Z, SApp(OR, (X, Y))),), _seq(Z, SApp(OR, (Y, X))), EXCH),
        RuleSchema("C_L", (_seq(SApp(AND, (X, X)), Z),), _seq(X, Z), CONTR),
        RuleSchema("C_R", (_seq(Z, SApp(OR, (X, X))),), _seq(Z, X), CONTR),
    ]
    a_l = _seq(SApp(AND, (X, SApp(AND, (Y, Z)))), T)
    a_l2 = _seq(SApp(AND, (SApp(AND, (X, Y)), Z)), T)
    a_r = _seq(T, SApp(OR, (X, SApp(OR, (Y, Z)))))
    a_r2 = _seq(T, SApp(OR, (SApp(OR, (X, Y)), Z)))
    out += [
        RuleSchema("A_L", (a_l,), a_l2, ASSOC),
        RuleSchema("A_L.inv", (a_l2,), a_l, ASSOC),
        RuleSchema("A_R", (a_r,), a_r2, ASSOC),
        RuleSchema("A_R.inv", (a_r2,), a_r, ASSOC),
    ]
    u_l, u_l2 = _seq(X, Z), _seq(SApp(AND, (top_s, X)), Z)
    u_r, u_r2 = _seq(Z, X), _seq(Z, SApp(OR, (bot_s, X)))
    out += [
        RuleSchema("unit_L", (u_l,), u_l2, STRUCT),
        RuleSchema("unit_L.inv", (u_l2,), u_l, STRUCT),
        RuleSchema("unit_R", (u_r,), u_r2, STRUCT),
        RuleSchema("unit_R.inv", (u_r2,), u_r, STRUCT),
    ]
    return out


def base_rules(sig: Signature) -> dict:
    """Name -> schema for the basic calculus of the signature's mode."""
    sig = ensure_expanded(sig)
    p = Meta("p", "A")
    a = _a(0)
    rules = [
        RuleSchema("Id", (), _seq(SF(p), SF(p)), ID),
        RuleSchema("Cut", (_seq(P, SF(a)), _seq(SF(a), T)), _seq(P, T), CUT),
    ]
    rules += display_rules(sig)
    for c in sig.connectives.values():
        if c.lattice and c.arity and sig.mode == LE:
            continue
        rules += intro_rules(sig, c)
    if sig.mode == LE:
        rules += _le_lattice_rules()
        rules += [
            RuleSchema("top_W", (), _seq(P, SApp("top")), STRUCT),
            RuleSchema("bot_W", (), _seq(SApp("bot"), P), STRUCT),
        ]
    else:
        rules += _dle_structural_rules()
    out = {}
    for r in rules:
        if r.name in out:
            raise RuleError(f"duplicate rule name {r.name}")
        out[r.name] = r
    return out


# ---------------------------------------------------------------- derivations


@dataclass(frozen=True)
class Derivation:
    sequent: Sequent
    rule: str
    premises: tuple = ()

    def nodes(self):
        stack = [self]
        while stack:
            d = stack.pop()
            yield d
            stack.extend(reversed(d.premises))

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def height(self) -> int:
        if not self.premises:
            return 1
        return 1 + max(p.height() for p in self.premises)

    def leaves(self):
        return [d for d in self.nodes() if not d.premises]


@dataclass
class CheckResult:
    ok: bool
    path: tuple = ()
    reason: str = ""

    def __bool__(self):
        return self.ok


def check_node(d: Derivation, rules: dict, sig: Signature | None = None) -> str | None:
    rule = rules.get(d.rule)
    if rule is None:
        return f"unknown rule {d.rule!r}"
    if sig is not None:
        errs = side_errors(d.sequent, sig)
        if errs:
            return errs[0]
    if len(d.premises) != len(rule.premises):
        return f"{d.rule} expects {len(rule.premises)} premise(s), node has {len(d.premises)}"
    sub = match_sequent(rule.conclusion, d.sequent)
    if sub is None:
        return f"conclusion {format_sequent(d.sequent)} does not match {d.rule}"
    for i, (pat, child) in enumerate(zip(rule.premises, d.premises)):
        sub = match_sequent(pat, child.sequent, sub)
        if sub is None:
            return f"premise {i + 1} {format_sequent(child.sequent)} does not match {d.rule}"
    return None


def check_derivation(d: Derivation, rules: dict, sig: Signature | None = None) -> CheckResult:
    """Independent rule-by-rule check; reports the first failing node."""
    sig = ensure_expanded(sig) if sig is not None else None
    stack = [(d, ())]
    while stack:
        node, path = stack.pop()
        err = check_node(node, rules, sig)
        if err:
            return CheckResult(False, path, err)
        for i in reversed(range(len(node.premises))):
            stack.append((node.premises[i], path + (i,)))
    return CheckResult(True)


def is_cut_free(d: Derivation, rules: dict | None = None) -> bool:
    for n in d.nodes():
        if n.rule == "Cut" or (rules and rules.get(n.rule) and rules[n.rule].kind == CUT):
            return False
    return True


def principal_of(d: Derivation, rule: RuleSchema):
    if rule.principal is None:
        return None
    sub = match_sequent(rule.conclusion, d.sequent)
    if sub is None:
        return None
    return instantiate(rule.principal, sub), rule.side


# ---------------------------------------------------------------- display walks


def flip_display(name: str) -> str:
    m = re.match(r"disp\[(.+)>(.+)\]$", name)
    return f"disp[{m.group(2)}>{m.group(1)}]"


def _primitive(sig, op):
    c = sig[op]
    return c if not c.is_residual else sig[c.origin[0]]


def expose(seq: Sequent, side: str, path: tuple, sig: Signature, rules: dict):
    """Display the substructure at ``path`` of ``side`` as a whole side.

    Returns ``(steps, final_sequent, final_side)`` where ``steps`` is a list of
    ``(rule_name, sequent)`` read bottom-up: each rule derives the previous
    sequent from the listed one.
    """
    sig = ensure_expanded(sig)
    steps = []
    path = tuple(path)
    while path:
        root = seq.side(side)
        if not isinstance(root, SApp):
            raise RuleError(f"cannot display below {format_structure(root)}")
        conn = sig[root.op]
        coord = path[0]
        if not conn.is_residual:
            r = sig.residual(conn.name, coord)
            name = f"disp[{r}>{conn.name}]"
            (seq,) = match_and_apply(rules[name], seq)
            if conn.family == "F":
                side = "L" if conn.eps(coord) == ONE else "R"
            else:
                side = "R" if conn.eps(coord) == ONE else "L"
            path = path[1:]
        else:
            parent = sig[conn.origin[0]]
            pivot = conn.origin[1] - 1
            name = f"disp[{parent.name}>{conn.name}]"
            (seq,) = match_and_apply(rules[name], seq)
            if coord == pivot:
                side = side if parent.eps(pivot) == ONE else other(side)
                path = path[1:]
            else:
                side = "L" if parent.family == "F" else "R"
        steps.append((name, seq))
    return steps, seq, side


def undisplay(seq: Sequent, steps: list, rules: dict):
    """Replay ``steps`` backwards from ``seq``; returns the list of (rule, sequent)."""
    out = []
    for name, _ in reversed(steps):
        inv = flip_display(name)
        (seq,) = match_and_apply(rules[inv], seq)
        out.append((inv, seq))
    return out


def chain(steps: list, top: Derivation, bottom: Sequent) -> Derivation:
    """Stack unary steps under ``top``: ``steps`` is bottom-up from ``bottom``."""
    seqs = [bottom] + [s for _, s in steps]
    node = top
    for i in reversed(range(len(steps))):
        node = Derivation(seqs[i], steps[i][0], (node,))
    return node


def contract_displays(d: Derivation, rules: dict) -> Derivation:
    """Drop runs of display steps that come back to the sequent they left."""
    node = d
    while True:
        cur = node
        while cur.premises and rules.get(cur.rule) is not None and rules[cur.rule].kind == DISPLAY:
            cur = cur.premises[0]
            if cur.sequent == node.sequent:
                node = cur
                break
        else:
            break
    return Derivation(node.sequent, node.rule, tuple(contract_displays(p, rules) for p in node.premises))


def display_class(seq: Sequent, rules: dict, limit: int = 5000) -> set:
    disp = [r for r in rules.values() if r.kind == DISPLAY]
    seen = {seq}
    queue = deque([seq])
    while queue and len(seen) < limit:
        s = queue.popleft()
        for r in disp:
            sub = match_sequent(r.premises[0], s)
            if sub is None:
                continue
            try:
                nxt = instantiate(r.conclusion, sub)
            except KeyError:
                continue
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def display_key(seq: Sequent, rules: dict) -> str:
    return min(format_sequent(s) for s in display_class(seq, rules))


# ---------------------------------------------------------------- pre-normal form


def check_pre_normal_form(d: Derivation, rules: dict, skeleton: set, pia: set, mode: str) -> list:
    """Violations of pre-normal form; empty when ``d`` is pre-normal.

    ``skeleton`` and ``pia`` are sets of ``(formula, side)`` pairs naming the
    Skeleton and PIA nodes of the axiom (side ``"L"`` for positive nodes).
    """
    errs = []
    stack = [(d, False, ())]
    while stack:
        node, above, path = stack.pop()
        rule = rules.get(node.rule)
        where = "/".join(map(str, path)) or "root"
        if rule is None:
            errs.append(f"{where}: unknown rule {node.rule}")
            continue
        kind = rule.kind
        if kind == CUT:
            errs.append(f"{where}: cut")
        elif kind == SYNTH:
            if above:
                errs.append(f"{where}: second synthesized rule on a path")
            above = True
        elif kind in (DISPLAY, ID):
            pass
        elif kind in (INTRO, INTRO_INV):
            pf = principal_of(node, rule)
            if pf is None:
                errs.append(f"{where}: {node.rule} does not match {format_sequent(node.sequent)}")
                continue
            const = isinstance(pf[0], App) and not pf[0].args
            zone = pia if above else skeleton
            if not const and pf not in zone:
                tag = "PIA" if above else "Skeleton"
                errs.append(f"{where}: {node.rule} on {format_formula(pf[0])} outside the {tag} zone")
            elif not above and not const and kind == INTRO and not (mode == DLE and rule.conn in ("and", "or")):
                errs.append(f"{where}: non-invertible {node.rule} below the synthesized rule")
            elif above and not const and kind == INTRO_INV and not (mode == DLE and rule.conn in ("and", "or")):
                errs.append(f"{where}: invertible {node.rule} above the synthesized rule")
        elif kind == CONTR:
            if above or mode != DLE:
                errs.append(f"{where}: contraction above the synthesized rule")
        elif kind in (WEAK, EXCH):
            if not above:
                errs.append(f"{where}: {node.rule} below the synthesized rule")
        else:
            errs.append(f"{where}: {node.rule} not allowed in pre-normal form")
        if not node.premises and not above and kind != SYNTH:
            errs.append(f"{where}: path without a synthesized rule")
        for i in reversed(range(len(node.premises))):
            stack.append((node.premises[i], above, path + (i,)))
    return errs
