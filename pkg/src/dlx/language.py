"""Signatures, formulas, parsing and signed generation trees.

A signature declares connectives in two disjoint families: F (join-preserving
in positive coordinates, written with a hat at the structural level) and G
(meet-preserving, written with a check).  Every coordinate carries an
order-type entry, ``"1"`` for monotone and ``"d"`` for antitone.

Expansion adds one residual per coordinate of each declared connective.  The
residual of ``f`` in coordinate ``i`` is named ``f.ri`` and keeps the
primitive's coordinate order, with the displaced argument sitting at ``i``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import count

ONE = "1"
DUAL = "d"

LE = "le"
DLE = "dle"

PLUS = "+"
MINUS = "-"

# node classes
DELTA = "DeltaAdjoint"
SRA = "SRA"
SLR = "SLR"
SRR = "SRR"
LEAF = "Leaf"

SKELETON_CLASSES = frozenset({DELTA, SLR})
PIA_CLASSES = frozenset({SRA, SRR})

LATTICE = ("top", "bot", "and", "or")
RESERVED = frozenset({"and", "or", "top", "bot", "imp", "coimp", "T", "B"})
PLACEHOLDER = "_u"

_METAVAR_RE = re.compile(r"[XYZW]\d+$")
_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*$")


class SignatureError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        where = "" if pos is None else f" at position {pos}"
        super().__init__(f"{message}{where}")


def flip(entry: str) -> str:
    return DUAL if entry == ONE else ONE


def flip_sign(sign: str) -> str:
    return MINUS if sign == PLUS else PLUS


@dataclass(frozen=True)
class OrderType:
    entries: tuple[str, ...]

    def __post_init__(self):
        for e in self.entries:
            if e not in (ONE, DUAL):
                raise SignatureError(f"order-type entry must be 1 or d, got {e!r}")

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def opposite(self) -> "OrderType":
        return OrderType(tuple(flip(e) for e in self.entries))

    def __str__(self):
        return "(" + ",".join(self.entries) + ")"


@dataclass(frozen=True)
class Connective:
    name: str
    family: str  # "F" or "G"
    arity: int
    order_type: OrderType
    origin: tuple[str, int] | None = None  # (parent, 1-based coordinate) for residuals
    lattice: bool = False

    def eps(self, i: int) -> str:
        return self.order_type[i]

    @property
    def is_residual(self) -> bool:
        return self.origin is not None


@dataclass(frozen=True)
class Signature:
    mode: str
    connectives: dict = field(default_factory=dict)
    expanded: bool = False

    def __hash__(self):
        return hash((self.mode, tuple(sorted(self.connectives)), self.expanded))

    def __contains__(self, name):
        return name in self.connectives

    def __getitem__(self, name) -> Connective:
        try:
            return self.connectives[name]
        except KeyError:
            raise SignatureError(f"unknown connective {name!r}") from None

    def declared(self):
        return [c for c in self.connectives.values() if not c.is_residual and not c.lattice]

    def with_mode(self, mode: str) -> "Signature":
        if mode not in (LE, DLE):
            raise SignatureError(f"unknown mode {mode!r}")
        base = {n: c for n, c in self.connectives.items() if not c.is_residual}
        sig = Signature(mode, base, False)
        return expand_signature(sig) if self.expanded else sig

    def residual(self, name: str, coord: int) -> str:
        """Name of the residual of ``name`` in 0-based coordinate ``coord``."""
        return residual_name(self.mode, name, coord)


def residual_name(mode: str, name: str, coord: int) -> str:
    if mode == DLE and name == "and" and coord == 1:
        return "imp"
    if mode == DLE and name == "or" and coord == 0:
        return "coimp"
    return f"{name}.r{coord + 1}"


def _builtins() -> dict:
    return {
        "top": Connective("top", "F", 0, OrderType(()), lattice=True),
        "bot": Connective("bot", "G", 0, OrderType(()), lattice=True),
        "and": Connective("and", "F", 2, OrderType((ONE, ONE)), lattice=True),
        "or": Connective("or", "G", 2, OrderType((ONE, ONE)), lattice=True),
    }


_DECL_RE = re.compile(r"^([FG])\s*:\s*([A-Za-z][A-Za-z0-9_]*)\s+(\d+)\s*\(([^)]*)\)\s*$")


def load_signature(text: str) -> Signature:
    """Parse the line-based signature DSL.

    Lines are ``mode: le|dle`` or ``F: name arity (o1,...,on)`` and likewise
    for ``G``.  ``#`` starts a comment; ``;`` separates statements on one line.
    """
    mode = LE
    conns = _builtins()
    families: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        for stmt in line.split(";"):
            stmt = stmt.strip()
            if not stmt:
                continue
            if stmt.startswith("mode"):
                m = re.match(r"^mode\s*:\s*(\w+)$", stmt)
                if not m or m.group(1) not in (LE, DLE):
                    raise SignatureError(f"line {lineno}: bad mode declaration {stmt!r}")
                mode = m.group(1)
                continue
            m = _DECL_RE.match(stmt)
            if not m:
                raise SignatureError(f"line {lineno}: cannot parse {stmt!r}")
            fam, name, arity, ot = m.group(1), m.group(2), int(m.group(3)), m.group(4)
            if name in RESERVED or _METAVAR_RE.match(name):
                raise SignatureError(f"line {lineno}: {name!r} is reserved")
            entries = tuple(e.strip() for e in ot.split(",")) if ot.strip() else ()
            if len(entries) != arity:
                raise SignatureError(
                    f"line {lineno}: order-type of {name!r} has {len(entries)} entries, arity is {arity}"
                )
            if name in families:
                if families[name] != fam:
                    raise SignatureError(f"line {lineno}: {name!r} declared in both F and G")
                raise SignatureError(f"line {lineno}: duplicate connective {name!r}")
            families[name] = fam
            conns[name] = Connective(name, fam, arity, OrderType(entries))
    return Signature(mode, conns, False)


def residual_connectives(mode: str, c: Connective) -> list[Connective]:
    out = []
    for i in range(c.arity):
        if c.family == "F":
            fam = "G" if c.eps(i) == ONE else "F"
        else:
            fam = "F" if c.eps(i) == ONE else "G"
        entries = []
        for j in range(c.arity):
            if j == i or c.eps(i) == DUAL:
                entries.append(c.eps(j))
            else:
                entries.append(flip(c.eps(j)))
        out.append(
            Connective(residual_name(mode, c.name, i), fam, c.arity, OrderType(tuple(entries)), (c.name, i + 1))
        )
    return out


def expand_signature(sig: Signature) -> Signature:
    """Add the residuals of every primitive connective (one level)."""
    conns = dict(sig.connectives)
    for c in list(sig.connectives.values()):
        if c.is_residual or c.arity == 0:
            continue
        if c.lattice and sig.mode == LE:
            continue
        for r in residual_connectives(sig.mode, c):
            conns.setdefault(r.name, r)
    return Signature(sig.mode, conns, True)


def ensure_expanded(sig: Signature) -> Signature:
    return sig if sig.expanded else expand_signature(sig)


# ---------------------------------------------------------------- formulas


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class App:
    op: str
    args: tuple = ()


Formula = Var | App

TOP = App("top")
BOT = App("bot")


def is_leaf(f) -> bool:
    return isinstance(f, Var) or not f.args


def variables(f) -> list[str]:
    """Variables of ``f`` in order of first occurrence."""
    seen: dict[str, None] = {}

    def walk(g):
        if isinstance(g, Var):
            seen.setdefault(g.name)
        else:
            for a in g.args:
                walk(a)

    walk(f)
    return list(seen)


def subterm(f, path):
    for i in path:
        f = f.args[i]
    return f


def replace_at(f, path, new):
    if not path:
        return new
    i = path[0]
    args = list(f.args)
    args[i] = replace_at(args[i], path[1:], new)
    return App(f.op, tuple(args))


def size(f) -> int:
    if isinstance(f, Var):
        return 1
    return 1 + sum(size(a) for a in f.args)


def depth(f) -> int:
    if isinstance(f, Var) or not f.args:
        return 0
    return 1 + max(depth(a) for a in f.args)


# ---------------------------------------------------------------- tokenizer

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<turn>\|-)|(?P<sym>[&|(),])|(?P<at>@[A-Za-z][A-Za-z0-9_]*(?:\.r\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*))"
)


@dataclass
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(Token(kind, m.group(kind), start))
        pos = m.end()
    toks.append(Token("eof", "", n))
    return toks


class TokenStream:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.pos)
        return t


def parse_formula_tokens(ts: TokenStream, sig: Signature):
    left = _parse_conj(ts, sig)
    while ts.peek().text == "|":
        ts.next()
        left = App("or", (left, _parse_conj(ts, sig)))
    return left


def _parse_conj(ts, sig):
    left = _parse_atom(ts, sig)
    while ts.peek().text == "&":
        ts.next()
        left = App("and", (left, _parse_atom(ts, sig)))
    return left


def _parse_atom(ts, sig):
    t = ts.next()
    if t.text == "(":
        f = parse_formula_tokens(ts, sig)
        ts.expect(")")
        return f
    if t.kind != "name":
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos)
    name = t.text
    if name.startswith("_"):
        raise ParseError(f"identifier {name!r} is reserved", t.pos)
    if name == "T":
        return TOP
    if name == "B":
        return BOT
    if name in sig.connectives and name not in LATTICE:
        conn = sig[name]
        if conn.is_residual:
            raise ParseError(f"{name!r} is not a formula connective", t.pos)
        args = []
        if ts.peek().text == "(":
            ts.next()
            if ts.peek().text != ")":
                args.append(parse_formula_tokens(ts, sig))
                while ts.peek().text == ",":
                    ts.next()
                    args.append(parse_formula_tokens(ts, sig))
            ts.expect(")")
        if len(args) != conn.arity:
            raise ParseError(f"{name!r} expects {conn.arity} argument(s), got {len(args)}", t.pos)
        return App(name, tuple(args))
    if ts.peek().text == "(":
        raise ParseError(f"unknown connective {name!r}", t.pos)
    if name in LATTICE or not name[0].islower():
        raise ParseError(f"{name!r} is not a variable", t.pos)
    return Var(name)


def parse_formula(text: str, sig: Signature):
    ts = TokenStream(text)
    f = parse_formula_tokens(ts, sig)
    t = ts.peek()
    if t.kind != "eof":
        raise ParseError(f"trailing input {t.text!r}", t.pos)
    return f


def parse_sequent(text: str, sig: Signature):
    ts = TokenStream(text)
    lhs = parse_formula_tokens(ts, sig)
    ts.expect("|-")
    rhs = parse_formula_tokens(ts, sig)
    t = ts.peek()
    if t.kind != "eof":
        raise ParseError(f"trailing input {t.text!r}", t.pos)
    return lhs, rhs


_PREC = {"or": 1, "and": 2}


def format_formula(f, parent_prec: int = 0, right: bool = False) -> str:
    if not isinstance(f, App):
        return f.name
    if f.op == "top":
        return "T"
    if f.op == "bot":
        return "B"
    if f.op in _PREC:
        p = _PREC[f.op]
        sym = " & " if f.op == "and" else " | "
        s = format_formula(f.args[0], p) + sym + format_formula(f.args[1], p, right=True)
        if p < parent_prec or (p == parent_prec and right):
            return "(" + s + ")"
        return s
    if not f.args:
        return f.op
    return f.op + "(" + ", ".join(format_formula(a) for a in f.args) + ")"


def format_sequent(lhs, rhs) -> str:
    return f"{format_formula(lhs)} |- {format_formula(rhs)}"


# ---------------------------------------------------------------- signed trees


@dataclass(frozen=True)
class SignedNode:
    formula: object
    sign: str
    path: tuple
    children: tuple = ()
    classes: frozenset = frozenset()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def leaves(self):
        return [n for n in self.walk() if n.is_leaf]


def child_sign(sig: Signature, f, i: int, sign: str) -> str:
    conn = sig[f.op]
    return sign if conn.eps(i) == ONE else flip_sign(sign)


def signed_tree(f, sign: str, sig: Signature, path: tuple = ()) -> SignedNode:
    if isinstance(f, Var) or not f.args:
        return SignedNode(f, sign, path, (), frozenset({LEAF}))
    kids = tuple(
        signed_tree(a, child_sign(sig, f, i, sign), sig, path + (i,)) for i, a in enumerate(f.args)
    )
    return SignedNode(f, sign, path, kids, classify_formula(f, sign, sig))


def classify_formula(f, sign: str, sig: Signature, mode: str | None = None) -> frozenset:
    """Admissible classes of the node ``sign f`` (Tables 1/2 reading)."""
    mode = mode or sig.mode
    if isinstance(f, Var) or not f.args:
        return frozenset({LEAF})
    op = f.op
    pos = sign == PLUS
    if op == "and":
        if pos:
            return frozenset({SRA} if mode == LE else {SRA, SLR})
        return frozenset({DELTA} if mode == LE else {DELTA, SRR})
    if op == "or":
        if pos:
            return frozenset({DELTA} if mode == LE else {DELTA, SRR})
        return frozenset({SRA} if mode == LE else {SRA, SLR})
    conn = sig[op]
    n = conn.arity
    if conn.family == "F":
        if pos:
            return frozenset({SLR})
        return frozenset({SRA} if n == 1 else {SRR})
    if pos:
        return frozenset({SRA} if n == 1 else {SRR})
    return frozenset({SLR})


def classify(node: SignedNode, mode: str, sig: Signature) -> frozenset:
    return classify_formula(node.formula, node.sign, sig, mode)


def is_skeleton_formula(f, sign: str, sig: Signature) -> bool:
    """True when the node, sitting under Skeleton ancestors only, is Skeleton."""
    return bool(classify_formula(f, sign, sig) & SKELETON_CLASSES)


def fresh_names(prefix: str):
    for i in count():
        yield f"{prefix}{i}"
