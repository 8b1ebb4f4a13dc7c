"""Recognition of (analytic) inductive sequents and their annotation.

A split assigns each internal node of the two signed trees (``+lhs`` and
``-rhs``) one admissible class.  Nodes whose classes include a Skeleton class
are kept in the Skeleton whenever every ancestor is Skeleton; this greedy
choice is the unique split with the largest Skeleton, it makes every branch
good whenever some split does, and it yields the fewest SRR nodes, so the
witness search only has to consider it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .language import (
    DELTA,
    DUAL,
    MINUS,
    ONE,
    PIA_CLASSES,
    PLUS,
    SKELETON_CLASSES,
    SRR,
    App,
    Signature,
    SignedNode,
    Var,
    classify_formula,
    ensure_expanded,
    format_formula,
    replace_at,
    signed_tree,
    variables,
)

SIDES = ("L", "R")
ROOT_SIGN = {"L": PLUS, "R": MINUS}


class NotAnalyticError(ValueError):
    pass


@dataclass(frozen=True)
class Witness:
    """An order-type ``epsilon`` over the variables and a strict order ``omega``."""

    eps: tuple = ()
    omega: frozenset = frozenset()

    @classmethod
    def make(cls, epsilon: dict, omega=()) -> "Witness":
        for v, e in epsilon.items():
            if e not in (ONE, DUAL):
                raise ValueError(f"epsilon({v}) must be 1 or d")
        closed = transitive_closure(set(omega))
        if any(a == b for a, b in closed):
            raise ValueError("omega is not irreflexive (cyclic order)")
        return cls(tuple(sorted(epsilon.items())), frozenset(closed))

    @property
    def epsilon(self) -> dict:
        return dict(self.eps)

    def less(self, a: str, b: str) -> bool:
        return (a, b) in self.omega

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "omega": sorted([list(p) for p in self.omega])}

    def __str__(self):
        eps = ",".join(f"{v}:{e}" for v, e in self.eps)
        om = ",".join(f"{a}<{b}" for a, b in sorted(self.omega))
        return f"eps={eps};omega={om}"


def parse_witness(text: str) -> Witness:
    """Parse ``eps=p:1,q:d;omega=p<q,p<r``."""
    eps: dict[str, str] = {}
    omega = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        key, _, val = part.partition("=")
        key = key.strip()
        items = [x.strip() for x in val.split(",") if x.strip()]
        if key == "eps":
            for it in items:
                v, _, e = it.partition(":")
                eps[v.strip()] = e.strip()
        elif key == "omega":
            for it in items:
                a, sep, b = it.partition("<")
                if not sep:
                    raise ValueError(f"bad omega entry {it!r}")
                omega.append((a.strip(), b.strip()))
        else:
            raise ValueError(f"unknown witness field {key!r}")
    return Witness.make(eps, omega)


def transitive_closure(pairs: set) -> set:
    closed = set(pairs)
    while True:
        extra = {(a, d) for a, b in closed for c, d in closed if b == c} - closed
        if not extra:
            return closed
        closed |= extra


def _acyclic(edges: set) -> bool:
    return not any(a == b for a, b in transitive_closure(edges))


# ---------------------------------------------------------------- trees and splits


def trees(seq, sig: Signature) -> dict:
    lhs, rhs = seq
    return {"L": signed_tree(lhs, PLUS, sig), "R": signed_tree(rhs, MINUS, sig)}


def is_critical(node: SignedNode, eps: dict) -> bool:
    f = node.formula
    if not isinstance(f, Var):
        return False
    e = eps.get(f.name)
    if e is None:
        raise ValueError(f"variable {f.name!r} has no order-type entry")
    return (node.sign == PLUS and e == ONE) or (node.sign == MINUS and e == DUAL)


def greedy_split(tree: SignedNode, sig: Signature, mode: str) -> dict:
    """Map each internal node path to its chosen class (maximal Skeleton).

    Nodes that are forced into the PIA zone but admit no PIA class are mapped
    to ``None``; a branch through such a node is not good.
    """
    out: dict = {}

    def walk(node, below_pia):
        if node.is_leaf:
            return
        classes = classify_formula(node.formula, node.sign, sig, mode)
        if below_pia:
            pia = classes & PIA_CLASSES
            out[node.path] = min(pia) if pia else None
            nxt = True
        else:
            skel = classes & SKELETON_CLASSES
            if skel:
                out[node.path] = min(skel)
                nxt = False
            else:
                out[node.path] = min(classes & PIA_CLASSES)
                nxt = True
        for c in node.children:
            walk(c, nxt)

    walk(tree, False)
    return out


def branch(tree: SignedNode, leaf_path: tuple) -> list:
    """Nodes from the root down to (and including) the leaf at ``leaf_path``."""
    nodes = [tree]
    for i in leaf_path:
        nodes.append(nodes[-1].children[i])
    return nodes


def branch_good(classes: list) -> bool:
    """Root-to-leaf class sequence (leaf excluded) is Skeleton* then PIA*."""
    seen_pia = False
    for c in classes:
        if c is None:
            return False
        if c in PIA_CLASSES:
            seen_pia = True
        elif seen_pia:
            return False
    return True


def good_branch_splits(tree: SignedNode, mode: str, sig: Signature) -> list:
    """All class assignments making every branch of ``tree`` good.

    The maximal-Skeleton split comes first when it exists.
    """
    internal = [n for n in tree.walk() if not n.is_leaf]
    options = [sorted(classify_formula(n.formula, n.sign, sig, mode)) for n in internal]
    greedy = greedy_split(tree, sig, mode)
    found = []
    for choice in product(*options):
        assign = {n.path: c for n, c in zip(internal, choice)}
        if all(branch_good([assign[n.path] for n in branch(tree, lf.path)[:-1]]) for lf in tree.leaves()):
            found.append(assign)
    found.sort(key=lambda a: a != greedy)
    return found


# ---------------------------------------------------------------- checks


@dataclass
class Analysis:
    trees: dict
    split: dict  # side -> {path: class}
    all_good: bool
    critical_good: bool
    side_ok: bool
    constraints: set
    critical: list  # (side, path, var)


def analyse(seq, eps: dict, sig: Signature, mode: str | None = None) -> Analysis:
    sig = ensure_expanded(sig)
    mode = mode or sig.mode
    ts = trees(seq, sig)
    split = {s: greedy_split(ts[s], sig, mode) for s in SIDES}
    all_good = True
    critical_good = True
    side_ok = True
    constraints: set = set()
    crit = []
    for s in SIDES:
        for lf in ts[s].leaves():
            nodes = branch(ts[s], lf.path)
            good = branch_good([split[s][n.path] for n in nodes[:-1]])
            all_good &= good
            if not is_critical(lf, eps):
                continue
            var = lf.formula.name
            crit.append((s, lf.path, var))
            critical_good &= good
            for k, n in enumerate(nodes[:-1]):
                if split[s][n.path] != SRR:
                    continue
                on = nodes[k + 1].path[-1]
                for i, child in enumerate(n.children):
                    if i == on:
                        continue
                    for leaf in child.leaves():
                        if is_critical(leaf, eps):
                            side_ok = False
                        elif isinstance(leaf.formula, Var):
                            constraints.add((leaf.formula.name, var))
    return Analysis(ts, split, all_good, critical_good, side_ok, constraints, crit)


def _check_vars(seq, w: Witness):
    eps = w.epsilon
    for f in seq:
        for v in variables(f):
            if v not in eps:
                raise ValueError(f"variable {v!r} missing from the witness")
    return eps


def check_inductive(seq, w: Witness, sig: Signature, mode: str | None = None) -> bool:
    eps = _check_vars(seq, w)
    a = analyse(seq, eps, sig, mode)
    return a.critical_good and a.side_ok and all(w.less(x, y) for x, y in a.constraints)


def check_analytic_inductive(seq, w: Witness, sig: Signature, mode: str | None = None) -> bool:
    eps = _check_vars(seq, w)
    a = analyse(seq, eps, sig, mode)
    return a.all_good and a.side_ok and all(w.less(x, y) for x, y in a.constraints)


def sequent_variables(seq) -> list:
    return sorted(set(variables(seq[0])) | set(variables(seq[1])))


def iter_witnesses(seq, sig: Signature, mode: str | None = None):
    """Yield (epsilon order, least omega) pairs in search order."""
    vs = sequent_variables(seq)
    for combo in product((ONE, DUAL), repeat=len(vs)):
        eps = dict(zip(vs, combo))
        a = analyse(seq, eps, sig, mode)
        if not (a.all_good and a.side_ok):
            if not a.all_good:
                return  # goodness does not depend on epsilon
            continue
        if not _acyclic(a.constraints):
            continue
        yield Witness.make(eps, a.constraints)


def find_witness(seq, sig: Signature, mode: str | None = None) -> Witness | None:
    return next(iter_witnesses(seq, sig, mode), None)


def all_witnesses(seq, sig: Signature, mode: str | None = None) -> list:
    return list(iter_witnesses(seq, sig, mode))


def uniform_adjusted(seq, w: Witness, sig: Signature) -> Witness:
    """Make every variable that occurs with a single sign non-critical.

    Positive-only variables get order-type d and negative-only ones 1, so the
    Ackermann step sends them to the empty join or meet, which is the
    substitution of T or B for them.
    """
    ts = trees(seq, ensure_expanded(sig))
    signs: dict[str, set] = {}
    for s in SIDES:
        for lf in ts[s].leaves():
            if isinstance(lf.formula, Var):
                signs.setdefault(lf.formula.name, set()).add(lf.sign)
    eps = w.epsilon
    for v, ss in signs.items():
        if ss == {PLUS}:
            eps[v] = DUAL
        elif ss == {MINUS}:
            eps[v] = ONE
    return Witness(tuple(sorted(eps.items())), w.omega)


def is_quasi_special(seq, w: Witness, sig: Signature, mode: str | None = None) -> bool:
    """Every critical branch runs through Skeleton nodes only."""
    eps = _check_vars(seq, w)
    a = analyse(seq, eps, sig, mode)
    for s, path, _ in a.critical:
        nodes = branch(a.trees[s], path)
        if any(a.split[s][n.path] in PIA_CLASSES for n in nodes[:-1]):
            return False
    return True


# ---------------------------------------------------------------- decomposition


def decompose_pia(f, sign: str, sig: Signature, mode: str | None = None) -> list:
    """Definite components of a PIA formula, distributing +and / -or outward."""
    sig = ensure_expanded(sig)
    mode = mode or sig.mode
    if isinstance(f, Var) or not f.args:
        return [f]
    classes = classify_formula(f, sign, sig, mode)
    if not classes & PIA_CLASSES:
        raise ValueError(f"{format_formula(f)} is not PIA at sign {sign}")
    if (f.op == "and" and sign == PLUS) or (f.op == "or" and sign == MINUS):
        return decompose_pia(f.args[0], sign, sig, mode) + decompose_pia(f.args[1], sign, sig, mode)
    conn = sig[f.op]
    parts = [
        decompose_pia(a, sign if conn.eps(i) == ONE else _flip(sign), sig, mode) for i, a in enumerate(f.args)
    ]
    return _dedupe([App(f.op, combo) for combo in product(*parts)])


def _flip(sign):
    return MINUS if sign == PLUS else PLUS


def _dedupe(xs):
    out = []
    for x in xs:
        if x not in out:
            out.append(x)
    return out


def _skeleton_components(f, sign, sig, mode):
    if isinstance(f, Var) or not f.args:
        return [f]
    classes = classify_formula(f, sign, sig, mode)
    if not classes & SKELETON_CLASSES:
        return [f]  # a PIA slot, shared verbatim
    if DELTA in classes:
        return _skeleton_components(f.args[0], sign, sig, mode) + _skeleton_components(f.args[1], sign, sig, mode)
    conn = sig[f.op]
    parts = [
        _skeleton_components(a, sign if conn.eps(i) == ONE else _flip(sign), sig, mode)
        for i, a in enumerate(f.args)
    ]
    return [App(f.op, combo) for combo in product(*parts)]


def split_definite(seq, w: Witness | None, sig: Signature, mode: str | None = None) -> list:
    """Definite sequents whose conjunction is equivalent to ``seq``."""
    sig = ensure_expanded(sig)
    mode = mode or sig.mode
    lhs, rhs = seq
    ls = _skeleton_components(lhs, PLUS, sig, mode)
    rs = _skeleton_components(rhs, MINUS, sig, mode)
    return _dedupe([(a, b) for a in ls for b in rs])


def is_definite(seq, sig: Signature, mode: str | None = None) -> bool:
    return not _has_delta(seq, sig, mode)


def _has_delta(seq, sig, mode):
    sig = ensure_expanded(sig)
    mode = mode or sig.mode
    ts = trees(seq, sig)
    for s in SIDES:
        split = greedy_split(ts[s], sig, mode)
        if any(c == DELTA for c in split.values()):
            return True
    return False


# ---------------------------------------------------------------- annotation

KIND_META = {"alpha": "X", "beta": "Y", "gamma": "Z", "delta": "W"}


@dataclass(frozen=True)
class Slot:
    kind: str  # alpha / beta / gamma / delta
    side: str  # L / R (top-level side of the sequent)
    path: tuple
    formula: object
    sign: str
    meta: str  # X1, Y2, ...


@dataclass(frozen=True)
class AnnotatedSequent:
    lhs: object
    rhs: object
    witness: Witness
    slots: tuple
    mode: str

    def _of(self, kind):
        return [s.formula for s in self.slots if s.kind == kind]

    @property
    def alphas(self):
        return self._of("alpha")

    @property
    def betas(self):
        return self._of("beta")

    @property
    def gammas(self):
        return self._of("gamma")

    @property
    def deltas(self):
        return self._of("delta")

    def skeleton(self):
        """The two sides with every slot replaced by a hole ``!<meta>``."""
        sides = {"L": self.lhs, "R": self.rhs}
        for s in self.slots:
            sides[s.side] = replace_at(sides[s.side], s.path, Var("!" + s.meta))
        return sides["L"], sides["R"]

    def plug(self):
        lhs, rhs = self.skeleton()
        for s in self.slots:
            lhs = _replace_var(lhs, "!" + s.meta, s.formula)
            rhs = _replace_var(rhs, "!" + s.meta, s.formula)
        return lhs, rhs

    def slot(self, meta: str) -> Slot:
        for s in self.slots:
            if s.meta == meta:
                return s
        raise KeyError(meta)


def _replace_var(f, name, new):
    if isinstance(f, Var):
        return new if f.name == name else f
    return App(f.op, tuple(_replace_var(a, name, new) for a in f.args))


def annotate(seq, w: Witness, sig: Signature, mode: str | None = None, uniform_elim: bool = True) -> AnnotatedSequent:
    sig = ensure_expanded(sig)
    mode = mode or sig.mode
    if not check_analytic_inductive(seq, w, sig, mode):
        raise NotAnalyticError("sequent is not analytic inductive under the given witness")
    if uniform_elim:
        w2 = uniform_adjusted(seq, w, sig)
        # goodness is independent of epsilon and there are no more critical
        # branches than before, so the adjusted witness is still valid
        assert check_analytic_inductive(seq, w2, sig, mode)
        w = w2
    eps = w.epsilon
    ts = trees(seq, sig)
    found = []
    for s in SIDES:
        split = greedy_split(ts[s], sig, mode)

        def walk(node, side=s, split=split):
            if not node.is_leaf and split[node.path] in SKELETON_CLASSES:
                for c in node.children:
                    walk(c)
                return
            crit = any(is_critical(lf, eps) for lf in node.leaves())
            if node.sign == PLUS:
                kind = "alpha" if crit else "gamma"
            else:
                kind = "beta" if crit else "delta"
            found.append((kind, side, node.path, node.formula, node.sign))

        walk(ts[s])
    counters = {k: 0 for k in KIND_META}
    slots = []
    for kind, side, path, f, sign in found:
        counters[kind] += 1
        slots.append(Slot(kind, side, path, f, sign, f"{KIND_META[kind]}{counters[kind]}"))
    return AnnotatedSequent(seq[0], seq[1], w, tuple(slots), mode)


def classification_report(seq, sig: Signature, mode: str | None = None, witness: Witness | None = None) -> dict:
    sig = ensure_expanded(sig)
    mode = mode or sig.mode
    w = witness if witness is not None else find_witness(seq, sig, mode)
    ok = w is not None and check_analytic_inductive(seq, w, sig, mode)
    return {
        "analytic_inductive": bool(ok),
        "quasi_special": bool(ok and is_quasi_special(seq, w, sig, mode)),
        "definite": is_definite(seq, sig, mode),
        "witness": w.to_json() if ok else None,
    }
