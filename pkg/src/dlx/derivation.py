"""Cut-free derivations of analytic inductive sequents in pre-normal form.

The derivation is built bottom-up.  Below the synthesized rule, Skeleton
formulas are displayed one at a time, introduced with their invertible rule
(or split, for Delta-adjoints) and displayed back.  Above it, each premise is
closed by introduction rules on the PIA slot formulas, with identity leaves
at pivots and derived minimal-valuation sequents at parametric leaves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .adjoints import AdjointError, pivot_path, structural_counterpart
from .calculus import (
    Derivation,
    RuleError,
    SApp,
    SF,
    Sequent,
    base_rules,
    chain,
    check_derivation,
    contract_displays,
    expose,
    instantiate,
    match_and_apply,
    match_sequent,
    undisplay,
)
from .inductive import SIDES, decompose_pia, greedy_split, trees
from .language import (
    LE,
    MINUS,
    ONE,
    PLUS,
    SKELETON_CLASSES,
    App,
    Signature,
    Var,
    classify_formula,
    ensure_expanded,
    flip_sign,
    format_formula,
)
from .synthesis import synthesize_rules


class DerivationError(RuntimeError):
    pass


def _back(rules, name, goal):
    try:
        return match_and_apply(rules[name], goal)
    except RuleError as e:
        raise DerivationError(str(e)) from None


def _step(rules, name, goal, *subs):
    """Node ``goal`` by ``name`` whose premises are derived by ``subs``."""
    prem = _back(rules, name, goal)
    kids = []
    for p, sub in zip(prem, subs):
        d = sub(p)
        if d is None:
            return None
        kids.append(d)
    return Derivation(goal, name, tuple(kids))


def constant_identity(c, rules) -> Derivation:
    """``c |- c`` for a 0-ary connective, by its two introduction rules."""
    seq = Sequent(SF(c), SF(c))
    fam_f = rules[f"{c.op}_R"].side == "R" and not rules[f"{c.op}_R"].premises
    if fam_f:
        # f_L backward then the f_R axiom
        (p,) = _back(rules, f"{c.op}_L", seq)
        return Derivation(seq, f"{c.op}_L", (Derivation(p, f"{c.op}_R"),))
    (p,) = _back(rules, f"{c.op}_R", seq)
    return Derivation(seq, f"{c.op}_R", (Derivation(p, f"{c.op}_L"),))


@dataclass
class PiaBuilder:
    """Derives ``phi |- S`` (positive) or ``S |- phi`` (negative) in the PIA zone."""

    sig: Signature
    rules: dict
    mode: str
    sigma: dict
    mv: dict
    slots: dict  # meta -> Slot
    leaves: dict = field(default_factory=dict)  # sequent -> supplied Derivation
    _table: dict = field(default_factory=dict)
    _memo: dict = field(default_factory=dict)

    def __post_init__(self):
        for var, entries in self.mv.items():
            for e in entries:
                s = instantiate(e.structure, self.sigma)
                self._table.setdefault((var, s, e.lower), e)

    def goal(self, phi, sign, s):
        return Sequent(SF(phi), s) if sign == PLUS else Sequent(s, SF(phi))

    def derive(self, phi, sign, s):
        key = (phi, sign, s)
        if key not in self._memo:
            self._memo[key] = self._derive(phi, sign, s)
        return self._memo[key]

    def _derive(self, phi, sign, s):
        goal = self.goal(phi, sign, s)
        if isinstance(phi, Var):
            if s == SF(phi):
                return Derivation(goal, "Id")
            if goal in self.leaves:
                return self.leaves[goal]
            e = self._table.get((phi.name, s, sign == MINUS))
            return self.derive_mv(e) if e is not None else None
        if not phi.args:
            return constant_identity(phi, self.rules) if s == SF(phi) else None
        op = phi.op
        a, b = (phi.args + (None, None))[:2]
        if sign == PLUS and op == "and":
            if self.mode == LE:
                return _step(self.rules, "and_L1", goal, lambda p: self.derive(a, PLUS, s)) or _step(
                    self.rules, "and_L2", goal, lambda p: self.derive(b, PLUS, s)
                )
            d = self.derive(a, PLUS, s)
            if d is not None:
                return self._unary(goal, ["and_L", "E_L", "W_L"], d)
            d = self.derive(b, PLUS, s)
            return None if d is None else self._unary(goal, ["and_L", "W_L"], d)
        if sign == MINUS and op == "or":
            if self.mode == LE:
                return _step(self.rules, "or_R1", goal, lambda p: self.derive(a, MINUS, s)) or _step(
                    self.rules, "or_R2", goal, lambda p: self.derive(b, MINUS, s)
                )
            d = self.derive(a, MINUS, s)
            if d is not None:
                return self._unary(goal, ["or_R", "W_R"], d)
            d = self.derive(b, MINUS, s)
            return None if d is None else self._unary(goal, ["or_R", "E_R", "W_R"], d)
        conn = self.sig[op]
        if not isinstance(s, SApp) or s.op != op:
            return None
        name = f"{op}_L" if sign == PLUS else f"{op}_R"
        if (conn.family == "G") != (sign == PLUS):
            return None
        subs = [
            (lambda p, i=i: self.derive(phi.args[i], sign if conn.eps(i) == ONE else flip_sign(sign), s.args[i]))
            for i in range(conn.arity)
        ]
        try:
            return _step(self.rules, name, goal, *subs)
        except DerivationError:
            return None

    def _unary(self, goal, names, top):
        seqs = [goal]
        for n in names[:-1]:
            (p,) = _back(self.rules, n, seqs[-1])
            seqs.append(p)
        (p,) = _back(self.rules, names[-1], seqs[-1])
        if p != top.sequent:
            raise DerivationError(f"{names} does not reach {top.sequent}")
        node = top
        for n, sq in zip(reversed(names), reversed(seqs)):
            node = Derivation(sq, n, (node,))
        return node

    def derive_mv(self, e) -> Derivation:
        """``MV |- x`` or ``x |- MV`` from the approximant of the source slot."""
        slot = self.slots[e.slot]
        start = self.derive(slot.formula, slot.sign, instantiate(e.base, self.sigma))
        if start is None:
            raise DerivationError(f"cannot derive the approximant for {e.var} from {e.slot}")
        side = "R" if slot.sign == PLUS else "L"
        steps, final, fside = expose(start.sequent, side, e.path, self.sig, self.rules)
        want = instantiate(e.structure, self.sigma)
        expect = Sequent(want, SF(Var(e.var))) if e.lower else Sequent(SF(Var(e.var)), want)
        if final != expect:
            raise DerivationError(f"display of {e.var} gave {final}, expected {expect}")
        inv = undisplay_steps(final, steps, self.rules)
        return chain(inv, start, final)


def undisplay_steps(seq, steps, rules):
    return undisplay(seq, steps, rules)


# ---------------------------------------------------------------- PIA zone API


def _setup(sig, mode, rules):
    sig = ensure_expanded(sig)
    mode = mode or sig.mode
    if sig.mode != mode:
        sig = ensure_expanded(sig.with_mode(mode))
    return sig, mode, (rules if rules is not None else base_rules(sig))


def _leaf_table(subs, leaves):
    env = {}
    table = {}
    for v, val in (subs or {}).items():
        if isinstance(val, Derivation):
            seq = val.sequent
            env[v] = seq.rhs if seq.lhs == SF(Var(v)) else seq.lhs
            table[seq] = val
        else:
            env[v] = val
    for d in leaves or ():
        table[d.sequent] = d
    return env, table


def _pia_derive(phi, sign, target, sig, mode, rules, leaves):
    b = PiaBuilder(sig, rules, mode, {}, {}, {}, leaves)
    d = b.derive(phi, sign, target)
    if d is None:
        goal = b.goal(phi, sign, target)
        raise DerivationError(f"no PIA derivation of {goal}")
    return d


def derive_pia_identity(phi, sign, sig, subs=None, mode=None, rules=None, leaves=()):
    """``phi[sigma] |- Phi[S]`` (``sign`` +) or ``Phi[S] |- phi[sigma]`` (``sign`` -).

    ``subs`` maps variables to structures, or to derivations of ``x |- S`` /
    ``S |- x`` that are grafted at the leaves.  Unmapped variables close with Id.
    """
    sig, mode, rules = _setup(sig, mode, rules)
    comps = decompose_pia(phi, sign, sig, mode)
    if len(comps) != 1 or comps[0] != phi:
        raise DerivationError(f"{format_formula(phi)} is not a definite PIA formula at sign {sign}")
    env, table = _leaf_table(subs, leaves)
    return _pia_derive(phi, sign, structural_counterpart(phi, env), sig, mode, rules, table)


def derive_pia_approx(phi, sign, index, sig, subs=None, mode=None, rules=None, leaves=()):
    """``phi |- Phi_i`` towards the ``index``-th definite component of ``phi``."""
    sig, mode, rules = _setup(sig, mode, rules)
    comps = decompose_pia(phi, sign, sig, mode)
    if not 0 <= index < len(comps):
        raise DerivationError(f"component index {index} out of range 0..{len(comps) - 1}")
    env, table = _leaf_table(subs, leaves)
    return _pia_derive(phi, sign, structural_counterpart(comps[index], env), sig, mode, rules, table)


def derive_to_pivot(phi, sign, pivot, sig, subs=None, mode=None, rules=None, leaves=(), index=None):
    """Prolong ``derive_pia_approx`` with displays until the pivot stands alone.

    For ``sign`` + the result ends in ``LA(phi_i)[phi] |- S_x`` or its dual,
    depending on the polarity of the pivot.
    """
    sig, mode, rules = _setup(sig, mode, rules)
    comps = decompose_pia(phi, sign, sig, mode)
    if index is None:
        index = next((i for i, c in enumerate(comps) if _count(c, pivot) == 1), None)
        if index is None:
            raise DerivationError(f"pivot {pivot} does not occur once in any component")
    comp = comps[index]
    try:
        path = pivot_path(comp, pivot)
    except AdjointError as e:
        raise DerivationError(str(e)) from None
    start = derive_pia_approx(phi, sign, index, sig, subs, mode, rules, leaves)
    side = "R" if sign == PLUS else "L"
    steps, final, _ = expose(start.sequent, side, path, sig, rules)
    return chain(undisplay(final, steps, rules), start, final)


def _count(f, v):
    if isinstance(f, Var):
        return int(f.name == v)
    return sum(_count(a, v) for a in f.args)


# ---------------------------------------------------------------- skeleton zone


def _at(s, path):
    for i in path:
        s = s.args[i]
    return s


def _to_formula(s):
    if isinstance(s, SF):
        return s.formula
    return App(s.op, tuple(_to_formula(a) for a in s.args))


def _skeleton_here(f, sign, sig, mode):
    return isinstance(f, App) and f.args and bool(classify_formula(f, sign, sig, mode) & SKELETON_CLASSES)


def _is_delta(f, sign, mode):
    return (f.op == "or" and sign == PLUS) or (f.op == "and" and sign == MINUS)


def _sf_leaves(seq: Sequent, sig: Signature):
    """(side, path, sign) of the formula leaves of a structural sequent."""
    out = []

    def walk(s, side, path, sign):
        if isinstance(s, SF):
            out.append((side, path, sign))
        elif isinstance(s, SApp):
            conn = sig[s.op]
            for i, a in enumerate(s.args):
                walk(a, side, path + (i,), sign if conn.eps(i) == ONE else flip_sign(sign))

    walk(seq.rhs, "R", (), MINUS)
    walk(seq.lhs, "L", (), PLUS)
    return out


def skeleton_work(seq: Sequent, sig: Signature, mode: str) -> list:
    return [(side, path, sign) for side, path, sign in _sf_leaves(seq, sig)
            if _skeleton_here(_at(seq.side(side), path).formula, sign, sig, mode)]


@dataclass
class SkeletonBuilder:
    """Rebuilds Skeleton formulas below the leaves produced by ``leaf``.

    Each Skeleton formula is displayed, introduced by its invertible rule (or
    split, for Delta-adjoints) and displayed back before the next one.
    """

    sig: Signature
    mode: str
    rules: dict
    leaf: object  # Sequent -> Derivation

    def open(self, home: Sequent, work: list) -> Derivation:
        if not work:
            return self.leaf(home)
        side, path, sign = work[0]
        rest = work[1:]
        f = _at(home.side(side), path)
        assert isinstance(f, SF)
        phi = f.formula
        steps, shown, _ = expose(home, side, path, self.sig, self.rules)
        if _is_delta(phi, sign, self.mode):
            return chain(steps, self._delta(shown, side, path, sign, phi, steps, rest), home)
        name = f"{phi.op}_L" if sign == PLUS else f"{phi.op}_R"
        (prem,) = _back(self.rules, name, shown)
        conn = self.sig[phi.op]
        kids = []
        for i, a in enumerate(phi.args):
            cs = sign if conn.eps(i) == ONE else flip_sign(sign)
            if _skeleton_here(a, cs, self.sig, self.mode):
                kids.append((side, path + (i,), cs))
        top = self._back_home(prem, steps, kids + rest)
        return chain(steps, Derivation(shown, name, (top,)), home)

    def _back_home(self, seq, steps, work):
        inv = undisplay(seq, steps, self.rules)
        new_home = inv[-1][1] if inv else seq
        return chain(inv, self.open(new_home, work), seq)

    def _delta(self, shown, side, path, sign, phi, steps, rest):
        name = "or_L" if sign == PLUS else "and_R"
        if self.mode == LE:
            nodes = [(shown, name)]
        else:
            contr = "C_R" if sign == PLUS else "C_L"
            (mid,) = _back(self.rules, contr, shown)
            nodes = [(shown, contr), (mid, name)]
        branches = _back(self.rules, name, nodes[-1][0])
        kids = []
        for br, a in zip(branches, phi.args):
            work = ([(side, path, sign)] if _skeleton_here(a, sign, self.sig, self.mode) else []) + rest
            kids.append(self._back_home(br, steps, work))
        node = Derivation(nodes[-1][0], nodes[-1][1], tuple(kids))
        if len(nodes) == 2:
            node = Derivation(nodes[0][0], nodes[0][1], (node,))
        return node


def recombine_skeleton(target: Sequent, parts, sig: Signature, mode: str | None = None, rules=None) -> Derivation:
    """Derive ``target`` from derivations of its definite components.

    ``parts`` holds one derivation per definite component, each ending in the
    sequent reached once every Skeleton formula of ``target`` is unfolded.
    Only display rules, invertible Skeleton introductions and Delta splits
    (with contraction in dle mode) are added.
    """
    sig, mode, rules = _setup(sig, mode, rules)
    table = {d.sequent: d for d in parts}

    def leaf(home):
        if home not in table:
            raise DerivationError(f"no component derivation for {home}")
        return table[home]

    d = SkeletonBuilder(sig, mode, rules, leaf).open(target, skeleton_work(target, sig, mode))
    return contract_displays(d, rules)


@dataclass
class AxiomDeriver:
    sig: Signature
    mode: str
    rules: dict  # base rules plus synthesized
    synthesized: list

    def component_rule(self, home: Sequent):
        comp = (_to_formula(home.lhs), _to_formula(home.rhs))
        for r in self.synthesized:
            if r.meta["component"] == comp:
                return r
        raise DerivationError(f"no synthesized rule for component {comp}")

    def finish(self, home: Sequent) -> Derivation:
        rule = self.component_rule(home)
        sigma = match_sequent(rule.conclusion, home)
        if sigma is None:
            raise DerivationError(f"{rule.name} does not match {home}")
        ann = rule.meta["annotation"]
        pia = PiaBuilder(self.sig, self.rules, self.mode, sigma, rule.meta["mv"], {s.meta: s for s in ann.slots})
        kids = []
        for prem, rec in zip(rule.premises, rule.meta["recipes"]):
            inst = instantiate(prem, sigma)
            phi = ann.slot(rec.slot).formula
            s = inst.rhs if rec.sign == PLUS else inst.lhs
            d = pia.derive(phi, rec.sign, s)
            if d is None:
                raise DerivationError(f"cannot derive premise {inst}")
            kids.append(d)
        return Derivation(home, rule.name, tuple(kids))

    def run(self, root: Sequent) -> Derivation:
        sk = SkeletonBuilder(self.sig, self.mode, self.rules, self.finish)
        return contract_displays(sk.open(root, skeleton_work(root, self.sig, self.mode)), self.rules)


def zone_sets(seq, sig: Signature, mode: str):
    """(formula, side) pairs of the Skeleton and PIA nodes of ``seq``."""
    skel, pia = set(), set()
    ts = trees(seq, sig)
    for s in SIDES:
        split = greedy_split(ts[s], sig, mode)
        for n in ts[s].walk():
            if n.is_leaf:
                continue
            key = (n.formula, "L" if n.sign == PLUS else "R")
            (skel if split[n.path] in SKELETON_CLASSES else pia).add(key)
    return skel, pia


@dataclass
class AxiomDerivation:
    derivation: Derivation
    rules: list
    calculus: dict
    witness: object


def derive_axiom(seq, sig: Signature, witness=None, mode: str | None = None, uniform_elim: bool = True):
    """Synthesize rules for ``seq`` and derive it with them, cut-free."""
    sig = ensure_expanded(sig)
    mode = mode or sig.mode
    sig = sig if sig.mode == mode else ensure_expanded(sig.with_mode(mode))
    synth = synthesize_rules(seq, sig, witness, mode, uniform_elim)
    rules = dict(base_rules(sig))
    for r in synth:
        rules[r.name] = r
    d = AxiomDeriver(sig, mode, rules, synth).run(Sequent(SF(seq[0]), SF(seq[1])))
    res = check_derivation(d, rules, sig)
    if not res:
        raise DerivationError(f"generated derivation fails the check at {res.path}: {res.reason}")
    w = synth[0].meta["annotation"].witness if synth else witness
    return AxiomDerivation(d, synth, rules, w)
