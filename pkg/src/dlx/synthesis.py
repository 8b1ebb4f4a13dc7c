"""Analytic structural rules from analytic inductive sequents.

Each definite component of the input yields one rule.  Its conclusion is the
structural Skeleton with every slot replaced by a structure metavariable
(``X`` critical positive, ``Y`` critical negative, ``Z``/``W`` the
non-critical ones).  Critical slots feed the minimal valuations of their
pivotal variables; every other PIA component becomes a premise once its
variables are replaced by minimal valuations, one independent choice per
occurrence.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .adjoints import structural_counterpart, structural_solve
from .calculus import SYNTH, Meta, RuleSchema, Sequent, SApp, SF
from .inductive import (
    AnnotatedSequent,
    Witness,
    annotate,
    check_analytic_inductive,
    decompose_pia,
    find_witness,
    is_critical,
    split_definite,
    uniform_adjusted,
    NotAnalyticError,
)
from .language import ONE, PLUS, App, Signature, Var, ensure_expanded, signed_tree


@dataclass(frozen=True)
class MvEntry:
    """One minimal valuation of ``var``: ``structure |- var`` when ``lower``."""

    var: str
    structure: object
    base: object  # component structure with the pivot still in place
    slot: str
    component: object
    path: tuple
    lower: bool


@dataclass(frozen=True)
class PremiseRecipe:
    slot: str
    sign: str
    component: object


def omega_order(variables, w: Witness) -> list:
    """Variables sorted so that every omega-predecessor comes first."""
    remaining = sorted(variables)
    out = []
    while remaining:
        ready = [v for v in remaining if not any(w.less(u, v) for u in remaining if u != v)]
        if not ready:
            raise ValueError("omega is cyclic")
        out.append(ready[0])
        remaining.remove(ready[0])
    return out


def _occurrences(comp, sign, sig, eps):
    """Variable leaves of ``comp`` as (path, name, critical)."""
    tree = signed_tree(comp, sign, sig)
    out = []
    for lf in tree.leaves():
        if isinstance(lf.formula, Var):
            out.append((lf.path, lf.formula.name, is_critical(lf, eps)))
    return out


def _rename(f, paths: dict, path=()):
    """Replace the leaves at ``paths`` by placeholder variables."""
    if path in paths:
        return Var(paths[path])
    if isinstance(f, Var) or not f.args:
        return f
    return App(f.op, tuple(_rename(a, paths, path + (i,)) for i, a in enumerate(f.args)))


def _choices(comp, occs, mv):
    """Yield (renamed component, env) for every choice of parametric values."""
    params = [(p, v) for p, v, _ in occs]
    names = {p: f"_z{i}" for i, (p, _) in enumerate(params)}
    renamed = _rename(comp, names)
    for combo in product(*(mv[v] for _, v in params)):
        yield renamed, {names[p]: e.structure for (p, _), e in zip(params, combo)}


def minimal_valuations(ann: AnnotatedSequent, sig: Signature) -> dict:
    sig = ensure_expanded(sig)
    w = ann.witness
    eps = w.epsilon
    vs = sorted({v for s in ann.slots for v in _vars(s.formula)})
    mv: dict = {}
    for p in omega_order(vs, w):
        entries = []
        for slot in ann.slots:
            if slot.kind not in ("alpha", "beta"):
                continue
            for comp in decompose_pia(slot.formula, slot.sign, sig, ann.mode):
                occs = _occurrences(comp, slot.sign, sig, eps)
                pivots = [o for o in occs if o[2] and o[1] == p]
                if not pivots:
                    continue
                path = pivots[0][0]
                params = [o for o in occs if o[0] != path]
                for v in {o[1] for o in params}:
                    if v not in mv:
                        raise ValueError(f"{v} is needed before its minimal valuation is known")
                for renamed, env in _choices(comp, params, mv):
                    u = Meta(slot.meta)
                    s, lower = structural_solve(renamed, path, u, slot.sign == PLUS, sig, env)
                    assert lower == (eps[p] == ONE)
                    base = structural_counterpart(renamed, env)
                    e = MvEntry(p, s, base, slot.meta, comp, path, lower)
                    if all(x.structure != s for x in entries):
                        entries.append(e)
        mv[p] = entries
    return mv


def _vars(f):
    if isinstance(f, Var):
        return {f.name}
    return set().union(set(), *(_vars(a) for a in f.args))


def _skeleton_structure(f):
    if isinstance(f, Var):
        return Meta(f.name[1:]) if f.name.startswith("!") else SF(f)
    if not f.args:
        return SF(f)
    return SApp(f.op, tuple(_skeleton_structure(a) for a in f.args))


def component_rule(ann: AnnotatedSequent, sig: Signature, name: str) -> RuleSchema:
    sig = ensure_expanded(sig)
    eps = ann.witness.epsilon
    mv = minimal_valuations(ann, sig)
    premises, recipes = [], []
    for slot in ann.slots:
        for comp in decompose_pia(slot.formula, slot.sign, sig, ann.mode):
            occs = _occurrences(comp, slot.sign, sig, eps)
            if slot.kind in ("alpha", "beta") and any(o[2] for o in occs):
                continue
            for renamed, env in _choices(comp, occs, mv):
                s = structural_counterpart(renamed, env)
                m = Meta(slot.meta)
                prem = Sequent(m, s) if slot.sign == PLUS else Sequent(s, m)
                if prem not in premises:
                    premises.append(prem)
                    recipes.append(PremiseRecipe(slot.meta, slot.sign, comp))
    lhs, rhs = ann.skeleton()
    concl = Sequent(_skeleton_structure(lhs), _skeleton_structure(rhs))
    meta = {"annotation": ann, "mv": mv, "recipes": tuple(recipes), "component": (ann.lhs, ann.rhs)}
    return RuleSchema(name, tuple(premises), concl, SYNTH, meta=meta)


def multiplicity_split(seq, w: Witness, sig: Signature, mode: str | None = None) -> list:
    """Definite components of ``seq``, each annotated under ``w``."""
    sig = ensure_expanded(sig)
    mode = mode or sig.mode
    return [annotate(c, w, sig, mode, uniform_elim=False) for c in split_definite(seq, w, sig, mode)]


def synthesize_rules(
    seq,
    sig: Signature,
    witness: Witness | None = None,
    mode: str | None = None,
    uniform_elim: bool = True,
    prefix: str = "R",
) -> list:
    """Analytic structural rules equivalent to the analytic inductive ``seq``."""
    sig = ensure_expanded(sig)
    mode = mode or sig.mode
    w = witness if witness is not None else find_witness(seq, sig, mode)
    if w is None or not check_analytic_inductive(seq, w, sig, mode):
        raise NotAnalyticError("sequent is not analytic inductive" + ("" if witness is None else " under the witness"))
    if uniform_elim:
        w = uniform_adjusted(seq, w, sig)
    rules = []
    for i, ann in enumerate(multiplicity_split(seq, w, sig, mode), 1):
        rules.append(component_rule(ann, sig, f"{prefix}{i}"))
    return rules
