import random

import pytest

from golden import TREES
from helpers import RANDOM_OPS, RANDOM_SIG_TEXT, canonical_tree, parse_tree, random_sequent, signature
from dlx.calculus import (
    Derivation,
    base_rules,
    check_derivation,
    check_node,
    check_pre_normal_form,
    format_sequent,
    is_cut_free,
    parse_structural_sequent,
)
from dlx.derivation import (
    DerivationError,
    derive_axiom,
    derive_pia_approx,
    derive_pia_identity,
    derive_to_pivot,
    recombine_skeleton,
    zone_sets,
)
from dlx.inductive import find_witness, parse_witness
from dlx.language import Var, parse_formula, parse_sequent

LE, DLE = signature("le"), signature("dle")


def sq(text, sig=LE):
    return parse_structural_sequent(text, sig)


def hyp(text, sig=LE):
    return Derivation(sq(text, sig), "Hyp")


def valid_except_hyps(d, sig):
    rules = base_rules(sig)
    return all(n.rule == "Hyp" or check_node(n, rules, sig) is None for n in d.nodes())


def rule_names(d):
    return [n.rule for n in d.nodes()]


def test_identity_gamma():
    f = parse_formula("to(dia(otimes(p, q)), oplus(q, p))", LE)
    d = derive_pia_identity(f, "+", LE)
    assert format_sequent(d.sequent) == "to(dia(otimes(p, q)), oplus(q, p)) |- @to(@dia(@otimes(p, q)), @oplus(q, p))"
    assert d.rule == "to_L" and check_derivation(d, base_rules(LE), LE)
    assert sum(n.rule != "Id" for n in d.nodes()) == 4


def test_identity_delta():
    d = derive_pia_identity(parse_formula("otimes(dia(p), q)", LE), "-", LE)
    assert format_sequent(d.sequent) == "@otimes(@dia(p), q) |- otimes(dia(p), q)"
    assert d.rule == "otimes_R" and d.premises[0].rule == "dia_R"


def test_identity_atom():
    d = derive_pia_identity(Var("p"), "+", LE)
    assert d.rule == "Id" and format_sequent(d.sequent) == "p |- p"


def test_identity_rejects_non_definite():
    with pytest.raises(DerivationError):
        derive_pia_identity(parse_formula("box(p & q)", LE), "+", LE)


@pytest.mark.parametrize("sig, chain", [(LE, ["box_L", "and_L1", "Hyp"]), (DLE, ["box_L", "and_L", "E_L", "W_L", "Hyp"])])
def test_approx_box_meet(sig, chain):
    f = parse_formula("box(p & q)", sig)
    d = derive_pia_approx(f, "+", 0, sig, {"p": hyp("p |- @dia.r1(dia(p))", sig)})
    assert format_sequent(d.sequent) == "box(p & q) |- @box(@dia.r1(dia(p)))"
    assert rule_names(d) == chain
    assert valid_except_hyps(d, sig)


def test_approx_on_definite_equals_identity():
    f = parse_formula("box(oplus(p, box(q)))", LE)
    assert derive_pia_approx(f, "+", 0, LE) == derive_pia_identity(f, "+", LE)


def test_approx_bad_index():
    with pytest.raises(DerivationError):
        derive_pia_approx(parse_formula("box(p & q)", LE), "+", 5, LE)


def test_to_pivot_box():
    d = derive_to_pivot(parse_formula("box(p)", LE), "+", "p", LE)
    assert format_sequent(d.sequent) == "@box.r1(box(p)) |- p"
    assert rule_names(d) == ["disp[box>box.r1]", "box_L", "Id"]


def test_to_pivot_nested():
    f = parse_formula("box(oplus(box(p & q), r))", LE)
    subs = {"p": hyp("p |- @dia.r1(dia(p))"), "r": hyp("r |- @dia.r1(dia(r))")}
    d = derive_to_pivot(f, "+", "p", LE, subs)
    assert format_sequent(d.sequent) == (
        "@box.r1(@oplus.r1(@box.r1(box(oplus(box(p & q), r))), @dia.r1(dia(r)))) |- @dia.r1(dia(p))")
    assert valid_except_hyps(d, LE)


def test_to_pivot_bare():
    d = derive_to_pivot(Var("x"), "+", "x", LE)
    assert d.rule == "Id"


def test_recombine_reference():
    target = sq("dia(p | dia(p)) |- @box(dia(p))")
    parts = [hyp("@dia(p) |- @box(dia(p))"), hyp("@dia(@dia(p)) |- @box(dia(p))")]
    d = recombine_skeleton(target, parts, LE)
    assert d.sequent == target
    assert rule_names(d) == [
        "dia_L", "disp[dia.r1>dia]", "or_L", "disp[dia>dia.r1]", "Hyp",
        "dia_L", "disp[dia>dia.r1]", "Hyp"]
    assert valid_except_hyps(d, LE)


def test_recombine_single_component():
    part = hyp("@dia(p) |- @box(dia(p))")
    assert recombine_skeleton(part.sequent, [part], LE) == part


def test_recombine_missing_component():
    with pytest.raises(DerivationError, match="no component"):
        recombine_skeleton(sq("dia(p | dia(p)) |- @box(dia(p))"), [hyp("@dia(p) |- @box(dia(p))")], LE)


def _skeleton_structure(f):
    # + dia / + otimes are Skeleton, everything else stays a formula leaf
    from dlx.language import format_formula

    if isinstance(f, Var) or f.op not in ("dia", "otimes"):
        return format_formula(f)
    return f"@{f.op}(" + ", ".join(_skeleton_structure(a) for a in f.args) + ")"


def test_recombine_random_two_component_skeletons():
    rng = random.Random(5)
    for _ in range(30):
        inner = rng.choice(["q", "dia(q)", "box(p)", "otimes(p, q)"])
        shape = rng.choice(["dia({})", "otimes(q, {})", "otimes({}, dia(q))", "dia(dia({}))"])
        target = sq(f"{shape.format(f'p | {inner}')} |- @box(dia(p))")
        parts = [hyp(f"{_skeleton_structure(parse_formula(shape.format(c), LE))} |- @box(dia(p))")
                 for c in ("p", inner)]
        d = recombine_skeleton(target, parts, LE)
        assert d.sequent == target and valid_except_hyps(d, LE)
        assert sorted(map(format_sequent, (n.sequent for n in d.leaves()))) == sorted(format_sequent(p.sequent) for p in parts)


@pytest.mark.parametrize("axiom, mode, witness, tree", TREES, ids=[t[0] for t in TREES])
def test_reference_derivations(axiom, mode, witness, tree):
    sig = signature(mode)
    seq = parse_sequent(axiom, sig)
    res = derive_axiom(seq, sig, parse_witness(witness) if witness else None, mode)
    d, rules = res.derivation, res.calculus
    assert (d.sequent.lhs.formula, d.sequent.rhs.formula) == seq
    assert check_derivation(d, rules, sig)
    assert is_cut_free(d, rules)
    skel, pia = zone_sets(seq, sig, mode)
    assert check_pre_normal_form(d, rules, skel, pia, mode) == []
    if tree is not None:
        assert canonical_tree(d, rules) == canonical_tree(parse_tree(tree, sig), rules)


def test_r1_derivation_is_five_lines():
    res = derive_axiom(parse_sequent("dia(p) |- box(dia(p))", LE), LE)
    assert rule_names(res.derivation) == ["box_R", "dia_L", "R1", "dia_R", "Id"]


def test_derivation_needs_every_rule():
    res = derive_axiom(parse_sequent("dia(p | dia(p)) |- box(dia(p))", LE), LE)
    assert len(res.rules) == 2
    for r in res.rules:
        rules = dict(res.calculus)
        del rules[r.name]
        assert not check_derivation(res.derivation, rules, LE)


def test_not_analytic_raises():
    from dlx.inductive import NotAnalyticError

    with pytest.raises(NotAnalyticError):
        derive_axiom(parse_sequent("p |- dia(box(p))", LE), LE)


@pytest.mark.parametrize("mode", ["le", "dle"])
@pytest.mark.parametrize("uniform", [True, False])
def test_random_round_trip(mode, uniform):
    sig = signature(mode, RANDOM_SIG_TEXT)
    rng, n = random.Random(17), 0
    while n < 40:
        seq = random_sequent(rng, 3, ops=RANDOM_OPS)
        w = find_witness(seq, sig, mode)
        if w is None:
            continue
        n += 1
        res = derive_axiom(seq, sig, w, mode, uniform_elim=uniform)
        skel, pia = zone_sets(seq, sig, mode)
        assert check_derivation(res.derivation, res.calculus, sig)
        assert is_cut_free(res.derivation, res.calculus)
        assert check_pre_normal_form(res.derivation, res.calculus, skel, pia, mode) == []
