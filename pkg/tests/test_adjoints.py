import pytest

from golden import LA, LA_FORMULA, LA_SIGNATURE
from helpers import signature
from dlx.adjoints import AdjointError, la, pivot_path, ra, structural_counterpart, structural_la, structural_ra
from dlx.calculus import Meta, format_structure
from dlx.language import Var, format_formula, parse_formula

LE = signature()


@pytest.mark.parametrize("pivot", sorted(LA))
def test_la_reference_pivots(pivot):
    sig = signature("le", LA_SIGNATURE)
    assert format_formula(la(parse_formula(LA_FORMULA, sig), pivot, sig)) == LA[pivot]


def test_la_nested_box_oplus():
    f = parse_formula("box(oplus(box(p), r))", LE)
    assert format_formula(la(f, "p", LE)) == "box.r1(oplus.r1(box.r1(_u), r))"


def test_bare_pivot():
    assert format_formula(la(Var("x"), "x", LE)) == "_u"
    assert format_formula(ra(Var("x"), "x", LE)) == "_u"


def test_ra_dia():
    assert format_formula(ra(parse_formula("dia(p)", LE), "p", LE)) == "dia.r1(_u)"


def test_pivot_must_occur_once():
    with pytest.raises(AdjointError):
        pivot_path(parse_formula("otimes(p, p)", LE), "p")
    with pytest.raises(AdjointError):
        pivot_path(parse_formula("box(q)", LE), "p")
    assert pivot_path(parse_formula("otimes(q, box(p))", LE), "p") == (1, 0)


def test_structural_counterpart():
    f = parse_formula("to(dia(otimes(p, q)), oplus(q, p))", LE)
    assert format_structure(structural_counterpart(f)) == "@to(@dia(@otimes(p, q)), @oplus(q, p))"
    assert format_structure(structural_counterpart(parse_formula("otimes(dia(p), q)", LE))) == "@otimes(@dia(p), q)"
    assert format_structure(structural_counterpart(Var("p"))) == "p"


def test_structural_adjoints():
    u = Meta("U")
    assert format_structure(structural_la(parse_formula("box(p)", LE), "p", u, LE)) == "@box.r1(U)"
    assert format_structure(structural_ra(parse_formula("dia(p)", LE), "p", u, LE)) == "@dia.r1(U)"
    assert structural_la(Var("x"), "x", u, LE) == u
