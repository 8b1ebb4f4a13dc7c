"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is
printed in the terminal summary (and by ``python3 tests/test_acceptance.py``).
"""

import random
import time

import pytest

from conftest import ACCEPTANCE
from golden import CLASSIFICATIONS, LA, LA_FORMULA, LA_SIGNATURE, RULES, TREES
from helpers import RANDOM_OPS, RANDOM_SIG_TEXT, canonical_rule, canonical_tree, parse_tree, random_sequent, signature
from mutations import mutate
from oracles import exhaustive_witnesses, oracle_for

from dlx.adjoints import la
from dlx.calculus import SYNTH, RuleSchema, check_derivation, check_pre_normal_form, is_cut_free, parse_structural_sequent
from dlx.derivation import derive_axiom, zone_sets
from dlx.inductive import check_analytic_inductive, find_witness, iter_witnesses, parse_witness
from dlx.language import format_formula, parse_formula, parse_sequent
from dlx.synthesis import synthesize_rules

# pinned tolerances
RULES_BUDGET_S = 1.0
DERIVE_BUDGET_S = 1.0
ORACLE_SAMPLES = 500
ROUND_TRIPS = 200
ROUND_TRIP_BUDGET_S = 60.0
MUTATIONS = 100

ORACLE_SIG = "F: dia 1 (1)\nG: box 1 (1)\nF: otimes 2 (1,1)\nG: oplus 2 (1,1)"
ORACLE_OPS = [("dia", 1), ("box", 1), ("otimes", 2), ("oplus", 2), ("and", 2), ("or", 2)]


def record(n, ok, detail):
    ACCEPTANCE[n] = (ok, detail)
    assert ok, detail


def _witness(text):
    return parse_witness(text) if text else None


def criterion_1():
    bad, start = [], time.perf_counter()
    for name, mode, axiom, w, prem, concl in RULES:
        sig = signature(mode)
        (rule,) = synthesize_rules(parse_sequent(axiom, sig), sig, _witness(w), mode)
        want = RuleSchema(name, tuple(parse_structural_sequent(p, sig) for p in prem), parse_structural_sequent(concl, sig), SYNTH)
        if canonical_rule(rule) != canonical_rule(want):
            bad.append(name)
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < RULES_BUDGET_S
    return ok, f"{len(RULES) - len(bad)}/{len(RULES)} golden rules, {elapsed:.3f}s (< {RULES_BUDGET_S}s)"


def criterion_2():
    bad = []
    for axiom, mode, w, expected in CLASSIFICATIONS:
        sig = signature(mode)
        seq = parse_sequent(axiom, sig)
        if w is None:
            # "any witness": the search and the exhaustive oracle must agree
            got = next(iter_witnesses(seq, sig, mode), None) is not None
            if got != (next(exhaustive_witnesses(seq, oracle_for(sig.connectives, mode)), None) is not None):
                bad.append(f"{axiom} [{mode}] search/oracle disagree")
        else:
            got = check_analytic_inductive(seq, parse_witness(w), sig, mode)
        if got != expected:
            bad.append(f"{axiom} [{mode}]")
    return not bad, f"{len(CLASSIFICATIONS) - len(bad)}/{len(CLASSIFICATIONS)} classifications" + (f"; wrong: {bad}" if bad else "")


def criterion_3():
    bad, slowest, trees = [], 0.0, 0
    for axiom, mode, w, tree in TREES:
        sig = signature(mode)
        seq = parse_sequent(axiom, sig)
        start = time.perf_counter()
        res = derive_axiom(seq, sig, _witness(w), mode)
        slowest = max(slowest, time.perf_counter() - start)
        d, rules = res.derivation, res.calculus
        skel, pia = zone_sets(seq, sig, mode)
        root = parse_sequent(axiom, sig)
        checks = {
            "root": (d.sequent.lhs.formula, d.sequent.rhs.formula) == root,
            "valid": bool(check_derivation(d, rules, sig)),
            "cut_free": is_cut_free(d, rules),
            "pre_normal": not check_pre_normal_form(d, rules, skel, pia, mode),
        }
        if tree is not None:
            trees += 1
            checks["tree"] = canonical_tree(d, rules) == canonical_tree(parse_tree(tree, sig), rules)
        failed = [k for k, v in checks.items() if not v]
        if failed:
            bad.append(f"{axiom}: {failed}")
    ok = not bad and slowest < DERIVE_BUDGET_S
    return ok, (f"{len(TREES) - len(bad)}/{len(TREES)} axioms pass (a)-(d), {trees} trees compared for (e), "
                f"slowest {slowest:.3f}s (< {DERIVE_BUDGET_S}s)" + (f"; {bad}" if bad else ""))


def criterion_4():
    sig = signature("le", LA_SIGNATURE)
    f = parse_formula(LA_FORMULA, sig)
    got = {v: format_formula(la(f, v, sig)) for v in LA}
    bad = [v for v in LA if got[v] != LA[v]]
    return not bad, f"{len(LA) - len(bad)}/{len(LA)} pivots" + (f"; got {got}" if bad else "")


def criterion_5():
    agree = total = 0
    for mode in ("le", "dle"):
        sig = signature(mode, ORACLE_SIG)
        oracle = oracle_for(sig.connectives, mode)
        rng = random.Random(2024)
        for _ in range(ORACLE_SAMPLES):
            seq = random_sequent(rng, 4, ops=ORACLE_OPS, constants=0.0)
            w = find_witness(seq, sig, mode)
            first = next(exhaustive_witnesses(seq, oracle), None)
            if w is None:
                same = first is None
            else:
                same = (first is not None and first[0] == w.epsilon
                        and oracle.accepts(seq, w.epsilon, set(w.omega)))
            agree += same
            total += 1
    return agree == total, f"{agree}/{total} agreements ({ORACLE_SAMPLES} per mode)"


def round_trip(seq, sig, mode, w):
    res = derive_axiom(seq, sig, w, mode)
    skel, pia = zone_sets(seq, sig, mode)
    return (bool(check_derivation(res.derivation, res.calculus, sig))
            and is_cut_free(res.derivation, res.calculus)
            and not check_pre_normal_form(res.derivation, res.calculus, skel, pia, mode))


def criterion_6():
    start, passed, total, errors = time.perf_counter(), 0, 0, []
    for mode in ("le", "dle"):
        sig = signature(mode, RANDOM_SIG_TEXT)
        rng = random.Random(7)
        n = 0
        while n < ROUND_TRIPS:
            seq = random_sequent(rng, 3, ops=RANDOM_OPS)
            w = find_witness(seq, sig, mode)
            if w is None:
                continue
            n += 1
            total += 1
            try:
                ok = round_trip(seq, sig, mode, w)
            except Exception as e:  # reported, not hidden
                ok = False
                errors.append(f"{type(e).__name__}: {e}")
            passed += ok
    elapsed = time.perf_counter() - start
    ok = passed == total and elapsed < ROUND_TRIP_BUDGET_S
    return ok, f"{passed}/{total} round trips, {elapsed:.1f}s (< {ROUND_TRIP_BUDGET_S}s)" + (f"; {errors[:3]}" if errors else "")


def criterion_7():
    rng = random.Random(11)
    sig = signature("dle", RANDOM_SIG_TEXT)
    pool = []
    while len(pool) < 25:
        seq = random_sequent(rng, 3, ops=RANDOM_OPS)
        w = find_witness(seq, sig, "dle")
        if w is not None:
            res = derive_axiom(seq, sig, w, "dle")
            if res.derivation.size() > 3:
                pool.append(res)
    rejected, families, escaped = 0, {}, []
    for _ in range(MUTATIONS):
        res = rng.choice(pool)
        family, path, bad = mutate(res.derivation, res.calculus, rng)
        families[family] = families.get(family, 0) + 1
        if check_derivation(bad, res.calculus, sig):
            escaped.append((family, path))
        else:
            rejected += 1
    mix = ", ".join(f"{k}={v}" for k, v in sorted(families.items()))
    return rejected == MUTATIONS, f"{rejected}/{MUTATIONS} mutations rejected ({mix})" + (f"; escaped {escaped}" if escaped else "")


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6, 7: criterion_7}


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    record(n, *CRITERIA[n]())


if __name__ == "__main__":
    for n, fn in CRITERIA.items():
        ok, detail = fn()
        print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
