"""Left and right adjoints of definite PIA formulas.

For a PIA formula with one marked pivot occurrence, ``la`` solves
``u <= phi`` for the pivot and ``ra`` solves ``phi <= u``.  Each step peels
one connective off the pivot branch and wraps the accumulator in the
residual of that connective, keeping siblings in place.  The result reports
whether it bounds the pivot from below (``u' <= x``) or from above.
"""

from __future__ import annotations

from .calculus import SApp, SF
from .language import DUAL, PLACEHOLDER, App, Signature, Var, ensure_expanded


class AdjointError(ValueError):
    pass


def pivot_path(f, pivot) -> tuple:
    """Path to ``pivot``: either a path already, or a variable occurring once."""
    if isinstance(pivot, tuple):
        return pivot
    found = []

    def walk(g, path):
        if isinstance(g, Var):
            if g.name == pivot:
                found.append(path)
        else:
            for i, a in enumerate(g.args):
                walk(a, path + (i,))

    walk(f, ())
    if len(found) != 1:
        raise AdjointError(f"pivot {pivot!r} occurs {len(found)} times")
    return found[0]


def solve(f, path, acc, lower: bool, sig: Signature, conv, build):
    """Peel ``f`` along ``path``; returns ``(acc, lower)`` at the pivot.

    ``lower`` means the current goal is ``acc <= f``; otherwise ``f <= acc``.
    ``conv`` turns siblings into the output representation and ``build``
    applies a (residual) connective.
    """
    sig = ensure_expanded(sig)
    for h in path:
        if isinstance(f, Var) or not f.args:
            raise AdjointError("path runs past a leaf")
        conn = sig[f.op]
        want = "G" if lower else "F"
        if conn.family != want:
            side = "below" if lower else "above"
            raise AdjointError(f"{f.op} cannot be solved from {side}")
        r = sig.residual(f.op, h)
        if r not in sig:
            raise AdjointError(f"{f.op} has no residual in mode {sig.mode}")
        args = [conv(a) for a in f.args]
        args[h] = acc
        acc = build(r, tuple(args))
        if conn.eps(h) == DUAL:
            lower = not lower
        f = f.args[h]
    if not isinstance(f, Var):
        raise AdjointError("path does not end at a variable")
    return acc, lower


def _ident(f):
    return f


def la(f, pivot, sig: Signature, u=None):
    """Formula-level left adjoint; residuals appear as ``App('f.ri', ...)``."""
    u = Var(PLACEHOLDER) if u is None else u
    return solve(f, pivot_path(f, pivot), u, True, sig, _ident, App)[0]


def ra(f, pivot, sig: Signature, u=None):
    u = Var(PLACEHOLDER) if u is None else u
    return solve(f, pivot_path(f, pivot), u, False, sig, _ident, App)[0]


def structural_counterpart(f, env: dict | None = None):
    """Structure of a PIA formula; variables in ``env`` are substituted.

    Atoms and constants stay formula leaves.
    """
    env = env or {}
    if isinstance(f, Var):
        return env.get(f.name, SF(f))
    if not f.args:
        return SF(f)
    return SApp(f.op, tuple(structural_counterpart(a, env) for a in f.args))


def structural_solve(f, pivot, u, lower: bool, sig: Signature, env: dict | None = None):
    """Structural ``LA`` (``lower``) or ``RA`` with accumulator ``u``."""
    return solve(f, pivot_path(f, pivot), u, lower, sig, lambda a: structural_counterpart(a, env), SApp)


def structural_la(f, pivot, u, sig: Signature, env: dict | None = None):
    return structural_solve(f, pivot, u, True, sig, env)[0]


def structural_ra(f, pivot, u, sig: Signature, env: dict | None = None):
    return structural_solve(f, pivot, u, False, sig, env)[0]
