"""Text, JSON and LaTeX renderings of rules and derivations."""

from __future__ import annotations

import json
import os

from .calculus import SYNTH, Derivation, RuleSchema, format_rule, format_sequent, parse_structural_sequent
from .language import Signature

_BOLD, _CYAN, _RESET = "\x1b[1m", "\x1b[36m", "\x1b[0m"


def use_color() -> bool:
    return os.environ.get("DLX_COLOR", "0") == "1"


def derivation_text(d: Derivation, color: bool | None = None) -> str:
    """Indented tree, conclusion first; premises one level deeper."""
    color = use_color() if color is None else color
    lines = []

    def walk(n, depth):
        rule = f"{_CYAN}{n.rule}{_RESET}" if color else n.rule
        lines.append("  " * depth + f"{format_sequent(n.sequent)}   [{rule}]")
        for p in n.premises:
            walk(p, depth + 1)

    walk(d, 0)
    return "\n".join(lines)


def rules_text(rules, color: bool | None = None) -> str:
    color = use_color() if color is None else color
    blocks = []
    for r in rules:
        text = format_rule(r)
        if color:
            text = text.replace(f" {r.name}", f" {_BOLD}{r.name}{_RESET}", 1)
        blocks.append(text)
    return "\n\n".join(blocks)


# ---------------------------------------------------------------- JSON


def derivation_to_json(d: Derivation) -> dict:
    return {"sequent": format_sequent(d.sequent), "rule": d.rule, "premises": [derivation_to_json(p) for p in d.premises]}


def derivation_from_json(obj: dict, sig: Signature) -> Derivation:
    try:
        seq = parse_structural_sequent(obj["sequent"], sig)
        prem = tuple(derivation_from_json(p, sig) for p in obj.get("premises", []))
        return Derivation(seq, str(obj["rule"]), prem)
    except (KeyError, TypeError) as e:
        raise ValueError(f"malformed derivation node: {e}") from None


def rule_to_json(r: RuleSchema) -> dict:
    return {
        "name": r.name,
        "premises": [format_sequent(p) for p in r.premises],
        "conclusion": format_sequent(r.conclusion),
    }


def rule_from_json(obj: dict, sig: Signature) -> RuleSchema:
    try:
        prem = tuple(parse_structural_sequent(p, sig) for p in obj["premises"])
        concl = parse_structural_sequent(obj["conclusion"], sig)
        return RuleSchema(str(obj["name"]), prem, concl, SYNTH)
    except (KeyError, TypeError) as e:
        raise ValueError(f"malformed rule: {e}") from None


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


# ---------------------------------------------------------------- LaTeX

# Each node becomes \inference[rule]{premises}{conclusion} (package semantic),
# premises separated by &, nested bottom-up.

_TEX = {"\\": r"\textbackslash{}", "_": r"\_", "&": r"\&", "{": r"\{", "}": r"\}", "#": r"\#", "%": r"\%", "$": r"\$", "^": r"\^{}", "~": r"\~{}"}


def tex_escape(text: str) -> str:
    return "".join(_TEX.get(c, c) for c in text)


def tex_sequent(seq) -> str:
    lhs, rhs = format_sequent(seq).split(" |- ", 1)
    return rf"\mathtt{{{tex_escape(lhs)}}} \vdash \mathtt{{{tex_escape(rhs)}}}"


def derivation_latex(d: Derivation) -> str:
    def node(n, depth):
        pad = "  " * depth
        name = tex_escape(n.rule)
        if not n.premises:
            return f"{pad}\\inference[{name}]{{}}{{{tex_sequent(n.sequent)}}}"
        inner = f"\n{pad}  &\n".join(node(p, depth + 1) for p in n.premises)
        return f"{pad}\\inference[{name}]{{\n{inner}\n{pad}}}{{{tex_sequent(n.sequent)}}}"

    return "\\[\n" + node(d, 0) + "\n\\]"


def rule_latex(r: RuleSchema) -> str:
    prem = " & ".join(tex_sequent(p) for p in r.premises)
    return f"\\[\\inference[{tex_escape(r.name)}]{{{prem}}}{{{tex_sequent(r.conclusion)}}}\\]"
