"""Command-line front end: ``dlx check|rules|derive|verify``.

Exit status: 0 success, 1 negative verdict (not analytic inductive, or a
rejected derivation), 2 input error, 3 internal verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from . import __version__
from .calculus import base_rules, check_derivation, check_pre_normal_form, is_cut_free
from .derivation import DerivationError, derive_axiom, zone_sets
from .inductive import NotAnalyticError, all_witnesses, classification_report, parse_witness
from .language import ParseError, SignatureError, ensure_expanded, load_signature, parse_sequent
from .render import (
    derivation_from_json,
    derivation_latex,
    derivation_text,
    derivation_to_json,
    dumps,
    rule_from_json,
    rule_latex,
    rule_to_json,
    rules_text,
)
from .synthesis import synthesize_rules

OK, NEGATIVE, INPUT_ERROR, INTERNAL = 0, 1, 2, 3
COMMANDS = ("check", "rules", "derive", "verify")


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    signature: str
    target: str  # axiom text, or a derivation JSON path for verify
    mode: str | None = None
    witness: str | None = None
    format: str = "text"
    uniform_elim: bool = True
    all_witnesses: bool = False
    rules: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.format not in ("text", "json", "latex"):
            raise InputError(f"unknown format {self.format!r}")


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _signature(cfg):
    sig = load_signature(_read(cfg.signature))
    if cfg.mode:
        sig = sig.with_mode(cfg.mode)
    return ensure_expanded(sig)


def _witness(cfg):
    return parse_witness(cfg.witness) if cfg.witness else None


def _load_json(path):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})") from None


def _cmd_check(cfg, sig, out):
    seq = parse_sequent(cfg.target, sig)
    rep = classification_report(seq, sig, sig.mode, _witness(cfg))
    if cfg.all_witnesses:
        rep["witnesses"] = [w.to_json() for w in all_witnesses(seq, sig, sig.mode)]
    if cfg.format == "json":
        out.write(dumps(rep) + "\n")
    else:
        for k, v in rep.items():
            out.write(f"{k}: {json.dumps(v, sort_keys=True)}\n")
    return OK if rep["analytic_inductive"] else NEGATIVE


def _cmd_rules(cfg, sig, out):
    seq = parse_sequent(cfg.target, sig)
    rules = synthesize_rules(seq, sig, _witness(cfg), sig.mode, cfg.uniform_elim)
    if cfg.format == "json":
        out.write(dumps([rule_to_json(r) for r in rules]) + "\n")
    elif cfg.format == "latex":
        out.write("\n".join(rule_latex(r) for r in rules) + "\n")
    else:
        out.write(rules_text(rules) + "\n")
    return OK


def _cmd_derive(cfg, sig, out):
    seq = parse_sequent(cfg.target, sig)
    res = derive_axiom(seq, sig, _witness(cfg), sig.mode, cfg.uniform_elim)
    d = res.derivation
    # never trust the generator: re-check everything before printing
    skel, pia = zone_sets(seq, sig, sig.mode)
    verdict = {
        "valid": bool(check_derivation(d, res.calculus, sig)),
        "cut_free": is_cut_free(d, res.calculus),
        "pre_normal": not check_pre_normal_form(d, res.calculus, skel, pia, sig.mode),
    }
    if not all(verdict.values()):
        print(f"error: generated derivation failed verification: {verdict}", file=sys.stderr)
        return INTERNAL
    if cfg.format == "json":
        obj = {"rules": [rule_to_json(r) for r in res.rules], "derivation": derivation_to_json(d), "verification": verdict}
        out.write(dumps(obj) + "\n")
    elif cfg.format == "latex":
        out.write("\n".join(rule_latex(r) for r in res.rules) + "\n\n" + derivation_latex(d) + "\n")
    else:
        out.write(rules_text(res.rules) + "\n\n" + derivation_text(d) + "\n\n")
        out.write("verified: " + ", ".join(k for k in verdict) + "\n")
    return OK


def _cmd_verify(cfg, sig, out):
    obj = _load_json(cfg.target)
    rule_objs = []
    if isinstance(obj, dict) and "derivation" in obj:
        rule_objs += obj.get("rules", [])
        obj = obj["derivation"]
    if cfg.rules:
        extra = _load_json(cfg.rules)
        rule_objs += extra.get("rules", []) if isinstance(extra, dict) else extra
    try:
        d = derivation_from_json(obj, sig)
        supplied = [rule_from_json(r, sig) for r in rule_objs]
    except ValueError as e:
        raise InputError(str(e)) from None
    rules = base_rules(sig)
    for r in supplied:
        if r.name in rules:
            raise InputError(f"supplied rule {r.name!r} clashes with a base rule")
        rules[r.name] = r
    res = check_derivation(d, rules, sig)
    verdict = {"valid": res.ok, "cut_free": is_cut_free(d, rules)}
    if not res.ok:
        verdict["path"] = list(res.path)
        verdict["reason"] = res.reason
    if cfg.format == "json":
        out.write(dumps(verdict) + "\n")
    else:
        out.write(("valid" if res.ok else f"invalid at {list(res.path)}: {res.reason}") + "\n")
        out.write(f"cut-free: {verdict['cut_free']}\n")
    return OK if res.ok else NEGATIVE


_HANDLERS = {"check": _cmd_check, "rules": _cmd_rules, "derive": _cmd_derive, "verify": _cmd_verify}


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        sig = _signature(cfg)
        return _HANDLERS[cfg.command](cfg, sig, out)
    except NotAnalyticError as e:
        print(f"error: {e}", file=sys.stderr)
        return NEGATIVE
    except (InputError, SignatureError, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR
    except DerivationError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return INTERNAL
    except ValueError as e:  # witness syntax and similar
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dlx", description="Analytic inductive axioms, their rules and derivations.")
    p.add_argument("--version", action="version", version=f"dlx {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "check": "classify an axiom",
        "rules": "synthesize analytic structural rules",
        "derive": "derive an axiom with its rules and verify the result",
        "verify": "check a derivation JSON file",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, help=helps[name])
        sp.add_argument("signature", help="signature file")
        sp.add_argument("target", help="derivation JSON file" if name == "verify" else "axiom, e.g. 'dia(p) |- box(dia(p))'")
        sp.add_argument("--mode", choices=("le", "dle"), help="override the signature's mode")
        sp.add_argument("--format", choices=("text", "json", "latex"), default="text")
        if name != "verify":
            sp.add_argument("--witness", help="e.g. 'eps=p:1,q:d;omega=p<q'")
        if name in ("rules", "derive"):
            sp.add_argument("--no-uniform-elim", dest="uniform_elim", action="store_false")
        if name == "check":
            sp.add_argument("--all-witnesses", action="store_true")
        if name == "verify":
            sp.add_argument("--rules", help="JSON file with extra rules")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            signature=args.signature,
            target=args.target,
            mode=args.mode,
            witness=getattr(args, "witness", None),
            format=args.format,
            uniform_elim=getattr(args, "uniform_elim", True),
            all_witnesses=getattr(args, "all_witnesses", False),
            rules=getattr(args, "rules", None),
        )
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
