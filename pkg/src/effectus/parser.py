"""Parser for the shared text grammar of the two calculi.

Files carry a ``#lang epcf`` or ``#lang ecps`` header and an optional
``#effects <family> [locations...] [range N]`` header; ``--`` starts a line
comment.  Numerals are sugar for iterated succ.  After parsing, binders that
shadow an enclosing binder are renamed so environments never see duplicates.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import syntax as s
from .families import ObservationFamily, Pure, ecps_signature, family_by_name


class ParseError(Exception):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<comment>--[^\n]*)
  | (?P<opname>op\[[^\]]*\])
  | (?P<hole>\[-\])
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<arrow>->)
  | (?P<punct>[(){},;:.|=*])
  | (?P<ws>\s+)
  | (?P<bad>.)
    """,
    re.VERBOSE,
)

KEYWORDS = {
    "fun", "return", "let", "in", "fix", "case", "of", "zero", "succ",
    "stop", "mu", "not", "unit", "nat",
}


def tokenize(text: str) -> list[str]:
    out = []
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind in ("comment", "ws"):
            continue
        if kind == "bad":
            raise ParseError(f"unexpected character {m.group()!r} at offset {m.start()}")
        out.append(m.group())
    return out


class Tokens:
    """A peekable token stream with positions for error messages."""

    def __init__(self, toks: list[str]):
        self.toks = toks
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> str:
        if self.i >= len(self.toks):
            raise ParseError("unexpected end of input")
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, tok: str):
        got = self.next()
        if got != tok:
            raise ParseError(f"expected {tok!r}, got {got!r} (token {self.i})")

    def at_ident(self) -> bool:
        t = self.peek()
        return t is not None and re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", t) and t not in KEYWORDS

    def ident(self) -> str:
        t = self.next()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", t) or t in KEYWORDS:
            raise ParseError(f"expected identifier, got {t!r}")
        return t

    def done(self) -> bool:
        return self.i >= len(self.toks)


# ---------------------------------------------------------------------------
# Types

def parse_type(ts: Tokens, lang: str):
    left = _parse_type_atom(ts, lang)
    if ts.peek() == "->":
        if lang != "epcf":
            raise ParseError("arrow types belong to the epcf grammar")
        ts.next()
        return s.Arrow(left, parse_type(ts, lang))
    return left


def _parse_type_atom(ts: Tokens, lang: str):
    t = ts.next()
    if t == "unit":
        return s.UNIT
    if t == "nat":
        return s.NAT
    if t == "(":
        inner = parse_type(ts, lang)
        ts.expect(")")
        return inner
    if t == "not":
        if lang != "ecps":
            raise ParseError("negation types belong to the ecps grammar")
        ts.expect("(")
        args = []
        if ts.peek() != ")":
            args.append(parse_type(ts, lang))
            while ts.peek() == ",":
                ts.next()
                args.append(parse_type(ts, lang))
        ts.expect(")")
        return s.Neg(tuple(args))
    raise ParseError(f"expected a type, got {t!r}")


# ---------------------------------------------------------------------------
# epcf terms

def _opname(tok: str) -> str:
    return tok[3:-1]


def parse_epcf_value(ts: Tokens, sig: s.Signature):
    t = ts.peek()
    if t == "*":
        ts.next()
        return s.Star()
    if t == "zero":
        ts.next()
        return s.Zero()
    if t is not None and t.isdigit():
        ts.next()
        return s.numeral(int(t))
    if t == "succ":
        ts.next()
        return s.Succ(parse_epcf_value(ts, sig))
    if t == "fun":
        ts.next()
        ts.expect("(")
        x = ts.ident()
        ts.expect(":")
        ty = parse_type(ts, "epcf")
        ts.expect(")")
        ts.expect("->")
        body = parse_epcf_comp(ts, sig)
        return s.Lam(x, ty, body)
    if t == "(":
        ts.next()
        v = parse_epcf_value(ts, sig)
        ts.expect(")")
        return v
    if ts.at_ident():
        return s.Var(ts.ident())
    raise ParseError(f"expected an epcf value, got {t!r}")


def _starts_value(t: str | None) -> bool:
    if t is None:
        return False
    return (
        t in ("*", "zero", "succ", "fun", "(")
        or t.isdigit()
        or (re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", t) is not None and t not in KEYWORDS)
    )


def parse_epcf_comp(ts: Tokens, sig: s.Signature):
    t = ts.peek()
    if t == "return":
        ts.next()
        return s.Return(parse_epcf_value(ts, sig))
    if t == "let":
        ts.next()
        x = ts.ident()
        ts.expect("=")
        bound = parse_epcf_comp(ts, sig)
        ts.expect("in")
        body = parse_epcf_comp(ts, sig)
        return s.Let(bound, x, body)
    if t == "fix":
        ts.next()
        return s.Fix(parse_epcf_value(ts, sig))
    if t == "case":
        ts.next()
        v = parse_epcf_value(ts, sig)
        ts.expect("of")
        ts.expect("{")
        ts.expect("zero")
        ts.expect("->")
        z = parse_epcf_comp(ts, sig)
        ts.expect("|")
        ts.expect("succ")
        x = ts.ident()
        ts.expect("->")
        sc = parse_epcf_comp(ts, sig)
        ts.expect("}")
        return s.Case(v, z, x, sc)
    if t is not None and t.startswith("op["):
        ts.next()
        op = _opname(t)
        if op not in sig:
            raise ParseError(f"operation {op!r} not declared by the effects header")
        decl = sig.get(op)
        ts.expect("(")
        index = None
        comps: tuple = ()
        fn = None
        if decl.takes_index():
            index = parse_epcf_value(ts, sig)
            ts.expect(";")
        if decl.infinitary():
            fn = parse_epcf_value(ts, sig)
        else:
            ms = [parse_epcf_comp(ts, sig)]
            while ts.peek() == ",":
                ts.next()
                ms.append(parse_epcf_comp(ts, sig))
            comps = tuple(ms)
        ts.expect(")")
        return s.Op(op, decl.kind, index, comps, fn)
    if t == "(":
        # either a parenthesized computation or a parenthesized value
        # starting an application
        save = ts.i
        try:
            ts.next()
            inner = parse_epcf_comp(ts, sig)
            ts.expect(")")
            return inner
        except ParseError:
            ts.i = save
        v = parse_epcf_value(ts, sig)
        w = parse_epcf_value(ts, sig)
        return s.App(v, w)
    if _starts_value(t):
        v = parse_epcf_value(ts, sig)
        w = parse_epcf_value(ts, sig)
        return s.App(v, w)
    raise ParseError(f"expected an epcf computation, got {t!r}")


# ---------------------------------------------------------------------------
# ecps terms

def parse_ecps_value(ts: Tokens, sig: s.Signature):
    t = ts.peek()
    if t == "*":
        ts.next()
        return s.CStar()
    if t == "zero":
        ts.next()
        return s.CZero()
    if t is not None and t.isdigit():
        ts.next()
        return s.cnumeral(int(t))
    if t == "succ":
        ts.next()
        if ts.peek() == "(":
            ts.next()
            v = parse_ecps_value(ts, sig)
            ts.expect(")")
            return s.CSucc(v)
        return s.CSucc(parse_ecps_value(ts, sig))
    if t == "fun":
        ts.next()
        ts.expect("(")
        params = []
        if ts.peek() != ")":
            while True:
                x = ts.ident()
                ts.expect(":")
                ty = parse_type(ts, "ecps")
                params.append((x, ty))
                if ts.peek() == ",":
                    ts.next()
                    continue
                break
        ts.expect(")")
        ts.expect("->")
        body = parse_ecps_comp(ts, sig)
        return s.CLam(tuple(params), body)
    if t == "(":
        ts.next()
        v = parse_ecps_value(ts, sig)
        ts.expect(")")
        return v
    if ts.at_ident():
        return s.CVar(ts.ident())
    raise ParseError(f"expected an ecps value, got {t!r}")


def _parse_args(ts: Tokens, sig: s.Signature) -> tuple:
    ts.expect("(")
    args = []
    if ts.peek() != ")":
        args.append(parse_ecps_value(ts, sig))
        while ts.peek() == ",":
            ts.next()
            args.append(parse_ecps_value(ts, sig))
    ts.expect(")")
    return tuple(args)


def parse_ecps_comp(ts: Tokens, sig: s.Signature):
    t = ts.peek()
    if t == "stop":
        ts.next()
        return s.Stop()
    if t == "case":
        ts.next()
        v = parse_ecps_value(ts, sig)
        ts.expect("of")
        ts.expect("{")
        ts.expect("zero")
        ts.expect("->")
        z = parse_ecps_comp(ts, sig)
        ts.expect("|")
        ts.expect("succ")
        x = ts.ident()
        ts.expect("->")
        sc = parse_ecps_comp(ts, sig)
        ts.expect("}")
        return s.CCase(v, z, x, sc)
    if t is not None and t.startswith("op["):
        ts.next()
        op = _opname(t)
        if op not in sig:
            raise ParseError(f"operation {op!r} not declared by the effects header")
        ts.expect("(")
        index = parse_ecps_value(ts, sig)
        ts.expect(",")
        x = ts.ident()
        ts.expect(".")
        body = parse_ecps_comp(ts, sig)
        ts.expect(")")
        return s.COp(op, index, x, body)
    if t == "(" and ts.i + 1 < len(ts.toks) and ts.toks[ts.i + 1] == "mu":
        ts.next()
        ts.next()
        x = ts.ident()
        ts.expect(".")
        fn = parse_ecps_value(ts, sig)
        ts.expect(")")
        args = _parse_args(ts, sig)
        return s.MuApp(x, fn, args)
    # otherwise: an application v(args)
    v = parse_ecps_value(ts, sig)
    return s.CApp(v, _parse_args(ts, sig))


# ---------------------------------------------------------------------------
# Shadow freshening

def freshen_shadowing(term, taken: frozenset[str] = frozenset()):
    """Rename binders that shadow an enclosing binder, so every environment
    built while typechecking stays duplicate-free."""
    return _freshen(term, set(taken), {})


def _rebind(x: str, taken: set[str], env: dict):
    if x in taken:
        x2 = s.fresh_name(x, taken)
    else:
        x2 = x
    return x2, taken | {x2}, {**env, x: x2}


def _freshen(term, taken: set, env: dict):
    match term:
        case s.Var(x):
            return s.Var(env.get(x, x))
        case s.CVar(x):
            return s.CVar(env.get(x, x))
        case s.Star() | s.Zero() | s.CStar() | s.CZero() | s.Stop():
            return term
        case s.Succ(a):
            return s.Succ(_freshen(a, taken, env))
        case s.CSucc(a):
            return s.CSucc(_freshen(a, taken, env))
        case s.Return(a):
            return s.Return(_freshen(a, taken, env))
        case s.Fix(a):
            return s.Fix(_freshen(a, taken, env))
        case s.Lam(x, ty, body):
            x2, taken2, env2 = _rebind(x, taken, env)
            return s.Lam(x2, ty, _freshen(body, taken2, env2))
        case s.App(f, a):
            return s.App(_freshen(f, taken, env), _freshen(a, taken, env))
        case s.Let(bound, x, body):
            nb = _freshen(bound, taken, env)
            x2, taken2, env2 = _rebind(x, taken, env)
            return s.Let(nb, x2, _freshen(body, taken2, env2))
        case s.Case(v, z, x, sc):
            nv = _freshen(v, taken, env)
            nz = _freshen(z, taken, env)
            x2, taken2, env2 = _rebind(x, taken, env)
            return s.Case(nv, nz, x2, _freshen(sc, taken2, env2))
        case s.Op(op, kind, index, comps, fn):
            return s.Op(
                op,
                kind,
                None if index is None else _freshen(index, taken, env),
                tuple(_freshen(m, taken, env) for m in comps),
                None if fn is None else _freshen(fn, taken, env),
            )
        case s.CLam(params, body):
            new_params = []
            taken2, env2 = taken, env
            for x, ty in params:
                x2, taken2, env2 = _rebind(x, taken2, env2)
                new_params.append((x2, ty))
            return s.CLam(tuple(new_params), _freshen(body, taken2, env2))
        case s.CApp(f, args):
            return s.CApp(
                _freshen(f, taken, env), tuple(_freshen(a, taken, env) for a in args)
            )
        case s.MuApp(x, fn, args):
            nargs = tuple(_freshen(a, taken, env) for a in args)
            x2, taken2, env2 = _rebind(x, taken, env)
            return s.MuApp(x2, _freshen(fn, taken2, env2), nargs)
        case s.COp(op, index, x, body):
            ni = _freshen(index, taken, env)
            x2, taken2, env2 = _rebind(x, taken, env)
            return s.COp(op, ni, x2, _freshen(body, taken2, env2))
        case s.CCase(v, z, x, sc):
            nv = _freshen(v, taken, env)
            nz = _freshen(z, taken, env)
            x2, taken2, env2 = _rebind(x, taken, env)
            return s.CCase(nv, nz, x2, _freshen(sc, taken2, env2))
    raise TypeError(f"not a term: {term!r}")


# ---------------------------------------------------------------------------
# Whole files

@dataclass(frozen=True)
class SourceFile:
    lang: str                    # "epcf" | "ecps"
    family: ObservationFamily
    signature: s.Signature
    term: object


def _parse_headers(text: str) -> tuple[str, ObservationFamily, str]:
    lang = None
    family: ObservationFamily = Pure()
    body_lines = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#lang"):
            lang = stripped.split()[1]
            if lang not in ("epcf", "ecps"):
                raise ParseError(f"unknown language {lang!r}")
        elif stripped.startswith("#effects"):
            parts = stripped.split()[1:]
            if not parts:
                raise ParseError("#effects header needs a family name")
            name = parts[0]
            locations: tuple[str, ...] = ("l0", "l1")
            value_range = 4
            rest = parts[1:]
            if "range" in rest:
                i = rest.index("range")
                value_range = int(rest[i + 1])
                rest = rest[:i] + rest[i + 2:]
            if rest:
                locations = tuple(rest)
            family = family_by_name(name, locations, value_range)
        else:
            body_lines.append(line)
    if lang is None:
        raise ParseError("missing #lang header")
    return lang, family, "\n".join(body_lines)


def parse_term_text(text: str, lang: str, sig: s.Signature):
    ts = Tokens(tokenize(text))
    if lang == "epcf":
        term = parse_epcf_comp(ts, sig)
    else:
        term = parse_ecps_comp(ts, sig)
    if not ts.done():
        raise ParseError(f"trailing tokens: {ts.toks[ts.i:ts.i + 5]}")
    return freshen_shadowing(term)


def parse_value_text(text: str, lang: str, sig: s.Signature):
    ts = Tokens(tokenize(text))
    term = parse_epcf_value(ts, sig) if lang == "epcf" else parse_ecps_value(ts, sig)
    if not ts.done():
        raise ParseError(f"trailing tokens: {ts.toks[ts.i:ts.i + 5]}")
    return freshen_shadowing(term)


def parse_file_text(text: str) -> SourceFile:
    """Parse a whole source file; the body is one computation or one value."""
    lang, family, body = _parse_headers(text)
    sig = family.epcf_signature() if lang == "epcf" else ecps_signature(family)
    term = None
    comp_error: ParseError | None = None
    ts = Tokens(tokenize(body))
    try:
        term = parse_epcf_comp(ts, sig) if lang == "epcf" else parse_ecps_comp(ts, sig)
        if not ts.done():
            raise ParseError(f"trailing tokens: {ts.toks[ts.i:ts.i + 5]}")
    except ParseError as e:
        comp_error = e
        term = None
    if term is None:
        ts2 = Tokens(tokenize(body))
        try:
            term = (
                parse_epcf_value(ts2, sig) if lang == "epcf" else parse_ecps_value(ts2, sig)
            )
            if not ts2.done():
                raise ParseError(f"trailing tokens: {ts2.toks[ts2.i:ts2.i + 5]}")
        except ParseError:
            raise comp_error
    return SourceFile(lang, family, sig, freshen_shadowing(term))


def parse_pool_text(text: str) -> list:
    """A pool file: header lines, then values separated by lines of '---'."""
    lang, family, body = _parse_headers(text)
    sig = family.epcf_signature() if lang == "epcf" else ecps_signature(family)
    values = []
    for chunk in re.split(r"^---\s*$", body, flags=re.MULTILINE):
        if not chunk.strip():
            continue
        values.append(parse_value_text(chunk, lang, sig))
    return values
