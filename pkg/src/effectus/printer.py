"""Pretty-printing of terms and types back into the text grammar.

print/parse round-trips up to alpha-equivalence; printed output is valid
input for the parser in parser.py.
"""

from __future__ import annotations

from . import syntax as s


def print_type(ty) -> str:
    match ty:
        case s.Unit():
            return "unit"
        case s.Nat():
            return "nat"
        case s.Arrow(dom, cod):
            d = print_type(dom)
            if isinstance(dom, s.Arrow):
                d = f"({d})"
            return f"{d}->{print_type(cod)}"
        case s.Neg(args):
            return f"not({','.join(print_type(a) for a in args)})"
    raise TypeError(f"not a type: {ty!r}")


def _atomic(term) -> bool:
    """Terms printable without parentheses in argument position."""
    if isinstance(term, (s.Star, s.Zero, s.Var, s.CStar, s.CZero, s.CVar)):
        return True
    if isinstance(term, (s.Succ, s.CSucc)):
        return s.numeral_value(term) is not None or s.cnumeral_value(term) is not None
    return False


def _val(v) -> str:
    t = print_term(v)
    return t if _atomic(v) else f"({t})"


def print_term(term) -> str:
    match term:
        case s.Star() | s.CStar():
            return "*"
        case s.Zero() | s.CZero():
            return "0"
        case s.Succ(a):
            n = s.numeral_value(term)
            return str(n) if n is not None else f"succ {_val(a)}"
        case s.CSucc(a):
            n = s.cnumeral_value(term)
            return str(n) if n is not None else f"succ({print_term(a)})"
        case s.Var(x) | s.CVar(x):
            return x
        case s.Lam(x, ty, body):
            return f"fun ({x}:{print_type(ty)}) -> {print_term(body)}"
        case s.App(f, a):
            return f"{_val(f)} {_val(a)}"
        case s.Return(v):
            return f"return {_val(v)}"
        case s.Let(bound, x, body):
            return f"let {x} = {print_term(bound)} in {print_term(body)}"
        case s.Fix(v):
            return f"fix {_val(v)}"
        case s.Case(v, z, x, sc):
            return (
                f"case {_val(v)} of {{ zero -> {print_term(z)}"
                f" | succ {x} -> {print_term(sc)} }}"
            )
        case s.Op(op, kind, index, comps, fn):
            inner = ""
            if index is not None:
                inner = _val(index)
            if kind in (s.ArityKind.FIN, s.ArityKind.NAT_FIN):
                parts = ", ".join(print_term(m) for m in comps)
                inner = f"{inner}; {parts}" if index is not None else parts
            else:
                w = _val(fn)
                inner = f"{inner}; {w}" if index is not None else w
            return f"op[{op}]({inner})"
        case s.CLam(params, body):
            ps = ",".join(f"{x}:{print_type(ty)}" for x, ty in params)
            return f"fun ({ps}) -> {print_term(body)}"
        case s.CApp(f, args):
            return f"{_val(f)}({','.join(print_term(a) for a in args)})"
        case s.MuApp(x, fn, args):
            return f"(mu {x}. {print_term(fn)})({','.join(print_term(a) for a in args)})"
        case s.COp(op, index, x, body):
            return f"op[{op}]({print_term(index)}, {x}. {print_term(body)})"
        case s.Stop():
            return "stop"
        case s.CCase(v, z, x, sc):
            return (
                f"case {_val(v)} of {{ zero -> {print_term(z)}"
                f" | succ {x} -> {print_term(sc)} }}"
            )
    raise TypeError(f"not a term: {term!r}")
