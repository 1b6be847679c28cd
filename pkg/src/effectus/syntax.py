"""Abstract syntax, typing, substitution and alpha-equivalence for the two calculi.

The direct-style language (epcf) has values and computations with an
evaluation-stack semantics; the continuation-passing language (ecps) has
values and computations where computations never return.  Terms are immutable
dataclasses; all operations here are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class TypeCheckError(Exception):
    """A typing rule failed; message names the rule and offending subterm."""


class UnboundVariable(TypeCheckError):
    pass


class ArityMismatch(TypeCheckError):
    """Application argument count differs from the function type's arity."""


class KindMismatch(Exception):
    """A term of one calculus was used where the other calculus was expected."""


# ---------------------------------------------------------------------------
# Types

@dataclass(frozen=True, slots=True)
class Unit:
    def __str__(self):
        return "unit"


@dataclass(frozen=True, slots=True)
class Nat:
    def __str__(self):
        return "nat"


@dataclass(frozen=True, slots=True)
class Arrow:
    """epcf function type ``dom -> cod``."""

    dom: EpcfType
    cod: EpcfType

    def __str__(self):
        d = f"({self.dom})" if isinstance(self.dom, Arrow) else str(self.dom)
        return f"{d}->{self.cod}"


@dataclass(frozen=True, slots=True)
class Neg:
    """ecps function type ``not(A1,...,An)``; functions never return."""

    args: tuple[EcpsType, ...]

    def __str__(self):
        return f"not({','.join(str(a) for a in self.args)})"


EpcfType = Unit | Nat | Arrow
EcpsType = Unit | Nat | Neg

UNIT = Unit()
NAT = Nat()


# ---------------------------------------------------------------------------
# Effect signatures

class ArityKind(Enum):
    """The four operation arities of the direct-style language."""

    FIN = "fin"           # alpha^n -> alpha
    NAT_FIN = "nat_fin"   # nat x alpha^n -> alpha
    INF = "inf"           # alpha^nat -> alpha
    NAT_INF = "nat_inf"   # nat x alpha^nat -> alpha


@dataclass(frozen=True, slots=True)
class EffectSig:
    name: str
    kind: ArityKind
    n: int = 0  # branch count, meaningful for FIN / NAT_FIN only

    def takes_index(self) -> bool:
        return self.kind in (ArityKind.NAT_FIN, ArityKind.NAT_INF)

    def infinitary(self) -> bool:
        return self.kind in (ArityKind.INF, ArityKind.NAT_INF)


@dataclass(frozen=True)
class Signature:
    """The operations available to a program; names are unique."""

    ops: tuple[EffectSig, ...]

    def __post_init__(self):
        names = [o.name for o in self.ops]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate operation names in signature: {names}")

    def get(self, name: str) -> EffectSig:
        for o in self.ops:
            if o.name == name:
                return o
        raise KeyError(f"unknown effect operation {name!r}")

    def __contains__(self, name: str) -> bool:
        return any(o.name == name for o in self.ops)

    def cps_form(self) -> "Signature":
        """Same names, every operation at arity nat x alpha^nat -> alpha."""
        return Signature(tuple(EffectSig(o.name, ArityKind.NAT_INF) for o in self.ops))


EMPTY_SIGNATURE = Signature(())


# ---------------------------------------------------------------------------
# epcf terms

@dataclass(frozen=True, slots=True)
class Star:
    pass


@dataclass(frozen=True, slots=True)
class Zero:
    pass


@dataclass(frozen=True, slots=True)
class Succ:
    arg: EpcfValue


@dataclass(frozen=True, slots=True)
class Lam:
    var: str
    ty: EpcfType
    body: EpcfComp


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class App:
    fn: EpcfValue
    arg: EpcfValue


@dataclass(frozen=True, slots=True)
class Return:
    value: EpcfValue


@dataclass(frozen=True, slots=True)
class Let:
    bound: EpcfComp
    var: str
    body: EpcfComp


@dataclass(frozen=True, slots=True)
class Fix:
    fn: EpcfValue


@dataclass(frozen=True, slots=True)
class Case:
    scrut: EpcfValue
    zero: EpcfComp
    var: str
    succ: EpcfComp


@dataclass(frozen=True, slots=True)
class Op:
    """Effect operation node; the declared arity kind is kept on the node so
    later passes can tell which normalization wrapper to build."""

    op: str
    kind: ArityKind
    index: EpcfValue | None          # nat argument, for NAT_* arities
    comps: tuple[EpcfComp, ...]      # finitary branches, for *_FIN arities
    fn: EpcfValue | None             # nat-indexed branch function, for *_INF


EpcfValue = Star | Zero | Succ | Lam | Var
EpcfComp = App | Return | Let | Fix | Case | Op


def numeral(n: int) -> EpcfValue:
    v: EpcfValue = Zero()
    for _ in range(n):
        v = Succ(v)
    return v


def numeral_value(v) -> int | None:
    """Decode succ^n(zero) to n; None when the value is not a ground numeral."""
    n = 0
    while isinstance(v, Succ):
        v = v.arg
        n += 1
    return n if isinstance(v, Zero) else None


# ---------------------------------------------------------------------------
# epcf evaluation stacks

@dataclass(frozen=True, slots=True)
class Frame:
    """One ``let (-) = x in body`` stack frame."""

    var: str
    body: EpcfComp


@dataclass(frozen=True, slots=True)
class Stack:
    """Evaluation stack; () is the identity stack, last frame is innermost."""

    frames: tuple[Frame, ...] = ()

    def push(self, frame: Frame) -> "Stack":
        return Stack(self.frames + (frame,))

    def pop(self) -> tuple["Stack", Frame]:
        return Stack(self.frames[:-1]), self.frames[-1]

    def is_id(self) -> bool:
        return not self.frames


ID_STACK = Stack()


# ---------------------------------------------------------------------------
# ecps terms

@dataclass(frozen=True, slots=True)
class CStar:
    pass


@dataclass(frozen=True, slots=True)
class CZero:
    pass


@dataclass(frozen=True, slots=True)
class CSucc:
    arg: EcpsValue


@dataclass(frozen=True, slots=True)
class CLam:
    params: tuple[tuple[str, EcpsType], ...]
    body: EcpsComp


@dataclass(frozen=True, slots=True)
class CVar:
    name: str


@dataclass(frozen=True, slots=True)
class CApp:
    fn: EcpsValue
    args: tuple[EcpsValue, ...]


@dataclass(frozen=True, slots=True)
class MuApp:
    """(mu x. v)(args): apply the recursive function v, x bound in v."""

    var: str
    fn: EcpsValue
    args: tuple[EcpsValue, ...]


@dataclass(frozen=True, slots=True)
class COp:
    op: str
    index: EcpsValue
    var: str
    body: EcpsComp


@dataclass(frozen=True, slots=True)
class Stop:
    pass


@dataclass(frozen=True, slots=True)
class CCase:
    scrut: EcpsValue
    zero: EcpsComp
    var: str
    succ: EcpsComp


EcpsValue = CStar | CZero | CSucc | CLam | CVar
EcpsComp = CApp | MuApp | COp | Stop | CCase


def cnumeral(n: int) -> EcpsValue:
    v: EcpsValue = CZero()
    for _ in range(n):
        v = CSucc(v)
    return v


def cnumeral_value(v) -> int | None:
    n = 0
    while isinstance(v, CSucc):
        v = v.arg
        n += 1
    return n if isinstance(v, CZero) else None


def is_epcf(term) -> bool:
    return isinstance(term, (Star, Zero, Succ, Lam, Var, App, Return, Let, Fix, Case, Op))


def is_ecps(term) -> bool:
    return isinstance(
        term, (CStar, CZero, CSucc, CLam, CVar, CApp, MuApp, COp, Stop, CCase)
    )


def is_value(term) -> bool:
    return isinstance(term, (Star, Zero, Succ, Lam, Var, CStar, CZero, CSucc, CLam, CVar))


# ---------------------------------------------------------------------------
# Type environments

@dataclass(frozen=True)
class TypeEnv:
    """Ordered, duplicate-free map from variable names to types."""

    entries: tuple[tuple[str, object], ...] = ()

    def extend(self, name: str, ty) -> "TypeEnv":
        if self.lookup(name) is not None:
            raise TypeCheckError(f"variable {name!r} already bound in environment")
        return TypeEnv(self.entries + ((name, ty),))

    def lookup(self, name: str):
        for n, t in reversed(self.entries):
            if n == name:
                return t
        return None

    def names(self) -> set[str]:
        return {n for n, _ in self.entries}


EMPTY_ENV = TypeEnv()


# ---------------------------------------------------------------------------
# Free variables

def free_vars(term) -> frozenset[str]:
    match term:
        case Var(name) | CVar(name):
            return frozenset((name,))
        case Star() | Zero() | CStar() | CZero() | Stop():
            return frozenset()
        case Succ(a) | CSucc(a) | Return(a) | Fix(a):
            return free_vars(a)
        case Lam(x, _, body):
            return free_vars(body) - {x}
        case CLam(params, body):
            return free_vars(body) - {x for x, _ in params}
        case App(f, a):
            return free_vars(f) | free_vars(a)
        case Let(bound, x, body):
            return free_vars(bound) | (free_vars(body) - {x})
        case Case(v, z, x, s) | CCase(v, z, x, s):
            return free_vars(v) | free_vars(z) | (free_vars(s) - {x})
        case Op(_, _, index, comps, fn):
            out = frozenset() if index is None else free_vars(index)
            for m in comps:
                out |= free_vars(m)
            if fn is not None:
                out |= free_vars(fn)
            return out
        case CApp(f, args):
            out = free_vars(f)
            for a in args:
                out |= free_vars(a)
            return out
        case MuApp(x, fn, args):
            out = free_vars(fn) - {x}
            for a in args:
                out |= free_vars(a)
            return out
        case COp(_, index, x, body):
            return free_vars(index) | (free_vars(body) - {x})
        case Stack(frames):
            out = frozenset()
            for fr in frames:
                out |= free_vars(fr.body) - {fr.var}
            return out
    raise TypeError(f"not a term: {term!r}")


def fresh_name(base: str, avoid) -> str:
    """Smallest primed variant of base not in avoid; deterministic."""
    base = base.rstrip("'") or "x"
    cand = base
    while cand in avoid:
        cand += "'"
    return cand


# ---------------------------------------------------------------------------
# Substitution

def substitute(term, bindings: dict):
    """Capture-avoiding simultaneous substitution of closed-or-open values.

    Keys are variable names; values must be values of the same calculus as
    ``term``.  Binders are renamed (primed) only when they would capture.
    """
    if not bindings:
        return term
    if is_epcf(term) or isinstance(term, Stack):
        for v in bindings.values():
            if not is_epcf(v):
                raise KindMismatch(f"cannot substitute {v!r} into an epcf term")
            if not is_value(v):
                raise KindMismatch(f"substituted term {v!r} is not a value")
    elif is_ecps(term):
        for v in bindings.values():
            if not is_ecps(v):
                raise KindMismatch(f"cannot substitute {v!r} into an ecps term")
            if not is_value(v):
                raise KindMismatch(f"substituted term {v!r} is not a value")
    else:
        raise TypeError(f"not a term: {term!r}")
    return _subst(term, bindings)


def _binder(x: str, scope_terms, bindings):
    """Drop the shadowed binding and rename x if a substituted value has it free."""
    inner = {k: v for k, v in bindings.items() if k != x}
    if not inner:
        return x, inner, False
    captured = set()
    for v in inner.values():
        captured |= free_vars(v)
    if x in captured:
        avoid = set(captured) | set(inner)
        for t in scope_terms:
            avoid |= free_vars(t)
        x2 = fresh_name(x, avoid)
        return x2, inner, True
    return x, inner, False


def _subst(term, b: dict):
    match term:
        case Var(name):
            return b.get(name, term)
        case CVar(name):
            return b.get(name, term)
        case Star() | Zero() | CStar() | CZero() | Stop():
            return term
        case Succ(a):
            return Succ(_subst(a, b))
        case CSucc(a):
            return CSucc(_subst(a, b))
        case Return(a):
            return Return(_subst(a, b))
        case Fix(a):
            return Fix(_subst(a, b))
        case Lam(x, ty, body):
            x2, inner, renamed = _binder(x, [body], b)
            if renamed:
                body = _subst(body, {x: Var(x2)})
            return Lam(x2, ty, _subst(body, inner)) if inner else Lam(x2, ty, body)
        case App(f, a):
            return App(_subst(f, b), _subst(a, b))
        case Let(bound, x, body):
            nb = _subst(bound, b)
            x2, inner, renamed = _binder(x, [body], b)
            if renamed:
                body = _subst(body, {x: Var(x2)})
            return Let(nb, x2, _subst(body, inner) if inner else body)
        case Case(v, z, x, s):
            nv, nz = _subst(v, b), _subst(z, b)
            x2, inner, renamed = _binder(x, [s], b)
            if renamed:
                s = _subst(s, {x: Var(x2)})
            return Case(nv, nz, x2, _subst(s, inner) if inner else s)
        case Op(op, kind, index, comps, fn):
            return Op(
                op,
                kind,
                None if index is None else _subst(index, b),
                tuple(_subst(m, b) for m in comps),
                None if fn is None else _subst(fn, b),
            )
        case CLam(params, body):
            names = [x for x, _ in params]
            inner = {k: v for k, v in b.items() if k not in names}
            if not inner:
                return term
            captured = set()
            for v in inner.values():
                captured |= free_vars(v)
            renaming = {}
            new_params = []
            avoid = captured | set(inner) | free_vars(body)
            for x, ty in params:
                if x in captured:
                    x2 = fresh_name(x, avoid)
                    avoid.add(x2)
                    renaming[x] = CVar(x2)
                    new_params.append((x2, ty))
                else:
                    new_params.append((x, ty))
            if renaming:
                body = _subst(body, renaming)
            return CLam(tuple(new_params), _subst(body, inner))
        case CApp(f, args):
            return CApp(_subst(f, b), tuple(_subst(a, b) for a in args))
        case MuApp(x, fn, args):
            nargs = tuple(_subst(a, b) for a in args)
            x2, inner, renamed = _binder(x, [fn], b)
            if renamed:
                fn = _subst(fn, {x: CVar(x2)})
            return MuApp(x2, _subst(fn, inner) if inner else fn, nargs)
        case COp(op, index, x, body):
            ni = _subst(index, b)
            x2, inner, renamed = _binder(x, [body], b)
            if renamed:
                body = _subst(body, {x: CVar(x2)})
            return COp(op, ni, x2, _subst(body, inner) if inner else body)
        case CCase(v, z, x, s):
            nv, nz = _subst(v, b), _subst(z, b)
            x2, inner, renamed = _binder(x, [s], b)
            if renamed:
                s = _subst(s, {x: CVar(x2)})
            return CCase(nv, nz, x2, _subst(s, inner) if inner else s)
        case Stack(frames):
            new = []
            for fr in frames:
                x2, inner, renamed = _binder(fr.var, [fr.body], b)
                body = fr.body
                if renamed:
                    body = _subst(body, {fr.var: Var(x2)})
                new.append(Frame(x2, _subst(body, inner) if inner else body))
            return Stack(tuple(new))
    raise TypeError(f"not a term: {term!r}")


# ---------------------------------------------------------------------------
# Alpha-equivalence

def alpha_eq(t1, t2) -> bool:
    """Equality up to consistent renaming of bound variables."""
    if is_epcf(t1) != is_epcf(t2) or is_ecps(t1) != is_ecps(t2):
        if not (isinstance(t1, Stack) and isinstance(t2, Stack)):
            raise KindMismatch(f"alpha_eq across calculi: {t1!r} vs {t2!r}")
    return alpha_canonical(t1) == alpha_canonical(t2)


def alpha_canonical(term) -> str:
    """Canonical printed form: binders numbered in traversal order.

    Used both for alpha_eq and as the hashable key for cycle detection.
    """
    out: list[str] = []
    _canon(term, {}, out)
    return "".join(out)


def _canon(term, env: dict, out: list, counter=None):
    if counter is None:
        counter = [0]

    def bind(x):
        counter[0] += 1
        return f"%{counter[0]}"

    match term:
        case Var(x) | CVar(x):
            out.append(env.get(x, x))
            out.append(";")
        case Star() | CStar():
            out.append("*;")
        case Zero() | CZero():
            out.append("z;")
        case Stop():
            out.append("!;")
        case Succ(a) | CSucc(a):
            out.append("s(")
            _canon(a, env, out, counter)
            out.append(")")
        case Return(a):
            out.append("r(")
            _canon(a, env, out, counter)
            out.append(")")
        case Fix(a):
            out.append("f(")
            _canon(a, env, out, counter)
            out.append(")")
        case Lam(x, ty, body):
            n = bind(x)
            out.append(f"l[{ty}](")
            _canon(body, {**env, x: n}, out, counter)
            out.append(")")
        case App(f, a):
            out.append("a(")
            _canon(f, env, out, counter)
            _canon(a, env, out, counter)
            out.append(")")
        case Let(bound, x, body):
            out.append("L(")
            _canon(bound, env, out, counter)
            n = bind(x)
            _canon(body, {**env, x: n}, out, counter)
            out.append(")")
        case Case(v, z, x, s) | CCase(v, z, x, s):
            out.append("c(")
            _canon(v, env, out, counter)
            _canon(z, env, out, counter)
            n = bind(x)
            _canon(s, {**env, x: n}, out, counter)
            out.append(")")
        case Op(op, kind, index, comps, fn):
            out.append(f"o[{op}/{kind.value}](")
            if index is not None:
                _canon(index, env, out, counter)
            for m in comps:
                _canon(m, env, out, counter)
            if fn is not None:
                _canon(fn, env, out, counter)
            out.append(")")
        case CLam(params, body):
            env2 = dict(env)
            tys = ",".join(str(t) for _, t in params)
            for x, _ in params:
                env2[x] = bind(x)
            out.append(f"l[{tys}](")
            _canon(body, env2, out, counter)
            out.append(")")
        case CApp(f, args):
            out.append("a(")
            _canon(f, env, out, counter)
            for a in args:
                _canon(a, env, out, counter)
            out.append(")")
        case MuApp(x, fn, args):
            out.append("m(")
            n = bind(x)
            _canon(fn, {**env, x: n}, out, counter)
            for a in args:
                _canon(a, env, out, counter)
            out.append(")")
        case COp(op, index, x, body):
            out.append(f"o[{op}](")
            _canon(index, env, out, counter)
            n = bind(x)
            _canon(body, {**env, x: n}, out, counter)
            out.append(")")
        case Stack(frames):
            out.append("S(")
            for fr in frames:
                n = bind(fr.var)
                _canon(fr.body, {**env, fr.var: n}, out, counter)
                out.append("|")
            out.append(")")
        case _:
            raise TypeError(f"not a term: {term!r}")


# ---------------------------------------------------------------------------
# Typechecking: epcf

def typecheck_epcf(env: TypeEnv, term, sig: Signature = EMPTY_SIGNATURE):
    """Return the unique type of an epcf value or computation under env."""
    match term:
        case Var(x):
            ty = env.lookup(x)
            if ty is None:
                raise UnboundVariable(f"unbound variable {x!r}")
            return ty
        case Star():
            return UNIT
        case Zero():
            return NAT
        case Succ(a):
            if typecheck_epcf(env, a, sig) != NAT:
                raise TypeCheckError(f"(succ): argument of succ must be nat in {term!r}")
            return NAT
        case Lam(x, ty, body):
            return Arrow(ty, typecheck_epcf(env.extend(x, ty), body, sig))
        case App(f, a):
            fty = typecheck_epcf(env, f, sig)
            if not isinstance(fty, Arrow):
                raise TypeCheckError(f"(app): {f!r} has non-function type {fty}")
            aty = typecheck_epcf(env, a, sig)
            if aty != fty.dom:
                raise TypeCheckError(
                    f"(app): argument type {aty} does not match domain {fty.dom}"
                )
            return fty.cod
        case Return(a):
            return typecheck_epcf(env, a, sig)
        case Let(bound, x, body):
            bty = typecheck_epcf(env, bound, sig)
            return typecheck_epcf(env.extend(x, bty), body, sig)
        case Fix(v):
            vty = typecheck_epcf(env, v, sig)
            if (
                isinstance(vty, Arrow)
                and isinstance(vty.dom, Arrow)
                and vty.dom == vty.cod
            ):
                return vty.dom
            raise TypeCheckError(
                f"(fix): expected type (t->r)->(t->r) with a function body, got {vty}"
            )
        case Case(v, z, x, s):
            if typecheck_epcf(env, v, sig) != NAT:
                raise TypeCheckError("(case): scrutinee must be nat")
            zty = typecheck_epcf(env, z, sig)
            sty = typecheck_epcf(env.extend(x, NAT), s, sig)
            if zty != sty:
                raise TypeCheckError(f"(case): branch types differ: {zty} vs {sty}")
            return zty
        case Op(op, kind, index, comps, fn):
            if op not in sig:
                raise TypeCheckError(f"(op): operation {op!r} not in signature")
            declared = sig.get(op)
            if declared.kind != kind:
                raise TypeCheckError(
                    f"(op): {op!r} used at arity {kind.value}, declared {declared.kind.value}"
                )
            if declared.takes_index():
                if index is None or typecheck_epcf(env, index, sig) != NAT:
                    raise TypeCheckError(f"(op): {op!r} needs a nat argument")
            elif index is not None:
                raise TypeCheckError(f"(op): {op!r} takes no nat argument")
            if declared.infinitary():
                if fn is None or comps:
                    raise TypeCheckError(f"(op): {op!r} takes one branch function")
                fty = typecheck_epcf(env, fn, sig)
                if not (isinstance(fty, Arrow) and fty.dom == NAT):
                    raise TypeCheckError(
                        f"(op): branch function of {op!r} must have type nat->t, got {fty}"
                    )
                return fty.cod
            if fn is not None or len(comps) != declared.n:
                raise TypeCheckError(
                    f"(op): {op!r} expects {declared.n} computation branches"
                )
            tys = [typecheck_epcf(env, m, sig) for m in comps]
            if len(set(map(str, tys))) > 1:
                raise TypeCheckError(f"(op): branches of {op!r} disagree: {tys}")
            return tys[0]
    raise KindMismatch(f"not an epcf term: {term!r}")


def typecheck_stack(env: TypeEnv, stack: Stack, result: EpcfType,
                    sig: Signature = EMPTY_SIGNATURE) -> tuple[EpcfType, EpcfType]:
    """Derive (hole type, result type) for a stack expected to produce result.

    The identity stack is polymorphic, so the intended result type is a
    parameter; the returned pair is (tau, result) with stack : tau => result.
    Frames are stored push-order, so the first frame is outermost and its body
    must produce the requested result.
    """
    ty = result
    for fr in stack.frames:
        ty = _frame_arg_type(env, fr, ty, sig)
    return ty, result


def _frame_arg_type(env, frame: Frame, want: EpcfType, sig) -> EpcfType:
    """Find tau with env, x:tau |- body : want.

    The language has no type inference, so the candidate taus are the ground
    types plus every type buildable from the annotations in the frame body.
    Unit is tried first: an unused frame variable gets the smallest type.
    """
    cands: list[EpcfType] = [UNIT, NAT]
    for ty in _annotated_types(frame.body):
        stack_ = [ty]
        while stack_:
            t = stack_.pop()
            cands.append(t)
            if isinstance(t, Arrow):
                stack_.extend((t.dom, t.cod))
    seen = set()
    for c in cands:
        if str(c) in seen:
            continue
        seen.add(str(c))
        try:
            got = typecheck_epcf(env.extend(frame.var, c), frame.body, sig)
        except TypeCheckError:
            continue
        if got == want:
            return c
    raise TypeCheckError(
        f"(slet): no argument type makes frame body produce {want}"
    )


def _annotated_types(term):
    match term:
        case Lam(_, ty, body):
            yield ty
            yield from _annotated_types(body)
        case Succ(a) | Return(a) | Fix(a):
            yield from _annotated_types(a)
        case App(f, a):
            yield from _annotated_types(f)
            yield from _annotated_types(a)
        case Let(bound, _, body):
            yield from _annotated_types(bound)
            yield from _annotated_types(body)
        case Case(v, z, _, s):
            yield from _annotated_types(v)
            yield from _annotated_types(z)
            yield from _annotated_types(s)
        case Op(_, _, index, comps, fn):
            if index is not None:
                yield from _annotated_types(index)
            for m in comps:
                yield from _annotated_types(m)
            if fn is not None:
                yield from _annotated_types(fn)
        case _:
            return


# ---------------------------------------------------------------------------
# Typechecking: ecps

WELL_FORMED_COMP = "computation"  # token: computations do not have a type


def typecheck_ecps(env: TypeEnv, term, sig: Signature = EMPTY_SIGNATURE):
    """Values get an EcpsType; well-formed computations get WELL_FORMED_COMP."""
    match term:
        case CVar(x):
            ty = env.lookup(x)
            if ty is None:
                raise UnboundVariable(f"unbound variable {x!r}")
            return ty
        case CStar():
            return UNIT
        case CZero():
            return NAT
        case CSucc(a):
            if typecheck_ecps(env, a, sig) != NAT:
                raise TypeCheckError(f"(succ): argument of succ must be nat in {term!r}")
            return NAT
        case CLam(params, body):
            inner = env
            for x, ty in params:
                inner = inner.extend(x, ty)
            typecheck_ecps(inner, body, sig)
            return Neg(tuple(ty for _, ty in params))
        case CApp(f, args):
            fty = typecheck_ecps(env, f, sig)
            if not isinstance(fty, Neg):
                raise TypeCheckError(f"(app): {f!r} has non-function type {fty}")
            if len(args) != len(fty.args):
                raise ArityMismatch(
                    f"(app): {len(args)} arguments against type {fty}"
                )
            for a, want in zip(args, fty.args):
                got = typecheck_ecps(env, a, sig)
                if got != want:
                    raise TypeCheckError(f"(app): argument {a!r} has {got}, wants {want}")
            return WELL_FORMED_COMP
        case MuApp(x, fn, args):
            # the recursion variable must be declared at the function's own type
            fty = _mu_fn_type(env, x, fn, sig)
            if len(args) != len(fty.args):
                raise ArityMismatch(f"(mu): {len(args)} arguments against type {fty}")
            for a, want in zip(args, fty.args):
                got = typecheck_ecps(env, a, sig)
                if got != want:
                    raise TypeCheckError(f"(mu): argument {a!r} has {got}, wants {want}")
            return WELL_FORMED_COMP
        case COp(op, index, x, body):
            if op not in sig:
                raise TypeCheckError(f"(op): operation {op!r} not in signature")
            if typecheck_ecps(env, index, sig) != NAT:
                raise TypeCheckError(f"(op): index of {op!r} must be nat")
            typecheck_ecps(env.extend(x, NAT), body, sig)
            return WELL_FORMED_COMP
        case Stop():
            return WELL_FORMED_COMP
        case CCase(v, z, x, s):
            if typecheck_ecps(env, v, sig) != NAT:
                raise TypeCheckError("(case): scrutinee must be nat")
            typecheck_ecps(env, z, sig)
            typecheck_ecps(env.extend(x, NAT), s, sig)
            return WELL_FORMED_COMP
    raise KindMismatch(f"not an ecps term: {term!r}")


def _mu_fn_type(env: TypeEnv, x: str, fn, sig) -> Neg:
    """Type of a mu-bound function: lambdas tell their own type; a bare
    variable reference is resolved from the environment."""
    if isinstance(fn, CLam):
        want = Neg(tuple(ty for _, ty in fn.params))
        got = typecheck_ecps(env.extend(x, want), fn, sig)
        if got != want:
            raise TypeCheckError(f"(mu): function body has {got}, expected {want}")
        return want
    if isinstance(fn, CVar) and fn.name != x:
        ty = env.lookup(fn.name)
        if isinstance(ty, Neg):
            return ty
    raise TypeCheckError(f"(mu): cannot determine the type of {fn!r}")
