"""Small-step evaluation for both calculi and finite effect-tree unfolding.

Step functions implement exactly one transition.  The run loops drive them,
detect divergence by recurrence (pure reduction is deterministic, so meeting
the same configuration twice certifies an infinite loop) and feed the tree
builders.  Step budgets count transitions; emitting an effect node costs one
transition and its children split the remaining budget lazily.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import syntax as s
from .syntax import (
    App, ArityKind, Case, Fix, Frame, Lam, Let, Op, Return, Stack, ID_STACK,
    CApp, CCase, CLam, COp, MuApp, Stop,
)
from .trees import BOT, BOT_CERT, STOP, Bot, Node, TreeApprox, ValLeaf


class StuckState(Exception):
    """A well-typed term failed to step: an internal bug, not a user error."""


@dataclass(frozen=True)
class EpcfConfig:
    stack: Stack
    comp: object

    def canonical(self) -> str:
        return s.alpha_canonical(self.stack) + "#" + s.alpha_canonical(self.comp)


# Step outcomes ------------------------------------------------------------

@dataclass(frozen=True)
class Pure:
    next: object  # EpcfConfig or ecps computation


@dataclass(frozen=True)
class Returned:
    value: object


@dataclass(frozen=True)
class Stopped:
    pass


@dataclass(frozen=True)
class Effect:
    op: str
    index: int | None
    child: object  # callable: natural -> EpcfConfig / ecps computation
    finite_width: int | None = None  # natural child count for finitary ops


@dataclass(frozen=True)
class Diverged:
    cycle_length: int


@dataclass(frozen=True)
class OutOfBudget:
    state: object


# ---------------------------------------------------------------------------
# Direct-style stepping

def _fix_unfolding(fn, ty_dom=None):
    """fix F ~> return (fun x -> let w = F (fun y -> let z = fix F in z y) in w x).

    The binder type annotations come from F's type when available; tree shape
    does not depend on them, so nat is used when F is not a syntactic lambda.
    """
    tau = fn.ty.dom if isinstance(fn, Lam) and isinstance(fn.ty, s.Arrow) else s.NAT
    avoid = s.free_vars(fn)
    x = s.fresh_name("x", avoid)
    y = s.fresh_name("y", avoid | {x})
    z = s.fresh_name("z", avoid | {x, y})
    w = s.fresh_name("w", avoid | {x, y, z})
    inner = Lam(y, tau, Let(Fix(fn), z, App(s.Var(z), s.Var(y))))
    return Return(Lam(x, tau, Let(App(fn, inner), w, App(s.Var(w), s.Var(x)))))


def _pure_step_comp(m):
    """The ~> relation between computations; None when no rule applies."""
    match m:
        case App(Lam(x, _, body), v):
            return s.substitute(body, {x: v})
        case Fix(fn):
            return _fix_unfolding(fn)
        case Case(s.Zero(), z, _, _):
            return z
        case Case(s.Succ(v), _, x, sc):
            return s.substitute(sc, {x: v})
    return None


def epcf_step(cfg: EpcfConfig):
    """One transition of the stack machine."""
    stack, m = cfg.stack, cfg.comp
    match m:
        case Return(v):
            if stack.is_id():
                return Returned(v)
            rest, frame = stack.pop()
            return Pure(EpcfConfig(rest, s.substitute(frame.body, {frame.var: v})))
        case Let(bound, x, body):
            return Pure(EpcfConfig(stack.push(Frame(x, body)), bound))
        case Op(op, kind, index, comps, fn):
            if kind != ArityKind.NAT_INF:
                raise StuckState(
                    f"effect outcome for {op!r} requires the nat x alpha^nat form; "
                    "normalize arities first"
                )
            idx = s.numeral_value(index)
            if idx is None:
                raise StuckState(f"non-numeral index on {op!r}")

            def child(k: int, _stack=stack, _fn=fn):
                return EpcfConfig(_stack, App(_fn, s.numeral(k)))

            return Effect(op, idx, child)
        case _:
            nxt = _pure_step_comp(m)
            if nxt is not None:
                return Pure(EpcfConfig(stack, nxt))
    raise StuckState(f"no rule for {m!r}")


def _epcf_terminal(stack: Stack, m):
    """Terminal shapes checked before consuming budget; None if steppable."""
    if isinstance(m, Return) and stack.is_id():
        return Returned(m.value)
    if isinstance(m, Op):
        kind = m.kind
        if kind in (ArityKind.FIN, ArityKind.NAT_FIN):
            comps = m.comps

            def child(k: int, _stack=stack, _comps=comps):
                return EpcfConfig(_stack, _comps[k])

            idx = None if m.index is None else s.numeral_value(m.index)
            return Effect(m.op, idx, child, finite_width=len(comps))
        fn = m.fn

        def child(k: int, _stack=stack, _fn=fn):
            return EpcfConfig(_stack, App(_fn, s.numeral(k)))

        idx = None if m.index is None else s.numeral_value(m.index)
        return Effect(m.op, idx, child)
    return None


def epcf_run(cfg: EpcfConfig, budget: int):
    """Drive the machine for at most budget transitions.

    Returns (outcome, steps_used).  A repeated configuration (up to alpha)
    certifies divergence because reduction is deterministic.
    """
    seen: dict[str, int] = {}
    used = 0
    while True:
        terminal = _epcf_terminal(cfg.stack, cfg.comp)
        if terminal is not None:
            return (terminal if used < budget else OutOfBudget(cfg)), used
        if used >= budget:
            return OutOfBudget(cfg), used
        key = cfg.canonical()
        if key in seen:
            return Diverged(used - seen[key]), used
        seen[key] = used
        out = epcf_step(cfg)
        assert isinstance(out, Pure)
        cfg = out.next
        used += 1


def epcf_tree(stack: Stack, comp, steps: int, depth: int = 8, width: int = 8) -> TreeApprox:
    """Unfold a configuration for a bounded number of transitions."""
    return TreeApprox(_epcf_build(EpcfConfig(stack, comp), steps, depth, width), depth, width)


def _epcf_build(cfg: EpcfConfig, budget: int, depth: int, width: int):
    if budget <= 0:
        return BOT
    outcome, used = epcf_run(cfg, budget)
    match outcome:
        case Returned(v):
            return ValLeaf(v)
        case Diverged(_):
            return BOT_CERT
        case OutOfBudget(_):
            return BOT
        case Effect(op, index, child, finite_width):
            remaining = budget - used - 1
            if depth <= 0:
                return BOT
            if finite_width is not None:
                ks = range(finite_width)
                truncated = False
            else:
                ks = range(width)
                truncated = True
            children = tuple(
                _epcf_build(child(k), remaining, depth - 1, width) for k in ks
            )
            return Node(op, index, children, truncated)
    raise AssertionError(outcome)


# ---------------------------------------------------------------------------
# Continuation-style stepping

def ecps_step(t):
    """One transition of the continuation-passing reduction."""
    match t:
        case Stop():
            return Stopped()
        case CApp(CLam(params, body), args):
            if len(params) != len(args):
                raise StuckState(f"arity mismatch in application {t!r}")
            return Pure(s.substitute(body, {x: a for (x, _), a in zip(params, args)}))
        case MuApp(x, fn, args):
            unrolled = _mu_unroll(x, fn)
            return Pure(CApp(s.substitute(fn, {x: unrolled}), args))
        case CCase(s.CZero(), z, _, _):
            return Pure(z)
        case CCase(s.CSucc(v), _, x, sc):
            return Pure(s.substitute(sc, {x: v}))
        case COp(op, index, x, body):
            idx = s.cnumeral_value(index)
            if idx is None:
                raise StuckState(f"non-numeral index on {op!r}")

            def child(k: int, _body=body, _x=x):
                return s.substitute(_body, {_x: s.cnumeral(k)})

            return Effect(op, idx, child)
    raise StuckState(f"no rule for {t!r}")


def _mu_unroll(x: str, fn):
    """The value substituted for the recursion variable:
    fun (ys) -> (mu x. fn)(ys)."""
    if not isinstance(fn, CLam):
        raise StuckState(f"mu body {fn!r} is not a function")
    avoid = s.free_vars(fn) | {x}
    params = []
    args = []
    for i, (_, ty) in enumerate(fn.params):
        y = s.fresh_name(f"y{i}" if len(fn.params) > 1 else "y", avoid)
        params.append((y, ty))
        args.append(s.CVar(y))
        avoid = avoid | {y}
    return CLam(tuple(params), MuApp(x, fn, tuple(args)))


def ecps_run(t, budget: int):
    """Drive reduction for at most budget transitions; detect recurrence."""
    seen: dict[str, int] = {}
    used = 0
    while True:
        if isinstance(t, Stop):
            return (Stopped() if used < budget else OutOfBudget(t)), used
        if isinstance(t, COp):
            out = ecps_step(t)
            return (out if used < budget else OutOfBudget(t)), used
        if used >= budget:
            return OutOfBudget(t), used
        key = s.alpha_canonical(t)
        if key in seen:
            return Diverged(used - seen[key]), used
        seen[key] = used
        out = ecps_step(t)
        if not isinstance(out, Pure):
            raise AssertionError(out)
        t = out.next
        used += 1


def ecps_tree(t, steps: int, depth: int = 8, width: int = 8) -> TreeApprox:
    """Unfold a closed computation for a bounded number of transitions."""
    return TreeApprox(_ecps_build(t, steps, depth, width), depth, width)


def _ecps_build(t, budget: int, depth: int, width: int):
    if budget <= 0:
        return BOT
    outcome, used = ecps_run(t, budget)
    match outcome:
        case Stopped():
            return STOP
        case Diverged(_):
            return BOT_CERT
        case OutOfBudget(_):
            return BOT
        case Effect(op, index, child, _):
            remaining = budget - used - 1
            if depth <= 0:
                return BOT
            children = tuple(
                _ecps_build(child(k), remaining, depth - 1, width) for k in range(width)
            )
            return Node(op, index, children, truncated=True)
    raise AssertionError(outcome)


LOOP = MuApp("f", CLam((("x", s.NAT),), CApp(s.CVar("f"), (s.CVar("x"),))), (s.CZero(),))
