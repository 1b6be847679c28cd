"""Finite effect-tree approximations and the approximation order.

A tree approximates the (possibly infinite) effect tree of a computation.
Bottom leaves record whether they stand for exhausted unfolding budget
(unknown) or certified divergence (a definitive bottom of the real tree).
Nodes produced by nat-indexed branching carry exactly ``width`` children and
a truncation mark; nodes from finitary source operations keep their natural
child count.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import syntax
from .families import ObservationFamily, occurrable_indices


class ParamMismatch(Exception):
    """Two trees built under different depth/width parameters were compared."""


@dataclass(frozen=True, slots=True)
class Bot:
    """Unknown subtree (budget ran out) or certified divergence."""

    certified: bool = False


@dataclass(frozen=True, slots=True)
class StopLeaf:
    pass


@dataclass(frozen=True, slots=True)
class ValLeaf:
    """Return-value leaf; only direct-style computations produce these."""

    value: object


@dataclass(frozen=True, slots=True)
class Node:
    op: str
    index: int | None
    children: tuple["TreeNode", ...]
    truncated: bool = False


TreeNode = Bot | StopLeaf | ValLeaf | Node

BOT = Bot(False)
BOT_CERT = Bot(True)
STOP = StopLeaf()


@dataclass(frozen=True)
class TreeApprox:
    """A finite approximation together with the bounds it was built under."""

    root: TreeNode
    depth: int
    width: int

    def params(self) -> tuple[int, int]:
        return (self.depth, self.width)


def _check_params(t1: TreeApprox, t2: TreeApprox):
    if t1.params() != t2.params():
        raise ParamMismatch(f"tree parameters differ: {t1.params()} vs {t2.params()}")


# ---------------------------------------------------------------------------
# Approximation order

def tree_leq(t1: TreeApprox, t2: TreeApprox) -> bool:
    """t1 <= t2: t1 is t2 with some subtrees replaced by bottom."""
    _check_params(t1, t2)
    return _leq(t1.root, t2.root)


def _leq(a: TreeNode, b: TreeNode) -> bool:
    if isinstance(a, Bot):
        return True
    match a, b:
        case StopLeaf(), StopLeaf():
            return True
        case ValLeaf(v), ValLeaf(w):
            return syntax.alpha_eq(v, w)
        case Node(op1, i1, cs1, _), Node(op2, i2, cs2, _):
            return (
                op1 == op2
                and i1 == i2
                and len(cs1) == len(cs2)
                and all(_leq(c1, c2) for c1, c2 in zip(cs1, cs2))
            )
    return False


def tree_eq(t1: TreeApprox, t2: TreeApprox) -> bool:
    """Antisymmetry: equal iff <= holds both ways (bottom flavours ignored)."""
    return tree_leq(t1, t2) and tree_leq(t2, t1)


# ---------------------------------------------------------------------------
# Leaf relabeling

def relabel_values(t: TreeApprox) -> TreeApprox:
    """Replace every value leaf by a termination leaf."""
    return TreeApprox(_relabel(t.root), t.depth, t.width)


def _relabel(n: TreeNode) -> TreeNode:
    match n:
        case ValLeaf(_):
            return STOP
        case Node(op, i, cs, tr):
            return Node(op, i, tuple(_relabel(c) for c in cs), tr)
        case _:
            return n


# ---------------------------------------------------------------------------
# Differential comparison

EQUAL = "equal"
DIVERGENT = "divergent"
UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class Compatibility:
    result: str                       # EQUAL / DIVERGENT / UNRESOLVED
    path: tuple[int, ...] | None = None
    labels: tuple[str, str] | None = None

    def __bool__(self):
        return self.result == EQUAL


def _label(n: TreeNode) -> str:
    match n:
        case Bot(certified):
            return "bot-certified" if certified else "bot-budget"
        case StopLeaf():
            return "stop"
        case ValLeaf(v):
            return f"val:{syntax.alpha_canonical(v)}"
        case Node(op, i, cs, _):
            return f"{op}[{i}]/{len(cs)}"
    raise TypeError(n)


def tree_compatible(t1: TreeApprox, t2: TreeApprox, depth: int | None = None) -> Compatibility:
    """Compare two approximations of supposedly the same tree.

    Equal: every compared position carries the same certain label and no
    unknown bottoms remain.  Divergent: some position has two distinct
    certain labels (with a witness path).  Unresolved: no conflict, but an
    unknown bottom faces something on the other side.
    """
    _check_params(t1, t2)
    if depth is None:
        depth = t1.depth
    return _compat(t1.root, t2.root, (), depth)


def _compat(a: TreeNode, b: TreeNode, path: tuple[int, ...], depth: int) -> Compatibility:
    a_unknown = isinstance(a, Bot) and not a.certified
    b_unknown = isinstance(b, Bot) and not b.certified
    if a_unknown or b_unknown:
        if a_unknown and b_unknown:
            return Compatibility(UNRESOLVED, path, (_label(a), _label(b)))
        return Compatibility(UNRESOLVED, path, (_label(a), _label(b)))
    la, lb = _label(a), _label(b)
    if la != lb:
        return Compatibility(DIVERGENT, path, (la, lb))
    if isinstance(a, Node):
        if depth <= 0:
            # children live past the comparison frontier
            return Compatibility(EQUAL)
        pending = None
        for k, (ca, cb) in enumerate(zip(a.children, b.children)):
            r = _compat(ca, cb, path + (k,), depth - 1)
            if r.result == DIVERGENT:
                return r
            if r.result == UNRESOLVED and pending is None:
                pending = r
        if pending is not None:
            return pending
    return Compatibility(EQUAL)


# ---------------------------------------------------------------------------
# Exploration status

def fully_explored(t: TreeApprox, family: ObservationFamily) -> bool:
    """No unknown bottom sits on a path the family's semantics can reach."""
    return _explored(t.root, family, t.width)


def _explored(n: TreeNode, family: ObservationFamily, width: int) -> bool:
    match n:
        case Bot(certified):
            return certified
        case StopLeaf() | ValLeaf(_):
            return True
        case Node(op, _, children, truncated):
            idxs = occurrable_indices(family, op, width)
            if idxs is None:
                if truncated:
                    return False
                idxs = range(len(children))
            for k in idxs:
                if k >= len(children):
                    if truncated:
                        return False
                    continue  # finitary node: index past its natural arity
                if not _explored(children[k], family, width):
                    return False
            return True
    raise TypeError(n)


# ---------------------------------------------------------------------------
# Snapshot text form

def render(t: TreeApprox) -> str:
    """Canonical s-expression text, one node per line, children indented."""
    lines: list[str] = []
    _render(t.root, 0, lines)
    return "\n".join(lines) + "\n"


def _render(n: TreeNode, indent: int, lines: list[str]):
    pad = "  " * indent
    match n:
        case Bot(certified):
            lines.append(f"{pad}(bot {'certified' if certified else 'budget'})")
        case StopLeaf():
            lines.append(f"{pad}(stop)")
        case ValLeaf(v):
            from . import printer

            lines.append(f"{pad}(val {printer.print_term(v)})")
        case Node(op, i, cs, truncated):
            idx = "-" if i is None else str(i)
            mark = " ..." if truncated else ""
            lines.append(f"{pad}(node {op} {idx}{mark}")
            for c in cs:
                _render(c, indent + 1, lines)
            lines[-1] += ")"


def parse_snapshot(text: str) -> TreeNode:
    """Inverse of render, ignoring layout."""
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    node, rest = _parse_sexp(tokens)
    if rest:
        raise ValueError(f"trailing snapshot tokens: {rest[:4]}")
    return node


def _parse_sexp(tokens: list[str]) -> tuple[TreeNode, list[str]]:
    if not tokens or tokens[0] != "(":
        raise ValueError(f"expected '(' in snapshot, got {tokens[:1]}")
    head = tokens[1]
    if head == "bot":
        return Bot(tokens[2] == "certified"), tokens[4:]
    if head == "stop":
        return STOP, tokens[3:]
    if head == "node":
        op = tokens[2]
        idx = None if tokens[3] == "-" else int(tokens[3])
        rest = tokens[4:]
        truncated = False
        if rest and rest[0] == "...":
            truncated = True
            rest = rest[1:]
        children = []
        while rest and rest[0] == "(":
            child, rest = _parse_sexp(rest)
            children.append(child)
        if not rest or rest[0] != ")":
            raise ValueError("unterminated node in snapshot")
        return Node(op, idx, tuple(children), truncated), rest[1:]
    raise ValueError(f"unknown snapshot head {head!r}")
