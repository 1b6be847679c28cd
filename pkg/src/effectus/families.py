"""Effect families: pure, nondet, prob, store and io.

A family fixes the operation signature for both calculi and the convention
for which children of an effect node can actually be reached when the
operations are given their intended meaning (binary choice ignores indices
past 1, a store read follows the child picked by the current state, and so
on).  Trees are built from uninterpreted syntax; the occurrable-index
convention is what the observation checkers use to ignore junk branches.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import ArityKind, EffectSig, Signature


class FamilyMismatch(Exception):
    """An observation or tree was used with the wrong effect family."""


@dataclass(frozen=True)
class Pure:
    name: str = "pure"

    def epcf_signature(self) -> Signature:
        return Signature(())


@dataclass(frozen=True)
class Nondet:
    name: str = "nondet"

    def epcf_signature(self) -> Signature:
        return Signature((EffectSig("or", ArityKind.FIN, 2),))


@dataclass(frozen=True)
class Prob:
    name: str = "prob"

    def epcf_signature(self) -> Signature:
        return Signature((EffectSig("p-or", ArityKind.FIN, 2),))


@dataclass(frozen=True)
class Store:
    """Global store over a finite location set; states range over
    0..value_range-1 when enumerated for batch checks."""

    locations: tuple[str, ...] = ("l0", "l1")
    value_range: int = 4
    name: str = "store"

    def __post_init__(self):
        if not self.locations:
            raise ValueError("store family needs at least one location")
        if self.value_range < 1:
            raise ValueError("store value_range must be >= 1")

    def epcf_signature(self) -> Signature:
        ops = []
        for loc in self.locations:
            ops.append(EffectSig(f"lookup_{loc}", ArityKind.INF))
            ops.append(EffectSig(f"update_{loc}", ArityKind.NAT_FIN, 1))
        return Signature(tuple(ops))

    def op_role(self, op: str) -> tuple[str, str]:
        """Split an operation name into ('lookup'|'update', location)."""
        for loc in self.locations:
            if op == f"lookup_{loc}":
                return "lookup", loc
            if op == f"update_{loc}":
                return "update", loc
        raise FamilyMismatch(f"operation {op!r} is not a store operation")


@dataclass(frozen=True)
class IO:
    name: str = "io"

    def epcf_signature(self) -> Signature:
        return Signature((
            EffectSig("read", ArityKind.INF),
            EffectSig("write", ArityKind.NAT_FIN, 1),
        ))


ObservationFamily = Pure | Nondet | Prob | Store | IO


def ecps_signature(family: ObservationFamily) -> Signature:
    return family.epcf_signature().cps_form()


def occurrable_indices(family: ObservationFamily, op: str, width: int) -> list[int] | None:
    """Children of an effect node that its intended semantics can reach.

    Returns explicit indices, or None meaning every child including any
    truncated beyond the width bound (so the node can never count as fully
    explored while truncated).
    """
    match family:
        case Pure():
            raise FamilyMismatch("pure programs have no effect nodes")
        case Nondet() | Prob():
            return [0, 1]
        case Store():
            role, _ = family.op_role(op)
            if role == "update":
                return [0]
            # indices past the width bound stay occurrable; callers treat an
            # out-of-range index as unexplored
            return list(range(family.value_range))
        case IO():
            if op == "write":
                return [0]
            if op == "read":
                return None
            raise FamilyMismatch(f"operation {op!r} is not an io operation")
    raise FamilyMismatch(f"unknown family {family!r}")


def family_by_name(name: str, locations: tuple[str, ...] = ("l0", "l1"),
                   value_range: int = 4) -> ObservationFamily:
    match name:
        case "pure":
            return Pure()
        case "nondet":
            return Nondet()
        case "prob":
            return Prob()
        case "store":
            return Store(locations, value_range)
        case "io":
            return IO()
    raise ValueError(f"unknown effect family {name!r}")
