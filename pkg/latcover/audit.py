"""Named inequality instances collected by the lemma and theorem checks."""
from __future__ import annotations

import logging
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import sympy

logger = logging.getLogger(__name__)

RELATIONS: dict[str, Callable[[Any, Any], bool]] = {
    "<=": operator.le,
    ">=": operator.ge,
    "==": operator.eq,
    "<": operator.lt,
    ">": operator.gt,
}

# check: must hold for genuine inputs; conjecture: open question, recorded only;
# info: a value worth reporting with no inequality behind it
KINDS = ("check", "conjecture", "info")


def _compare(lhs, relation: str, rhs) -> bool:
    if isinstance(lhs, sympy.Basic) or isinstance(rhs, sympy.Basic):
        diff = sympy.sympify(_to_sympy(lhs)) - sympy.sympify(_to_sympy(rhs))
        if relation == "==":
            return sympy.simplify(diff) == 0
        return bool(RELATIONS[relation](diff, sympy.Integer(0)))
    return bool(RELATIONS[relation](lhs, rhs))


def _to_sympy(value):
    if isinstance(value, Fraction):
        return sympy.Rational(value.numerator, value.denominator)
    return value


@dataclass
class AuditRow:
    check: str
    lhs: Any
    relation: str
    rhs: Any
    context: str = ""
    kind: str = "check"
    satisfied: bool = field(init=False)

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown row kind {self.kind!r}")
        self.satisfied = self.recheck()

    def recheck(self) -> bool:
        return _compare(self.lhs, self.relation, self.rhs)


@dataclass
class AuditReport:
    title: str
    rows: list[AuditRow] = field(default_factory=list)

    def add(self, check: str, lhs, relation: str, rhs, context: str = "", kind: str = "check") -> AuditRow:
        row = AuditRow(check, lhs, relation, rhs, context, kind)
        self.rows.append(row)
        if not row.satisfied:
            if kind == "conjecture":
                logger.error("CONJECTURE VIOLATION %s: %s %s %s (%s)", check, lhs, relation, rhs, context)
            elif kind == "check":
                logger.warning("audit row failed %s: %s %s %s (%s)", check, lhs, relation, rhs, context)
        return row

    def info(self, check: str, value, context: str = "") -> AuditRow:
        return self.add(check, value, "==", value, context, kind="info")

    @property
    def ok(self) -> bool:
        return all(r.satisfied for r in self.rows if r.kind == "check")

    def failures(self) -> list[AuditRow]:
        return [r for r in self.rows if r.kind == "check" and not r.satisfied]

    def conjecture_violations(self) -> list[AuditRow]:
        return [r for r in self.rows if r.kind == "conjecture" and not r.satisfied]

    def find(self, check: str) -> list[AuditRow]:
        return [r for r in self.rows if r.check == check]

    def first(self, check: str) -> AuditRow:
        rows = self.find(check)
        if not rows:
            raise KeyError(check)
        return rows[0]
