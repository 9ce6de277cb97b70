"""Exact rationals extended by a formal first-order infinitesimal.

A ``DualRational`` is ``std + inf*eps`` where ``std`` and ``inf`` are exact
``Fraction`` values and ``eps`` is a formal positive infinitesimal: smaller
than every positive rational, but nonzero.  Ordering is lexicographic, so
``E + eps`` compares above ``E`` and below every rational greater than ``E``.
Products drop the ``eps**2`` term; division requires a nonzero standard part.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from numbers import Rational

_Coercible = (int, Fraction)


def _coerce(value) -> "DualRational | None":
    if isinstance(value, DualRational):
        return value
    if isinstance(value, Rational):
        return DualRational(Fraction(value), Fraction(0))
    return None


@total_ordering
@dataclass(frozen=True)
class DualRational:
    """``std + inf*eps`` with exact rational parts, truncated at first order."""

    std: Fraction
    inf: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "std", Fraction(self.std))
        object.__setattr__(self, "inf", Fraction(self.inf))

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return DualRational(self.std + other.std, self.inf + other.inf)

    __radd__ = __add__

    def __neg__(self):
        return DualRational(-self.std, -self.inf)

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return DualRational(self.std - other.std, self.inf - other.inf)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return DualRational(
            self.std * other.std,
            self.std * other.inf + self.inf * other.std,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if other.std == 0:
            raise ZeroDivisionError(
                "division by a pure infinitesimal is undefined at first order"
            )
        # (a + b eps) / (c + d eps) = a/c + (b c - a d)/c**2 eps + O(eps**2)
        return DualRational(
            self.std / other.std,
            (self.inf * other.std - self.std * other.inf) / (other.std**2),
        )

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    # -- ordering -----------------------------------------------------------

    def __eq__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self.std == other.std and self.inf == other.inf

    def __lt__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return (self.std, self.inf) < (other.std, other.inf)

    def __hash__(self):
        return hash((self.std, self.inf))

    def __bool__(self):
        return bool(self.std or self.inf)

    # -- conversions --------------------------------------------------------

    def evaluate(self, eps: float) -> float:
        """Substitute a concrete numeric value for the infinitesimal."""
        return float(self.std) + float(self.inf) * eps

    def __repr__(self):
        if not self.inf:
            return f"DualRational({self.std})"
        return f"DualRational({self.std} + {self.inf}*eps)"


#: The formal infinitesimal itself.
EPSILON = DualRational(Fraction(0), Fraction(1))


def as_dual(value) -> DualRational:
    """Coerce an int/Fraction/DualRational to DualRational."""
    coerced = _coerce(value)
    if coerced is None:
        raise TypeError(f"cannot interpret {value!r} as a DualRational")
    return coerced
