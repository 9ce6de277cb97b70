"""Integer-valued separable Hamiltonians on a phase-space lattice.

A 1-pair Hamiltonian is ``H(Q, P) = T(P) + V(Q) + A(Q)*B(P)`` with all four
factors integer-valued on finite windows.  Between lattice points each factor
is linearly interpolated, which makes ``H`` bilinear on every unit cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .dual import DualRational
from .errors import ConfigError, WindowExceeded


@dataclass(frozen=True)
class IntegerFunction1D:
    """Integer values tabulated on the window ``[lo, lo + len(values) - 1]``."""

    lo: int
    values: tuple[int, ...]

    def __post_init__(self):
        if not self.values:
            raise ValueError("empty window")
        if not all(isinstance(v, int) for v in self.values):
            raise ValueError("values must be integers")
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))

    @property
    def hi(self) -> int:
        return self.lo + len(self.values) - 1

    @property
    def window(self) -> tuple[int, int]:
        return (self.lo, self.hi)

    def __call__(self, x: int) -> int:
        if not (self.lo <= x <= self.hi):
            raise WindowExceeded(
                f"argument {x} outside window [{self.lo}, {self.hi}]", argument=x
            )
        return self.values[x - self.lo]

    def interpolate(self, base: int, frac):
        """Value at ``base + frac`` with ``0 <= frac <= 1`` (linear segment)."""
        v0 = self(base)
        if not frac:
            return frac + v0  # preserves Fraction/DualRational type
        return (1 - frac) * v0 + frac * self(base + 1)

    def slope(self, base: int) -> int:
        """Increment across the segment ``[base, base + 1]``."""
        return self(base + 1) - self(base)

    @classmethod
    def from_callable(cls, fn: Callable[[int], int], lo: int, hi: int) -> "IntegerFunction1D":
        return cls(lo, tuple(int(fn(x)) for x in range(lo, hi + 1)))

    @classmethod
    def zero(cls, lo: int, hi: int) -> "IntegerFunction1D":
        return cls(lo, (0,) * (hi - lo + 1))


def _floor_nth_root(n: int, v: int) -> int:
    """Largest integer k with k**v <= n (n >= 0)."""
    if n < 0:
        raise ValueError("negative radicand")
    if n == 0:
        return 0
    if v == 1:
        return n
    if v == 2:
        return math.isqrt(n)
    k = int(round(n ** (1.0 / v)))
    while k > 0 and k**v > n:
        k -= 1
    while (k + 1) ** v <= n:
        k += 1
    return k


def floor_scaled_power(scale: Fraction, magnitude: int, exponent: Fraction) -> int:
    """Exact ``floor(scale * magnitude**exponent)`` for nonneg arguments."""
    if magnitude < 0:
        raise ValueError("magnitude must be nonnegative")
    u, v = exponent.numerator, exponent.denominator
    if magnitude == 0:
        return 0
    # k <= s * m**(u/v)  <=>  k**v * s_d**v <= s_n**v * m**u
    num = scale.numerator**v * magnitude**u
    den = scale.denominator**v
    return _floor_nth_root(num // den, v)


@dataclass(frozen=True)
class PowerLawFamily:
    """Tabulated power laws: ``floor(scale*|X|**exponent)`` for potentials,
    ``floor(|X|**exponent / (2*mass))`` for kinetic terms."""

    kind: str  # "kinetic" | "potential"
    exponent: Fraction
    scale: Fraction = Fraction(1)  # potential prefactor
    mass: Optional[Fraction] = None  # kinetic only

    def __post_init__(self):
        if self.kind not in ("kinetic", "potential"):
            raise ValueError(f"unknown kind {self.kind!r}")
        object.__setattr__(self, "exponent", Fraction(self.exponent))
        object.__setattr__(self, "scale", Fraction(self.scale))
        if self.exponent <= 0:
            raise ValueError("exponent must be positive")
        if self.kind == "kinetic":
            mass = Fraction(self.mass if self.mass is not None else 1)
            if mass <= 0:
                raise ValueError("mass must be positive")
            object.__setattr__(self, "mass", mass)
        else:
            if self.scale <= 0:
                raise ValueError("scale must be positive")

    @property
    def prefactor(self) -> Fraction:
        if self.kind == "kinetic":
            return 1 / (2 * self.mass)
        return self.scale

    def value(self, x: int) -> int:
        return floor_scaled_power(self.prefactor, abs(x), self.exponent)

    def materialize(self, lo: int, hi: int) -> IntegerFunction1D:
        return IntegerFunction1D.from_callable(self.value, lo, hi)


@dataclass(frozen=True)
class InterpolatedPoint:
    """Phase-space point ``(Q + alpha, P + beta)`` with fractional offsets
    in ``[0, 1]`` (exact rationals, or duals carrying an infinitesimal)."""

    Q: int
    P: int
    alpha: object = Fraction(0)
    beta: object = Fraction(0)

    def __post_init__(self):
        for name in ("alpha", "beta"):
            val = getattr(self, name)
            if isinstance(val, (int, Fraction)):
                val = Fraction(val)
                object.__setattr__(self, name, val)
            elif not isinstance(val, DualRational):
                raise TypeError(f"{name} must be rational or DualRational")
            if not (0 <= val and val <= 1):
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class SeparableHamiltonian1D:
    """``H = kinetic(P) + potential(Q) + coupling_pos(Q) * coupling_mom(P)``.

    ``coupling_pos``/``coupling_mom`` may be None, which disables the product
    term.  Instances are immutable and safe to share across threads.
    """

    kinetic: IntegerFunction1D
    potential: IntegerFunction1D
    coupling_pos: Optional[IntegerFunction1D] = None
    coupling_mom: Optional[IntegerFunction1D] = None

    def __post_init__(self):
        if self.coupling_pos is not None and self.coupling_pos.window != self.potential.window:
            raise ValueError("coupling_pos window must match potential window")
        if self.coupling_mom is not None and self.coupling_mom.window != self.kinetic.window:
            raise ValueError("coupling_mom window must match kinetic window")
        if (self.coupling_pos is None) != (self.coupling_mom is None):
            # a missing factor zeroes the product; normalize to both-None
            object.__setattr__(self, "coupling_pos", None)
            object.__setattr__(self, "coupling_mom", None)

    @property
    def q_window(self) -> tuple[int, int]:
        return self.potential.window

    @property
    def p_window(self) -> tuple[int, int]:
        return self.kinetic.window

    @property
    def has_coupling(self) -> bool:
        return self.coupling_pos is not None

    def value(self, q: int, p: int) -> int:
        """Integer energy at the lattice site ``(q, p)``."""
        h = self.kinetic(p) + self.potential(q)
        if self.coupling_pos is not None:
            h += self.coupling_pos(q) * self.coupling_mom(p)
        return h

    def value_interpolated(self, point: InterpolatedPoint):
        """Energy at an off-lattice point; each factor interpolated linearly."""
        t = self.kinetic.interpolate(point.P, point.beta)
        v = self.potential.interpolate(point.Q, point.alpha)
        h = t + v
        if self.coupling_pos is not None:
            a = self.coupling_pos.interpolate(point.Q, point.alpha)
            b = self.coupling_mom.interpolate(point.P, point.beta)
            h = h + a * b
        return h

    def cell_corners(self, cq: int, cp: int) -> tuple[int, int, int, int]:
        """Corner energies ``(c00, c10, c01, c11)`` of the unit cell with
        lower-left lattice site ``(cq, cp)``."""
        return (
            self.value(cq, cp),
            self.value(cq + 1, cp),
            self.value(cq, cp + 1),
            self.value(cq + 1, cp + 1),
        )


@dataclass
class SmoothnessReport:
    """Outcome of the advisory slow-variation check."""

    passed: bool
    violations: list[tuple[int, int]] = field(default_factory=list)


def validate_smoothness(fn: IntegerFunction1D) -> SmoothnessReport:
    """Advisory check: ``|F(x1) - F(x2)| < |x1 - x2| * (|x1| + |x2|)`` for all
    distinct window pairs.  Violations are reported, never enforced."""
    violations = []
    lo, hi = fn.window
    xs = range(lo, hi + 1)
    for i, x1 in enumerate(xs):
        for x2 in list(xs)[i + 1 :]:
            bound = abs(x1 - x2) * (abs(x1) + abs(x2))
            if abs(fn(x1) - fn(x2)) >= bound:
                violations.append((x1, x2))
    return SmoothnessReport(passed=not violations, violations=violations)


# -- JSON model descriptions -------------------------------------------------


def fraction_from_json(value) -> Fraction:
    """Exact rational from a JSON value: int, "num/den" string, or float
    (floats are snapped to a nearby small-denominator rational)."""
    if isinstance(value, bool):
        raise ConfigError(f"expected a rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad rational literal {value!r}") from exc
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**9)
    raise ConfigError(f"expected a rational, got {value!r}")


def function_from_json(entry: dict, role: str) -> Optional[IntegerFunction1D]:
    """Build one factor from its JSON description.

    Accepted forms::

        {"table": {"lo": -3, "values": [3, 1, 0, 0, 1, 3, 7]}}
        {"family": "power", "exponent": "3/2", "scale": "1/2", "window": [-8, 8]}
        {"family": "power", "exponent": 1, "mass": "1/2", "window": [-8, 8]}
        null

    ``role`` is "kinetic" or "potential" and selects the power-law form when
    neither ``scale`` nor ``mass`` makes it explicit.
    """
    if entry is None:
        return None
    if not isinstance(entry, dict):
        raise ConfigError(f"model entry must be an object or null, got {entry!r}")
    if "table" in entry:
        table = entry["table"]
        try:
            return IntegerFunction1D(int(table["lo"]), tuple(int(v) for v in table["values"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad table entry: {entry!r}") from exc
    if entry.get("family") == "power":
        window = entry.get("window")
        if (
            not isinstance(window, (list, tuple))
            or len(window) != 2
            or not all(isinstance(w, int) for w in window)
        ):
            raise ConfigError("power-family entries need an integer 'window': [lo, hi]")
        kind = "kinetic" if ("mass" in entry or role == "kinetic") and "scale" not in entry else "potential"
        try:
            family = PowerLawFamily(
                kind=kind,
                exponent=fraction_from_json(entry.get("exponent", 1)),
                scale=fraction_from_json(entry.get("scale", 1)),
                mass=fraction_from_json(entry["mass"]) if "mass" in entry else None,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return family.materialize(window[0], window[1])
    raise ConfigError(f"unrecognized model entry: {entry!r}")


def hamiltonian_from_json(model: dict) -> SeparableHamiltonian1D:
    """Build a 1-pair Hamiltonian from a model object.

    Required keys: ``kinetic`` and ``potential``.  Optional ``coupling_pos``
    and ``coupling_mom`` enable the product term.
    """
    if not isinstance(model, dict):
        raise ConfigError("model must be an object")
    known = {"kinetic", "potential", "coupling_pos", "coupling_mom"}
    unknown = set(model) - known
    if unknown:
        raise ConfigError(f"unknown model keys: {sorted(unknown)}")
    kinetic = function_from_json(model.get("kinetic"), "kinetic")
    potential = function_from_json(model.get("potential"), "potential")
    if kinetic is None or potential is None:
        raise ConfigError("model requires both 'kinetic' and 'potential'")
    coupling_pos = function_from_json(model.get("coupling_pos"), "potential")
    coupling_mom = function_from_json(model.get("coupling_mom"), "kinetic")
    try:
        return SeparableHamiltonian1D(kinetic, potential, coupling_pos, coupling_mom)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
