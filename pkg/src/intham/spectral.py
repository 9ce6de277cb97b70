"""Spectral view of the one-step dynamics on a finite energy shell.

Restricted to the states of one conserved energy, a reversible update rule is
a permutation, hence a unitary operator whose eigenvalues are roots of unity:
``exp(-i*omega)`` with ``omega = 2*pi*m/k`` on every k-cycle.  The reduced
phase in (-pi, pi) plays the role of a fractional energy; together with the
integer shell energy it combines into a total energy

    total = 2*pi*energy + phase + pi

which is nonnegative whenever the integer energy is.  The module also checks
two analytic identities for the phase: the alternating sine series that
recovers ``omega`` from powers of the permutation, and the closed form of the
exponentially damped version of that series.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Optional, Sequence

import numpy as np

from .errors import ShellNotClosed, ShellTooLarge

TWO_PI = 2.0 * math.pi

#: Largest representable phase below the branch point.  Even cycle lengths
#: produce omega exactly pi, which the open phase interval excludes; those
#: entries are reported at this value and flagged as boundary cases.
BOUNDARY_PHASE = math.nextafter(math.pi, 0.0)


@dataclass(frozen=True)
class TruncationConfig:
    """Damping radius and term count for the truncated operator series.

    ``terms`` must reach far enough that the discarded exp(-n/radius) tail
    is negligible at reporting precision; :meth:`for_radius` picks the count
    accordingly.
    """

    radius: float
    terms: int

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("damping radius must be at least 1")
        if self.terms < 1:
            raise ValueError("need at least one term")

    @classmethod
    def for_radius(cls, radius, tail: float = 1e-18) -> "TruncationConfig":
        radius = float(radius)
        terms = max(1, math.ceil(-radius * math.log(tail)))
        return cls(radius, terms)


@dataclass(frozen=True)
class ShellPermutation:
    """One-step dynamics restricted to a fixed-energy set of states.

    ``mapping[j]`` is the index of the successor of ``basis[j]``; ``cycles``
    is the disjoint cycle decomposition, each cycle an orbit of the dynamics.
    """

    basis: tuple
    mapping: tuple[int, ...]
    energy: int
    cycles: tuple[tuple[int, ...], ...] = field(init=False)

    def __post_init__(self):
        n = len(self.basis)
        if sorted(self.mapping) != list(range(n)):
            raise ValueError("mapping is not a permutation")
        seen = [False] * n
        cycles = []
        for j in range(n):
            if seen[j]:
                continue
            cycle = []
            cur = j
            while not seen[cur]:
                seen[cur] = True
                cycle.append(cur)
                cur = self.mapping[cur]
            cycles.append(tuple(cycle))
        object.__setattr__(self, "cycles", tuple(cycles))

    @property
    def size(self) -> int:
        return len(self.basis)

    @classmethod
    def from_step(
        cls,
        step: Callable,
        shell: Sequence,
        energy: int,
        key: Optional[Callable[[object], Hashable]] = None,
    ) -> "ShellPermutation":
        """Tabulate one application of ``step`` over ``shell``.

        ``key`` extracts the identity of a state (default: the state itself);
        use it to ignore bookkeeping fields such as a time counter.  Raises
        :class:`ShellNotClosed` if any image falls outside the shell, which
        signals that the shell list is incomplete or a window is truncating
        the dynamics.
        """
        if key is None:
            key = lambda s: s
        basis = tuple(shell)
        index = {key(s): j for j, s in enumerate(basis)}
        if len(index) != len(basis):
            raise ValueError("shell contains duplicate states")
        mapping = []
        for s in basis:
            image = step(s)
            j = index.get(key(image))
            if j is None:
                raise ShellNotClosed(
                    f"step leaves the shell of size {len(basis)}",
                    state=s,
                    image=image,
                )
            mapping.append(j)
        return cls(basis, tuple(mapping), energy)


@dataclass(frozen=True)
class SpectrumEntry:
    """One eigenvalue exp(-i*phase) of the shell permutation."""

    cycle: int
    length: int
    index: int
    omega: float
    phase: float
    boundary: bool
    energy: int

    @property
    def total(self) -> float:
        return TWO_PI * self.energy + self.phase + math.pi


def _reduced_omega(length: int, index: int) -> float:
    """Phase 2*pi*index/length folded into (-pi, pi]."""
    if 2 * index == length:
        return math.pi
    if 2 * index > length:
        return TWO_PI * (index - length) / length
    return TWO_PI * index / length


def eigenphases(perm: ShellPermutation) -> list[SpectrumEntry]:
    """All eigenvalues, cycle by cycle, as reduced phases.

    A k-cycle contributes the k-th roots of unity.  omega = pi (even k,
    index k/2) sits on the excluded boundary of the phase interval and is
    reported at :data:`BOUNDARY_PHASE` with the flag set.
    """
    entries = []
    for c, cycle in enumerate(perm.cycles):
        k = len(cycle)
        for m in range(k):
            omega = _reduced_omega(k, m)
            boundary = omega == math.pi
            phase = BOUNDARY_PHASE if boundary else omega
            entries.append(
                SpectrumEntry(c, k, m, omega, phase, boundary, perm.energy)
            )
    return entries


def total_spectrum(entries: Sequence[SpectrumEntry]) -> list[float]:
    """Total energies of the given entries; nonnegative for energy >= 0."""
    return [entry.total for entry in entries]


def series_omega(
    omega: float, terms: int, radius: Optional[float] = None
) -> float:
    """Partial sum 2*sum((-1)^(n-1) sin(n*omega)/n, n=1..terms).

    Undamped, the partial sums converge to ``omega`` on (-pi, pi); with
    ``radius`` set, each term is damped by exp(-n/radius).
    """
    total = 0.0
    sign = 1.0
    for n in range(1, terms + 1):
        term = sign * math.sin(n * omega) / n
        if radius is not None:
            term *= math.exp(-n / radius)
        total += term
        sign = -sign
    return 2.0 * total


def damped_closed_form(omega: float, radius: float) -> float:
    """Exact value of the damped series: 2*atan(sin w / (e^(1/R) + cos w))."""
    return 2.0 * math.atan2(
        math.sin(omega), math.exp(1.0 / float(radius)) + math.cos(omega)
    )


@dataclass(frozen=True)
class OperatorCheckResult:
    """Residuals of the truncated operator series on each eigenvector."""

    entries: tuple[SpectrumEntry, ...]
    residuals: tuple[float, ...]

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)


def hfract_operator_check(
    perm: ShellPermutation,
    cfg: TruncationConfig,
    size_cap: int = 64,
) -> OperatorCheckResult:
    """Apply the damped operator series to every cycle eigenvector.

    The operator is sum over n of (-1)^(n-1) e^(-n/R) (U^-n - U^n)/(n*i),
    the antisymmetric combination whose eigenvalue on the omega-mode is the
    damped sine series, i.e. +omega in the undamped limit.  Each residual is
    the max-norm difference between the operator applied to the eigenvector
    and the damped closed form times that eigenvector.
    """
    n = perm.size
    if n > size_cap:
        raise ShellTooLarge(
            f"shell of size {n} exceeds the dense-check cap",
            size=n,
            limit=size_cap,
        )
    fwd = np.array(perm.mapping, dtype=np.intp)

    entries = eigenphases(perm)
    vectors = np.zeros((len(entries), n), dtype=complex)
    for row, entry in enumerate(entries):
        cycle = perm.cycles[entry.cycle]
        k = entry.length
        for j, pos in enumerate(cycle):
            vectors[row, pos] = cmath.exp(2j * math.pi * entry.index * j / k)

    forward = vectors.copy()   # U^n applied to each vector
    backward = vectors.copy()  # U^-n applied to each vector
    acc = np.zeros_like(vectors)
    sign = 1.0
    for term in range(1, cfg.terms + 1):
        next_forward = np.empty_like(forward)
        next_forward[:, fwd] = forward
        forward = next_forward
        backward = backward[:, fwd]
        weight = sign * math.exp(-term / cfg.radius) / term
        acc += weight * (backward - forward) / 1j
        sign = -sign

    residuals = []
    for row, entry in enumerate(entries):
        reference = damped_closed_form(entry.omega, cfg.radius)
        residual = np.max(np.abs(acc[row] - reference * vectors[row]))
        residuals.append(float(residual))
    return OperatorCheckResult(tuple(entries), tuple(residuals))


@dataclass(frozen=True)
class CutoffRow:
    """Damping-induced phase shift near the branch point, vs its asymptote."""

    alpha: float
    radius: float
    shift: float
    asymptote: float

    @property
    def ratio(self) -> float:
        return self.shift / self.asymptote


def cutoff_correction_check(
    alpha: float, radii: Sequence[float]
) -> list[CutoffRow]:
    """Tabulate the damping shift at omega = alpha - pi against 2/(R*alpha).

    Near the branch point the damped closed form exceeds the true phase by
    approximately 2/(radius*alpha); the tabulated ratios approach 1 in the
    joint limit of small alpha and large radius (for fixed alpha the limit
    is alpha/(2*tan(alpha/2)), within a few percent of 1 for small alpha).
    Meaningful only in the regime radius*alpha**2 >> 1.
    """
    if not 0.0 < alpha < math.pi:
        raise ValueError("alpha must lie in (0, pi)")
    omega = alpha - math.pi
    rows = []
    for radius in radii:
        radius = float(radius)
        shift = damped_closed_form(omega, radius) - omega
        rows.append(CutoffRow(alpha, radius, shift, 2.0 / (radius * alpha)))
    return rows


def spectrum_rows(entries: Sequence[SpectrumEntry]) -> list[tuple]:
    """Flat rows (cycle, length, index, omega, phase, energy, total,
    boundary) for CSV export."""
    return [
        (
            e.cycle,
            e.length,
            e.index,
            e.omega,
            e.phase,
            e.energy,
            e.total,
            e.boundary,
        )
        for e in entries
    ]
