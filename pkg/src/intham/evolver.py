"""Sequential single-pair updates for coupled integer Hamiltonians.

A state with n pairs is advanced by updating pair 1, then pair 2 with pair 1
already moved, and so on; the full Hamiltonian is exactly conserved because
each sub-update conserves the restricted Hamiltonian of its own pair with
every other variable frozen.  Sub-updates generally do not commute, so the
order is part of the model; the inverse applies the reversed order with
backward contour steps.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Protocol, Sequence

from .contours import next_site, prev_site
from .errors import IntHamError
from .hamiltonians import IntegerFunction1D, SeparableHamiltonian1D


@dataclass(frozen=True)
class PhaseState:
    """Immutable snapshot of n position/momentum pairs at integer time."""

    positions: tuple[int, ...]
    momenta: tuple[int, ...]
    time: int = 0

    def __post_init__(self):
        if len(self.positions) != len(self.momenta):
            raise ValueError("positions and momenta must have equal length")
        object.__setattr__(self, "positions", tuple(int(q) for q in self.positions))
        object.__setattr__(self, "momenta", tuple(int(p) for p in self.momenta))

    @property
    def pairs(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class PairIndexOrder:
    """The cyclic update order; a permutation of ``range(n)``."""

    order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(i) for i in self.order))
        if sorted(self.order) != list(range(len(self.order))):
            raise ValueError(f"{self.order} is not a permutation of 0..n-1")

    @classmethod
    def identity(cls, n: int) -> "PairIndexOrder":
        return cls(tuple(range(n)))


class RestrictedHamiltonianProvider(Protocol):
    """Anything that can freeze all pairs but one into a 1-pair Hamiltonian."""

    def restricted(self, state: PhaseState, index: int) -> SeparableHamiltonian1D: ...

    def total_energy(self, state: PhaseState) -> int: ...


VectorFn = Callable[[tuple[int, ...]], int]


@dataclass(frozen=True)
class CoupledSeparableHamiltonian:
    """``H = kinetic(P_vec) + potential(Q_vec) + coupling_pos(Q_vec)*coupling_mom(P_vec)``
    with integer-valued callables of the full coordinate vectors.

    Freezing every pair but ``i`` keeps the same separable shape in the
    remaining pair, so restriction is table construction over its window.
    """

    pairs: int
    kinetic: VectorFn
    potential: VectorFn
    q_windows: tuple[tuple[int, int], ...]
    p_windows: tuple[tuple[int, int], ...]
    coupling_pos: Optional[VectorFn] = None
    coupling_mom: Optional[VectorFn] = None

    def __post_init__(self):
        if len(self.q_windows) != self.pairs or len(self.p_windows) != self.pairs:
            raise ValueError("need one window pair per degree of freedom")

    def total_energy(self, state: PhaseState) -> int:
        h = self.kinetic(state.momenta) + self.potential(state.positions)
        if self.coupling_pos is not None:
            h += self.coupling_pos(state.positions) * self.coupling_mom(state.momenta)
        return h

    def restricted(self, state: PhaseState, index: int) -> SeparableHamiltonian1D:
        qlo, qhi = self.q_windows[index]
        plo, phi = self.p_windows[index]

        def vary(vec: tuple[int, ...], value: int) -> tuple[int, ...]:
            out = list(vec)
            out[index] = value
            return tuple(out)

        potential = IntegerFunction1D(
            qlo,
            tuple(self.potential(vary(state.positions, q)) for q in range(qlo, qhi + 1)),
        )
        kinetic = IntegerFunction1D(
            plo,
            tuple(self.kinetic(vary(state.momenta, p)) for p in range(plo, phi + 1)),
        )
        coupling_pos = coupling_mom = None
        if self.coupling_pos is not None:
            coupling_pos = IntegerFunction1D(
                qlo,
                tuple(
                    self.coupling_pos(vary(state.positions, q))
                    for q in range(qlo, qhi + 1)
                ),
            )
            coupling_mom = IntegerFunction1D(
                plo,
                tuple(
                    self.coupling_mom(vary(state.momenta, p))
                    for p in range(plo, phi + 1)
                ),
            )
        return SeparableHamiltonian1D(kinetic, potential, coupling_pos, coupling_mom)


@dataclass(frozen=True)
class IndependentPairs:
    """Pairs that do not interact: the total Hamiltonian is a plain sum.

    Each pair may carry its own position-momentum product term.  Restriction
    to one pair is the pair's own Hamiltonian (the other pairs contribute a
    constant, which contour stepping never sees), so no tables are rebuilt.
    """

    hams: tuple[SeparableHamiltonian1D, ...]

    def __post_init__(self):
        object.__setattr__(self, "hams", tuple(self.hams))
        if not self.hams:
            raise ValueError("need at least one pair")

    @property
    def pairs(self) -> int:
        return len(self.hams)

    def total_energy(self, state: PhaseState) -> int:
        return sum(
            h.value(q, p)
            for h, q, p in zip(self.hams, state.positions, state.momenta)
        )

    def restricted(self, state: PhaseState, index: int) -> SeparableHamiltonian1D:
        return self.hams[index]


def decoupled(hams: Sequence[SeparableHamiltonian1D]) -> IndependentPairs:
    """Wrap independent single-pair Hamiltonians for sequential evolution."""
    return IndependentPairs(tuple(hams))


def _resolve_order(state: PhaseState, order) -> tuple[int, ...]:
    if order is None:
        return tuple(range(state.pairs))
    if isinstance(order, PairIndexOrder):
        order = order.order
    order = tuple(order)
    if sorted(order) != list(range(state.pairs)):
        raise ValueError(f"{order} is not a permutation of the pair indices")
    return order


def _tag(exc: IntHamError, index: int) -> IntHamError:
    exc.pair_index = index
    return exc


def step(
    state: PhaseState,
    system: RestrictedHamiltonianProvider,
    order=None,
) -> PhaseState:
    """Advance one time step: sub-update each pair in ascending order."""
    order = _resolve_order(state, order)
    positions = list(state.positions)
    momenta = list(state.momenta)
    for i in order:
        current = PhaseState(tuple(positions), tuple(momenta), state.time)
        ham = system.restricted(current, i)
        try:
            positions[i], momenta[i] = next_site(ham, positions[i], momenta[i])
        except IntHamError as exc:
            raise _tag(exc, i)
    return PhaseState(tuple(positions), tuple(momenta), state.time + 1)


def step_inverse(
    state: PhaseState,
    system: RestrictedHamiltonianProvider,
    order=None,
) -> PhaseState:
    """Undo one time step: backward sub-updates in descending order."""
    order = _resolve_order(state, order)
    positions = list(state.positions)
    momenta = list(state.momenta)
    for i in reversed(order):
        current = PhaseState(tuple(positions), tuple(momenta), state.time)
        ham = system.restricted(current, i)
        try:
            positions[i], momenta[i] = prev_site(ham, positions[i], momenta[i])
        except IntHamError as exc:
            raise _tag(exc, i)
    return PhaseState(tuple(positions), tuple(momenta), state.time - 1)


def total_energy(state: PhaseState, system: RestrictedHamiltonianProvider) -> int:
    return system.total_energy(state)
