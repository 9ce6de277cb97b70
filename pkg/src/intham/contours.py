"""Exact stepping along equal-energy contours of a lattice Hamiltonian.

The level traced is ``E + eps`` with ``eps`` a formal positive infinitesimal,
so no cell corner ever sits on the level: a corner with energy ``c`` is above
the level iff ``c > E``.  Within each unit cell the interpolated Hamiltonian
is bilinear, so the level curve is a union of hyperbola arcs that enter and
leave cells through edge crossings.  Walking those crossings with the
region ``H > E + eps`` kept on the left reproduces the continuum flow
direction; lattice sites with energy exactly ``E`` are brushed by the curve
at infinitesimal distance and are read off as the visit sequence.

All decisions in the walk are made with integer or exact rational
arithmetic; ``DualRational`` crossing parameters are exposed for inspection.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Optional

from .dual import EPSILON, DualRational
from .errors import UnboundedContour, WindowExceeded
from .hamiltonians import SeparableHamiltonian1D


class SiteClassification(Enum):
    REGULAR = "regular"
    SADDLE = "saddle"
    EXTREMUM = "extremum"
    OFF_CONTOUR = "off-contour"


# A directed crossing is (kind, Q, P, forward):
#   kind "h": edge (Q,P)-(Q+1,P); forward=True crosses it upward (+P).
#   kind "v": edge (Q,P)-(Q,P+1); forward=True crosses it rightward (+Q).
_EDGE_H = "h"
_EDGE_V = "v"


@dataclass(frozen=True)
class Crossing:
    """One edge crossing of the ``E + eps`` level, in traversal order."""

    kind: str
    Q: int
    P: int
    forward: bool
    param: DualRational  # position along the edge, from (Q, P)
    touched: Optional[tuple[int, int]]  # lattice site brushed here, if any

    def position(self, eps: float = 1e-6) -> tuple[float, float]:
        """Numeric coordinates of the crossing for plotting/diagnostics."""
        t = self.param.evaluate(eps)
        if self.kind == _EDGE_H:
            return (self.Q + t, float(self.P))
        return (float(self.Q), self.P + t)


@dataclass(frozen=True)
class ContourTrace:
    """One connected component of a shell: the sites it touches, in order."""

    energy: int
    sites: tuple[tuple[int, int], ...]
    kinds: tuple[SiteClassification, ...]
    closed: bool
    crossings: tuple[Crossing, ...] = ()


def _value(ham: SeparableHamiltonian1D, q: int, p: int) -> int:
    return ham.value(q, p)


def _fast_value(ham: SeparableHamiltonian1D):
    """Bound-checked site evaluator with direct table indexing."""
    kin, pot = ham.kinetic, ham.potential
    kvals, klo, khi = kin.values, kin.lo, kin.hi
    vvals, vlo, vhi = pot.values, pot.lo, pot.hi
    if ham.coupling_pos is None:

        def val(q: int, p: int) -> int:
            if q < vlo or q > vhi or p < klo or p > khi:
                raise WindowExceeded(f"site ({q}, {p}) outside windows")
            return kvals[p - klo] + vvals[q - vlo]

    else:
        avals = ham.coupling_pos.values
        bvals = ham.coupling_mom.values

        def val(q: int, p: int) -> int:
            if q < vlo or q > vhi or p < klo or p > khi:
                raise WindowExceeded(f"site ({q}, {p}) outside windows")
            return (
                kvals[p - klo]
                + vvals[q - vlo]
                + avals[q - vlo] * bvals[p - klo]
            )

    return val


def _neighbor_flags(ham, Q, P, E):
    """(east, north, west, south) neighbor-above-level flags."""
    return (
        ham.value(Q + 1, P) > E,
        ham.value(Q, P + 1) > E,
        ham.value(Q - 1, P) > E,
        ham.value(Q, P - 1) > E,
    )


def _local_kind(flags) -> SiteClassification:
    """Classification of an on-shell site from its 4-neighbor flags alone.

    Valid whenever at least one flag is set; the all-clear case needs the
    diagonal refinement done in :func:`classify_site`.
    """
    m = sum(flags)
    if m == 4:
        return SiteClassification.EXTREMUM  # infinitesimal closed loop
    if m == 0:
        return SiteClassification.EXTREMUM  # refined by caller
    if m == 2 and (flags[0] == flags[2]):  # east/west or north/south pair
        return SiteClassification.SADDLE  # two branches passing on both sides
    return SiteClassification.REGULAR  # a single branch brushing the site


def classify_site(ham: SeparableHamiltonian1D, Q: int, P: int, E: int) -> SiteClassification:
    """Classify a lattice site against the ``E + eps`` level.

    Requires the full 3x3 neighborhood to lie inside the windows.
    """
    for dq in (-1, 0, 1):
        for dp in (-1, 0, 1):
            _value(ham, Q + dq, P + dp)  # raises WindowExceeded if outside
    if ham.value(Q, P) != E:
        return SiteClassification.OFF_CONTOUR
    flags = _neighbor_flags(ham, Q, P, E)
    kind = _local_kind(flags)
    if kind is SiteClassification.EXTREMUM and not any(flags):
        # Untouched site: either isolated (a top of the landscape) or a
        # degenerate saddle whose branches pass at second order, revealed by
        # alternating diagonal cells.
        ne = ham.value(Q + 1, P + 1) > E
        nw = ham.value(Q - 1, P + 1) > E
        sw = ham.value(Q - 1, P - 1) > E
        se = ham.value(Q + 1, P - 1) > E
        if ne == sw and nw == se and ne != nw:
            return SiteClassification.SADDLE
    return kind


def _touch_site(ham, kind, Q, P, E) -> Optional[tuple[int, int]]:
    """Site brushed by the crossing on this edge, if its below-level endpoint
    sits exactly on the shell."""
    if kind == _EDGE_H:
        a, b = (Q, P), (Q + 1, P)
    else:
        a, b = (Q, P), (Q, P + 1)
    va = ham.value(*a)
    if va == E:
        return a
    vb = ham.value(*b)
    if vb == E:
        return b
    return None


def _crossing_param(ham, kind, Q, P, E) -> DualRational:
    """Parameter of the level crossing along the edge, from its (Q, P) end."""
    if kind == _EDGE_H:
        c0, c1 = ham.value(Q, P), ham.value(Q + 1, P)
    else:
        c0, c1 = ham.value(Q, P), ham.value(Q, P + 1)
    return (DualRational(Fraction(E - c0)) + EPSILON) / Fraction(c1 - c0)


def _oriented(ham, kind, Q, P, E) -> bool:
    """Forward flag that keeps the above-level region on the left."""
    if kind == _EDGE_H:
        return ham.value(Q, P) > E  # upward iff left endpoint above level
    return ham.value(Q, P + 1) > E  # rightward iff upper endpoint above level


def _advance(val, E: int, cross: tuple) -> tuple:
    """Follow the level curve through the next cell; return the exit crossing."""
    kind, Q, P, forward = cross
    if kind == _EDGE_H:
        cq, cp = (Q, P) if forward else (Q, P - 1)
        entry = "b" if forward else "t"
    else:
        cq, cp = (Q, P) if forward else (Q - 1, P)
        entry = "l" if forward else "r"

    try:
        c00 = val(cq, cp)
        c10 = val(cq + 1, cp)
        c01 = val(cq, cp + 1)
        c11 = val(cq + 1, cp + 1)
    except WindowExceeded as exc:
        raise UnboundedContour(
            f"level {E}+eps leaves the window at cell ({cq}, {cp})",
            energy=E,
            site=(cq, cp),
        ) from exc

    s00, s10, s01, s11 = c00 > E, c10 > E, c01 > E, c11 > E
    b, r, t, l = s00 != s10, s10 != s11, s01 != s11, s00 != s01
    if b and r and t and l:
        # Diagonal sign pattern: resolve by the bilinear saddle value.  The
        # denominator cannot vanish for a diagonal pattern of integers.
        den = c00 + c11 - c10 - c01
        num = c00 * c11 - c10 * c01 - E * den
        saddle_above = num != 0 and (num > 0) == (den > 0)
        if saddle_above == s00:  # arcs hug the off-diagonal corners
            exit_edge = {"b": "r", "r": "b", "t": "l", "l": "t"}[entry]
        else:
            exit_edge = {"b": "l", "l": "b", "r": "t", "t": "r"}[entry]
    elif entry == "b":
        exit_edge = "r" if r else ("t" if t else "l")
    elif entry == "r":
        exit_edge = "b" if b else ("t" if t else "l")
    elif entry == "t":
        exit_edge = "b" if b else ("r" if r else "l")
    else:
        exit_edge = "b" if b else ("r" if r else "t")

    if exit_edge == "b":
        return (_EDGE_H, cq, cp, False)
    if exit_edge == "t":
        return (_EDGE_H, cq, cp + 1, True)
    if exit_edge == "l":
        return (_EDGE_V, cq, cp, False)
    return (_EDGE_V, cq + 1, cp, True)


def _start_crossing(ham, Q, P, E, flags) -> tuple:
    """A directed crossing brushing (Q, P), oriented with the flow."""
    if flags[0]:  # east neighbor above level
        kind, eq, ep = _EDGE_H, Q, P
    elif flags[1]:  # north
        kind, eq, ep = _EDGE_V, Q, P
    elif flags[2]:  # west
        kind, eq, ep = _EDGE_H, Q - 1, P
    else:  # south
        kind, eq, ep = _EDGE_V, Q, P - 1
    return (kind, eq, ep, _oriented(ham, kind, eq, ep, E))


def _walk(ham, E: int, start: tuple) -> Iterator[tuple]:
    """Yield directed crossings around a component, starting at ``start``,
    until the walk returns to it.  Raises UnboundedContour if it escapes."""
    val = _fast_value(ham)
    cross = start
    while True:
        yield cross
        cross = _advance(val, E, cross)
        if cross == start:
            return


def _flip(cross: tuple) -> tuple:
    kind, Q, P, forward = cross
    return (kind, Q, P, not forward)


def _touch_fast(val, kind, Q, P, E) -> Optional[tuple[int, int]]:
    if val(Q, P) == E:
        return (Q, P)
    if kind == _EDGE_H:
        if val(Q + 1, P) == E:
            return (Q + 1, P)
    elif val(Q, P + 1) == E:
        return (Q, P + 1)
    return None


def _regular_fast(val, site, E) -> bool:
    q, p = site
    try:
        flags = (
            val(q + 1, p) > E,
            val(q, p + 1) > E,
            val(q - 1, p) > E,
            val(q, p - 1) > E,
        )
    except WindowExceeded as exc:
        raise UnboundedContour(
            f"cannot classify touched site {site}: window too small",
            energy=E,
            site=site,
        ) from exc
    return _local_kind(flags) is SiteClassification.REGULAR


def _site_is_regular(ham, site, E) -> bool:
    return _regular_fast(_fast_value(ham), site, E)


def _scan_for_regular(ham, E, start, origin) -> tuple[int, int]:
    """First regular site visited after ``start``'s own brush of ``origin``.

    Consecutive crossings touching the same site form one visit; the leading
    run of ``origin`` touches is skipped, then the first visit whose site is
    regular wins.  The walk always continues to closure so that an escaping
    component raises ``UnboundedContour`` rather than answering from a
    partial trace.  A component with no other regular site maps ``origin``
    to itself.
    """
    val = _fast_value(ham)
    found: Optional[tuple[int, int]] = None
    in_leading_run = True
    current: Optional[tuple[int, int]] = None
    cross = start
    while True:
        kind, Q, P, _ = cross
        site = _touch_fast(val, kind, Q, P, E)
        skip = False
        if in_leading_run:
            if site == origin:
                skip = True
            else:
                in_leading_run = False
        if not skip:
            if site is not None and site != current:
                if found is None and site != origin and _regular_fast(val, site, E):
                    found = site
            current = site
        cross = _advance(val, E, cross)
        if cross == start:
            break
    return found if found is not None else origin


def next_site(ham: SeparableHamiltonian1D, Q: int, P: int) -> tuple[int, int]:
    """One time step: the next lattice site on this site's contour.

    Saddle and extremum sites stand still; so does a site whose component
    touches no other regular site.
    """
    E = ham.value(Q, P)
    try:
        flags = _neighbor_flags(ham, Q, P, E)
    except WindowExceeded as exc:
        raise WindowExceeded(
            f"site ({Q}, {P}) needs its four neighbors inside the windows"
        ) from exc
    if _local_kind(flags) is not SiteClassification.REGULAR:
        return (Q, P)
    start = _start_crossing(ham, Q, P, E, flags)
    return _scan_for_regular(ham, E, start, (Q, P))


def prev_site(ham: SeparableHamiltonian1D, Q: int, P: int) -> tuple[int, int]:
    """Inverse step: walk the contour against its orientation."""
    E = ham.value(Q, P)
    try:
        flags = _neighbor_flags(ham, Q, P, E)
    except WindowExceeded as exc:
        raise WindowExceeded(
            f"site ({Q}, {P}) needs its four neighbors inside the windows"
        ) from exc
    if _local_kind(flags) is not SiteClassification.REGULAR:
        return (Q, P)
    start = _flip(_start_crossing(ham, Q, P, E, flags))
    return _scan_for_regular(ham, E, start, (Q, P))


def _grouped_visits(ham, E, crossings) -> list[tuple[int, int]]:
    """Collapse consecutive same-site touches (cyclically) into visits."""
    touches = []
    prev = object()
    visits: list[tuple[int, int]] = []
    for kind, Q, P, _ in crossings:
        site = _touch_site(ham, kind, Q, P, E)
        touches.append(site)
        if site is not None and site != prev:
            visits.append(site)
        prev = site
    if (
        len(visits) > 1
        and visits[0] == visits[-1]
        and touches[-1] is not None
        and touches[-1] == touches[0]
    ):
        # the walk started mid-visit; the run wraps around the cycle seam
        visits.pop()
    return visits


def trace_component(
    ham: SeparableHamiltonian1D, E: int, seed: tuple[int, int]
) -> ContourTrace:
    """Trace the connected component of the ``E + eps`` level through ``seed``.

    ``seed`` must satisfy ``H(seed) = E``.  Untouched rest sites yield a
    single-site trace.  For a saddle brushed by two branches the component
    through the first crossed incident edge (east, north, west, south order)
    is returned.
    """
    Q, P = seed
    if ham.value(Q, P) != E:
        raise ValueError(f"seed {seed} is not on the shell: H={ham.value(Q, P)} != {E}")
    try:
        flags = _neighbor_flags(ham, Q, P, E)
    except WindowExceeded as exc:
        raise WindowExceeded(
            f"seed {seed} needs its four neighbors inside the windows"
        ) from exc
    if not any(flags):
        kind = classify_site(ham, Q, P, E)
        return ContourTrace(E, (seed,), (kind,), True, ())
    start = _start_crossing(ham, Q, P, E, flags)
    crossings = list(_walk(ham, E, start))
    visits = _grouped_visits(ham, E, crossings)
    kinds = tuple(classify_site(ham, s[0], s[1], E) for s in visits)
    recorded = tuple(
        Crossing(
            kind,
            eq,
            ep,
            forward,
            _crossing_param(ham, kind, eq, ep, E),
            _touch_site(ham, kind, eq, ep, E),
        )
        for kind, eq, ep, forward in crossings
    )
    return ContourTrace(E, tuple(visits), kinds, True, recorded)


def enumerate_shell(ham: SeparableHamiltonian1D, E: int) -> list[tuple[int, int]]:
    """All window lattice sites with ``H = E``, in lexicographic order."""
    qlo, qhi = ham.q_window
    plo, phi = ham.p_window
    return [
        (q, p)
        for q in range(qlo, qhi + 1)
        for p in range(plo, phi + 1)
        if ham.value(q, p) == E
    ]


def orbit_map(
    ham: SeparableHamiltonian1D, sites: Iterable[tuple[int, int]]
) -> dict[tuple[int, int], tuple[int, int]]:
    """Successor map for many sites at once, tracing each component once."""
    result: dict[tuple[int, int], tuple[int, int]] = {}
    val = _fast_value(ham)
    for site in sites:
        if site in result:
            continue
        Q, P = site
        E = ham.value(Q, P)
        flags = _neighbor_flags(ham, Q, P, E)
        if _local_kind(flags) is not SiteClassification.REGULAR:
            result[site] = site
            continue
        start = _start_crossing(ham, Q, P, E, flags)
        visits = _grouped_visits(ham, E, _walk(ham, E, start))
        regular = [s for s in visits if _regular_fast(val, s, E)]
        if len(regular) <= 1:
            result[site] = site
            continue
        for i, s in enumerate(regular):
            result[s] = regular[(i + 1) % len(regular)]
    return result


def trace_rows(trace: ContourTrace, component_id: int) -> list[tuple]:
    """CSV-ready rows: (component id, ordinal, Q, P, classification)."""
    return [
        (component_id, i, s[0], s[1], k.value)
        for i, (s, k) in enumerate(zip(trace.sites, trace.kinds))
    ]
