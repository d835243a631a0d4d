"""Concrete control-system backends and partition validation.

Two desk-scale models are supported: finite-state systems (explicit
transition table, exhaustively validated) and one-dimensional affine
interval systems x -> q*x + u (validated with exact rational interval
arithmetic).  Valid partitions compile to a ``WordLanguage``:
finite-state systems produce itinerary languages, and explicit transition
relations produce ``SftLanguage`` directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import PreconditionError
from .symbolic import ItineraryLanguage, PartitionSpec, SftLanguage, WordLanguage


@dataclass(frozen=True)
class FiniteStateSystem:
    """Finite state space with per-control transitions and a labelled invariant set.

    ``transition[(x, u)]`` is the successor of state x under control value u
    (missing pairs mean the move is undefined and counts as leaving Q).
    ``invariant_set`` is the controlled invariant set; ``cell_of`` assigns
    each of its states to a partition symbol.
    """

    states: tuple[object, ...]
    transition: Mapping[tuple[object, str], object]
    invariant_set: tuple[object, ...]
    cell_of: Mapping[object, int]

    def __post_init__(self):
        state_set = set(self.states)
        for x in self.invariant_set:
            if x not in state_set:
                raise PreconditionError(f"invariant-set state {x!r} unknown")
            if x not in self.cell_of:
                raise PreconditionError(f"state {x!r} has no cell assignment")

    def move(self, x: object, u: str) -> object | None:
        return self.transition.get((x, u))


@dataclass(frozen=True)
class AffineIntervalSystem:
    """Scalar system x -> q*x + u on a closed interval, with interval cells.

    ``cut_points`` are the strictly increasing interior endpoints; cell i is
    [c_{i-1}, c_i) except the last, which is closed.  All numbers are exact
    rationals so containment checks carry no rounding.
    """

    contraction: Fraction
    control_values: Mapping[str, Fraction]
    interval: tuple[Fraction, Fraction]
    cut_points: tuple[Fraction, ...]

    def __post_init__(self):
        if not 0 < self.contraction < 1:
            raise PreconditionError("contraction must lie in (0,1)")
        a, b = self.interval
        if not a < b:
            raise PreconditionError("invariant interval is empty")
        pts = (a,) + self.cut_points + (b,)
        if not all(p < q_ for p, q_ in zip(pts, pts[1:])):
            raise PreconditionError("cut points must be strictly increasing inside the interval")

    @property
    def cell_count(self) -> int:
        return len(self.cut_points) + 1

    def cell(self, i: int) -> tuple[Fraction, Fraction, bool]:
        """Cell i as (lo, hi, hi_closed)."""
        a, b = self.interval
        pts = (a,) + self.cut_points + (b,)
        if not 1 <= i <= self.cell_count:
            raise PreconditionError(f"cell {i} outside 1..{self.cell_count}")
        return pts[i - 1], pts[i], i == self.cell_count


@dataclass(frozen=True)
class PartitionValidationReport:
    """Outcome of checking the partition condition on a concrete system."""

    valid: bool
    violations: tuple[tuple[int, int, str], ...]

    def __post_init__(self):
        if self.valid != (not self.violations):
            raise PreconditionError("validity flag inconsistent with violation list")


def _validate_finite_state(
    system: FiniteStateSystem, spec: PartitionSpec
) -> list[tuple[int, int, str]]:
    violations = []
    q_set = set(system.invariant_set)
    for i in spec.symbols:
        word = spec.control_words[i]
        cell_states = [x for x in system.invariant_set if system.cell_of[x] == i]
        for x0 in cell_states:
            x = x0
            for j, u in enumerate(word, start=1):
                nxt = system.move(x, u)
                if nxt is None or nxt not in q_set:
                    violations.append((i, j, f"state {x0!r} escapes at step {j}"))
                    break
                x = nxt
    return violations


def _validate_affine(
    system: AffineIntervalSystem, spec: PartitionSpec
) -> list[tuple[int, int, str]]:
    if len(spec.symbols) != system.cell_count:
        raise PreconditionError(
            f"partition has {len(spec.symbols)} symbols but the system has "
            f"{system.cell_count} cells"
        )
    a, b = system.interval
    violations = []
    for i in spec.symbols:
        lo, hi, _closed = system.cell(i)
        # closures of the stepwise images; affine images of intervals are intervals
        for j, u in enumerate(spec.control_words[i], start=1):
            if u not in system.control_values:
                raise PreconditionError(f"control value {u!r} not an affine input")
            uval = system.control_values[u]
            lo = system.contraction * lo + uval
            hi = system.contraction * hi + uval
            if lo < a or hi > b:
                violations.append((i, j, f"image [{lo},{hi}] leaves [{a},{b}]"))
                break
    return violations


def validate_invariant_partition(system, spec: PartitionSpec) -> PartitionValidationReport:
    """Check that each cell stays inside Q at every step of its control word.

    Finite-state systems are simulated exhaustively over all states; affine
    systems propagate each cell interval through x -> q*x + u step by step
    with exact rational endpoints.
    """
    if isinstance(system, FiniteStateSystem):
        used = {i for x in system.invariant_set for i in (system.cell_of[x],)}
        if not used <= set(spec.symbols):
            raise PreconditionError(f"system cells {sorted(used)} not all in partition symbols")
        violations = _validate_finite_state(system, spec)
    elif isinstance(system, AffineIntervalSystem):
        violations = _validate_affine(system, spec)
    else:
        raise PreconditionError(f"unsupported system type {type(system).__name__}")
    return PartitionValidationReport(not violations, tuple(violations))


def itinerary_language(system: FiniteStateSystem, spec: PartitionSpec) -> WordLanguage:
    """Language of symbol itineraries of the induced tau-step map on Q."""
    report = validate_invariant_partition(system, spec)
    if not report.valid:
        raise PreconditionError(
            f"partition not invariant; first violation: {report.violations[0]}"
        )
    step = {}
    for x0 in system.invariant_set:
        word = spec.control_words[system.cell_of[x0]]
        x = x0
        for u in word:
            x = system.move(x, u)
        step[x0] = x
    label = {x: system.cell_of[x] for x in system.invariant_set}
    return ItineraryLanguage(system.invariant_set, step, label)


def compile_sft(
    symbols: Sequence[int],
    transitions: Iterable[tuple[int, int]],
    spec: PartitionSpec | None = None,
) -> SftLanguage:
    """Language of all paths of an explicit transition relation."""
    transitions = list(transitions)
    if not transitions:
        raise PreconditionError("transition relation is empty")
    if spec is not None and tuple(sorted(symbols)) != spec.symbols:
        raise PreconditionError("relation symbols do not match the partition")
    return SftLanguage(symbols, transitions)
