"""Queries over a class partition: robustness counts, safe radii, explanations."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from .bdd import BddManager, BudgetExceeded
from .builder import ClassPartition, build
from .encoder import HammingBall, ball_bdd, region_size
from .model import BnnModel, InputSample


class EmptyClassError(ValueError):
    """The queried class has no point in the region."""


def to_fraction(eps: Union[str, int, float, Fraction]) -> Fraction:
    """Exact threshold; decimal strings and floats are read by their decimal spelling."""
    if isinstance(eps, float):
        eps = repr(eps)
    value = Fraction(eps)
    if value < 0:
        raise ValueError("threshold must be non-negative")
    return value


@dataclass
class RobustnessReport:
    label: int
    counts: List[int]
    region_size: int

    @property
    def adversarial(self) -> int:
        return self.region_size - self.counts[self.label]

    @property
    def proportion(self) -> Fraction:
        return Fraction(self.adversarial, self.region_size)

    @property
    def robust(self) -> bool:
        return self.adversarial == 0


def class_distribution(part: ClassPartition, label: int) -> RobustnessReport:
    if not 0 <= label < part.num_classes:
        raise ValueError(f"class {label} outside [0, {part.num_classes})")
    return RobustnessReport(label, part.counts(), part.region_size)


def targeted_count(part: ClassPartition, target: int) -> int:
    """Region points classified as ``target``; zero means target-robust."""
    if not 0 <= target < part.num_classes:
        raise ValueError(f"class {target} outside [0, {part.num_classes})")
    return part.count(target)


def adversarial_proportion(part: ClassPartition, label: int) -> Fraction:
    if part.region_size == 0:
        return Fraction(0)
    return class_distribution(part, label).proportion


@dataclass
class SafeDistance:
    """Result of the safe-radius search.

    ``trace`` lists ``(radius, proportion)`` for every radius evaluated.
    ``complete`` is False when a budget ran out; ``radius`` is then the
    best bound certified before that.
    """

    radius: int
    trace: List[Tuple[int, Fraction]] = field(default_factory=list)
    complete: bool = True


def max_safe_hamming(model: BnnModel, center: InputSample, start: int, eps,
                     label: int, mgr: Optional[BddManager] = None,
                     node_budget: Optional[int] = None,
                     time_budget: Optional[float] = None) -> SafeDistance:
    """Locally maximal Hamming radius around ``center`` whose adversarial share is <= eps.

    Shrinks by intersecting the class BDDs with smaller balls, or grows by
    building the next shell and adding it in.  Returns -1 when even the
    centre alone is over the threshold.
    """
    eps = to_fraction(eps)
    n = len(center)
    if not 0 <= start <= n:
        raise ValueError(f"start radius {start} outside [0, {n}]")
    result = SafeDistance(radius=-1)
    try:
        part = build(model, HammingBall(center, start), mgr,
                     node_budget=node_budget, time_budget=time_budget)
        mgr = part.mgr
        inputs = part.layout.inputs
        classes = list(part.classes)
        r = start

        def proportion():
            size = region_size(HammingBall(center, r)) if r >= 0 else 0
            if size == 0:
                pr = Fraction(0)
            else:
                good = mgr.sat_count(classes[label], inputs)
                bad = sum(mgr.sat_count(g, inputs) for g in classes) - good
                pr = Fraction(bad, size)
            result.trace.append((r, pr))
            return pr

        if proportion() > eps:
            while r >= 0:
                r -= 1
                ball = ball_bdd(center, r, mgr, inputs)
                classes = [mgr.apply("and", ball, g) for g in classes]
                if proportion() <= eps:
                    result.radius = r
                    return result
            result.radius = r
            return result

        result.radius = r
        while r < n:
            r += 1
            shell = mgr.apply("and", ball_bdd(center, r, mgr, inputs),
                              mgr.negate(ball_bdd(center, r - 1, mgr, inputs)))
            fresh = build(model, shell, mgr)
            classes = [mgr.apply("or", b, g) for b, g in zip(fresh.classes, classes)]
            if proportion() > eps:
                result.radius = r - 1
                return result
            result.radius = r
        return result
    except BudgetExceeded:
        result.complete = False
        return result


# ----------------------------------------------------------------------
# explanations


@dataclass
class Explanation:
    """A literal set over input variables; ``kind`` is "pi" or "ef"."""

    kind: str
    target: int
    literals: List[Tuple[int, bool]]

    def signed(self) -> List[int]:
        """1-based signed indices: +i for x_i, -i for its negation."""
        return [(v + 1) if pos else -(v + 1) for v, pos in self.literals]


def pi_explanation(part: ClassPartition, target: int) -> Explanation:
    """Minimal cube that, inside the region, forces class ``target``.

    Seeded from the lexicographically smallest point of the class.
    """
    mgr = part.mgr
    g = part.classes[target]
    if g.is_false:
        raise EmptyClassError(f"class {target + 1} unreachable in region")
    inputs = part.layout.inputs
    seed = mgr.pick_min(g, inputs)
    # Outside the region anything goes.
    f = mgr.apply("or", mgr.negate(part.region), g)
    return Explanation("pi", target, mgr.prime_implicant(f, seed))


def essential_features(part: ClassPartition, target: int) -> Explanation:
    """Literals satisfied by every region point of class ``target``."""
    mgr = part.mgr
    g = part.classes[target]
    if g.is_false:
        raise EmptyClassError(f"class {target + 1} unreachable in region")
    return Explanation("ef", target, mgr.essential_literals(g))


def cube_is_sufficient(part: ClassPartition, target: int,
                       literals: List[Tuple[int, bool]]) -> bool:
    mgr = part.mgr
    cube = mgr.cube(literals)
    return mgr.implies(mgr.apply("and", cube, part.region), part.classes[target])


def cube_is_minimal(part: ClassPartition, target: int,
                    literals: List[Tuple[int, bool]]) -> bool:
    return all(
        not cube_is_sufficient(part, target, literals[:i] + literals[i + 1:])
        for i in range(len(literals))
    )
