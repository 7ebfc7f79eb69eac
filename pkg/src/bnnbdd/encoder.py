"""Blocks to cardinality constraints, and constraints/regions to BDDs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import FrozenSet, List, Sequence, Tuple, Union

from .bdd import FALSE, TRUE, Bdd, BddManager
from .model import BnnModel, InputSample, InternalBlock, OutputBlock

# Distance under which a float threshold counts as an integer.
SNAP_TOL = 1e-9


@dataclass(frozen=True)
class Literal:
    var: int
    positive: bool = True

    def __neg__(self) -> "Literal":
        return Literal(self.var, not self.positive)

    def holds(self, assignment) -> bool:
        return bool(assignment[self.var]) == self.positive

    def __str__(self):
        return f"x{self.var}" if self.positive else f"~x{self.var}"


@dataclass(frozen=True)
class CardinalityConstraint:
    """``sum(literals) >= k``, or a constant when ``literals`` is None.

    Build instances with :meth:`at_least`, which normalizes out-of-range
    thresholds to constants.
    """

    literals: Tuple[Literal, ...] = None
    k: int = 0
    const: bool = None

    @classmethod
    def at_least(cls, literals: Sequence[Literal], k: int) -> "CardinalityConstraint":
        lits = tuple(sorted(literals, key=lambda l: l.var))
        if len({l.var for l in lits}) != len(lits):
            raise ValueError("duplicate variable in cardinality constraint")
        if k <= 0:
            return TRUE_CC
        if k > len(lits):
            return FALSE_CC
        return cls(literals=lits, k=int(k))

    @classmethod
    def constant(cls, value: bool) -> "CardinalityConstraint":
        return TRUE_CC if value else FALSE_CC

    @property
    def is_const(self) -> bool:
        return self.const is not None

    def holds(self, assignment) -> bool:
        if self.const is not None:
            return self.const
        return sum(l.holds(assignment) for l in self.literals) >= self.k

    def __str__(self):
        if self.const is not None:
            return "1" if self.const else "0"
        return " + ".join(map(str, self.literals)) + f" >= {self.k}"


TRUE_CC = CardinalityConstraint(const=True)
FALSE_CC = CardinalityConstraint(const=False)


@dataclass(frozen=True)
class HammingBall:
    center: InputSample
    radius: int

    def __post_init__(self):
        if not 0 <= self.radius <= len(self.center):
            raise ValueError(f"radius {self.radius} outside [0, {len(self.center)}]")

    @property
    def width(self) -> int:
        return len(self.center)


@dataclass(frozen=True)
class FixedIndices:
    """Points agreeing with ``center`` outside the 0-based ``free`` indices."""

    center: InputSample
    free: FrozenSet[int]

    def __post_init__(self):
        object.__setattr__(self, "free", frozenset(self.free))
        bad = [i for i in self.free if not 0 <= i < len(self.center)]
        if bad:
            raise ValueError(f"free indices {sorted(bad)} out of range")

    @property
    def width(self) -> int:
        return len(self.center)


Region = Union[HammingBall, FixedIndices]


class VariableLayout:
    """Contiguous variable ranges per layer: inputs first, then each block's outputs.

    ``layer(0)`` holds the network inputs; ``layer(i)`` the outputs of
    internal block ``i - 1``; the last layer feeds the output block.
    """

    def __init__(self, widths: Sequence[int]):
        self.widths = list(widths)
        self.offsets = [0]
        for w in self.widths:
            self.offsets.append(self.offsets[-1] + w)

    @classmethod
    def for_model(cls, model: BnnModel) -> "VariableLayout":
        return cls(model.widths)

    @property
    def num_vars(self) -> int:
        return self.offsets[-1]

    @property
    def num_layers(self) -> int:
        return len(self.widths)

    def layer(self, i: int) -> range:
        return range(self.offsets[i], self.offsets[i + 1])

    @property
    def inputs(self) -> range:
        return self.layer(0)


# ----------------------------------------------------------------------
# CC2BDD


def cc_to_bdd(cc: CardinalityConstraint, mgr: BddManager) -> Bdd:
    """Grid construction of ``sum(l_1..l_n) >= k``.

    Row ``i`` of the grid counts literals already satisfied, column ``j``
    those already falsified; node ``(i, j)`` tests literal ``i + j - 1``.
    The result has at most ``k * (n - k + 1)`` inner nodes.
    """
    if cc.const is not None:
        return mgr.mk_const(cc.const)
    lits = sorted(cc.literals, key=lambda l: l.var)
    for l in lits:
        mgr._check_var(l.var)
    n, k = len(lits), cc.k
    width = n - k + 1
    # below[j] holds G[i+1][j] while filling row i; column width+1 is CONST(0).
    below = [TRUE] * (width + 2)
    mk = mgr._mk
    for i in range(k, 0, -1):
        row = [TRUE] * (width + 2)
        row[width + 1] = FALSE
        for j in range(width, 0, -1):
            lit = lits[i + j - 2]
            sat, unsat = below[j], row[j + 1]
            if lit.positive:
                row[j] = mk(lit.var, unsat, sat)
            else:
                row[j] = mk(lit.var, sat, unsat)
        below = row
    return Bdd(mgr, below[1])


# ----------------------------------------------------------------------
# BNN2CC


def _snap(x: float) -> float:
    r = round(x)
    return float(r) if abs(x - r) <= SNAP_TOL else x


def _ceil(x: float) -> int:
    return int(math.ceil(_snap(x)))


def internal_block_to_ccs(block: InternalBlock, inputs: Sequence[int]
                          ) -> List[CardinalityConstraint]:
    """One constraint per neuron, true exactly when the neuron outputs +1.

    ``inputs[k]`` is the BDD variable carrying the block's ``k``-th input.
    """
    n = block.input_width
    out = []
    for j, row in enumerate(block.weights):
        a, g = block.bn_alpha[j], block.bn_gamma[j]
        mu, b, s = block.bn_mu[j], block.bias[j], block.bn_sigma[j]
        if a == 0:
            out.append(CardinalityConstraint.constant(g >= 0))
            continue
        lits = [Literal(v, w == 1) for v, w in zip(inputs, row)]
        if a > 0:
            k = _ceil(0.5 * (n + mu - b - g * s / a))
        else:
            lits = [-l for l in lits]
            k = _ceil(0.5 * (n - mu + b + g * s / a))
        out.append(CardinalityConstraint.at_least(lits, k))
    return out


def output_block_to_ccs(block: OutputBlock, target: int, inputs: Sequence[int]
                        ) -> List[CardinalityConstraint]:
    """The ``s - 1`` constraints whose conjunction means ARGMAX picks ``target``.

    ``target`` is 0-based.  Against an earlier class the score must be
    strictly larger (first occurrence wins ties), against a later one
    larger or equal.
    """
    s = block.num_classes
    if not 0 <= target < s:
        raise ValueError(f"class {target} outside [0, {s})")
    w_t, b_t = block.weights[target], block.bias[target]
    out = []
    for other in range(s):
        if other == target:
            continue
        w_o = block.weights[other]
        diff = [x - y for x, y in zip(w_t, w_o)]
        lits = []
        neg = 0
        for v, d in zip(inputs, diff):
            if d == 2:
                lits.append(Literal(v, True))
            elif d == -2:
                lits.append(Literal(v, False))
                neg += 1
        t = _snap(0.25 * (block.bias[other] - b_t + sum(diff)))
        if other < target and t == int(t):
            k = int(t) + 1 + neg
        else:
            k = int(math.ceil(t)) + neg
        out.append(CardinalityConstraint.at_least(lits, k))
    return out


# ----------------------------------------------------------------------
# Region2BDD


def hamming_cc(center: InputSample, radius: int, inputs: Sequence[int] = None
               ) -> CardinalityConstraint:
    """At least ``n - radius`` positions agree with ``center``."""
    n = len(center)
    inputs = range(n) if inputs is None else inputs
    lits = [Literal(v, bool(u)) for v, u in zip(inputs, center.bits)]
    return CardinalityConstraint.at_least(lits, n - radius)


def region_to_bdd(region: Region, mgr: BddManager, inputs: Sequence[int] = None) -> Bdd:
    n = region.width
    inputs = range(n) if inputs is None else inputs
    if isinstance(region, HammingBall):
        return cc_to_bdd(hamming_cc(region.center, region.radius, inputs), mgr)
    if isinstance(region, FixedIndices):
        fixed = [(v, bool(u)) for i, (v, u) in enumerate(zip(inputs, region.center.bits))
                 if i not in region.free]
        return mgr.cube(fixed)
    raise TypeError(f"unknown region type {type(region).__name__}")


def ball_bdd(center: InputSample, radius: int, mgr: BddManager,
             inputs: Sequence[int] = None) -> Bdd:
    """Hamming ball that also accepts ``radius`` -1 (the empty set)."""
    if radius < 0:
        return mgr.false
    return cc_to_bdd(hamming_cc(center, min(radius, len(center)), inputs), mgr)


def region_size(region: Region) -> int:
    n = region.width
    if isinstance(region, HammingBall):
        return sum(math.comb(n, i) for i in range(region.radius + 1))
    if isinstance(region, FixedIndices):
        return 1 << len(region.free)
    raise TypeError(f"unknown region type {type(region).__name__}")
