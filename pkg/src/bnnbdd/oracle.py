"""Brute-force reference semantics: direct network evaluation and region enumeration."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Sequence, Tuple

from .encoder import FixedIndices, HammingBall, Region
from .model import BnnModel, InputSample, InternalBlock, OutputBlock


def block_forward(block: InternalBlock, x: Sequence[int]) -> List[int]:
    """One internal block over a ±1 vector; returns a ±1 vector."""
    out = []
    for j, row in enumerate(block.weights):
        lin = sum(xi * wi for xi, wi in zip(x, row)) + block.bias[j]
        if block.bn_alpha[j] == 0:
            bn = block.bn_gamma[j]
        else:
            bn = block.bn_alpha[j] * ((lin - block.bn_mu[j]) / block.bn_sigma[j]) \
                + block.bn_gamma[j]
        out.append(1 if bn >= 0 else -1)
    return out


def output_scores(block: OutputBlock, x: Sequence[int]) -> List[float]:
    return [sum(xi * wi for xi, wi in zip(x, row)) + b
            for row, b in zip(block.weights, block.bias)]


def argmax_first(scores: Sequence[float]) -> int:
    best = 0
    for i, v in enumerate(scores):
        if v > scores[best]:
            best = i
    return best


def evaluate(model: BnnModel, x) -> int:
    """0-based predicted class of a 0/1 input."""
    bits = x.bits if isinstance(x, InputSample) else tuple(x)
    if len(bits) != model.input_width:
        raise ValueError(f"input width {len(bits)} != model width {model.input_width}")
    h = [2 * b - 1 for b in bits]
    for blk in model.blocks:
        h = block_forward(blk, h)
    return argmax_first(output_scores(model.output, h))


def enumerate_region(region: Region) -> Iterator[Tuple[int, ...]]:
    """Every point of the region exactly once, as 0/1 tuples."""
    u = region.center.bits
    n = len(u)
    if isinstance(region, HammingBall):
        for r in range(region.radius + 1):
            for flips in itertools.combinations(range(n), r):
                x = list(u)
                for i in flips:
                    x[i] ^= 1
                yield tuple(x)
    elif isinstance(region, FixedIndices):
        free = sorted(region.free)
        for vals in itertools.product((0, 1), repeat=len(free)):
            x = list(u)
            for i, b in zip(free, vals):
                x[i] = b
            yield tuple(x)
    else:
        raise TypeError(f"unknown region type {type(region).__name__}")


def hamming(x: Sequence[int], y: Sequence[int]) -> int:
    return sum(a != b for a, b in zip(x, y))


@dataclass
class OracleResult:
    num_classes: int
    predictions: Dict[Tuple[int, ...], int] = field(default_factory=dict)

    @property
    def counts(self) -> List[int]:
        c = Counter(self.predictions.values())
        return [c.get(i, 0) for i in range(self.num_classes)]

    def points(self, cls: int) -> List[Tuple[int, ...]]:
        return [x for x, c in self.predictions.items() if c == cls]


def classify_region(model: BnnModel, region: Region) -> OracleResult:
    res = OracleResult(model.num_classes)
    for x in enumerate_region(region):
        res.predictions[x] = evaluate(model, x)
    return res


def adversarial_proportion(model: BnnModel, center: InputSample, radius: int,
                           label: int) -> Fraction:
    """Share of the ball classified away from ``label``; 0 for radius -1."""
    if radius < 0:
        return Fraction(0)
    counts = classify_region(model, HammingBall(center, radius)).counts
    total = sum(counts)
    return Fraction(total - counts[label], total)


def max_safe_distance(model: BnnModel, center: InputSample, start: int,
                      eps: Fraction, label: int) -> int:
    """Locally maximal safe radius, evaluated radius by radius from scratch."""
    n = len(center)

    def pr(r):
        return adversarial_proportion(model, center, r, label)

    if pr(start) > eps:
        r = start - 1
        while r >= 0 and pr(r) > eps:
            r -= 1
        return r
    r = start
    while r < n and pr(r + 1) <= eps:
        r += 1
    return r
