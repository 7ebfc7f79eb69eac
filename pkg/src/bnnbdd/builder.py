"""Compile a model and an input region into one BDD per output class."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

from .bdd import Bdd, BddManager, BudgetExceeded
from .encoder import (
    CardinalityConstraint,
    Region,
    VariableLayout,
    cc_to_bdd,
    internal_block_to_ccs,
    output_block_to_ccs,
    region_size,
    region_to_bdd,
)
from .model import BnnModel


@dataclass
class BlockStats:
    block: int
    time_s: float
    relation_nodes: int
    composed_nodes: int
    feasible_nodes: int


@dataclass
class BuildStats:
    blocks: List[BlockStats] = field(default_factory=list)
    class_time_s: float = 0.0
    time_s: float = 0.0
    peak_nodes: int = 0
    output_nodes: int = 0

    def as_dict(self) -> dict:
        return {
            "time_s": round(self.time_s, 6),
            "peak_nodes": self.peak_nodes,
            "output_nodes": self.output_nodes,
            "class_time_s": round(self.class_time_s, 6),
            "blocks": [
                {"block": b.block + 1, "time_s": round(b.time_s, 6),
                 "relation_nodes": b.relation_nodes, "composed_nodes": b.composed_nodes,
                 "feasible_nodes": b.feasible_nodes}
                for b in self.blocks
            ],
        }


class BuildAborted(BudgetExceeded):
    """A build ran out of budget; ``stats`` holds what was measured so far."""

    def __init__(self, cause: BudgetExceeded, stats: BuildStats):
        super().__init__(str(cause), cause.nodes, cause.elapsed)
        self.stats = stats


@dataclass
class ClassPartition:
    """Per-class input sets of a region: ``classes[c]`` holds the points labelled ``c``."""

    mgr: BddManager
    layout: VariableLayout
    region: Bdd
    region_size: int
    classes: List[Bdd]
    stats: BuildStats

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def count(self, cls: int) -> int:
        return self.mgr.sat_count(self.classes[cls], self.layout.inputs)

    def counts(self) -> List[int]:
        return [self.count(c) for c in range(self.num_classes)]

    def classify(self, bits: Sequence[int]) -> Optional[int]:
        """Class whose BDD contains ``bits``, or None outside the region."""
        for c, g in enumerate(self.classes):
            if self.mgr.evaluate(g, bits):
                return c
        return None


def block_to_bdd(ccs: Sequence[CardinalityConstraint], g_in: Bdd, mgr: BddManager,
                 out_vars: Optional[Sequence[int]] = None, split: bool = True) -> Bdd:
    """Conjoin the constraints of one block, each restricted to ``g_in``.

    With ``out_vars`` (an internal block) constraint ``m`` is tied to its
    output variable, ``out_vars[m] <-> (C_m & g_in)``.  Without it (the
    output block) the constraints themselves are conjoined.  ``split``
    selects halving over a left fold; both give the same BDD.
    """
    if not ccs:
        raise ValueError("block_to_bdd needs at least one constraint")

    def leaf(m):
        g = mgr.apply("and", cc_to_bdd(ccs[m], mgr), g_in)
        if out_vars is not None:
            g = mgr.apply("xnor", mgr.mk_var(out_vars[m]), g)
        return g

    def rec(lo, hi):
        if lo == hi:
            return leaf(lo)
        mid = (hi - lo) // 2 + lo
        return mgr.apply("and", rec(lo, mid), rec(mid + 1, hi))

    if split:
        return rec(0, len(ccs) - 1)
    g = leaf(0)
    for m in range(1, len(ccs)):
        g = mgr.apply("and", g, leaf(m))
    return g


def build(model: BnnModel, region: Union[Region, Bdd], mgr: Optional[BddManager] = None,
          *, propagate: bool = True, split: bool = True,
          node_budget: Optional[int] = None, time_budget: Optional[float] = None
          ) -> ClassPartition:
    """Per-class BDDs of ``region`` under ``model``.

    ``region`` is a region description or a BDD over the input variables.
    With ``propagate`` off, blocks after the first see every input as
    feasible; the result is the same, only slower.
    """
    layout = VariableLayout.for_model(model)
    if mgr is None:
        mgr = BddManager(layout.num_vars, node_budget=node_budget, time_budget=time_budget)
    else:
        if mgr.num_vars < layout.num_vars:
            raise ValueError(f"manager has {mgr.num_vars} variables, "
                             f"model needs {layout.num_vars}")
        if node_budget is not None:
            mgr.node_budget = node_budget
        if time_budget is not None:
            mgr.time_budget = time_budget
            mgr.start_clock()
    stats = BuildStats()
    t_start = time.perf_counter()

    try:
        if isinstance(region, Bdd):
            if region.mgr is not mgr:
                raise ValueError("region BDD belongs to another manager")
            g_region = region
            size = mgr.sat_count(region, layout.inputs)
        else:
            if region.width != model.input_width:
                raise ValueError(f"region width {region.width} != model input width "
                                 f"{model.input_width}")
            g_region = region_to_bdd(region, mgr, layout.inputs)
            size = region_size(region)

        g_in = g_region
        g = None
        for i, blk in enumerate(model.blocks):
            t0 = time.perf_counter()
            xs, ys = layout.layer(i), layout.layer(i + 1)
            feasible = g_in if (propagate or i == 0) else mgr.true
            ccs = internal_block_to_ccs(blk, xs)
            rel = block_to_bdd(ccs, feasible, mgr, out_vars=ys, split=split)
            # Inputs outside the feasible set would otherwise pair with the all-zero output.
            rel = mgr.apply("and", rel, feasible)
            g_in = mgr.exists(rel, xs)
            g = rel if i == 0 else mgr.rel_product(g, rel, xs)
            stats.blocks.append(BlockStats(
                block=i, time_s=time.perf_counter() - t0,
                relation_nodes=mgr.node_count(rel), composed_nodes=mgr.node_count(g),
                feasible_nodes=mgr.node_count(g_in)))
            stats.peak_nodes = len(mgr)

        t0 = time.perf_counter()
        last = layout.layer(model.depth)
        feasible = g_in if propagate else mgr.true
        classes = []
        for c in range(model.num_classes):
            ccs = output_block_to_ccs(model.output, c, last)
            g_c = block_to_bdd(ccs, feasible, mgr, split=split)
            classes.append(mgr.rel_product(g_c, g, last))
        stats.class_time_s = time.perf_counter() - t0
    except BudgetExceeded as exc:
        stats.peak_nodes = len(mgr)
        stats.time_s = time.perf_counter() - t_start
        raise BuildAborted(exc, stats) from exc

    stats.peak_nodes = len(mgr)
    stats.output_nodes = mgr.node_count(*classes)
    stats.time_s = time.perf_counter() - t_start
    return ClassPartition(mgr, layout, g_region, size, classes, stats)


def partition_violations(part: ClassPartition) -> List[str]:
    """Problems with disjointness, coverage or support of a partition (empty if sound)."""
    mgr = part.mgr
    problems = []
    inputs = set(part.layout.inputs)
    for c, g in enumerate(part.classes):
        extra = mgr.support(g) - inputs
        if extra:
            problems.append(f"class {c} mentions non-input variables {sorted(extra)}")
    for a in range(part.num_classes):
        for b in range(a + 1, part.num_classes):
            if not mgr.apply("and", part.classes[a], part.classes[b]).is_false:
                problems.append(f"classes {a} and {b} overlap")
    if mgr.disjoin(part.classes) != part.region:
        problems.append("union of classes differs from the region")
    if not problems:
        total = sum(part.counts())
        if total != part.region_size:
            problems.append(f"counts sum to {total}, region has {part.region_size}")
    return problems
