"""Reduced ordered BDD kernel.

Nodes live in flat arrays owned by a :class:`BddManager`; node 0 is the
false leaf and node 1 the true leaf.  The variable order is fixed to
ascending variable index.  User code holds :class:`Bdd` handles, which pin
the owning manager so operands from different managers are rejected.

Nodes are never collected, so a handle stays valid for the manager's
lifetime.
"""

from __future__ import annotations

import sys
import time
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

FALSE = 0
TRUE = 1

# Terminal "variable" sorts after every real variable.
_LEAF_VAR = sys.maxsize

_MIN_RECURSION = 20000


class BddError(Exception):
    pass


class BudgetExceeded(BddError):
    """Raised when a manager exceeds its node or wall-time budget."""

    def __init__(self, message: str, nodes: int, elapsed: float):
        super().__init__(message)
        self.nodes = nodes
        self.elapsed = elapsed


class Bdd:
    """Handle to a node of one manager.

    Equality of handles is logical equivalence, since the diagram is
    canonical.  The usual operators are available: ``&``, ``|``, ``^`` and
    ``~``.
    """

    __slots__ = ("mgr", "node")

    def __init__(self, mgr: "BddManager", node: int):
        self.mgr = mgr
        self.node = node

    def __eq__(self, other):
        if not isinstance(other, Bdd):
            return NotImplemented
        return self.mgr is other.mgr and self.node == other.node

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __hash__(self):
        return hash((id(self.mgr), self.node))

    def __repr__(self):
        if self.node == TRUE:
            return "Bdd(TRUE)"
        if self.node == FALSE:
            return "Bdd(FALSE)"
        return f"Bdd(node={self.node}, var={self.mgr.var_of(self)})"

    def __and__(self, other):
        return self.mgr.apply("and", self, other)

    def __or__(self, other):
        return self.mgr.apply("or", self, other)

    def __xor__(self, other):
        return self.mgr.apply("xor", self, other)

    def __invert__(self):
        return self.mgr.negate(self)

    @property
    def is_true(self) -> bool:
        return self.node == TRUE

    @property
    def is_false(self) -> bool:
        return self.node == FALSE


class BddManager:
    """Unique table, operation caches and the operations over them.

    ``num_vars`` fixes the variable universe ``0 .. num_vars - 1``.
    ``node_budget`` caps the number of stored nodes and ``time_budget`` the
    wall-clock seconds since :meth:`start_clock`; crossing either raises
    :class:`BudgetExceeded`.
    """

    def __init__(
        self,
        num_vars: int,
        node_budget: Optional[int] = None,
        time_budget: Optional[float] = None,
    ):
        if num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        self.num_vars = num_vars
        self.node_budget = node_budget
        self.time_budget = time_budget
        self._var: List[int] = [_LEAF_VAR, _LEAF_VAR]
        self._lo: List[int] = [FALSE, TRUE]
        self._hi: List[int] = [FALSE, TRUE]
        self._unique: Dict[Tuple[int, int, int], int] = {}
        self._and_cache: Dict[Tuple[int, int], int] = {}
        self._or_cache: Dict[Tuple[int, int], int] = {}
        self._xor_cache: Dict[Tuple[int, int], int] = {}
        self._not_cache: Dict[int, int] = {}
        self._deadline: Optional[float] = None
        self._started = time.monotonic()
        self._check_countdown = 4096
        if sys.getrecursionlimit() < _MIN_RECURSION:
            sys.setrecursionlimit(_MIN_RECURSION)
        self.start_clock()

    # ------------------------------------------------------------------
    # bookkeeping

    def start_clock(self) -> None:
        self._started = time.monotonic()
        self._deadline = (
            None if self.time_budget is None else self._started + self.time_budget
        )

    @property
    def elapsed(self) -> float:
        return time.monotonic() - self._started

    def __len__(self) -> int:
        """Number of stored nodes, leaves included."""
        return len(self._var)

    def clear_caches(self) -> None:
        self._and_cache.clear()
        self._or_cache.clear()
        self._xor_cache.clear()
        self._not_cache.clear()

    def _wrap(self, node: int) -> Bdd:
        return Bdd(self, node)

    def _unwrap(self, f: Bdd) -> int:
        if not isinstance(f, Bdd):
            raise TypeError(f"expected Bdd, got {type(f).__name__}")
        if f.mgr is not self:
            raise BddError("operand belongs to a different manager")
        return f.node

    def _check_var(self, index: int) -> None:
        if not isinstance(index, int) or not 0 <= index < self.num_vars:
            raise BddError(f"variable index {index!r} out of range [0, {self.num_vars})")

    def _over_budget(self) -> None:
        n = len(self._var)
        if self.node_budget is not None and n > self.node_budget:
            raise BudgetExceeded(
                f"node budget of {self.node_budget} exceeded", n, self.elapsed
            )
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise BudgetExceeded(
                f"time budget of {self.time_budget}s exceeded", n, self.elapsed
            )

    def _mk(self, var: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (var, lo, hi)
        node = self._unique.get(key)
        if node is not None:
            return node
        node = len(self._var)
        self._var.append(var)
        self._lo.append(lo)
        self._hi.append(hi)
        self._unique[key] = node
        if self.node_budget is not None and node >= self.node_budget:
            self._over_budget()
        self._check_countdown -= 1
        if self._check_countdown <= 0:
            self._check_countdown = 4096
            self._over_budget()
        return node

    # ------------------------------------------------------------------
    # constructors

    @property
    def true(self) -> Bdd:
        return Bdd(self, TRUE)

    @property
    def false(self) -> Bdd:
        return Bdd(self, FALSE)

    def mk_const(self, value: bool) -> Bdd:
        return Bdd(self, TRUE if value else FALSE)

    def mk_var(self, index: int) -> Bdd:
        self._check_var(index)
        return Bdd(self, self._mk(index, FALSE, TRUE))

    def mk_literal(self, index: int, positive: bool = True) -> Bdd:
        self._check_var(index)
        if positive:
            return Bdd(self, self._mk(index, FALSE, TRUE))
        return Bdd(self, self._mk(index, TRUE, FALSE))

    def cube(self, literals: Iterable[Tuple[int, bool]]) -> Bdd:
        """Conjunction of ``(variable, polarity)`` literals."""
        lits = sorted(set(literals), reverse=True)
        node = TRUE
        seen = {}
        for var, pos in lits:
            self._check_var(var)
            if var in seen:
                if seen[var] != pos:
                    return self.false
                continue
            seen[var] = pos
            node = self._mk(var, FALSE, node) if pos else self._mk(var, node, FALSE)
        return Bdd(self, node)

    # ------------------------------------------------------------------
    # inspection

    def var_of(self, f: Bdd) -> Optional[int]:
        v = self._var[self._unwrap(f)]
        return None if v == _LEAF_VAR else v

    def hi(self, f: Bdd) -> Bdd:
        return Bdd(self, self._hi[self._unwrap(f)])

    def lo(self, f: Bdd) -> Bdd:
        return Bdd(self, self._lo[self._unwrap(f)])

    def _reachable(self, roots: Sequence[int]) -> List[int]:
        seen = set()
        stack = [r for r in roots if r > TRUE]
        order = []
        lo, hi = self._lo, self._hi
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            order.append(u)
            for c in (lo[u], hi[u]):
                if c > TRUE and c not in seen:
                    stack.append(c)
        return order

    def node_count(self, *fs: Bdd) -> int:
        """Non-terminal nodes reachable from the given roots."""
        return len(self._reachable([self._unwrap(f) for f in fs]))

    def dag_size(self, *fs: Bdd) -> int:
        """Reachable nodes including the leaves that are reached."""
        roots = [self._unwrap(f) for f in fs]
        inner = self._reachable(roots)
        leaves = {r for r in roots if r <= TRUE}
        for u in inner:
            for c in (self._lo[u], self._hi[u]):
                if c <= TRUE:
                    leaves.add(c)
        return len(inner) + len(leaves)

    def support(self, f: Bdd) -> frozenset:
        var = self._var
        return frozenset(var[u] for u in self._reachable([self._unwrap(f)]))

    def evaluate(self, f: Bdd, assignment) -> bool:
        """Evaluate under ``assignment`` (a mapping or a sequence indexed by var)."""
        u = self._unwrap(f)
        var, lo, hi = self._var, self._lo, self._hi
        while u > TRUE:
            u = hi[u] if assignment[var[u]] else lo[u]
        return u == TRUE

    # ------------------------------------------------------------------
    # boolean operations

    def negate(self, f: Bdd) -> Bdd:
        return Bdd(self, self._not(self._unwrap(f)))

    def _not(self, u: int) -> int:
        if u <= TRUE:
            return 1 - u
        r = self._not_cache.get(u)
        if r is not None:
            return r
        r = self._mk(self._var[u], self._not(self._lo[u]), self._not(self._hi[u]))
        self._not_cache[u] = r
        self._not_cache[r] = u
        return r

    def _and(self, a: int, b: int) -> int:
        if a == FALSE or b == FALSE:
            return FALSE
        if a == TRUE or a == b:
            return b
        if b == TRUE:
            return a
        if a > b:
            a, b = b, a
        key = (a, b)
        cache = self._and_cache
        r = cache.get(key)
        if r is not None:
            return r
        var = self._var
        va, vb = var[a], var[b]
        if va == vb:
            r = self._mk(va, self._and(self._lo[a], self._lo[b]),
                         self._and(self._hi[a], self._hi[b]))
        elif va < vb:
            r = self._mk(va, self._and(self._lo[a], b), self._and(self._hi[a], b))
        else:
            r = self._mk(vb, self._and(a, self._lo[b]), self._and(a, self._hi[b]))
        cache[key] = r
        return r

    def _or(self, a: int, b: int) -> int:
        if a == TRUE or b == TRUE:
            return TRUE
        if a == FALSE or a == b:
            return b
        if b == FALSE:
            return a
        if a > b:
            a, b = b, a
        key = (a, b)
        cache = self._or_cache
        r = cache.get(key)
        if r is not None:
            return r
        var = self._var
        va, vb = var[a], var[b]
        if va == vb:
            r = self._mk(va, self._or(self._lo[a], self._lo[b]),
                         self._or(self._hi[a], self._hi[b]))
        elif va < vb:
            r = self._mk(va, self._or(self._lo[a], b), self._or(self._hi[a], b))
        else:
            r = self._mk(vb, self._or(a, self._lo[b]), self._or(a, self._hi[b]))
        cache[key] = r
        return r

    def _xor(self, a: int, b: int) -> int:
        if a == b:
            return FALSE
        if a == FALSE:
            return b
        if b == FALSE:
            return a
        if a == TRUE:
            return self._not(b)
        if b == TRUE:
            return self._not(a)
        if a > b:
            a, b = b, a
        key = (a, b)
        cache = self._xor_cache
        r = cache.get(key)
        if r is not None:
            return r
        var = self._var
        va, vb = var[a], var[b]
        if va == vb:
            r = self._mk(va, self._xor(self._lo[a], self._lo[b]),
                         self._xor(self._hi[a], self._hi[b]))
        elif va < vb:
            r = self._mk(va, self._xor(self._lo[a], b), self._xor(self._hi[a], b))
        else:
            r = self._mk(vb, self._xor(a, self._lo[b]), self._xor(a, self._hi[b]))
        cache[key] = r
        return r

    def apply(self, op: str, a: Bdd, b: Bdd) -> Bdd:
        """Combine two functions pointwise; ``op`` is one of and/or/xor/xnor."""
        u, v = self._unwrap(a), self._unwrap(b)
        op = op.lower()
        if op == "and":
            return Bdd(self, self._and(u, v))
        if op == "or":
            return Bdd(self, self._or(u, v))
        if op == "xor":
            return Bdd(self, self._xor(u, v))
        if op == "xnor":
            return Bdd(self, self._not(self._xor(u, v)))
        raise ValueError(f"unknown operator {op!r}")

    def conjoin(self, fs: Iterable[Bdd]) -> Bdd:
        node = TRUE
        for f in fs:
            node = self._and(node, self._unwrap(f))
        return Bdd(self, node)

    def disjoin(self, fs: Iterable[Bdd]) -> Bdd:
        node = FALSE
        for f in fs:
            node = self._or(node, self._unwrap(f))
        return Bdd(self, node)

    def ite_var(self, index: int, hi: Bdd, lo: Bdd) -> Bdd:
        """``(x ∧ hi) ∨ (¬x ∧ lo)`` where ``x`` precedes both supports.

        Builds the node directly; an ordering violation raises.
        """
        self._check_var(index)
        h, l = self._unwrap(hi), self._unwrap(lo)
        if self._var[h] <= index or self._var[l] <= index:
            raise BddError(
                f"variable {index} does not precede the children's top variables"
            )
        return Bdd(self, self._mk(index, l, h))

    def ite(self, f: Bdd, g: Bdd, h: Bdd) -> Bdd:
        """General if-then-else over arbitrary operands."""
        u, v, w = self._unwrap(f), self._unwrap(g), self._unwrap(h)
        return Bdd(self, self._or(self._and(u, v), self._and(self._not(u), w)))

    # ------------------------------------------------------------------
    # quantification

    def _qmask(self, vars: Iterable[int]) -> Tuple[List[bool], int]:
        mask = [False] * self.num_vars
        last = -1
        for v in vars:
            self._check_var(v)
            mask[v] = True
            if v > last:
                last = v
        return mask, last

    def exists(self, f: Bdd, vars: Iterable[int]) -> Bdd:
        u = self._unwrap(f)
        mask, last = self._qmask(vars)
        if last < 0:
            return f
        return Bdd(self, self._exists(u, mask, last, {}))

    def forall(self, f: Bdd, vars: Iterable[int]) -> Bdd:
        return self.negate(self.exists(self.negate(f), vars))

    def _exists(self, u: int, mask: List[bool], last: int, cache: Dict[int, int]) -> int:
        if u <= TRUE:
            return u
        v = self._var[u]
        if v > last:
            return u
        r = cache.get(u)
        if r is not None:
            return r
        lo = self._exists(self._lo[u], mask, last, cache)
        if mask[v]:
            r = TRUE if lo == TRUE else self._or(lo, self._exists(self._hi[u], mask, last, cache))
        else:
            r = self._mk(v, lo, self._exists(self._hi[u], mask, last, cache))
        cache[u] = r
        return r

    def rel_product(self, a: Bdd, b: Bdd, vars: Iterable[int]) -> Bdd:
        """``∃vars. a ∧ b`` computed in one pass."""
        u, w = self._unwrap(a), self._unwrap(b)
        mask, last = self._qmask(vars)
        if last < 0:
            return Bdd(self, self._and(u, w))
        return Bdd(self, self._and_exists(u, w, mask, last, {}, {}))

    def _and_exists(self, a, b, mask, last, cache, ecache) -> int:
        if a == FALSE or b == FALSE:
            return FALSE
        if a == TRUE and b == TRUE:
            return TRUE
        if a == TRUE or a == b:
            return self._exists(b, mask, last, ecache)
        if b == TRUE:
            return self._exists(a, mask, last, ecache)
        if a > b:
            a, b = b, a
        var = self._var
        va, vb = var[a], var[b]
        top = va if va < vb else vb
        if top > last:
            return self._and(a, b)
        key = (a, b)
        r = cache.get(key)
        if r is not None:
            return r
        if va == top:
            a0, a1 = self._lo[a], self._hi[a]
        else:
            a0 = a1 = a
        if vb == top:
            b0, b1 = self._lo[b], self._hi[b]
        else:
            b0 = b1 = b
        lo = self._and_exists(a0, b0, mask, last, cache, ecache)
        if mask[top]:
            if lo == TRUE:
                r = TRUE
            else:
                r = self._or(lo, self._and_exists(a1, b1, mask, last, cache, ecache))
        else:
            r = self._mk(top, lo, self._and_exists(a1, b1, mask, last, cache, ecache))
        cache[key] = r
        return r

    # ------------------------------------------------------------------
    # cofactors

    def restrict(self, f: Bdd, assignment: Dict[int, bool]) -> Bdd:
        """Cofactor of ``f`` with the given variables fixed."""
        u = self._unwrap(f)
        if not assignment:
            return f
        for v in assignment:
            self._check_var(v)
        return Bdd(self, self._restrict(u, assignment, max(assignment), {}))

    def _restrict(self, u, assignment, last, cache) -> int:
        if u <= TRUE:
            return u
        v = self._var[u]
        if v > last:
            return u
        r = cache.get(u)
        if r is not None:
            return r
        if v in assignment:
            r = self._restrict(self._hi[u] if assignment[v] else self._lo[u],
                               assignment, last, cache)
        else:
            r = self._mk(v, self._restrict(self._lo[u], assignment, last, cache),
                         self._restrict(self._hi[u], assignment, last, cache))
        cache[u] = r
        return r

    def implies(self, f: Bdd, g: Bdd) -> bool:
        return self._and(self._unwrap(f), self._not(self._unwrap(g))) == FALSE

    # ------------------------------------------------------------------
    # counting and enumeration

    def _positions(self, u: int, universe) -> Tuple[List[int], Dict[int, int]]:
        univ = sorted(set(universe))
        for v in univ:
            self._check_var(v)
        pos = {v: i for i, v in enumerate(univ)}
        missing = self.support(Bdd(self, u)) - pos.keys()
        if missing:
            raise BddError(
                f"support escapes the universe: variables {sorted(missing)}"
            )
        return univ, pos

    def sat_count(self, f: Bdd, universe: Optional[Iterable[int]] = None) -> int:
        """Exact number of satisfying assignments over ``universe``.

        ``universe`` defaults to every variable of the manager.
        """
        u = self._unwrap(f)
        if universe is None:
            universe = range(self.num_vars)
        univ, pos = self._positions(u, universe)
        n = len(univ)
        var, lo, hi = self._var, self._lo, self._hi
        level = lambda w: n if w <= TRUE else pos[var[w]]
        memo = {FALSE: 0, TRUE: 1}

        def count(w):
            c = memo.get(w)
            if c is not None:
                return c
            lw = level(w)
            l, h = lo[w], hi[w]
            c = (count(l) << (level(l) - lw - 1)) + (count(h) << (level(h) - lw - 1))
            memo[w] = c
            return c

        return count(u) << level(u)

    def sat_all(self, f: Bdd, universe: Optional[Iterable[int]] = None
                ) -> Iterator[Tuple[int, ...]]:
        """Lazily yield every model as a bit tuple ordered like sorted(universe).

        Models come out in lexicographic order.
        """
        u = self._unwrap(f)
        if universe is None:
            universe = range(self.num_vars)
        univ, pos = self._positions(u, universe)
        n = len(univ)
        var, lo, hi = self._var, self._lo, self._hi
        bits = [0] * n

        def walk(w, i):
            if w == FALSE:
                return
            if i == n:
                yield tuple(bits)
                return
            if w != TRUE and pos[var[w]] == i:
                children = (lo[w], hi[w])
            else:
                children = (w, w)
            for b in (0, 1):
                bits[i] = b
                yield from walk(children[b], i + 1)

        return walk(u, 0)

    def pick_min(self, f: Bdd, universe: Optional[Iterable[int]] = None
                 ) -> Optional[Dict[int, bool]]:
        """Lexicographically smallest model over ``universe``, or None."""
        univ = sorted(set(range(self.num_vars) if universe is None else universe))
        first = next(self.sat_all(f, univ), None)
        if first is None:
            return None
        return {v: bool(b) for v, b in zip(univ, first)}

    # ------------------------------------------------------------------
    # implicants

    def essential_literals(self, f: Bdd) -> List[Tuple[int, bool]]:
        """Literals implied by ``f``, sorted by variable.

        Only support variables can be essential; a literal ``x`` (resp.
        ``¬x``) is implied when the negative (resp. positive) cofactor is
        false.
        """
        u = self._unwrap(f)
        if u == FALSE:
            raise BddError("every literal is implied by the false function")
        out = []
        for v in sorted(self.support(f)):
            if self._restrict(u, {v: False}, v, {}) == FALSE:
                out.append((v, True))
            elif self._restrict(u, {v: True}, v, {}) == FALSE:
                out.append((v, False))
        return out

    def prime_implicant(self, f: Bdd, seed: Dict[int, bool]) -> List[Tuple[int, bool]]:
        """Shrink the cube of ``seed`` to a prime implicant of ``f``.

        ``seed`` must be a model of ``f`` (variables left out of ``seed``
        must not matter, i.e. the cube of ``seed`` has to imply ``f``).
        Literals are dropped greedily in ascending variable order.
        """
        u = self._unwrap(f)
        for v in seed:
            self._check_var(v)
        neg = self._not(u)
        if self._restrict(neg, seed, max(seed, default=-1), {}) != FALSE:
            raise BddError("seed does not satisfy the function")
        kept = dict(seed)
        for v in sorted(seed):
            trial = {w: b for w, b in kept.items() if w != v}
            last = max(trial, default=-1)
            r = self._restrict(neg, trial, last, {}) if trial else neg
            if r == FALSE:
                kept = trial
        return sorted(kept.items())

    # ------------------------------------------------------------------
    # debugging

    def check_invariants(self) -> None:
        """Assert reducedness and ordering over the whole node store."""
        var, lo, hi = self._var, self._lo, self._hi
        seen = set()
        for u in range(2, len(var)):
            assert lo[u] != hi[u], f"node {u} is redundant"
            key = (var[u], lo[u], hi[u])
            assert key not in seen, f"node {u} is a duplicate"
            seen.add(key)
            assert var[u] < var[lo[u]] and var[u] < var[hi[u]], f"node {u} breaks order"

    def to_dot(self, *fs: Bdd, names: Optional[Dict[int, str]] = None) -> str:
        """DOT text: nodes labeled by variable, solid edges hi, dashed edges lo."""
        roots = [self._unwrap(f) for f in fs]
        nodes = self._reachable(roots)
        lines = ["digraph bdd {", '  node [shape=circle];',
                 '  n0 [label="0", shape=box];', '  n1 [label="1", shape=box];']
        for u in sorted(nodes):
            v = self._var[u]
            label = names.get(v, f"x{v}") if names else f"x{v}"
            lines.append(f'  n{u} [label="{label}"];')
            lines.append(f"  n{u} -> n{self._hi[u]};")
            lines.append(f"  n{u} -> n{self._lo[u]} [style=dashed];")
        for i, r in enumerate(roots):
            lines.append(f'  r{i} [label="f{i}", shape=plaintext];')
            lines.append(f"  r{i} -> n{r};")
        lines.append("}")
        return "\n".join(lines) + "\n"
