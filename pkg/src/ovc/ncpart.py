"""Non-crossing partitions and their gap-insertion composition.

A partition of ``{1, ..., p}`` is kept in canonical form: blocks sorted by
their minimum, elements sorted inside each block.  A partition of p elements
is treated as an operator with ``p + 1`` inputs, one per gap between
consecutive elements (gap 0 sits before element 1, gap p after element p),
and a single output.  Composition inserts one partition into each gap of
another; restricted to non-crossing partitions this is again non-crossing.

Partitions may carry *colors*: one variable index per element.  Uncolored is
represented by the absence of a color list, never by a default color.
All values are immutable; every function here is pure.
"""

from __future__ import annotations

import itertools
import math
import os
from typing import Iterable, NamedTuple, Optional, Sequence

DEFAULT_MAX_ELEMENTS = 10
DEFAULT_MAX_BLOCKS = 9

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


class MalformedPartition(ValueError):
    """Blocks do not form a partition of an initial integer segment."""


class CrossingError(MalformedPartition):
    """Blocks form a partition but contain a crossing."""


class ArityMismatch(ValueError):
    """Composition applied with the wrong number or shape of arguments."""


class EnumerationBound(RuntimeError):
    """Requested enumeration exceeds the configured size limit."""


def max_elements() -> int:
    """Enumeration bound; override with the OVC_MAX_ELEMENTS env variable."""
    raw = os.environ.get("OVC_MAX_ELEMENTS")
    return DEFAULT_MAX_ELEMENTS if raw is None else int(raw)


def _checked_ground(blocks) -> int:
    """Return p after checking blocks partition {1..p} exactly."""
    seen = set()
    for b in blocks:
        if len(b) == 0:
            raise MalformedPartition("empty block")
        for x in b:
            if not isinstance(x, int) or x < 1:
                raise MalformedPartition("elements must be positive integers, got %r" % (x,))
            if x in seen:
                raise MalformedPartition("element %d occurs twice" % x)
            seen.add(x)
    p = len(seen)
    if seen and (min(seen) != 1 or max(seen) != p):
        raise MalformedPartition("elements must cover 1..p without gaps")
    return p


def _blocks_cross(b1, b2) -> bool:
    # b1, b2 sorted and disjoint; crossing iff their elements alternate
    # at least three times along the merged order.
    merged = sorted([(x, 0) for x in b1] + [(x, 1) for x in b2])
    changes = sum(1 for u, v in zip(merged, merged[1:]) if u[1] != v[1])
    return changes >= 3


def is_noncrossing(blocks) -> bool:
    """True iff no a < c < b < d exists with a,b in one block, c,d in another.

    The blocks must partition {1..p} for some p; otherwise a
    MalformedPartition error is raised.
    """
    _checked_ground(blocks)
    sorted_blocks = [tuple(sorted(b)) for b in blocks]
    return not any(
        _blocks_cross(b1, b2) for b1, b2 in itertools.combinations(sorted_blocks, 2)
    )


class NCPartition:
    """A (possibly colored) non-crossing partition in canonical form.

    ``size`` is the number of partitioned elements p, ``blocks`` a tuple of
    integer tuples and ``colors`` either None or a tuple of p variable
    indices.  ``NCPartition([])`` is the empty partition, the operad unit.
    """

    __slots__ = ("size", "blocks", "colors", "_hash")

    def __init__(self, blocks: Iterable[Iterable[int]], colors: Optional[Sequence[int]] = None):
        canon = tuple(sorted(tuple(sorted(b)) for b in blocks))
        size = _checked_ground(canon)
        for b1, b2 in itertools.combinations(canon, 2):
            if _blocks_cross(b1, b2):
                raise CrossingError("blocks %r and %r cross" % (b1, b2))
        if colors is not None:
            colors = tuple(colors)
            if len(colors) != size:
                raise MalformedPartition(
                    "expected %d colors, got %d" % (size, len(colors))
                )
            if size == 0:
                colors = None  # the empty partition has no coloring to record
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "blocks", canon)
        object.__setattr__(self, "colors", colors)
        object.__setattr__(self, "_hash", hash((canon, colors)))

    def __setattr__(self, name, value):
        raise AttributeError("NCPartition is immutable")

    @property
    def arity(self) -> int:
        """Number of inputs: one per gap, including front and back."""
        return self.size + 1

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    def is_interval(self) -> bool:
        """True iff every block is a contiguous run."""
        return all(b[-1] - b[0] + 1 == len(b) for b in self.blocks)

    def block_of(self, element: int) -> int:
        """Index (in canonical order) of the block containing ``element``."""
        for i, b in enumerate(self.blocks):
            if element in b:
                return i
        raise KeyError(element)

    def block_colors(self, block_index: int):
        if self.colors is None:
            return None
        return tuple(self.colors[x - 1] for x in self.blocks[block_index])

    def sort_key(self):
        return (self.size, self.blocks, self.colors or ())

    def __eq__(self, other):
        return (
            isinstance(other, NCPartition)
            and self.blocks == other.blocks
            and self.colors == other.colors
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "NCPartition(%r)" % (to_text(self),)


EMPTY = NCPartition(())


def full_partition(size: int, colors: Optional[Sequence[int]] = None) -> NCPartition:
    """The one-block partition of ``size`` elements (size 0 gives the unit).

    With arity labelling this is the generator of arity ``size + 1``.
    """
    if size == 0:
        return NCPartition((), colors=colors)
    return NCPartition((tuple(range(1, size + 1)),), colors=colors)


def color_name(index: int) -> str:
    return _ALPHABET[index] if index < len(_ALPHABET) else "v%d" % index


def color_index(token: str) -> int:
    token = token.strip()
    if token.isdigit():
        return int(token)
    if len(token) == 1 and token in _ALPHABET:
        return _ALPHABET.index(token)
    if token.startswith("v") and token[1:].isdigit():
        return int(token[1:])
    raise MalformedPartition("cannot read variable token %r" % token)


def to_text(pi: NCPartition) -> str:
    """Render as blocks joined by '|', elements by ',' ('0' when empty).

    A colored partition appends ';' plus comma-separated variable names.
    """
    if pi.size == 0:
        return "0"
    body = "|".join(",".join(str(x) for x in b) for b in pi.blocks)
    if pi.colors is None:
        return body
    return body + ";" + ",".join(color_name(c) for c in pi.colors)


def from_text(text: str) -> NCPartition:
    text = text.strip()
    if ";" in text:
        body, tail = text.split(";", 1)
        colors = tuple(color_index(t) for t in tail.split(","))
    else:
        body, colors = text, None
    if body == "0":
        if colors not in (None, ()):
            raise MalformedPartition("the empty partition takes no colors")
        return EMPTY
    blocks = [
        tuple(int(x) for x in chunk.split(","))
        for chunk in body.split("|")
    ]
    return NCPartition(blocks, colors=colors)


# ---------------------------------------------------------------------------
# Enumeration


def _nc_block_lists(ground):
    """Yield the block lists of all non-crossing partitions of the ordered
    tuple ``ground``, each exactly once."""
    if not ground:
        yield []
        return
    first, rest = ground[0], ground[1:]
    for k in range(len(rest) + 1):
        for others in itertools.combinations(rest, k):
            block = (first,) + others
            bounds = list(block[1:]) + [None]
            segments = [[] for _ in range(len(block))]
            seg = 0
            for x in rest:
                if x in others:
                    continue
                while bounds[seg] is not None and x > bounds[seg]:
                    seg += 1
                segments[seg].append(x)
            for tail in itertools.product(
                *(list(_nc_block_lists(tuple(s))) for s in segments)
            ):
                yield [block] + [b for part in tail for b in part]


def enumerate_nc(p: int, bound: Optional[int] = None) -> list:
    """All non-crossing partitions of {1..p}, sorted lexicographically by
    canonical block list.  ``enumerate_nc(0)`` is ``[EMPTY]``."""
    limit = max_elements() if bound is None else bound
    if p > limit:
        raise EnumerationBound("p=%d exceeds the enumeration bound %d" % (p, limit))
    if p < 0:
        raise MalformedPartition("negative size")
    parts = [NCPartition(bs) for bs in _nc_block_lists(tuple(range(1, p + 1)))]
    parts.sort(key=NCPartition.sort_key)
    return parts


def enumerate_interval(p: int, bound: Optional[int] = None) -> list:
    """All interval partitions of {1..p} (blocks are contiguous runs)."""
    limit = max_elements() if bound is None else bound
    if p > limit:
        raise EnumerationBound("p=%d exceeds the enumeration bound %d" % (p, limit))
    if p < 0:
        raise MalformedPartition("negative size")
    if p == 0:
        return [EMPTY]
    out = []
    for cut_bits in range(1 << (p - 1)):
        blocks, start = [], 1
        for pos in range(1, p):
            if cut_bits >> (pos - 1) & 1:
                blocks.append(tuple(range(start, pos + 1)))
                start = pos + 1
        blocks.append(tuple(range(start, p + 1)))
        out.append(NCPartition(blocks))
    out.sort(key=NCPartition.sort_key)
    return out


# ---------------------------------------------------------------------------
# Insertion


def _merge_colors(pi: NCPartition, alphas) -> Optional[tuple]:
    sized = [x for x in (pi, *alphas) if x.size > 0]
    if not sized:
        return None
    colored = [x.colors is not None for x in sized]
    if not any(colored):
        return None
    if not all(colored):
        raise ArityMismatch("mixed colored and uncolored inputs")
    parts = []
    for i, a in enumerate(alphas):
        parts.extend(a.colors or ())
        if i < pi.size:
            parts.append(pi.colors[i] if pi.colors else None)
    if any(c is None for c in parts):
        raise ArityMismatch("mixed colored and uncolored inputs")
    return tuple(parts)


def gap_insert(pi: NCPartition, alphas: Sequence[NCPartition]) -> NCPartition:
    """Insert ``alphas[i]`` into gap i of ``pi`` (one partition per gap).

    The result is the non-crossing partition of
    ``size(pi) + sum(size(alpha_i))`` obtained by relabelling every inserted
    partition into its gap.  Colors concatenate in reading order.
    """
    alphas = tuple(alphas)
    if len(alphas) != pi.arity:
        raise ArityMismatch(
            "expected %d gap arguments, got %d" % (pi.arity, len(alphas))
        )
    colors = _merge_colors(pi, alphas)
    sizes = [a.size for a in alphas]
    prefix = [0]
    for s in sizes:
        prefix.append(prefix[-1] + s)
    blocks = [tuple(x + prefix[x] for x in b) for b in pi.blocks]
    for i, a in enumerate(alphas):
        offset = i + prefix[i]
        blocks.extend(tuple(x + offset for x in b) for b in a.blocks)
    return NCPartition(blocks, colors=colors)


def partial_insert(pi: NCPartition, slot: int, alpha: NCPartition) -> NCPartition:
    """Insert ``alpha`` into input slot ``slot`` (1-based; slot i is gap i-1)."""
    if not 1 <= slot <= pi.arity:
        raise ArityMismatch("slot %d out of range 1..%d" % (slot, pi.arity))
    alphas = [EMPTY] * pi.arity
    alphas[slot - 1] = alpha
    return gap_insert(pi, alphas)


def standardize(blocks, colors=None) -> NCPartition:
    """Relabel blocks over an arbitrary finite integer ground set to {1..p}.

    ``colors``, if given, maps each original element to its variable index.
    """
    ground = sorted(x for b in blocks for x in b)
    if len(set(ground)) != len(ground):
        raise MalformedPartition("ground set elements repeat")
    rank = {x: i + 1 for i, x in enumerate(ground)}
    new_blocks = [tuple(rank[x] for x in b) for b in blocks]
    new_colors = tuple(colors[x] for x in ground) if colors is not None else None
    return NCPartition(new_blocks, colors=new_colors)


def restrict(pi: NCPartition, positions) -> NCPartition:
    """Standardized trace of ``pi`` on a set of positions.

    Every block must lie inside or outside ``positions`` entirely.
    """
    keep = set(positions)
    blocks = []
    for b in pi.blocks:
        inside = [x for x in b if x in keep]
        if inside and len(inside) != len(b):
            raise MalformedPartition("block %r straddles the restriction" % (b,))
        if inside:
            blocks.append(b)
    colors = None
    if pi.colors is not None:
        colors = {x: pi.colors[x - 1] for x in keep}
    return standardize(blocks, colors=colors)


# ---------------------------------------------------------------------------
# Nesting structure


class NestingForest(NamedTuple):
    """Blocks of a partition ordered by convex-hull containment.

    ``parent[i]`` is the index of the tightest englobing block of block i
    (None for outer blocks); ``children`` and ``roots`` are ordered by block
    minimum, left to right.
    """

    parent: tuple
    children: tuple
    roots: tuple


def nesting_forest(pi: NCPartition) -> NestingForest:
    blocks = pi.blocks
    parent = []
    for i, b in enumerate(blocks):
        best = None
        for j, w in enumerate(blocks):
            if i == j:
                continue
            if w[0] < b[0] and b[-1] < w[-1]:
                if best is None or w[0] > blocks[best][0]:
                    best = j
        parent.append(best)
    children = [[] for _ in blocks]
    roots = []
    for i, par in enumerate(parent):
        if par is None:
            roots.append(i)
        else:
            children[par].append(i)
    return NestingForest(
        parent=tuple(parent),
        children=tuple(tuple(c) for c in children),
        roots=tuple(roots),
    )


def tree_factorial(forest: NestingForest) -> int:
    """Product over trees of the recursive factorial n * t_1! ... t_k!.

    The empty forest has factorial 1.
    """

    def rec(v):
        size, fact = 1, 1
        for c in forest.children[v]:
            s, f = rec(c)
            size += s
            fact *= f
        return size, size * fact

    result = 1
    for r in forest.roots:
        result *= rec(r)[1]
    return result


def count_monotone_labelings(pi: NCPartition, bound: int = DEFAULT_MAX_BLOCKS) -> int:
    """Number of bijective block labelings with nested blocks labeled smaller.

    Computed by brute force over all permutations and cross-checked against
    #blocks! / tree_factorial; the two counts are asserted equal.
    """
    k = pi.n_blocks
    if k > bound:
        raise EnumerationBound("%d blocks exceeds the bound %d" % (k, bound))
    forest = nesting_forest(pi)
    pairs = [(child, par) for child, par in enumerate(forest.parent) if par is not None]
    brute = 0
    for labels in itertools.permutations(range(1, k + 1)):
        if all(labels[child] < labels[par] for child, par in pairs):
            brute += 1
    formula, remainder = divmod(math.factorial(k), tree_factorial(forest))
    assert remainder == 0 and brute == formula, (pi, brute, formula)
    return brute


# ---------------------------------------------------------------------------
# Cuts


class Cut(NamedTuple):
    """A decomposition pi = gap_insert(lower, upper).

    ``lower`` keeps an englobing-closed set of blocks (recorded in
    ``kept_mask`` over canonical block indices); ``upper`` is the word of
    standardized remainders, one per gap of ``lower``.
    """

    lower: NCPartition
    upper: tuple
    kept_mask: int


def cuts(pi: NCPartition) -> list:
    """All cuts of ``pi``, ordered by kept_mask value.

    Includes the two trivial cuts (no blocks kept / all blocks kept).  The
    empty partition has the single cut (EMPTY, (EMPTY,)).
    """
    if pi.size == 0:
        return [Cut(EMPTY, (EMPTY,), 0)]
    forest = nesting_forest(pi)
    nb = pi.n_blocks
    colors = None
    if pi.colors is not None:
        colors = {x: pi.colors[x - 1] for x in range(1, pi.size + 1)}
    out = []
    for mask in range(1 << nb):
        kept = [i for i in range(nb) if mask >> i & 1]
        if any(
            forest.parent[i] is not None and not mask >> forest.parent[i] & 1
            for i in kept
        ):
            continue
        kept_blocks = [pi.blocks[i] for i in kept]
        lower = standardize(kept_blocks, colors=colors)
        positions = sorted(x for b in kept_blocks for x in b)
        bounds = [0] + positions + [pi.size + 1]
        removed = [pi.blocks[i] for i in range(nb) if not mask >> i & 1]
        upper = []
        for g in range(len(positions) + 1):
            lo, hi = bounds[g], bounds[g + 1]
            segment = [b for b in removed if lo < b[0] and b[-1] < hi]
            upper.append(standardize(segment, colors=colors))
        assert sum(len(b) for b in removed) == sum(u.size for u in upper)
        out.append(Cut(lower, tuple(upper), mask))
    return out


# ---------------------------------------------------------------------------
# Operadic factorization


class GenLeaf(NamedTuple):
    """Generator leaf: the one-block partition of ``block_size`` elements."""

    block_size: int
    colors: Optional[tuple]


class PartialNode(NamedTuple):
    """Partial composition: insert ``inner`` into input ``slot`` of ``outer``."""

    outer: object
    slot: int
    inner: object


def operadic_factorization(pi: NCPartition):
    """Express ``pi`` through partial insertions of one-block generators.

    Strategy: peel the block containing position 1, then recurse on the gap
    contents, attaching them right to left so earlier slots stay valid.
    The empty partition, being the operad unit, has no factorization.
    """
    if pi.size == 0:
        raise ArityMismatch("the empty partition is the unit; no factorization")
    block = pi.blocks[0]  # canonical order puts the block containing 1 first
    m = len(block)
    expr = GenLeaf(m, pi.block_colors(0))
    bounds = list(block) + [pi.size + 1]
    for gap in range(m, 0, -1):
        lo, hi = bounds[gap - 1], bounds[gap]
        segment = range(lo + 1, hi)
        if len(segment) == 0:
            continue
        expr = PartialNode(expr, gap + 1, operadic_factorization(restrict(pi, segment)))
    return expr


def evaluate_factorization(expr) -> NCPartition:
    """Re-evaluate a factorization expression back to a partition."""
    if isinstance(expr, GenLeaf):
        return full_partition(expr.block_size, colors=expr.colors)
    if isinstance(expr, PartialNode):
        return partial_insert(
            evaluate_factorization(expr.outer), expr.slot, evaluate_factorization(expr.inner)
        )
    raise TypeError("not a factorization expression: %r" % (expr,))
