"""Moment and cumulant families with the recursive partition evaluator.

The evaluator collapses an innermost interval block of a partition: the
family generator for that block's color word consumes the gap arguments
around the block, and the resulting element of B occupies the merged gap of
the restricted partition.  Iterating reduces any non-crossing partition to
nested generator compositions.

Free cumulants invert the moment sums over all non-crossing partitions,
boolean cumulants over interval partitions, and monotone cumulants over
non-crossing partitions weighted by inverse tree factorials.  Each family
generator is built order by order as a linear combination of moment maps.
"""

from __future__ import annotations

from fractions import Fraction

from .ncpart import (
    NCPartition,
    enumerate_interval,
    enumerate_nc,
    full_partition,
    nesting_forest,
    restrict,
    tree_factorial,
)
from .ovps import (
    identity_map,
    moment_map,
    multimap_dev,
    multimap_lincomb,
    multimap_partial,
)

KINDS = ("moment", "free", "boolean", "monotone")


class CumulantFamily:
    """Generator table for one cumulant kind over a fixed space.

    ``generator(word)`` returns the arity len(word)+1 multilinear map
    attached to the variable word; entries build lazily and are memoized.
    ``corrupt`` post-composes one entry with a scaling, used as a fault
    injection hook by negative-control tests.
    """

    def __init__(self, space, kind, max_order=8):
        if kind not in KINDS:
            raise ValueError("unknown family kind %r" % (kind,))
        self.space = space
        self.kind = kind
        self.max_order = max_order
        self._table = {}
        self._corruption = None

    def generator(self, word):
        word = tuple(int(v) for v in word)
        if len(word) > self.max_order:
            raise ValueError(
                "order %d exceeds the populated bound %d" % (len(word), self.max_order)
            )
        if word not in self._table:
            self._table[word] = self._build(word)
        entry = self._table[word]
        if self._corruption is not None and self._corruption[0] == word:
            entry = multimap_lincomb(
                self.space, entry.arity, [(self._corruption[1], entry)]
            )
        return entry

    def corrupt(self, word, factor=1.5):
        self._corruption = (tuple(word), factor)

    def _build(self, word):
        if self.kind == "moment":
            return moment_map(self.space, word)
        n = len(word)
        if n == 0:
            return identity_map(self.space)
        terms = [(1, moment_map(self.space, word))]
        if self.kind == "free":
            lattice = [(Fraction(1), pi) for pi in enumerate_nc(n)]
        elif self.kind == "boolean":
            lattice = [(Fraction(1), pi) for pi in enumerate_interval(n)]
        else:
            lattice = [
                (Fraction(1, tree_factorial(nesting_forest(pi))), pi)
                for pi in enumerate_nc(n)
            ]
        full = full_partition(n)
        for weight, pi in lattice:
            if pi == full:
                continue
            colored = NCPartition(pi.blocks, colors=word)
            terms.append((-weight, e_pi_map(colored, self)))
        return multimap_lincomb(self.space, n + 1, terms)


def moment_family(space, max_order=8) -> CumulantFamily:
    return CumulantFamily(space, "moment", max_order)


def build_free(family_moment: CumulantFamily) -> CumulantFamily:
    return CumulantFamily(family_moment.space, "free", family_moment.max_order)


def build_boolean(family_moment: CumulantFamily) -> CumulantFamily:
    return CumulantFamily(family_moment.space, "boolean", family_moment.max_order)


def build_monotone(family_moment: CumulantFamily) -> CumulantFamily:
    return CumulantFamily(family_moment.space, "monotone", family_moment.max_order)


def contiguous_blocks(pi: NCPartition) -> list:
    """Indices of blocks occupying a contiguous run of positions; these are
    exactly the leaves of the nesting forest."""
    return [
        i for i, b in enumerate(pi.blocks) if b[-1] - b[0] + 1 == len(b)
    ]


def e_pi_map(pi: NCPartition, family: CumulantFamily, pick: int = 0):
    """The multilinear map of the recursive evaluator on a colored partition.

    ``pick`` selects which innermost interval block to collapse first; the
    result is independent of the choice (checked by tests), the default
    collapses the leftmost one.
    """
    if pi.size == 0:
        return identity_map(family.space)
    colors = pi.colors if pi.colors is not None else (0,) * pi.size
    leaves = contiguous_blocks(pi)
    assert leaves, pi
    block = pi.blocks[leaves[pick % len(leaves)]]
    k, l = block[0], block[-1]
    gen = family.generator(colors[k - 1 : l])
    remaining = [x for x in range(1, pi.size + 1) if not k <= x <= l]
    recolored = NCPartition(pi.blocks, colors=colors)
    rest = restrict(recolored, remaining)
    outer = e_pi_map(rest, family, pick=pick)
    return multimap_partial(outer, k, gen)


def e_pi(pi: NCPartition, family: CumulantFamily, args):
    """Evaluate the recursive collapse on a tuple of arity(pi) elements of B."""
    return e_pi_map(pi, family).eval(*args)


def family_sum_map(word, family: CumulantFamily):
    """The lattice sum of e_pi over the family's partitions for one word:
    all non-crossing partitions for free, interval partitions for boolean,
    inverse-tree-factorial weights for monotone."""
    n = len(word)
    if family.kind == "boolean":
        lattice = [(Fraction(1), pi) for pi in enumerate_interval(n)]
    elif family.kind == "monotone":
        lattice = [
            (Fraction(1, tree_factorial(nesting_forest(pi))), pi)
            for pi in enumerate_nc(n)
        ]
    else:
        lattice = [(Fraction(1), pi) for pi in enumerate_nc(n)]
    terms = [
        (w, e_pi_map(NCPartition(pi.blocks, colors=tuple(word)), family))
        for w, pi in lattice
    ]
    return multimap_lincomb(family.space, n + 1, terms)


def verify_mc(space, order, words=None, max_order=None, families=None) -> dict:
    """Check the moment-cumulant relations up to ``order``.

    For every test word w, the moment map must equal the free sum over
    non-crossing partitions, the boolean sum over interval partitions and
    the tree-factorial-weighted monotone sum.  Returns a report with the
    per-order maximum deviation for each kind.  Pass prebuilt ``families``
    to check tables that have been tampered with.
    """
    max_order = order if max_order is None else max_order
    moments = moment_family(space, max_order)
    if families is None:
        families = {
            "free": build_free(moments),
            "boolean": build_boolean(moments),
            "monotone": build_monotone(moments),
        }
    if words is None:
        vs = sorted(space.variables)
        words = []
        for n in range(1, order + 1):
            words.append((vs[0],) * n)
            if len(vs) > 1 and n >= 2:
                words.append(tuple(vs[i % 2] for i in range(n)))
    rows = []
    for w in words:
        target = moments.generator(w)
        row = {"word": list(w), "order": len(w)}
        for kind, fam in families.items():
            row[kind + "_dev"] = multimap_dev(family_sum_map(w, fam), target)
        rows.append(row)
    worst = {
        kind: max((r[kind + "_dev"] for r in rows), default=0.0)
        for kind in families
    }
    return {"rows": rows, "max_dev": worst}
