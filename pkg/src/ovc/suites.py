"""Named verification suites behind the command-line driver.

Each suite runs a fixed list of assertions and reports one row per
assertion: identifier, what it checks, whether the check is exact
(symbolic, rational arithmetic) or numeric (max relative deviation against
a tolerance), and the outcome.  Suites are deterministic for a fixed
configuration and seed; report ordering follows suite then assertion order,
independent of scheduling.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import formal, ncpart, winsert
from .cumulants import (
    build_boolean,
    build_free,
    build_monotone,
    e_pi_map,
    moment_family,
    verify_mc,
)
from .formal import all_words, antipode, coproduct, delta_prec, delta_succ, eta_eps
from .morphisms import (
    WordSum,
    convolve,
    eta_eps_morphism,
    exp_prec,
    exp_star,
    exp_succ,
    family_infinitesimal,
    half_prec,
    half_succ,
    log_star,
    moment_morphism,
    morphism_dev,
    operadic_extension,
    precompose,
    seeded_infinitesimal,
    shuffle,
    word_sum_dev,
)
from .ncpart import (
    NCPartition,
    count_monotone_labelings,
    cuts,
    enumerate_interval,
    enumerate_nc,
    evaluate_factorization,
    full_partition,
    gap_insert,
    is_noncrossing,
    nesting_forest,
    operadic_factorization,
    partial_insert,
    tree_factorial,
)
from .ovps import OVMatrixSpace, identity_map, moment_map, multimap_dev, multimap_partial

CATALAN = [1, 1, 2, 5, 14, 42, 132, 429]


@dataclass
class VerifyContext:
    """Everything a suite needs; built by the CLI from its configuration."""

    space: OVMatrixSpace
    scalar_space: OVMatrixSpace
    tol: float = 1e-9
    seed: int = 7
    max_order: int = 4
    hopf_size: int = 5
    hopf_letters: int = 3
    numeric_size: int = 4
    fault_word: tuple = None
    families: dict = field(default_factory=dict)

    def cumulant_families(self):
        if not self.families:
            moments = moment_family(self.space)
            self.families = {
                "moment": moments,
                "free": build_free(moments),
                "boolean": build_boolean(moments),
                "monotone": build_monotone(moments),
            }
            if self.fault_word is not None:
                self.families["free"].corrupt(tuple(self.fault_word))
        return self.families


def _row(ident, description, passed, dev=None, tol=None, exact=False):
    return {
        "id": ident,
        "description": description,
        "exact": bool(exact),
        "dev": None if dev is None else float(dev),
        "tol": None if tol is None else float(tol),
        "passed": bool(passed),
    }


def _exact(ident, description, ok):
    return _row(ident, description, ok, exact=True)


def _numeric(ident, description, dev, tol):
    return _row(ident, description, dev <= tol, dev=dev, tol=tol)


def _set_partitions(ground):
    if not ground:
        yield []
        return
    first, rest = ground[0], ground[1:]
    for sub in _set_partitions(rest):
        yield [[first]] + [list(b) for b in sub]
        for i in range(len(sub)):
            copied = [list(b) for b in sub]
            copied[i].insert(0, first)
            yield copied


# ---------------------------------------------------------------------------
# operad


def suite_operad(ctx: VerifyContext):
    rows = []
    counts_ok, interval_ok = True, True
    for p in range(8):
        brute = sorted(
            (
                NCPartition(bs)
                for bs in _set_partitions(tuple(range(1, p + 1)))
                if is_noncrossing(bs)
            ),
            key=NCPartition.sort_key,
        )
        got = enumerate_nc(p)
        counts_ok &= got == brute and len(got) == CATALAN[p]
        if p >= 1:
            ints = enumerate_interval(p)
            interval_ok &= len(ints) == 2 ** (p - 1)
            interval_ok &= ints == [pi for pi in got if pi.is_interval()]
    rows.append(
        _exact(
            "operad.nc-counts",
            "non-crossing enumeration matches brute-force filtering of all set partitions, p <= 7",
            counts_ok,
        )
    )
    rows.append(
        _exact(
            "operad.interval-counts",
            "interval enumeration has 2^(p-1) elements and filters the non-crossing list, p <= 7",
            interval_ok,
        )
    )

    unit_ok = True
    for p in range(5):
        for pi in enumerate_nc(p):
            unit_ok &= gap_insert(pi, [ncpart.EMPTY] * pi.arity) == pi
            unit_ok &= gap_insert(ncpart.EMPTY, [pi]) == pi
    rows.append(_exact("operad.unit-law", "empty-partition insertions act as the unit", unit_ok))

    gen_ok = all(
        partial_insert(full_partition(m - 1), m, full_partition(n - 1))
        == partial_insert(full_partition(n - 1), 1, full_partition(m - 1))
        for m in range(2, 6)
        for n in range(2, 6)
    )
    rows.append(
        _exact(
            "operad.generator-relation",
            "one-block generators satisfy the last-slot/first-slot exchange, arities 2..5",
            gen_ok,
        )
    )

    import numpy as np

    rng = np.random.default_rng(ctx.seed)
    small = enumerate_nc(0) + enumerate_nc(1) + enumerate_nc(2)
    assoc_ok = True
    for p in range(5):
        for pi in enumerate_nc(p):
            for _ in range(6):
                alphas = [small[rng.integers(len(small))] for _ in range(pi.arity)]
                mid = gap_insert(pi, alphas)
                betas = [small[rng.integers(len(small))] for _ in range(mid.arity)]
                two_stage = gap_insert(mid, betas)
                pos, inner = 0, []
                for a in alphas:
                    inner.append(gap_insert(a, betas[pos : pos + a.arity]))
                    pos += a.arity
                assoc_ok &= two_stage == gap_insert(pi, inner)
    rows.append(
        _exact(
            "operad.associativity",
            "two-stage insertion equals the one-stage composite on seeded samples, size <= 4",
            assoc_ok,
        )
    )

    duality_ok = True
    for p in range(6):
        for pi in enumerate_nc(p):
            found = {(c.lower, c.upper) for c in cuts(pi)}
            brute = set()
            for q in range(p + 1):
                for lower in enumerate_nc(q):
                    rest = p - q
                    for sizes in itertools.product(range(rest + 1), repeat=lower.arity):
                        if sum(sizes) != rest:
                            continue
                        for upper in itertools.product(*(enumerate_nc(s) for s in sizes)):
                            if gap_insert(lower, upper) == pi:
                                brute.add((lower, tuple(upper)))
            duality_ok &= found == brute
    rows.append(
        _exact(
            "operad.cut-duality",
            "cut enumeration equals brute-force inversion of insertion, size <= 5",
            duality_ok,
        )
    )

    fact_ok = all(
        evaluate_factorization(operadic_factorization(pi)) == pi
        for p in range(1, 7)
        for pi in enumerate_nc(p)
    )
    rows.append(
        _exact(
            "operad.factorization-round-trip",
            "peel-first factorization re-evaluates to the partition, size <= 6",
            fact_ok,
        )
    )
    return rows


# ---------------------------------------------------------------------------
# hopf


def suite_hopf(ctx: VerifyContext):
    lift = lambda x: x
    words = all_words(ctx.hopf_size, ctx.hopf_letters)
    live = [w for w in words if not w.is_unit()]
    rows = []

    coassoc = all(
        formal.map_stack(coproduct, lift, coproduct(w))
        == formal.map_stack(lift, coproduct, coproduct(w))
        for w in words
    )
    rows.append(
        _exact(
            "hopf.coassociativity",
            "coproduct is coassociative on all words of total size <= %d" % ctx.hopf_size,
            coassoc,
        )
    )

    split_ok = all(
        delta_prec(w) + delta_succ(w) == formal.reduced_coproduct(w) for w in live
    )
    rows.append(
        _exact(
            "hopf.half-sum",
            "the two half-coproducts sum to the reduced coproduct",
            split_ok,
        )
    )

    ax1 = all(
        formal.map_stack(delta_prec, lift, delta_prec(w))
        == formal.map_stack(lift, formal.reduced_coproduct, delta_prec(w))
        for w in live
    )
    ax2 = all(
        formal.map_stack(delta_succ, lift, delta_prec(w))
        == formal.map_stack(lift, delta_prec, delta_succ(w))
        for w in live
    )
    ax3 = all(
        formal.map_stack(formal.reduced_coproduct, lift, delta_succ(w))
        == formal.map_stack(lift, delta_succ, delta_succ(w))
        for w in live
    )
    rows.append(_exact("hopf.unshuffle-left", "left-left unshuffle axiom", ax1))
    rows.append(_exact("hopf.unshuffle-mixed", "mixed unshuffle axiom", ax2))
    rows.append(_exact("hopf.unshuffle-right", "right-right unshuffle axiom", ax3))

    antipode_ok = all(
        formal.nabla(formal.map_stack(antipode, lift, coproduct(w))) == eta_eps(formal.single(w))
        and formal.nabla(formal.map_stack(lift, antipode, coproduct(w)))
        == eta_eps(formal.single(w))
        for w in words
    )
    rows.append(
        _exact(
            "hopf.antipode-identity",
            "collapsing the antipode against either side of the coproduct projects onto unit words",
            antipode_ok,
        )
    )

    def s2(x):
        return antipode(antipode(x))

    s2_ok = all(s2(s2(formal.single(w))) == s2(formal.single(w)) for w in words)
    proj_ok = all(
        (
            s2(formal.single(w)) == formal.single(w)
            if all(l.is_interval() for l in w.letters)
            else s2(formal.single(w)).is_zero()
        )
        for w in words
    )
    rows.append(
        _exact(
            "hopf.antipode-square",
            "the squared antipode is the projector onto interval-letter words",
            s2_ok and proj_ok,
        )
    )

    halves = all_words(max(ctx.hopf_size - 2, 2), 1)
    mult_ok = all(
        coproduct(formal.hconcat(formal.single(u), formal.single(v)))
        == formal.stack_product(coproduct(u), coproduct(v))
        for u in halves
        for v in halves
        if u.total_size + v.total_size <= ctx.hopf_size
    )
    rows.append(
        _exact(
            "hopf.coproduct-multiplicative",
            "the coproduct of a concatenation is the interchange product of coproducts",
            mult_ok,
        )
    )

    conil_ok = True
    for w in words:
        state = formal.single(formal.stack(w, formal.unit_word(w.inputs)))
        for _ in range(max(1, w.total_blocks)):
            state = formal.map_stack(formal.reduced_coproduct, lift, state)
        conil_ok &= state.is_zero()
    rows.append(
        _exact(
            "hopf.conilpotence",
            "iterating the reduced coproduct kills every word within its block count",
            conil_ok,
        )
    )
    return rows


# ---------------------------------------------------------------------------
# shuffle


def suite_shuffle(ctx: VerifyContext):
    space = ctx.space
    words = all_words(ctx.numeric_size, 2)
    f = seeded_infinitesimal(space, seed=ctx.seed + 1)
    g = seeded_infinitesimal(space, seed=ctx.seed + 2)
    h = seeded_infinitesimal(space, seed=ctx.seed + 3)
    rows = []
    rows.append(
        _numeric(
            "shuffle.axiom-left",
            "(f < g) < h equals f < (g * h) on words of size <= %d" % ctx.numeric_size,
            morphism_dev(half_prec(half_prec(f, g), h), half_prec(f, shuffle(g, h)), words),
            ctx.tol,
        )
    )
    rows.append(
        _numeric(
            "shuffle.axiom-mixed",
            "(f > g) < h equals f > (g < h)",
            morphism_dev(half_prec(half_succ(f, g), h), half_succ(f, half_prec(g, h)), words),
            ctx.tol,
        )
    )
    rows.append(
        _numeric(
            "shuffle.axiom-right",
            "f > (g > h) equals (f * g) > h",
            morphism_dev(half_succ(f, half_succ(g, h)), half_succ(shuffle(f, g), h), words),
            ctx.tol,
        )
    )
    x = seeded_infinitesimal(space, seed=ctx.seed + 4)
    rows.append(
        _numeric(
            "shuffle.left-right-inverse",
            "the right exponential of -x convolved with the left exponential of x is the unit",
            morphism_dev(
                convolve(exp_succ(x.scaled(-1)), exp_prec(x)), eta_eps_morphism(space), words
            ),
            ctx.tol,
        )
    )
    K = exp_prec(x)
    rows.append(
        _numeric(
            "shuffle.left-fixed-point",
            "the left exponential solves K = unit + x < K",
            morphism_dev(K, eta_eps_morphism(space) + half_prec(x, K), words),
            ctx.tol,
        )
    )
    B = exp_succ(x)
    rows.append(
        _numeric(
            "shuffle.right-fixed-point",
            "the right exponential solves B = unit + B > x",
            morphism_dev(B, eta_eps_morphism(space) + half_succ(B, x), words),
            ctx.tol,
        )
    )
    return rows


# ---------------------------------------------------------------------------
# oracle


def suite_oracle(ctx: VerifyContext):
    space = ctx.space
    families = ctx.cumulant_families()
    moments = families["moment"]
    ext = operadic_extension(space, moments.generator)
    left = exp_prec(family_infinitesimal(moments))
    rows = []
    dev_rel = 0.0
    e1 = moment_map(space, [])
    dev_rel = max(dev_rel, multimap_dev(e1, identity_map(space)))
    for n in range(2, 5):
        for m in range(2, 5):
            en = moments.generator((0,) * (n - 1))
            em = moments.generator((0,) * (m - 1))
            dev_rel = max(
                dev_rel,
                multimap_dev(
                    multimap_partial(en, n, em), multimap_partial(em, 1, en)
                ),
            )
    rows.append(
        _numeric(
            "oracle.moment-exchange",
            "order-zero moments are the identity and moment maps satisfy the slot exchange",
            dev_rel,
            1e-10,
        )
    )
    dev_ext, dev_exp = 0.0, 0.0
    for p in range(6):
        for pi in enumerate_nc(p):
            recursive = e_pi_map(pi, moments)
            dev_ext = max(dev_ext, multimap_dev(ext.letter_value(pi), recursive))
            dev_exp = max(dev_exp, multimap_dev(left.letter_value(pi), recursive))
    rows.append(
        _numeric(
            "oracle.extension-vs-recursive",
            "factorization route equals the recursive collapse on all partitions of size <= 5",
            dev_ext,
            1e-10,
        )
    )
    rows.append(
        _numeric(
            "oracle.exponential-vs-recursive",
            "left half-shuffle exponential of the moment generators equals the recursive collapse",
            dev_exp,
            1e-10,
        )
    )
    two_colored = [
        NCPartition(pi.blocks, colors=tuple(i % 2 for i in range(p)))
        for p in range(1, 5)
        for pi in enumerate_nc(p)
    ]
    dev_col = max(
        multimap_dev(ext.letter_value(cpi), e_pi_map(cpi, moments))
        for cpi in two_colored
    )
    rows.append(
        _numeric(
            "oracle.two-variable-extension",
            "the same equivalence with two-variable colorings, size <= 4",
            dev_col,
            1e-10,
        )
    )
    unit = eta_eps_morphism(space)
    mom_mor = moment_morphism(moments)
    inv = precompose(mom_mor, antipode, name="antipode-pullback")
    words = all_words(4, 2)
    rows.append(
        _numeric(
            "oracle.antipode-inverse",
            "the antipode pullback inverts the moment morphism under convolution",
            max(
                morphism_dev(convolve(mom_mor, inv), unit, words),
                morphism_dev(convolve(inv, mom_mor), unit, words),
            ),
            ctx.tol,
        )
    )
    return rows


# ---------------------------------------------------------------------------
# moment-cumulant


def suite_moment_cumulant(ctx: VerifyContext):
    rows = []
    matrix_families = ctx.cumulant_families()
    for label, space, families in (
        ("scalar", ctx.scalar_space, None),
        ("matrix", ctx.space, matrix_families),
    ):
        order = min(ctx.max_order + 1, 5)
        fams = None
        if families is not None:
            fams = {k: families[k] for k in ("free", "boolean", "monotone")}
        report = verify_mc(space, order=order, families=fams)
        for kind in ("free", "boolean", "monotone"):
            rows.append(
                _numeric(
                    "moment-cumulant.%s-%s" % (label, kind),
                    "%s cumulant sums rebuild the moments on the %s space, order <= %d"
                    % (kind, label, order),
                    report["max_dev"][kind],
                    ctx.tol,
                )
            )
    return rows


# ---------------------------------------------------------------------------
# splitting


def suite_splitting(ctx: VerifyContext):
    space = ctx.space
    lift = lambda x: x
    rows = []
    families = ctx.cumulant_families()
    fp = winsert.verify_fixed_points(
        space,
        ctx.numeric_size,
        families={"free": families["free"], "boolean": families["boolean"]},
        tol=ctx.tol,
    )
    rows.append(
        _numeric(
            "splitting.free-fixed-point",
            "moments solve E = unit + k < E on words of length <= %d" % ctx.numeric_size,
            fp["free_dev"],
            ctx.tol,
        )
    )
    rows.append(
        _numeric(
            "splitting.boolean-fixed-point",
            "moments solve E = unit + E > b on the same words",
            fp["boolean_dev"],
            ctx.tol,
        )
    )

    vs = sorted(space.variables)
    inter_ok = True
    for w in winsert.all_w_words(vs, ctx.numeric_size + 1, 1):
        if w.is_unit():
            continue
        inter_ok &= formal.map_stack(winsert.split, winsert.split, winsert.w_delta_prec(w)) == delta_prec(
            winsert.split(w)
        )
        inter_ok &= formal.map_stack(winsert.split, winsert.split, winsert.w_delta_succ(w)) == delta_succ(
            winsert.split(w)
        )
    rows.append(
        _exact(
            "splitting.intertwining",
            "splitting intertwines both half-coproducts, lengths <= %d" % (ctx.numeric_size + 1),
            inter_ok,
        )
    )

    w_words = winsert.all_w_words(vs, ctx.numeric_size, 2)
    w_live = [w for w in w_words if not w.is_unit()]
    coassoc = all(
        formal.map_stack(winsert.w_coproduct, lift, winsert.w_coproduct(w))
        == formal.map_stack(lift, winsert.w_coproduct, winsert.w_coproduct(w))
        for w in w_words
    )
    ax = all(
        formal.map_stack(winsert.w_delta_prec, lift, winsert.w_delta_prec(w))
        == formal.map_stack(lift, winsert.w_reduced_coproduct, winsert.w_delta_prec(w))
        and formal.map_stack(winsert.w_delta_succ, lift, winsert.w_delta_prec(w))
        == formal.map_stack(lift, winsert.w_delta_prec, winsert.w_delta_succ(w))
        and formal.map_stack(winsert.w_reduced_coproduct, lift, winsert.w_delta_succ(w))
        == formal.map_stack(lift, winsert.w_delta_succ, winsert.w_delta_succ(w))
        for w in w_live
    )
    rows.append(
        _exact(
            "splitting.insertion-hopf",
            "words-insertion coproduct is coassociative and satisfies the unshuffle axioms",
            coassoc and ax,
        )
    )

    def eta_eps_w(s):
        return formal.FormalSum(
            [(b, c) for b, c in formal.FormalSum.lift(s).terms.items() if b.is_unit()]
        )

    anti_ok = all(
        winsert.w_nabla(formal.map_stack(winsert.w_antipode, lift, winsert.w_coproduct(w)))
        == eta_eps_w(formal.single(w))
        for w in w_words
    )
    rows.append(
        _exact(
            "splitting.insertion-antipode",
            "the sign antipode collapses the insertion coproduct onto unit words",
            anti_ok,
        )
    )

    lhs, rhs = winsert.split_insert_defect(
        winsert.LetterWord([vs[0]]),
        [winsert.LetterWord([vs[-1]]), winsert.EMPTY_WORD],
    )
    rows.append(
        _exact(
            "splitting.not-insertion-morphism",
            "splitting an inserted word strictly differs from inserting the split summands",
            lhs != rhs,
        )
    )
    return rows


# ---------------------------------------------------------------------------
# monotone-scalar


def suite_monotone_scalar(ctx: VerifyContext):
    rows = []
    space = ctx.scalar_space
    counts_ok = all(
        count_monotone_labelings(pi) * tree_factorial(nesting_forest(pi))
        == math.factorial(pi.n_blocks)
        for p in range(7)
        for pi in enumerate_nc(p)
    )
    rows.append(
        _exact(
            "monotone.labeling-count",
            "brute-force monotone labeling count matches blocks!/tree-factorial, size <= 6",
            counts_ok,
        )
    )

    m = seeded_infinitesimal(space, seed=ctx.seed + 5, single_block=True)
    star, left = exp_star(m), exp_prec(m)
    dev = 0.0
    for p in range(1, 6):
        for pi in enumerate_nc(p):
            w = formal.word(pi)
            weight = Fraction(1, tree_factorial(nesting_forest(pi)))
            dev = max(dev, word_sum_dev(star.value(w), left.value(w).scale(weight)))
    rows.append(
        _numeric(
            "monotone.star-vs-left",
            "full exponential equals the left exponential over the tree factorial, size <= 5",
            dev,
            ctx.tol,
        )
    )

    scalar_moments = moment_family(space)
    monotone = build_monotone(scalar_moments)
    # named diagnostic: the exchange hypothesis behind the tree-factorial
    # formula, in its first-slot/after-last-slot form; on the scalar
    # backend every slot variant coincides, which is why the formula is
    # asserted only there
    dev_ex = 0.0
    for n in range(1, 4):
        for m in range(1, 4):
            gn = monotone.generator((0,) * n)
            gm = monotone.generator((0,) * m)
            dev_ex = max(
                dev_ex,
                multimap_dev(
                    multimap_partial(gn, 1, gm), multimap_partial(gm, m + 1, gn)
                ),
            )
    rows.append(
        _numeric(
            "monotone.exchange-hypothesis",
            "scalar monotone generators satisfy the first-slot/after-last-slot exchange",
            dev_ex,
            ctx.tol,
        )
    )

    log_m = log_star(winsert.w_moment_morphism(space))
    dev_h = 0.0
    for n in range(1, 5):
        for word in itertools.product((0, 1), repeat=n):
            w = winsert.w_word(winsert.LetterWord(word))
            target = WordSum.word(space, (monotone.generator(word),))
            dev_h = max(dev_h, word_sum_dev(log_m.value(w), target))
    rows.append(
        _numeric(
            "monotone.log-cross-check",
            "on the scalar space the convolution logarithm of the word-level moments recovers the monotone generators",
            dev_h,
            ctx.tol,
        )
    )
    return rows


SUITES = {
    "hopf": suite_hopf,
    "moment-cumulant": suite_moment_cumulant,
    "monotone-scalar": suite_monotone_scalar,
    "operad": suite_operad,
    "oracle": suite_oracle,
    "shuffle": suite_shuffle,
    "splitting": suite_splitting,
}


def run_suites(ctx: VerifyContext, names=None) -> dict:
    names = sorted(SUITES) if names is None else sorted(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError("unknown suite(s): %s" % ", ".join(unknown))
    suites_out = []
    all_pass = True
    for name in names:
        rows = SUITES[name](ctx)
        ok = all(r["passed"] for r in rows)
        all_pass &= ok
        suites_out.append({"suite": name, "passed": ok, "assertions": rows})
    return {"passed": all_pass, "suites": suites_out}
