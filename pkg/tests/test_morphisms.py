import math
from fractions import Fraction

import pytest

from ovc import formal
from ovc.cumulants import build_free, e_pi_map, moment_family
from ovc.formal import antipode, all_words, unit_word, word
from ovc.morphisms import (
    CommutationError,
    OrderOverflow,
    UnitAmbiguity,
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
    validate_generator_exchange,
    word_sum_dev,
)
from ovc.ncpart import (
    EMPTY,
    NCPartition,
    enumerate_nc,
    full_partition,
    nesting_forest,
    tree_factorial,
)
from ovc.ovps import (
    OVMatrixSpace,
    identity_map,
    moment_map,
    multimap_compose,
    multimap_dev,
    multimap_partial,
    sandwich_map,
)

TOL = 1e-9


@pytest.fixture(scope="module")
def space():
    return OVMatrixSpace(d=2, k=2, variables=2, seed=41)


@pytest.fixture(scope="module")
def scalar_space():
    return OVMatrixSpace(d=1, k=4, variables=1, seed=43)


@pytest.fixture(scope="module")
def words3():
    return all_words(3, 2)


def gen1(n):
    return full_partition(n - 1)


# ---------------------------------------------------------------------------
# Convolution monoid


def test_convolution_unit_laws(space, words3):
    unit = eta_eps_morphism(space)
    f = seeded_infinitesimal(space, seed=1)
    assert morphism_dev(convolve(unit, f), f, words3) <= 1e-12
    assert morphism_dev(convolve(f, unit), f, words3) <= 1e-12


def test_convolution_associativity(space):
    f = seeded_infinitesimal(space, seed=2)
    g = seeded_infinitesimal(space, seed=3)
    h = seeded_infinitesimal(space, seed=4)
    left = convolve(convolve(f, g), h)
    right = convolve(f, convolve(g, h))
    assert morphism_dev(left, right, all_words(4, 2)) <= TOL


def test_pros_morphism_inverse_is_antipode_pullback(space):
    # a morphism compatible with insertion is convolution-inverted by
    # precomposition with the antipode
    moments = moment_morphism(moment_family(space))
    inv = precompose(moments, antipode, name="S-pullback")
    unit = eta_eps_morphism(space)
    words = all_words(4, 1) + [unit_word(2), word(gen1(2), gen1(2))]
    assert morphism_dev(convolve(moments, inv), unit, words) <= TOL
    assert morphism_dev(convolve(inv, moments), unit, words) <= TOL


# ---------------------------------------------------------------------------
# Half-shuffles


def test_half_shuffle_unit_conventions(space, words3):
    unit = eta_eps_morphism(space)
    f = seeded_infinitesimal(space, seed=5)
    assert morphism_dev(half_prec(f, unit), f, words3) <= 1e-12
    assert morphism_dev(half_succ(unit, f), f, words3) <= 1e-12
    zero = 0 * eta_eps_morphism(space)
    assert morphism_dev(half_prec(unit, f), zero, words3) <= 1e-12
    assert morphism_dev(half_succ(f, unit), zero, words3) <= 1e-12
    with pytest.raises(UnitAmbiguity):
        half_prec(unit, unit)


def test_half_shuffles_sum_to_convolution(space, words3):
    f = seeded_infinitesimal(space, seed=6)
    g = seeded_infinitesimal(space, seed=7)
    lhs = half_prec(f, g) + half_succ(f, g)
    assert morphism_dev(lhs, convolve(f, g), words3) <= TOL


def test_shuffle_axioms(space, words3):
    f = seeded_infinitesimal(space, seed=8)
    g = seeded_infinitesimal(space, seed=9)
    h = seeded_infinitesimal(space, seed=10)
    a1l = half_prec(half_prec(f, g), h)
    a1r = half_prec(f, shuffle(g, h))
    assert morphism_dev(a1l, a1r, words3) <= TOL
    a2l = half_prec(half_succ(f, g), h)
    a2r = half_succ(f, half_prec(g, h))
    assert morphism_dev(a2l, a2r, words3) <= TOL
    a3l = half_succ(f, half_succ(g, h))
    a3r = half_succ(shuffle(f, g), h)
    assert morphism_dev(a3l, a3r, words3) <= TOL


def test_left_right_inverse_lemma(space, words3):
    x = seeded_infinitesimal(space, seed=11)
    lhs = convolve(exp_succ(x.scaled(-1)), exp_prec(x))
    assert morphism_dev(lhs, eta_eps_morphism(space), words3) <= TOL


# ---------------------------------------------------------------------------
# Exponentials


def test_exp_prec_on_single_blocks(space):
    k = seeded_infinitesimal(space, seed=12)
    K = exp_prec(k)
    for n in range(1, 5):
        pi = gen1(n + 1)
        assert multimap_dev(K.letter_value(pi), k.gen(pi)) <= 1e-12


def test_exp_prec_on_nested_partition(space):
    k = seeded_infinitesimal(space, seed=13)
    K = exp_prec(k)
    pi = NCPartition([(1, 3), (2,)])
    got = K.letter_value(pi)
    # contributing cuts: keep everything (generator on pi itself) and keep
    # the outer block with the singleton inserted in its middle slot
    expected_terms = multimap_partial(k.gen(gen1(3)), 2, k.gen(gen1(2)))
    direct = k.gen(pi)
    combo = WordSum.word(space, (expected_terms,)) + WordSum.word(space, (direct,))
    assert word_sum_dev(WordSum.word(space, (got,)), combo) <= TOL


def test_exp_prec_nested_single_block_support(space):
    # with the generator supported on one-block letters only, the nested
    # partition has a single contributing cut
    k = seeded_infinitesimal(space, seed=13, single_block=True)
    K = exp_prec(k)
    pi = NCPartition([(1, 3), (2,)])
    expected = multimap_partial(k.gen(gen1(3)), 2, k.gen(gen1(2)))
    assert multimap_dev(K.letter_value(pi), expected) <= 1e-12


def test_exp_prec_solves_fixed_point(space, words3):
    k = seeded_infinitesimal(space, seed=14)
    K = exp_prec(k)
    rhs = eta_eps_morphism(space) + half_prec(k, K)
    assert morphism_dev(K, rhs, words3) <= TOL


def test_exp_succ_solves_fixed_point(space, words3):
    b = seeded_infinitesimal(space, seed=15)
    B = exp_succ(b)
    rhs = eta_eps_morphism(space) + half_succ(B, b)
    assert morphism_dev(B, rhs, words3) <= TOL


def test_exp_succ_boolean_structure(space):
    # with single-block support and exchangeable generators the solution
    # kills nested blocks and reverses chains on interval partitions
    moments = moment_family(space)
    b = family_infinitesimal(moments)
    B = exp_succ(b)
    nested = NCPartition([(1, 3), (2,)])
    zero = WordSum.zero(space, (nested.arity,))
    assert word_sum_dev(WordSum.word(space, (B.letter_value(nested),)), zero) <= TOL
    two = NCPartition([(1,), (2,)])
    expected = multimap_partial(b.gen(gen1(2)), 1, b.gen(gen1(2)))
    assert multimap_dev(B.letter_value(two), expected) <= TOL
    three = NCPartition([(1,), (2,), (3,)])
    chain = multimap_partial(
        multimap_partial(b.gen(gen1(2)), 1, b.gen(gen1(2))), 1, b.gen(gen1(2))
    )
    assert multimap_dev(B.letter_value(three), chain) <= TOL


def test_exp_succ_chain_with_mixed_block_sizes(space):
    moments = moment_family(space)
    b = family_infinitesimal(moments)
    B = exp_succ(b)
    # interval partition with blocks {1,2} and {3}: the chain composes the
    # later block around the earlier one through the first slot
    pi = NCPartition([(1, 2), (3,)])
    expected = multimap_partial(b.gen(gen1(2)), 1, b.gen(gen1(3)))
    assert multimap_dev(B.letter_value(pi), expected) <= TOL
    # and the mirrored shape {1} | {2,3}
    pi2 = NCPartition([(1,), (2, 3)])
    expected2 = multimap_partial(b.gen(gen1(3)), 1, b.gen(gen1(2)))
    assert multimap_dev(B.letter_value(pi2), expected2) <= TOL


def test_exp_succ_on_single_blocks(space):
    b = seeded_infinitesimal(space, seed=16)
    B = exp_succ(b)
    for n in range(1, 5):
        pi = gen1(n + 1)
        assert multimap_dev(B.letter_value(pi), b.gen(pi)) <= 1e-12


def test_exp_star_single_block(space):
    m = seeded_infinitesimal(space, seed=17)
    E = exp_star(m)
    for n in range(2, 5):
        w = word(gen1(n))
        assert word_sum_dev(E.value(w), m.value(w)) <= TOL


def test_exp_star_matches_left_exponential_over_tree_factorial(scalar_space):
    m = seeded_infinitesimal(scalar_space, seed=18, single_block=True)
    star = exp_star(m)
    left = exp_prec(m)
    for p in range(1, 5):
        for pi in enumerate_nc(p):
            w = word(pi)
            weight = Fraction(1, tree_factorial(nesting_forest(pi)))
            expected = left.value(w).scale(weight)
            assert word_sum_dev(star.value(w), expected) <= TOL, pi


def test_log_star_round_trips(space, words3):
    m = seeded_infinitesimal(space, seed=19)
    E = exp_star(m)
    back = log_star(E)
    assert morphism_dev(back, m, words3) <= TOL
    # and the other composition order, starting from a horizontal morphism
    K = exp_prec(seeded_infinitesimal(space, seed=20))
    again = exp_star(_as_infinitesimal_from(log_star(K), space))
    assert morphism_dev(again, K, words3) <= TOL


def _as_infinitesimal_from(m, space):
    from ovc.morphisms import InfinitesimalMorphism

    def gen(pi):
        v = m.value(word(pi))
        return v.collapse()

    return InfinitesimalMorphism(space, gen, name="from-log")


def test_log_star_requires_normalized_unit(space):
    f = seeded_infinitesimal(space, seed=21)
    with pytest.raises(ValueError):
        log_star(f)


# ---------------------------------------------------------------------------
# Operadic extension


def test_operadic_extension_two_singletons(space):
    family = moment_family(space)
    ext = operadic_extension(space, lambda w: family.generator(w))
    e2 = family.generator((0,))
    expected = multimap_partial(e2, 2, e2)
    got = ext.letter_value(NCPartition([(1,), (2,)]))
    assert multimap_dev(got, expected) <= 1e-10


def test_operadic_extension_matches_recursive_evaluator(space):
    family = moment_family(space)
    ext = operadic_extension(
        space, lambda w: family.generator(w), validate_vars=(0, 1), max_order=4
    )
    for p in range(5):
        for pi in enumerate_nc(p):
            colored = NCPartition(pi.blocks, colors=tuple(i % 2 for i in range(p)))
            assert multimap_dev(
                ext.letter_value(colored), e_pi_map(colored, family)
            ) <= 1e-10, pi


def test_operadic_extension_equals_left_exponential_of_cumulants(space):
    moments = moment_family(space)
    free = build_free(moments)
    K = exp_prec(family_infinitesimal(free))
    ext = operadic_extension(space, lambda w: free.generator(w))
    for p in range(1, 5):
        for pi in enumerate_nc(p):
            assert multimap_dev(ext.letter_value(pi), K.letter_value(pi)) <= TOL, pi


def test_validate_generator_exchange_rejects_noncommuting(space):
    import numpy as np

    from ovc.ovps import random_multimap

    def bad_gen(word):
        # sandwich maps with unrelated random frames break the exchange rule
        return random_multimap(space, len(word) + 1, np.random.default_rng(len(word)))

    with pytest.raises(CommutationError):
        validate_generator_exchange(bad_gen, (0,), 4)


def test_exp_star_rejects_unit_component(space):
    with pytest.raises(ValueError):
        exp_star(eta_eps_morphism(space))


# ---------------------------------------------------------------------------
# Infinitesimal locality, order bounds


def test_infinitesimal_locality(space):
    k = seeded_infinitesimal(space, seed=22)
    w = word(gen1(2), gen1(3))
    assert k.value(w).is_zero()
    padded = word(EMPTY, gen1(3), EMPTY)
    v = k.value(padded)
    assert v.profile == (1, 3, 1) and len(v.terms) == 1


def test_order_overflow(space):
    k = seeded_infinitesimal(space, seed=23)
    k.max_order = 2
    with pytest.raises(OrderOverflow):
        k.value(word(gen1(4)))


def test_concurrent_evaluation_matches_sequential(space):
    from concurrent.futures import ThreadPoolExecutor

    sequential = exp_prec(seeded_infinitesimal(space, seed=24))
    words = [word(pi) for p in range(1, 5) for pi in enumerate_nc(p)]
    for w in words:
        sequential.value(w)
    concurrent = exp_prec(seeded_infinitesimal(space, seed=24))
    with ThreadPoolExecutor(max_workers=4) as pool:
        list(pool.map(concurrent.value, words * 2))
    dev = max(word_sum_dev(concurrent.value(w), sequential.value(w)) for w in words)
    assert dev <= 1e-12
