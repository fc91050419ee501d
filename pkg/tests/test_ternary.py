import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tercom import ternary
from tercom.ternary import (
    AssocType,
    association_types,
    canonical_word_mask,
    count_multilinear,
    enumerate_nonassoc_multidegree,
    expand,
    expand_collected,
    expansion_maps,
    monomial,
    multidegree_total,
    normalize,
    normalize_tree,
    parse_tree,
    rank_word,
    rank_words,
    symmetry_generators,
    tree_to_text,
    tree_word,
    type_for_shape,
    unrank_word,
    unrank_words,
)


def brute_force_shapes(degree):
    """Independent recursive enumeration of bracketing shapes as multisets."""
    if degree == 1:
        return {()}
    out = set()
    for s1 in range(1, degree, 2):
        for s2 in range(1, degree - s1, 2):
            s3 = degree - s1 - s2
            if s3 < 1:
                continue
            for a in brute_force_shapes(s1):
                for b in brute_force_shapes(s2):
                    for c in brute_force_shapes(s3):
                        key = tuple(
                            sorted((a, b, c), key=lambda t: (-ternary.leaf_count(t), t))
                        )
                        out.add(key)
    return out


def test_association_type_counts():
    assert len(association_types(3)) == 1
    assert len(association_types(5)) == 1
    assert len(association_types(7)) == 2
    assert len(association_types(9)) == 4  # frozen from the recursive oracle
    assert len(association_types(11)) == 8
    for degree in (3, 5, 7, 9, 11):
        assert len(association_types(degree)) == len(brute_force_shapes(degree))


def test_degree11_type_order_matches_display():
    texts = [tree_to_text(t.identity_tree()) for t in association_types(11)]
    assert texts == [
        "[[[[[a,b,c],d,e],f,g],h,i],j,k]",
        "[[[[a,b,c],[d,e,f],g],h,i],j,k]",
        "[[[[a,b,c],d,e],[f,g,h],i],j,k]",
        "[[[a,b,c],[d,e,f],[g,h,i]],j,k]",
        "[[[[a,b,c],d,e],f,g],[h,i,j],k]",
        "[[[a,b,c],[d,e,f],g],[h,i,j],k]",
        "[[[a,b,c],d,e],[[f,g,h],i,j],k]",
        "[[[a,b,c],d,e],[f,g,h],[i,j,k]]",
    ]


def test_even_degree_rejected():
    with pytest.raises(ValueError):
        association_types(4)


def test_parse_roundtrip():
    for t in association_types(9):
        tree = t.identity_tree()
        assert parse_tree(tree_to_text(tree)) == tree


def test_normalize_transposition():
    t3 = association_types(3)[0]
    m = normalize(monomial(t3, (1, 0, 2)))  # [b,a,c]
    assert m.word == (0, 1, 2) and m.sign == -1
    assert normalize(monomial(t3, (0, 0, 2))) is None  # [a,a,c]


def test_normalize_factor_swap():
    # [[d,e,f],[a,b,c],g] -> -[[a,b,c],[d,e,f],g]
    tree = parse_tree("[[d,e,f],[a,b,c],g]")
    sign, canon = normalize_tree(tree)
    assert sign == -1
    assert tree_to_text(canon) == "[[a,b,c],[d,e,f],g]"


def test_normalize_idempotent_and_sign_consistent():
    rng = np.random.default_rng(7)
    for t in association_types(7):
        base = t.identity_tree()
        for _ in range(40):
            word = tuple(rng.permutation(7))
            m = normalize(monomial(t, word))
            assert m is not None  # distinct letters never vanish
            again = normalize(monomial(m.type, m.word))
            assert again.word == m.word and again.sign == 1


def test_symmetry_generator_counts():
    gens11 = symmetry_generators(11)
    assert len(gens11) == 43
    per_type = Counter(t.index for t, _ in gens11)
    assert [per_type[i] for i in range(1, 9)] == [6, 5, 6, 5, 6, 5, 4, 6]
    assert len(symmetry_generators(3)) == 2
    assert len(symmetry_generators(5)) == 3
    assert len(symmetry_generators(7)) == 7


def test_symmetry_generators_match_table_for_type1_and_2():
    gens = [g for g in symmetry_generators(11)]

    def words_of(tidx):
        return [
            tree_to_text(monomial(t, w).tree()) for t, w in gens if t.index == tidx
        ]

    assert words_of(1) == [
        "[[[[[b,a,c],d,e],f,g],h,i],j,k]",
        "[[[[[a,c,b],d,e],f,g],h,i],j,k]",
        "[[[[[a,b,c],e,d],f,g],h,i],j,k]",
        "[[[[[a,b,c],d,e],g,f],h,i],j,k]",
        "[[[[[a,b,c],d,e],f,g],i,h],j,k]",
        "[[[[[a,b,c],d,e],f,g],h,i],k,j]",
    ]
    assert words_of(2) == [
        "[[[[b,a,c],[d,e,f],g],h,i],j,k]",
        "[[[[a,c,b],[d,e,f],g],h,i],j,k]",
        "[[[[d,e,f],[a,b,c],g],h,i],j,k]",
        "[[[[a,b,c],[d,e,f],g],i,h],j,k]",
        "[[[[a,b,c],[d,e,f],g],h,i],k,j]",
    ]


def test_symmetry_generators_close_full_symmetry_group_degree7():
    # The generated group per type must equal the group of all words whose
    # monomial normalizes to +/- the identity word (orbit closure oracle).
    for t in association_types(7):
        gens = [w for tt, w in symmetry_generators(7) if tt.index == t.index]
        full = set()
        for word in itertools.permutations(range(7)):
            m = normalize(monomial(t, word))
            if m is not None and m.word == tuple(range(7)):
                full.add(word)
        seen = {tuple(range(7))}
        frontier = [tuple(range(7))]
        arrs = [np.array(g) for g in gens]
        while frontier:
            cur = frontier.pop()
            ca = np.array(cur)
            for g in arrs:
                nxt = tuple(int(x) for x in ca[g])
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        assert seen == full


def test_each_symmetry_expands_to_zero():
    for t, w in symmetry_generators(11):
        acc = expand_collected(monomial(t, tuple(range(11))))
        for s, word in expand(monomial(t, w)):
            c = acc.get(word, 0) + s
            if c:
                acc[word] = c
            else:
                acc.pop(word, None)
        assert not acc


def test_expand_basic_bracket():
    t3 = association_types(3)[0]
    terms = expand(monomial(t3, (0, 1, 2)))
    assert terms == [
        (1, (0, 1, 2)),
        (-1, (0, 2, 1)),
        (-1, (1, 0, 2)),
        (1, (1, 2, 0)),
        (1, (2, 0, 1)),
        (-1, (2, 1, 0)),
    ]


def brute_expand(tree):
    """Nested substitution oracle, independent of the position-map route."""
    if isinstance(tree, int):
        return {(tree,): 1}
    a, b, c = (brute_expand(x) for x in tree)
    out = {}
    for (pa, pb, pc), s in [
        ((0, 1, 2), 1), ((0, 2, 1), -1), ((1, 0, 2), -1),
        ((1, 2, 0), 1), ((2, 0, 1), 1), ((2, 1, 0), -1),
    ]:
        blocks = [a, b, c]
        for wa, ca in blocks[pa].items():
            for wb, cb in blocks[pb].items():
                for wc, cc in blocks[pc].items():
                    w = wa + wb + wc
                    out[w] = out.get(w, 0) + s * ca * cb * cc
    return {w: c for w, c in out.items() if c}


def test_expand_degree5_against_nested_substitution_oracle():
    t5 = association_types(5)[0]
    m = monomial(t5, (0, 1, 2, 3, 4))
    terms = expand(m)
    assert len(terms) == 36
    acc = {}
    for s, w in terms:
        acc[w] = acc.get(w, 0) + s
    assert {w: c for w, c in acc.items() if c} == brute_expand(m.tree())


def test_expand_term_counts():
    for t in association_types(11):
        signs, maps = expansion_maps(t)
        assert signs.shape[0] == 6**5 == 7776
        assert maps.shape == (7776, 11)


def test_expand_normalize_consistency():
    rng = np.random.default_rng(3)
    for t in association_types(7):
        for _ in range(10):
            word = tuple(rng.permutation(7))
            m = monomial(t, word)
            nm = normalize(m)
            lhs = expand_collected(m)
            # the signed canonical form is the same ternary element
            assert lhs == expand_collected(nm)
            # and the unsigned canonical representative differs by the sign
            bare = monomial(nm.type, nm.word)
            assert lhs == {w: nm.sign * c for w, c in expand_collected(bare).items()}


def test_count_multilinear_degree11():
    counts = [count_multilinear(t) for t in association_types(11)]
    f = math.factorial(11)
    assert counts == [
        f // (6 * 2**4),
        f // (6**2 * 2**2) // 2,
        f // (6**2 * 2**2),
        f // (6**3 * 2) // 6,
        f // (6**2 * 2**2),
        f // (6**3) // 2,
        f // (6**2 * 2**2) // 2,
        f // (6**3 * 2) // 2,
    ]
    assert counts[0] == 415800
    assert counts[3] == 15400
    assert sum(counts) == 1401400


def test_count_multilinear_matches_enumeration_small_degrees():
    for degree in (3, 5, 7, 9):
        words = np.array(list(itertools.permutations(range(degree))), dtype=np.int8)
        for t in association_types(degree):
            mask = canonical_word_mask(t, words)
            assert int(mask.sum()) == count_multilinear(t)


def test_multidegree_counts_paper_run():
    delta = (2, 2, 2, 2, 2, 1)
    assert multidegree_total(delta) == 1247400
    per_type = enumerate_nonassoc_multidegree(delta)
    assert [w.shape[0] for w in per_type] == [
        6720, 1980, 4010, 180, 4010, 1190, 2000, 550,
    ]
    assert sum(w.shape[0] for w in per_type) == 20640


def test_multidegree_type4_against_normalize_filter_oracle():
    delta = (2, 2, 2, 2, 2, 1)
    t4 = association_types(11)[3]
    words = ternary._all_words(delta)
    mask = canonical_word_mask(t4, words)
    got = {tuple(int(x) for x in w) for w in words[mask]}
    ident = set()
    for w in words:
        word = tuple(int(x) for x in w)
        m = normalize(monomial(t4, word))
        if m is not None and m.type.index == 4 and m.word == word and m.sign == 1:
            ident.add(word)
    assert got == ident
    assert len(got) == 180


def test_rank_unrank_examples():
    delta = (2, 2, 2, 2, 2, 1)
    first = (0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5)  # aabbccddeef
    assert rank_word(first, delta) == 1
    assert unrank_word(1, delta) == first
    assert rank_word(tuple(reversed(first)), delta) == 1247400


@given(st.integers(min_value=1, max_value=1247400))
@settings(max_examples=200, deadline=None)
def test_rank_unrank_roundtrip(idx):
    delta = (2, 2, 2, 2, 2, 1)
    assert rank_word(unrank_word(idx, delta), delta) == idx


def test_rank_words_vectorized_matches_sorted_enumeration():
    delta = (2, 1, 1)
    words = ternary._all_words(delta)
    assert words.shape[0] == multidegree_total(delta) == 12
    listed = sorted(set(itertools.permutations((0, 0, 1, 2))))
    assert [tuple(int(x) for x in w) for w in words] == listed
    ranks = rank_words(words, delta)
    assert list(ranks) == list(range(1, 13))


def test_rank_word_rejects_wrong_multidegree():
    with pytest.raises(ValueError):
        rank_word((0, 0, 0, 1, 2, 3, 4, 4, 5, 5, 5), (2, 2, 2, 2, 2, 1))


def test_normalize_words_matches_scalar_normalize():
    from tercom.ternary import normalize_words

    rng = np.random.default_rng(9)
    for degree, reps in ((7, 60), (11, 40)):
        for t in association_types(degree):
            words = rng.integers(0, 6, size=(reps, degree)).astype(np.int8)
            canon, signs = normalize_words(t, words)
            for i in range(reps):
                m = normalize(monomial(t, tuple(int(x) for x in words[i])))
                if m is None:
                    assert signs[i] == 0
                else:
                    assert m.type.index == t.index
                    assert signs[i] == m.sign
                    assert tuple(int(x) for x in canon[i]) == m.word
