"""The free alternating ternary algebra.

A monomial is a full ternary bracketing (an "association type") together with
a word of variables at the leaves.  The bracket alternates in its three
arguments, so every monomial has a canonical form: inside each bracket the
arguments are sorted (larger subtrees first, equal shapes by their words,
leaves by variable), and the sign records the parity of the sort.  A bracket
with two equal arguments is zero.

Shapes are nested tuples: a leaf is ``()`` and an internal node is a tuple of
its three child shapes.  Words are tuples of ints (0 = 'a', 1 = 'b', ...).
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

LEAF = ()

# The six rearrangements of a bracket's arguments with their signs, in the
# order they appear in the expansion of [a,b,c].
_S3_SIGNED = (
    ((0, 1, 2), 1),
    ((0, 2, 1), -1),
    ((1, 0, 2), -1),
    ((1, 2, 0), 1),
    ((2, 0, 1), 1),
    ((2, 1, 0), -1),
)


def leaf_count(shape) -> int:
    if shape == LEAF:
        return 1
    return sum(leaf_count(c) for c in shape)


@functools.cache
def _shapes(degree: int) -> tuple:
    """All ternary bracketing shapes of the given odd degree, canonically ordered.

    Splits (s1 >= s2 >= s3) of the degree into three odd parts are taken in
    descending lexicographic order; child shapes are then combined so that
    equal-size children carry weakly increasing shape indices.
    """
    if degree % 2 == 0 or degree < 1:
        raise ValueError(f"degree must be odd and positive, got {degree}")
    if degree == 1:
        return (LEAF,)
    out = []
    splits = sorted(
        {
            tuple(sorted((s1, s2, degree - s1 - s2), reverse=True))
            for s1 in range(1, degree, 2)
            for s2 in range(1, degree - s1, 2)
            if degree - s1 - s2 >= 1
        },
        reverse=True,
    )
    for split in splits:
        groups = []
        for size, run in itertools.groupby(split):
            k = len(list(run))
            subs = _shapes(size)
            groups.append(
                [combo for combo in itertools.combinations_with_replacement(subs, k)]
            )
        for combo in itertools.product(*groups):
            children = tuple(itertools.chain.from_iterable(combo))
            out.append(children)
    return tuple(out)


@functools.cache
def _shape_index(shape) -> int:
    """Position of a shape in the canonical ordering for its degree."""
    return _shapes(leaf_count(shape)).index(shape)


def _shape_key(shape):
    """Sort key placing larger subtrees first, then canonical shape order."""
    return (-leaf_count(shape), _shape_index(shape))


@dataclass(frozen=True)
class AssocType:
    """One association type: a bracketing shape plus its 1-based index."""

    degree: int
    index: int  # 1-based, matching the canonical ordering for this degree
    shape: tuple

    def __repr__(self) -> str:
        return f"AssocType(degree={self.degree}, index={self.index})"

    @property
    def bracket_count(self) -> int:
        def count(s):
            return 0 if s == LEAF else 1 + sum(count(c) for c in s)

        return count(self.shape)

    def identity_tree(self):
        """The shape with leaves labelled 0..degree-1 left to right."""
        counter = itertools.count()

        def build(s):
            if s == LEAF:
                return next(counter)
            return tuple(build(c) for c in s)

        return build(self.shape)

    def leaf_ranges(self):
        """(start, length) of every node's children, walked in post-order."""
        out = []

        def walk(s, start):
            if s == LEAF:
                return start + 1
            kids = []
            pos = start
            for c in s:
                kids.append((pos, leaf_count(c), c))
                pos = walk(c, pos)
            out.append(kids)
            return pos

        walk(self.shape, 0)
        return out


@functools.cache
def association_types(degree: int) -> tuple[AssocType, ...]:
    """The association types of an odd degree, in canonical order (1-based)."""
    return tuple(
        AssocType(degree, i + 1, s) for i, s in enumerate(_shapes(degree))
    )


@functools.cache
def type_for_shape(shape) -> AssocType:
    degree = leaf_count(shape)
    return association_types(degree)[_shape_index(shape)]


@dataclass(frozen=True)
class TernaryMonomial:
    """A signed monomial: association type, leaf word, and a sign.

    ``canonical`` is True when the word satisfies the per-type ordering
    constraints, i.e. the monomial is the canonical representative of its
    orbit under the alternating symmetries.
    """

    type: AssocType
    word: tuple[int, ...]
    sign: int = 1
    canonical: bool = False

    def tree(self):
        it = iter(self.word)

        def build(s):
            if s == LEAF:
                return next(it)
            return tuple(build(c) for c in s)

        return build(self.type.shape)

    def __str__(self) -> str:
        return ("-" if self.sign < 0 else "") + tree_to_text(self.tree())


def monomial(type_: AssocType, word: Sequence[int], sign: int = 1) -> TernaryMonomial:
    return TernaryMonomial(type_, tuple(word), sign)


# ---------------------------------------------------------------------------
# trees with letters at the leaves


def is_leaf(tree) -> bool:
    """Leaves are variables (ints); anything that is not a tuple is a leaf."""
    return not isinstance(tree, tuple)


def tree_shape(tree):
    if is_leaf(tree):
        return LEAF
    return tuple(tree_shape(c) for c in tree)


def tree_word(tree) -> tuple[int, ...]:
    if is_leaf(tree):
        return (int(tree),)
    return tuple(x for c in tree for x in tree_word(c))


def tree_to_text(tree) -> str:
    if is_leaf(tree):
        return chr(ord("a") + int(tree))
    return "[" + ",".join(tree_to_text(c) for c in tree) + "]"


def parse_tree(text: str):
    """Parse nested ``[x,y,z]`` notation with single-letter variables."""
    pos = 0

    def parse():
        nonlocal pos
        if text[pos] == "[":
            pos += 1
            kids = [parse()]
            while text[pos] == ",":
                pos += 1
                kids.append(parse())
            if text[pos] != "]":
                raise ValueError(f"expected ']' at offset {pos} in {text!r}")
            pos += 1
            if len(kids) != 3:
                raise ValueError(f"bracket with {len(kids)} arguments in {text!r}")
            return tuple(kids)
        c = text[pos]
        if not c.isalpha():
            raise ValueError(f"unexpected {c!r} at offset {pos} in {text!r}")
        pos += 1
        return ord(c) - ord("a")

    text = text.replace(" ", "")
    tree = parse()
    if pos != len(text):
        raise ValueError(f"trailing input {text[pos:]!r}")
    return tree


def normalize_tree(tree) -> tuple[int, object]:
    """Canonical form of a letter tree: returns (sign, tree) or (0, None)."""
    if is_leaf(tree):
        return 1, int(tree)
    sign = 1
    kids = []
    for c in tree:
        s, cn = normalize_tree(c)
        if s == 0:
            return 0, None
        sign *= s
        kids.append(cn)
    keys = [(_shape_key(tree_shape(k)), tree_word(k)) for k in kids]
    if len(set(keys)) < 3:
        return 0, None
    order = sorted(range(3), key=lambda i: keys[i])
    inversions = sum(
        1 for a in range(3) for b in range(a + 1, 3) if order[a] > order[b]
    )
    if inversions % 2:
        sign = -sign
    return sign, tuple(kids[i] for i in order)


def normalize(m: TernaryMonomial) -> TernaryMonomial | None:
    """Canonical signed form of a monomial, or None when it is zero."""
    sign, tree = normalize_tree(m.tree())
    if sign == 0:
        return None
    return TernaryMonomial(
        type_for_shape(tree_shape(tree)), tree_word(tree), sign * m.sign, True
    )


# ---------------------------------------------------------------------------
# symmetries


@functools.cache
def symmetry_generators(degree: int) -> tuple[tuple[AssocType, tuple[int, ...]], ...]:
    """Generating symmetries of all association types of a degree.

    Each generator is a pair (type, word): the two-term identity saying that
    the identity-word monomial plus the monomial with that word is zero.  Per
    bracket the generators are the swaps of adjacent equal-shape arguments;
    bracket arguments contribute their own generators recursively, but only
    the first of a run of equal shapes (the others follow by conjugation).
    """
    out = []
    for t in association_types(degree):
        ident = list(range(degree))

        def walk(node_children, acc):
            # node_children: list of (start, size, shape); post-order recursion
            for idx, (start, size, shape) in enumerate(node_children):
                if shape == LEAF:
                    continue
                if idx > 0 and node_children[idx - 1][2] == shape:
                    continue  # conjugate of the first bracket in its run
                acc_child = []
                walk_children(shape, start, acc_child)
                acc.extend(acc_child)
            for (s1, z1, sh1), (s2, z2, sh2) in zip(node_children, node_children[1:]):
                if sh1 == sh2:
                    word = ident[:s1] + ident[s2 : s2 + z2] + ident[s1 + z1 : s2]
                    word += ident[s1 : s1 + z1] + ident[s2 + z2 :]
                    acc.append(tuple(word))

        def walk_children(shape, start, acc):
            kids = []
            pos = start
            for c in shape:
                kids.append((pos, leaf_count(c), c))
                pos += leaf_count(c)
            walk(kids, acc)

        acc: list[tuple[int, ...]] = []
        walk_children(t.shape, 0, acc)
        out.extend((t, w) for w in acc)
    return tuple(out)


# ---------------------------------------------------------------------------
# expansion into the free associative algebra


@functools.cache
def expansion_maps(type_: AssocType) -> tuple[np.ndarray, np.ndarray]:
    """Position maps of the full expansion of an association type.

    Returns (signs, maps) with signs of shape (m,) and maps of shape (m, n),
    m = 6**brackets: applying a map to a word gives one expansion term,
    ``word[maps[k]]``, with coefficient ``signs[k]``.
    """

    def rec(shape, start):
        if shape == LEAF:
            return [(1, [start])]
        kids = []
        pos = start
        for c in shape:
            kids.append(rec(c, pos))
            pos += leaf_count(c)
        out = []
        for combo in itertools.product(*kids):
            s = combo[0][0] * combo[1][0] * combo[2][0]
            blocks = [c[1] for c in combo]
            for perm, ps in _S3_SIGNED:
                out.append((s * ps, blocks[perm[0]] + blocks[perm[1]] + blocks[perm[2]]))
        return out

    terms = rec(type_.shape, 0)
    signs = np.array([t[0] for t in terms], dtype=np.int8)
    maps = np.array([t[1] for t in terms], dtype=np.int8)
    return signs, maps


def expand(m: TernaryMonomial) -> list[tuple[int, tuple[int, ...]]]:
    """All 6**brackets signed words of the expansion of a monomial."""
    signs, maps = expansion_maps(m.type)
    word = np.asarray(m.word, dtype=np.int8)
    words = word[maps]
    return [
        (int(m.sign * s), tuple(int(x) for x in w)) for s, w in zip(signs, words)
    ]


def expand_collected(m: TernaryMonomial) -> dict[tuple[int, ...], int]:
    """Expansion collected over the integers (words with net coefficients)."""
    acc: dict[tuple[int, ...], int] = {}
    for s, w in expand(m):
        c = acc.get(w, 0) + s
        if c:
            acc[w] = c
        else:
            acc.pop(w, None)
    return acc


# ---------------------------------------------------------------------------
# counting and enumerating canonical monomials


def count_multilinear(type_: AssocType, degree: int | None = None) -> int:
    """Number of canonical multilinear monomials of one association type.

    n! divided by the order of the symmetry group generated by the
    alternations: each run of k equal-shape bracket arguments contributes k!,
    and runs of leaves contribute the factorial of the run length.
    """
    if degree is not None and degree != type_.degree:
        raise ValueError("degree does not match the association type")
    n = type_.degree
    denom = 1
    for kids in type_.leaf_ranges():
        for shape, run in itertools.groupby(kids, key=lambda k: k[2]):
            denom *= math.factorial(len(list(run)))
    return math.factorial(n) // denom


def multidegree_total(delta: Sequence[int]) -> int:
    """Number of words with the given letter multiplicities (multinomial)."""
    n = sum(delta)
    out = math.factorial(n)
    for d in delta:
        out //= math.factorial(d)
    return out


@functools.cache
def _all_words(delta: tuple[int, ...]) -> np.ndarray:
    """All words of a multidegree in lexicographic order, one per row."""
    total = multidegree_total(delta)
    return unrank_words(np.arange(1, total + 1, dtype=np.int64), delta)


def rank_word(word: Sequence[int], delta: Sequence[int]) -> int:
    """1-based lexicographic index of a word among all words of its multidegree."""
    return int(rank_words(np.asarray(word, dtype=np.int8)[None, :], tuple(delta))[0])


def unrank_word(index: int, delta: Sequence[int]) -> tuple[int, ...]:
    """Inverse of rank_word (index is 1-based)."""
    w = unrank_words(np.array([index], dtype=np.int64), tuple(delta))[0]
    return tuple(int(x) for x in w)


def rank_words(words: np.ndarray, delta: tuple[int, ...]) -> np.ndarray:
    """Vectorized 1-based lexicographic ranks of words of one multidegree."""
    m, n = words.shape
    if n != sum(delta):
        raise ValueError("word length does not match the multidegree")
    counts = np.tile(np.asarray(delta, dtype=np.int64), (m, 1))
    perms = np.full(m, multidegree_total(delta), dtype=np.int64)
    rank = np.zeros(m, dtype=np.int64)
    rows = np.arange(m)
    for i in range(n):
        letter = words[:, i].astype(np.intp)
        remaining = n - i
        csum = np.cumsum(counts, axis=1)
        cl = counts[rows, letter]
        prefix = csum[rows, letter] - cl
        rank += perms * prefix // remaining
        if (cl <= 0).any():
            raise ValueError("word does not have the stated multidegree")
        perms = perms * cl // remaining
        counts[rows, letter] = cl - 1
    return rank + 1


def unrank_words(indices: np.ndarray, delta: tuple[int, ...]) -> np.ndarray:
    """Vectorized inverse of rank_words (indices are 1-based)."""
    total = multidegree_total(delta)
    idx = np.asarray(indices, dtype=np.int64) - 1
    if (idx < 0).any() or (idx >= total).any():
        raise ValueError("index out of range for the multidegree")
    m = idx.shape[0]
    n = sum(delta)
    nl = len(delta)
    counts = np.tile(np.asarray(delta, dtype=np.int64), (m, 1))
    perms = np.full(m, total, dtype=np.int64)
    out = np.zeros((m, n), dtype=np.int8)
    rank = idx.copy()
    for i in range(n):
        remaining = n - i
        chosen = np.full(m, -1, dtype=np.int64)
        acc = np.zeros(m, dtype=np.int64)
        for ell in range(nl):
            block = perms * counts[:, ell] // remaining
            take = (chosen < 0) & (rank < acc + block)
            chosen[take] = ell
            acc += np.where(chosen < 0, block, 0)
        rank -= acc
        out[:, i] = chosen
        perms = perms * counts[np.arange(m), chosen] // remaining
        counts[np.arange(m), chosen] -= 1
    return out


def _block_less(words: np.ndarray, left: Sequence[int], right: Sequence[int]) -> np.ndarray:
    """Strict lexicographic comparison of two position blocks, vectorized."""
    lt = np.zeros(words.shape[0], dtype=bool)
    eq = np.ones(words.shape[0], dtype=bool)
    for u, v in zip(left, right):
        lu = words[:, u]
        lv = words[:, v]
        lt |= eq & (lu < lv)
        eq &= lu == lv
    return lt


def canonical_word_mask(type_: AssocType, words: np.ndarray) -> np.ndarray:
    """Mask of words that are canonical and nonzero for one association type.

    Inside every bracket, adjacent equal-shape arguments must compare
    strictly: single letters by the variable order, equal-shape factors by
    the lexicographic order of their leaf words.
    """
    mask = np.ones(words.shape[0], dtype=bool)
    for kids in type_.leaf_ranges():
        for (s1, z1, sh1), (s2, z2, sh2) in zip(kids, kids[1:]):
            if sh1 != sh2:
                continue
            mask &= _block_less(words, range(s1, s1 + z1), range(s2, s2 + z2))
    return mask


@functools.cache
def _normalize_plan(type_: AssocType):
    """Equal-shape runs per node, post-order: the only moves normalization makes."""
    plan = []
    for kids in type_.leaf_ranges():
        for shape, group in itertools.groupby(kids, key=lambda k: k[2]):
            members = list(group)
            if len(members) > 1:
                plan.append([(start, size) for start, size, _ in members])
    return plan


def normalize_words(type_: AssocType, words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized canonical form of many words of one association type.

    Sorting a word into canonical form never changes the bracketing shape,
    only the order within runs of equal-shape arguments, so the type is
    invariant.  Returns (canonical words, signs); a zero sign marks a
    monomial that vanishes (two equal arguments in some bracket).
    """
    w = np.array(words, dtype=np.int8, copy=True)
    if w.ndim != 2 or w.shape[1] != type_.degree:
        raise ValueError("word array does not match the type degree")
    m = w.shape[0]
    sign = np.ones(m, dtype=np.int8)
    for run in _normalize_plan(type_):
        k = len(run)
        size = run[0][1]
        # bubble sort of the k blocks: adjacent compare-swap passes
        for _ in range(k - 1):
            for t in range(k - 1):
                (s1, z), (s2, _z2) = run[t], run[t + 1]
                b1 = w[:, s1 : s1 + z]
                b2 = w[:, s2 : s2 + z]
                if size == 1:
                    gt = b1[:, 0] > b2[:, 0]
                    eq = b1[:, 0] == b2[:, 0]
                else:
                    gt = np.zeros(m, dtype=bool)
                    eq = np.ones(m, dtype=bool)
                    for c in range(z):
                        gt |= eq & (b1[:, c] > b2[:, c])
                        eq &= b1[:, c] == b2[:, c]
                sign[eq] = 0
                if gt.any():
                    tmp = b1[gt].copy()
                    w[gt, s1 : s1 + z] = b2[gt]
                    w[gt, s2 : s2 + z] = tmp
                    sign[gt] = -sign[gt]
    return w, sign


def enumerate_nonassoc_multidegree(
    delta: Sequence[int], degree: int | None = None
) -> list[np.ndarray]:
    """Canonical nonzero words per association type for a multidegree.

    Returns one (count, n) array per type, rows in lexicographic order.
    """
    delta = tuple(delta)
    n = sum(delta)
    if degree is None:
        degree = n
    if degree != n:
        raise ValueError("multidegree does not sum to the degree")
    words = _all_words(delta)
    return [words[canonical_word_mask(t, words)] for t in association_types(degree)]
