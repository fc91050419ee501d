"""The degree-7 identity of the ternary commutator and its liftings.

The identity, in seven variables a..g, is the signed sum over all
rearrangements of b..g of two bracketings; it collects to 120 canonical
terms and expands to zero in the free associative algebra.  Substituting a
bracket for a variable, or embedding the whole identity in a bracket, lifts
it to higher degree: three consequence families in degree 9, eight in
degree 11.  At a fixed multidegree, each family also yields finitely many
variable substitutions whose expansions stay inside that multidegree.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import ternary
from .permgroup import perm_sign
from .ternary import TernaryMonomial, normalize_tree, tree_shape, tree_word, type_for_shape


@dataclass
class TernaryPolynomial:
    """Integer combination of canonical monomials, keyed by (type index, word)."""

    degree: int
    terms: dict[tuple[int, tuple[int, ...]], int] = field(default_factory=dict)

    def add_tree(self, tree, coeff: int = 1):
        sign, canon = normalize_tree(tree)
        if sign == 0:
            return
        t = type_for_shape(tree_shape(canon))
        key = (t.index, tree_word(canon))
        c = self.terms.get(key, 0) + sign * coeff
        if c:
            self.terms[key] = c
        else:
            self.terms.pop(key, None)

    def monomials(self) -> list[tuple[int, TernaryMonomial]]:
        out = []
        for (tidx, word), c in sorted(self.terms.items()):
            t = ternary.association_types(self.degree)[tidx - 1]
            out.append((c, TernaryMonomial(t, word, 1, True)))
        return out

    def _expansion_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        words = []
        coeffs = []
        for (tidx, word), c in self.terms.items():
            t = ternary.association_types(self.degree)[tidx - 1]
            signs, maps = ternary.expansion_maps(t)
            words.append(np.asarray(word, dtype=np.int8)[maps])
            coeffs.append(signs.astype(np.int64) * c)
        if not words:
            return np.zeros((0, self.degree), dtype=np.int8), np.zeros(0, np.int64)
        return np.concatenate(words), np.concatenate(coeffs)

    def _grouped_expansion(self):
        words, coeffs = self._expansion_arrays()
        if not words.size:
            return words, np.zeros(0, dtype=np.int64)
        delta = tuple(np.bincount(words[0], minlength=int(words.max()) + 1))
        ranks = ternary.rank_words(words, delta)
        order = np.argsort(ranks, kind="stable")
        sr = ranks[order]
        starts = np.concatenate([[0], np.nonzero(np.diff(sr))[0] + 1])
        sums = np.add.reduceat(coeffs[order], starts)
        return words[order[starts]], sums

    def expand_collected(self) -> dict[tuple[int, ...], int]:
        reps, sums = self._grouped_expansion()
        return {
            tuple(int(x) for x in reps[i]): int(sums[i])
            for i in np.nonzero(sums)[0]
        }

    def expands_to_zero(self) -> bool:
        reps, sums = self._grouped_expansion()
        return not sums.any()

    def substitute(self, mapping: dict[int, object]) -> "TernaryPolynomial":
        """Replace variables by letters or bracket trees, then recollect."""

        def graft(tree):
            if ternary.is_leaf(tree):
                return mapping.get(int(tree), int(tree))
            return tuple(graft(c) for c in tree)

        degree = None
        out = None
        for (tidx, word), c in sorted(self.terms.items()):
            t = ternary.association_types(self.degree)[tidx - 1]
            tree = graft(TernaryMonomial(t, word).tree())
            if out is None:
                degree = len(tree_word(tree))
                out = TernaryPolynomial(degree)
            out.add_tree(tree, c)
        return out if out is not None else TernaryPolynomial(self.degree)

    def embed(self, extra: tuple) -> "TernaryPolynomial":
        """Wrap every term in a bracket whose other arguments are fresh
        variables or bracket trees."""
        added = sum(len(tree_word(e)) for e in extra)
        out = TernaryPolynomial(self.degree + added)
        for (tidx, word), c in sorted(self.terms.items()):
            t = ternary.association_types(self.degree)[tidx - 1]
            out.add_tree((TernaryMonomial(t, word).tree(),) + tuple(extra), c)
        return out

    def __len__(self) -> int:
        return len(self.terms)


@functools.cache
def identity_I() -> TernaryPolynomial:
    """The 120-term degree-7 identity in a..g (alternating in b..g)."""
    out = TernaryPolynomial(7)
    a = 0
    for sigma in itertools.permutations(range(1, 7)):
        s = perm_sign([x - 1 for x in sigma])
        b, c, d, e, f, g = sigma
        out.add_tree((((b, c, d), a, e), f, g), s)
        out.add_tree(((a, b, c), (d, e, f), g), s)
    return out


@functools.cache
def liftings_degree9() -> tuple[TernaryPolynomial, ...]:
    """Consequences of the degree-7 identity in degree 9: substitute a bracket
    for the first argument, for one alternating argument, or embed."""
    base = identity_I()
    h, i = 7, 8
    return (
        base.substitute({0: (0, h, i)}),
        base.substitute({1: (1, h, i)}),
        base.embed((h, i)),
    )


@functools.cache
def liftings_degree11() -> tuple[TernaryPolynomial, ...]:
    """The eight consequence families in degree 11, in conventional order."""
    base = identity_I()
    h, i, j, k = 7, 8, 9, 10
    return (
        base.substitute({0: ((0, j, k), h, i)}),
        base.substitute({0: (0, h, i), 1: (1, j, k)}),
        base.substitute({0: (0, h, i)}).embed((j, k)),
        base.substitute({1: ((1, j, k), h, i)}),
        base.substitute({1: (1, h, i), 2: (2, j, k)}),
        base.substitute({1: (1, h, i)}).embed((j, k)),
        base.embed(((7, 9, 10), 8)),
        base.embed((h, i)).embed((j, k)),
    )


def structural_signature(poly: TernaryPolynomial):
    """Relabel-invariant fingerprint: per-term first-occurrence patterns."""
    sigs = []
    for (tidx, word), _ in poly.terms.items():
        seen: dict[int, int] = {}
        pattern = tuple(seen.setdefault(x, len(seen)) for x in word)
        sigs.append((tidx, pattern))
    return (poly.degree, tuple(sorted(sigs)))


def lifting_closure_signatures() -> set:
    """Signatures of all one-step degree-11 liftings of the degree-9
    families, used to confirm that exactly eight classes exist."""
    out = set()
    for base9 in liftings_degree9():
        n9 = base9.degree
        for rep in _variable_classes(base9):
            sub = base9.substitute({rep: (rep, n9, n9 + 1)})
            out.add(structural_signature(sub))
        out.add(structural_signature(base9.embed((n9, n9 + 1))))
    return out


def _variable_classes(poly: TernaryPolynomial) -> list[int]:
    """One representative variable per symmetry class under sign-relabelings."""
    n = poly.degree
    reps = []
    seen: set[frozenset] = set()
    for v in range(n):
        orbit = {v}
        for w in range(n):
            if w == v:
                continue
            swapped = TernaryPolynomial(n)
            for (tidx, word), c in poly.terms.items():
                word2 = tuple(w if x == v else v if x == w else x for x in word)
                t = ternary.association_types(n)[tidx - 1]
                swapped.add_tree(TernaryMonomial(t, word2).tree(), c)
            if swapped.terms == poly.terms or swapped.terms == {
                k: -c for k, c in poly.terms.items()
            }:
                orbit.add(w)
        key = frozenset(orbit)
        if key not in seen:
            seen.add(key)
            reps.append(v)
    return reps


# ---------------------------------------------------------------------------
# multidegree substitutions


# Per family: ordered constraint chains on the 11 variable slots (strict <
# within each chain in the letter order), plus optional block comparisons
# between equal-shape bracket units both sitting in alternating positions.
# Variables: 0..6 are a..g of the base identity, 7,8 the first extra pair,
# 9,10 the second.
_FAMILY_CONSTRAINTS: list[dict] = [
    {"chains": [(0, 9, 10), (7, 8), (1, 2, 3, 4, 5, 6)], "blocks": []},
    {"chains": [(0, 7, 8), (1, 9, 10), (2, 3, 4, 5, 6)], "blocks": []},
    {"chains": [(0, 7, 8), (1, 2, 3, 4, 5, 6), (9, 10)], "blocks": []},
    {"chains": [(1, 9, 10), (7, 8), (2, 3, 4, 5, 6)], "blocks": []},
    {
        "chains": [(1, 7, 8), (2, 9, 10), (3, 4, 5, 6)],
        "blocks": [((1, 7, 8), (2, 9, 10))],
    },
    {"chains": [(1, 7, 8), (2, 3, 4, 5, 6), (9, 10)], "blocks": []},
    {"chains": [(1, 2, 3, 4, 5, 6), (7, 9, 10)], "blocks": []},
    {"chains": [(1, 2, 3, 4, 5, 6), (7, 8), (9, 10)], "blocks": []},
]


def substitution_assignments(delta: tuple[int, ...]) -> list[np.ndarray]:
    """Letter assignments per degree-11 family at a multidegree.

    Each row assigns a letter to each of the 11 variables of the lifted
    identity; the constraints quotient out the known alternations, so these
    assignments parameterize independent substituted rows.
    """
    words = ternary._all_words(delta)
    out = []
    for spec in _FAMILY_CONSTRAINTS:
        mask = np.ones(words.shape[0], dtype=bool)
        for chain in spec["chains"]:
            for u, v in zip(chain, chain[1:]):
                mask &= words[:, u] < words[:, v]
        for left, right in spec["blocks"]:
            mask &= ternary._block_less(words, left, right)
        out.append(words[mask])
    return out


@functools.lru_cache(maxsize=4)
def _multidegree_substitutions_cached(delta: tuple[int, ...]) -> tuple[TernaryPolynomial, ...]:
    families = liftings_degree11()
    types = ternary.association_types(11)
    rows = []
    for fam, assigns in zip(families, substitution_assignments(delta)):
        fam_rows = [TernaryPolynomial(11) for _ in range(assigns.shape[0])]
        if assigns.shape[0] == 0:
            continue
        for (tidx, var_word), c in sorted(fam.terms.items()):
            letters = assigns[:, var_word]
            canon, signs = ternary.normalize_words(types[tidx - 1], letters)
            for i in np.nonzero(signs)[0]:
                key = (tidx, tuple(int(x) for x in canon[i]))
                terms = fam_rows[i].terms
                v = terms.get(key, 0) + c * int(signs[i])
                if v:
                    terms[key] = v
                else:
                    terms.pop(key, None)
        rows.extend(fam_rows)
    return tuple(rows)


def multidegree_substitutions(delta) -> list[TernaryPolynomial]:
    """All substituted consequence rows at a multidegree, in family order."""
    return list(_multidegree_substitutions_cached(tuple(delta)))
