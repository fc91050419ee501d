"""Symmetric group machinery: partitions, tableaux, the natural representation.

Permutations are words of images: a permutation maps position i to word[i],
0-based throughout.  Composition is ``(a*b)(i) = a(b(i))``, which in numpy is
``a[b]``.  A multilinear word of letters is identified with the permutation
whose word it is, so rearranging letters acts by right multiplication.

The natural (Clifton) representation of S_n: for a partition lam with
standard tableaux T_1..T_d in lexicographic order of their row-flattened
sequences, the matrix A_pi has (i,j) entry 0 when two values share a column
of T_i and a row of pi T_j, and otherwise the sign of the unique column
permutation of T_i moving every value to its row in pi T_j.  A_iota is
invertible (upper unitriangular in this tableau order) and
R_pi = A_iota^-1 A_pi is a homomorphism.
"""
from __future__ import annotations

import functools
import hashlib
import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

Part = tuple[int, ...]


# ---------------------------------------------------------------------------
# permutations


def identity_perm(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def compose(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    """(a*b)(i) = a(b(i))."""
    return tuple(a[x] for x in b)


def inverse_perm(a: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(a)
    for i, x in enumerate(a):
        inv[x] = i
    return tuple(inv)


def perm_sign(a: Sequence[int]) -> int:
    n = len(a)
    seen = [False] * n
    sign = 1
    for i in range(n):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = a[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass(frozen=True)
class Permutation:
    """A permutation of 0..n-1 in image form (word notation)."""

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"not a permutation: {self.images}")

    def __mul__(self, other: "Permutation") -> "Permutation":
        return Permutation(compose(self.images, other.images))

    def inverse(self) -> "Permutation":
        return Permutation(inverse_perm(self.images))

    @property
    def sign(self) -> int:
        return perm_sign(self.images)

    def __len__(self) -> int:
        return len(self.images)


# ---------------------------------------------------------------------------
# partitions and tableaux


def is_partition(lam: Sequence[int]) -> bool:
    lam = tuple(lam)
    return all(a >= b for a, b in zip(lam, lam[1:])) and all(x >= 1 for x in lam)


def partitions(n: int, max_part: int | None = None) -> Iterator[Part]:
    """Partitions of n in descending lexicographic order."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def dimension(lam: Sequence[int]) -> int:
    """Number of standard tableaux of a shape (hook length formula)."""
    lam = tuple(lam)
    if not is_partition(lam):
        raise ValueError(f"not a partition: {lam}")
    n = sum(lam)
    conj = [sum(1 for row in lam if row > c) for c in range(lam[0])]
    hooks = 1
    for r, row in enumerate(lam):
        for c in range(row):
            hooks *= (row - c) + (conj[c] - r) - 1
    return math.factorial(n) // hooks


@dataclass(frozen=True)
class StandardTableau:
    """A standard filling of a Young diagram with 0..n-1 (rows and columns increase)."""

    rows: tuple[tuple[int, ...], ...]

    @property
    def shape(self) -> Part:
        return tuple(len(r) for r in self.rows)

    @property
    def n(self) -> int:
        return sum(len(r) for r in self.rows)

    def flattened(self) -> tuple[int, ...]:
        """Row-flattened entries, 1-based as conventionally displayed."""
        return tuple(x + 1 for r in self.rows for x in r)

    def column(self, c: int) -> tuple[int, ...]:
        return tuple(r[c] for r in self.rows if len(r) > c)

    def __str__(self) -> str:
        return "/".join(" ".join(str(x + 1) for x in r) for r in self.rows)


@functools.lru_cache(maxsize=None)
def standard_tableaux(lam: Part) -> tuple[StandardTableau, ...]:
    """All standard tableaux of a shape, ascending by row-flattened sequence."""
    lam = tuple(lam)
    if not is_partition(lam):
        raise ValueError(f"not a partition: {lam}")
    n = sum(lam)
    grid = [[None] * row for row in lam]
    cells = [(r, c) for r, row in enumerate(lam) for c in range(row)]
    out: list[StandardTableau] = []

    def place(val: int):
        if val == n:
            out.append(StandardTableau(tuple(tuple(r) for r in grid)))
            return
        for r, c in cells:
            if grid[r][c] is not None:
                continue
            if c > 0 and grid[r][c - 1] is None:
                continue
            if r > 0 and grid[r - 1][c] is None:
                continue
            grid[r][c] = val
            place(val + 1)
            grid[r][c] = None

    place(0)
    out.sort(key=lambda t: t.flattened())
    assert len(out) == dimension(lam)
    return tuple(out)


# ---------------------------------------------------------------------------
# Clifton matrices and the natural representation


class RepContext:
    """Cached per-partition data for computing representation matrices."""

    def __init__(self, lam: Sequence[int]):
        self.lam = tuple(lam)
        self.n = sum(self.lam)
        self.tabs = standard_tableaux(self.lam)
        self.d = len(self.tabs)
        n, d = self.n, self.d
        self.row_of = np.zeros((d, n), dtype=np.int8)
        for j, t in enumerate(self.tabs):
            for r, row in enumerate(t.rows):
                for x in row:
                    self.row_of[j, x] = r
        # per tableau i: value pairs sharing a column, ordered by row
        self.col_pairs: list[np.ndarray] = []
        for t in self.tabs:
            pairs = []
            for c in range(self.lam[0]):
                col = t.column(c)
                pairs.extend(
                    (col[u], col[v]) for u in range(len(col)) for v in range(u + 1, len(col))
                )
            self.col_pairs.append(np.array(pairs, dtype=np.int8).reshape(-1, 2))
        self.a_iota = self.clifton(identity_perm(n))
        self.a_iota_inv = _unitriangular_inverse(self.a_iota)

    def clifton_batch(self, perms: np.ndarray) -> np.ndarray:
        """Clifton matrices A_pi for a batch of permutations, shape (m, d, d)."""
        perms = np.ascontiguousarray(np.asarray(perms, dtype=np.int8))
        m, n = perms.shape
        if n != self.n:
            raise ValueError("permutation length does not match the partition")
        d = self.d
        inv = np.empty_like(perms)
        rows_idx = np.repeat(np.arange(m), n)
        inv[rows_idx, perms.ravel().astype(np.intp)] = np.tile(
            np.arange(n, dtype=np.int8), m
        )
        # tgt[j, q, x] = row of value x in perms[q] applied to T_j
        tgt = self.row_of[:, inv.astype(np.intp)]
        out = np.zeros((m, d, d), dtype=np.int8)
        for i in range(d):
            pairs = self.col_pairs[i]
            valid = np.ones((d, m), dtype=bool)
            parity = np.zeros((d, m), dtype=bool)
            for u, v in pairs:
                a = tgt[:, :, u]
                b = tgt[:, :, v]
                valid &= a != b
                parity ^= a > b
            sign = np.where(parity, -1, 1).astype(np.int8)
            sign[~valid] = 0
            out[:, i, :] = sign.T
        return out

    def clifton(self, perm: Sequence[int]) -> np.ndarray:
        return self.clifton_batch(np.asarray(perm, dtype=np.int8)[None, :])[0].astype(
            np.int64
        )

    def natural_rep(self, perm: Sequence[int], p: int) -> np.ndarray:
        _check_modulus(p, self.n)
        return (self.a_iota_inv % p) @ (self.clifton(perm) % p) % p

    def rep_sum(self, perms: np.ndarray, coeffs: np.ndarray, p: int) -> np.ndarray:
        """Representation of sum(c_pi * pi) mod p, one inversion for the batch."""
        _check_modulus(p, self.n)
        acc = np.zeros((self.d, self.d), dtype=np.int64)
        chunk = max(1, 2**22 // max(self.d * self.d, 1))
        for lo in range(0, len(perms), chunk):
            block = self.clifton_batch(perms[lo : lo + chunk]).astype(np.int64)
            acc += np.tensordot(coeffs[lo : lo + chunk] % p, block, axes=(0, 0))
            acc %= p
        return (self.a_iota_inv % p) @ acc % p


@functools.lru_cache(maxsize=64)
def _context(lam: Part) -> RepContext:
    return RepContext(lam)


def rep_context(lam: Sequence[int]) -> RepContext:
    return _context(tuple(lam))


def _unitriangular_inverse(a: np.ndarray) -> np.ndarray:
    """Exact integer inverse of an upper unitriangular integer matrix."""
    d = a.shape[0]
    if not (np.diag(a) == 1).all() or np.tril(a, -1).any():
        raise ValueError("matrix is not upper unitriangular")
    inv = np.eye(d, dtype=np.int64)
    for i in range(d - 2, -1, -1):
        row = a[i, i + 1 :].astype(np.int64)
        inv[i, :] -= row @ inv[i + 1 :, :]
        inv[i, i] = 1
    return inv


def _check_modulus(p: int, n: int):
    if p <= n:
        raise ValueError(
            f"modulus {p} <= {n}: the group algebra of S_{n} is not semisimple"
        )


def clifton_matrix(lam: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """The integer Clifton matrix A_pi (entries in -1, 0, 1)."""
    return rep_context(lam).clifton(perm)


def natural_rep(lam: Sequence[int], perm: Sequence[int], p: int) -> np.ndarray:
    """R_pi = A_iota^-1 A_pi reduced mod p; R is a homomorphism and R_iota = I."""
    return rep_context(lam).natural_rep(perm, p)


# ---------------------------------------------------------------------------
# the group algebra


@dataclass
class GroupAlgebraElement:
    """A sparse rational combination of permutations, with a global scalar.

    The element represented is scalar * sum(terms[pi] * pi).  The scalar keeps
    factors like d/n! out of the per-term coefficients.
    """

    n: int
    terms: dict[tuple[int, ...], Fraction] = field(default_factory=dict)
    scalar: Fraction = Fraction(1)

    @staticmethod
    def from_perm(perm: Sequence[int], coeff=1) -> "GroupAlgebraElement":
        return GroupAlgebraElement(
            len(perm), {tuple(perm): Fraction(coeff)}, Fraction(1)
        )

    def effective_terms(self) -> dict[tuple[int, ...], Fraction]:
        return {g: self.scalar * c for g, c in self.terms.items() if c}

    def __add__(self, other: "GroupAlgebraElement") -> "GroupAlgebraElement":
        out = self.effective_terms()
        for g, c in other.effective_terms().items():
            s = out.get(g, Fraction(0)) + c
            if s:
                out[g] = s
            else:
                out.pop(g, None)
        return GroupAlgebraElement(self.n, out)

    def __neg__(self) -> "GroupAlgebraElement":
        return GroupAlgebraElement(self.n, dict(self.terms), -self.scalar)

    def __sub__(self, other: "GroupAlgebraElement") -> "GroupAlgebraElement":
        return self + (-other)

    def __mul__(self, other: "GroupAlgebraElement") -> "GroupAlgebraElement":
        out: dict[tuple[int, ...], Fraction] = {}
        for g, cg in self.terms.items():
            ga = np.asarray(g)
            for h, ch in other.terms.items():
                gh = tuple(int(x) for x in ga[np.asarray(h)])
                s = out.get(gh, Fraction(0)) + cg * ch
                if s:
                    out[gh] = s
                else:
                    out.pop(gh, None)
        return GroupAlgebraElement(self.n, out, self.scalar * other.scalar)

    def scale(self, c) -> "GroupAlgebraElement":
        return GroupAlgebraElement(self.n, dict(self.terms), self.scalar * Fraction(c))

    def drop_scalar(self) -> "GroupAlgebraElement":
        """Forget the global scalar (identity validity is scale invariant)."""
        return GroupAlgebraElement(self.n, dict(self.terms), Fraction(1))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupAlgebraElement):
            return NotImplemented
        return self.n == other.n and self.effective_terms() == other.effective_terms()

    def __len__(self) -> int:
        return len(self.terms)


def rep_of_element(lam: Sequence[int], f: GroupAlgebraElement, p: int) -> np.ndarray:
    """Matrix of a group algebra element in the natural representation mod p."""
    ctx = rep_context(lam)
    _check_modulus(p, ctx.n)
    eff = f.effective_terms()
    if not eff:
        return np.zeros((ctx.d, ctx.d), dtype=np.int64)
    perms = np.array(list(eff.keys()), dtype=np.int8)
    coeffs = np.array([_fraction_mod(c, p) for c in eff.values()], dtype=np.int64)
    return ctx.rep_sum(perms, coeffs, p)


def _fraction_mod(c: Fraction, p: int) -> int:
    den = c.denominator % p
    if den == 0:
        raise ZeroDivisionError(f"denominator of {c} vanishes mod {p}")
    return c.numerator % p * pow(den, -1, p) % p


# ---------------------------------------------------------------------------
# matrix units


def row_column_groups(tab: StandardTableau) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    rows = [tuple(r) for r in tab.rows]
    cols = [tab.column(c) for c in range(tab.shape[0])]
    return rows, cols


def _block_perms(blocks: list[tuple[int, ...]], n: int) -> Iterator[tuple[tuple[int, ...], int]]:
    """All permutations preserving each block, with their signs."""
    for images in itertools.product(*[itertools.permutations(b) for b in blocks]):
        w = list(range(n))
        sign = 1
        for orig, img in zip(blocks, images):
            for x, y in zip(orig, img):
                w[x] = y
            sign *= perm_sign([orig.index(v) for v in img])
        yield tuple(w), sign


def d_element(lam: Sequence[int], i: int, j: int) -> GroupAlgebraElement:
    """D_ij = D_ii s_ij^-1 with D_ii the signed row/column symmetrizer of T_i.

    Indices are 1-based.  The global scalar d/n! is kept in the scalar slot.
    """
    ctx = rep_context(lam)
    ti, tj = ctx.tabs[i - 1], ctx.tabs[j - 1]
    rows, cols = row_column_groups(ti)
    n = ctx.n
    s = list(range(n))
    for ri, rj in zip(ti.rows, tj.rows):
        for x, y in zip(ri, rj):
            s[x] = y
    s_inv = np.asarray(inverse_perm(s))
    terms: dict[tuple[int, ...], Fraction] = {}
    for sigma, _ in _block_perms(rows, n):
        sa = np.asarray(sigma)
        for tau, tsign in _block_perms(cols, n):
            g = tuple(int(x) for x in sa[np.asarray(tau)[s_inv]])
            terms[g] = terms.get(g, Fraction(0)) + tsign
    scalar = Fraction(ctx.d, math.factorial(n))
    return GroupAlgebraElement(n, {g: c for g, c in terms.items() if c}, scalar)


def matrix_unit_element(lam: Sequence[int], i: int, j: int) -> GroupAlgebraElement:
    """The group algebra element mapping to the (i,j) matrix unit (1-based).

    E_ij = sum_k a_jk D_ik where (a_jk) is the inverse of A_iota; it satisfies
    E_ij E_kl = delta_jk E_il and represents as the elementary matrix.
    """
    ctx = rep_context(lam)
    if not (1 <= i <= ctx.d and 1 <= j <= ctx.d):
        raise ValueError(f"matrix unit indices out of range for d={ctx.d}")
    inv_row = ctx.a_iota_inv[j - 1]
    terms: dict[tuple[int, ...], Fraction] = {}
    for k in np.nonzero(inv_row)[0]:
        dik = d_element(lam, i, int(k) + 1)
        a_jk = int(inv_row[k])
        for g, c in dik.terms.items():
            s = terms.get(g, Fraction(0)) + a_jk * c
            if s:
                terms[g] = s
            else:
                terms.pop(g, None)
    scalar = Fraction(ctx.d, math.factorial(ctx.n))
    return GroupAlgebraElement(ctx.n, terms, scalar)


# ---------------------------------------------------------------------------
# dense group algebra (fast exhaustive checks for small n)


@functools.lru_cache(maxsize=8)
def dense_algebra(n: int):
    """Permutation list, index map, and composition table for S_n (small n)."""
    perms = list(itertools.permutations(range(n)))
    index = {g: k for k, g in enumerate(perms)}
    table = np.empty((len(perms), len(perms)), dtype=np.int32)
    for a, ga in enumerate(perms):
        arr = np.asarray(ga)
        for b, gb in enumerate(perms):
            table[a, b] = index[tuple(int(x) for x in arr[np.asarray(gb)])]
    return perms, index, table


def to_dense(f: GroupAlgebraElement) -> np.ndarray:
    """Integer coefficient vector of an element whose terms are integral."""
    perms, index, _ = dense_algebra(f.n)
    out = np.zeros(len(perms), dtype=np.int64)
    for g, c in f.terms.items():
        if c.denominator != 1:
            raise ValueError("dense form requires integer term coefficients")
        out[index[g]] = int(c)
    return out


def dense_multiply(n: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _, _, table = dense_algebra(n)
    out = np.zeros_like(a)
    for gi in np.nonzero(a)[0]:
        np.add.at(out, table[gi], a[gi] * b)
    return out


# ---------------------------------------------------------------------------
# representation matrix cache files


def cache_key(lam: Sequence[int], p: int) -> str:
    text = ",".join(str(x) for x in lam) + f";{p}"
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def save_matrix_set(path: str, lam: Sequence[int], p: int, mats: list[np.ndarray]):
    """Write a set of equal-shape matrices: ASCII header, little-endian int32 body."""
    lam = tuple(lam)
    rows, cols = mats[0].shape
    with open(path, "wb") as fh:
        header = f"{sum(lam)} {len(lam)} {' '.join(map(str, lam))} {p} {len(mats)} {rows} {cols}\n"
        fh.write(header.encode("ascii"))
        for m in mats:
            fh.write(np.ascontiguousarray(m, dtype="<i4").tobytes())


def load_matrix_set(path: str) -> tuple[Part, int, list[np.ndarray]]:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        n, k = int(header[0]), int(header[1])
        lam = tuple(int(x) for x in header[2 : 2 + k])
        p, count, rows, cols = (int(x) for x in header[2 + k :])
        if sum(lam) != n:
            raise ValueError(f"corrupt cache header in {path}")
        body = np.frombuffer(fh.read(), dtype="<i4")
    if body.size != count * rows * cols:
        raise ValueError(f"corrupt cache body in {path}")
    mats = [
        body[i * rows * cols : (i + 1) * rows * cols].reshape(rows, cols).astype(np.int64)
        for i in range(count)
    ]
    return lam, p, mats
