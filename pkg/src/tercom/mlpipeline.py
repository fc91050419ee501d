"""Per-partition multilinear identity computations.

For each irreducible representation of S_n, identities of the ternary
commutator become rows over the type-indexed block columns: a polynomial
with group algebra components f_1..f_T is an identity exactly when
sum_t R(f_t) R(X_t) = 0, where X_t is the expansion of association type t.
Three nested row spaces are computed per partition:

  sym     rows coming from the alternating symmetries of the types,
  sym+lif rows adding the liftings of the lower-degree identity,
  all     the full identity space, read off a matrix that pairs each type
          block with its expansion representation.

Their ranks (s, sl, a) decide whether new identities exist (a > sl), and
for a partition with a new identity the distinguished row of the full space
is lifted to integers and rewritten in terms of group algebra matrix units.
"""
from __future__ import annotations

import functools
import os
from dataclasses import dataclass, field

import numpy as np

from . import liftgen, modlinalg, permgroup, ternary
from .modlinalg import (
    find_primitive_scale,
    leading_columns,
    nonzero_rows,
    rcf,
    row_space_equal,
)
from .permgroup import RepContext, rep_context
from .ternary import AssocType


@dataclass
class PartitionReport:
    lam: tuple[int, ...]
    d: int
    s: int
    sl: int
    a: int
    new_count: int
    row_space_match: bool | None

    def as_dict(self) -> dict:
        return {
            "partition": list(self.lam),
            "dimension": self.d,
            "sym": self.s,
            "sym_lif": self.sl,
            "all": self.a,
            "new": self.new_count,
            "row_space_match": self.row_space_match,
        }


@dataclass
class IdentityEntry:
    column: int  # 1-based over the 8 d-wide type blocks
    type_index: int  # 1-based association type
    tableau_index: int  # 1-based standard tableau index
    tableau_flat: tuple[int, ...]
    coefficient: int


@dataclass
class IdentityReport:
    lam: tuple[int, ...]
    d: int
    row_index: int  # 1-based row of allmat carrying the new leading 1
    leading_column: int  # 1-based
    new_leading_columns: tuple[int, ...]
    scale: int
    vector: np.ndarray  # integer row after symmetric lifting
    entries: list[IdentityEntry]

    def coefficients(self) -> list[int]:
        return sorted({e.coefficient for e in self.entries})


@dataclass
class GroupAlgebraSummand:
    coefficient: int
    type_index: int
    d_terms: tuple[tuple[int, int], ...]  # (coefficient, 1-based D_1k index)


@functools.cache
def degree_setup(degree: int):
    """Association types, symmetries, and lifting families for a degree."""
    types = ternary.association_types(degree)
    syms = ternary.symmetry_generators(degree)
    if degree == 11:
        lifts = liftgen.liftings_degree11()
    elif degree == 9:
        lifts = liftgen.liftings_degree9()
    else:
        lifts = ()
    return types, syms, lifts


class PartitionPipeline:
    """All representation-level matrices for one partition at one prime."""

    def __init__(self, lam, p: int, degree: int = 11, cache_dir: str | None = None):
        self.lam = tuple(lam)
        self.p = p
        self.degree = degree
        if sum(self.lam) != degree:
            raise ValueError("partition does not match the degree")
        if not modlinalg.is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.types, self.syms, self.lifts = degree_setup(degree)
        self.ctx: RepContext = rep_context(self.lam)
        self.d = self.ctx.d
        self.cache_dir = cache_dir
        self._rep_cache: dict = {}

    # -- representation building blocks

    def _rep_batch(self, perms: np.ndarray) -> np.ndarray:
        """R matrices for a batch of permutation words, mod p."""
        a = self.ctx.clifton_batch(perms).astype(np.int64)
        inv = self.ctx.a_iota_inv % self.p
        return inv[None, :, :] @ a % self.p

    @functools.cached_property
    def sym_blocks(self) -> list[tuple[int, np.ndarray]]:
        """Per symmetry generator: (type index, I + R_pi) mod p."""
        perms = np.array([w for (_t, w) in self.syms], dtype=np.int8)
        reps = self._rep_batch(perms)
        eye = np.eye(self.d, dtype=np.int64)
        return [
            (t.index, (eye + reps[i]) % self.p)
            for i, (t, _w) in enumerate(self.syms)
        ]

    @functools.cached_property
    def lift_blocks(self) -> list[dict[int, np.ndarray]]:
        """Per lifting family: type index -> representation of its terms."""
        out = []
        for fam in self.lifts:
            groups: dict[int, tuple[list, list]] = {}
            for (tidx, word), c in sorted(fam.terms.items()):
                groups.setdefault(tidx, ([], []))
                groups[tidx][0].append(word)
                groups[tidx][1].append(c)
            blocks = {}
            for tidx, (words, coeffs) in groups.items():
                perms = np.array(words, dtype=np.int8)
                mats = self.ctx.clifton_batch(perms).astype(np.int64)
                acc = np.tensordot(np.array(coeffs) % self.p, mats, axes=(0, 0)) % self.p
                blocks[tidx] = (self.ctx.a_iota_inv % self.p) @ acc % self.p
            out.append(blocks)
        return out

    @functools.cached_property
    def expansion_reps(self) -> list[np.ndarray]:
        """R(X_t) per association type, via the factored product form.

        The expansion of a bracket is, in the group algebra, the product of
        the expansions of its children followed by the signed sum of the six
        block rearrangements, so R(X_t) multiplies one small sum of R
        matrices per bracket instead of summing 6^brackets terms.
        """
        cached = self._load_cached("expansion")
        if cached is not None:
            return cached
        out = []
        for t in self.types:
            factors = _expansion_factors(t)
            prod = np.eye(self.d, dtype=np.int64)
            for signed_perms in factors:
                perms = np.array([w for (w, _s) in signed_perms], dtype=np.int8)
                signs = np.array([s for (_w, s) in signed_perms], dtype=np.int64)
                mats = self._rep_batch(perms)
                fac = np.tensordot(signs % self.p, mats, axes=(0, 0)) % self.p
                prod = prod @ fac % self.p
            out.append(prod)
        self._store_cached("expansion", out)
        return out

    def expansion_rep_direct(self, t: AssocType) -> np.ndarray:
        """R(X_t) by summing all 6^brackets signed terms (cross-check path)."""
        signs, maps = ternary.expansion_maps(t)
        return self.ctx.rep_sum(maps, signs.astype(np.int64), self.p)

    # -- the three matrices

    @functools.cached_property
    def sym_matrix(self) -> np.ndarray:
        d, tcount = self.d, len(self.types)
        out = np.zeros((len(self.syms) * d, tcount * d), dtype=np.int64)
        for i, (tidx, block) in enumerate(self.sym_blocks):
            out[i * d : (i + 1) * d, (tidx - 1) * d : tidx * d] = block
        return out

    @functools.cached_property
    def symlif_matrix(self) -> np.ndarray:
        d, tcount = self.d, len(self.types)
        rows = (len(self.syms) + len(self.lifts)) * d
        out = np.zeros((rows, tcount * d), dtype=np.int64)
        out[: len(self.syms) * d] = self.sym_matrix
        for i, blocks in enumerate(self.lift_blocks):
            r0 = (len(self.syms) + i) * d
            for tidx, block in blocks.items():
                out[r0 : r0 + d, (tidx - 1) * d : tidx * d] = block
        return out

    @functools.cached_property
    def s_rank(self) -> int:
        _, rank = rcf(self.sym_matrix, self.p)
        return rank

    @functools.cached_property
    def oldmat(self) -> np.ndarray:
        form, rank = rcf(self.symlif_matrix, self.p)
        return form[:rank]

    @property
    def sl_rank(self) -> int:
        return self.oldmat.shape[0]

    @functools.cached_property
    def allmat(self) -> np.ndarray:
        """Row canonical basis of the full identity space.

        The T d x (T+1) d matrix holds the expansion representation of each
        type in the first block column and identity blocks on the rest; rows
        of its canonical form whose pivots fall beyond the first block are
        exactly the identities, and their first-block entries vanish.
        """
        d, tcount = self.d, len(self.types)
        big = np.zeros((tcount * d, (tcount + 1) * d), dtype=np.int64)
        for i, rep in enumerate(self.expansion_reps):
            big[i * d : (i + 1) * d, :d] = rep
            big[i * d : (i + 1) * d, (i + 1) * d : (i + 2) * d] = np.eye(
                d, dtype=np.int64
            )
        form, rank = rcf(big, self.p)
        if rank != tcount * d:
            raise AssertionError("expansion matrix lost rank; corrupt state")
        pivots = leading_columns(form, self.p)
        keep = int(np.searchsorted(pivots, d))
        tail = form[keep:rank]
        if tail[:, :d].any():
            raise AssertionError("identity rows carry nonzero expansion part")
        return tail[:, d:]

    @property
    def a_rank(self) -> int:
        return self.allmat.shape[0]

    def report(self) -> PartitionReport:
        s, sl, a = self.s_rank, self.sl_rank, self.a_rank
        match = None
        if a == sl:
            match = row_space_equal(self.oldmat, self.allmat, self.p)
        return PartitionReport(self.lam, self.d, s, sl, a, a - sl, match)

    # -- extraction of an explicit new identity

    def new_leading_columns(self) -> np.ndarray:
        lead_all = leading_columns(self.allmat, self.p)
        lead_old = leading_columns(self.oldmat, self.p)
        return np.setdiff1d(lead_all, lead_old)

    def extract_new_identity(self, entry_bound: int = 5000) -> IdentityReport:
        new_cols = self.new_leading_columns()
        if new_cols.size == 0:
            raise ValueError(f"partition {self.lam} has no new identity")
        col = int(new_cols[0])
        lead_all = leading_columns(self.allmat, self.p)
        row_idx = int(np.searchsorted(lead_all, col))
        row = self.allmat[row_idx]
        lifted = find_primitive_scale(row, self.p, entry_bound=entry_bound)
        if lifted is None:
            raise ArithmeticError(
                "row did not lift to small integers; try a second prime"
            )
        vec, scale = lifted
        tabs = permgroup.standard_tableaux(self.lam)
        entries = []
        for c in np.nonzero(vec)[0]:
            tidx = int(c) // self.d + 1
            j = int(c) % self.d + 1
            entries.append(
                IdentityEntry(
                    column=int(c) + 1,
                    type_index=tidx,
                    tableau_index=j,
                    tableau_flat=tabs[j - 1].flattened(),
                    coefficient=int(vec[c]),
                )
            )
        return IdentityReport(
            lam=self.lam,
            d=self.d,
            row_index=row_idx + 1,
            leading_column=col + 1,
            new_leading_columns=tuple(int(c) + 1 for c in new_cols),
            scale=scale,
            vector=vec,
            entries=entries,
        )

    def emit_group_algebra_identity(
        self, report: IdentityReport
    ) -> list[GroupAlgebraSummand]:
        """Rewrite the lifted row as sum of c * [E_1j]_t with E in D form.

        E_1j expands through row j of the inverse of A_iota; for most j that
        row is a unit vector and E_1j = D_1j.
        """
        out = []
        inv = self.ctx.a_iota_inv
        for e in report.entries:
            j = e.tableau_index
            row = inv[j - 1]
            terms = tuple(
                (int(row[k]), int(k) + 1) for k in np.nonzero(row)[0]
            )
            out.append(GroupAlgebraSummand(e.coefficient, e.type_index, terms))
        return out

    def rep_row_of_d_combination(
        self, summands: list[GroupAlgebraSummand]
    ) -> np.ndarray:
        """Representation row vector of sum c [sum a_k D_1k]_t, row 1 slice.

        D_11 factorizes as the row symmetrizer times the signed column
        symmetrizer of the first tableau, so its representation is a short
        product of sums of R matrices; D_1k then right-multiplies by
        R(s_1k^{-1}).  The global d/n! scalar is dropped (scale invariant).
        """
        p, d = self.p, self.d
        d11 = self._rep_d11()
        out = np.zeros(len(self.types) * d, dtype=np.int64)
        tabs = self.ctx.tabs
        for s in summands:
            block = np.zeros((d, d), dtype=np.int64)
            for coeff, k in s.d_terms:
                sk = [0] * self.ctx.n
                for ri, rj in zip(tabs[0].rows, tabs[k - 1].rows):
                    for x, y in zip(ri, rj):
                        sk[x] = y
                r_inv = self.ctx.natural_rep(permgroup.inverse_perm(sk), p)
                block = (block + coeff % p * (d11 @ r_inv % p)) % p
            t0 = (s.type_index - 1) * d
            out[t0 : t0 + d] = (out[t0 : t0 + d] + s.coefficient % p * block[0]) % p
        return out

    def _rep_d11(self) -> np.ndarray:
        p, n = self.p, self.ctx.n
        t1 = self.ctx.tabs[0]
        prod = np.eye(self.d, dtype=np.int64)
        for row in t1.rows:
            prod = prod @ self._symmetrizer(list(row), signed=False) % p
        for c in range(self.lam[0]):
            col = [t1.rows[r][c] for r in range(len(self.lam)) if self.lam[r] > c]
            prod = prod @ self._symmetrizer(col, signed=True) % p
        return prod

    def _symmetrizer(self, members: list[int], signed: bool) -> np.ndarray:
        """R of the (anti)symmetrizer over a value set, as a factored product."""
        p, n = self.p, self.ctx.n
        out = np.eye(self.d, dtype=np.int64)
        for k in range(1, len(members)):
            ident = np.eye(self.d, dtype=np.int64)
            acc = ident.copy()
            for j in range(k):
                w = list(range(n))
                w[members[j]], w[members[k]] = w[members[k]], w[members[j]]
                r = self.ctx.natural_rep(w, p)
                acc = (acc - r) % p if signed else (acc + r) % p
            out = out @ acc % p
        return out

    def contains_row(self, matrix_rcf: np.ndarray, row: np.ndarray) -> bool:
        """Is the vector in the row space of a matrix in canonical form?"""
        residue = np.asarray(row, dtype=np.int64) % self.p
        for r in nonzero_rows(matrix_rcf):
            lead = int(np.nonzero(r)[0][0])
            if residue[lead]:
                residue = (residue - residue[lead] % self.p * r) % self.p
        return not residue.any()

    # -- cache plumbing

    def _cache_path(self, name: str) -> str | None:
        if not self.cache_dir:
            return None
        key = permgroup.cache_key(self.lam, self.p)
        return os.path.join(self.cache_dir, f"rep_{key}_{name}.bin")

    def _load_cached(self, name: str) -> list[np.ndarray] | None:
        path = self._cache_path(name)
        if not path or not os.path.exists(path):
            return None
        lam, p, mats = permgroup.load_matrix_set(path)
        if lam != self.lam or p != self.p:
            raise ValueError(f"cache file {path} does not match the request")
        return mats
    def _store_cached(self, name: str, mats: list[np.ndarray]):
        path = self._cache_path(name)
        if not path:
            return
        os.makedirs(self.cache_dir, exist_ok=True)
        permgroup.save_matrix_set(path, self.lam, self.p, mats)


@functools.cache
def _expansion_factors(t: AssocType):
    """Signed block-rearrangement permutations per bracket, innermost first."""
    n = t.degree
    factors = []

    def walk(shape, start):
        kids = []
        pos = start
        for c in shape:
            size = ternary.leaf_count(c)
            if c != ternary.LEAF:
                walk(c, pos)
            kids.append((pos, size))
            pos += size
        signed = []
        for perm, sign in ternary._S3_SIGNED:
            word = list(range(n))
            seg = []
            for q in perm:
                s0, z = kids[q]
                seg.extend(range(s0, s0 + z))
            word[start : start + (pos - start)] = seg
            signed.append((tuple(word), sign))
        factors.append(signed)

    walk(t.shape, 0)
    return tuple(factors)


# ---------------------------------------------------------------------------
# module-level operations


@functools.lru_cache(maxsize=32)
def _pipeline(lam: tuple[int, ...], p: int, degree: int, cache_dir) -> PartitionPipeline:
    return PartitionPipeline(lam, p, degree, cache_dir)


def pipeline(lam, p: int, degree: int = 11, cache_dir: str | None = None) -> PartitionPipeline:
    return _pipeline(tuple(lam), p, degree, cache_dir)


def sym_matrix(lam, p: int, degree: int = 11) -> modlinalg.ModMatrix:
    return modlinalg.ModMatrix(pipeline(lam, p, degree).sym_matrix, p)


def symlif_matrix(lam, p: int, degree: int = 11) -> modlinalg.ModMatrix:
    return modlinalg.ModMatrix(pipeline(lam, p, degree).symlif_matrix, p)


def all_matrix(lam, p: int, degree: int = 11) -> modlinalg.ModMatrix:
    return modlinalg.ModMatrix(pipeline(lam, p, degree).allmat, p)


def partition_report(lam, p: int, degree: int = 11) -> PartitionReport:
    return pipeline(lam, p, degree).report()


def extract_new_identity(lam, p: int, degree: int = 11) -> IdentityReport:
    return pipeline(lam, p, degree).extract_new_identity()


def emit_group_algebra_identity(report: IdentityReport, p: int) -> list[GroupAlgebraSummand]:
    return pipeline(report.lam, p, sum(report.lam)).emit_group_algebra_identity(report)


def identity_rows_in_space(lam, p: int, degree: int = 7) -> bool:
    """Do the representation rows of the degree-7 identity lie in the full
    identity space of the partition?"""
    pipe = pipeline(lam, p, degree)
    base = liftgen.identity_I()
    groups: dict[int, tuple[list, list]] = {}
    for (tidx, word), c in sorted(base.terms.items()):
        groups.setdefault(tidx, ([], []))
        groups[tidx][0].append(word)
        groups[tidx][1].append(c)
    d = pipe.d
    rows = np.zeros((d, len(pipe.types) * d), dtype=np.int64)
    for tidx, (words, coeffs) in groups.items():
        perms = np.array(words, dtype=np.int8)
        mats = pipe.ctx.clifton_batch(perms).astype(np.int64)
        acc = np.tensordot(np.array(coeffs) % p, mats, axes=(0, 0)) % p
        block = (pipe.ctx.a_iota_inv % p) @ acc % p
        rows[:, (tidx - 1) * d : tidx * d] = block
    return all(pipe.contains_row(pipe.allmat, row) for row in rows)
