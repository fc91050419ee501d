"""Dense exact linear algebra over Z/p.

Row canonical form (reduced row echelon form) is the workhorse: it is unique
per row space, so equality of row spaces is entrywise equality of the forms.
Two eliminators are provided: a plain per-pivot one, and a panel-blocked one
whose trailing updates run as float64 matrix products.  Products of residues
lifted to the symmetric range (-p/2, p/2] are exact in float64 as long as
inner_dim * (p/2)^2 < 2^53, so the BLAS path is exact and bit-reproducible;
the inner dimension is split when the bound requires it.

The streaming reducer keeps a resident row canonical form of everything seen
so far (stored as pivot columns plus the non-pivot remainder) and folds in
sparse row chunks, so matrices far too tall to materialize can be reduced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if p % q == 0:
            return p == q
    d = p - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(r - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


def _check_prime(p: int):
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")


# ---------------------------------------------------------------------------
# exact modular matrix products through float64 BLAS


def _lift_sym(a: np.ndarray, p: int) -> np.ndarray:
    """Residues to the symmetric range (-p/2, p/2], as float64."""
    h = (p - 1) // 2
    a = np.asarray(a, dtype=np.int64) % p
    return np.where(a > h, a - p, a).astype(np.float64)


def mm_exact(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """(a @ b) mod p, exactly, via float64 BLAS with inner-dimension splitting."""
    if a.shape[1] != b.shape[0]:
        raise ValueError("inner dimensions do not match")
    k = a.shape[1]
    if k == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    h = (p - 1) // 2
    kmax = max(1, int(2**53 // max(h * h, 1)))
    fa = _lift_sym(a, p)
    fb = _lift_sym(b, p)
    if k <= kmax:
        return np.rint(fa @ fb).astype(np.int64) % p
    acc = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for lo in range(0, k, kmax):
        acc += np.rint(fa[:, lo : lo + kmax] @ fb[lo : lo + kmax]).astype(np.int64)
        acc %= p
    return acc


def spmm_exact(s: sp.spmatrix, b: np.ndarray, p: int) -> np.ndarray:
    """(sparse @ dense) mod p, exactly, in int64 (safe for p < 2^21, nnz/row < 2^21)."""
    s64 = s.astype(np.int64)
    return np.asarray(s64 @ np.asarray(b, dtype=np.int64)) % p


# ---------------------------------------------------------------------------
# row canonical form


def rcf_basic(a: np.ndarray, p: int) -> tuple[np.ndarray, int]:
    """Per-pivot row canonical form; the reference implementation."""
    _check_prime(p)
    work = np.asarray(a, dtype=np.int64).copy() % p
    m, n = work.shape
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(work[r:, c])[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            work[[r, pr]] = work[[pr, r]]
        work[r] = work[r] * pow(int(work[r, c]), -1, p) % p
        f = work[:, c].copy()
        f[r] = 0
        idx = np.nonzero(f)[0]
        if idx.size:
            work[idx] = (work[idx] - f[idx, None] * work[r]) % p
        r += 1
    return work, r


def _inverse_mod(b: np.ndarray, p: int) -> np.ndarray:
    """Inverse of a small invertible matrix mod p via augmented elimination."""
    k = b.shape[0]
    aug = np.concatenate([b % p, np.eye(k, dtype=np.int64)], axis=1)
    form, rank = rcf_basic(aug, p)
    if rank < k or not (form[:, :k] == np.eye(k, dtype=np.int64)).all():
        raise ValueError("pivot block is singular; corrupt elimination state")
    return form[:, k:]


def _reduce_f64(x: np.ndarray, p: float):
    """In-place x mod p for float64 arrays of exact integers below 2^52.

    floor(x/p) from the float reciprocal can be off by one, so the result is
    clamped back into [0, p); this is several times faster than fmod.
    """
    q = np.floor(x * (1.0 / p))
    q *= p
    x -= q
    x[x < 0] += p
    x[x >= p] -= p


def rcf_blocked(
    a: np.ndarray, p: int, panel: int = 128
) -> tuple[np.ndarray, int, np.ndarray]:
    """Row canonical form via panel elimination with exact BLAS updates.

    Per panel of columns, a cheap row echelon pass on a copy locates the new
    pivot rows and columns; the global update is then pure matrix algebra:
    with T the inverse of the pivot block, the final pivot rows are T times
    the original ones, and every other row subtracts its pivot-column entries
    times those final rows.  The working matrix lives in float64, where all
    values stay below p and every product chain is bounded by panel * p^2,
    so the arithmetic is exact integer arithmetic (enforced below).

    Returns (rcf as int64, rank, pivot columns).  Zero rows sink to the
    bottom and pivot rows appear in pivot-column order: the output is the
    canonical form of the row space.
    """
    _check_prime(p)
    if panel * p * p >= 2**52:
        panel = max(1, int(2**52 // (p * p)))
    work = np.asarray(a, dtype=np.int64) % p
    work = work.astype(np.float64)
    m, n = work.shape
    r = 0
    stripe = max(1024, (1 << 25) // max(m, 1))
    for c0 in range(0, n, panel):
        if r == m:
            break
        c1 = min(c0 + panel, n)
        w = c1 - c0
        pan = work[:, c0:c1].copy()
        piv_local: list[int] = []
        for col in range(w):
            base = r + len(piv_local)
            if base == m:
                break
            colv = pan[base:, col]
            _reduce_f64(colv, p)  # clears deferred multiples of p before the search
            nz = np.nonzero(colv)[0]
            if nz.size == 0:
                continue
            pr = base + int(nz[0])
            if pr != base:
                tmp = pan[base].copy()
                pan[base] = pan[pr]
                pan[pr] = tmp
                tmp = work[base].copy()
                work[base] = work[pr]
                work[pr] = tmp
            prow = pan[base, col:]
            _reduce_f64(prow, p)
            prow *= pow(int(prow[0]), -1, p)
            _reduce_f64(prow, p)
            f = pan[base + 1 :, col]
            idx = np.nonzero(f)[0]
            if idx.size:
                # products stay below p^2 and at most `panel` of them pile
                # up per entry, so the reduction is deferred
                if idx.size * 3 < m - base:
                    rows = idx + base + 1
                    pan[rows, col:] -= f[idx, None] * prow
                else:
                    sub = pan[base + 1 :, col:]
                    sub -= f[:, None] * prow
            piv_local.append(col)
        k = len(piv_local)
        if k == 0:
            continue
        del pan
        pivc = np.array(piv_local, dtype=np.intp) + c0
        rows_new = slice(r, r + k)
        # work rows r..r+k-1 still hold the original pivot row content
        block = work[rows_new, :][:, pivc].astype(np.int64)
        t_inv = _inverse_mod(block, p).astype(np.float64)
        f_all = work[:, pivc].copy()
        f_all[rows_new] = 0.0
        live_mask = f_all.any(axis=1)
        live = np.nonzero(live_mask)[0]
        dense_update = live.size * 4 > 3 * m
        f_live = f_all if dense_update else np.ascontiguousarray(f_all[live])
        for s0 in range(c0, n, stripe):
            s1 = min(s0 + stripe, n)
            orig = work[rows_new, s0:s1].copy()
            new_vals = t_inv @ orig
            _reduce_f64(new_vals, p)
            work[rows_new, s0:s1] = new_vals
            if live.size == 0:
                continue
            if dense_update:
                tgt = work[:, s0:s1]
                tgt -= f_live @ new_vals
                _reduce_f64(tgt, p)
                work[rows_new, s0:s1] = new_vals
            else:
                tgt = work[live, s0:s1]
                tgt -= f_live @ new_vals
                _reduce_f64(tgt, p)
                work[live, s0:s1] = tgt
        r += k
    out = work.astype(np.int64)
    pivots = _pivot_columns(out, r)
    return out, r, pivots


def _pivot_columns(rcf_mat: np.ndarray, rank: int) -> np.ndarray:
    return np.array(
        [int(np.nonzero(rcf_mat[i])[0][0]) for i in range(rank)], dtype=np.int64
    )


def rcf(a: np.ndarray, p: int) -> tuple[np.ndarray, int]:
    """Row canonical form of an integer matrix mod p (dispatching by size)."""
    a = np.atleast_2d(np.asarray(a))
    if a.size == 0:
        return np.zeros_like(a, dtype=np.int64), 0
    if a.size <= 1 << 14:
        return rcf_basic(a, p)
    out, rank, _ = rcf_blocked(a, p)
    return out, rank


def is_rcf(a: np.ndarray, p: int) -> bool:
    """Check the row-canonical-form predicate."""
    a = np.asarray(a)
    last = -1
    seen_zero = False
    for i in range(a.shape[0]):
        nz = np.nonzero(a[i])[0]
        if nz.size == 0:
            seen_zero = True
            continue
        if seen_zero:
            return False
        c = int(nz[0])
        if c <= last or a[i, c] % p != 1:
            return False
        col = a[:, c] % p
        if np.count_nonzero(col) != 1:
            return False
        last = c
    return True


def leading_columns(a: np.ndarray, p: int) -> np.ndarray:
    """Sorted 0-based pivot columns of a matrix in row canonical form."""
    if not is_rcf(a, p):
        raise ValueError("matrix is not in row canonical form")
    out = []
    for i in range(a.shape[0]):
        nz = np.nonzero(a[i])[0]
        if nz.size:
            out.append(int(nz[0]))
    return np.array(sorted(out), dtype=np.int64)


def nonzero_rows(a: np.ndarray) -> np.ndarray:
    keep = [i for i in range(a.shape[0]) if a[i].any()]
    return a[keep]


def row_space_equal(a: np.ndarray, b: np.ndarray, p: int) -> bool:
    """Entrywise equality of row canonical forms (zero rows ignored)."""
    if not is_rcf(a, p) or not is_rcf(b, p):
        raise ValueError("row_space_equal expects matrices in row canonical form")
    na, nb = nonzero_rows(np.asarray(a) % p), nonzero_rows(np.asarray(b) % p)
    return na.shape == nb.shape and bool((na == nb).all())


def nullspace_canonical_basis(a: np.ndarray, p: int) -> np.ndarray:
    """Canonical right-nullspace basis: one vector per free column.

    The matrix is brought to row canonical form; each free (non-pivot) column
    in ascending order yields the vector with 1 there, the solved values at
    the pivot columns, and 0 at the other free columns.
    """
    a = np.atleast_2d(np.asarray(a))
    m, n = a.shape
    form, rank = rcf(a, p)
    pivots = _pivot_columns(form, rank)
    free = np.setdiff1d(np.arange(n), pivots)
    basis = np.zeros((free.size, n), dtype=np.int64)
    basis[np.arange(free.size), free] = 1
    if rank:
        basis[:, pivots] = (-form[:rank, :][:, free].T) % p
    return basis


# ---------------------------------------------------------------------------
# symmetric lifting and rational reconstruction


def symmetric_lift(v: np.ndarray, p: int) -> np.ndarray:
    """Residues to representatives in (-p/2, p/2], then divided by their gcd.

    The zero vector is returned unchanged (no gcd to cancel).
    """
    if p % 2 == 0:
        raise ValueError("symmetric lift requires an odd modulus")
    h = (p - 1) // 2
    a = np.asarray(v, dtype=np.int64) % p
    lifted = np.where(a > h, a - p, a)
    g = int(np.gcd.reduce(np.abs(lifted[lifted != 0]))) if lifted.any() else 0
    if g > 1:
        lifted = lifted // g
    return lifted


def rational_reconstruct(u: int, p: int, bound: int) -> tuple[int, int] | None:
    """Find n/d with u*d = n mod p, |n| <= bound, 0 < d <= bound, or None."""
    r0, r1 = p, u % p
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if r1 == 0 or abs(s1) > bound:
        return None
    n, d = r1, s1
    if d < 0:
        n, d = -n, -d
    if math.gcd(n if n >= 0 else -n, d) != 1:
        return None
    return n, d


def find_primitive_scale(
    v: np.ndarray, p: int, entry_bound: int, max_scale: int = 1 << 16
) -> tuple[np.ndarray, int] | None:
    """Scale a mod-p vector so its symmetric lift is a small integer vector.

    Searches the least s >= 1 for which every lifted entry of s*v stays within
    entry_bound, screening candidates on a subsample first.  Returns the
    gcd-normalized lift and s, or None if no scale works.
    """
    v = np.asarray(v, dtype=np.int64) % p
    nz = np.nonzero(v)[0]
    if nz.size == 0:
        return v.copy(), 1
    h = (p - 1) // 2
    step = max(1, nz.size // 32)
    sample = v[nz[::step][:32]]
    scales = np.arange(1, max_scale + 1, dtype=np.int64)
    lifted = scales[:, None] * sample[None, :] % p
    lifted = np.where(lifted > h, lifted - p, lifted)
    ok = (np.abs(lifted) <= entry_bound).all(axis=1)
    for s in scales[ok]:
        full = v * int(s) % p
        full = np.where(full > h, full - p, full)
        if (np.abs(full) <= entry_bound).all():
            g = int(np.gcd.reduce(np.abs(full[full != 0])))
            if g > 1:
                full = full // g
            return full, int(s)
    return None


# ---------------------------------------------------------------------------
# streaming chunked reduction


class IncrementalRCF:
    """Row canonical form of a stream of row chunks over Z/p.

    The state is the set of pivot columns plus the non-pivot remainder matrix
    U: row i of the virtual canonical form is the pivot-column unit vector
    e_{piv[i]} with U[i] scattered over the non-pivot columns.  Feeding a
    chunk reduces it against the state, row-reduces what is left, and folds
    any new pivots back into the old rows.
    """

    def __init__(self, ncols: int, p: int):
        _check_prime(p)
        self.ncols = ncols
        self.p = p
        self.piv = np.zeros(0, dtype=np.int64)
        self.npcols = np.arange(ncols, dtype=np.int64)
        self.u = np.zeros((0, ncols), dtype=np.int32)

    @property
    def rank(self) -> int:
        return int(self.piv.size)

    @property
    def nullity(self) -> int:
        return int(self.npcols.size)

    def add_dense(self, rows: np.ndarray):
        self.add_chunk(sp.csr_matrix(np.asarray(rows) % self.p))

    def add_chunk(self, chunk: sp.spmatrix):
        """Fold a sparse row chunk into the state, in bands of rows.

        Processing bands keeps the dense eliminations small and lets every
        band after the first reduce against the freshly grown pivot set; the
        bands widen once most columns have become pivots.
        """
        rows = chunk.shape[0]
        chunk = chunk.tocsr()
        lo = 0
        while lo < rows:
            band = 1024 if self.nullity > 4096 else 8192
            if rows - lo <= band:
                self._fold(chunk[lo:] if lo else chunk)
                break
            self._fold(chunk[lo : lo + band])
            lo += band

    def _fold(self, chunk: sp.spmatrix):
        p = self.p
        if chunk.shape[1] != self.ncols:
            raise ValueError("chunk column count mismatch")
        chunk = chunk.tocsc()
        if self.rank:
            lp = chunk[:, self.piv]
            lnp = chunk[:, self.npcols].toarray().astype(np.int64)
            corr = spmm_exact(lp.tocsr(), self.u, p)
            reduced = (lnp - corr) % p
        else:
            reduced = chunk.toarray().astype(np.int64) % p
        if not reduced.any():
            return
        sub, k, piv_local = rcf_blocked(reduced, p)
        if k == 0:
            return
        new_rows = sub[:k]
        keep = np.setdiff1d(np.arange(self.npcols.size), piv_local)
        if self.rank:
            fold = self.u[:, piv_local].astype(np.int64)
            unew = self.u[:, keep].astype(np.int64)
            if fold.any():
                unew = (unew - mm_exact(fold, new_rows[:, keep], p)) % p
        else:
            unew = np.zeros((0, keep.size), dtype=np.int64)
        self.u = np.vstack(
            [unew.astype(np.int32), new_rows[:, keep].astype(np.int32)]
        )
        self.piv = np.concatenate([self.piv, self.npcols[piv_local]])
        self.npcols = self.npcols[keep]
        assert self.piv.size + self.npcols.size == self.ncols

    def reduce_vector(self, v: np.ndarray) -> np.ndarray:
        """Residue of a vector against the row space, over the non-pivot columns."""
        v = np.asarray(v, dtype=np.int64) % self.p
        if self.rank == 0:
            return v[self.npcols]
        corr = mm_exact(v[self.piv][None, :], self.u, self.p)[0]
        return (v[self.npcols] - corr) % self.p

    def contains_vector(self, v: np.ndarray) -> bool:
        return not self.reduce_vector(v).any()

    def nullspace_basis(self) -> np.ndarray:
        """Canonical nullspace basis, one row per non-pivot column in order."""
        k = self.npcols.size
        basis = np.zeros((k, self.ncols), dtype=np.int64)
        basis[np.arange(k), self.npcols] = 1
        if self.rank:
            basis[:, self.piv] = (-self.u.astype(np.int64).T) % self.p
        return basis

    def to_dense(self) -> np.ndarray:
        """Materialized row canonical form (rank x ncols), rows by pivot column."""
        order = np.argsort(self.piv, kind="stable")
        out = np.zeros((self.rank, self.ncols), dtype=np.int64)
        rows = np.arange(self.rank)
        out[rows, self.piv[order]] = 1
        out[:, self.npcols] = self.u[order].astype(np.int64) % self.p
        return out


ChunkSource = Callable[[int], sp.spmatrix]


def chunked_reduce(
    source: ChunkSource, chunk_count: int, chunk_size: int, ncols: int, p: int,
    progress: Callable[[str], None] | None = None,
) -> IncrementalRCF:
    """Row canonical form of a tall virtual matrix delivered in row chunks.

    ``source(l)`` yields chunk l (0-based) as a sparse matrix of shape
    (chunk_size, ncols); the full matrix stacks the chunks in order.  The
    resident state never exceeds ncols rows, which would signal a corrupt
    source since the rank is at most ncols.
    """
    state = IncrementalRCF(ncols, p)
    for ell in range(chunk_count):
        chunk = source(ell)
        if chunk.shape != (chunk_size, ncols):
            raise ValueError(
                f"chunk {ell} has shape {chunk.shape}, expected {(chunk_size, ncols)}"
            )
        state.add_chunk(chunk)
        if state.rank > ncols:
            raise AssertionError("rank exceeded the column count")
        if progress is not None:
            progress(f"chunk {ell + 1}/{chunk_count}: rank {state.rank}")
    return state


# ---------------------------------------------------------------------------
# the public matrix wrapper and its text format


@dataclass
class ModMatrix:
    """A dense matrix over Z/p."""

    data: np.ndarray
    p: int

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data, dtype=np.int64)) % self.p

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def rcf(self) -> tuple["ModMatrix", int]:
        out, rank = rcf(self.data, self.p)
        return ModMatrix(out, self.p), rank

    def leading_columns(self) -> np.ndarray:
        return leading_columns(self.data, self.p)

    def nullspace_canonical_basis(self) -> np.ndarray:
        return nullspace_canonical_basis(self.data, self.p)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModMatrix):
            return NotImplemented
        return (
            self.p == other.p
            and self.data.shape == other.data.shape
            and bool((self.data == other.data).all())
        )

    def dump(self, path: str):
        with open(path, "w") as fh:
            fh.write(f"{self.rows} {self.cols} {self.p}\n")
            for row in self.data:
                fh.write(" ".join(str(int(x)) for x in row) + "\n")

    @staticmethod
    def load(path: str) -> "ModMatrix":
        with open(path) as fh:
            rows, cols, p = (int(x) for x in fh.readline().split())
            data = np.loadtxt(fh, dtype=np.int64, ndmin=2)
        if data.shape != (rows, cols):
            raise ValueError(f"matrix body does not match header in {path}")
        return ModMatrix(data, p)
