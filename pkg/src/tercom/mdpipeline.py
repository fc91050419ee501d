"""The non-multilinear identity search at a fixed multidegree.

All canonical nonassociative monomials of the multidegree are expanded into
the free associative algebra; the kernel of that expansion map is the space
of identities.  The matrix is far too tall to hold (1247400 rows for the
degree-11 run), so expansions are stored as signed word indices and reduced
chunk by chunk through a resident row canonical form.  The kernel vectors
are lifted to coprime integers, sorted by Euclidean length, and tested one
at a time against the span of the lifted lower-degree consequences; the
first vector that grows the rank is the new identity.  It is then verified
by exact integer re-expansion, linearized to a multilinear polynomial, and
pushed through the per-partition representation machinery as a final
cross-check.
"""
from __future__ import annotations

import functools
import hashlib
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from . import liftgen, ternary
from .liftgen import TernaryPolynomial
from .mlpipeline import PartitionPipeline, pipeline
from .modlinalg import (
    IncrementalRCF,
    chunked_reduce,
    find_primitive_scale,
    nonzero_rows,
    rcf,
)

PAPER_DELTA = (2, 2, 2, 2, 2, 1)
CHUNK_COUNT = 77
CHUNK_SIZE = 16200


@dataclass
class ExpansionStore:
    """Expansions of all canonical monomials of a multidegree.

    arrays[t] has one row per canonical monomial of type t+1, holding the
    signed 1-based lexicographic indices of its expansion words.
    """

    delta: tuple[int, ...]
    words_per_type: list[np.ndarray]
    arrays: list[np.ndarray]
    offsets: np.ndarray
    nrows: int

    @property
    def ncols(self) -> int:
        return int(self.offsets[-1])

    def column_type(self, col: int) -> int:
        """1-based association type of a 0-based column index."""
        return int(np.searchsorted(self.offsets, col, side="right"))

    def column_word(self, col: int) -> tuple[int, ...]:
        t = self.column_type(col)
        w = self.words_per_type[t - 1][col - int(self.offsets[t - 1])]
        return tuple(int(x) for x in w)

    def column_terms(self, col: int) -> tuple[np.ndarray, np.ndarray]:
        """(signs, 1-based word indices) of one column's expansion."""
        t = self.column_type(col)
        vals = self.arrays[t - 1][col - int(self.offsets[t - 1])]
        return np.sign(vals).astype(np.int64), np.abs(vals).astype(np.int64)

    def chunk_matrix(self, ell: int, chunk_size: int) -> sp.csr_matrix:
        """Sparse rows of the virtual expansion matrix for one chunk."""
        lo = ell * chunk_size + 1
        hi = (ell + 1) * chunk_size
        rows, cols, vals = [], [], []
        for ti, arr in enumerate(self.arrays):
            a = np.abs(arr)
            mask = (a >= lo) & (a <= hi)
            r, c = np.nonzero(mask)
            rows.append(a[r, c] - lo)
            cols.append(r + self.offsets[ti])
            vals.append(np.sign(arr[r, c]).astype(np.int32))
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(chunk_size, self.ncols),
            dtype=np.int32,
        )


def build_expansion_store(
    delta=PAPER_DELTA, progress: Callable[[str], None] | None = None
) -> ExpansionStore:
    """Expand every canonical monomial, storing signed word indices."""
    store = _build_expansion_store(tuple(delta))
    if progress:
        progress(f"expansion store ready ({store.ncols} columns)")
    return store


@functools.lru_cache(maxsize=1)
def _build_expansion_store(delta: tuple[int, ...]) -> ExpansionStore:
    degree = sum(delta)
    types = ternary.association_types(degree)
    per_type = ternary.enumerate_nonassoc_multidegree(delta)
    arrays = []
    for t, words in zip(types, per_type):
        signs, maps = ternary.expansion_maps(t)
        m = signs.shape[0]
        out = np.empty((words.shape[0], m), dtype=np.int32)
        block = max(1, (1 << 25) // max(m * degree, 1))
        for lo in range(0, words.shape[0], block):
            w = words[lo : lo + block]
            expanded = w[:, maps].reshape(-1, degree)
            ranks = ternary.rank_words(expanded, delta).reshape(-1, m)
            out[lo : lo + w.shape[0]] = ranks * signs[None, :].astype(np.int32)
        arrays.append(out)
    offsets = np.cumsum([0] + [w.shape[0] for w in per_type])
    return ExpansionStore(
        delta, per_type, arrays, offsets, ternary.multidegree_total(delta)
    )


@dataclass
class KernelBasis:
    """Canonical nullspace of the expansion map with integer lifts."""

    delta: tuple[int, ...]
    p: int
    rank: int
    basis_mod_p: np.ndarray  # (nullity, ncols)
    lifted: np.ndarray  # (nullity, ncols) coprime integers
    scales: np.ndarray
    square_lengths: list[int]

    @property
    def nullity(self) -> int:
        return self.basis_mod_p.shape[0]

    def nonzero_counts(self) -> np.ndarray:
        return (self.lifted != 0).sum(axis=1)

    def distinct_coefficient_counts(self) -> list[int]:
        return [len(set(v[v != 0].tolist())) for v in self.lifted]


def kernel_of_expansion(
    store: ExpansionStore,
    p: int,
    progress: Callable[[str], None] | None = None,
    chunk_count: int = CHUNK_COUNT,
    chunk_size: int = CHUNK_SIZE,
    lift_bound: int = 20000,
) -> tuple[KernelBasis, IncrementalRCF]:
    """Reduce the virtual expansion matrix and lift its nullspace.

    Every lifted vector is certified by re-expanding over the integers (one
    sparse product per chunk), so a bad lift or unlucky prime cannot slip
    through silently.
    """
    if chunk_count * chunk_size != store.nrows:
        raise ValueError("chunk layout does not cover the expansion rows")
    state = chunked_reduce(
        lambda ell: store.chunk_matrix(ell, chunk_size),
        chunk_count,
        chunk_size,
        store.ncols,
        p,
        progress=progress,
    )
    basis = state.nullspace_basis()
    lifted = np.zeros_like(basis)
    scales = np.zeros(basis.shape[0], dtype=np.int64)
    for i in range(basis.shape[0]):
        got = find_primitive_scale(basis[i], p, entry_bound=lift_bound)
        if got is None:
            raise ArithmeticError(
                f"kernel vector {i} did not lift below {lift_bound}; "
                "rerun with a different prime"
            )
        lifted[i], scales[i] = got
    if progress:
        progress(f"kernel: lifted {basis.shape[0]} vectors (max scale {scales.max()})")
    _certify_kernel_lifts(store, lifted, chunk_count, chunk_size, progress)
    sq = [int((v.astype(object) ** 2).sum()) for v in lifted]
    return (
        KernelBasis(store.delta, p, state.rank, basis, lifted, scales, sq),
        state,
    )


def _certify_kernel_lifts(
    store: ExpansionStore,
    lifted: np.ndarray,
    chunk_count: int,
    chunk_size: int,
    progress: Callable[[str], None] | None = None,
):
    """Exact integer check that every lifted vector expands to zero."""
    wt = np.ascontiguousarray(lifted.T)  # (ncols, nullity) small ints
    for ell in range(chunk_count):
        chunk = store.chunk_matrix(ell, chunk_size).astype(np.int64)
        prod = chunk @ wt
        if np.asarray(prod).any():
            raise ArithmeticError(
                f"a lifted kernel vector fails exact expansion on chunk {ell}"
            )
    if progress:
        progress("kernel: all lifted vectors re-expand to zero over the integers")


def consequence_space(
    delta, p: int
) -> tuple[np.ndarray, IncrementalRCF, int]:
    """Substituted lifting rows as vectors, their span, and its rank."""
    delta = tuple(delta)
    store_cols = ternary.enumerate_nonassoc_multidegree(delta)
    offsets = np.cumsum([0] + [w.shape[0] for w in store_cols])
    index = [
        {tuple(int(x) for x in w): i for i, w in enumerate(words)}
        for words in store_cols
    ]
    rows = liftgen.multidegree_substitutions(delta)
    mat = np.zeros((len(rows), int(offsets[-1])), dtype=np.int64)
    for r, poly in enumerate(rows):
        for (tidx, word), c in poly.terms.items():
            mat[r, offsets[tidx - 1] + index[tidx - 1][word]] = c % p
    state = IncrementalRCF(int(offsets[-1]), p)
    state.add_dense(mat)
    return mat, state, state.rank


@dataclass
class WinnerReport:
    sorted_position: int  # 1-based position in the length-sorted list
    original_position: int  # 1-based position in the canonical basis
    vector: np.ndarray
    square_length: int
    nonzero_count: int
    coefficients: list[int]
    types_used: list[int]


def find_new_vector(
    kernel: KernelBasis, cons_state: IncrementalRCF, store: ExpansionStore
) -> WinnerReport:
    """First length-sorted kernel vector outside the consequence span.

    Appending a vector that fails to grow the rank leaves the span unchanged,
    so all candidates reduce against the same state and the scan just takes
    the first nonzero residue, ties in length broken by original position.
    """
    order = np.lexsort(
        (np.arange(kernel.nullity), np.array(kernel.square_lengths, dtype=np.int64))
    )
    residues = _batch_reduce(cons_state, kernel.lifted % kernel.p)
    nonzero = residues.any(axis=1)
    for pos, idx in enumerate(order, start=1):
        if nonzero[idx]:
            vec = kernel.lifted[idx]
            cols = np.nonzero(vec)[0]
            return WinnerReport(
                sorted_position=pos,
                original_position=int(idx) + 1,
                vector=vec,
                square_length=kernel.square_lengths[idx],
                nonzero_count=int(cols.size),
                coefficients=sorted(set(int(x) for x in vec[cols])),
                types_used=sorted({store.column_type(int(c)) for c in cols}),
            )
    raise ArithmeticError("no kernel vector grows the consequence rank")


def _batch_reduce(state: IncrementalRCF, vectors: np.ndarray) -> np.ndarray:
    from .modlinalg import mm_exact

    vectors = np.asarray(vectors, dtype=np.int64) % state.p
    if state.rank == 0:
        return vectors[:, state.npcols]
    corr = mm_exact(vectors[:, state.piv], state.u.astype(np.int64), state.p)
    return (vectors[:, state.npcols] - corr) % state.p


def verify_expansion_zero(vector: np.ndarray, store: ExpansionStore) -> bool:
    """Exact integer re-expansion of a coefficient vector over the monomials."""
    acc = np.zeros(store.nrows + 1, dtype=np.int64)
    vector = np.asarray(vector, dtype=np.int64)
    for ti, arr in enumerate(store.arrays):
        lo, hi = int(store.offsets[ti]), int(store.offsets[ti + 1])
        cols = np.nonzero(vector[lo:hi])[0]
        if cols.size == 0:
            continue
        vals = arr[cols]
        coeffs = vector[lo + cols]
        contrib = np.sign(vals).astype(np.float64) * coeffs[:, None]
        acc += np.bincount(
            np.abs(vals).ravel(), weights=contrib.ravel(), minlength=store.nrows + 1
        ).astype(np.int64)
    return not acc.any()


def linearize(vector: np.ndarray, store: ExpansionStore) -> TernaryPolynomial:
    """Split every repeated variable pair into two fresh-variable terms.

    A letter occurring twice becomes (old, new) plus (new, old); with five
    repeated letters each source term yields 32 multilinear terms.
    """
    delta = store.delta
    degree = sum(delta)
    fresh = len(delta)
    repeated = [ell for ell, mult in enumerate(delta) if mult == 2]
    if any(mult > 2 for mult in delta):
        raise ValueError("linearization supports multiplicities at most 2")
    combos = 1 << len(repeated)
    types = ternary.association_types(degree)
    out = TernaryPolynomial(degree)
    vector = np.asarray(vector, dtype=np.int64)
    for ti, words in enumerate(store.words_per_type):
        lo, hi = int(store.offsets[ti]), int(store.offsets[ti + 1])
        cols = np.nonzero(vector[lo:hi])[0]
        if cols.size == 0:
            continue
        src = words[cols]
        coeffs = vector[lo + cols]
        m = src.shape[0]
        expanded = np.repeat(src, combos, axis=0).astype(np.int8)
        out_coeffs = np.repeat(coeffs, combos)
        choice = np.arange(combos)
        for bit, letter in enumerate(repeated):
            new_letter = fresh + bit
            sel = ((choice >> bit) & 1).astype(bool)
            pos = np.argsort(src != letter, axis=1, kind="stable")[:, :2]
            first = np.repeat(pos[:, 0], combos)
            second = np.repeat(pos[:, 1], combos)
            rows = np.arange(m * combos)
            tiled = np.tile(sel, m)
            expanded[rows[tiled], first[tiled]] = new_letter
            expanded[rows[~tiled], second[~tiled]] = new_letter
        canon, signs = ternary.normalize_words(types[ti], expanded)
        if not signs.all():
            raise AssertionError("linearized term vanished; corrupt source term")
        for word, s, c in zip(canon, signs, out_coeffs):
            key = (ti + 1, tuple(int(x) for x in word))
            v = out.terms.get(key, 0) + int(s) * int(c)
            if v:
                out.terms[key] = v
            else:
                out.terms.pop(key, None)
    return out


def specialize(poly: TernaryPolynomial, delta) -> dict[tuple[int, tuple[int, ...]], int]:
    """Undo a linearization by sending each fresh variable back to its twin."""
    delta = tuple(delta)
    repeated = [ell for ell, mult in enumerate(delta) if mult == 2]
    mapping = {len(delta) + i: ell for i, ell in enumerate(repeated)}
    back = poly.substitute({**{v: v for v in range(len(delta))}, **mapping})
    return dict(back.terms)


@dataclass
class RepresentationCheck:
    rank_with_identity: int
    rank_without_identity: int
    matches_allmat: bool


def representation_rank_check(
    lin: TernaryPolynomial, lam, p: int, progress: Callable[[str], None] | None = None
) -> RepresentationCheck:
    """Stack symmetries, liftings, and the linearized identity; compare spans.

    The stacked row canonical form must add exactly the one new row and then
    coincide entrywise with the full identity space of the partition.
    """
    pipe = pipeline(tuple(lam), p, degree=lin.degree)
    d = pipe.d
    groups: dict[int, tuple[list, list]] = {}
    for (tidx, word), c in sorted(lin.terms.items()):
        groups.setdefault(tidx, ([], []))
        groups[tidx][0].append(word)
        groups[tidx][1].append(c)
    lin_row = np.zeros((d, len(pipe.types) * d), dtype=np.int64)
    for tidx, (words, coeffs) in sorted(groups.items()):
        perms = np.array(words, dtype=np.int8)
        acc = np.zeros((d, d), dtype=np.int64)
        chunk = max(1, (1 << 27) // max(d * d, 1))
        for lo in range(0, len(words), chunk):
            mats = pipe.ctx.clifton_batch(perms[lo : lo + chunk]).astype(np.int64)
            cc = np.asarray(coeffs[lo : lo + chunk], dtype=np.int64) % p
            acc = (acc + np.tensordot(cc, mats, axes=(0, 0))) % p
        lin_row[:, (tidx - 1) * d : tidx * d] = (pipe.ctx.a_iota_inv % p) @ acc % p
        if progress:
            progress(f"representation row: type {tidx} ({len(words)} terms)")
    stacked = np.vstack([pipe.symlif_matrix, lin_row])
    form, rank = rcf(stacked, p)
    return RepresentationCheck(
        rank_with_identity=rank,
        rank_without_identity=pipe.sl_rank,
        matches_allmat=bool((nonzero_rows(form) == pipe.allmat).all()),
    )


# ---------------------------------------------------------------------------
# identity artifact file


def write_identity_artifact(
    path: str, store: ExpansionStore, p: int, vector: np.ndarray
):
    """One line per term: coefficient, 1-based type index, letter word."""
    vector = np.asarray(vector, dtype=np.int64)
    lines = []
    for col in np.nonzero(vector)[0]:
        t = store.column_type(int(col))
        word = "".join(chr(ord("a") + x) for x in store.column_word(int(col)))
        lines.append(f"{int(vector[col])}\t{t}\t{word}")
    body = "\n".join(lines) + "\n"
    digest = hashlib.sha256(body.encode()).hexdigest()
    with open(path, "w") as fh:
        fh.write(f"# multidegree {','.join(map(str, store.delta))}\n")
        fh.write(f"# prime {p}\n")
        fh.write(f"# terms {len(lines)}\n")
        fh.write(f"# sha256 {digest}\n")
        fh.write(body)


def read_identity_artifact(path: str, store: ExpansionStore) -> np.ndarray:
    """Recover the coefficient vector; the store supplies the column order."""
    index = [
        {tuple(int(x) for x in w): i for i, w in enumerate(words)}
        for words in store.words_per_type
    ]
    body_lines = []
    digest = None
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                parts = line[1:].split()
                if parts[0] == "sha256":
                    digest = parts[1]
                continue
            body_lines.append(line.rstrip("\n"))
    body = "\n".join(body_lines) + "\n"
    if digest is not None and hashlib.sha256(body.encode()).hexdigest() != digest:
        raise ValueError(f"artifact {path} fails its checksum")
    vector = np.zeros(store.ncols, dtype=np.int64)
    for line in body_lines:
        coeff, t, word = line.split("\t")
        letters = tuple(ord(ch) - ord("a") for ch in word)
        hit = index[int(t) - 1].get(letters)
        if hit is None:
            raise ValueError(f"artifact {path} names an unknown monomial {word!r}")
        vector[store.offsets[int(t) - 1] + hit] = int(coeff)
    return vector


# ---------------------------------------------------------------------------
# the full run


@dataclass
class MultidegreeResult:
    delta: tuple[int, ...]
    p: int
    per_type_counts: list[int]
    rank: int
    nullity: int
    consequence_rank: int
    kernel_stats: dict
    winner: WinnerReport
    expansion_zero: bool
    linear_term_count: int
    representation: RepresentationCheck
    store: ExpansionStore = field(repr=False)
    linearized: TernaryPolynomial = field(repr=False)


def run_multidegree(
    p: int,
    delta=PAPER_DELTA,
    lam=(2, 2, 2, 2, 2, 1),
    progress: Callable[[str], None] | None = None,
) -> MultidegreeResult:
    """All stages of the multidegree computation, with invariants enforced."""

    def say(msg: str):
        if progress:
            progress(msg)

    t0 = time.time()
    store = build_expansion_store(delta, progress)
    say(f"store built ({store.ncols} columns) at {time.time() - t0:.0f}s")
    kernel, _state = kernel_of_expansion(store, p, progress)
    say(
        f"rank={kernel.rank} nullity={kernel.nullity} at {time.time() - t0:.0f}s"
    )
    _rows, cons_state, cons_rank = consequence_space(delta, p)
    say(f"consequence rank={cons_rank} at {time.time() - t0:.0f}s")
    winner = find_new_vector(kernel, cons_state, store)
    say(
        f"winner: sorted {winner.sorted_position}, original {winner.original_position}, "
        f"{winner.nonzero_count} terms at {time.time() - t0:.0f}s"
    )
    zero = verify_expansion_zero(winner.vector, store)
    say(f"expansion-to-zero: {zero} at {time.time() - t0:.0f}s")
    lin = linearize(winner.vector, store)
    say(f"linearized terms: {len(lin)} at {time.time() - t0:.0f}s")
    rep = representation_rank_check(lin, lam, p, progress)
    say(
        f"rank={rep.rank_with_identity} (without: {rep.rank_without_identity}) "
        f"allmat-match={rep.matches_allmat} at {time.time() - t0:.0f}s"
    )
    nz = kernel.nonzero_counts()
    dist = kernel.distinct_coefficient_counts()
    stats = {
        "nonzero_min": int(nz.min()),
        "nonzero_max": int(nz.max()),
        "distinct_min": int(min(dist)),
        "distinct_max": int(max(dist)),
        "square_length_min": int(min(kernel.square_lengths)),
        "square_length_max": int(max(kernel.square_lengths)),
    }
    return MultidegreeResult(
        delta=tuple(delta),
        p=p,
        per_type_counts=[w.shape[0] for w in store.words_per_type],
        rank=kernel.rank,
        nullity=kernel.nullity,
        consequence_rank=cons_rank,
        kernel_stats=stats,
        winner=winner,
        expansion_zero=zero,
        linear_term_count=len(lin),
        representation=rep,
        store=store,
        linearized=lin,
    )
