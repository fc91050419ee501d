import numpy as np
import pytest

from tercom import mdpipeline as md
from tercom import ternary
from tercom.modlinalg import rcf
from tercom.ternary import multidegree_total

P = 1048573


@pytest.fixture(scope="module")
def small_store():
    # degree 7, two association types, letters a,a,b,b,c,d,e
    return md.build_expansion_store((2, 2, 1, 1, 1))


def dense_expansion_matrix(store):
    dense = np.zeros((store.nrows, store.ncols), dtype=np.int64)
    for c in range(store.ncols):
        signs, idx = store.column_terms(c)
        np.add.at(dense[:, c], idx - 1, signs)
    return dense


def test_store_shapes_small(small_store):
    store = small_store
    assert store.nrows == multidegree_total((2, 2, 1, 1, 1)) == 1260
    assert len(store.arrays) == 2
    for arr in store.arrays:
        assert arr.shape[1] == 6**3
        assert (np.abs(arr) >= 1).all() and (np.abs(arr) <= store.nrows).all()


def test_store_columns_match_direct_expansion(small_store):
    store = small_store
    rng = np.random.default_rng(0)
    types = ternary.association_types(7)
    for col in rng.choice(store.ncols, size=12, replace=False):
        t = store.column_type(int(col))
        word = store.column_word(int(col))
        signs, idx = store.column_terms(int(col))
        acc = {}
        for s, k in zip(signs, idx):
            acc[int(k)] = acc.get(int(k), 0) + int(s)
        m = ternary.monomial(types[t - 1], word)
        want = {}
        for s, w in ternary.expand(m):
            k = ternary.rank_word(w, (2, 2, 1, 1, 1))
            want[k] = want.get(k, 0) + s
        assert {k: v for k, v in acc.items() if v} == {
            k: v for k, v in want.items() if v
        }


def test_kernel_matches_dense_oracle(small_store):
    store = small_store
    kernel, state = md.kernel_of_expansion(
        store, P, chunk_count=35, chunk_size=36
    )
    dense = dense_expansion_matrix(store)
    _, direct_rank = rcf(dense % P, P)
    assert kernel.rank == direct_rank
    assert kernel.nullity == store.ncols - direct_rank
    # every lifted vector annihilates the dense matrix over the integers
    prod = dense @ kernel.lifted.T
    assert not prod.any()
    for v in kernel.lifted:
        assert md.verify_expansion_zero(v, store)


def test_verify_expansion_zero_rejects_single_monomial(small_store):
    store = small_store
    v = np.zeros(store.ncols, dtype=np.int64)
    v[0] = 1
    assert not md.verify_expansion_zero(v, store)


def test_linearize_specialize_roundtrip(small_store):
    store = small_store
    rng = np.random.default_rng(1)
    v = np.zeros(store.ncols, dtype=np.int64)
    cols = rng.choice(store.ncols, size=5, replace=False)
    v[cols] = rng.integers(1, 5, size=5)
    lin = md.linearize(v, store)
    # two repeated letters -> 4 terms per source term
    assert len(lin) == 4 * 5
    back = md.specialize(lin, store.delta)
    per_type = store.words_per_type
    offsets = store.offsets
    recovered = np.zeros_like(v)
    index = [
        {tuple(int(x) for x in w): i for i, w in enumerate(words)}
        for words in per_type
    ]
    for (tidx, word), c in back.items():
        recovered[offsets[tidx - 1] + index[tidx - 1][word]] = c
    assert (recovered == 4 * v).all()


def test_artifact_roundtrip(tmp_path, small_store):
    store = small_store
    rng = np.random.default_rng(2)
    v = np.zeros(store.ncols, dtype=np.int64)
    v[rng.choice(store.ncols, size=7, replace=False)] = rng.integers(-9, 10, size=7)
    path = tmp_path / "identity.tsv"
    md.write_identity_artifact(str(path), store, P, v)
    back = md.read_identity_artifact(str(path), store)
    assert (back == v).all()
    # tampering must be detected
    text = path.read_text().replace("\t1\t", "\t2\t", 1)
    path.write_text(text)
    with pytest.raises(ValueError):
        md.read_identity_artifact(str(path), store)


def test_chunk_layout_validation(small_store):
    with pytest.raises(ValueError):
        md.kernel_of_expansion(small_store, P, chunk_count=7, chunk_size=100)


def test_paper_monomial_counts():
    # column layout only; the full store build belongs to the heavy tier
    per_type = ternary.enumerate_nonassoc_multidegree(md.PAPER_DELTA)
    assert [w.shape[0] for w in per_type] == [
        6720, 1980, 4010, 180, 4010, 1190, 2000, 550,
    ]
    assert sum(w.shape[0] for w in per_type) == 20640
    assert multidegree_total(md.PAPER_DELTA) == 1247400


def test_paper_store_spot_columns():
    # expansions of a handful of degree-11 canonical monomials, checked
    # against the direct expand/rank route without building the full store
    types = ternary.association_types(11)
    per_type = ternary.enumerate_nonassoc_multidegree(md.PAPER_DELTA)
    t4 = types[3]
    words = per_type[3]
    signs, maps = ternary.expansion_maps(t4)
    for row in (0, 57, 179):
        expanded = words[row][maps]
        ranks = ternary.rank_words(expanded, md.PAPER_DELTA)
        assert ranks.shape == (7776,)
        assert ranks.min() >= 1 and ranks.max() <= 1247400
        m = ternary.monomial(t4, tuple(int(x) for x in words[row]))
        acc = {}
        for s, w in ternary.expand(m):
            k = ternary.rank_word(w, md.PAPER_DELTA)
            acc[k] = acc.get(k, 0) + s
        direct = {}
        for s, k in zip(signs, ranks):
            direct[int(k)] = direct.get(int(k), 0) + int(s)
        assert {k: v for k, v in acc.items() if v} == {
            k: v for k, v in direct.items() if v
        }
