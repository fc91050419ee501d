import numpy as np
import pytest

from tercom.mlpipeline import (
    PartitionPipeline,
    all_matrix,
    identity_rows_in_space,
    partition_report,
    pipeline,
    sym_matrix,
    symlif_matrix,
)
from tercom.modlinalg import is_rcf
from tercom.permgroup import partitions

P = 1048573


def test_degree5_no_new_identities():
    for lam in partitions(5):
        rep = partition_report(lam, P, degree=5)
        assert rep.new_count == 0
        assert rep.row_space_match is True
        assert rep.a >= rep.sl >= rep.s


def test_degree7_identity_appears():
    total = 0
    for lam in partitions(7):
        rep = partition_report(lam, P, degree=7)
        assert rep.a >= rep.sl >= rep.s
        total += rep.new_count * rep.d
    assert total > 0


def test_degree7_identity_rows_contained():
    for lam in partitions(7):
        assert identity_rows_in_space(lam, P, degree=7)


def test_expansion_rep_factored_equals_direct_small_degrees():
    for degree in (3, 5, 7):
        for lam in partitions(degree):
            pipe = pipeline(lam, P, degree=degree)
            for t, rep in zip(pipe.types, pipe.expansion_reps):
                direct = pipe.expansion_rep_direct(t)
                assert (rep == direct).all(), (degree, lam, t.index)


def test_expansion_rep_factored_equals_direct_degree11_small():
    for lam in [(11,), (10, 1), (2,) + (1,) * 9, (1,) * 11]:
        pipe = pipeline(lam, P, degree=11)
        for t, rep in zip(pipe.types, pipe.expansion_reps):
            direct = pipe.expansion_rep_direct(t)
            assert (rep == direct).all(), (lam, t.index)


def test_degree11_fast_rows_match_published_table():
    expected = {
        (11,): (8, 8, 8, 0),
        (10, 1): (80, 80, 80, 0),
        (2,) + (1,) * 9: (57, 76, 76, 0),
        (1,) * 11: (0, 7, 7, 0),
    }
    for lam, want in expected.items():
        rep = partition_report(lam, P, degree=11)
        assert (rep.s, rep.sl, rep.a, rep.new_count) == want
        assert rep.row_space_match is True


def test_matrix_shapes_and_wrappers():
    lam = (2,) + (1,) * 9
    d = 10
    sym = sym_matrix(lam, P)
    assert (sym.rows, sym.cols) == (43 * d, 8 * d)
    symlif = symlif_matrix(lam, P)
    assert (symlif.rows, symlif.cols) == (51 * d, 8 * d)
    allm = all_matrix(lam, P)
    assert allm.cols == 8 * d
    assert allm.rows == 76
    assert is_rcf(allm.data, P)


def test_extract_requires_new_identity():
    pipe = pipeline((10, 1), P, degree=11)
    with pytest.raises(ValueError):
        pipe.extract_new_identity()


def test_oldmat_is_canonical_and_nested():
    pipe = pipeline((2,) + (1,) * 9, P, degree=11)
    assert is_rcf(pipe.oldmat, P)
    # every oldmat row lies in the full identity space
    for row in pipe.oldmat:
        assert pipe.contains_row(pipe.allmat, row)


def test_partition_degree_mismatch_rejected():
    with pytest.raises(ValueError):
        PartitionPipeline((3, 2), P, degree=7)


def test_rep_cache_roundtrip(tmp_path):
    lam = (2,) + (1,) * 9
    pipe1 = PartitionPipeline(lam, P, 11, cache_dir=str(tmp_path))
    reps1 = [r.copy() for r in pipe1.expansion_reps]
    pipe2 = PartitionPipeline(lam, P, 11, cache_dir=str(tmp_path))
    reps2 = pipe2.expansion_reps
    assert all((a == b).all() for a, b in zip(reps1, reps2))
    # and identical to the uncached computation
    pipe3 = PartitionPipeline(lam, P, 11)
    assert all((a == b).all() for a, b in zip(reps1, pipe3.expansion_reps))
