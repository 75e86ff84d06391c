import itertools
import logging

import numpy as np
import pytest

from psdmm import (MatrixF, Modulus, make_rng, mds_plan, mds_plan_large_field, random_matrix,
                   replicated_plan, sample_distinct_points)
from psdmm.errors import (ConfigInvalid, DimensionMismatch, NonMdsExponents, NotEnoughResponses,
                          SingularSystem)
from psdmm.linalg import partition
from psdmm.mds import (MdsParams, MdsQuery, check_storage_exponents, encode_storage,
                       make_mds_queries, mds_decode, mds_server_compute, reconstruct_library,
                       storage_manifest, storage_matrix)
from psdmm.replicated import ServerResponse, encode_share

from conftest import BIG_Q

MOD = Modulus(BIG_Q)


def _setup(plan, L, N, seed, q=BIG_Q):
    rng = make_rng(seed, "mds")
    A = random_matrix(2 * plan.m, 2 * plan.p, rng, q)
    library = [random_matrix(2 * plan.p, 2 * plan.n, rng, q) for _ in range(L)]
    points = sample_distinct_points(N, rng, q)
    return rng, A, library, points


def _responses(plan, L, N, theta, seed):
    rng, A, library, points = _setup(plan, L, N, seed)
    stores = encode_storage(library, plan, points)
    queries = make_mds_queries(A, theta, L, plan, points, rng)
    resp = [ServerResponse(i, points[i], mds_server_compute(stores[i], queries[i])) for i in range(N)]
    return resp, A @ library[theta]


def test_storage_size_per_server():
    plan = mds_plan(2, 2, 2)
    _, _, library, points = _setup(plan, 2, 5, 0)
    stores = encode_storage(library, plan, points)
    s, r = library[0].shape
    assert all(st.element_count == 2 * s * r // 4 for st in stores)


def test_trivial_partition_stores_scaled_library():
    plan = mds_plan(1, 1, 1)
    _, _, library, points = _setup(plan, 2, 3, 1)
    st = encode_storage(library, plan, points)[0]
    factor = pow(int(points[0]), plan.beta[0][0], BIG_Q)
    assert st.pieces[0] == library[0].scale(factor)
    assert reconstruct_library([st], plan) == library


def test_query_shape_and_shared_decoys():
    plan = mds_plan(2, 2, 2)
    rng, A, _, points = _setup(plan, 3, 4, 2)
    queries = make_mds_queries(A, 1, 3, plan, points, rng)
    for qr in queries:
        assert len(qr) == 3 and qr.element_count == 3 * 4
        assert qr[0] == queries[0][0] and qr[2] == queries[0][2]


def test_query_theta_zero_is_share_then_decoy():
    plan = mds_plan(2, 2, 2)
    rng, A, _, points = _setup(plan, 2, 3, 3)
    Z, S = random_matrix(2, 2, rng, MOD), random_matrix(2, 2, rng, MOD)
    queries = make_mds_queries(A, 0, 2, plan, points, mask=Z, decoys=[S])
    for qr, a in zip(queries, points):
        assert qr[0] == encode_share(A, Z, plan, a) and qr[1] == S


def test_zero_decoy_gives_share_times_storage():
    plan = mds_plan(2, 2, 2)
    rng, A, library, points = _setup(plan, 2, 3, 4)
    stores = encode_storage(library, plan, points)
    Z = random_matrix(2, 2, rng, MOD)
    zero = MatrixF.zeros(2, 2, MOD)
    queries = make_mds_queries(A, 1, 2, plan, points, mask=Z, decoys=[zero])
    share = encode_share(A, Z, plan, points[0])
    assert mds_server_compute(stores[0], queries[0]) == share @ stores[0].pieces[1]


def test_response_is_explicit_h_of_x():
    plan = mds_plan(2, 2, 2)
    rng, A, library, points = _setup(plan, 3, 2, 5)
    Z = random_matrix(2, 2, rng, MOD)
    decoys = [random_matrix(2, 2, rng, MOD) for _ in range(2)]
    theta = 1
    queries = make_mds_queries(A, theta, 3, plan, points, mask=Z, decoys=decoys)
    stores = encode_storage(library, plan, points)
    x = int(points[0])
    # h(x) = f(x) g_theta(x) + sum_j S_j g_j(x), every term built from the blocks directly
    def g(t):
        acc = MatrixF.zeros(2, 2, MOD)
        for (j, k), blk in partition(library[t], 2, 2):
            acc = acc + blk.scale(pow(x, plan.beta[j][k], BIG_Q))
        return acc
    f = Z.scale(pow(x, plan.gamma, BIG_Q))
    for (k, j), blk in partition(A, 2, 2):
        f = f + blk.scale(pow(x, plan.alpha[k][j], BIG_Q))
    want = f @ g(1) + decoys[0] @ g(0) + decoys[1] @ g(2)
    assert mds_server_compute(stores[0], queries[0]) == want


def test_theta_changes_result_not_shape():
    plan = mds_plan(2, 2, 2)
    rng, A, library, points = _setup(plan, 2, 2, 6)
    stores = encode_storage(library, plan, points)
    Z, S = random_matrix(2, 2, rng, MOD), random_matrix(2, 2, rng, MOD)
    r0 = mds_server_compute(stores[0], make_mds_queries(A, 0, 2, plan, points, mask=Z, decoys=[S])[0])
    r1 = mds_server_compute(stores[0], make_mds_queries(A, 1, 2, plan, points, mask=Z, decoys=[S])[0])
    assert r0.shape == r1.shape and r0 != r1


def test_server_compute_shape_mismatch():
    plan = mds_plan(1, 1, 1)
    _, _, library, points = _setup(plan, 2, 1, 7)
    st = encode_storage(library, plan, points)[0]
    with pytest.raises(DimensionMismatch):
        mds_server_compute(st, MdsQuery((MatrixF.zeros(2, 2, MOD),)))


@pytest.mark.parametrize("theta", [0, 1])
def test_decode_with_two_stragglers(theta):
    plan = mds_plan(2, 2, 2)
    resp, expected = _responses(plan, 2, 14, theta, seed=10 + theta)
    assert mds_decode(resp[2:], plan) == expected
    assert mds_decode(resp[:12], plan) == mds_decode(resp[2:], plan)


def test_decode_large_field_with_eleven():
    plan = mds_plan_large_field(2, 2, 2)
    resp, expected = _responses(plan, 2, 11, 0, seed=12)
    assert mds_decode(resp, plan) == expected


@pytest.mark.parametrize("p,m,n", list(itertools.product(range(1, 4), repeat=3)))
def test_decode_grid_both_plans(p, m, n):
    for plan in (mds_plan(p, m, n), mds_plan_large_field(p, m, n)):
        for L, theta in ((2, 0), (3, 2)):
            resp, expected = _responses(plan, L, plan.recovery_threshold + 2, theta, seed=p + 3 * m + 9 * n)
            assert mds_decode(resp[2:], plan) == expected


def test_decode_needs_enough():
    plan = mds_plan(2, 2, 2)
    resp, _ = _responses(plan, 2, 12, 0, seed=13)
    with pytest.raises(NotEnoughResponses):
        mds_decode(resp[:11], plan)


def _sparse_plan():
    # a support with a gap, so small fields can produce singular systems
    return mds_plan_large_field(1, 1, 1).with_exponent("alpha", (0, 0), 2)


def test_sparse_decode_widens_past_singular_prefix(caplog):
    plan = _sparse_plan()
    assert list(plan.support) == [0, 2]
    q = Modulus(5)
    rng = make_rng(0, "sparse")
    A, lib = random_matrix(1, 1, rng, q), [random_matrix(1, 1, rng, q) for _ in range(2)]
    points = [q(1), q(4), q(2)]  # 1 and 4 collide on x**2 mod 5
    stores = encode_storage(lib, plan, points)
    queries = make_mds_queries(A, 0, 2, plan, points, rng)
    resp = [ServerResponse(i, points[i], mds_server_compute(stores[i], queries[i])) for i in range(3)]
    with caplog.at_level(logging.INFO, logger="psdmm.mds"):
        assert mds_decode(resp, plan) == A @ lib[0]
    assert "widening" in caplog.text
    with caplog.at_level(logging.WARNING, logger="psdmm.mds"):
        with pytest.raises(SingularSystem):
            mds_decode(resp[:2], plan)
    assert "points=[1, 4]" in caplog.text


@pytest.mark.parametrize("p,n", [(2, 2), (2, 3), (3, 2)])
def test_every_pn_subset_reconstructs(p, n):
    plan = mds_plan(p, 1, n)
    N = p * n + 3
    _, _, library, points = _setup(plan, 2, N, p * n)
    stores = encode_storage(library, plan, points, validate=True)
    for subset in itertools.combinations(stores, p * n):
        assert reconstruct_library(subset, plan) == library


def test_reconstruct_refuses_too_few():
    plan = mds_plan(2, 1, 2)
    _, _, library, points = _setup(plan, 2, 4, 0)
    stores = encode_storage(library, plan, points)
    assert reconstruct_library(stores, plan) == library
    with pytest.raises(NotEnoughResponses):
        reconstruct_library(stores[:3], plan)


def test_storage_exponent_validation():
    plan = mds_plan_large_field(2, 1, 2)
    points = sample_distinct_points(6, make_rng(0, "v"), 101)
    check_storage_exponents(plan, points)  # nonconsecutive, checked exhaustively
    dup = plan.with_exponent("beta", (0, 0), plan.beta[0][1])
    with pytest.raises(NonMdsExponents):
        check_storage_exponents(dup, points)
    gap = mds_plan_large_field(1, 1, 2)
    assert gap.beta_flat == (0, 2)
    q = Modulus(5)
    with pytest.raises(NonMdsExponents):
        check_storage_exponents(gap, [q(1), q(4), q(2)])
    with pytest.raises(NonMdsExponents):
        check_storage_exponents(plan, [points[0], points[0]] + points[2:])


def test_storage_matrix_and_manifest():
    plan = mds_plan(2, 1, 2)
    points = sample_distinct_points(5, make_rng(1, "sm"), 101)
    M = np.array(storage_matrix(plan, points), dtype=object)
    assert M.shape == (5, 4)
    _, _, library, _ = _setup(plan, 2, 5, 1, q=101)
    manifest = storage_manifest(encode_storage(library, plan, points))
    assert manifest[0]["point"] == int(points[0]) and manifest[0]["pieces"] == [[2, 2], [2, 2]]


def test_params_validation():
    plan = mds_plan(2, 2, 2)
    pts = tuple(sample_distinct_points(12, make_rng(0, "pp"), MOD))
    MdsParams(2, 2, 2, 2, 12, 0, plan, pts)
    with pytest.raises(ConfigInvalid):
        MdsParams(2, 2, 2, 2, 11, 0, plan, pts[:11])
    with pytest.raises(ConfigInvalid):
        MdsParams(2, 2, 2, 2, 12, 0, replicated_plan(2, 2, 2), pts)
