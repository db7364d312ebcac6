import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blocknorm import compression as comp
from blocknorm.errors import DimensionError, NotPSDError, PartitionError, PreconditionError
from blocknorm.fuzz import random_psd
from blocknorm.linalg import is_psd
from blocknorm.norms import UINorm, condition_b, eval_norm
from conftest import cofactor_det3, norm_grid, random_complex


def schatten_pm():
    i2 = np.eye(2)
    return comp.PartitionedMatrix(np.block([[i2, i2], [i2, i2]]), (1, 1, 2))


def random_pm(rng, sizes, rank=None):
    dim = sum(sizes)
    rank = rank or int(rng.integers(1, dim + 1))
    return comp.PartitionedMatrix(random_psd(dim, rank, rng), sizes)


# -- PartitionedMatrix -------------------------------------------------------


def test_partitioned_matrix_validation():
    with pytest.raises(PartitionError):
        comp.PartitionedMatrix(np.eye(3), (1, 1))
    with pytest.raises(PartitionError):
        comp.PartitionedMatrix(np.eye(3), (0, 3))
    with pytest.raises(DimensionError):
        comp.PartitionedMatrix(np.ones((2, 3)), (1, 1))


def test_partitioned_matrix_is_immutable():
    pm = comp.PartitionedMatrix(np.eye(3), (1, 2))
    with pytest.raises(ValueError):
        pm.a[0, 0] = 5


def test_blocks_and_permutation(rng):
    pm = random_pm(rng, (1, 2, 3))
    assert pm.block(1, 2).shape == (2, 3)
    perm = pm.permuted((2, 0, 1))
    assert perm.sizes == (3, 1, 2)
    np.testing.assert_array_equal(perm.block(0, 2), pm.block(2, 1))


def test_pad_blocks_keeps_psd_and_singular_values(rng):
    pm = random_pm(rng, (1, 3, 2))
    padded = comp.pad_blocks(pm, (3, 3, 3))
    assert is_psd(padded.a).is_psd
    for i in range(3):
        for j in range(3):
            sv_new = np.linalg.svd(padded.block(i, j), compute_uv=False)
            sv_old = np.linalg.svd(pm.block(i, j), compute_uv=False)
            np.testing.assert_allclose(sv_new[: sv_old.size], sv_old, atol=1e-12)
            np.testing.assert_allclose(sv_new[sv_old.size :], 0, atol=1e-12)
    with pytest.raises(DimensionError):
        comp.pad_blocks(pm, (1, 1, 1))


# -- compress ------------------------------------------------------------------


def test_compress_identity():
    result = comp.compress(comp.PartitionedMatrix(np.eye(6), (1, 2, 3)), UINorm.trace(3))
    np.testing.assert_allclose(result.values, np.diag([1.0, 2.0, 3.0]))
    assert result.verdict.is_psd


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, math.inf])
def test_compress_schatten_matrix(p):
    corner = 1.0 if p == math.inf else 2 ** (1 / p)
    result = comp.compress(schatten_pm(), UINorm.schatten(p, 2))
    np.testing.assert_allclose(result.values, [[1, 0, 1], [0, 1, 1], [1, 1, corner]], atol=1e-14)
    assert result.verdict.is_psd == (p == 1.0)


def test_compress_schatten_2_determinant():
    result = comp.compress(schatten_pm(), UINorm.schatten(2.0, 2))
    assert cofactor_det3(result.values) == pytest.approx(math.sqrt(2) - 2, abs=1e-14)
    assert np.linalg.eigvalsh(result.values)[0] < 0


def test_compress_rejects_non_psd_and_small_ambient():
    bad = comp.PartitionedMatrix(np.array([[1.0, 2.0], [2.0, 1.0]]), (1, 1))
    with pytest.raises(NotPSDError) as info:
        comp.compress(bad, UINorm.trace(1))
    assert info.value.min_eigenvalue == pytest.approx(-1.0)
    with pytest.raises(DimensionError):
        comp.compress(comp.PartitionedMatrix(np.eye(4), (1, 3)), UINorm.trace(2))


def test_compression_values_symmetric_and_nonnegative(rng):
    pm = random_pm(rng, (2, 1, 3))
    for norm in norm_grid(3):
        values = comp.compress(pm, norm).values
        np.testing.assert_array_equal(values, values.T)
        assert np.all(np.diag(values) >= 0)
        # Mirrored entries agree with the lower blocks measured directly.
        for i in range(3):
            for j in range(i):
                assert values[i, j] == pytest.approx(eval_norm(norm, pm.block(i, j)), rel=1e-12)


def test_batch_matches_scalar(rng):
    sizes = (2, 3, 1)
    pms = [random_pm(rng, sizes) for _ in range(6)]
    stack = np.stack([pm.a for pm in pms])
    for norm in norm_grid(3):
        batch = comp.compression_values_batch(stack, sizes, norm)
        for pm, vals in zip(pms, batch):
            np.testing.assert_allclose(vals, comp.compression_values(pm, norm), rtol=1e-12, atol=1e-14)


# -- abs_entries ---------------------------------------------------------------


def test_abs_entries_tridiagonal():
    b = np.array([[2, -1, 0], [-1, 2, -1], [0, -1, 2]], dtype=float)
    out = comp.abs_entries(b)
    np.testing.assert_array_equal(out, [[2, 1, 0], [1, 2, 1], [0, 1, 2]])
    np.testing.assert_allclose(np.linalg.eigvalsh(out), [2 - math.sqrt(2), 2, 2 + math.sqrt(2)])
    assert is_psd(out).is_psd


def test_abs_entries_fixes_nonnegative_real(rng):
    b = np.abs(rng.standard_normal((4, 4)))
    np.testing.assert_array_equal(comp.abs_entries(b), b)


def test_abs_entries_complex_hermitian_is_symmetric(rng):
    r = random_complex(rng, 3, 3)
    out = comp.abs_entries(r.conj().T @ r)
    assert out.dtype == float
    np.testing.assert_allclose(out, out.T, rtol=1e-14)


# -- reduce_theorem1 -----------------------------------------------------------


def test_reduce_block_diagonal():
    a = np.zeros((6, 6), dtype=complex)
    a[0, 0] = 2.0
    a[1:3, 1:3] = [[2.0, 1.0], [1.0, 2.0]]
    a[3:, 3:] = np.diag([1.0, 0.5, 0.25])
    trace = comp.reduce_theorem1(comp.PartitionedMatrix(a, (1, 2, 3)))
    np.testing.assert_allclose(trace.trace_matrix, np.diag([2.0, 4.0, 1.75]), atol=1e-12)
    assert [label for label, _ in trace.stages] == list(comp.STAGE_LABELS)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_reduce_all_identity_blocks(n):
    a = np.kron(np.ones((3, 3)), np.eye(n))
    trace = comp.reduce_theorem1(comp.PartitionedMatrix(a, (n, n, n)))
    np.testing.assert_allclose(trace.trace_matrix, n * np.ones((3, 3)), atol=1e-12)
    ev = np.linalg.eigvalsh(trace.trace_matrix)
    np.testing.assert_allclose(ev, [0, 0, 3 * n], atol=1e-10)


def test_reduce_errors(rng):
    with pytest.raises(PartitionError):
        comp.reduce_theorem1(random_pm(rng, (2, 2)))
    bad = comp.PartitionedMatrix(np.diag([1.0, -1.0, 1.0]), (1, 1, 1))
    with pytest.raises(NotPSDError):
        comp.reduce_theorem1(bad)


@pytest.mark.parametrize("sizes", [(1, 1, 1), (2, 3, 4), (4, 1, 2), (3, 3, 3)])
def test_reduce_invariants(rng, sizes):
    for _ in range(20):
        pm = random_pm(rng, sizes)
        trace = comp.reduce_theorem1(pm)
        n = max(sizes)
        diag_w = trace.stage("diagW").a
        # A_12, A_23 PSD and A_13 = P~_13 D after the three congruences.
        for i, j in ((0, 1), (1, 2)):
            assert is_psd(diag_w[i * n : (i + 1) * n, j * n : (j + 1) * n]).is_psd
        a13 = diag_w[:n, 2 * n :]
        p13 = a13 @ np.diag(trace.d.conj())
        assert is_psd(p13).is_psd
        # Reconstruct tr|A_ij| independently from singular values of the input blocks.
        for i in range(3):
            for j in range(3):
                expected = np.linalg.svd(pm.block(i, j), compute_uv=False).sum()
                assert np.trace(trace.q_blocks[i, j]).real == pytest.approx(expected, abs=1e-8)
        for qr in trace.q_triples:
            assert np.allclose(qr.imag, 0, atol=1e-12)
            assert np.min(np.linalg.eigvalsh(qr)) >= -1e-8
        assert is_psd(trace.trace_matrix).is_psd
        assert all(trace.checks.values()) and len(trace.checks) == 5


def test_reduce_q_triples_are_principal_submatrices(rng):
    pm = random_pm(rng, (2, 2, 2), rank=3)
    trace = comp.reduce_theorem1(pm)
    tilde = trace.stage("extractQ").a
    a = trace.stage("diagW").a
    for r in range(2):
        idx = [r, 2 + r, 4 + r]
        np.testing.assert_allclose(tilde[3 * r : 3 * r + 3, 3 * r : 3 * r + 3], a[np.ix_(idx, idx)])


# -- compress_m2 ---------------------------------------------------------------


def test_compress_m2_examples(rng):
    a = np.zeros((5, 5), dtype=complex)
    a[:2, :2] = np.eye(2)
    a[2:, 2:] = 2 * np.eye(3)
    result = comp.compress_m2(comp.PartitionedMatrix(a, (2, 3)), UINorm.schatten(2.0, 3))
    np.testing.assert_allclose(result.values, np.diag([math.sqrt(2), 2 * math.sqrt(3)]))

    i2 = np.eye(2)
    pm = comp.PartitionedMatrix(np.block([[i2, i2], [i2, i2]]), (2, 2))
    for p in (1.0, 2.0, 3.0):
        result = comp.compress_m2(pm, UINorm.schatten(p, 2))
        np.testing.assert_allclose(result.values, 2 ** (1 / p) * np.ones((2, 2)))
        assert result.verdict.is_psd
    with pytest.raises(PartitionError):
        comp.compress_m2(random_pm(rng, (1, 1, 1)), UINorm.trace(1))


# -- sufficiency_check ---------------------------------------------------------


@pytest.mark.parametrize("sizes", [(1, 2, 3), (2, 2, 4), (3, 1, 2), (1, 1, 4)])
def test_sufficiency_trace_norm(rng, sizes):
    for _ in range(10):
        pm = random_pm(rng, sizes)
        res = comp.sufficiency_check(pm, UINorm.trace(max(sizes)))
        n1, n2, n3 = sorted(sizes)
        assert res.k == min(n1 + n2, n3)
        if res.k == n3:
            assert res.epsilon == 0.0
        assert res.epsilon >= 0
        np.testing.assert_allclose(res.compression.values, comp.compress(pm, UINorm.trace(max(sizes))).values)
        assert res.compression.verdict.is_psd


def test_sufficiency_kyfan_small_blocks(rng):
    norm = UINorm.kyfan(2, 3)
    for _ in range(50):
        pm = random_pm(rng, (1, 1, 3))
        res = comp.sufficiency_check(pm, norm)
        assert res.k == 2
        assert res.epsilon >= 0
        assert res.compression.verdict.is_psd
        split = res.trace_part.copy()
        split[2, 2] += res.epsilon
        np.testing.assert_allclose(res.compression.values, split, atol=1e-9)
        assert is_psd(res.trace_part).is_psd


def test_sufficiency_restores_caller_order(rng):
    pm = random_pm(rng, (3, 1, 1))
    norm = UINorm.kyfan(2, 3)
    res = comp.sufficiency_check(pm, norm)
    assert res.order == (1, 2, 0)
    np.testing.assert_allclose(res.compression.values, comp.compress(pm, norm).values, atol=1e-12)
    assert res.trace_part[0, 0] <= res.compression.values[0, 0] + 1e-12


def test_sufficiency_rejects_non_flat_norm(rng):
    with pytest.raises(PreconditionError):
        comp.sufficiency_check(random_pm(rng, (1, 1, 2)), UINorm.schatten(2.0, 2))
    with pytest.raises(PreconditionError):
        comp.sufficiency_check(random_pm(rng, (1, 2, 3)), UINorm.kyfan(2, 3))


@settings(max_examples=30, deadline=None)
@given(
    sizes=st.tuples(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4)),
    seed=st.integers(0, 2**32 - 1),
)
def test_three_block_theorems_hold(sizes, seed):
    rng = np.random.default_rng(seed)
    pm = random_pm(rng, sizes)
    n = max(sizes)
    assert comp.compress(pm, UINorm.trace(n)).verdict.is_psd
    n1, n2, n3 = sorted(sizes)
    k = min(n1 + n2, n3)
    for norm in norm_grid(n):
        if condition_b(norm, k).holds:
            res = comp.sufficiency_check(pm, norm)
            assert res.compression.verdict.is_psd and res.epsilon >= 0


@settings(max_examples=40, deadline=None)
@given(sizes=st.tuples(st.integers(1, 4), st.integers(1, 4)), seed=st.integers(0, 2**32 - 1))
def test_two_block_compressions_are_psd(sizes, seed):
    rng = np.random.default_rng(seed)
    pm = random_pm(rng, sizes)
    for norm in norm_grid(max(sizes)):
        assert comp.compress_m2(pm, norm).verdict.is_psd
