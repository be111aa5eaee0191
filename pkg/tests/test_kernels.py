import numpy as np
from hypothesis import given, settings, strategies as st

from wittdisp import _kernels
from wittdisp.rings import finite_field

import oracles


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 4, 5, 8, 9]), st.integers(1, 6), st.integers(1, 6), st.integers(0, 10 ** 6))
def test_numpy_and_compiled_paths_agree(q, r, c, seed):
    F = finite_field(q)
    add, mul, neg, inv = _kernels.field_tables(F)
    rng = np.random.default_rng(seed)
    A = rng.integers(0, q, size=(r, c)).astype(np.int64)
    B = rng.integers(0, q, size=(c, r)).astype(np.int64)
    R1, k1, p1 = _kernels._rref_numpy(A, add, mul, neg, inv)
    R2, k2, p2 = _kernels.rref_kernel(A, add, mul, neg, inv)
    assert k1 == k2 and np.array_equal(R1, R2) and np.array_equal(p1, p2)
    assert np.array_equal(_kernels._matmul_numpy(A, B, add, mul), _kernels.matmul_kernel(A, B, add, mul))
    if q in (2, 3, 5):
        assert k1 == oracles.mat_rank_mod_p(A.tolist(), q)
