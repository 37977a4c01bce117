import random

import pytest
from hypothesis import given, settings, strategies as st

from nilcoset.exactla import (
    AbelianInvariants, IntMatrix, cokernel_invariants, det_bareiss, hnf,
    kernel_basis, rank, snf, snf_divisors, solve_integer, unimodular_inverse,
    xgcd,
)


def mat(rows):
    return IntMatrix.from_rows(rows)


def diag_matrix(divisors, rows, cols):
    out = [[0] * cols for _ in range(rows)]
    for i, d in enumerate(divisors):
        out[i][i] = d
    return IntMatrix.from_rows(out, cols=cols)


small_entries = st.integers(min_value=-9, max_value=9)


@st.composite
def random_matrix(draw, max_dim=8):
    m = draw(st.integers(min_value=0, max_value=max_dim))
    n = draw(st.integers(min_value=0, max_value=max_dim))
    rows = [[draw(small_entries) for _ in range(n)] for _ in range(m)]
    return IntMatrix.from_rows(rows, cols=n)


# -- xgcd -------------------------------------------------------------------

def test_xgcd_bezout():
    rng = random.Random(0)
    for _ in range(200):
        a, b = rng.randint(-50, 50), rng.randint(-50, 50)
        g, s, t = xgcd(a, b)
        assert g == abs(__import__("math").gcd(a, b))
        assert s * a + t * b == g


# -- HNF --------------------------------------------------------------------

def test_hnf_identity():
    H, U = hnf(IntMatrix.identity(3))
    assert H == IntMatrix.identity(3)
    assert U == IntMatrix.identity(3)


def test_hnf_zero_matrix():
    M = IntMatrix.zero(2, 3)
    H, U = hnf(M)
    assert H.to_rows() == [[0, 0, 0], [0, 0, 0]]
    assert U == IntMatrix.identity(2)


def _hnf_oracle_2x2(rows):
    """Brute-force row HNF of a rank-2 2x2 matrix.

    Enumerates small integer combinations of the rows to find the unique
    lattice vectors of shape (0, d) with d > 0 minimal and (a, b) with a > 0
    minimal and 0 <= b < d.
    """
    (r1, r2) = rows
    combos = set()
    for c1 in range(-12, 13):
        for c2 in range(-12, 13):
            v = (c1 * r1[0] + c2 * r2[0], c1 * r1[1] + c2 * r2[1])
            combos.add(v)
    d = min(v[1] for v in combos if v[0] == 0 and v[1] > 0)
    a = min(v[0] for v in combos if v[0] > 0)
    b = min(v[1] % d for v in combos if v[0] == a)
    return [[a, b], [0, d]]


def test_hnf_2x2_against_bruteforce_oracle():
    M = mat([[2, 4], [1, 1]])
    H, U = hnf(M)
    assert H.to_rows() == _hnf_oracle_2x2([[2, 4], [1, 1]])
    assert U.matmul(M) == H
    assert abs(det_bareiss(U)) == 1


def test_hnf_shape_properties_random():
    rng = random.Random(1)
    for _ in range(100):
        m = rng.randint(0, 6)
        n = rng.randint(0, 6)
        M = mat([[rng.randint(-9, 9) for _ in range(n)] for _ in range(m)])
        H, U = hnf(M)
        assert U.matmul(M) == H
        if m:
            assert abs(det_bareiss(U)) == 1
        rows = H.to_rows()
        pivots = []
        for r in rows:
            nz = [j for j, v in enumerate(r) if v]
            if nz:
                pivots.append((nz[0], r[nz[0]]))
        # strictly increasing pivot columns, positive pivots
        cols = [c for c, _ in pivots]
        assert cols == sorted(set(cols))
        assert all(p > 0 for _, p in pivots)
        # entries above pivots reduced into [0, pivot)
        for k, (c, p) in enumerate(pivots):
            for r in rows[:k]:
                assert 0 <= r[c] < p
        # zero rows at the bottom
        seen_zero = False
        for r in rows:
            if not any(r):
                seen_zero = True
            else:
                assert not seen_zero


# -- SNF --------------------------------------------------------------------

def test_snf_identity():
    for n in (1, 2, 4):
        form = snf(IntMatrix.identity(n))
        assert form.divisors == tuple([1] * n)


def test_snf_already_diagonal():
    form = snf(mat([[2, 0], [0, 6]]))
    assert form.divisors == (2, 6)


def test_snf_rank_one_by_hand():
    # second row is twice the first, so the row lattice is spanned by (2, 4);
    # dividing out gcd 2 leaves divisors (2, 0)
    form = snf(mat([[2, 4], [4, 8]]))
    assert form.divisors == (2, 0)


def check_smith(M):
    form = snf(M)
    d = form.divisors
    assert len(d) == min(M.rows, M.cols)
    nonzero = [x for x in d if x]
    assert all(x > 0 for x in nonzero)
    for i in range(len(nonzero) - 1):
        assert nonzero[i + 1] % nonzero[i] == 0
    assert all(x == 0 for x in d[len(nonzero):])
    U, V = form.left_transform, form.right_transform
    prod = U.matmul(M).matmul(V)
    assert prod == diag_matrix(d, M.rows, M.cols)
    if M.rows:
        assert abs(det_bareiss(U)) == 1
    if M.cols:
        assert abs(det_bareiss(V)) == 1
    assert snf_divisors(M) == d


@settings(max_examples=150, deadline=None)
@given(random_matrix())
def test_snf_properties(M):
    check_smith(M)


def test_sparse_and_dense_divisors_agree():
    rng = random.Random(7)
    for _ in range(40):
        m, n = rng.randint(1, 12), rng.randint(1, 12)
        trips = []
        used = set()
        for _ in range(rng.randint(0, 3 * min(m, n))):
            i, j = rng.randrange(m), rng.randrange(n)
            if (i, j) in used:
                continue
            used.add((i, j))
            trips.append((i, j, rng.randint(-5, 5)))
        M = IntMatrix.from_triplets(m, n, trips)
        dense_divisors = snf(mat(M.to_rows())).divisors
        from nilcoset.exactla import _sparse_divisors
        sparse_nz = _sparse_divisors(M)
        dense_nz = [d for d in dense_divisors if d]
        assert sparse_nz == dense_nz


# -- kernels ----------------------------------------------------------------

def test_kernel_identity_empty():
    assert kernel_basis(IntMatrix.identity(4)) == []


def test_kernel_forced_vector():
    basis = kernel_basis(mat([[1, 1]]))
    assert basis == [(1, -1)]


def test_kernel_rank2():
    M = mat([[2, 4, 4], [1, 2, 2]])
    basis = kernel_basis(M)
    assert len(basis) == 2  # cols - rank = 3 - 1
    for v in basis:
        assert M.mul_vector(list(v)) == [0, 0]
        first = next(x for x in v if x)
        assert first > 0


@settings(max_examples=100, deadline=None)
@given(random_matrix(max_dim=6))
def test_kernel_properties(M):
    basis = kernel_basis(M)
    assert len(basis) == M.cols - rank(M)
    for v in basis:
        assert all(x == 0 for x in M.mul_vector(list(v)))


# -- cokernel ---------------------------------------------------------------

def test_cokernel_free():
    inv = cokernel_invariants(IntMatrix.zero(0, 3), 3)
    assert inv == AbelianInvariants(3, ())


def test_cokernel_crt():
    inv = cokernel_invariants(mat([[2, 0], [0, 3]]), 2)
    assert inv == AbelianInvariants(0, (6,))


def test_cokernel_from_snf_divisors():
    # snf of [[2,4],[4,8]] is (2, 0): quotient Z/2 + Z
    inv = cokernel_invariants(mat([[2, 4], [4, 8]]), 2)
    assert inv == AbelianInvariants(1, (2,))


def test_cokernel_unimodular_invariance():
    rng = random.Random(3)
    for _ in range(40):
        m, n = rng.randint(1, 5), rng.randint(1, 5)
        M = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(m)]
        base = cokernel_invariants(mat(M), n)
        A = [row[:] for row in M]
        for _ in range(8):
            op = rng.randrange(4)
            if op == 0 and m > 1:
                i, k = rng.sample(range(m), 2)
                q = rng.randint(-3, 3)
                A[i] = [a + q * b for a, b in zip(A[i], A[k])]
            elif op == 1 and n > 1:
                j, k = rng.sample(range(n), 2)
                q = rng.randint(-3, 3)
                for row in A:
                    row[j] += q * row[k]
            elif op == 2:
                i = rng.randrange(m)
                A[i] = [-a for a in A[i]]
            else:
                j = rng.randrange(n)
                for row in A:
                    row[j] = -row[j]
        assert cokernel_invariants(mat(A), n) == base


# -- solve ------------------------------------------------------------------

def test_solve_identity():
    assert solve_integer(IntMatrix.identity(3), [4, -1, 7]) == [4, -1, 7]


def test_solve_parity_obstruction():
    assert solve_integer(mat([[2]]), [3]) is None


def test_solve_bezout():
    M = mat([[2, 3]])
    x = solve_integer(M, [1])
    assert x is not None
    assert 2 * x[0] + 3 * x[1] == 1


def test_solve_dimension_mismatch():
    with pytest.raises(ValueError):
        solve_integer(mat([[1, 2]]), [1, 2])


@settings(max_examples=80, deadline=None)
@given(random_matrix(max_dim=5), st.lists(small_entries, min_size=0, max_size=5))
def test_solve_random_consistent(M, xs):
    # build a consistent rhs from a known solution, solver must find some solution
    x = (xs + [0] * M.cols)[:M.cols]
    b = M.mul_vector(x)
    got = solve_integer(M, b)
    assert got is not None
    assert M.mul_vector(got) == b


# -- AbelianInvariants -------------------------------------------------------

def test_invariants_canonicalization():
    assert AbelianInvariants.from_orders([2, 3]) == AbelianInvariants(0, (6,))
    assert AbelianInvariants.from_orders([2, 2]) == AbelianInvariants(0, (2, 2))
    assert AbelianInvariants.from_orders([4, 6]) == AbelianInvariants(0, (2, 12))
    assert AbelianInvariants.from_orders([0, 5, 1]) == AbelianInvariants(1, (5,))
    assert AbelianInvariants.from_orders([]).is_trivial()


def test_invariants_validation():
    with pytest.raises(ValueError):
        AbelianInvariants(0, (3, 2))
    with pytest.raises(ValueError):
        AbelianInvariants(0, (1,))
    assert AbelianInvariants(0, (2, 6)).order == 12
    assert AbelianInvariants(2, ()).order is None
    assert str(AbelianInvariants(1, (2, 4))) == "Z + Z/2 + Z/4"


# -- unimodular inverse ------------------------------------------------------

def test_unimodular_inverse_roundtrip():
    rng = random.Random(11)
    for _ in range(20):
        n = rng.randint(1, 5)
        # random unimodular: product of elementary matrices
        U = IntMatrix.identity(n).to_rows()
        for _ in range(10):
            i, k = rng.randrange(n), rng.randrange(n)
            if i == k:
                continue
            q = rng.randint(-3, 3)
            U[i] = [a + q * b for a, b in zip(U[i], U[k])]
        Um = mat(U)
        W = unimodular_inverse(Um)
        assert W.matmul(Um) == IntMatrix.identity(n)
