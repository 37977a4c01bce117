"""Exact integer linear algebra.

Hermite and Smith normal forms, integer kernels, cokernel invariants and
integer linear solving, all over arbitrary-precision Python integers.  This
is the substrate for every homology, abelianization and module-isomorphism
computation in the package; nothing here ever touches floating point.

Two elimination engines coexist:

* a dense engine with the deterministic minimum-absolute-value pivot rule
  (ties broken by lowest (row, col)), used for everything small, and
* a streaming sparse engine that consumes rows one at a time and keeps only
  reduced pivot rows, used when the stored entry count crosses
  ``SPARSE_SWITCH``.  Boundary matrices of bar resolutions (size roughly
  |G|^3 x |G|^2) are only tractable this way.

Both paths produce the same normal forms; HNF and SNF are unique invariants
of the row lattice, so the answers do not depend on the elimination order.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, prod
from typing import Iterable, Iterator, Sequence

SPARSE_SWITCH = 10_000


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Extended gcd: returns (g, s, t) with s*a + t*b = g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


class IntMatrix:
    """Exact integer matrix, dense (row-major lists) or sparse (triplets).

    Instances are treated as immutable; all operations return new matrices.
    The sparse form is a dict mapping (row, col) to a nonzero value.
    """

    __slots__ = ("rows", "cols", "_dense", "_sparse")

    def __init__(self, rows: int, cols: int, *, dense=None, sparse=None):
        if rows < 0 or cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        self.rows = rows
        self.cols = cols
        self._dense = dense
        self._sparse = sparse

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        rows = [list(r) for r in rows]
        if rows:
            ncols = len(rows[0])
            if any(len(r) != ncols for r in rows):
                raise ValueError("ragged rows")
        else:
            ncols = 0 if cols is None else cols
        if cols is not None:
            ncols = cols
            if rows and len(rows[0]) != cols:
                raise ValueError("cols does not match row length")
        return cls(len(rows), ncols, dense=rows)

    @classmethod
    def from_triplets(cls, rows: int, cols: int,
                      triplets: Iterable[tuple[int, int, int]]) -> "IntMatrix":
        data: dict[tuple[int, int], int] = {}
        for i, j, v in triplets:
            if not (0 <= i < rows and 0 <= j < cols):
                raise ValueError(f"triplet index ({i},{j}) out of range")
            if (i, j) in data:
                raise ValueError(f"duplicate triplet at ({i},{j})")
            if v:
                data[(i, j)] = int(v)
        return cls(rows, cols, sparse=data)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls.from_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)], cols=n)

    @classmethod
    def zero(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, sparse={})

    # -- access ------------------------------------------------------------

    def entry(self, i: int, j: int) -> int:
        if self._dense is not None:
            return self._dense[i][j]
        return self._sparse.get((i, j), 0)

    @property
    def nnz(self) -> int:
        if self._sparse is not None:
            return len(self._sparse)
        return sum(1 for row in self._dense for v in row if v)

    def to_rows(self) -> list[list[int]]:
        if self._dense is not None:
            return [list(r) for r in self._dense]
        out = [[0] * self.cols for _ in range(self.rows)]
        for (i, j), v in self._sparse.items():
            out[i][j] = v
        return out

    def row_dicts(self) -> list[dict[int, int]]:
        """Rows as {col: value} dicts (zero entries omitted)."""
        out: list[dict[int, int]] = [dict() for _ in range(self.rows)]
        if self._dense is not None:
            for i, row in enumerate(self._dense):
                d = out[i]
                for j, v in enumerate(row):
                    if v:
                        d[j] = v
        else:
            for (i, j), v in self._sparse.items():
                out[i][j] = v
        return out

    def transpose(self) -> "IntMatrix":
        if self._dense is not None:
            return IntMatrix.from_rows(
                [[self._dense[i][j] for i in range(self.rows)] for j in range(self.cols)],
                cols=self.rows)
        return IntMatrix.from_triplets(
            self.cols, self.rows, ((j, i, v) for (i, j), v in self._sparse.items()))

    def matmul(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matmul")
        a = self.to_rows()
        b = other.to_rows()
        out = [[sum(a[i][k] * b[k][j] for k in range(self.cols))
                for j in range(other.cols)] for i in range(self.rows)]
        return IntMatrix.from_rows(out, cols=other.cols)

    def mul_vector(self, x: Sequence[int]) -> list[int]:
        if len(x) != self.cols:
            raise ValueError("dimension mismatch in mul_vector")
        if self._sparse is not None:
            out = [0] * self.rows
            for (i, j), v in self._sparse.items():
                out[i] += v * x[j]
            return out
        return [sum(v * x[j] for j, v in enumerate(row) if v) for row in self._dense]

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and \
            self.to_rows() == other.to_rows()

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(map(tuple, self.to_rows()))))

    def __repr__(self) -> str:
        if self.rows * self.cols <= 36:
            return f"IntMatrix({self.to_rows()})"
        return f"IntMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


@dataclass(frozen=True)
class SmithForm:
    """Smith normal form data: U * M * V = diag(divisors), U, V unimodular.

    divisors form a divisibility chain d1 | d2 | ... with trailing zeros for
    the rank deficiency; the list has length min(rows, cols).
    """
    divisors: tuple[int, ...]
    left_transform: IntMatrix
    right_transform: IntMatrix


@dataclass(frozen=True)
class AbelianInvariants:
    """Invariant factors of a finitely generated abelian group.

    torsion is the canonical divisibility chain (each entry >= 2, each
    dividing the next); two values compare equal iff the groups are
    isomorphic.
    """
    free_rank: int
    torsion: tuple[int, ...]

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("free_rank must be nonnegative")
        t = tuple(int(d) for d in self.torsion)
        if any(d < 2 for d in t):
            raise ValueError("torsion entries must be >= 2")
        if any(t[i + 1] % t[i] for i in range(len(t) - 1)):
            raise ValueError("torsion must form a divisibility chain")
        object.__setattr__(self, "torsion", t)

    @classmethod
    def from_orders(cls, orders: Iterable[int]) -> "AbelianInvariants":
        """Canonicalize a direct sum of cyclic groups Z/m (m = 0 means Z)."""
        free = 0
        primary: dict[int, list[int]] = {}
        for m in orders:
            m = int(m)
            if m < 0:
                raise ValueError("orders must be nonnegative")
            if m == 0:
                free += 1
                continue
            if m == 1:
                continue
            for p, e in _factorize(m).items():
                primary.setdefault(p, []).append(e)
        n_factors = max((len(v) for v in primary.values()), default=0)
        chain = [1] * n_factors
        for p, exps in primary.items():
            exps.sort()
            # largest exponents go to the last (largest) invariant factor
            for k, e in enumerate(reversed(exps)):
                chain[n_factors - 1 - k] *= p ** e
        return cls(free, tuple(d for d in chain if d > 1))

    @property
    def order(self) -> int | None:
        """Group order, or None when the free rank is positive."""
        if self.free_rank:
            return None
        return prod(self.torsion) if self.torsion else 1

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def __str__(self) -> str:
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{d}" for d in self.torsion)
        return " + ".join(parts) if parts else "0"


def _factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


# ---------------------------------------------------------------------------
# streaming sparse row reduction
# ---------------------------------------------------------------------------

def _row_sub(row: dict[int, int], q: int, other: dict[int, int]) -> None:
    """row -= q * other, in place."""
    if not q:
        return
    for c, v in other.items():
        w = row.get(c, 0) - q * v
        if w:
            row[c] = w
        else:
            row.pop(c, None)


def _row_comb(a: dict[int, int], ca: int, b: dict[int, int], cb: int) -> dict[int, int]:
    """Return ca*a + cb*b as a fresh dict."""
    out: dict[int, int] = {}
    if ca:
        for c, v in a.items():
            out[c] = ca * v
    if cb:
        for c, v in b.items():
            w = out.get(c, 0) + cb * v
            if w:
                out[c] = w
            else:
                out.pop(c, None)
    return out


class _StreamEchelon:
    """Incremental integer row echelon form over sparse rows.

    Feeding rows one at a time keeps memory proportional to the reduced
    pivot rows, never the whole input.  With track=True each stored row
    carries its expression over the input rows, which is what hnf() uses to
    assemble the unimodular transform.
    """

    def __init__(self, track: bool = False):
        self.pivots: dict[int, dict[int, int]] = {}
        self.track = track
        self.trans: dict[int, dict[int, int]] = {}
        self.zero_trans: list[dict[int, int]] = []
        self.n_rows_in = 0

    def add(self, row: dict[int, int]) -> None:
        rid = self.n_rows_in
        self.n_rows_in += 1
        row = dict(row)
        tr = {rid: 1} if self.track else None
        while row:
            c = min(row)
            v = row[c]
            piv = self.pivots.get(c)
            if piv is None:
                if v < 0:
                    row = {k: -w for k, w in row.items()}
                    if tr is not None:
                        tr = {k: -w for k, w in tr.items()}
                self.pivots[c] = row
                if self.track:
                    self.trans[c] = tr
                return
            p = piv[c]
            if v % p == 0:
                q = v // p
                _row_sub(row, q, piv)
                if tr is not None:
                    _row_sub(tr, q, self.trans[c])
            else:
                g, s, t = xgcd(p, v)
                new_piv = _row_comb(piv, s, row, t)
                new_row = _row_comb(row, p // g, piv, -(v // g))
                self.pivots[c] = new_piv
                if self.track:
                    new_ptr = _row_comb(self.trans[c], s, tr, t)
                    tr = _row_comb(tr, p // g, self.trans[c], -(v // g))
                    self.trans[c] = new_ptr
                row = new_row
        if self.track and tr:
            self.zero_trans.append(tr)

    def back_reduce(self) -> None:
        """Reduce entries at other pivot columns into [0, pivot): full HNF."""
        for c in sorted(self.pivots):
            piv = self.pivots[c]
            p = piv[c]
            for c2, other in self.pivots.items():
                if c2 == c or c not in other:
                    continue
                q = other[c] // p
                if q:
                    _row_sub(other, q, piv)
                    if self.track:
                        _row_sub(self.trans[c2], q, self.trans[c])

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def pivot_rows(self) -> list[dict[int, int]]:
        return [self.pivots[c] for c in sorted(self.pivots)]


def _stream_rows(matrix_rows: Iterable[dict[int, int]], track: bool = False) -> _StreamEchelon:
    ech = _StreamEchelon(track=track)
    for row in matrix_rows:
        ech.add(row)
    return ech


# ---------------------------------------------------------------------------
# Hermite normal form
# ---------------------------------------------------------------------------

def hnf(M: IntMatrix) -> tuple[IntMatrix, IntMatrix]:
    """Row Hermite normal form: H = U * M, U unimodular.

    Pivots are positive, entries above each pivot lie in [0, pivot), pivot
    columns strictly increase and zero rows sink to the bottom.  Empty
    matrices are allowed and return empty forms.
    """
    ech = _stream_rows(M.row_dicts(), track=True)
    ech.back_reduce()
    h_rows: list[list[int]] = []
    u_rows: list[list[int]] = []
    m = M.rows
    for c in sorted(ech.pivots):
        row = ech.pivots[c]
        h_rows.append([row.get(j, 0) for j in range(M.cols)])
        tr = ech.trans[c]
        u_rows.append([tr.get(j, 0) for j in range(m)])
    for tr in ech.zero_trans:
        h_rows.append([0] * M.cols)
        u_rows.append([tr.get(j, 0) for j in range(m)])
    assert len(h_rows) == m, "every input row lands in the echelon or the zero block"
    H = IntMatrix.from_rows(h_rows, cols=M.cols) if h_rows else IntMatrix.zero(0, M.cols)
    U = IntMatrix.from_rows(u_rows, cols=m) if u_rows else IntMatrix.identity(0)
    return H, U


# ---------------------------------------------------------------------------
# Smith normal form
# ---------------------------------------------------------------------------

def _dense_smith(rows: list[list[int]], m: int, n: int, track: bool):
    """Minimum-pivot Smith elimination; returns (diag, U, V) (U/V None if untracked)."""
    A = [list(r) for r in rows]
    U = [[1 if i == j else 0 for j in range(m)] for i in range(m)] if track else None
    V = [[1 if i == j else 0 for j in range(n)] for i in range(n)] if track else None

    def row_op(i, q, k):  # row i -= q * row k
        Ai, Ak = A[i], A[k]
        for j in range(n):
            Ai[j] -= q * Ak[j]
        if track:
            Ui, Uk = U[i], U[k]
            for j in range(m):
                Ui[j] -= q * Uk[j]

    def col_op(j, q, k):  # col j -= q * col k
        for i in range(m):
            A[i][j] -= q * A[i][k]
        if track:
            for i in range(n):
                V[i][j] -= q * V[i][k]

    def swap_rows(i, k):
        A[i], A[k] = A[k], A[i]
        if track:
            U[i], U[k] = U[k], U[i]

    def swap_cols(j, k):
        for i in range(m):
            A[i][j], A[i][k] = A[i][k], A[i][j]
        if track:
            for i in range(n):
                V[i][j], V[i][k] = V[i][k], V[i][j]

    def negate_row(i):
        A[i] = [-v for v in A[i]]
        if track:
            U[i] = [-v for v in U[i]]

    r = min(m, n)
    for t in range(r):
        # global minimum-abs pivot in the trailing submatrix, ties by (row, col)
        best = None
        for i in range(t, m):
            Ai = A[i]
            for j in range(t, n):
                v = Ai[j]
                if v:
                    key = (abs(v), i, j)
                    if best is None or key < best[0]:
                        best = (key, i, j)
        if best is None:
            r = t
            break
        _, bi, bj = best
        swap_rows(t, bi)
        swap_cols(t, bj)
        while True:
            # clear column t
            dirty = False
            for i in range(m):
                if i != t and A[i][t]:
                    q = A[i][t] // A[t][t]
                    row_op(i, q, t)
                    if A[i][t]:
                        swap_rows(t, i)
                        dirty = True
            if dirty:
                continue
            # clear row t
            dirty = False
            for j in range(n):
                if j != t and A[t][j]:
                    q = A[t][j] // A[t][t]
                    col_op(j, q, t)
                    if A[t][j]:
                        swap_cols(t, j)
                        dirty = True
            if not dirty:
                break
        if A[t][t] < 0:
            negate_row(t)

    # enforce the divisibility chain on the diagonal
    changed = True
    while changed:
        changed = False
        for i in range(r - 1):
            a, b = A[i][i], A[i + 1][i + 1]
            if a and b and b % a:
                changed = True
                # col i += col i+1, then 2x2 gcd elimination
                col_op(i, -1, i + 1)
                g, s, t_ = xgcd(a, b)
                # rows i, i+1: [[a,0],[b,b]] -> [[g, t*b],[0, a*b/g]]
                Ai, Aj = A[i], A[i + 1]
                for j in range(n):
                    Ai[j], Aj[j] = s * Ai[j] + t_ * Aj[j], \
                        -(b // g) * Ai[j] + (a // g) * Aj[j]
                if track:
                    Ui, Uj = U[i], U[i + 1]
                    for j in range(m):
                        Ui[j], Uj[j] = s * Ui[j] + t_ * Uj[j], \
                            -(b // g) * Ui[j] + (a // g) * Uj[j]
                q = A[i][i + 1] // A[i][i]
                col_op(i + 1, q, i)
                if A[i][i] < 0:
                    negate_row(i)
                if A[i + 1][i + 1] < 0:
                    negate_row(i + 1)
            elif a == 0 and b != 0:
                # zero divisor must trail: swap
                changed = True
                swap_rows(i, i + 1)
                swap_cols(i, i + 1)
    diag = [A[i][i] for i in range(min(m, n))]
    return diag, U, V


def _sparse_divisors(M: IntMatrix) -> list[int]:
    """Nonzero SNF divisors via streaming HNF + unit-pivot stripping."""
    ech = _stream_rows(iter(M.row_dicts()))
    ech.back_reduce()
    ones = 0
    rest: list[dict[int, int]] = []
    for c in sorted(ech.pivots):
        row = ech.pivots[c]
        if abs(row[c]) == 1:
            # after back-reduction no other row meets this column, and the
            # tail clears with column ops local to this row: divisor 1
            ones += 1
        else:
            rest.append(row)
    if not rest:
        return [1] * ones
    cols = sorted({c for row in rest for c in row})
    colmap = {c: j for j, c in enumerate(cols)}
    dense = [[0] * len(cols) for _ in rest]
    for i, row in enumerate(rest):
        for c, v in row.items():
            dense[i][colmap[c]] = v
    diag, _, _ = _dense_smith(dense, len(rest), len(cols), track=False)
    tail = [d for d in diag if d]
    return [1] * ones + tail


def snf_divisors(M: IntMatrix) -> tuple[int, ...]:
    """SNF divisors only (no transforms); picks dense or sparse path by size."""
    if M.nnz > SPARSE_SWITCH:
        nz = _sparse_divisors(M)
    else:
        diag, _, _ = _dense_smith(M.to_rows(), M.rows, M.cols, track=False)
        nz = [d for d in diag if d]
    k = min(M.rows, M.cols)
    return tuple(nz + [0] * (k - len(nz)))


def snf(M: IntMatrix) -> SmithForm:
    """Full Smith normal form with unimodular transforms U, V.

    U * M * V equals the diagonal matrix of divisors (padded with zeros),
    and the divisors form a divisibility chain, unique given M.
    """
    diag, U, V = _dense_smith(M.to_rows(), M.rows, M.cols, track=True)
    nz = [d for d in diag if d]
    divisors = tuple(nz + [0] * (min(M.rows, M.cols) - len(nz)))
    return SmithForm(divisors,
                     IntMatrix.from_rows(U, cols=M.rows),
                     IntMatrix.from_rows(V, cols=M.cols))


def rank(M: IntMatrix) -> int:
    """Rank over Q (= over Z) via the streaming echelon."""
    return _stream_rows(iter(M.row_dicts())).rank


# ---------------------------------------------------------------------------
# kernels, cokernels, solving
# ---------------------------------------------------------------------------

def kernel_basis(M: IntMatrix) -> list[tuple[int, ...]]:
    """Basis of the integer null space {x : Mx = 0}, Hermite-reduced.

    The first nonzero entry of every basis vector is positive; the basis is
    saturated (it spans the full kernel lattice, not a finite-index part).
    """
    Ht, U = hnf(M.transpose())
    ut = U.to_rows()
    kernel_rows = []
    for i, hr in enumerate(Ht.to_rows()):
        if not any(hr):
            kernel_rows.append(ut[i])
    if not kernel_rows:
        return []
    K, _ = hnf(IntMatrix.from_rows(kernel_rows, cols=M.cols))
    out = [tuple(r) for r in K.to_rows() if any(r)]
    return out


def cokernel_invariants(M: IntMatrix, ambient_rank: int) -> AbelianInvariants:
    """Invariants of Z^ambient_rank / rowspace(M).

    Columns of M index the ambient free generators, rows are relations.
    """
    if M.cols != ambient_rank:
        raise ValueError(f"matrix has {M.cols} columns, ambient rank is {ambient_rank}")
    divisors = snf_divisors(M)
    nonzero = [d for d in divisors if d]
    free = ambient_rank - len(nonzero)
    torsion = [d for d in nonzero if d > 1]
    return AbelianInvariants(free, tuple(torsion))


def solve_integer(M: IntMatrix, b: Sequence[int]) -> list[int] | None:
    """One integer solution x of Mx = b, or None when none exists."""
    if len(b) != M.rows:
        raise ValueError(f"rhs has length {len(b)}, matrix has {M.rows} rows")
    form = snf(M)
    ub = form.left_transform.mul_vector(list(b))
    k = len(form.divisors)
    y = [0] * M.cols
    for i in range(M.rows):
        d = form.divisors[i] if i < k else 0
        if d == 0:
            if ub[i] != 0:
                return None
        else:
            if ub[i] % d:
                return None
            if i < M.cols:
                y[i] = ub[i] // d
    x = form.right_transform.mul_vector(y)
    return x


def det_bareiss(M: IntMatrix) -> int:
    """Exact determinant via fraction-free Bareiss elimination."""
    if M.rows != M.cols:
        raise ValueError("determinant of a non-square matrix")
    n = M.rows
    if n == 0:
        return 1
    a = [list(r) for r in M.to_rows()]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            ai, akr = a[i], a[k]
            for j in range(k + 1, n):
                ai[j] = (pk * ai[j] - aik * akr[j]) // prev
            ai[k] = 0
        prev = pk
    return sign * a[n - 1][n - 1]


def unimodular_inverse(U: IntMatrix) -> IntMatrix:
    """Inverse of a unimodular integer matrix (integer entries)."""
    H, W = hnf(U)
    if H != IntMatrix.identity(U.rows):
        raise ValueError("matrix is not unimodular")
    return W
