"""Hot numeric kernels: numba @njit with a pure-numpy fallback.

The fallback is selected by setting the environment variable
``NILCOSET_PURE_NUMPY=1`` before import (or automatically when numba is not
importable).  Both paths implement identical semantics; see
benchmarks/bench_kernels.py for a speed comparison.

Kernels here are deliberately few: modular Gaussian elimination (the inner
loop of the Z-coset certificate search, where exact determinants are
reconstructed from many mod-p eliminations) and the pair-product order
table used by the Alt(5) subgroup scan in PSL(2, 29).  Everything with
arbitrary-precision integers or hash-heavy search state stays in plain
Python by necessity.
"""

from __future__ import annotations

import os

import numpy as np

FORCE_NUMPY = os.environ.get("NILCOSET_PURE_NUMPY", "") not in ("", "0")

try:
    if FORCE_NUMPY:
        raise ImportError("pure-numpy path forced")
    from numba import njit as _njit
    NUMBA_ACTIVE = True
except ImportError:
    NUMBA_ACTIVE = False
    _njit = None


# -- mod-p determinant -------------------------------------------------------

def _det_mod_p_impl(a, p):
    n = a.shape[0]
    det = 1
    for k in range(n):
        piv = -1
        for i in range(k, n):
            if a[i, k] != 0:
                piv = i
                break
        if piv < 0:
            return 0
        if piv != k:
            for j in range(k, n):
                t = a[k, j]
                a[k, j] = a[piv, j]
                a[piv, j] = t
            det = (p - det) % p
        akk = a[k, k]
        det = (det * akk) % p
        # modular inverse by Fermat (p prime)
        inv = 1
        b = akk % p
        e = p - 2
        while e:
            if e & 1:
                inv = (inv * b) % p
            b = (b * b) % p
            e >>= 1
        for i in range(k + 1, n):
            f = (a[i, k] * inv) % p
            if f:
                for j in range(k, n):
                    a[i, j] = (a[i, j] - f * a[k, j]) % p
    return det


def det_mod_p_numpy(a: np.ndarray, p: int) -> int:
    """Determinant mod prime p by row elimination (vectorized rows)."""
    a = np.mod(a.astype(np.int64), p)
    n = a.shape[0]
    det = 1
    for k in range(n):
        nz = np.nonzero(a[k:, k])[0]
        if nz.size == 0:
            return 0
        i = k + int(nz[0])
        if i != k:
            a[[k, i]] = a[[i, k]]
            det = (-det) % p
        akk = int(a[k, k])
        det = det * akk % p
        inv = pow(akk, p - 2, p)
        below = a[k + 1:, k]
        if below.size:
            f = (below * inv) % p
            a[k + 1:, k:] = (a[k + 1:, k:] - f[:, None] * a[k, k:]) % p
    return int(det)


# -- pair-product permutation orders -----------------------------------------

def _product_order_table_impl(xs, ys, out):
    na, n = xs.shape
    nb = ys.shape[0]
    comp = np.empty(n, dtype=np.int64)
    for i in range(na):
        for j in range(nb):
            for t in range(n):
                comp[t] = ys[j, xs[i, t]]
            # order = lcm of cycle lengths
            order = 1
            seen = np.zeros(n, dtype=np.uint8)
            for s in range(n):
                if seen[s]:
                    continue
                length = 0
                t = s
                while not seen[t]:
                    seen[t] = 1
                    t = comp[t]
                    length += 1
                # lcm(order, length)
                a, b = order, length
                while b:
                    a, b = b, a % b
                order = order // a * length
            out[i, j] = order


def product_order_table_numpy(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Order of the composition x*y (x applied first) for every pair.

    xs: (A, n) image arrays, ys: (B, n).  Returns (A, B) int32 orders.
    Fallback computes orders by repeated composition (max order <= a bound
    derived from the degree via Landau's function; iterating degree**2 is a
    safe cap for the degrees used here).
    """
    A, n = xs.shape
    B = ys.shape[0]
    # comp[i, j, t] = ys[j, xs[i, t]]
    comp = ys.astype(np.int16)[np.arange(B)[None, :, None], xs[:, None, :]]
    out = np.zeros((A, B), dtype=np.int32)
    cur = comp.copy()
    ident = np.arange(n, dtype=comp.dtype)
    remaining = np.ones((A, B), dtype=bool)
    k = 1
    max_iters = n * n
    while remaining.any() and k <= max_iters:
        done = remaining & (cur == ident).all(axis=2)
        out[done] = k
        remaining &= ~done
        if not remaining.any():
            break
        # cur = cur * comp (apply cur first, then comp)
        idx = np.take_along_axis(comp, cur, axis=2)
        cur = idx
        k += 1
    return out


if NUMBA_ACTIVE:
    _det_mod_p_jit = _njit(cache=True)(_det_mod_p_impl)
    _product_order_table_jit = _njit(cache=True)(_product_order_table_impl)

    def det_mod_p(a: np.ndarray, p: int) -> int:
        return int(_det_mod_p_jit(np.mod(a.astype(np.int64), p), np.int64(p)))

    def product_order_table(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        out = np.zeros((xs.shape[0], ys.shape[0]), dtype=np.int64)
        _product_order_table_jit(xs.astype(np.int64), ys.astype(np.int64), out)
        return out.astype(np.int32)
else:
    def det_mod_p(a: np.ndarray, p: int) -> int:
        return det_mod_p_numpy(a, p)

    def product_order_table(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return product_order_table_numpy(xs, ys)


# -- exact determinant via CRT over word-size primes --------------------------

_CRT_PRIMES: list[int] = []


def _crt_primes(count: int) -> list[int]:
    """First `count` primes below 2**31 (descending), cached."""
    global _CRT_PRIMES
    candidate = _CRT_PRIMES[-1] - 2 if _CRT_PRIMES else (2 ** 31 - 1)
    while len(_CRT_PRIMES) < count:
        p = candidate
        is_p = p > 1
        d = 3
        if p % 2 == 0:
            is_p = False
        while is_p and d * d <= p:
            if p % d == 0:
                is_p = False
            d += 2
        if is_p:
            _CRT_PRIMES.append(p)
        candidate -= 2
    return _CRT_PRIMES[:count]


def det_exact(a: np.ndarray) -> int:
    """Exact integer determinant by CRT over mod-p eliminations.

    The number of primes is driven by the Hadamard bound, so the result is
    exact, not probabilistic.
    """
    n = a.shape[0]
    if n == 0:
        return 1
    from math import isqrt
    # Hadamard bound: product of row 2-norms
    bound = 1
    for i in range(n):
        s = sum(int(x) * int(x) for x in a[i])
        bound *= isqrt(s) + 1
    need = 2 * bound + 1
    primes: list[int] = []
    mod = 1
    k = 16
    while mod < need:
        primes = _crt_primes(k)
        mod = 1
        for p in primes:
            mod *= p
            if mod >= need:
                primes = primes[: primes.index(p) + 1]
                break
        k *= 2
    residue = 0
    mod = 1
    ai64 = a.astype(np.int64)
    for p in primes:
        rp = det_mod_p(ai64, p)
        # CRT combine
        g, s, _ = _xgcd(mod, p)
        assert g == 1
        diff = (rp - residue) % p
        residue = residue + mod * ((diff * s) % p)
        mod *= p
        residue %= mod
    if residue > mod // 2:
        residue -= mod
    return int(residue)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t
