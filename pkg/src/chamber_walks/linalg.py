"""Exact integer linear algebra used by the walk engine.

Traces of matrix powers are computed modulo word-sized primes with float64
BLAS products (every partial sum stays below 2**53, so the float products
are exact) and glued together by the Chinese remainder theorem.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np


class SingularSystem(ValueError):
    pass


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if p % q == 0:
            return p == q
    d, s = p - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic for p < 3.3e24
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, p)
        if x in (1, p - 1):
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True


def primes_below(bound: int, count: int) -> list[int]:
    """The ``count`` largest primes below ``bound``."""
    out = []
    p = bound - 1
    while len(out) < count:
        if p < 3:
            raise ValueError("ran out of primes")
        if _is_prime(p):
            out.append(p)
        p -= 1
    return out


def prime_bits_for(size: int) -> int:
    """Largest prime width such that ``size * p**2 < 2**53``."""
    return max(8, (53 - math.ceil(math.log2(max(size, 2)))) // 2 - 1)


def crt_symmetric(residues: Sequence[int], moduli: Sequence[int]) -> int:
    """CRT reconstruction into the symmetric range around 0."""
    x, m = 0, 1
    for r, p in zip(residues, moduli):
        # x' = x + m * t with x' = r (mod p)
        t = ((r - x) * pow(m, -1, p)) % p
        x += m * t
        m *= p
    if x > m // 2:
        x -= m
    return x


def traces_of_powers(M: np.ndarray | Sequence[Sequence[int]], L: int, bound_bits: int) -> list[int]:
    """Exact ``tr(M**l)`` for l = 1..L of an integer matrix M.

    ``bound_bits`` must satisfy ``|tr(M**l)| < 2**bound_bits`` for every l.
    """
    rows = [[int(v) for v in r] for r in M]
    N = len(rows)
    if N == 0 or L <= 0:
        return [0] * max(L, 0)
    bits = prime_bits_for(N)
    count = (bound_bits + 1) // (bits - 1) + 2
    primes = primes_below(1 << bits, count)
    k = len(primes)
    P = np.array(primes, dtype=np.float64).reshape(k, 1, 1)
    base = np.empty((k, N, N), dtype=np.float64)
    for t, p in enumerate(primes):
        base[t] = np.array([[v % p for v in r] for r in rows], dtype=np.float64)
    cur = base.copy()
    residues = np.empty((L, k), dtype=np.int64)
    for l in range(L):
        if l:
            cur = np.remainder(np.matmul(cur, base), P)
        tr = np.remainder(np.trace(cur, axis1=1, axis2=2), P[:, 0, 0])
        residues[l] = tr.astype(np.int64)
    return [crt_symmetric([int(v) for v in residues[l]], primes) for l in range(L)]


def bareiss_solve(A: list[list[int]], b: list[int]) -> list[Fraction]:
    """Solve the (possibly overdetermined, consistent) system A x = b exactly.

    Fraction-free elimination with the first nonzero pivot in row order.
    Raises SingularSystem when the solution is not unique and ValueError
    when the system is inconsistent.
    """
    rows = len(A)
    cols = len(A[0]) if rows else 0
    M = [list(map(int, A[i])) + [int(b[i])] for i in range(rows)]
    prev = 1
    r = 0
    pivots = []
    for c in range(cols):
        piv = next((i for i in range(r, rows) if M[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            M[r], M[piv] = M[piv], M[r]
        pr = M[r]
        a = pr[c]
        for i in range(r + 1, rows):
            row = M[i]
            f = row[c]
            if f == 0:
                if prev != 1 or a != 1:
                    row[c + 1:] = [x * a // prev for x in row[c + 1:]]
                continue
            row[c + 1:] = [(x * a - f * y) // prev for x, y in zip(row[c + 1:], pr[c + 1:])]
            row[c] = 0
        prev = a
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if len(pivots) < cols:
        raise SingularSystem(f"solution space has dimension {cols - len(pivots)}")
    for i in range(r, rows):
        if M[i][cols] != 0:
            raise ValueError("inconsistent system")
    x = [Fraction(0)] * cols
    for k in range(len(pivots) - 1, -1, -1):
        c = pivots[k]
        row = M[k]
        s = Fraction(row[cols])
        for j in range(c + 1, cols):
            if row[j]:
                s -= row[j] * x[j]
        x[c] = s / row[c]
    return x


def common_denominator(values) -> int:
    d = 1
    for v in values:
        q = Fraction(v).denominator
        d = d * q // math.gcd(d, q)
    return d


def charpoly_fraction(K: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Characteristic polynomial det(xI - K), coefficients from x^N down.

    Faddeev–LeVerrier in exact rationals; meant for small matrices.
    """
    N = len(K)
    A = [[Fraction(v) for v in r] for r in K]
    coeffs = [Fraction(1)]
    Mk = [[Fraction(0)] * N for _ in range(N)]
    for k in range(1, N + 1):
        # M_k = A M_{k-1} + c_{k-1} I
        c_prev = coeffs[-1]
        if k == 1:
            Mk = [[Fraction(int(i == j)) for j in range(N)] for i in range(N)]
        else:
            Mk = [[sum((A[i][t] * Mk[t][j] for t in range(N)), Fraction(0)) for j in range(N)]
                  for i in range(N)]
            for i in range(N):
                Mk[i][i] += c_prev
        AM = [[sum((A[i][t] * Mk[t][j] for t in range(N)), Fraction(0)) for j in range(N)]
              for i in range(N)]
        coeffs.append(-sum((AM[i][i] for i in range(N)), Fraction(0)) / k)
    return coeffs
