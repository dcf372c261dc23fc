"""Smith normal form over the integers with unimodular transforms.

Entries are Python ints throughout, so nothing overflows.
"""
from __future__ import annotations

from dataclasses import dataclass


Matrix = list[list[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return []
    cols = len(b[0]) if b else 0
    bt = list(zip(*b)) if b else [()] * cols
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


@dataclass
class SmithForm:
    """``U @ A @ V == D`` with ``D`` diagonal, ``d_1 | d_2 | ...``."""

    diagonal: list[int]
    U: Matrix
    V: Matrix
    V_inv: Matrix

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    @property
    def torsion(self) -> list[int]:
        return [d for d in self.diagonal if d not in (0, 1)]


def smith_normal_form(a: Matrix) -> SmithForm:
    m = len(a)
    n = len(a[0]) if m else 0
    d = [list(map(int, row)) for row in a]
    u = identity(m)
    v = identity(n)
    vi = identity(n)

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in d:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]
        vi[i], vi[j] = vi[j], vi[i]

    def add_row(src, dst, q):  # row dst -= q * row src
        if q:
            d[dst] = [x - q * y for x, y in zip(d[dst], d[src])]
            u[dst] = [x - q * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, q):  # col dst -= q * col src
        if q:
            for row in d:
                row[dst] -= q * row[src]
            for row in v:
                row[dst] -= q * row[src]
            # V_inv gets the inverse operation on rows: row src += q * row dst
            vi[src] = [x + q * y for x, y in zip(vi[src], vi[dst])]

    def negate_row(i):
        d[i] = [-x for x in d[i]]
        u[i] = [-x for x in u[i]]

    t = 0
    while t < min(m, n):
        # smallest nonzero entry in the remaining block as pivot
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if d[i][j] and (piv is None or abs(d[i][j]) < abs(d[piv[0]][piv[1]])):
                    piv = (i, j)
                    if abs(d[i][j]) == 1:
                        break
            if piv and abs(d[piv[0]][piv[1]]) == 1:
                break
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        while True:
            p = d[t][t]
            dirty = False
            for i in range(t + 1, m):
                if d[i][t]:
                    add_row(t, i, d[i][t] // p)
                    if d[i][t]:
                        dirty = True
            for j in range(t + 1, n):
                if d[t][j]:
                    add_col(t, j, d[t][j] // p)
                    if d[t][j]:
                        dirty = True
            if not dirty:
                # divisibility of the rest of the block
                bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                            if d[i][j] % p), None)
                if bad is None:
                    break
                add_row(bad[0], t, -1)
                continue
            # move the smallest remainder into the pivot position
            best = (t, t)
            for i in range(t, m):
                if d[i][t] and abs(d[i][t]) < abs(d[best[0]][best[1]]):
                    best = (i, t)
            for j in range(t, n):
                if d[t][j] and abs(d[t][j]) < abs(d[best[0]][best[1]]):
                    best = (t, j)
            swap_rows(t, best[0])
            swap_cols(t, best[1])
        if d[t][t] < 0:
            negate_row(t)
        t += 1
    diag = [d[i][i] for i in range(min(m, n))]
    return SmithForm(diag, u, v, vi)
