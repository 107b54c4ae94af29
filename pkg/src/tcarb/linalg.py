"""Exact linear algebra over the rationals.

Dense helpers work on lists of rows; `solve_sparse` works on sparse columns
and is what the LP warm start uses to re-solve a basis exactly.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def rref(rows: Sequence[Sequence]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form and pivot column list."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : rows @ x = 0}."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    red, piv = rref(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for r, pc in enumerate(piv):
            x[pc] = -red[r][f]
        basis.append(x)
    return basis


def independent_subset(vectors: Sequence[Sequence]) -> list[int]:
    """Indices of a maximal linearly independent subset, greedy in order."""
    chosen: list[int] = []
    echelon: list[list[Fraction]] = []
    lead: list[int] = []
    for idx, v in enumerate(vectors):
        w = list(map(Fraction, v))
        for row, c in zip(echelon, lead):
            if w[c] != 0:
                f = w[c] / row[c]
                w = [a - f * b for a, b in zip(w, row)]
        c = next((k for k, x in enumerate(w) if x != 0), None)
        if c is not None:
            echelon.append(w)
            lead.append(c)
            chosen.append(idx)
    return chosen


def span_basis(vectors: Sequence[Sequence]) -> list[list[Fraction]]:
    return [list(map(Fraction, vectors[i])) for i in independent_subset(vectors)]


def in_span(basis: Sequence[Sequence], v: Sequence) -> bool:
    if all(x == 0 for x in v):
        return True
    if not basis:
        return False
    return rank(list(basis) + [v]) == rank(basis)


def orthogonal_complement(basis: Sequence[Sequence], dim: int) -> list[list[Fraction]]:
    return nullspace(list(basis), dim)


def intersect_subspaces(a: Sequence[Sequence], b: Sequence[Sequence], dim: int) -> list[list[Fraction]]:
    """Basis of span(a) ∩ span(b) via the complement of the sum of complements."""
    comp = orthogonal_complement(a, dim) + orthogonal_complement(b, dim)
    return nullspace(comp, dim) if comp else [[Fraction(int(i == j)) for j in range(dim)] for i in range(dim)]


def solve_dense(a: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Unique solution of a square system, or None if singular."""
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(rhs)] for row, rhs in zip(a, b)]
    red, piv = rref(aug)
    if piv != list(range(n)):
        return None
    return [red[i][n] for i in range(n)]


def solve_sparse(columns: Sequence[dict], rows: Sequence[int], rhs: dict, zero):
    """Solve B x = rhs where B's columns are sparse dicts restricted to `rows`.

    `rows` lists the row labels kept (len(rows) == len(columns)); entries of
    columns outside `rows` are ignored. Returns the list x or None if B is
    singular. Gaussian elimination on row dicts with a sparsest-row pivot rule.
    """
    n = len(columns)
    if n != len(rows):
        return None
    pos = {r: k for k, r in enumerate(rows)}
    mat: list[dict[int, object]] = [dict() for _ in range(n)]
    for j, col in enumerate(columns):
        for r, v in col.items():
            k = pos.get(r)
            if k is not None and v != 0:
                mat[k][j] = v
    b = [rhs.get(r, zero) for r in rows]
    by_col: dict[int, set[int]] = {}
    for i, row in enumerate(mat):
        for j in row:
            by_col.setdefault(j, set()).add(i)
    pivot_of_col: dict[int, int] = {}
    done_rows: set[int] = set()
    order: list[tuple[int, int]] = []
    for j in sorted(range(n), key=lambda c: len(by_col.get(c, ()))):
        cand = [i for i in by_col.get(j, ()) if i not in done_rows and mat[i].get(j, zero) != 0]
        if not cand:
            return None
        p = min(cand, key=lambda i: (len(mat[i]), i))
        prow = mat[p]
        pv = prow[j]
        for i in list(by_col.get(j, ())):
            if i == p or i in done_rows:
                continue
            f = mat[i].get(j)
            if f is None or f == 0:
                continue
            f = f / pv
            row = mat[i]
            for c, v in prow.items():
                nv = row.get(c, zero) - f * v
                if nv == 0:
                    if c in row:
                        del row[c]
                        by_col[c].discard(i)
                else:
                    if c not in row:
                        by_col.setdefault(c, set()).add(i)
                    row[c] = nv
            b[i] = b[i] - f * b[p]
        done_rows.add(p)
        pivot_of_col[j] = p
        order.append((j, p))
    x = [zero] * n
    for j, p in reversed(order):
        row = mat[p]
        s = b[p]
        for c, v in row.items():
            if c != j:
                s = s - v * x[c]
        x[j] = s / row[j]
    return x


def sparse_independent(vectors: Sequence[dict]) -> list[dict]:
    """Maximal linearly independent subset of sparse vectors, greedy in order."""
    pivots: dict[int, dict] = {}
    chosen = []
    for v in vectors:
        w = {k: x for k, x in v.items() if x != 0}
        while w:
            c = min(w)
            row = pivots.get(c)
            if row is None:
                pivots[c] = w
                chosen.append(v)
                break
            f = w[c] / row[c]
            for k, x in row.items():
                nv = w.get(k, 0) - f * x
                if nv == 0:
                    w.pop(k, None)
                else:
                    w[k] = nv
    return chosen
