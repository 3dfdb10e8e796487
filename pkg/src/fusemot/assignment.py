"""Rectangular Munkres (Hungarian) assignment with gating.

Gated entries are +inf sentinels. The solver maximizes the number of
finite-cost matches first, then minimizes total cost among those, so a
gated pair can never appear in the result.
"""

from __future__ import annotations

import math

import numpy as np

INFEASIBLE = math.inf


def gate(matrix: np.ndarray, tau) -> np.ndarray:
    """Replace every entry strictly greater than tau with +inf.

    ``tau`` is either a scalar or a per-column vector (class-dependent
    gates). Entries equal to tau are kept.
    """
    matrix = np.asarray(matrix, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0):
        raise ValueError("gating threshold must be positive")
    out = matrix.copy()
    out[matrix > tau] = INFEASIBLE
    return out


def solve(matrix: np.ndarray) -> list[tuple[int, int]]:
    """Optimal one-to-one assignment of a (possibly rectangular) cost matrix.

    Returns row/column index pairs sorted by row. Among all assignments
    using only finite entries, the result has maximum cardinality and,
    among those, minimum total cost. Empty matrices yield an empty list.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise ValueError("cost matrix must be 2-D")
    n_rows, n_cols = matrix.shape
    if n_rows == 0 or n_cols == 0:
        return []
    finite = matrix[np.isfinite(matrix)]
    if finite.size == 0:
        return []
    if np.any(finite < 0):
        raise ValueError("costs must be non-negative")

    # Pad to square; infeasible entries become a cost larger than any
    # feasible total so the solver only crosses a gate when forced to,
    # and such pairs are dropped afterwards.
    n = max(n_rows, n_cols)
    big = float(finite.sum()) + float(finite.max()) + 1.0
    cost = np.full((n, n), 0.0)
    cost[:n_rows, :n_cols] = np.where(np.isfinite(matrix), matrix, big)

    assignment = _munkres_square(cost)

    pairs = [
        (r, c)
        for r, c in assignment
        if r < n_rows and c < n_cols and math.isfinite(matrix[r, c])
    ]
    return sorted(pairs)


def _munkres_square(cost: np.ndarray) -> list[tuple[int, int]]:
    """Classic star/prime Munkres on a square cost matrix."""
    n = cost.shape[0]
    C = cost.copy()
    C -= C.min(axis=1)[:, None]
    C -= C.min(axis=0)[None, :]

    starred = np.zeros((n, n), dtype=bool)
    primed = np.zeros((n, n), dtype=bool)
    row_covered = np.zeros(n, dtype=bool)
    col_covered = np.zeros(n, dtype=bool)

    # star a zero in each row/column greedily
    for r in range(n):
        for c in range(n):
            if C[r, c] == 0.0 and not starred[r].any() and not starred[:, c].any():
                starred[r, c] = True

    while True:
        # cover columns containing a starred zero
        col_covered = starred.any(axis=0)
        if col_covered.sum() == n:
            break

        while True:
            # find an uncovered zero
            zero = _find_uncovered_zero(C, row_covered, col_covered)
            if zero is None:
                # adjust the matrix by the smallest uncovered value
                uncovered = C[~row_covered][:, ~col_covered]
                m = uncovered.min()
                C[~row_covered] -= m
                C[:, col_covered] += m
                continue
            r, c = zero
            primed[r, c] = True
            star_col = np.flatnonzero(starred[r])
            if star_col.size:
                row_covered[r] = True
                col_covered[star_col[0]] = False
            else:
                # augmenting path of alternating primes and stars
                path = [(r, c)]
                while True:
                    star_row = np.flatnonzero(starred[:, path[-1][1]])
                    if not star_row.size:
                        break
                    path.append((star_row[0], path[-1][1]))
                    prime_col = np.flatnonzero(primed[path[-1][0]])
                    path.append((path[-1][0], prime_col[0]))
                for pr, pc in path:
                    starred[pr, pc] = not starred[pr, pc]
                primed[:] = False
                row_covered[:] = False
                col_covered[:] = False
                break

    rows, cols = np.nonzero(starred)
    return list(zip(rows.tolist(), cols.tolist()))


def _find_uncovered_zero(C, row_covered, col_covered):
    rows = np.flatnonzero(~row_covered)
    cols = np.flatnonzero(~col_covered)
    if rows.size == 0 or cols.size == 0:
        return None
    sub = C[np.ix_(rows, cols)]
    idx = np.argwhere(sub == 0.0)
    if idx.size == 0:
        return None
    return int(rows[idx[0, 0]]), int(cols[idx[0, 1]])


def total_cost(matrix: np.ndarray, pairs) -> float:
    """Sum of the original matrix entries over an assignment."""
    matrix = np.asarray(matrix, dtype=float)
    return float(sum(matrix[r, c] for r, c in pairs))
