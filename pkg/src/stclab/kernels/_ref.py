"""Pure-numpy kernel backend.

Candidates are enumerated in odometer order over alphabet indices (last
digit fastest), which is lexicographic order over the canonically sorted
point list; argmin keeps the first minimum, so ties resolve to the
lexicographically smallest candidate.  Work is chunked to bound memory.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 1 << 14


def _digit_chunk(start: int, stop: int, m: int, k: int) -> np.ndarray:
    """Rows start..stop-1 of the odometer over k base-m digits."""
    return np.stack(np.unravel_index(np.arange(start, stop), (m,) * k), axis=1)


def ml_scan(y: np.ndarray, g: np.ndarray, points: np.ndarray):
    """Exhaustive scan of ||y - g s||^2 over all candidate symbol vectors.

    Returns (best_index_vector, best_distance, leaves_evaluated).
    """
    y = np.asarray(y, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    points = np.asarray(points, dtype=np.complex128)
    k = g.shape[1]
    m = points.size
    total = m**k
    best_dist = np.inf
    best_idx = np.zeros(k, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        digits = _digit_chunk(start, min(start + _CHUNK, total), m, k)
        err = y[None, :] - points[digits] @ g.T
        dist = np.einsum("ij,ij->i", err.conj(), err).real
        j = int(np.argmin(dist))
        if dist[j] < best_dist:
            best_dist = float(dist[j])
            best_idx = digits[j].astype(np.int64)
    return best_idx, best_dist, total


def zf_scan(y: np.ndarray, hsel: np.ndarray, w: np.ndarray, gr: np.ndarray, points: np.ndarray):
    """One recursion step: scan the selected group, zero-force the rest.

    For each candidate s of the selected group: r = y - hsel s, the remaining
    symbols are estimated as the quantization of w r and the candidate is
    scored by ||r - gr Q(w r)||^2.  Returns (best_index_vector, best_distance,
    leaves_evaluated).
    """
    y = np.asarray(y, dtype=np.complex128)
    hsel = np.asarray(hsel, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    gr = np.asarray(gr, dtype=np.complex128)
    points = np.asarray(points, dtype=np.complex128)
    n = hsel.shape[1]
    m = points.size
    total = m**n
    best_dist = np.inf
    best_idx = np.zeros(n, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        digits = _digit_chunk(start, min(start + _CHUNK, total), m, n)
        r = y[None, :] - points[digits] @ hsel.T
        t = r @ w.T
        t_hat = points[np.argmin(np.abs(t[..., None] - points) ** 2, axis=-1)]
        err = r - t_hat @ gr.T
        dist = np.einsum("ij,ij->i", err.conj(), err).real
        j = int(np.argmin(dist))
        if dist[j] < best_dist:
            best_dist = float(dist[j])
            best_idx = digits[j].astype(np.int64)
    return best_idx, best_dist, total


def _lex_smaller(a: np.ndarray, b: np.ndarray) -> bool:
    for x, v in zip(a, b):
        if x != v:
            return bool(x < v)
    return False


def _leaf_distance(r: np.ndarray, z: np.ndarray, idx: np.ndarray, points: np.ndarray) -> float:
    """Distance of a full candidate, accumulated level by level as the DFS does."""
    k = z.size
    svals = points[idx]
    d = 0.0
    for level in range(k - 1, -1, -1):
        rhs = z[level] - r[level, level + 1 :] @ svals[level + 1 :]
        d += float(abs(rhs - r[level, level] * svals[level]) ** 2)
    return d


def sphere_scan(
    r: np.ndarray,
    z: np.ndarray,
    points: np.ndarray,
    init_idx: np.ndarray | None = None,
    natural_order: bool = True,
):
    """Depth-first sphere search of ||z - r s||^2 for upper-triangular r.

    ``init_idx`` optionally seeds the search radius with a known candidate
    (e.g. the Babai point).  With ``natural_order`` children are visited by
    alphabet index; otherwise closest-first (Schnorr-Euchner), which prunes
    harder but returns the identical argmin.  Returns (best_index_vector,
    best_distance, leaves_evaluated).
    """
    r = np.asarray(r, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    points = np.asarray(points, dtype=np.complex128)
    k = z.size
    m = points.size
    if init_idx is not None:
        best_idx = np.asarray(init_idx, dtype=np.int64).copy()
        best_dist = _leaf_distance(r, z, best_idx, points)
    else:
        best_idx = np.zeros(k, dtype=np.int64)
        best_dist = np.inf
    idx = np.zeros(k, dtype=np.int64)
    svals = np.zeros(k, dtype=np.complex128)
    leaves = 0

    def visit(level: int, acc: float) -> None:
        nonlocal best_dist, best_idx, leaves
        rhs = z[level] - r[level, level + 1 :] @ svals[level + 1 :]
        child_cost = np.abs(rhs - r[level, level] * points) ** 2
        order = range(m) if natural_order else np.argsort(child_cost, kind="stable")
        for j in order:
            d = acc + float(child_cost[j])
            if d > best_dist:
                if natural_order:
                    continue
                break  # closest-first: every later child is at least as bad
            idx[level] = j
            svals[level] = points[j]
            if level == 0:
                leaves += 1
                if d < best_dist or (d == best_dist and _lex_smaller(idx, best_idx)):
                    best_dist = d
                    best_idx = idx.copy()
            else:
                visit(level - 1, d)

    visit(k - 1, 0.0)
    return best_idx, best_dist, leaves
