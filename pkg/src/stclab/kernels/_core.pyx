# cython: language_level=3
# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled kernel backend.

Same contracts, enumeration order and tie handling as the numpy reference
(stclab.kernels._ref): odometer order over sorted alphabet indices, first
minimum wins.  The exhaustive and zero-forcing scans keep running residuals
that are updated per changed odometer digit and refreshed periodically to
cap floating-point drift.
"""

import numpy as np

ctypedef double complex cplx

cdef inline double cabs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline Py_ssize_t nearest_point(cplx v, const cplx[::1] points) noexcept nogil:
    cdef Py_ssize_t j, best = 0
    cdef double d, best_d = cabs2(v - points[0])
    for j in range(1, points.shape[0]):
        d = cabs2(v - points[j])
        if d < best_d:
            best_d = d
            best = j
    return best


def ml_scan(y, g, points):
    """Exhaustive scan of ||y - g s||^2 over all candidate symbol vectors."""
    cdef const cplx[::1] yv = np.ascontiguousarray(y, dtype=np.complex128)
    cdef const cplx[:, ::1] gcols = np.ascontiguousarray(np.asarray(g, dtype=np.complex128).T)
    cdef const cplx[::1] pts = np.ascontiguousarray(points, dtype=np.complex128)
    cdef Py_ssize_t k = gcols.shape[0], n2 = gcols.shape[1], m = pts.shape[0]
    cdef long long total = m ** k

    idx_arr = np.zeros(k, dtype=np.int64)
    best_arr = np.zeros(k, dtype=np.int64)
    resid_arr = np.empty(n2, dtype=np.complex128)
    cdef long long[::1] idx = idx_arr
    cdef long long[::1] best_idx = best_arr
    cdef cplx[::1] resid = resid_arr

    cdef double best_d = np.inf
    cdef double d
    cdef long long t
    cdef Py_ssize_t a, j
    cdef cplx delta, acc

    with nogil:
        for a in range(n2):
            acc = 0
            for j in range(k):
                acc = acc + gcols[j, a] * pts[0]
            resid[a] = yv[a] - acc
        for t in range(total):
            if (t & 0x0FFF) == 0 and t > 0:  # periodic full refresh caps drift
                for a in range(n2):
                    acc = 0
                    for j in range(k):
                        acc = acc + gcols[j, a] * pts[idx[j]]
                    resid[a] = yv[a] - acc
            d = 0.0
            for a in range(n2):
                d += cabs2(resid[a])
            if d < best_d:
                best_d = d
                for j in range(k):
                    best_idx[j] = idx[j]
            if t == total - 1:
                break
            j = k - 1
            while True:
                delta = pts[(idx[j] + 1) % m] - pts[idx[j]]
                for a in range(n2):
                    resid[a] = resid[a] - gcols[j, a] * delta
                idx[j] += 1
                if idx[j] < m:
                    break
                idx[j] = 0
                j -= 1
    return best_arr, best_d, int(total)


def zf_scan(y, hsel, w, gr, points):
    """One recursion step: scan the selected group, zero-force the rest."""
    cdef const cplx[::1] yv = np.ascontiguousarray(y, dtype=np.complex128)
    hs = np.asarray(hsel, dtype=np.complex128)
    wz = np.asarray(w, dtype=np.complex128)
    cdef const cplx[:, ::1] hcols = np.ascontiguousarray(hs.T)
    cdef const cplx[:, ::1] wmat = np.ascontiguousarray(wz)
    cdef const cplx[:, ::1] whcols = np.ascontiguousarray((wz @ hs).T)
    cdef const cplx[:, ::1] grm = np.ascontiguousarray(gr, dtype=np.complex128)
    cdef const cplx[::1] pts = np.ascontiguousarray(points, dtype=np.complex128)
    cdef Py_ssize_t n = hcols.shape[0], n2 = hcols.shape[1], k2 = wmat.shape[0], m = pts.shape[0]
    cdef long long total = m ** n

    idx_arr = np.zeros(n, dtype=np.int64)
    best_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] idx = idx_arr
    cdef long long[::1] best_idx = best_arr
    cdef cplx[::1] resid = np.empty(n2, dtype=np.complex128)
    cdef cplx[::1] zf = np.empty(k2, dtype=np.complex128)
    cdef cplx[::1] qpt = np.empty(k2, dtype=np.complex128)

    cdef double best_d = np.inf
    cdef double d
    cdef long long t
    cdef Py_ssize_t a, b, j
    cdef cplx delta, acc

    with nogil:
        for a in range(n2):
            acc = 0
            for j in range(n):
                acc = acc + hcols[j, a] * pts[0]
            resid[a] = yv[a] - acc
        for b in range(k2):
            acc = 0
            for a in range(n2):
                acc = acc + wmat[b, a] * resid[a]
            zf[b] = acc
        for t in range(total):
            if (t & 0x0FFF) == 0 and t > 0:  # periodic full refresh caps drift
                for a in range(n2):
                    acc = 0
                    for j in range(n):
                        acc = acc + hcols[j, a] * pts[idx[j]]
                    resid[a] = yv[a] - acc
                for b in range(k2):
                    acc = 0
                    for a in range(n2):
                        acc = acc + wmat[b, a] * resid[a]
                    zf[b] = acc
            for b in range(k2):
                qpt[b] = pts[nearest_point(zf[b], pts)]
            d = 0.0
            for a in range(n2):
                acc = resid[a]
                for b in range(k2):
                    acc = acc - grm[a, b] * qpt[b]
                d += cabs2(acc)
            if d < best_d:
                best_d = d
                for j in range(n):
                    best_idx[j] = idx[j]
            if t == total - 1:
                break
            j = n - 1
            while True:
                delta = pts[(idx[j] + 1) % m] - pts[idx[j]]
                for a in range(n2):
                    resid[a] = resid[a] - hcols[j, a] * delta
                for b in range(k2):
                    zf[b] = zf[b] - whcols[j, b] * delta
                idx[j] += 1
                if idx[j] < m:
                    break
                idx[j] = 0
                j -= 1
    return best_arr, best_d, int(total)


cdef bint lex_smaller(const long long[::1] a, const long long[::1] b, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(k):
        if a[i] != b[i]:
            return a[i] < b[i]
    return False


def sphere_scan(r, z, points, init_idx=None, natural_order=True):
    """Depth-first sphere search of ||z - r s||^2 for upper-triangular r."""
    cdef const cplx[:, ::1] rm = np.ascontiguousarray(r, dtype=np.complex128)
    cdef const cplx[::1] zv = np.ascontiguousarray(z, dtype=np.complex128)
    cdef const cplx[::1] pts = np.ascontiguousarray(points, dtype=np.complex128)
    cdef Py_ssize_t k = zv.shape[0], m = pts.shape[0]
    cdef bint natural = bool(natural_order)

    best_arr = np.zeros(k, dtype=np.int64)
    cdef long long[::1] best_idx = best_arr
    cdef long long[::1] idx = np.zeros(k, dtype=np.int64)
    cdef cplx[::1] svals = np.zeros(k, dtype=np.complex128)
    cdef cplx[::1] rhs = np.zeros(k, dtype=np.complex128)
    cdef double[::1] acc = np.zeros(k, dtype=np.float64)
    cdef long long[::1] child = np.zeros(k, dtype=np.int64)
    cdef double[:, ::1] cost = np.zeros((k, m), dtype=np.float64)
    cdef long long[:, ::1] order = np.zeros((k, m), dtype=np.int64)

    cdef double best_d = np.inf
    cdef double d, ci
    cdef long long leaves = 0, tmp
    cdef Py_ssize_t level, mm, j, p, q
    cdef cplx s_acc

    if init_idx is not None:
        ii = np.asarray(init_idx, dtype=np.int64)
        best_d = 0.0
        for level in range(k - 1, -1, -1):
            s_acc = zv[level]
            for mm in range(level + 1, k):
                s_acc = s_acc - rm[level, mm] * pts[ii[mm]]
            best_d += cabs2(s_acc - rm[level, level] * pts[ii[level]])
            best_idx[level] = ii[level]

    with nogil:
        level = k - 1
        rhs[level] = zv[level]
        child[level] = 0
        if not natural:
            for p in range(m):
                cost[level, p] = cabs2(rhs[level] - rm[level, level] * pts[p])
                order[level, p] = p
            for p in range(1, m):  # stable insertion sort by child cost
                q = p
                while q > 0 and cost[level, order[level, q]] < cost[level, order[level, q - 1]]:
                    tmp = order[level, q]
                    order[level, q] = order[level, q - 1]
                    order[level, q - 1] = tmp
                    q -= 1
        while True:
            if child[level] >= m:
                level += 1
                if level == k:
                    break
                child[level] += 1
                continue
            j = child[level] if natural else order[level, child[level]]
            if natural:
                ci = cabs2(rhs[level] - rm[level, level] * pts[j])
            else:
                ci = cost[level, j]
            d = ci if level == k - 1 else acc[level + 1] + ci
            if d > best_d:
                if natural:
                    child[level] += 1
                else:
                    child[level] = m  # sorted children: the rest are no better
                continue
            idx[level] = j
            svals[level] = pts[j]
            if level == 0:
                leaves += 1
                if d < best_d or (d == best_d and lex_smaller(idx, best_idx, k)):
                    best_d = d
                    for mm in range(k):
                        best_idx[mm] = idx[mm]
                child[level] += 1
            else:
                acc[level] = d
                level -= 1
                child[level] = 0
                s_acc = zv[level]
                for mm in range(level + 1, k):
                    s_acc = s_acc - rm[level, mm] * svals[mm]
                rhs[level] = s_acc
                if not natural:
                    for p in range(m):
                        cost[level, p] = cabs2(rhs[level] - rm[level, level] * pts[p])
                        order[level, p] = p
                    for p in range(1, m):
                        q = p
                        while q > 0 and cost[level, order[level, q]] < cost[level, order[level, q - 1]]:
                            tmp = order[level, q]
                            order[level, q] = order[level, q - 1]
                            order[level, q - 1] = tmp
                            q -= 1
    return best_arr, best_d, int(leaves)
