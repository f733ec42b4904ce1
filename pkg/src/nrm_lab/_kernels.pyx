# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: bounded-variable simplex and the admission event loop.

Statement-for-statement port of ``_pykernels``; both must produce
bit-identical results. Do not build with -ffast-math or FMA contraction.
"""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.math cimport INFINITY

cnp.import_array()

cdef enum:
    DEGENERATE_SWITCH = 25

STATUS_OPTIMAL = 0
STATUS_ITERATION_LIMIT = 1
STATUS_UNBOUNDED = 2

BACKEND = "cython"


cdef struct Workspace:
    int n
    int m
    int N
    double *tab      # m x N, row-major
    double *upper    # N
    double *xval     # N
    double *d        # N
    int *basis       # m
    char *is_basic   # N
    char *at_upper   # N


cdef int ws_alloc(Workspace *ws, int n, int m) nogil:
    ws.n = n
    ws.m = m
    ws.N = n + m
    ws.tab = <double *> malloc(sizeof(double) * (m * (n + m) + 1))
    ws.upper = <double *> malloc(sizeof(double) * (n + m))
    ws.xval = <double *> malloc(sizeof(double) * (n + m))
    ws.d = <double *> malloc(sizeof(double) * (n + m))
    ws.basis = <int *> malloc(sizeof(int) * (m + 1))
    ws.is_basic = <char *> malloc(n + m)
    ws.at_upper = <char *> malloc(n + m)
    if (ws.tab == NULL or ws.upper == NULL or ws.xval == NULL or ws.d == NULL
            or ws.basis == NULL or ws.is_basic == NULL or ws.at_upper == NULL):
        return -1
    return 0


cdef void ws_free(Workspace *ws) nogil:
    free(ws.tab)
    free(ws.upper)
    free(ws.xval)
    free(ws.d)
    free(ws.basis)
    free(ws.is_basic)
    free(ws.at_upper)


cdef int lp_core(Workspace *ws, const double *r, const double *A, const double *beta,
                 const double *u, double tol, int max_iter, double *x, int *iters) nogil:
    """A is row-major m x n. Writes the clipped solution into x; returns status."""
    cdef int n = ws.n, m = ws.m, N = ws.N
    cdef double *tab = ws.tab
    cdef double *upper = ws.upper
    cdef double *xval = ws.xval
    cdef double *d = ws.d
    cdef int *basis = ws.basis
    cdef char *is_basic = ws.is_basic
    cdef char *at_upper = ws.at_upper
    cdef int i, j, k, q, leave, it = 0, degen = 0, status = 0
    cdef char bland, leave_up, to_up
    cdef double best, score, sdir, qdir, dj, theta, a, lim, step, piv, f, v
    cdef double *row
    cdef double *prow

    if max_iter <= 0:
        max_iter = 1000 + 50 * N
    for i in range(m):
        row = tab + i * N
        for j in range(N):
            row[j] = 0.0
        for j in range(n):
            row[j] = A[i * n + j]
        row[n + i] = 1.0
    for j in range(n):
        upper[j] = u[j]
        xval[j] = 0.0
        d[j] = r[j]
        is_basic[j] = 0
        at_upper[j] = 0
    for i in range(m):
        upper[n + i] = INFINITY
        xval[n + i] = beta[i]
        d[n + i] = 0.0
        basis[i] = n + i
        is_basic[n + i] = 1
        at_upper[n + i] = 0

    while True:
        bland = degen >= DEGENERATE_SWITCH
        q = -1
        best = 0.0
        qdir = 0.0
        for j in range(N):
            if is_basic[j]:
                continue
            dj = d[j]
            if at_upper[j]:
                if dj < -tol:
                    score = -dj
                    sdir = -1.0
                else:
                    continue
            elif dj > tol:
                score = dj
                sdir = 1.0
            else:
                continue
            if score > best:
                q = j
                best = score
                qdir = sdir
                if bland:
                    break
        if q < 0:
            break
        if it >= max_iter:
            status = 1
            break
        it += 1

        theta = upper[q]
        leave = -1
        leave_up = 0
        for i in range(m):
            a = tab[i * N + q] * qdir
            k = basis[i]
            if a > tol:
                lim = xval[k] / a
                to_up = 0
            elif a < -tol and upper[k] < INFINITY:
                lim = (upper[k] - xval[k]) / -a
                to_up = 1
            else:
                continue
            if lim < 0.0:
                lim = 0.0
            if lim < theta or (lim == theta and leave >= 0 and k < basis[leave]):
                theta = lim
                leave = i
                leave_up = to_up
        if theta == INFINITY:
            status = 2
            break
        if theta <= tol:
            degen += 1

        step = theta * qdir
        for i in range(m):
            xval[basis[i]] -= step * tab[i * N + q]
        xval[q] += step
        if leave < 0:
            at_upper[q] = not at_upper[q]
            xval[q] = upper[q] if at_upper[q] else 0.0
            continue

        k = basis[leave]
        at_upper[k] = leave_up
        xval[k] = upper[k] if leave_up else 0.0
        is_basic[k] = 0
        is_basic[q] = 1
        at_upper[q] = 0
        basis[leave] = q
        prow = tab + leave * N
        piv = prow[q]
        for j in range(N):
            prow[j] /= piv
        prow[q] = 1.0
        for i in range(m):
            if i == leave:
                continue
            row = tab + i * N
            f = row[q]
            if f != 0.0:
                for j in range(N):
                    row[j] -= f * prow[j]
                row[q] = 0.0
        f = d[q]
        if f != 0.0:
            for j in range(N):
                d[j] -= f * prow[j]
        d[q] = 0.0

    for j in range(n):
        v = xval[j]
        if v < 0.0:
            v = 0.0
        elif v > upper[j]:
            v = upper[j]
        x[j] = v
    iters[0] = it
    return status


def solve_lp(r, A, beta, u, double tol=1e-9, int max_iter=0):
    """Maximize ``r @ x`` subject to ``A @ x <= beta`` and ``0 <= x <= u``.

    Returns ``(x, status, iterations)``.
    """
    cdef const double[::1] rv = np.ascontiguousarray(r, dtype=np.float64)
    cdef const double[:, ::1] Av = np.ascontiguousarray(np.atleast_2d(A), dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(beta, dtype=np.float64)
    cdef const double[::1] uv = np.ascontiguousarray(u, dtype=np.float64)
    cdef int n = rv.shape[0], m = bv.shape[0]
    if Av.shape[0] != m or Av.shape[1] != n or uv.shape[0] != n:
        raise ValueError("inconsistent LP dimensions")
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] xv = out
    cdef Workspace ws
    cdef int status, iters = 0
    if ws_alloc(&ws, n, m) != 0:
        ws_free(&ws)
        raise MemoryError()
    try:
        status = lp_core(&ws, &rv[0], &Av[0, 0], &bv[0] if m > 0 else NULL, &uv[0],
                         tol, max_iter, &xv[0], &iters)
    finally:
        ws_free(&ws)
    return out.tolist(), status, iters


def simulate(r, A, cap0, lam, starts, horizons, thresholds, times, classes, uniforms,
             double tol=1e-9):
    """Compiled twin of ``_pykernels.simulate``; same arguments and returns."""
    cdef const double[::1] rv = np.ascontiguousarray(r, dtype=np.float64)
    cdef const double[:, ::1] Av = np.ascontiguousarray(np.atleast_2d(A), dtype=np.float64)
    cdef const double[::1] lamv = np.ascontiguousarray(lam, dtype=np.float64)
    cdef const double[::1] sv = np.ascontiguousarray(starts, dtype=np.float64)
    cdef const double[::1] hv = np.ascontiguousarray(horizons, dtype=np.float64)
    cdef const double[::1] thv = np.ascontiguousarray(thresholds, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef const cnp.int64_t[::1] cv = np.ascontiguousarray(classes, dtype=np.int64)
    cdef const double[::1] uv = np.ascontiguousarray(uniforms, dtype=np.float64)
    cap_arr = np.array(cap0, dtype=np.float64, copy=True)
    cdef double[::1] cap = cap_arr
    cdef int n = rv.shape[0], m = cap.shape[0], E = sv.shape[0]
    cdef Py_ssize_t K = tv.shape[0]
    if cv.shape[0] != K or uv.shape[0] != K:
        raise ValueError("times, classes and uniforms must have equal length")
    if hv.shape[0] != E or thv.shape[0] != E:
        raise ValueError("starts, horizons and thresholds must have equal length")

    z_arr = np.zeros(n, dtype=np.int64)
    probs_arr = np.zeros(K, dtype=np.float64)
    dec_arr = np.zeros(K, dtype=np.int8)
    ex_arr = np.zeros((E, n), dtype=np.float64)
    ep_arr = np.zeros((E, n), dtype=np.float64)
    cdef cnp.int64_t[::1] z = z_arr
    cdef double[::1] probs = probs_arr
    cdef cnp.int8_t[::1] decisions = dec_arr
    cdef double[:, ::1] epoch_x = ex_arr
    cdef double[:, ::1] epoch_p = ep_arr

    cdef double *p = <double *> malloc(sizeof(double) * n)
    cdef double *x = <double *> malloc(sizeof(double) * n)
    cdef double *beta = <double *> malloc(sizeof(double) * (m + 1))
    cdef Workspace ws
    cdef int alloc_ok = ws_alloc(&ws, n, m)
    cdef Py_ssize_t k
    cdef int e = -1, j, l, status = 0, fail_epoch = -1, iters
    cdef double t, pj, xj, lj, th, h
    cdef char fits
    try:
        if p == NULL or x == NULL or beta == NULL or alloc_ok != 0:
            raise MemoryError()
        for j in range(n):
            p[j] = 0.0
        with nogil:
            for k in range(K):
                t = tv[k]
                while e + 1 < E and sv[e + 1] <= t:
                    e += 1
                    h = hv[e]
                    for l in range(m):
                        beta[l] = cap[l] / h
                    status = lp_core(&ws, &rv[0], &Av[0, 0], beta, &lamv[0], tol, 0, x, &iters)
                    if status != 0:
                        fail_epoch = e
                        break
                    th = thv[e]
                    for j in range(n):
                        xj = x[j]
                        lj = lamv[j]
                        if th < 0.0:
                            pj = xj / lj
                        elif xj < lj * th:
                            pj = 0.0
                        elif xj > lj * (1.0 - th):
                            pj = 1.0
                        else:
                            pj = xj / lj
                        p[j] = pj
                        epoch_x[e, j] = xj
                        epoch_p[e, j] = pj
                if fail_epoch >= 0:
                    break
                j = <int> cv[k]
                pj = p[j] if e >= 0 else 0.0
                probs[k] = pj
                fits = 1
                for l in range(m):
                    if Av[l, j] > cap[l]:
                        fits = 0
                        break
                if fits and uv[k] < pj:
                    for l in range(m):
                        cap[l] -= Av[l, j]
                    z[j] += 1
                    decisions[k] = 1
            while fail_epoch < 0 and e + 1 < E:
                e += 1
                h = hv[e]
                for l in range(m):
                    beta[l] = cap[l] / h
                status = lp_core(&ws, &rv[0], &Av[0, 0], beta, &lamv[0], tol, 0, x, &iters)
                if status != 0:
                    fail_epoch = e
                    break
                th = thv[e]
                for j in range(n):
                    xj = x[j]
                    lj = lamv[j]
                    if th < 0.0:
                        pj = xj / lj
                    elif xj < lj * th:
                        pj = 0.0
                    elif xj > lj * (1.0 - th):
                        pj = 1.0
                    else:
                        pj = xj / lj
                    epoch_x[e, j] = xj
                    epoch_p[e, j] = pj
    finally:
        free(p)
        free(x)
        free(beta)
        ws_free(&ws)
    return z_arr, cap_arr, probs_arr, dec_arr, ex_arr, ep_arr, status, fail_epoch
