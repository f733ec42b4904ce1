"""Pure-Python kernels: bounded-variable simplex and the admission event loop.

This module is the reference implementation and the fallback when the
compiled ``_kernels`` extension is unavailable. ``_kernels.pyx`` mirrors it
statement for statement so that both produce bit-identical results; keep the
two in sync.
"""
import numpy as np

INF = float("inf")

# Degenerate pivots tolerated before switching from Dantzig to Bland pricing.
DEGENERATE_SWITCH = 25

STATUS_OPTIMAL = 0
STATUS_ITERATION_LIMIT = 1
STATUS_UNBOUNDED = 2

BACKEND = "python"


def solve_lp(r, A, beta, u, tol=1e-9, max_iter=0):
    """Maximize ``r @ x`` subject to ``A @ x <= beta`` and ``0 <= x <= u``.

    Requires ``beta >= 0`` so the all-slack basis is feasible. Returns
    ``(x, status, iterations)`` with ``x`` a list of floats clipped to the box.
    """
    n = len(r)
    m = len(beta)
    N = n + m
    if max_iter <= 0:
        max_iter = 1000 + 50 * N
    tab = [[0.0] * N for _ in range(m)]
    for i in range(m):
        row = tab[i]
        Ai = A[i]
        for j in range(n):
            row[j] = float(Ai[j])
        row[n + i] = 1.0
    upper = [float(v) for v in u] + [INF] * m
    xval = [0.0] * n + [float(v) for v in beta]
    d = [float(v) for v in r] + [0.0] * m
    basis = list(range(n, N))
    is_basic = [False] * n + [True] * m
    at_upper = [False] * N
    it = 0
    degen = 0
    status = STATUS_OPTIMAL
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
            status = STATUS_ITERATION_LIMIT
            break
        it += 1

        theta = upper[q]
        leave = -1
        leave_up = False
        for i in range(m):
            a = tab[i][q] * qdir
            k = basis[i]
            if a > tol:
                lim = xval[k] / a
                to_up = False
            elif a < -tol and upper[k] < INF:
                lim = (upper[k] - xval[k]) / -a
                to_up = True
            else:
                continue
            if lim < 0.0:
                lim = 0.0
            if lim < theta or (lim == theta and leave >= 0 and k < basis[leave]):
                theta = lim
                leave = i
                leave_up = to_up
        if theta == INF:
            status = STATUS_UNBOUNDED
            break
        if theta <= tol:
            degen += 1

        step = theta * qdir
        for i in range(m):
            xval[basis[i]] -= step * tab[i][q]
        xval[q] += step
        if leave < 0:
            at_upper[q] = not at_upper[q]
            xval[q] = upper[q] if at_upper[q] else 0.0
            continue

        k = basis[leave]
        at_upper[k] = leave_up
        xval[k] = upper[k] if leave_up else 0.0
        is_basic[k] = False
        is_basic[q] = True
        at_upper[q] = False
        basis[leave] = q
        prow = tab[leave]
        piv = prow[q]
        for j in range(N):
            prow[j] /= piv
        prow[q] = 1.0
        for i in range(m):
            if i == leave:
                continue
            row = tab[i]
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

    x = [0.0] * n
    for j in range(n):
        v = xval[j]
        if v < 0.0:
            v = 0.0
        elif v > upper[j]:
            v = upper[j]
        x[j] = v
    return x, status, it


def simulate(r, A, cap0, lam, starts, horizons, thresholds, times, classes, uniforms, tol=1e-9):
    """Run one re-solving admission policy over a merged arrival stream.

    Epoch ``e`` starts at ``starts[e]``; on entry the LP is solved with
    right-hand side ``remaining_capacity / horizons[e]`` and upper bounds
    ``lam``. ``thresholds[e] < 0`` means raw ratios ``x/lam``; otherwise the
    ratio is rounded to 0 below ``thresholds[e]`` and to 1 above
    ``1 - thresholds[e]`` (strict comparisons). Event ``k`` is accepted iff
    its class still fits in the remaining capacity and ``uniforms[k] < p``.

    Returns ``(z, cap, probs, decisions, epoch_x, epoch_p, status, fail_epoch)``.
    """
    n = len(r)
    m = len(cap0)
    E = len(starts)
    K = len(times)
    r = [float(v) for v in r]
    A = [[float(v) for v in row] for row in A]
    lam = [float(v) for v in lam]
    cap = [float(v) for v in cap0]
    starts = [float(v) for v in starts]
    horizons = [float(v) for v in horizons]
    thresholds = [float(v) for v in thresholds]
    times = np.asarray(times, dtype=float).tolist()
    classes = np.asarray(classes, dtype=np.int64).tolist()
    uniforms = np.asarray(uniforms, dtype=float).tolist()

    z = np.zeros(n, dtype=np.int64)
    probs = np.zeros(K, dtype=float)
    decisions = np.zeros(K, dtype=np.int8)
    epoch_x = np.zeros((E, n), dtype=float)
    epoch_p = np.zeros((E, n), dtype=float)
    p = [0.0] * n

    def resolve(e):
        h = horizons[e]
        beta = [cap[l] / h for l in range(m)]
        x, status, _ = solve_lp(r, A, beta, lam, tol)
        if status != STATUS_OPTIMAL:
            return status
        th = thresholds[e]
        for j in range(n):
            xj = x[j]
            lj = lam[j]
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
        return STATUS_OPTIMAL

    e = -1
    for k in range(K):
        t = times[k]
        while e + 1 < E and starts[e + 1] <= t:
            e += 1
            status = resolve(e)
            if status != STATUS_OPTIMAL:
                return z, np.array(cap), probs, decisions, epoch_x, epoch_p, status, e
        j = classes[k]
        pj = p[j] if e >= 0 else 0.0
        probs[k] = pj
        fits = True
        for l in range(m):
            if A[l][j] > cap[l]:
                fits = False
                break
        if fits and uniforms[k] < pj:
            for l in range(m):
                cap[l] -= A[l][j]
            z[j] += 1
            decisions[k] = 1
    while e + 1 < E:
        e += 1
        status = resolve(e)
        if status != STATUS_OPTIMAL:
            return z, np.array(cap), probs, decisions, epoch_x, epoch_p, status, e
    return z, np.array(cap), probs, decisions, epoch_x, epoch_p, STATUS_OPTIMAL, -1
