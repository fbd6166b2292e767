"""Dense symmetric linear-algebra kernels.

Everything here is written as plain loops over float64 arrays so the same
source runs jitted (numba) or interpreted (pure numpy) — see
:mod:`cdbeam._jit`.  Factorizations return status codes instead of raising,
callers translate them into exceptions.
"""

import numpy as np

from ._jit import njit


@njit
def chol_lower(A):
    """Cholesky A = L L^T for symmetric positive definite A.

    Returns (L, ok). ok=False when a pivot falls at or below the relative
    floor 1e-15 * max diagonal (treats numerically semidefinite as failure).
    """
    n = A.shape[0]
    L = np.zeros((n, n))
    dmax = 0.0
    for j in range(n):
        if A[j, j] > dmax:
            dmax = A[j, j]
    floor = 1e-15 * dmax
    for j in range(n):
        s = A[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if s <= floor or not np.isfinite(s):
            return L, False
        d = np.sqrt(s)
        L[j, j] = d
        for i in range(j + 1, n):
            t = A[i, j]
            for k in range(j):
                t -= L[i, k] * L[j, k]
            L[i, j] = t / d
    return L, True


@njit
def chol_logdet(A):
    """(ok, log det A) via Cholesky; ok=False when A is not positive definite."""
    L, ok = chol_lower(A)
    if not ok:
        return False, 0.0
    s = 0.0
    for j in range(A.shape[0]):
        s += np.log(L[j, j])
    return True, 2.0 * s


@njit
def tri_lower_solve(L, B):
    """Solve L X = B for lower-triangular L; B is (n, k)."""
    n, k = B.shape
    X = B.copy()
    for c in range(k):
        for i in range(n):
            t = X[i, c]
            for j in range(i):
                t -= L[i, j] * X[j, c]
            X[i, c] = t / L[i, i]
    return X


@njit
def tri_lower_t_solve(L, B):
    """Solve L^T X = B for lower-triangular L; B is (n, k)."""
    n, k = B.shape
    X = B.copy()
    for c in range(k):
        for i in range(n - 1, -1, -1):
            t = X[i, c]
            for j in range(i + 1, n):
                t -= L[j, i] * X[j, c]
            X[i, c] = t / L[i, i]
    return X


@njit
def jacobi_eigh(A, tol, max_sweeps):
    """Cyclic Jacobi eigensolver for symmetric A.

    Returns (w ascending, V with eigenvectors in columns, converged).
    """
    n = A.shape[0]
    M = A.copy()
    V = np.eye(n)
    if n == 1:
        return M[0].copy(), V, True
    norm = 0.0
    for i in range(n):
        for j in range(n):
            norm += M[i, j] * M[i, j]
    norm = np.sqrt(norm)
    if norm == 0.0:
        return np.zeros(n), V, True
    converged = False
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += M[i, j] * M[i, j]
        if np.sqrt(2.0 * off) <= tol * norm:
            converged = True
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = M[p, q]
                if np.abs(apq) <= 1e-300 + 1e-18 * norm:
                    continue
                tau = (M[q, q] - M[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    mkp = M[k, p]
                    mkq = M[k, q]
                    M[k, p] = c * mkp - s * mkq
                    M[k, q] = s * mkp + c * mkq
                for k in range(n):
                    mpk = M[p, k]
                    mqk = M[q, k]
                    M[p, k] = c * mpk - s * mqk
                    M[q, k] = s * mpk + c * mqk
                M[p, q] = 0.0
                M[q, p] = 0.0
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    w = np.empty(n)
    for i in range(n):
        w[i] = M[i, i]
    order = np.argsort(w)
    ws = np.empty(n)
    Vs = np.empty((n, n))
    for i in range(n):
        ws[i] = w[order[i]]
        for k in range(n):
            Vs[k, i] = V[k, order[i]]
    return ws, Vs, converged


@njit
def ldlt_factor(A_in):
    """Bunch-Kaufman L D L^T factorization of a symmetric matrix (lower storage).

    Follows the LAPACK unblocked scheme with 1x1/2x2 pivots.  Returns
    (A, ipiv, ok): multipliers and D packed in the lower triangle of A,
    interchanges in ipiv (negative entries flag a 2x2 block).  ok=False
    only on a fully zero column (exactly singular layout).
    """
    A = A_in.copy()
    n = A.shape[0]
    alpha = (1.0 + np.sqrt(17.0)) / 8.0
    ipiv = np.zeros(n, dtype=np.int64)
    ok = True
    k = 0
    while k < n:
        kstep = 1
        kp = k
        absakk = np.abs(A[k, k])
        imax = k
        colmax = 0.0
        for i in range(k + 1, n):
            v = np.abs(A[i, k])
            if v > colmax:
                colmax = v
                imax = i
        if absakk == 0.0 and colmax == 0.0:
            ok = False
            kp = k
        else:
            if absakk >= alpha * colmax:
                kp = k
            else:
                rowmax = 0.0
                for j in range(k, imax):
                    v = np.abs(A[imax, j])
                    if v > rowmax:
                        rowmax = v
                for i in range(imax + 1, n):
                    v = np.abs(A[i, imax])
                    if v > rowmax:
                        rowmax = v
                if absakk * rowmax >= alpha * colmax * colmax:
                    kp = k
                elif np.abs(A[imax, imax]) >= alpha * rowmax:
                    kp = imax
                else:
                    kp = imax
                    kstep = 2
            kk = k + kstep - 1
            if kp != kk:
                for i in range(kp + 1, n):
                    tmp = A[i, kp]
                    A[i, kp] = A[i, kk]
                    A[i, kk] = tmp
                for j in range(kk + 1, kp):
                    tmp = A[kp, j]
                    A[kp, j] = A[j, kk]
                    A[j, kk] = tmp
                tmp = A[kp, kp]
                A[kp, kp] = A[kk, kk]
                A[kk, kk] = tmp
                if kstep == 2:
                    tmp = A[kk, k]
                    A[kk, k] = A[kp, k]
                    A[kp, k] = tmp
            if kstep == 1:
                if A[k, k] != 0.0:
                    r1 = 1.0 / A[k, k]
                    for j in range(k + 1, n):
                        r1ajk = r1 * A[j, k]
                        for i in range(j, n):
                            A[i, j] -= r1ajk * A[i, k]
                    for i in range(k + 1, n):
                        A[i, k] *= r1
            else:
                if k < n - 2:
                    d21 = A[k + 1, k]
                    d11 = A[k + 1, k + 1] / d21
                    d22 = A[k, k] / d21
                    t = 1.0 / (d11 * d22 - 1.0)
                    d21 = t / d21
                    for j in range(k + 2, n):
                        wk = d21 * (d11 * A[j, k] - A[j, k + 1])
                        wkp1 = d21 * (d22 * A[j, k + 1] - A[j, k])
                        for i in range(j, n):
                            A[i, j] -= A[i, k] * wk + A[i, k + 1] * wkp1
                        A[j, k] = wk
                        A[j, k + 1] = wkp1
        if kstep == 1:
            ipiv[k] = kp
        else:
            ipiv[k] = -kp
            ipiv[k + 1] = -kp
        k += kstep
    return A, ipiv, ok


@njit
def ldlt_solve(L, ipiv, b_in):
    """Solve A x = b given ldlt_factor output (single right-hand side)."""
    b = b_in.copy()
    n = b.shape[0]
    k = 0
    while k < n:
        if ipiv[k] >= 0:
            kp = ipiv[k]
            if kp != k:
                tmp = b[k]
                b[k] = b[kp]
                b[kp] = tmp
            for i in range(k + 1, n):
                b[i] -= L[i, k] * b[k]
            b[k] /= L[k, k]
            k += 1
        else:
            kp = -ipiv[k]
            if kp != k + 1:
                tmp = b[k + 1]
                b[k + 1] = b[kp]
                b[kp] = tmp
            if k < n - 2:
                for i in range(k + 2, n):
                    b[i] -= L[i, k] * b[k] + L[i, k + 1] * b[k + 1]
            akm1k = L[k + 1, k]
            akm1 = L[k, k] / akm1k
            ak = L[k + 1, k + 1] / akm1k
            denom = akm1 * ak - 1.0
            bkm1 = b[k] / akm1k
            bk = b[k + 1] / akm1k
            b[k] = (ak * bkm1 - bk) / denom
            b[k + 1] = (akm1 * bk - bkm1) / denom
            k += 2
    k = n - 1
    while k >= 0:
        if ipiv[k] >= 0:
            if k < n - 1:
                t = 0.0
                for i in range(k + 1, n):
                    t += L[i, k] * b[i]
                b[k] -= t
            kp = ipiv[k]
            if kp != k:
                tmp = b[k]
                b[k] = b[kp]
                b[kp] = tmp
            k -= 1
        else:
            if k < n - 1:
                t = 0.0
                for i in range(k + 1, n):
                    t += L[i, k] * b[i]
                b[k] -= t
                t = 0.0
                for i in range(k + 1, n):
                    t += L[i, k - 1] * b[i]
                b[k - 1] -= t
            kp = -ipiv[k]
            if kp != k:
                tmp = b[k]
                b[k] = b[kp]
                b[kp] = tmp
            k -= 2
    return b


@njit
def ldlt_block_eigs(L, ipiv):
    """Eigenvalues of the block-diagonal D from ldlt_factor, in factor order."""
    n = L.shape[0]
    out = np.empty(n)
    k = 0
    while k < n:
        if ipiv[k] >= 0:
            out[k] = L[k, k]
            k += 1
        else:
            a = L[k, k]
            b = L[k + 1, k]
            c = L[k + 1, k + 1]
            tr = a + c
            disc = np.sqrt(0.25 * (a - c) * (a - c) + b * b)
            out[k] = 0.5 * tr - disc
            out[k + 1] = 0.5 * tr + disc
            k += 2
    return out


@njit
def barrier_terms(L, tvar, tk, tsupp, tsmall, g, H):
    """Accumulate barrier gradient/Hessian contributions of one LMI block.

    The block is F(x) = A0 + sum_i x_{tvar[i]} * A_i where A_i is supported
    on rows/cols tsupp[i, :tk[i]] with dense symmetric core tsmall[i].
    L is the Cholesky factor of F(x).  Adds tr(F^-1 A_i) into g and
    tr(F^-1 A_i F^-1 A_j) into H.
    """
    n = L.shape[0]
    nt = tvar.shape[0]
    kmax = tsupp.shape[1]
    W = np.zeros((nt, n, kmax))
    for it in range(nt):
        k = tk[it]
        for c in range(k):
            j0 = tsupp[it, c]
            W[it, j0, c] = 1.0 / L[j0, j0]
            for i in range(j0 + 1, n):
                t = 0.0
                for j in range(j0, i):
                    t -= L[i, j] * W[it, j, c]
                W[it, i, c] = t / L[i, i]
    for a in range(nt):
        ka = tk[a]
        va = tvar[a]
        for b in range(a, nt):
            kb = tk[b]
            vb = tvar[b]
            # C = Wa^T Wb (ka x kb); tr(F^-1 Aa F^-1 Ab) = tr(Ba C Bb C^T)
            C = np.zeros((ka, kb))
            for r in range(ka):
                for s in range(kb):
                    i0 = tsupp[a, r]
                    if tsupp[b, s] > i0:
                        i0 = tsupp[b, s]
                    t = 0.0
                    for i in range(i0, n):
                        t += W[a, i, r] * W[b, i, s]
                    C[r, s] = t
            acc = 0.0
            for r in range(ka):
                for s in range(kb):
                    t1 = 0.0
                    for u in range(ka):
                        t1 += tsmall[a, r, u] * C[u, s]
                    t2 = 0.0
                    for v in range(kb):
                        t2 += C[r, v] * tsmall[b, v, s]
                    acc += t1 * t2
            if a == b:
                gv = 0.0
                for r in range(ka):
                    for s in range(ka):
                        gv += tsmall[a, r, s] * C[s, r]
                g[va] += gv
            H[va, vb] += acc
            if va != vb:
                H[vb, va] += acc
            elif a != b:
                H[va, va] += acc
    return


@njit
def affine_block_value(A0, tvar, tk, tsupp, tsmall, x):
    """F(x) = A0 + sum_i x[tvar[i]] * embed(tsmall[i]) for one padded block."""
    F = A0.copy()
    nt = tvar.shape[0]
    for it in range(nt):
        xv = x[tvar[it]]
        if xv == 0.0:
            continue
        k = tk[it]
        for r in range(k):
            ir = tsupp[it, r]
            for s in range(k):
                F[ir, tsupp[it, s]] += xv * tsmall[it, r, s]
    return F


@njit
def affine_block_psi(A0, tvar, tk, tsupp, tsmall, x):
    """(feasible, logdet) of one affine block at x (strict feasibility via Cholesky)."""
    F = affine_block_value(A0, tvar, tk, tsupp, tsmall, x)
    return chol_logdet(F)


@njit
def mat_sym_reconstruct(V, w):
    """V diag(w) V^T (used by tests and classification helpers)."""
    n = V.shape[0]
    A = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            t = 0.0
            for k in range(n):
                t += V[i, k] * w[k] * V[j, k]
            A[i, j] = t
    return A
