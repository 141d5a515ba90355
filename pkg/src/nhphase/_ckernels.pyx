# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: quartic roots, secular function, doubling recursion.

Same signatures and semantics as the pure-NumPy module; per-point work is a
handful of 4x4 complex operations, so the win comes from skipping NumPy's
per-call overhead.
"""

import numpy as np
cimport numpy as cnp
from libc.complex cimport cabs, clog
from libc.math cimport isfinite, sqrt
from scipy.linalg.cython_lapack cimport zhseqr

cnp.import_array()

BACKEND = "cython"

ctypedef double complex cplx

# clustered roots skip the Newton step (see _kernels_py.roots4)
cdef double CLUSTER_TOL = 1e-5


cdef inline cplx ipow(cplx z, int n) noexcept nogil:
    cdef cplx r = 1.0
    while n > 0:
        if n & 1:
            r = r * z
        z = z * z
        n >>= 1
    return r


cdef int _roots4(double t0, double t1R, double t1L, double t2, cplx lam, cplx *z) noexcept nogil:
    cdef cplx h[16]
    cdef cplx work[16]
    cdef cplx zdum[1]
    cdef int n = 4, ilo = 1, ihi = 4, ldh = 4, ldz = 1, lwork = 16, info = 0
    cdef char job = b'E'
    cdef char compz = b'N'
    cdef double a4 = t0 * t2
    cdef cplx c3 = (t0 * t1L + t1R * t2) / a4
    cdef cplx c2 = (t0 * t0 + t1R * t1L + t2 * t2 - lam) / a4
    cdef cplx c1 = (t0 * t1R + t1L * t2) / a4
    cdef int i
    cdef cplx p, dp
    for i in range(16):
        h[i] = 0.0
    # column-major companion (upper Hessenberg)
    h[0] = -c3
    h[4] = -c2
    h[8] = -c1
    h[12] = -1.0
    h[1] = 1.0
    h[6] = 1.0
    h[11] = 1.0
    zhseqr(&job, &compz, &n, &ilo, &ihi, h, &ldh, z, zdum, &ldz, work, &lwork, &info)
    cdef cplx step[4]
    cdef int j
    cdef double sc
    for i in range(4):
        step[i] = 0.0
        sc = cabs(z[i])
        if sc < 1.0:
            sc = 1.0
        for j in range(4):
            if j != i and cabs(z[j] - z[i]) <= CLUSTER_TOL * sc:
                break
        else:
            p = (((z[i] + c3) * z[i] + c2) * z[i] + c1) * z[i] + 1.0
            dp = ((4.0 * z[i] + 3.0 * c3) * z[i] + 2.0 * c2) * z[i] + c1
            if dp != 0:
                step[i] = p / dp
    for i in range(4):
        z[i] = z[i] - step[i]
    return info


cdef int _lu4(cplx *a, int *perm, int *sign) noexcept nogil:
    # in-place row-major LU with partial pivoting; returns 1 on exact singularity
    cdef int i, j, k, piv
    cdef double best, v
    cdef cplx t, f
    sign[0] = 1
    for i in range(4):
        perm[i] = i
    for k in range(4):
        piv = k
        best = cabs(a[4 * k + k])
        for i in range(k + 1, 4):
            v = cabs(a[4 * i + k])
            if v > best:
                best = v
                piv = i
        if best == 0.0:
            return 1
        if piv != k:
            for j in range(4):
                t = a[4 * k + j]
                a[4 * k + j] = a[4 * piv + j]
                a[4 * piv + j] = t
            i = perm[k]
            perm[k] = perm[piv]
            perm[piv] = i
            sign[0] = -sign[0]
        for i in range(k + 1, 4):
            f = a[4 * i + k] / a[4 * k + k]
            a[4 * i + k] = f
            for j in range(k + 1, 4):
                a[4 * i + j] = a[4 * i + j] - f * a[4 * k + j]
    return 0


cdef void _inv4(cplx *a, cplx *out) noexcept nogil:
    # Gauss-Jordan inverse of a row-major 4x4 (a is destroyed)
    cdef int i, j, k, piv
    cdef double best, v
    cdef cplx t, f
    for i in range(4):
        for j in range(4):
            out[4 * i + j] = 1.0 if i == j else 0.0
    for k in range(4):
        piv = k
        best = cabs(a[4 * k + k])
        for i in range(k + 1, 4):
            v = cabs(a[4 * i + k])
            if v > best:
                best = v
                piv = i
        if piv != k:
            for j in range(4):
                t = a[4 * k + j]
                a[4 * k + j] = a[4 * piv + j]
                a[4 * piv + j] = t
                t = out[4 * k + j]
                out[4 * k + j] = out[4 * piv + j]
                out[4 * piv + j] = t
        f = 1.0 / a[4 * k + k]
        for j in range(4):
            a[4 * k + j] = a[4 * k + j] * f
            out[4 * k + j] = out[4 * k + j] * f
        for i in range(4):
            if i != k:
                f = a[4 * i + k]
                if f != 0:
                    for j in range(4):
                        a[4 * i + j] = a[4 * i + j] - f * a[4 * k + j]
                        out[4 * i + j] = out[4 * i + j] - f * out[4 * k + j]


cdef inline void _mm4(cplx *x, cplx *y, cplx *out) noexcept nogil:
    cdef int i, j, k
    cdef cplx s
    for i in range(4):
        for j in range(4):
            s = 0.0
            for k in range(4):
                s = s + x[4 * i + k] * y[4 * k + j]
            out[4 * i + j] = s


cdef inline double _fro4(cplx *x) noexcept nogil:
    cdef int i
    cdef double s = 0.0
    for i in range(16):
        s += x[i].real * x[i].real + x[i].imag * x[i].imag
    return sqrt(s)


cdef void _columns(double t0, double t1R, double t2, int N, cplx *z, cplx *M, int *big) noexcept nogil:
    # row-major M[row, col]; column j belongs to root z[j]
    cdef int j
    cdef cplx zi, ha, s
    for j in range(4):
        zi = 1.0 / z[j]
        ha = t0 + t1R * zi + t2 * zi * zi
        big[j] = cabs(z[j]) > 1.0
        if big[j]:
            s = ipow(zi, N)
            M[j] = s
            M[4 + j] = s * zi
            M[8 + j] = ha * z[j]
            M[12 + j] = ha * z[j] * z[j]
        else:
            s = ipow(z[j], N + 1)
            M[j] = 1.0
            M[4 + j] = zi
            M[8 + j] = ha * s
            M[12 + j] = ha * s * z[j]


cdef inline cplx _vand(cplx *z) noexcept nogil:
    cdef cplx v = 1.0
    cdef int i, j
    for i in range(4):
        for j in range(i + 1, 4):
            v = v * (z[j] - z[i])
    return v


def roots4(double t0, double t1R, double t1L, double t2, lam):
    cdef cplx[::1] L = np.ascontiguousarray(np.atleast_1d(lam), dtype=np.complex128)
    cdef Py_ssize_t n = L.shape[0], i
    out = np.empty((n, 4), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    cdef int info
    with nogil:
        for i in range(n):
            info = _roots4(t0, t1R, t1L, t2, L[i], &o[i, 0])
    return out


def secular_real(double t0, double t1R, double t1L, double t2, int N, lam):
    cdef double[::1] L = np.ascontiguousarray(np.atleast_1d(lam), dtype=np.float64)
    cdef Py_ssize_t n = L.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef cplx z[4]
    cdef cplx M[16]
    cdef int big[4]
    cdef int perm[4]
    cdef int sgn, j
    cdef cplx d, ph, u
    with nogil:
        for i in range(n):
            _roots4(t0, t1R, t1L, t2, L[i], z)
            _columns(t0, t1R, t2, N, z, M, big)
            if _lu4(M, perm, &sgn):
                o[i] = 0.0
                continue
            d = sgn
            for j in range(4):
                d = d * M[5 * j]
            ph = 1.0
            for j in range(4):
                if big[j]:
                    u = z[j] / cabs(z[j])
                    ph = ph * ipow(u, N)
            o[i] = (d / _vand(z) * ph).real
    return out


def log_secular(double t0, double t1R, double t1L, double t2, int N, lam):
    cdef cplx[::1] L = np.ascontiguousarray(np.atleast_1d(lam), dtype=np.complex128)
    cdef Py_ssize_t n = L.shape[0], i
    logF = np.empty(n, dtype=np.complex128)
    dlog = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] lf = logF
    cdef cplx[::1] dl = dlog
    cdef cplx z[4]
    cdef cplx zp[4]
    cdef cplx M[16]
    cdef cplx A[16]
    cdef cplx Minv[16]
    cdef cplx dM[16]
    cdef int big[4]
    cdef int perm[4]
    cdef int sgn, j, k
    cdef double Nf = N
    cdef cplx ld, zi, zs, P1, P2, dQ, tr, dv, extra
    with nogil:
        for i in range(n):
            _roots4(t0, t1R, t1L, t2, L[i], z)
            _columns(t0, t1R, t2, N, z, M, big)
            for j in range(16):
                A[j] = M[j]
            if _lu4(A, perm, &sgn):
                lf[i] = -1e300
                dl[i] = 0.0
                continue
            ld = clog(<cplx>sgn)
            for j in range(4):
                ld = ld + clog(A[5 * j])
            extra = 0.0
            for j in range(4):
                zi = 1.0 / z[j]
                P1 = t0 * z[j] * z[j] + t1R * z[j] + t2
                P2 = t2 * z[j] * z[j] + t1L * z[j] + t0
                dQ = (2 * t0 * z[j] + t1R) * P2 + P1 * (2 * t2 * z[j] + t1L) - 2 * L[i] * z[j]
                zp[j] = z[j] * z[j] / dQ
                if big[j]:
                    zs = ipow(zi, N)
                    dM[j] = -Nf * zs * zi
                    dM[4 + j] = -(Nf + 1) * zs * zi * zi
                    dM[8 + j] = t0 - t2 * zi * zi
                    dM[12 + j] = 2 * t0 * z[j] + t1R
                    extra = extra + Nf * clog(z[j])
                else:
                    zs = ipow(z[j], N)
                    dM[j] = 0.0
                    dM[4 + j] = -zi * zi
                    dM[8 + j] = ((Nf + 1) * t0 + Nf * t1R * zi + (Nf - 1) * t2 * zi * zi) * zs
                    dM[12 + j] = ((Nf + 2) * t0 * z[j] + (Nf + 1) * t1R + Nf * t2 * zi) * zs
            for j in range(16):
                A[j] = M[j]
            _inv4(A, Minv)
            tr = 0.0
            for j in range(4):
                for k in range(4):
                    tr = tr + Minv[4 * j + k] * dM[4 * k + j] * zp[j]
            dv = 0.0
            for j in range(4):
                for k in range(j + 1, 4):
                    dv = dv + (zp[k] - zp[j]) / (z[k] - z[j])
            for j in range(4):
                if big[j]:
                    tr = tr + Nf * zp[j] / z[j]
            lf[i] = ld - clog(_vand(z)) + extra
            dl[i] = tr - dv
    return logF, dlog


def sancho_rubio(H00, H01, H10, w, double tol=1e-12, int maxit=100):
    if np.shape(H00) != (4, 4):
        from . import _kernels_py
        return _kernels_py.sancho_rubio(H00, H01, H10, w, tol, maxit)
    cdef cplx[:, ::1] h00 = np.ascontiguousarray(H00, dtype=np.complex128)
    cdef cplx[:, ::1] h01 = np.ascontiguousarray(H01, dtype=np.complex128)
    cdef cplx[:, ::1] h10 = np.ascontiguousarray(H10, dtype=np.complex128)
    cdef cplx[::1] W = np.ascontiguousarray(np.atleast_1d(w), dtype=np.complex128)
    cdef Py_ssize_t n = W.shape[0], p
    Gl = np.empty((n, 4, 4), dtype=np.complex128)
    Gr = np.empty((n, 4, 4), dtype=np.complex128)
    Gb = np.empty((n, 4, 4), dtype=np.complex128)
    iters = np.empty(n, dtype=np.int64)
    norms = np.empty((n, 2), dtype=np.float64)
    cdef cplx[:, :, ::1] gl = Gl
    cdef cplx[:, :, ::1] gr = Gr
    cdef cplx[:, :, ::1] gb = Gb
    cdef long long[::1] it_out = iters
    cdef double[:, ::1] nm = norms
    cdef cplx a[16]
    cdef cplx b[16]
    cdef cplx e[16]
    cdef cplx esl[16]
    cdef cplx esr[16]
    cdef cplx g[16]
    cdef cplx T[16]
    cdef cplx ag[16]
    cdef cplx bg[16]
    cdef cplx agb[16]
    cdef cplx bga[16]
    cdef int i, j, it, done
    cdef double na = 0.0, nb = 0.0
    with nogil:
        for p in range(n):
            for i in range(4):
                for j in range(4):
                    a[4 * i + j] = h01[i, j]
                    b[4 * i + j] = h10[i, j]
                    e[4 * i + j] = h00[i, j]
                    esl[4 * i + j] = h00[i, j]
                    esr[4 * i + j] = h00[i, j]
            done = maxit
            for it in range(1, maxit + 1):
                for i in range(16):
                    T[i] = -e[i]
                for i in range(4):
                    T[5 * i] = T[5 * i] + W[p]
                _inv4(T, g)
                _mm4(a, g, ag)
                _mm4(b, g, bg)
                _mm4(ag, b, agb)
                _mm4(bg, a, bga)
                for i in range(16):
                    e[i] = e[i] + agb[i] + bga[i]
                    esl[i] = esl[i] + agb[i]
                    esr[i] = esr[i] + bga[i]
                _mm4(ag, a, T)
                for i in range(16):
                    a[i] = T[i]
                _mm4(bg, b, T)
                for i in range(16):
                    b[i] = T[i]
                na = _fro4(a)
                nb = _fro4(b)
                if na < tol and nb < tol:
                    done = it
                    break
                if not (isfinite(na) and isfinite(nb)):
                    done = -1
                    break
            it_out[p] = done
            nm[p, 0] = na
            nm[p, 1] = nb
            for i in range(16):
                T[i] = -esl[i]
            for i in range(4):
                T[5 * i] = T[5 * i] + W[p]
            _inv4(T, &gl[p, 0, 0])
            for i in range(16):
                T[i] = -esr[i]
            for i in range(4):
                T[5 * i] = T[5 * i] + W[p]
            _inv4(T, &gr[p, 0, 0])
            for i in range(16):
                T[i] = -e[i]
            for i in range(4):
                T[5 * i] = T[5 * i] + W[p]
            _inv4(T, &gb[p, 0, 0])
    return Gl, Gr, Gb, iters, norms
