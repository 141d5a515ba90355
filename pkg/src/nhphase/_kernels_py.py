"""Pure-NumPy kernels; reference implementation and import-time fallback.

All functions take the four hoppings as plain floats and operate on batches.

Secular function: at lam = (E - eps0)**2 the quartic
    (t0 z^2 + t1R z + t2)(t2 z^2 + t1L z + t0) - lam z^2 = 0
has roots z_1..z_4. A bulk solution phi_nB = sum_j c_j z_j^n is an
eigenstate of the open chain iff the 4x4 system
    sum c_j = 0, sum c_j / z_j = 0,
    sum c_j h_a(z_j) z_j^(N+1) = 0, sum c_j h_a(z_j) z_j^(N+2) = 0
is singular. det(M) / Vandermonde(z) is a symmetric function of the roots,
hence a polynomial in lam whose zeros are the squared eigenvalues.
Columns with |z| > 1 are divided by z^N so nothing overflows.
"""

import numpy as np

__all__ = ["roots4", "secular_real", "log_secular", "sancho_rubio", "BACKEND"]

BACKEND = "python"
CLUSTER_TOL = 1e-5


def _coeffs(t0, t1R, t1L, t2, lam):
    lam = np.asarray(lam, dtype=complex)
    one = np.ones_like(lam)
    a4 = t0 * t2
    a3 = (t0 * t1L + t1R * t2) * one
    a2 = t0 * t0 + t1R * t1L + t2 * t2 - lam
    a1 = (t0 * t1R + t1L * t2) * one
    return a4, a3, a2, a1


def roots4(t0, t1R, t1L, t2, lam):
    """Quartic roots for each lam, shape (n, 4), via batched companion eigenvalues."""
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    a4, a3, a2, a1 = _coeffs(t0, t1R, t1L, t2, lam)
    n = lam.size
    C = np.zeros((n, 4, 4), dtype=complex)
    C[:, 0, 0] = -a3 / a4
    C[:, 0, 1] = -a2 / a4
    C[:, 0, 2] = -a1 / a4
    C[:, 0, 3] = -1.0
    C[:, 1, 0] = 1.0
    C[:, 2, 1] = 1.0
    C[:, 3, 2] = 1.0
    z = np.linalg.eigvals(C)
    # one Newton step on the monic quartic tightens isolated companion roots;
    # clustered roots are left alone since their symmetric functions are
    # accurate while Newton moves each member independently
    p = (((z + a3[:, None] / a4) * z + a2[:, None] / a4) * z + a1[:, None] / a4) * z + 1.0
    dp = ((4 * z + 3 * a3[:, None] / a4) * z + 2 * a2[:, None] / a4) * z + a1[:, None] / a4
    gap = np.abs(z[:, :, None] - z[:, None, :])
    gap[:, np.arange(4), np.arange(4)] = np.inf
    isolated = gap.min(axis=2) > CLUSTER_TOL * np.maximum(np.abs(z), 1.0)
    ok = (dp != 0) & isolated
    z = np.where(ok, z - p / np.where(ok, dp, 1.0), z)
    return z


def _columns(t0, t1R, t2, N, z):
    big = np.abs(z) > 1.0
    zi = 1.0 / z
    ha = t0 + t1R * zi + t2 * zi * zi
    # small roots: [1, 1/z, ha z^(N+1), ha z^(N+2)]; big roots: same times z^-N
    zN_small = np.where(big, 1.0, z) ** N
    ziN_big = np.where(big, zi, 1.0) ** N
    c0 = np.where(big, ziN_big, 1.0)
    c1 = c0 * zi
    c2 = np.where(big, ha * z, ha * zN_small * z)
    c3 = c2 * z
    M = np.stack([c0, c1, c2, c3], axis=-2)
    return M, big, ha


def _vandermonde(z):
    v = np.ones(z.shape[0], dtype=complex)
    for i in range(4):
        for j in range(i + 1, 4):
            v = v * (z[:, j] - z[:, i])
    return v


def secular_real(t0, t1R, t1L, t2, N, lam):
    """Real, sign-faithful secular function at real lam (positive rescaling of det/V)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    z = roots4(t0, t1R, t1L, t2, lam)
    M, big, _ = _columns(t0, t1R, t2, N, z)
    d = np.linalg.det(M)
    ph = np.where(big, z / np.abs(z), 1.0) ** N
    f = d / _vandermonde(z) * np.prod(ph, axis=1)
    return f.real


def log_secular(t0, t1R, t1L, t2, N, lam):
    """Complex log of det/V and its lam-derivative (analytic, Jacobi formula).

    Returns (logF, dlogF); the branch of the imaginary part is arbitrary.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    z = roots4(t0, t1R, t1L, t2, lam)
    M, big, ha = _columns(t0, t1R, t2, N, z)
    sgn, logabs = np.linalg.slogdet(M)
    logdet = np.log(sgn) + logabs
    zz = z
    zi = 1.0 / zz
    # dz/dlam from d/dz[(t0 z^2+t1R z+t2)(t2 z^2+t1L z+t0) - lam z^2] dz = z^2 dlam
    P1 = t0 * zz * zz + t1R * zz + t2
    P2 = t2 * zz * zz + t1L * zz + t0
    dQ = (2 * t0 * zz + t1R) * P2 + P1 * (2 * t2 * zz + t1L) - 2 * lam[:, None] * zz
    zp = zz * zz / dQ
    # column derivatives d col / dz
    Nf = float(N)
    zsN = np.where(big, 1.0, zz) ** N
    zbN = np.where(big, zi, 1.0) ** N
    d0 = np.where(big, -Nf * zbN * zi, 0.0)
    d1 = np.where(big, -(Nf + 1) * zbN * zi * zi, -zi * zi)
    # small: d/dz [t0 z^(N+1) + t1R z^N + t2 z^(N-1)]
    s2 = ((Nf + 1) * t0 + Nf * t1R * zi + (Nf - 1) * t2 * zi * zi) * zsN
    s3 = ((Nf + 2) * t0 * zz + (Nf + 1) * t1R + Nf * t2 * zi) * zsN
    d2 = np.where(big, t0 - t2 * zi * zi, s2)
    d3 = np.where(big, 2 * t0 * zz + t1R, s3)
    dM = np.stack([d0, d1, d2, d3], axis=-2)
    try:
        Minv = np.linalg.inv(M)
    except np.linalg.LinAlgError:
        Minv = np.linalg.pinv(M)
    # tr(Minv dM) with dM column j scaled by z_j'
    jac = np.einsum("nji,nij->nj", Minv, dM) * zp
    dlog = jac.sum(axis=1)
    dv = np.zeros(lam.size, dtype=complex)
    for i in range(4):
        for j in range(i + 1, 4):
            dv = dv + (zp[:, j] - zp[:, i]) / (zz[:, j] - zz[:, i])
    dlog = dlog - dv + Nf * np.sum(np.where(big, zp * zi, 0.0), axis=1)
    logF = logdet - np.log(_vandermonde(zz)) + Nf * np.sum(np.where(big, np.log(zz), 0.0), axis=1)
    return logF, dlog


def sancho_rubio(H00, H01, H10, w, tol=1e-12, maxit=100):
    """Doubling recursion for a batch of complex probe energies w.

    Returns (Gl, Gr, Gb, iters, norms): left-surface, right-surface and bulk
    Green's functions (n, d, d), iteration counts (n,) and final coupling
    norms (n, 2). Points that hit maxit report iters == maxit; points whose
    iterates blow up report iters == -1.
    """
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    n = w.size
    d = H00.shape[0]
    I = np.eye(d)
    a = np.broadcast_to(np.asarray(H01, dtype=complex), (n, d, d)).copy()
    b = np.broadcast_to(np.asarray(H10, dtype=complex), (n, d, d)).copy()
    e = np.broadcast_to(np.asarray(H00, dtype=complex), (n, d, d)).copy()
    esl = e.copy()
    esr = e.copy()
    iters = np.full(n, maxit, dtype=np.int64)
    norms = np.zeros((n, 2))
    active = np.ones(n, dtype=bool)
    W = w[:, None, None] * I
    with np.errstate(all="ignore"):
        return _sr_loop(W, a, b, e, esl, esr, iters, norms, active, tol, maxit)


def _sr_loop(W, a, b, e, esl, esr, iters, norms, active, tol, maxit):
    for it in range(1, maxit + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        g = np.linalg.inv(W[idx] - e[idx])
        ai, bi = a[idx], b[idx]
        ag = ai @ g
        bg = bi @ g
        agb = ag @ bi
        bga = bg @ ai
        e[idx] += agb + bga
        # left surface sees only the right half-line; right surface the left one
        esl[idx] += agb
        esr[idx] += bga
        a[idx] = ag @ ai
        b[idx] = bg @ bi
        na = np.linalg.norm(a[idx], axis=(1, 2))
        nb = np.linalg.norm(b[idx], axis=(1, 2))
        norms[idx, 0] = na
        norms[idx, 1] = nb
        done = (na < tol) & (nb < tol)
        iters[idx[done]] = it
        active[idx[done]] = False
        bad = ~(np.isfinite(na) & np.isfinite(nb))
        iters[idx[bad]] = -1
        active[idx[bad]] = False
    Gl = np.linalg.inv(W - esl)
    Gr = np.linalg.inv(W - esr)
    Gb = np.linalg.inv(W - e)
    return Gl, Gr, Gb, iters, norms
