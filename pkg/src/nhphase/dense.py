"""Dense nonsymmetric eigensolver, linear solver and decay-rate fit.

LAPACK (via numpy/scipy) does the heavy lifting; this module adds the
ordering, phase fixing, residual bookkeeping and failure reporting that the
rest of the package relies on.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

__all__ = [
    "EigenDecomposition",
    "EigenError",
    "SingularMatrixError",
    "InsufficientSupportError",
    "eig",
    "eigvals",
    "solve",
    "fit_decay_rate",
    "sort_spectrum",
]

RESIDUAL_TOL = 1e-8
PIVOT_TOL = 1e-14


class EigenError(RuntimeError):
    """Eigensolver did not converge."""


class SingularMatrixError(np.linalg.LinAlgError):
    """A pivot fell below the relative floor during LU factorization."""


class InsufficientSupportError(ValueError):
    """Too few amplitudes above the floor to fit a decay rate."""


@dataclass
class EigenDecomposition:
    eigenvalues: np.ndarray
    right_eigenvectors: np.ndarray
    residuals: np.ndarray
    max_residual: float
    norm_fro: float
    defective: bool = False
    warnings: list = field(default_factory=list)

    @property
    def residual_ok(self):
        return self.max_residual <= RESIDUAL_TOL * max(self.norm_fro, 1e-300)


def sort_spectrum(w):
    """Indices ordering eigenvalues by real part, then imaginary part."""
    w = np.asarray(w)
    return np.lexsort((w.imag, w.real))


def _check_square(M):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError(f"expected a nonempty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def eigvals(M):
    """Eigenvalues only, sorted by (real, imag)."""
    M = _check_square(M)
    try:
        w = sla.eigvals(M, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise EigenError(str(exc)) from exc
    return w[sort_spectrum(w)]


def eig(M, defect_tol=1e-6):
    """Full right eigendecomposition with residuals.

    Eigenvectors have unit 2-norm and their largest-magnitude component is
    rotated onto the nonnegative real axis. The defective flag is raised when
    a residual misses the tolerance or when two (near-)equal eigenvalues
    carry (near-)parallel eigenvectors, as happens for Jordan blocks.
    """
    M = _check_square(M)
    try:
        w, V = sla.eig(M, check_finite=False)
    except np.linalg.LinAlgError as exc:
        # LAPACK reports the first index that failed; everything before it is unconverged
        raise EigenError(f"eigensolver failed to converge: {exc}") from exc
    order = sort_spectrum(w)
    w = w[order]
    V = np.asarray(V[:, order], dtype=complex)
    V /= np.linalg.norm(V, axis=0, keepdims=True)
    big = np.argmax(np.abs(V), axis=0)
    lead = V[big, np.arange(V.shape[1])]
    V *= (np.abs(lead) / lead)[None, :]
    res = np.linalg.norm(M @ V - V * w[None, :], axis=0)
    nf = float(np.linalg.norm(M))
    dec = EigenDecomposition(w, V, res, float(res.max()), nf)
    bad = np.nonzero(res > RESIDUAL_TOL * max(nf, 1e-300))[0]
    if bad.size:
        dec.defective = True
        dec.warnings.append(f"residual above tolerance at indices {bad.tolist()}")
    scale = max(nf, 1.0)
    n = len(w)
    for i in range(n - 1):
        j = i + 1
        while j < n and abs(w[j].real - w[i].real) <= defect_tol * scale:
            if abs(w[j] - w[i]) <= defect_tol * scale:
                overlap = abs(np.vdot(V[:, i], V[:, j]))
                if overlap > 1.0 - defect_tol:
                    dec.defective = True
                    dec.warnings.append(f"near-parallel eigenvectors at indices {i},{j}")
            j += 1
    return dec


def solve(M, B):
    """LU solve with partial pivoting; refuses near-singular pivots."""
    M = _check_square(M)
    B = np.asarray(B)
    if B.shape[0] != M.shape[0]:
        raise ValueError(f"row count mismatch: {B.shape[0]} vs {M.shape[0]}")
    nf = np.linalg.norm(M)
    with warnings.catch_warnings():
        # exact-zero pivots are reported below as SingularMatrixError
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M, check_finite=False)
    d = np.abs(np.diag(lu))
    floor = PIVOT_TOL * nf
    if nf == 0.0 or d.min() <= floor:
        k = int(np.argmin(d))
        raise SingularMatrixError(f"pivot {k} magnitude {d[k]:.3e} below {floor:.3e}")
    return sla.lu_solve((lu, piv), B, check_finite=False)


def fit_decay_rate(amplitudes, floor=1e-13, reduce="max"):
    """Least-squares slope of log cell amplitude against cell index.

    Accepts a length-N per-cell array or an (N, k) array of per-site moduli
    that is reduced per cell (``reduce`` = "max" or "norm"). The fit uses the
    interior cells 3..N-2 (1-based) that lie above ``floor``.
    """
    a = np.abs(np.asarray(amplitudes, dtype=complex))
    if a.ndim == 2:
        a = a.max(axis=1) if reduce == "max" else np.sqrt((a**2).sum(axis=1))
    elif a.ndim != 1:
        raise ValueError("amplitudes must be 1-D per-cell or 2-D per-site")
    N = a.size
    if N < 8:
        raise InsufficientSupportError(f"need at least 8 cells, got {N}")
    if np.count_nonzero(a > floor) < 6:
        raise InsufficientSupportError("fewer than 6 amplitudes above the floor")
    n = np.arange(1, N + 1)
    sel = (n >= 3) & (n <= N - 2) & (a > floor)
    if np.count_nonzero(sel) < 2:
        raise InsufficientSupportError("interior cells lack support above the floor")
    x = n[sel].astype(float)
    y = np.log(a[sel])
    x -= x.mean()
    return float(np.dot(x, y - y.mean()) / np.dot(x, x))
