"""Two-band non-reciprocal lattice: parameters, real-space and Bloch Hamiltonians.

Basis order is cell-major with A before B: (1A, 1B, 2A, 2B, ..., NA, NB).
Row index 2*(n-1) is nA and 2*(n-1)+1 is nB for 1-based cell n.
"""

from dataclasses import dataclass, replace, asdict
import numbers

import numpy as np

__all__ = [
    "ModelParams",
    "BlochFactors",
    "LatticeError",
    "build_obc_hamiltonian",
    "build_ring_hamiltonian",
    "bloch_hamiltonian",
    "bloch_factors",
    "pbc_spectrum",
    "check_sls",
    "rescale_cells",
    "SIGMA_Z",
]

SIGMA_Z = np.diag([1.0, -1.0])


class LatticeError(ValueError):
    """Invalid model parameters or lattice size."""


def _real(name, v):
    if isinstance(v, bool) or not isinstance(v, numbers.Real):
        if isinstance(v, numbers.Complex):
            raise LatticeError(f"{name} must be real, got complex {v!r}")
        raise LatticeError(f"{name} must be a real number, got {v!r}")
    v = float(v)
    if not np.isfinite(v):
        raise LatticeError(f"{name} must be finite, got {v!r}")
    return v


@dataclass(frozen=True)
class ModelParams:
    """Hopping amplitudes, on-site energy and cell count.

    t0 is the intra-cell hopping, t1R/t1L the right/left nearest inter-cell
    hoppings and t2 the reciprocal next-nearest inter-cell hopping.
    """

    t0: float
    t1R: float
    t1L: float
    t2: float
    eps0: float = 0.0
    N: int = 100

    def __post_init__(self):
        for name in ("t0", "t1R", "t1L", "t2", "eps0"):
            object.__setattr__(self, name, _real(name, getattr(self, name)))
        N = self.N
        if isinstance(N, bool) or not isinstance(N, numbers.Integral):
            if isinstance(N, float) and N.is_integer():
                N = int(N)
            else:
                raise LatticeError(f"N must be an integer, got {self.N!r}")
        if N < 1:
            raise LatticeError(f"N must be positive, got {N}")
        object.__setattr__(self, "N", int(N))

    @property
    def hoppings(self):
        return (self.t0, self.t1R, self.t1L, self.t2)

    def with_(self, **kw):
        """Copy with some fields replaced."""
        return replace(self, **kw)

    def to_dict(self):
        return asdict(self)

    def require_exact(self):
        """Raise unless t0 and t2 are both nonzero (needed by the quartic machinery)."""
        if self.t0 == 0.0 or self.t2 == 0.0:
            raise LatticeError("t0 and t2 must be nonzero (t0*t2 appears in a denominator)")


@dataclass(frozen=True)
class BlochFactors:
    """Coefficient triples of h_a(z) = t0 + t1R/z + t2/z**2 and h_b(z) = t0 + t1L*z + t2*z**2."""

    ha_coeffs: tuple
    hb_coeffs: tuple

    def ha(self, z):
        c0, c1, c2 = self.ha_coeffs
        z = np.asarray(z, dtype=complex)
        return c0 + c1 / z + c2 / z**2

    def hb(self, z):
        c0, c1, c2 = self.hb_coeffs
        z = np.asarray(z, dtype=complex)
        return c0 + c1 * z + c2 * z**2


def bloch_factors(params):
    return BlochFactors(
        (params.t0, params.t1R, params.t2), (params.t0, params.t1L, params.t2)
    )


def build_obc_hamiltonian(params):
    """Dense 2N x 2N open-boundary Hamiltonian (real float64, bandwidth 4)."""
    N = params.N
    if N < 3:
        raise LatticeError(f"open-boundary assembly needs N >= 3, got N={N}")
    t0, t1R, t1L, t2 = params.hoppings
    H = np.zeros((2 * N, 2 * N))
    a = np.arange(N) * 2
    b = a + 1
    H[a, a] = params.eps0
    H[b, b] = params.eps0
    H[a, b] = t0
    H[b, a] = t0
    H[a[1:], b[:-1]] = t1R
    H[b[:-1], a[1:]] = t1L
    H[a[2:], b[:-2]] = t2
    H[b[:-2], a[2:]] = t2
    return H


def build_ring_hamiltonian(params):
    """Periodic variant: t1 and t2 couplings wrap across the seam.

    Entries are accumulated so that short rings (where wrapped bonds land on
    the same matrix element) stay consistent with the Bloch Hamiltonian.
    """
    N = params.N
    if N < 3:
        raise LatticeError(f"ring assembly needs N >= 3, got N={N}")
    t0, t1R, t1L, t2 = params.hoppings
    H = np.zeros((2 * N, 2 * N))
    for n in range(N):
        A, B = 2 * n, 2 * n + 1
        A1 = 2 * ((n + 1) % N)
        A2 = 2 * ((n + 2) % N)
        H[A, A] += params.eps0
        H[B, B] += params.eps0
        H[A, B] += t0
        H[B, A] += t0
        H[A1, B] += t1R
        H[B, A1] += t1L
        H[A2, B] += t2
        H[B, A2] += t2
    return H


def bloch_hamiltonian(params, k):
    """2x2 Bloch matrix [[eps0, h_a(k)], [h_b(k), eps0]] with z = exp(ik)."""
    z = np.exp(1j * float(k))
    f = bloch_factors(params)
    return np.array(
        [[params.eps0, complex(f.ha(z))], [complex(f.hb(z)), params.eps0]], dtype=complex
    )


def pbc_spectrum(params, k_grid):
    """Both bands E = eps0 -/+ sqrt(h_a h_b) on a k grid, shape (len(k), 2).

    The branch with the smaller real part (then imaginary part) comes first.
    """
    k = np.atleast_1d(np.asarray(k_grid, dtype=float))
    if k.size == 0:
        raise LatticeError("k grid is empty")
    z = np.exp(1j * k)
    f = bloch_factors(params)
    s = np.sqrt(f.ha(z) * f.hb(z))
    lo = np.where((s.real > 0) | ((s.real == 0) & (s.imag > 0)), -s, s)
    return np.stack([params.eps0 + lo, params.eps0 - lo], axis=1)


def check_sls(params, n_k=64, atol=1e-14):
    """Sub-lattice symmetry sigma_z H(k) sigma_z = -H(k); holds iff eps0 == 0."""
    if params.eps0 != 0.0:
        return False
    for k in np.linspace(0.0, 2 * np.pi, n_k, endpoint=False):
        h = bloch_hamiltonian(params, k)
        if np.linalg.norm(SIGMA_Z @ h @ SIGMA_Z + h) >= atol:
            return False
    return True


def rescale_cells(H, r):
    """Cell-wise similarity S^-1 H S with S = diag(r**n), n the 0-based cell index.

    Entry (i, j) picks up r**(n_j - n_i). Eigenvalues and diagonal resolvent
    entries are unchanged while skin-localized spectra become well conditioned.
    """
    H = np.asarray(H)
    dim = H.shape[0]
    n = np.repeat(np.arange(dim // 2), 2).astype(float)
    d = n[None, :] - n[:, None]
    near = np.abs(d) <= 2
    # couplings reach at most two cells; clipping keeps far-off zeros from meeting inf
    return np.where(near, H * np.power(float(r), np.clip(d, -2, 2)), 0.0 * H)
