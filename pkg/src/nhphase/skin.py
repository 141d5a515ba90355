"""Exact open-chain solution: quartic roots, the alpha-theta relation,
boundary quantization and eigenstates.

Away from E = eps0 every eigenstate is a superposition of the four bulk
solutions z_j^n with z_j the roots of

    (t0 z^2 + t1R z + t2)(t2 z^2 + t1L z + t0) = (E - eps0)^2 z^2.

Two routes are provided:

* ``method="exact"`` imposes all four open-boundary conditions, which turns
  quantization into finding the N roots of a polynomial in lam = (E-eps0)^2
  (see ``_kernels_py`` for the secular function). Real roots come from a
  sign scan in signed-sqrt energy, the rest (complex pairs, the zero-mode
  doublet) from Aberth iterations on the deflated function.
* ``method="ansatz"`` scans theta with the two-term ansatz
  z = e^(alpha +- i theta), alpha(theta) from the Vieta relation, and the
  closed-form boundary equation in theta. It is asymptotically right but
  carries an O(1e-2) energy error at N = 100, so it is kept for comparison.
"""

import cmath
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import kernels
from ._kernels_py import _columns
from .winding import topological_criterion

__all__ = [
    "VietaCoefficients",
    "SkinMode",
    "ModeSet",
    "LocalizationProfile",
    "SkinError",
    "NoRealSolutionError",
    "DEFAULT_TOL",
    "vieta",
    "quartic_roots",
    "alpha_equation",
    "alpha_from_theta",
    "alpha_halfpi_closed_form",
    "xi_from_mode",
    "energy_from_mode",
    "boundary_residual",
    "vieta_residual",
    "localization_profile",
    "quantize",
    "quantize_ansatz",
    "build_eigenstate",
    "recurrence_residual",
    "crosscheck_dense",
    "mode_parameters",
    "spectral_radius_bound",
]

DEFAULT_TOL = {
    "zero_mode": 1e-6,
    "theta_bisect": 1e-12,
    "alpha_residual": 1e-11,
    "complex_energy": 1e-8,
    "scan_density": 40,
    "aberth_maxit": 500,
    "ansatz_root_check": 1e-6,
}


ALPHA_ZERO = 1e-12


class SkinError(ValueError):
    """Invalid input for the exact-solution machinery."""


class NoRealSolutionError(SkinError):
    """No real alpha solves the alpha-theta relation at this theta."""


@dataclass(frozen=True)
class VietaCoefficients:
    omega1: float
    omega2: complex
    omega3: float
    omega4: float = 1.0

    @property
    def diff13(self):
        return self.omega1 - self.omega3


@dataclass
class SkinMode:
    theta: float
    alpha: float
    xi: complex
    energy: complex
    m: int = 0
    amplitudes_A: np.ndarray = None
    amplitudes_B: np.ndarray = None
    lam: complex = 0j
    roots: np.ndarray = None
    complex_energy: bool = False
    boundary_residual: float = np.nan
    alpha_residual: float = np.nan
    recurrence_residual: float = np.nan
    notes: list = field(default_factory=list)

    @property
    def penetration_length(self):
        return np.inf if self.alpha == 0 else abs(1.0 / self.alpha)

    @property
    def band_index(self):
        return self.m


class ModeSet(list):
    """List of SkinMode plus the bookkeeping of a quantization run."""

    def __init__(self, modes=(), *, method="exact", N=0):
        super().__init__(modes)
        self.method = method
        self.N = N
        self.zero_modes = []
        self.lam_roots = np.array([], dtype=complex)
        self.diagnostics = []
        self.branch_failures = []
        self.counts = {}

    @property
    def energies(self):
        return np.array([m.energy for m in self], dtype=complex)


@dataclass
class LocalizationProfile:
    theta: np.ndarray
    alpha: np.ndarray
    solvable: np.ndarray


def _tol(overrides):
    t = dict(DEFAULT_TOL)
    if overrides:
        unknown = set(overrides) - set(t)
        if unknown:
            raise SkinError(f"unknown tolerance keys: {sorted(unknown)}")
        t.update(overrides)
    return t


def _omega13(params):
    params.require_exact()
    t0, t1R, t1L, t2 = params.hoppings
    w1 = -(t0 * t1L + t1R * t2) / (t0 * t2)
    w3 = -(t0 * t1R + t1L * t2) / (t0 * t2)
    # factored difference is exactly zero on t0 == t2 or t1R == t1L
    d = -(t0 - t2) * (t1L - t1R) / (t0 * t2)
    return w1, w3, w1 + w3, d


def vieta(params, E):
    """Elementary symmetric sums of the quartic roots at energy E."""
    try:
        params.require_exact()
    except ValueError as exc:
        raise ZeroDivisionError(str(exc)) from exc
    t0, t1R, t1L, t2 = params.hoppings
    w1, w3, _, _ = _omega13(params)
    de = complex(E) - params.eps0
    w2 = (t0 * t0 + t1R * t1L + t2 * t2 - de * de) / (t0 * t2)
    if w2.imag == 0:
        w2 = complex(w2.real, 0.0)
    return VietaCoefficients(w1, w2, w3, 1.0)


def quartic_roots(params, E):
    """Four roots of the characteristic quartic at energy E, ascending modulus."""
    params.require_exact()
    t0, t1R, t1L, t2 = params.hoppings
    de = complex(E) - params.eps0
    z = kernels.roots4(t0, t1R, t1L, t2, np.array([de * de]))[0]
    return z[np.lexsort((np.angle(z), np.abs(z)))]


def vieta_residual(params, E, z=None):
    """Max relative mismatch between root symmetric sums and the Vieta coefficients."""
    if z is None:
        z = quartic_roots(params, E)
    v = vieta(params, E)
    e1 = z.sum()
    e2 = sum(z[i] * z[j] for i in range(4) for j in range(i + 1, 4))
    e3 = sum(z[i] * z[j] * z[k] for i in range(4) for j in range(i + 1, 4) for k in range(j + 1, 4))
    e4 = np.prod(z)
    # monic quartic z^4 + a3 z^3 + ... : e1 = -a3 = omega1, e2 = omega2, e3 = omega3, e4 = 1
    got = np.array([e1, e2, e3, e4])
    want = np.array([v.omega1, v.omega2, v.omega3, v.omega4])
    return float(np.max(np.abs(got - want) / np.maximum(np.abs(want), 1.0)))


def spectral_radius_bound(params):
    """Row-sum bound on |E - eps0| for the open chain."""
    t0, t1R, t1L, t2 = map(abs, params.hoppings)
    return max(t0 + t1R + t2, t0 + t1L + t2)


# ---------------------------------------------------------------- alpha(theta)

def alpha_equation(params, theta, alpha):
    """(w1+w3)/cosh(a) + (w1-w3)/sinh(a) - 8 cos(theta)."""
    _, _, S, D = _omega13(params)
    alpha = np.asarray(alpha, dtype=float)
    with np.errstate(divide="ignore"):
        return S / np.cosh(alpha) + D / np.sinh(alpha) - 8.0 * np.cos(theta)


def alpha_halfpi_closed_form(params):
    """alpha at theta = pi/2, where the relation collapses to tanh(a) = -(w1-w3)/(w1+w3)."""
    _, _, S, D = _omega13(params)
    if D == 0:
        return 0.0
    r = -D / S
    if abs(r) >= 1:
        raise NoRealSolutionError(f"|tanh alpha| = {abs(r):.6g} >= 1 at theta=pi/2")
    return float(np.arctanh(r))


_ALPHA_GRID = np.geomspace(1e-14, 60.0, 1200)


def _side_root(f, sgn):
    g = sgn * _ALPHA_GRID
    v = f(g)
    s = np.sign(v)
    idx = np.nonzero(s[:-1] * s[1:] <= 0)[0]
    for i in idx:
        a, b = g[i], g[i + 1]
        if v[i] == 0:
            return float(a)
        if v[i + 1] == 0:
            return float(b)
        return float(brentq(lambda x: float(f(np.array([x]))[0]), a, b, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200))
    return None


def alpha_from_theta(params, theta, branch="primary"):
    """Real alpha solving the alpha-theta relation.

    ``primary`` is the root of smallest |alpha| over both signs; ``negative``
    and ``positive`` pick the smallest root on one side. When w1 == w3 the
    relation degenerates and alpha = 0 is returned by convention.
    """
    _, _, S, D = _omega13(params)
    if D == 0:
        return 0.0
    c = 8.0 * np.cos(theta)

    def f(a):
        return S / np.cosh(a) + D / np.sinh(a) - c

    cands = []
    if branch in ("primary", "negative"):
        r = _side_root(f, -1.0)
        if r is not None:
            cands.append(r)
    if branch in ("primary", "positive"):
        r = _side_root(f, 1.0)
        if r is not None:
            cands.append(r)
    if not cands:
        raise NoRealSolutionError(f"no real alpha on branch {branch!r} at theta={theta:.17g}")
    return min(cands, key=abs)


def _alpha_residual(S, D, alpha, theta):
    # at alpha = 0 the relation only holds in the limit, which requires w1 == w3
    if alpha == 0:
        return float(abs(D))
    return float(abs(S / np.cosh(alpha) + D / np.sinh(alpha) - 8 * np.cos(theta)))


def xi_from_mode(params, alpha, theta):
    """Auxiliary angle from cos(xi) = (w1+w3)/(4 cosh a) - cos(theta); may be complex."""
    _, _, S, _ = _omega13(params)
    return cmath.acos(S / (4.0 * np.cosh(alpha)) - np.cos(theta))


def energy_from_mode(params, alpha, theta, return_flag=False, tol=None):
    """Energy of the bulk solution z1 = e^(alpha + i theta), Re(E - eps0) >= 0.

    With ``return_flag`` the result is (E, complex_flag) where the flag marks
    an imaginary part of (E - eps0)^2 above tolerance.
    """
    t = _tol(tol)
    t0, t1R, t1L, t2 = params.hoppings
    z1 = cmath.exp(complex(alpha, theta))
    lam = (t0 + t1L * z1 + t2 * z1 * z1) * (t2 + t1R * z1 + t0 * z1 * z1) / (z1 * z1)
    de = cmath.sqrt(lam)
    if de.real < 0 or (de.real == 0 and de.imag < 0):
        de = -de
    flag = abs(lam.imag) > t["complex_energy"] * max(abs(lam), 1e-300)
    E = params.eps0 + de
    return (E, flag) if return_flag else E


def boundary_residual(params, alpha, theta, N):
    """Closed-form boundary equation sin((N+1)t) + mu1 sin(Nt) + mu2 sin((N-1)t)."""
    mu1 = np.exp(-alpha) * params.t1R / params.t0
    mu2 = np.exp(-2 * alpha) * params.t2 / params.t0
    return float(np.sin((N + 1) * theta) + mu1 * np.sin(N * theta) + mu2 * np.sin((N - 1) * theta))


def _alpha_batch(S, D, c, sgn):
    """Smallest root on one side of alpha = 0 for many right-hand sides c at once.

    Returns NaN where that side has no sign change on the scan grid.
    """
    g = sgn * _ALPHA_GRID
    v = S / np.cosh(g)[None, :] + D / np.sinh(g)[None, :] - c[:, None]
    s = np.sign(v)
    ch = s[:, :-1] * s[:, 1:] <= 0
    has = ch.any(axis=1)
    i = np.argmax(ch, axis=1)
    a = np.where(has, g[i], np.nan)
    b = np.where(has, g[np.minimum(i + 1, g.size - 1)], np.nan)
    fa = np.where(has, v[np.arange(c.size), i], np.nan)
    with np.errstate(invalid="ignore"):
        for _ in range(200):
            m = 0.5 * (a + b)
            fm = S / np.cosh(m) + D / np.sinh(m) - c
            left = np.sign(fm) == np.sign(fa)
            a = np.where(left, m, a)
            fa = np.where(left, fm, fa)
            b = np.where(left, b, m)
            if np.all(~has | (np.abs(b - a) <= 2 * np.finfo(float).eps * np.abs(m))):
                break
    return np.where(has, 0.5 * (a + b), np.nan)


def localization_profile(params, n=512):
    """alpha on n uniform theta samples strictly inside (0, pi), primary branch."""
    theta = np.linspace(0.0, np.pi, n + 2)[1:-1]
    _, _, S, D = _omega13(params)
    if D == 0:
        return LocalizationProfile(theta, np.zeros(n), np.ones(n, dtype=bool))
    c = 8.0 * np.cos(theta)
    neg = _alpha_batch(S, D, c, -1.0)
    pos = _alpha_batch(S, D, c, 1.0)
    both = np.stack([neg, pos])
    pick = np.where(np.isnan(neg), pos, np.where(np.isnan(pos), neg, np.where(np.abs(neg) <= np.abs(pos), neg, pos)))
    ok = ~np.isnan(both).all(axis=0)
    return LocalizationProfile(theta, pick, ok)


# ------------------------------------------------------------ exact quantization

def _scan_real_roots(hop, N, rho, density, floor):
    """Real lam roots from sign changes of the secular function in s, lam = s|s|."""
    m = 2 * density * N + 1
    s = np.linspace(-rho, rho, m)
    s = s[np.abs(s) > floor]
    f = kernels.secular_real(*hop, N, s * np.abs(s))

    def g(x):
        return float(kernels.secular_real(*hop, N, np.array([x * abs(x)]))[0])

    roots = []
    brackets = []
    for i in range(len(s) - 1):
        if s[i] < 0 < s[i + 1]:
            continue
        if f[i] == 0:
            roots.append(s[i])
        elif f[i] * f[i + 1] < 0:
            brackets.append((s[i], s[i + 1]))
    # sign-preserving dips of |f| may hide a close pair; look closer
    af = np.abs(f)
    for i in range(1, len(s) - 1):
        if s[i - 1] < 0 < s[i + 1]:
            continue
        if af[i] < af[i - 1] and af[i] < af[i + 1] and f[i - 1] * f[i] > 0 and f[i] * f[i + 1] > 0:
            brackets.extend(_refine_dip(g, s[i - 1], s[i + 1], depth=3))
    for a, b in brackets:
        roots.append(brentq(g, a, b, xtol=1e-15, rtol=1e-15, maxiter=200))
    s_roots = np.array(sorted(roots))
    return s_roots * np.abs(s_roots)


def _refine_dip(g, a, b, depth, k=8):
    x = np.linspace(a, b, 2 * k + 1)
    v = np.array([g(t) for t in x])
    out = []
    for i in range(len(x) - 1):
        if v[i] * v[i + 1] < 0:
            out.append((x[i], x[i + 1]))
    if not out and depth > 1:
        j = int(np.argmin(np.abs(v[1:-1]))) + 1
        return _refine_dip(g, x[j - 1], x[j + 1], depth - 1, k)
    return out


def _aberth(hop, N, known, k, scale, maxit):
    """Remaining k roots of the secular polynomial after deflating ``known``."""
    if k <= 0:
        return np.array([], dtype=complex), 0, True
    ang = 2 * np.pi * np.arange(k) / k + 0.4
    x = 0.5 * scale * np.exp(1j * ang) + 1e-3 * scale
    known = np.asarray(known, dtype=complex)
    conv = False
    it = 0
    for it in range(1, maxit + 1):
        _, dl = kernels.log_secular(*hop, N, x)
        if known.size:
            dl = dl - np.sum(1.0 / (x[:, None] - known[None, :]), axis=1)
        w = 1.0 / dl
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        corr = w / (1.0 - w * inv.sum(axis=1))
        x = x - corr
        if np.max(np.abs(corr)) <= 1e-15 * max(scale, np.max(np.abs(x))):
            conv = True
            break
    return x, it, conv


def _polish(hop, N, x, steps=4):
    for _ in range(steps):
        _, dl = kernels.log_secular(*hop, N, np.array([x]))
        if not np.isfinite(dl[0]) or dl[0] == 0:
            break
        dx = 1.0 / dl[0]
        x = x - dx
        if abs(dx) <= 1e-16 * max(abs(x), 1e-300):
            break
    return x


def _conjugate_pairs(x):
    # the secular polynomial is real: make complex roots exact conjugate pairs
    x = x.copy()
    free = [i for i in range(x.size) if x[i].imag != 0]
    while free:
        i = free.pop(0)
        if not free:
            break
        j = min(free, key=lambda k: abs(x[k] - np.conj(x[i])))
        if abs(x[j] - np.conj(x[i])) <= 1e-6 * max(abs(x[i]), 1e-300):
            free.remove(j)
            m = 0.5 * (x[i] + np.conj(x[j]))
            x[i], x[j] = m, np.conj(m)
    return x


def secular_lambda_roots(params, N=None, tol=None):
    """All N roots lam = (E-eps0)^2 of the exact secular polynomial.

    Returns (lam_roots, info) with lam_roots sorted real-first.
    """
    t = _tol(tol)
    params.require_exact()
    N = params.N if N is None else int(N)
    if N < 3:
        raise SkinError("N must be at least 3")
    hop = params.hoppings
    rho = spectral_radius_bound(params)
    real = _scan_real_roots(hop, N, rho, int(t["scan_density"]), 1e-7 * rho)
    info = {"n_real_scan": int(real.size)}
    k = N - real.size
    if k < 0:
        # more sign changes than the degree allows: keep the N with smallest |F'| ambiguity
        info["excess_real"] = int(-k)
        real = real[:N]
        k = 0
    extra, iters, conv = _aberth(hop, N, real, k, rho * rho, int(t["aberth_maxit"]))
    info.update(aberth_roots=int(k), aberth_iterations=int(iters), aberth_converged=bool(conv))
    out = []
    for x in extra:
        x = _polish(hop, N, x)
        if abs(x.imag) <= 1e-10 * max(abs(x), rho * rho * 1e-12):
            x = complex(x.real, 0.0)
        out.append(x)
    lam = np.concatenate([real.astype(complex), _conjugate_pairs(np.array(out, dtype=complex))])
    order = np.lexsort((lam.imag, lam.real, np.abs(lam.imag) > 0))
    return lam[order], info


def mode_parameters(params, lam):
    """(theta, alpha, roots) for one lam.

    For real energies alpha and theta come from the complex-conjugate root
    pair (smallest |alpha| if there are two); otherwise theta is NaN and
    alpha is the mean log-modulus of the middle two roots.
    """
    hop = params.hoppings
    z = kernels.roots4(*hop, np.array([lam], dtype=complex))[0]
    z = z[np.lexsort((np.angle(z), np.abs(z)))]
    mid = 0.5 * (np.log(abs(z[1])) + np.log(abs(z[2])))
    if abs(complex(lam).imag) > 0:
        return np.nan, float(mid), z
    pairs = []
    used = set()
    for i in range(4):
        if i in used or abs(z[i].imag) <= 1e-12 * abs(z[i]):
            continue
        for j in range(4):
            if j != i and j not in used and abs(z[j] - np.conj(z[i])) <= 1e-7 * abs(z[i]):
                pairs.append((i, j))
                used.update((i, j))
                break
    if not pairs:
        return float(abs(np.angle(z[1]))), float(mid), z
    best = min(pairs, key=lambda p: abs(np.log(abs(z[p[0]]))))
    zi = z[best[0]]
    a = float(np.log(abs(zi)))
    if abs(a) < ALPHA_ZERO:
        a = 0.0
    return float(abs(np.angle(zi))), a, z


def _exact_state(params, lam, de, N):
    """Eigenvector (phi_A, phi_B) of the open chain at lam = de^2 from the 4x4 null vector."""
    t0, t1R, _, t2 = params.hoppings
    z = kernels.roots4(*params.hoppings, np.array([lam], dtype=complex))
    M, big, ha = _columns(t0, t1R, t2, N, z)
    M, big, ha, z = M[0], big[0], ha[0], z[0]
    _, _, vh = np.linalg.svd(M)
    c = vh[-1].conj()
    n = np.arange(1, N + 1)[:, None]
    expo = np.where(big[None, :], n - N, n)
    Z = np.exp(expo * np.log(z[None, :]))
    phB = Z @ c
    phA = Z @ (c * ha) / de
    return _normalize(phA, phB)


def _normalize(phA, phB):
    v = np.empty(2 * phA.size, dtype=complex)
    v[0::2] = phA
    v[1::2] = phB
    v /= np.linalg.norm(v)
    lead = v[np.argmax(np.abs(v))]
    v *= abs(lead) / lead
    return v[0::2].copy(), v[1::2].copy()


def _apply_obc(params, phA, phB):
    t0, t1R, t1L, t2 = params.hoppings
    e = params.eps0
    B1 = np.concatenate([[0], phB[:-1]])
    B2 = np.concatenate([[0, 0], phB[:-2]])
    A1 = np.concatenate([phA[1:], [0]])
    A2 = np.concatenate([phA[2:], [0, 0]])
    hA = e * phA + t0 * phB + t1R * B1 + t2 * B2
    hB = e * phB + t0 * phA + t1L * A1 + t2 * A2
    return hA, hB


def recurrence_residual(params, E, phA, phB):
    """max |(H phi - E phi)| over sites, relative to bound * max|phi|."""
    hA, hB = _apply_obc(params, phA, phB)
    r = max(np.max(np.abs(hA - E * phA)), np.max(np.abs(hB - E * phB)))
    scale = (spectral_radius_bound(params) + abs(params.eps0) + abs(E)) * max(
        np.max(np.abs(phA)), np.max(np.abs(phB))
    )
    return float(r / scale)


def _assign_m(modes, zero_energies):
    allE = [(m.energy, i) for i, m in enumerate(modes)] + [(E, -1) for E in zero_energies]
    order = sorted(range(len(allE)), key=lambda j: (allE[j][0].real, allE[j][0].imag))
    for rank, j in enumerate(order, start=1):
        i = allE[j][1]
        if i >= 0:
            modes[i].m = rank


def quantize(params, N=None, method="exact", with_states=True, tol=None):
    """Quantized skin modes of the open chain, excluding E = eps0 zero modes.

    Returns a ModeSet (a list of SkinMode, two per lam root: E and its
    sub-lattice partner) with the zero-mode energies, root counts and
    diagnostics attached. ``method="ansatz"`` delegates to quantize_ansatz.
    """
    if method == "ansatz":
        return quantize_ansatz(params, N, tol=tol)
    if method != "exact":
        raise SkinError(f"unknown method {method!r}")
    t = _tol(tol)
    params.require_exact()
    N = params.N if N is None else int(N)
    if N < 3:
        raise SkinError("N must be at least 3")
    p = params.with_(N=N)
    lam, info = secular_lambda_roots(p, N, tol)
    out = ModeSet(method="exact", N=N)
    out.lam_roots = lam
    out.counts.update(info)
    _, _, S, D = _omega13(p)
    zero = []
    for x in lam:
        de = cmath.sqrt(x)
        if de.real < 0 or (de.real == 0 and de.imag < 0):
            de = -de
        if abs(de) <= t["zero_mode"]:
            zero.extend([p.eps0 + de, p.eps0 - de])
            continue
        theta, alpha, z = mode_parameters(p, x)
        cplx = x.imag != 0 or x.real < 0
        xi = xi_from_mode(p, alpha, theta) if np.isfinite(theta) else complex(np.nan)
        r13 = np.nan
        if np.isfinite(theta):
            r13 = _alpha_residual(S, D, alpha, theta)
        r12 = abs(boundary_residual(p, alpha, theta, N)) if np.isfinite(theta) else np.nan
        for sgn in (1.0, -1.0):
            mode = SkinMode(
                theta=theta,
                alpha=alpha,
                xi=xi,
                energy=complex(p.eps0 + sgn * de),
                lam=complex(x),
                roots=z,
                complex_energy=bool(cplx),
                boundary_residual=r12,
                alpha_residual=r13,
            )
            if with_states:
                phA, phB = _exact_state(p, x, sgn * de, N)
                mode.amplitudes_A, mode.amplitudes_B = phA, phB
                mode.recurrence_residual = recurrence_residual(p, mode.energy, phA, phB)
            out.append(mode)
    out.zero_modes = zero
    _assign_m(out, zero)
    out.sort(key=lambda m: m.m)
    n_complex = sum(1 for m in out if m.complex_energy)
    out.counts.update(
        n_lambda=int(lam.size),
        n_modes=len(out),
        n_zero=len(zero),
        n_complex=int(n_complex),
        total=len(out) + len(zero),
    )
    if out.counts["total"] != 2 * N:
        out.diagnostics.append(f"reconstructed {out.counts['total']} states, expected {2 * N}")
    if not info.get("aberth_converged", True):
        out.diagnostics.append("complex root search hit its iteration cap")
    try:
        topo = topological_criterion(p)
        expect = 2 if topo.topological else 0
        out.counts["expected_zero"] = expect
        if len(zero) != expect:
            out.diagnostics.append(
                f"found {len(zero)} zero modes within {t['zero_mode']:g}, winding criterion predicts {expect}"
            )
    except ValueError as exc:
        out.diagnostics.append(f"zero-mode prediction unavailable: {exc}")
    if n_complex:
        out.diagnostics.append(f"{n_complex} modes have complex energy")
    return out


def quantize_ansatz(params, N=None, tol=None, states=True):
    """theta-scan of the closed-form boundary equation with alpha(theta) on the primary branch."""
    t = _tol(tol)
    params.require_exact()
    N = params.N if N is None else int(N)
    if N < 3:
        raise SkinError("N must be at least 3")
    p = params.with_(N=N)
    out = ModeSet(method="ansatz", N=N)

    def alpha_or_nan(th):
        try:
            return alpha_from_theta(p, th)
        except NoRealSolutionError:
            return np.nan

    def f(th):
        a = alpha_or_nan(th)
        return np.nan if np.isnan(a) else boundary_residual(p, a, th, N)

    grid = np.linspace(0.0, np.pi, 40 * N + 2)[1:-1]
    vals = np.array([f(th) for th in grid])
    bad = np.isnan(vals)
    if bad.any():
        # contiguous unsolvable intervals
        edges = np.flatnonzero(np.diff(np.concatenate([[0], bad.astype(int), [0]])))
        for a, b in zip(edges[0::2], edges[1::2]):
            out.branch_failures.append((float(grid[a]), float(grid[b - 1])))
            out.diagnostics.append(f"no real alpha for theta in [{grid[a]:.6g}, {grid[b - 1]:.6g}]")

    def bisect(a, b, fa):
        while b - a > t["theta_bisect"]:
            m = 0.5 * (a + b)
            fm = f(m)
            if np.isnan(fm):
                return None
            if np.sign(fm) == np.sign(fa):
                a, fa = m, fm
            else:
                b = m
        return 0.5 * (a + b)

    roots = []
    i = 0
    while i < len(grid) - 1:
        a, b, fa, fb = grid[i], grid[i + 1], vals[i], vals[i + 1]
        if np.isfinite(fa) and np.isfinite(fb) and fa * fb <= 0:
            r = a if fa == 0 else bisect(a, b, fa)
            if r is not None:
                roots.append(r)
        i += 1
    # clustered roots: refine locally x8 to catch pairs inside one cell
    extra = []
    for r0, r1 in zip(roots[:-1], roots[1:]):
        if r1 - r0 < np.pi / (4 * N):
            x = np.linspace(r0, r1, 10)[1:-1]
            v = np.array([f(q) for q in x])
            for j in range(len(x) - 1):
                if np.isfinite(v[j]) and np.isfinite(v[j + 1]) and v[j] * v[j + 1] < 0:
                    extra.append(bisect(x[j], x[j + 1], v[j]))
    roots = sorted(set(roots + [r for r in extra if r is not None]))
    for th in roots:
        a = alpha_or_nan(th)
        res = abs(boundary_residual(p, a, th, N))
        if res > t["ansatz_root_check"]:
            out.diagnostics.append(f"discarded jump at theta={th:.12g} (|f|={res:.3g})")
            continue
        E, flag = energy_from_mode(p, a, th, return_flag=True, tol=tol)
        xi = xi_from_mode(p, a, th)
        _, _, S, D = _omega13(p)
        r13 = _alpha_residual(S, D, a, th)
        for sgn in (1.0, -1.0):
            Em = p.eps0 + sgn * (E - p.eps0)
            mode = SkinMode(theta=float(th), alpha=float(a), xi=xi, energy=complex(Em),
                            lam=complex((E - p.eps0) ** 2), complex_energy=bool(flag),
                            boundary_residual=res, alpha_residual=r13)
            if states:
                phA, phB = build_eigenstate(p, mode, N, method="ansatz")
                mode.amplitudes_A, mode.amplitudes_B = phA, phB
                mode.recurrence_residual = recurrence_residual(p, mode.energy, phA, phB)
            out.append(mode)
    zero_expect = 0
    try:
        zero_expect = 2 if topological_criterion(p).topological else 0
    except ValueError:
        pass
    out.zero_modes = [complex(p.eps0)] * zero_expect
    _assign_m(out, out.zero_modes)
    out.sort(key=lambda m: m.m)
    out.counts.update(n_theta=len(roots), n_modes=len(out), n_zero=zero_expect,
                      total=len(out) + zero_expect)
    if out.counts["total"] != 2 * N:
        out.diagnostics.append(f"reconstructed {out.counts['total']} states, expected {2 * N}")
    return out


def build_eigenstate(params, mode, N=None, method="exact"):
    """Unit-norm amplitudes (phi_A, phi_B) of a mode.

    ``exact`` rebuilds the four-root superposition at the mode energy.
    ``ansatz`` uses the closed form
        phi_nA = e^(a n) (sin n t + mu1 sin (n-1) t + mu2 sin (n-2) t)
        phi_nB = e^(a n) (E - eps0)/t0 sin n t.
    """
    N = params.N if N is None else int(N)
    de = complex(mode.energy) - params.eps0
    if method == "exact":
        return _exact_state(params, de * de, de, N)
    if method != "ansatz":
        raise SkinError(f"unknown method {method!r}")
    a, th = mode.alpha, mode.theta
    n = np.arange(1, N + 1)
    mu1 = np.exp(-a) * params.t1R / params.t0
    mu2 = np.exp(-2 * a) * params.t2 / params.t0
    env = np.exp(a * (n - 1))
    phA = env * (np.sin(n * th) + mu1 * np.sin((n - 1) * th) + mu2 * np.sin((n - 2) * th))
    phB = env * (de / params.t0) * np.sin(n * th)
    return _normalize(phA.astype(complex), phB.astype(complex))


def crosscheck_dense(params, modes, dense_values=None):
    """Distance from each mode energy to the nearest dense eigenvalue, and count check."""
    from .dense import eigvals
    from .lattice import build_obc_hamiltonian

    p = params.with_(N=modes.N) if getattr(modes, "N", 0) else params
    ev = eigvals(build_obc_hamiltonian(p)) if dense_values is None else np.asarray(dense_values)
    E = modes.energies
    dist = np.array([np.min(np.abs(ev - e)) for e in E]) if E.size else np.array([0.0])
    return {
        "max_distance": float(dist.max()),
        "n_dense": int(ev.size),
        "n_reconstructed": len(modes) + len(modes.zero_modes),
        "count_match": int(ev.size) == len(modes) + len(modes.zero_modes),
    }
