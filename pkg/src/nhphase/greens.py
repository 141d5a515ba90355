"""Iterative surface and bulk Green's functions of the semi-infinite chain.

The t2 bond spans two cells, so the chain is blocked into principal layers
of two cells (basis A1, B1, A2, B2) which couple only to nearest layers.

Non-reciprocal hopping makes the plain Bloch-frame recursion blow up in the
skin regime: the semi-infinite resolvent then grows like z^n along the chain.
Working in the non-Bloch frame, i.e. after the cell similarity
H -> S^-1 H S with S = diag(r^n) and r the geometric mean of the two middle
quartic-root moduli at the probe energy, leaves every diagonal resolvent
entry unchanged and restores convergence.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .lattice import ModelParams

__all__ = [
    "PrincipalLayer",
    "GreensResult",
    "SpectralResult",
    "GreensError",
    "MaxIterationsError",
    "build_principal_layer",
    "nonbloch_radius",
    "surface_greens",
    "spectral_functions",
    "transition_scan",
    "locate_transition",
    "spectral_map",
    "assemble_layers",
    "DEFAULT_ETA",
    "DEFAULT_TOL",
    "DEFAULT_MAXIT",
]

DEFAULT_ETA = 1e-3
DEFAULT_TOL = 1e-12
DEFAULT_MAXIT = 100


class GreensError(RuntimeError):
    """Recursion failure (divergence or singular inversion)."""


class MaxIterationsError(GreensError):
    def __init__(self, msg, norms=None):
        super().__init__(msg)
        self.norms = norms


@dataclass(frozen=True)
class PrincipalLayer:
    H00: np.ndarray
    H01: np.ndarray
    H10: np.ndarray
    radius: float = 1.0


@dataclass
class GreensResult:
    G_surface_left: np.ndarray
    G_surface_right: np.ndarray
    G_bulk: np.ndarray
    iterations: int
    norms: tuple
    w: complex = 0j


@dataclass
class SpectralResult:
    A_surface: float
    A_bulk: float
    A_surface_right: float
    iterations: int = 0
    radius: float = 1.0
    meta: dict = field(default_factory=dict)


def build_principal_layer(params, radius=1.0):
    """Two-cell layer blocks; ``radius`` != 1 returns the non-Bloch-frame blocks."""
    t0, t1R, t1L, t2 = params.hoppings
    e = params.eps0
    H00 = np.zeros((4, 4))
    H01 = np.zeros((4, 4))
    H10 = np.zeros((4, 4))
    A1, B1, A2, B2 = 0, 1, 2, 3
    H00[[0, 1, 2, 3], [0, 1, 2, 3]] = e
    H00[A1, B1] = H00[B1, A1] = t0
    H00[A2, B2] = H00[B2, A2] = t0
    H00[A2, B1] = t1R
    H00[B1, A2] = t1L
    # H01[i, j]: layer l site i <- layer l+1 site j
    H01[B1, A1] = t2
    H01[B2, A1] = t1L
    H01[B2, A2] = t2
    H10[A1, B1] = t2
    H10[A1, B2] = t1R
    H10[A2, B2] = t2
    r = float(radius)
    if r != 1.0:
        s = np.array([1.0, 1.0, r, r])
        sc = s[None, :] / s[:, None]
        H00 = H00 * sc
        H01 = H01 * sc * r**2
        H10 = H10 * sc / r**2
    return PrincipalLayer(H00, H01, H10, r)


def assemble_layers(layer, n_layers):
    """Block-tridiagonal matrix of n_layers copies (open ends)."""
    d = layer.H00.shape[0]
    M = np.zeros((d * n_layers, d * n_layers), dtype=np.result_type(layer.H00, float))
    for i in range(n_layers):
        sl = slice(d * i, d * (i + 1))
        M[sl, sl] = layer.H00
        if i + 1 < n_layers:
            nx = slice(d * (i + 1), d * (i + 2))
            M[sl, nx] = layer.H01
            M[nx, sl] = layer.H10
    return M


def nonbloch_radius(params, E=None):
    """sqrt(|z2| |z3|) of the sorted root moduli of the characteristic polynomial at E.

    Degree drops (t0 or t2 zero) are handled by trimming vanishing end
    coefficients; with no finite nonzero root the radius is 1.
    """
    t0, t1R, t1L, t2 = params.hoppings
    de = (params.eps0 if E is None else complex(E)) - params.eps0
    c = np.array(
        [t0 * t2, t0 * t1L + t1R * t2, t0 * t0 + t1R * t1L + t2 * t2 - de * de, t0 * t1R + t1L * t2, t0 * t2],
        dtype=complex,
    )
    nz = np.flatnonzero(np.abs(c) > 0)
    if nz.size < 2:
        return 1.0
    c = c[nz[0] : nz[-1] + 1]
    m = np.sort(np.abs(np.roots(c)))
    m = m[m > 0]
    n = m.size
    if n == 0:
        return 1.0
    if n % 2:
        return float(m[n // 2])
    return float(np.sqrt(m[n // 2 - 1] * m[n // 2]))


def surface_greens(layer, E, eta=DEFAULT_ETA, tol=DEFAULT_TOL, max_iter=DEFAULT_MAXIT):
    """Doubling recursion with separate forward (H01) and backward (H10) chains.

    Returns left-surface, right-surface and bulk Green's functions at E + i eta.
    """
    if not eta > 0:
        raise ValueError("eta must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")
    w = complex(E) + 1j * eta
    Gl, Gr, Gb, it, nm = kernels.sancho_rubio(layer.H00, layer.H01, layer.H10, np.array([w]), tol, int(max_iter))
    it = int(it[0])
    norms = (float(nm[0, 0]), float(nm[0, 1]))
    if it < 0:
        raise GreensError(f"recursion diverged at w={w}; final norms {norms}")
    if it >= max_iter and not (norms[0] < tol and norms[1] < tol):
        raise MaxIterationsError(f"no convergence in {max_iter} iterations; final norms {norms}", norms)
    G = (Gl[0], Gr[0], Gb[0])
    if not all(np.all(np.isfinite(g)) for g in G):
        raise GreensError(f"singular inversion at w={w}")
    return GreensResult(G[0], G[1], G[2], it, norms, w)


def _A(G):
    return float(-np.trace(G).imag / np.pi)


def spectral_functions(params, E=None, eta=DEFAULT_ETA, frame="nonbloch", tol=DEFAULT_TOL, max_iter=DEFAULT_MAXIT):
    """A = -Im Tr G / pi for the left surface layer and the bulk; right surface in extras."""
    E = params.eps0 if E is None else complex(E)
    r = nonbloch_radius(params, E) if frame == "nonbloch" else 1.0
    res = surface_greens(build_principal_layer(params, r), E, eta, tol, max_iter)
    return SpectralResult(
        _A(res.G_surface_left),
        _A(res.G_bulk),
        _A(res.G_surface_right),
        res.iterations,
        r,
        {"norms": res.norms},
    )


def _scan_point(args):
    params, E, eta, frame, tol, max_iter = args
    try:
        s = spectral_functions(params, E, eta, frame, tol, max_iter)
        return (s.A_surface, s.A_surface_right, s.A_bulk, s.iterations, s.radius, "")
    except (GreensError, np.linalg.LinAlgError, ValueError) as exc:
        return (np.nan, np.nan, np.nan, -1, np.nan, type(exc).__name__ + ": " + str(exc))


def transition_scan(params, t2_grid, eta=DEFAULT_ETA, E=None, frame="nonbloch", tol=DEFAULT_TOL,
                    max_iter=DEFAULT_MAXIT, jobs=1):
    """Rows (t2, A_surface, A_surface_right, A_bulk, iterations, radius, error) at E = eps0."""
    grid = np.asarray(t2_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("t2 grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("t2 grid must be strictly increasing")
    E = params.eps0 if E is None else E
    tasks = [(params.with_(t2=float(t)), E, eta, frame, tol, max_iter) for t in grid]
    rows = _map(_scan_point, tasks, jobs)
    return [(float(t),) + r for t, r in zip(grid, rows)]


def locate_transition(rows):
    """First t2 where the surface peak falls below the bulk value, after being above it."""
    seen_peak = False
    for t2, As, _, Ab, *_ in rows:
        if not np.isfinite(As):
            continue
        if As > Ab:
            seen_peak = True
        elif seen_peak:
            return t2
    return None


def spectral_map(params, E_grid, t2_grid, eta=DEFAULT_ETA, frame="nonbloch", jobs=1):
    """(E, t2) heat-map rows (t2, E, A_surface, A_bulk, error)."""
    tasks = [(params.with_(t2=float(t)), complex(e), eta, frame, DEFAULT_TOL, DEFAULT_MAXIT)
             for t in t2_grid for e in E_grid]
    rows = _map(_scan_point, tasks, jobs)
    out = []
    k = 0
    for t in t2_grid:
        for e in E_grid:
            r = rows[k]
            out.append((float(t), float(np.real(e)), r[0], r[2], r[5]))
            k += 1
    return out


def _map(fn, tasks, jobs):
    if jobs and jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    return [fn(t) for t in tasks]


# keep ModelParams importable from here for CLI convenience
ModelParams = ModelParams
