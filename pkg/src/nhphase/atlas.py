"""Phase classification (I-IV), two-axis phase diagrams and finite-size drift.

Phase labels combine two verdicts: topological boundary modes (winding
criterion) and skin localization (nonzero alpha somewhere on the
alpha(theta) profile).

    I   topological, no skin      II  topological, skin
    III trivial, skin             IV  trivial, no skin
"""

import re
from dataclasses import dataclass, field

import numpy as np

from .dense import eigvals
from .greens import nonbloch_radius, _map
from .lattice import build_obc_hamiltonian, rescale_cells
from .skin import NoRealSolutionError, alpha_halfpi_closed_form, localization_profile
from .winding import find_topological_transition, topological_criterion

__all__ = [
    "PhasePoint",
    "Constraint",
    "FiniteSizeRow",
    "classify",
    "diagram",
    "finite_size_report",
    "zero_mode_counts",
    "parse_constraint",
    "label_from_flags",
    "flags_from_label",
    "ALPHA_TOL",
    "GAP_TOL",
    "ANALYTIC_TRANSITION",
]

ALPHA_TOL = 1e-9
GAP_TOL = 1e-3
ANALYTIC_TRANSITION = 0.3398
PARAM_NAMES = ("t0", "t1R", "t1L", "t2", "eps0")

_LABELS = {(True, False): "I", (True, True): "II", (False, True): "III", (False, False): "IV"}


def label_from_flags(topological, skin):
    return _LABELS[(bool(topological), bool(skin))]


def flags_from_label(label):
    for k, v in _LABELS.items():
        if v == label:
            return k
    raise ValueError(f"unknown phase label {label!r}")


@dataclass
class PhasePoint:
    params: object
    phase: str
    topological: bool
    skin: bool
    skin_side: str
    max_abs_alpha: float
    evidence: dict = field(default_factory=dict)
    flagged: bool = False
    flag_reason: str = ""
    error: str = ""


@dataclass(frozen=True)
class Constraint:
    """Linear tie target = scale * source + offset."""

    target: str
    source: str
    scale: float = 1.0
    offset: float = 0.0

    def __call__(self, params):
        v = self.scale * getattr(params, self.source) + self.offset
        return params.with_(**{self.target: v})

    def __str__(self):
        s = f"{self.target} = "
        s += self.source if self.scale == 1.0 else f"{self.scale!r}*{self.source}"
        if self.offset:
            s += f" {'+' if self.offset > 0 else '-'} {abs(self.offset)!r}"
        return s


_CONSTRAINT_RE = re.compile(
    r"^\s*(\w+)\s*=\s*(?:([-+]?[\d.eE+-]+)\s*\*\s*)?(\w+)\s*(?:([+-])\s*([\d.eE+-]+))?\s*$"
)


def parse_constraint(text):
    """Parse 'target = [scale*]source [+|- offset]'."""
    if text is None or isinstance(text, Constraint):
        return text
    m = _CONSTRAINT_RE.match(str(text))
    if not m:
        raise ValueError(f"cannot parse constraint {text!r}")
    target, scale, source, sign, off = m.groups()
    for nm in (target, source):
        if nm not in PARAM_NAMES:
            raise ValueError(f"unknown parameter {nm!r} in constraint")
    if target == source:
        raise ValueError("constraint target and source must differ")
    offset = float(off) * (-1 if sign == "-" else 1) if off else 0.0
    return Constraint(target, source, float(scale) if scale else 1.0, offset)


def _skin_side(params, profile):
    try:
        a = alpha_halfpi_closed_form(params)
    except NoRealSolutionError:
        a = float(np.nanmean(profile.alpha[profile.solvable])) if profile.solvable.any() else 0.0
    if a < 0:
        return "left", a
    if a > 0:
        return "right", a
    return "none", a


def classify(params, alpha_tol=ALPHA_TOL, n_theta=512):
    """Phase label with the criterion values that decided it.

    A point is flagged (unclassifiable) when the root-modulus gap sits within
    the degeneracy tolerance of zero, except on the unit-circle manifold
    where the gap vanishes identically and the verdict is trivial, or when
    max|alpha| is nonzero but not above alpha_tol.
    """
    params.require_exact()
    rep = topological_criterion(params)
    prof = localization_profile(params, n_theta)
    vals = np.abs(prof.alpha[prof.solvable])
    max_alpha = float(vals.max()) if vals.size else 0.0
    skin = max_alpha > alpha_tol
    side, a_half = _skin_side(params, prof)
    if not skin:
        side = "none"
    t0, t1R, t1L, t2 = params.hoppings
    shortcut = abs(t0 - t2) > 1e-12 and abs(t1R - t1L) > 1e-12
    ev = {
        "max_za": float(rep.max_za),
        "min_zb": float(rep.min_zb),
        "gap": float(rep.gap),
        "omega1_minus_omega3": float(-(t0 - t2) * (t1L - t1R) / (t0 * t2)),
        "alpha_halfpi": float(a_half),
        "unsolvable_theta": int((~prof.solvable).sum()),
        "shortcut_agrees": bool(shortcut == skin),
    }
    pt = PhasePoint(params, label_from_flags(rep.topological, skin), rep.topological, skin, side, max_alpha, ev)
    if rep.boundary_degenerate and not rep.unit_circle:
        pt.flagged = True
        pt.flag_reason = "topological transition (|max|za| - min|zb|| below tolerance)"
    elif 0.0 < max_alpha <= alpha_tol and max_alpha > alpha_tol * 1e-3:
        pt.flagged = True
        pt.flag_reason = "skin transition (max|alpha| near tolerance)"
    return pt


def _axis_values(axis):
    name, lo, hi, steps = axis
    if name not in PARAM_NAMES:
        raise ValueError(f"unknown axis parameter {name!r}")
    steps = int(steps)
    if steps < 2:
        raise ValueError("each axis needs at least 2 steps")
    return name, np.linspace(float(lo), float(hi), steps)


def _classify_task(args):
    p, alpha_tol = args
    try:
        return classify(p, alpha_tol)
    except (ValueError, ArithmeticError) as exc:
        return PhasePoint(p, "", False, False, "none", np.nan, {}, True, "error", f"{type(exc).__name__}: {exc}")


def diagram(base, axis1, axis2, constraint=None, alpha_tol=ALPHA_TOL, jobs=1):
    """Row-major grid (axis1 outer, axis2 inner) of PhasePoint.

    ``constraint`` ties a third parameter to the swept ones after each
    point is set, e.g. 't1R = t1L + 0.5'.
    """
    c = parse_constraint(constraint)
    n1, v1 = _axis_values(axis1)
    n2, v2 = _axis_values(axis2)
    tasks = []
    for a in v1:
        for b in v2:
            p = base.with_(**{n1: float(a), n2: float(b)})
            if c is not None:
                p = c(p)
            tasks.append((p, alpha_tol))
    pts = _map(_classify_task, tasks, jobs)
    return [pts[i * len(v2) : (i + 1) * len(v2)] for i in range(len(v1))]


def zero_mode_counts(params, t2_grid, gap_tol=GAP_TOL, jobs=1):
    """Number of OBC eigenvalues within gap_tol of eps0 along a t2 sweep.

    Each matrix is conjugated by the cell rescaling at the non-Bloch radius
    before diagonalization; eigenvalues are unchanged in exact arithmetic but
    the skin-localized spectrum becomes well conditioned at large N.
    """
    tasks = [(params.with_(t2=float(t)), gap_tol) for t in t2_grid]
    return _map(_count_task, tasks, jobs)


def _count_task(args):
    p, gap_tol = args
    H = build_obc_hamiltonian(p)
    r = nonbloch_radius(p)
    w = eigvals(rescale_cells(H, r) if r != 1.0 else H)
    d = np.abs(w - p.eps0)
    return int(np.count_nonzero(d <= gap_tol)), float(np.sort(d)[0])


@dataclass
class FiniteSizeRow:
    N: int
    empirical: float
    analytic: float
    drift: float
    counts: list
    min_abs: list


def finite_size_report(params, N_list, t2_grid=None, gap_tol=GAP_TOL, analytic=None, jobs=1):
    """Empirical zero-mode transition per N against the analytic value.

    The empirical transition is the first swept t2, after a stretch with
    exactly two eigenvalues within gap_tol of eps0, where that count is no
    longer two. None when no such stretch exists at this N.
    """
    if t2_grid is None:
        t2_grid = np.round(np.arange(0.0, 0.8 + 1e-12, 0.005), 12)
    t2_grid = np.asarray(t2_grid, dtype=float)
    if analytic is None:
        try:
            analytic = find_topological_transition(params, "t2", float(t2_grid[0]), float(t2_grid[-1]))
        except ValueError:
            analytic = np.nan
    rows = []
    for N in N_list:
        if int(N) < 3:
            raise ValueError("each N must be at least 3")
        res = zero_mode_counts(params.with_(N=int(N)), t2_grid, gap_tol, jobs)
        counts = [c for c, _ in res]
        mins = [m for _, m in res]
        emp = None
        seen = False
        for t, c in zip(t2_grid, counts):
            if c == 2:
                seen = True
            elif seen:
                emp = float(t)
                break
        drift = abs(emp - analytic) if emp is not None else np.nan
        rows.append(FiniteSizeRow(int(N), emp, float(analytic), drift, counts, mins))
    return rows


def drift_monotone(rows, resolution=0.005):
    """True when drift does not grow with N beyond one grid step."""
    d = [r.drift for r in sorted(rows, key=lambda r: r.N)]
    d = [np.inf if not np.isfinite(x) else x for x in d]
    return all(b <= a + resolution for a, b in zip(d[:-1], d[1:]))
