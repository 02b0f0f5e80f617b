"""Dense assembly and direct solution of the nonlocal exit problems.

The generator of a 1-D diffusion with symmetric alpha-stable jumps, restricted
to an interval (c, d) with exterior (Dirichlet) data, is discretized on a
uniform grid: a second difference whose coefficient carries a zeta-function
correction, a centered drift difference, a diagonal sink holding the jump mass
beyond the interval, and a punched-hole trapezoidal quadrature of the jump
integral (k = 0 omitted, endpoint weights halved).  Rows right of the midpoint
split the quadrature at the distance to the right endpoint; rows left of it
mirror that split.  Mean exit time solves rows = -1 with exterior value 0;
escape probabilities solve rows = 0 with exterior data 1 on the target side,
rearranged so known exterior values land on the right-hand side.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .levy import NoiseParams, riemann_zeta, stable_constant
from .model import drift_function

__all__ = [
    "Grid",
    "GridError",
    "QualityWarning",
    "SingularMatrixError",
    "EscapeTarget",
    "AssembledOperator",
    "DenseSystem",
    "SolutionField",
    "OrderEstimate",
    "build_grid",
    "assemble_operator",
    "met_rhs",
    "escape_rhs",
    "solve_dense",
    "mean_exit_time",
    "escape_probability",
    "observed_order",
    "dump_system",
]

RESIDUAL_TOL = 1e-10
NEGATIVITY_TOL = 1e-8


class GridError(ValueError):
    """Grid endpoints and step violate the divisibility requirements."""


class SingularMatrixError(RuntimeError):
    """LU factorization hit an exactly zero pivot."""

    def __init__(self, pivot_index: int):
        self.pivot_index = pivot_index
        super().__init__(f"singular matrix: zero pivot at index {pivot_index}")


class QualityWarning(UserWarning):
    """Solution violates a physical range or residual bound beyond tolerance."""


class EscapeTarget(enum.Enum):
    LEFT_EXTINCTION = "left"
    RIGHT_MALIGNANT = "right"


@dataclass(frozen=True)
class Grid:
    """Uniform grid on (c, d) with x_j = j*h; c/h, d/h, (c+d)/(2h) integral."""

    c: float
    d: float
    h: float
    jc: int  # index of the node at c
    jd: int  # index of the node at d
    jm: int  # midpoint index (c+d)/(2h); stencil split happens here

    @property
    def n(self) -> int:
        """Number of interior unknowns."""
        return self.jd - self.jc - 1

    def interior_indices(self) -> np.ndarray:
        return np.arange(self.jc + 1, self.jd)

    def interior_x(self) -> np.ndarray:
        return self.interior_indices() * self.h

    def node_x(self) -> np.ndarray:
        """All node coordinates from c to d inclusive."""
        return np.arange(self.jc, self.jd + 1) * self.h


def build_grid(c: float, d: float, h: float) -> Grid:
    """Validate endpoints and step, returning the Grid.

    Refuses (rather than snaps) steps whose quotients c/h, d/h, (c+d)/(2h)
    are not integral within 1e-9 relative: the stencil's index arithmetic
    must be exact.
    """
    if not h > 0:
        raise GridError(f"step h must be positive, got {h}")
    if not c < d:
        raise GridError(f"need c < d, got c={c}, d={d}")
    if not (c <= 0.0 < d):
        raise GridError(f"the recast interval requires c <= 0 < d, got c={c}, d={d}")
    bad = []
    rounded = []
    for name, q in (("c/h", c / h), ("d/h", d / h), ("(c+d)/(2h)", (c + d) / (2.0 * h))):
        r = round(q)
        if abs(q - r) > 1e-9 * max(1.0, abs(q)):
            bad.append(f"{name} = {q:.10g} not integral")
        rounded.append(int(r))
    if bad:
        raise GridError("; ".join(bad))
    jc, jd, jm = rounded
    grid = Grid(float(c), float(d), float(h), jc, jd, jm)
    if grid.n < 3:
        raise GridError(f"grid needs at least 3 interior nodes, got {grid.n}")
    return grid


@dataclass(frozen=True)
class AssembledOperator:
    """Interior-row coefficients plus the bookkeeping the rhs builders need.

    matrix holds interior-to-interior couplings only.  References the stencil
    makes to the nodes at exactly c and d are collected per row in w_left and
    w_right; they multiply whatever exterior value the problem prescribes
    there.  sink_left/right are the split diagonal sink magnitudes
    (eps*C_alpha/alpha) * (x_j - c)^-alpha and (d - x_j)^-alpha.
    """

    grid: Grid
    noise: NoiseParams
    scheme: str
    matrix: np.ndarray
    w_left: np.ndarray
    w_right: np.ndarray
    sink_left: np.ndarray
    sink_right: np.ndarray


@dataclass(frozen=True)
class DenseSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    grid: Grid


@dataclass(frozen=True)
class SolutionField:
    """Solution values on the grid plus the exterior convention.

    The field is constant left of c and right of d; the nodes at c and d
    carry their own prescribed values (0 for exit times; the Dirichlet data
    for escape problems).
    """

    grid: Grid
    tag: str  # mean-exit-time | escape-probability-left | escape-probability-right
    interior: np.ndarray
    value_at_c: float
    value_at_d: float
    left_exterior: float
    right_exterior: float
    residual: float

    def values(self) -> np.ndarray:
        """Values on all nodes c..d inclusive."""
        return np.concatenate(([self.value_at_c], self.interior, [self.value_at_d]))

    def value_at(self, x: float) -> float:
        """Value at the grid node nearest to x (x must fall inside [c, d])."""
        g = self.grid
        j = int(round(x / g.h))
        if not g.jc <= j <= g.jd:
            raise ValueError(f"x={x} outside the grid [{g.c}, {g.d}]")
        return float(self.values()[j - g.jc])


def assemble_operator(g: Grid, m, n: NoiseParams, scheme: str = "corrected") -> AssembledOperator:
    """Assemble interior rows of the discrete generator.

    scheme selects the second-difference coefficient: "corrected" uses
    C_h = a/2 - eps*C_alpha*zeta(alpha-1)*h^(2-alpha), which cancels the
    quadrature's leading error; "uncorrected" keeps a/2.  Pure Gaussian
    noise (eps = 0) skips the sink and quadrature entirely.
    """
    if scheme not in ("corrected", "uncorrected"):
        raise ValueError(f"scheme must be 'corrected' or 'uncorrected', got {scheme!r}")
    f = drift_function(m)
    h = g.h
    jc, jd, jm = g.jc, g.jd, g.jm
    nn = g.n
    n_nodes = nn + 2
    a, eps, alpha = n.a, n.epsilon, n.alpha

    js = g.interior_indices()
    fj = np.asarray(f(js * h), dtype=float)

    if eps > 0.0:
        ca = stable_constant(alpha)
        ch = a / 2.0
        if scheme == "corrected":
            ch -= eps * ca * riemann_zeta(alpha - 1.0) * h ** (2.0 - alpha)
        q = eps * ca * h ** (-alpha)  # eps*C_alpha*h / |k h|^(1+alpha) = q |k|^-(1+alpha)
        sink_left = (eps * ca / alpha) * ((js - jc) * h) ** (-alpha)
        sink_right = (eps * ca / alpha) * ((jd - js) * h) ** (-alpha)
    else:
        ch = a / 2.0
        q = 0.0
        sink_left = np.zeros(nn)
        sink_right = np.zeros(nn)

    rows = np.zeros((nn, n_nodes))
    inv_h2 = 1.0 / (h * h)
    inv_2h = 1.0 / (2.0 * h)
    for r, j in enumerate(js):
        row = rows[r]
        col = j - jc  # position of node j among nodes c..d
        row[col - 1] += ch * inv_h2 - fj[r] * inv_2h
        row[col] += -2.0 * ch * inv_h2
        row[col + 1] += ch * inv_h2 + fj[r] * inv_2h
        if eps == 0.0:
            continue
        row[col] -= sink_left[r] + sink_right[r]
        if j >= jm:
            outer_lo, outer_hi = jc - j, j - jd
            half_width = jd - j
        else:
            outer_lo, outer_hi = j - jc, jd - j
            half_width = j - jc
        # outer piece: jump integral between the far endpoint and the
        # reflected near one; zero-width at the midpoint row, hence skipped
        if outer_hi > outer_lo:
            k = np.arange(outer_lo, outer_hi + 1)
            w = q * np.abs(k, dtype=float) ** (-1.0 - alpha)
            w[0] *= 0.5
            w[-1] *= 0.5
            np.add.at(row, (j + k) - jc, w)
            row[col] -= w.sum()
        # inner piece: symmetric around the row, compensated by the centered
        # first difference; k = 0 is the punched hole
        k = np.concatenate((np.arange(-half_width, 0), np.arange(1, half_width + 1)))
        w = q * np.abs(k, dtype=float) ** (-1.0 - alpha)
        w[0] *= 0.5
        w[-1] *= 0.5
        np.add.at(row, (j + k) - jc, w)
        row[col] -= w.sum()
        # compensator coefficient on (U_{j+1} - U_{j-1}); cancels over the
        # symmetric range but is kept literally
        comp = 0.5 * float(np.sum(w * k))
        row[col + 1] -= comp
        row[col - 1] += comp

    # Exterior references must touch only the nodes at exactly c and d:
    # every stencil index above was j + k with |k| capped by the distance to
    # the far endpoint, so columns stay within [jc, jd].  The split below
    # would misalign if that ever failed.
    matrix = rows[:, 1:-1].copy()
    w_left = rows[:, 0].copy()
    w_right = rows[:, -1].copy()
    diag = np.diag(matrix)
    if np.any(diag == 0.0):
        raise AssertionError("assembled row with zero diagonal entry")
    return AssembledOperator(g, n, scheme, matrix, w_left, w_right, sink_left, sink_right)


def met_rhs(op: AssembledOperator) -> np.ndarray:
    """Right-hand side for the mean-exit problem: -1 per row (exterior 0)."""
    return np.full(op.grid.n, -1.0)


def escape_rhs(op: AssembledOperator, target: EscapeTarget) -> np.ndarray:
    """Right-hand side for the escape problem toward the given target.

    The exterior value is 1 on the target side and 0 on the other, so the
    target-side tail sink and the boundary-node weights move to the rhs
    with a minus sign.
    """
    if target is EscapeTarget.LEFT_EXTINCTION:
        return -(op.sink_left + op.w_left)
    return -(op.sink_right + op.w_right)


def solve_dense(s: DenseSystem) -> tuple[np.ndarray, float]:
    """Direct LU solve with row pivoting; returns (solution, residual).

    The residual is ||A u - b||_inf / ||b||_inf, expected <= 1e-10; larger
    values emit a QualityWarning.  An exactly zero pivot raises
    SingularMatrixError carrying the pivot index.
    """
    a, b = s.matrix, s.rhs
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.shape != (a.shape[0],):
        raise ValueError(f"malformed system: matrix {a.shape}, rhs {b.shape}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # scipy warns before we can raise
        lu, piv = lu_factor(a)
    zero = np.nonzero(np.diag(lu) == 0.0)[0]
    if zero.size:
        raise SingularMatrixError(int(zero[0]))
    u = lu_solve((lu, piv), b)
    scale = np.max(np.abs(b))
    residual = float(np.max(np.abs(a @ u - b)) / scale) if scale > 0 else float(
        np.max(np.abs(a @ u))
    )
    if residual > RESIDUAL_TOL:
        warnings.warn(f"solve residual {residual:.3e} exceeds {RESIDUAL_TOL}", QualityWarning,
                      stacklevel=2)
    return u, residual


def mean_exit_time(g: Grid, m, n: NoiseParams, scheme: str = "corrected") -> SolutionField:
    """Mean exit time from (c, d); zero outside the interval."""
    op = assemble_operator(g, m, n, scheme)
    u, residual = solve_dense(DenseSystem(op.matrix, met_rhs(op), g))
    if u.min() < -NEGATIVITY_TOL:
        warnings.warn(
            f"mean exit time dips to {u.min():.3e}, below -{NEGATIVITY_TOL}", QualityWarning,
            stacklevel=2,
        )
    return SolutionField(g, "mean-exit-time", u, 0.0, 0.0, 0.0, 0.0, residual)


def escape_probability(g: Grid, m, n: NoiseParams, target: EscapeTarget,
                       scheme: str = "corrected") -> SolutionField:
    """Probability of leaving (c, d) into the target exterior set."""
    op = assemble_operator(g, m, n, scheme)
    p, residual = solve_dense(DenseSystem(op.matrix, escape_rhs(op, target), g))
    if p.min() < -NEGATIVITY_TOL or p.max() > 1.0 + NEGATIVITY_TOL:
        warnings.warn(
            f"escape probability range [{p.min():.3e}, {p.max():.3e}] leaves [0, 1] "
            f"beyond {NEGATIVITY_TOL}",
            QualityWarning,
            stacklevel=2,
        )
    if target is EscapeTarget.LEFT_EXTINCTION:
        return SolutionField(g, "escape-probability-left", p, 1.0, 0.0, 1.0, 0.0, residual)
    return SolutionField(g, "escape-probability-right", p, 0.0, 1.0, 0.0, 1.0, residual)


@dataclass(frozen=True)
class OrderEstimate:
    """Richardson order estimate; degenerate when differences underflow."""

    value: float | None
    degenerate: bool = False

    def __str__(self) -> str:
        return "converged below measurement" if self.degenerate else f"{self.value:.3f}"


def observed_order(coarse: SolutionField, mid: SolutionField, fine: SolutionField,
                   probe: float) -> OrderEstimate:
    """log2 ratio of successive differences at a probe shared by all grids.

    Requires steps h, h/2, h/4 of the same problem; the probe must sit on a
    node of the coarse grid (hence of all three).
    """
    hc, hm, hf = coarse.grid.h, mid.grid.h, fine.grid.h
    if abs(hm - hc / 2) > 1e-12 * hc or abs(hf - hc / 4) > 1e-12 * hc:
        raise ValueError(f"grids must halve: h = {hc}, {hm}, {hf}")
    jp = round(probe / hc)
    if abs(probe / hc - jp) > 1e-9:
        raise ValueError(f"probe {probe} is not a node of the coarse grid (h={hc})")
    uc, um, uf = (fld.value_at(probe) for fld in (coarse, mid, fine))
    d1 = abs(uc - um)
    d2 = abs(um - uf)
    tiny = 64.0 * np.finfo(float).eps * max(1.0, abs(uf))
    if d1 <= tiny or d2 <= tiny:
        return OrderEstimate(None, degenerate=True)
    return OrderEstimate(math.log2(d1 / d2))


def dump_system(s: DenseSystem, path) -> None:
    """Write the system as text for debugging: one row per line, matrix
    entries then the rhs value, 17 significant digits.  Format is a
    diagnostic aid, not a stable interface."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# dense system n={s.matrix.shape[0]} grid=({s.grid.c},{s.grid.d},{s.grid.h})\n")
        for row, b in zip(s.matrix, s.rhs):
            fh.write(" ".join(f"{v:.16e}" for v in row))
            fh.write(f" {b:.16e}\n")
