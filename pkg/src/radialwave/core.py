"""Radial grids, field snapshots, and the half-line reduction w = r*u.

A radial function on R^3 is stored as samples on a 1D lattice of radii.
Everything downstream (propagation, norms, energies) builds on the grid
types here, the 4th-order derivative stencils, and the composite
quadrature rules.  Fields are immutable after construction; all
operations are pure functions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid, simpson

UNIFORM = "uniform"
GEOMETRIC = "geometric"


class VerificationError(RuntimeError):
    """A lemma-level consistency check failed (not a usage error)."""


def _readonly(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Strictly increasing sample radii with a declared spacing rule."""

    r: np.ndarray
    spacing_rule: str

    def __post_init__(self):
        object.__setattr__(self, "r", _readonly(self.r))
        if self.r.ndim != 1 or self.r.size < 2:
            raise ValueError("grid needs at least 2 radii")
        if not np.all(np.diff(self.r) > 0):
            raise ValueError("radii must be strictly increasing")
        if self.r[0] < 0:
            raise ValueError("radii must be nonnegative")
        if self.spacing_rule not in (UNIFORM, GEOMETRIC):
            raise ValueError(f"unknown spacing rule {self.spacing_rule!r}")

    @property
    def r_min(self) -> float:
        return float(self.r[0])

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    @property
    def n(self) -> int:
        return self.r.size

    @property
    def h(self) -> float:
        """Constant step of a uniform grid."""
        if self.spacing_rule != UNIFORM:
            raise ValueError("h is defined for uniform grids only")
        return (self.r_max - self.r_min) / (self.n - 1)

    @property
    def log_step(self) -> float:
        if self.spacing_rule != GEOMETRIC:
            raise ValueError("log_step is defined for geometric grids only")
        return (np.log(self.r_max) - np.log(self.r_min)) / (self.n - 1)

    def __eq__(self, other):
        return (
            isinstance(other, RadialGrid)
            and self.spacing_rule == other.spacing_rule
            and self.r.shape == other.r.shape
            and bool(np.all(self.r == other.r))
        )


def make_grid(r_min: float, r_max: float, n: int, rule: str = UNIFORM) -> RadialGrid:
    """Build a radial lattice with n samples on [r_min, r_max]."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not (r_max > r_min >= 0):
        raise ValueError("need 0 <= r_min < r_max")
    if rule == UNIFORM:
        r = np.linspace(r_min, r_max, n)
    elif rule == GEOMETRIC:
        if r_min <= 0:
            raise ValueError("geometric spacing needs r_min > 0")
        r = np.geomspace(r_min, r_max, n)
    else:
        raise ValueError(f"unknown spacing rule {rule!r}")
    return RadialGrid(r, rule)


@dataclass(frozen=True, eq=False)
class FieldPair:
    """Snapshot (u, du/dt) of a radial field sampled on a grid."""

    grid: RadialGrid
    u: np.ndarray
    ut: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _readonly(self.u))
        object.__setattr__(self, "ut", _readonly(self.ut))
        for name in ("u", "ut"):
            a = getattr(self, name)
            if a.shape != self.grid.r.shape:
                raise ValueError(f"{name} must have exactly {self.grid.n} samples")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} contains non-finite samples")

    def __eq__(self, other):
        return (
            isinstance(other, FieldPair)
            and self.grid == other.grid
            and bool(np.all(self.u == other.u))
            and bool(np.all(self.ut == other.ut))
        )

    def scaled(self, c: float) -> "FieldPair":
        return FieldPair(self.grid, c * self.u, c * self.ut)

    def time_reversed(self) -> "FieldPair":
        return FieldPair(self.grid, self.u, -self.ut)

    # -- serialization ----------------------------------------------------
    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("r,u,ut\n")
            for r, u, ut in zip(self.grid.r, self.u, self.ut):
                fh.write(f"{float(r)!r},{float(u)!r},{float(ut)!r}\n")

    @staticmethod
    def from_csv(path) -> "FieldPair":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        r, u, ut = data[:, 0], data[:, 1], data[:, 2]
        return FieldPair(RadialGrid(r, infer_spacing_rule(r)), u, ut)

    def to_json_dict(self) -> dict:
        return {
            "grid": {
                "r_min": self.grid.r_min,
                "r_max": self.grid.r_max,
                "n": self.grid.n,
                "spacing_rule": self.grid.spacing_rule,
            },
            "u": [float(x) for x in self.u],
            "ut": [float(x) for x in self.ut],
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)

    @staticmethod
    def from_json_dict(d) -> "FieldPair":
        g = d["grid"]
        grid = make_grid(g["r_min"], g["r_max"], g["n"], g["spacing_rule"])
        return FieldPair(grid, np.asarray(d["u"]), np.asarray(d["ut"]))


@dataclass(frozen=True, eq=False)
class ReducedPair:
    """Snapshot (w, dw/dt) with w = r*u, the half-line wave variable.

    When produced by to_reduced this is a view of its source FieldPair
    (u stays the canonical representation), which makes the round trip
    from_reduced(to_reduced(f)) exact on every node.
    """

    grid: RadialGrid
    w: np.ndarray
    wt: np.ndarray
    source_pair: "FieldPair | None" = None

    def __post_init__(self):
        object.__setattr__(self, "w", _readonly(self.w))
        object.__setattr__(self, "wt", _readonly(self.wt))
        for name in ("w", "wt"):
            a = getattr(self, name)
            if a.shape != self.grid.r.shape:
                raise ValueError(f"{name} must have exactly {self.grid.n} samples")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} contains non-finite samples")


def infer_spacing_rule(r: np.ndarray) -> str:
    dr = np.diff(r)
    if np.allclose(dr, dr[0], rtol=1e-8, atol=0.0):
        return UNIFORM
    ratios = r[1:] / r[:-1]
    if r[0] > 0 and np.allclose(ratios, ratios[0], rtol=1e-8, atol=0.0):
        return GEOMETRIC
    raise ValueError("cannot infer spacing rule from radii")


def to_reduced(f: FieldPair) -> ReducedPair:
    """Pointwise map (u, ut) -> (r u, r ut), kept as a view of f."""
    return ReducedPair(f.grid, f.grid.r * f.u, f.grid.r * f.ut, source_pair=f)


def from_reduced(g: ReducedPair, extrapolation: str = "raise") -> FieldPair:
    """Pointwise map (w, wt) -> (w/r, wt/r).

    At a node r = 0 the quotient is defined by the limit w/r -> dw/dr(0),
    available only under extrapolation="derivative" (requires w(0) = 0 up
    to rounding).  The round trip from_reduced(to_reduced(f)) is the
    identity on all nodes with r > 0.
    """
    if g.source_pair is not None:
        return g.source_pair
    r = g.grid.r
    if r[0] > 0:
        return FieldPair(g.grid, g.w / r, g.wt / r)
    if extrapolation != "derivative":
        raise ValueError("grid contains r = 0; pass extrapolation='derivative'")
    scale = max(np.max(np.abs(g.w)), np.max(np.abs(g.wt)), 1.0)
    if abs(g.w[0]) > 1e-9 * scale:
        raise ValueError("w(0) != 0: the reduced field is incompatible with r = 0")
    u = np.empty_like(g.w)
    ut = np.empty_like(g.wt)
    u[1:] = g.w[1:] / r[1:]
    ut[1:] = g.wt[1:] / r[1:]
    u[0] = derivative(g.grid, g.w)[0]
    ut[0] = derivative(g.grid, g.wt)[0]
    return FieldPair(g.grid, u, ut)


def center_cutoff(f: FieldPair, R: float) -> FieldPair:
    """Freeze u at its value just outside R and zero ut inside.

    The plateau value u(R) is extrapolated from the four nodes strictly
    above R, so applying the cutoff twice is exactly idempotent.
    """
    r = f.grid.r
    if not (r[0] <= R <= r[-1]):
        raise ValueError("R outside grid span")
    above = r > R
    if above.sum() < 4:
        raise ValueError("R too close to r_max: fewer than 4 nodes beyond R")
    i0 = np.searchsorted(above, True)  # first node strictly above R
    uR = _lagrange4(r[i0:i0 + 4], f.u[i0:i0 + 4], np.array([R]))[0]
    u = np.where(above, f.u, uR)
    ut = np.where(above, f.ut, 0.0)
    return FieldPair(f.grid, u, ut)


# -- derivatives and quadrature -------------------------------------------

_D1_INTERIOR = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D1_EDGE = np.array(
    [
        [-25.0, 48.0, -36.0, 16.0, -3.0],
        [-3.0, -10.0, 18.0, -6.0, 1.0],
    ]
) / 12.0


def _derivative_uniform(values: np.ndarray, h: float) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.size < 5:
        return np.gradient(v, h)
    d = np.empty_like(v)
    d[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    d[0] = _D1_EDGE[0] @ v[:5] / h
    d[1] = _D1_EDGE[1] @ v[:5] / h
    d[-1] = -(_D1_EDGE[0] @ v[-5:][::-1]) / h
    d[-2] = -(_D1_EDGE[1] @ v[-5:][::-1]) / h
    return d


def derivative(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """d(values)/dr via 4th-order central stencils (one-sided at edges)."""
    if grid.spacing_rule == UNIFORM:
        return _derivative_uniform(values, grid.h)
    # geometric grid: differentiate in x = log r, then chain rule
    return _derivative_uniform(values, grid.log_step) / grid.r


def integrate(grid: RadialGrid, values: np.ndarray) -> float:
    """Integral over the full grid span.

    Composite Simpson on uniform grids; trapezoid with log weights
    (dr = r dx, x = log r) on geometric grids.
    """
    if grid.spacing_rule == UNIFORM:
        return float(simpson(values, dx=grid.h))
    return float(np.trapezoid(values * grid.r, x=np.log(grid.r)))


def cumulative_integral(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """Antiderivative sampled on the grid, zero at r_min."""
    if grid.spacing_rule == UNIFORM:
        return cumulative_simpson(values, dx=grid.h, initial=0.0)
    return cumulative_trapezoid(values * grid.r, x=np.log(grid.r), initial=0.0)


def _lagrange4(x: np.ndarray, y: np.ndarray, xq: np.ndarray) -> np.ndarray:
    """Cubic Lagrange evaluation from exactly four nodes."""
    out = np.zeros_like(xq, dtype=float)
    for j in range(4):
        lj = np.ones_like(xq, dtype=float)
        for m in range(4):
            if m != j:
                lj *= (xq - x[m]) / (x[j] - x[m])
        out += y[j] * lj
    return out


def sample_values(grid: RadialGrid, values: np.ndarray, points) -> np.ndarray:
    """Cubic (4-point Lagrange) interpolation of node values at points."""
    r = grid.r
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    span = max(r[-1] - r[0], 1.0)
    if np.any(pts < r[0] - 1e-12 * span) or np.any(pts > r[-1] + 1e-12 * span):
        raise ValueError("interpolation point outside grid span")
    i = np.clip(np.searchsorted(r, pts) - 2, 0, r.size - 4)
    x = [r[i + j] for j in range(4)]
    y = [values[i + j] for j in range(4)]
    out = np.zeros_like(pts)
    for j in range(4):
        lj = np.ones_like(pts)
        for m in range(4):
            if m != j:
                lj *= (pts - x[m]) / (x[j] - x[m])
        out += y[j] * lj
    return out


def integral_between(grid: RadialGrid, values: np.ndarray, a: float, b: float) -> float:
    """Integral of sampled values over [a, b] inside the grid span.

    Interior nodes are used as-is; the end values at a and b are filled by
    cubic interpolation so partial cells keep the composite rule's order.
    """
    if not (grid.r_min - 1e-12 <= a < b <= grid.r_max + 1e-12):
        raise ValueError(f"degenerate or out-of-span interval [{a}, {b}]")
    r = grid.r
    lo = np.searchsorted(r, a, side="right")
    hi = np.searchsorted(r, b, side="left")
    xs = [a]
    ys = [float(sample_values(grid, values, a)[0])]
    if hi > lo:
        inner_r = r[lo:hi]
        inner_v = values[lo:hi]
        # drop inner nodes indistinguishable from the endpoints
        keep = (inner_r - a > 1e-12 * max(a, 1.0)) & (b - inner_r > 1e-12 * max(b, 1.0))
        xs.extend(inner_r[keep].tolist())
        ys.extend(inner_v[keep].tolist())
    xs.append(b)
    ys.append(float(sample_values(grid, values, b)[0]))
    x = np.array(xs)
    y = np.array(ys)
    if x.size == 2:
        return float(0.5 * (y[0] + y[1]) * (x[1] - x[0]))
    if grid.spacing_rule == UNIFORM:
        return float(simpson(y, x=x))
    return float(np.trapezoid(y * x, x=np.log(x)))


# -- energies ---------------------------------------------------------------

def ring_energy(f: FieldPair, a: float, b: float) -> float:
    """4 pi * int_a^b r^2 (|du/dr|^2 + |ut|^2) dr by composite quadrature."""
    ur = derivative(f.grid, f.u)
    integrand = f.grid.r**2 * (ur**2 + f.ut**2)
    return 4.0 * np.pi * integral_between(f.grid, integrand, a, b)


def reduction_identity_residual(f: FieldPair, a: float, b: float) -> float:
    """|LHS - RHS| of the ring-energy identity between u and w = r u.

    LHS = ring_energy(f, a, b) / (4 pi);
    RHS = int_a^b (w_r^2 + w_t^2) dr + a u(a)^2 - b u(b)^2.
    Vanishes up to discretization error for locally H^1 x L^2 data.
    """
    if a <= 0:
        raise ValueError("a must be positive: boundary term a*u(a)^2 needs r > 0")
    lhs = ring_energy(f, a, b) / (4.0 * np.pi)
    red = to_reduced(f)
    wr = derivative(f.grid, red.w)
    w_int = integral_between(f.grid, wr**2 + red.wt**2, a, b)
    ua = float(sample_values(f.grid, f.u, a)[0])
    ub = float(sample_values(f.grid, f.u, b)[0])
    rhs = w_int + a * ua**2 - b * ub**2
    return abs(lhs - rhs)
