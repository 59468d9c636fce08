"""Radial 3D Fourier analysis on sampled fields.

For radial f the 3D transform collapses to the sine kernel

    fhat(rho) = (4 pi / rho) * int_0^inf r f(r) sin(rho r) dr,

with the convention fhat(xi) = int f(x) exp(-i xi.x) dx, so norms carry
the factor (2 pi)^-3.  Homogeneous Sobolev norms, smooth frequency
projections P_{<A}/P_{>A}, the radial pointwise weight, and the glue
construction all live on this transform.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .core import GEOMETRIC, UNIFORM, FieldPair, RadialGrid

S_RANGE = (-1.0, 1.5)


class DivergentNormError(ValueError):
    """The norm integral shows non-convergent partial sums."""


@dataclass(frozen=True)
class SobolevIndex:
    """Regularity exponent s, constrained to [-1, 3/2)."""

    s: float

    def __post_init__(self):
        if not (S_RANGE[0] <= self.s < S_RANGE[1]):
            raise ValueError(f"s={self.s} outside [{S_RANGE[0]}, {S_RANGE[1]})")


def _s_value(s) -> float:
    s = float(getattr(s, "s", s))
    SobolevIndex(s)
    return s


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Samples of the 3D transform of a radial function at |xi| = rho > 0."""

    rho: np.ndarray
    fhat: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        fhat = np.asarray(self.fhat, dtype=float)
        if rho.ndim != 1 or rho.shape != fhat.shape:
            raise ValueError("rho and fhat must be 1D arrays of equal length")
        if not np.all(np.diff(rho) > 0) or rho[0] <= 0:
            raise ValueError("rho must be strictly increasing and positive")
        if not np.all(np.isfinite(fhat)):
            raise ValueError("fhat contains non-finite samples")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "fhat", fhat)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("rho,fhat\n")
            for x, y in zip(self.rho, self.fhat):
                fh.write(f"{float(x)!r},{float(y)!r}\n")


@dataclass(frozen=True)
class NormReport:
    norm_kind: str
    s: float
    value: float
    est_error: float

    def to_json_dict(self):
        return {
            "norm_kind": self.norm_kind,
            "s": self.s,
            "value": self.value,
            "est_error": self.est_error,
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)


# -- transform --------------------------------------------------------------

def _quad_weights(grid: RadialGrid) -> np.ndarray:
    """Weights w_i with int g dr ~= sum w_i g(r_i) matching core.integrate."""
    n = grid.n
    if grid.spacing_rule == UNIFORM:
        h = grid.h
        if n % 2 == 1:
            w = np.ones(n)
            w[1:-1:2] = 4.0
            w[2:-1:2] = 2.0
            return w * (h / 3.0)
        # even count: Simpson on the first n-1 nodes plus trapezoid correction
        w = np.ones(n - 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w = np.concatenate([w * (h / 3.0), [0.0]])
        w[-2] += 0.5 * h
        w[-1] += 0.5 * h
        return w
    x = np.log(grid.r)
    dx = np.diff(x)
    w = np.zeros(n)
    w[:-1] += 0.5 * dx
    w[1:] += 0.5 * dx
    return w * grid.r


def _sine_quadrature(r, weighted, rho, chunk=512):
    """sum_i weighted_i sin(rho r_i) for each rho, in memory-bounded chunks."""
    out = np.empty(rho.size)
    for k in range(0, rho.size, chunk):
        block = rho[k:k + chunk]
        out[k:k + chunk] = np.sin(np.outer(block, r)) @ weighted
    return out


def radial_fourier(grid: RadialGrid, values, rho=None, *, n_rho: int = 4096,
                   rho_max: float | None = None) -> Spectrum:
    """Sine-kernel transform of a sampled radial function.

    The integral is truncated at the grid's r_max; callers get a warning
    when the last decade of samples still carries mass (non-decaying input).
    """
    f = np.asarray(values, dtype=float)
    if f.shape != grid.r.shape:
        raise ValueError("values must match the grid")
    rf = grid.r * f
    scale = np.max(np.abs(rf))
    if scale > 0:
        tail = np.abs(rf[int(0.9 * grid.n):])
        if np.mean(tail) > 1e-3 * scale:
            warnings.warn(
                "input carries tail mass at r_max; transform truncation is significant",
                RuntimeWarning,
            )
    if rho is None:
        hi = rho_max if rho_max is not None else _auto_band(grid, f)
        rho = np.linspace(hi / n_rho, hi, n_rho)
    else:
        rho = np.asarray(rho, dtype=float)
    weighted = _quad_weights(grid) * rf
    fhat = 4.0 * np.pi * _sine_quadrature(grid.r, weighted, rho) / rho
    return Spectrum(rho, fhat)


def inverse_radial_fourier(spec: Spectrum, grid: RadialGrid) -> np.ndarray:
    """Invert the sine-kernel transform onto grid radii.

    f(r) = (2 pi)^-3 (4 pi / r) int rho fhat(rho) sin(rho r) drho, with the
    r = 0 limit (2 pi)^-3 4 pi int rho^2 fhat drho.
    """
    rho = spec.rho
    n = rho.size
    if n % 2 == 1:
        w = np.ones(n)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w *= (rho[1] - rho[0]) / 3.0
    else:
        w = np.full(n, rho[1] - rho[0])
        w[0] *= 0.5
        w[-1] *= 0.5
    weighted = w * rho * spec.fhat
    r = grid.r
    out = np.empty(r.size)
    pos = r > 0
    out[pos] = _sine_quadrature(rho, weighted, r[pos]) / r[pos]
    if np.any(~pos):
        out[~pos] = np.sum(weighted * rho)
    return out * 4.0 * np.pi / (2.0 * np.pi) ** 3


def _auto_band(grid: RadialGrid, values) -> float:
    """Upper band edge: where the measured spectrum decays out or hits the
    quadrature error floor, capped at pi / min-spacing."""
    h_min = float(np.min(np.diff(grid.r)))
    rho_nyq = np.pi / h_min
    rho_lo = 0.5 * np.pi / grid.r_max
    probe = np.geomspace(rho_lo, rho_nyq, 257)
    rf = grid.r * np.asarray(values, dtype=float)
    weighted = _quad_weights(grid) * rf
    amp = np.abs(4.0 * np.pi * _sine_quadrature(grid.r, weighted, probe) / probe)
    # running max over a window so zeros of an oscillating spectrum do not
    # read as decay or as an error floor
    win = 9
    env = np.array([np.max(amp[max(0, i - win):i + win + 1]) for i in range(amp.size)])
    peak_idx = int(np.argmax(env))
    peak = env[peak_idx]
    if peak == 0.0:
        return rho_nyq
    tail = env[peak_idx:]
    # fully decayed: cut where the envelope falls below peak * 1e-13
    dead = np.nonzero(tail < peak * 1e-13)[0]
    if dead.size:
        return float(probe[peak_idx + dead[0]])
    # error floor: a clear minimum followed by sustained noise growth
    k = int(np.argmin(tail))
    if k + 1 < tail.size and tail[k] < peak * 1e-5 and np.median(tail[k:]) > 10 * tail[k]:
        return float(probe[peak_idx + k])
    return rho_nyq


# -- Sobolev norms ----------------------------------------------------------

def _field_norm_sq(grid: RadialGrid, values, s: float, *, n_rho: int,
                   rho_max, check_divergence: bool):
    """(||f||_{Hdot^s}^2, est_error_on_the_square)."""
    spec = radial_fourier(grid, values, n_rho=n_rho, rho_max=rho_max)
    rho = spec.rho
    integrand = rho ** (2 * s + 2) * spec.fhat**2
    total = simpson(integrand, x=rho)
    # [0, rho_min] patch with fhat frozen at its first sample
    patch = spec.fhat[0] ** 2 * rho[0] ** (2 * s + 3) / (2 * s + 3)
    total += patch
    # partial-sum convergence: the top octave must be a vanishing fraction
    top = rho >= rho[-1] / 2
    top_frac = simpson(integrand[top], x=rho[top]) / total if total > 0 else 0.0
    if check_divergence and total > 0 and top_frac > 0.05:
        raise DivergentNormError(
            f"partial sums not converged: top octave carries {top_frac:.1%} "
            f"of the integral at s={s}"
        )
    const = 4.0 * np.pi / (2.0 * np.pi) ** 3
    err = const * (abs(patch) + abs(top_frac) * total)
    return const * total, err


def sobolev_norm(f, s, *, grid: RadialGrid | None = None, n_rho: int = 4096,
                 rho_max: float | None = None, check_divergence: bool = True) -> float:
    """Homogeneous Sobolev norm.

    For a FieldPair returns (||u||_{Hdot^s}^2 + ||ut||_{Hdot^(s-1)}^2)^(1/2);
    for (grid, values) or values-with-grid-kwarg returns ||f||_{Hdot^s}.
    """
    s = _s_value(s)
    if isinstance(f, FieldPair):
        a2, _ = _field_norm_sq(f.grid, f.u, s, n_rho=n_rho, rho_max=rho_max,
                               check_divergence=check_divergence)
        b2, _ = _field_norm_sq(f.grid, f.ut, s - 1.0, n_rho=n_rho, rho_max=rho_max,
                               check_divergence=check_divergence)
        return float(np.sqrt(a2 + b2))
    if grid is None:
        grid, values = f
    else:
        values = f
    v2, _ = _field_norm_sq(grid, values, s, n_rho=n_rho, rho_max=rho_max,
                           check_divergence=check_divergence)
    return float(np.sqrt(v2))


def norm_report(grid: RadialGrid, values, s, **kw) -> NormReport:
    s = _s_value(s)
    v2, err2 = _field_norm_sq(grid, values, s, n_rho=kw.get("n_rho", 4096),
                              rho_max=kw.get("rho_max"),
                              check_divergence=kw.get("check_divergence", True))
    value = float(np.sqrt(v2))
    est = float(err2 / (2 * value)) if value > 0 else 0.0
    return NormReport("sobolev", s, value, est)


# -- smooth frequency cutoff -------------------------------------------------

def smooth_transition(t):
    """C-infinity-flat descent from 1 at t<=0 to 0 at t>=1: exp(1 - 1/(1-t^2))."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    out[t <= 0.0] = 1.0
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    out[mid] = np.exp(1.0 - 1.0 / (1.0 - tm**2))
    return out


def multiplier_below(rho, A: float):
    """m_{<A}: identically 1 for rho <= A/2, 0 for rho >= A, smooth between."""
    return smooth_transition((np.asarray(rho, dtype=float) - A / 2.0) / (A / 2.0))


def lp_project(grid: RadialGrid, values, A: float, side: str, *,
               n_rho: int = 4096, rho_max: float | None = None) -> np.ndarray:
    """Littlewood-Paley projection P_{<A} or P_{>A} of a sampled field.

    The high part is computed as f - P_{<A}f, so the two sides sum to the
    input exactly.
    """
    if A <= 0:
        raise ValueError("A must be positive")
    h_min = float(np.min(np.diff(grid.r)))
    if not (np.pi / grid.r_max <= A <= np.pi / h_min):
        raise ValueError(
            f"A={A} outside the resolvable band "
            f"[{np.pi / grid.r_max:.3g}, {np.pi / h_min:.3g}]"
        )
    if side not in ("below", "above"):
        raise ValueError("side must be 'below' or 'above'")
    hi = rho_max if rho_max is not None else max(_auto_band(grid, values), 1.5 * A)
    spec = radial_fourier(grid, values, n_rho=n_rho, rho_max=hi)
    low_spec = Spectrum(spec.rho, spec.fhat * multiplier_below(spec.rho, A))
    low = inverse_radial_fourier(low_spec, grid)
    if side == "below":
        return low
    return np.asarray(values, dtype=float) - low


# -- pointwise bound and glue -------------------------------------------------

def pointwise_bound_ratio(grid: RadialGrid, values, s) -> float:
    """sup_r r^(3/2-s) |f(r)| / ||f||_{Hdot^s}, finite for 1/2 < s < 3/2."""
    s = _s_value(s)
    if not (0.5 < s < 1.5):
        raise ValueError("the radial pointwise bound needs 1/2 < s < 3/2")
    norm = sobolev_norm((grid, np.asarray(values, dtype=float)), s)
    if norm == 0.0:
        raise ValueError("zero-norm input")
    weighted = grid.r ** (1.5 - s) * np.abs(values)
    return float(np.max(weighted) / norm)


def glue_fields(grid: RadialGrid, f1, f2, R: float) -> np.ndarray:
    """f1 inside B(0,R), f2 outside B(0,2R), smooth partition between."""
    if not (grid.r_min <= R and 2 * R <= grid.r_max):
        raise ValueError("need [R, 2R] inside the grid span")
    phi = smooth_transition((grid.r - R) / R)
    return phi * np.asarray(f1, dtype=float) + (1 - phi) * np.asarray(f2, dtype=float)


def glue_check(grid: RadialGrid, f1, f2, R: float, s):
    """Glue two fields across [R, 2R] and report the norm ratio
    ||glued|| / (||f1|| + ||f2||), which the glue bound keeps O(1)."""
    s = _s_value(s)
    if not (-1.0 <= s <= 1.0):
        raise ValueError("glue bound holds for -1 <= s <= 1")
    glued = glue_fields(grid, f1, f2, R)
    n1 = sobolev_norm((grid, np.asarray(f1, dtype=float)), s)
    n2 = sobolev_norm((grid, np.asarray(f2, dtype=float)), s)
    if n1 + n2 == 0.0:
        raise ValueError("both inputs have zero norm")
    ng = sobolev_norm((grid, glued), s)
    return glued, float(ng / (n1 + n2))
