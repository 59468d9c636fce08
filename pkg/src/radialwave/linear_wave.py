"""Exact linear propagation of radial waves via d'Alembert on w = r u.

The radial 3D wave equation turns into the flat half-line equation for
w(r,t) = r u(r,t) with the Dirichlet condition w(0,t) = 0, realized by the
odd extension of the data to r < 0.  Propagation is then exact transport
of characteristics; on a uniform grid with whole-step shifts it reduces to
index arithmetic with no interpolation error at all.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .core import (
    UNIFORM,
    FieldPair,
    RadialGrid,
    ReducedPair,
    VerificationError,
    cumulative_integral,
    derivative,
    from_reduced,
    integral_between,
    ring_energy,
    sample_values,
    to_reduced,
)


class TruncationWarning(RuntimeWarning):
    """Support reached r_max within the requested time: information left."""


@dataclass(frozen=True)
class LinearState:
    pair: ReducedPair
    t: float


@dataclass(frozen=True)
class CharacteristicFields:
    """z1 = wt - wr (outgoing), z2 = wt + wr (ingoing)."""

    z1: np.ndarray
    z2: np.ndarray


def characteristic_fields(red: ReducedPair) -> CharacteristicFields:
    wr = derivative(red.grid, red.w)
    return CharacteristicFields(red.wt - wr, red.wt + wr)


def _check_grid(grid: RadialGrid):
    if grid.spacing_rule != UNIFORM or grid.r_min != 0.0:
        raise ValueError("free propagation needs a uniform grid starting at r = 0")


def _flag_truncation(grid, w0, w1, t):
    scale = max(np.max(np.abs(w0)), np.max(np.abs(w1)), 1e-300)
    guard = grid.r >= grid.r_max - abs(t)
    if np.any(np.abs(w0[guard]) > 1e-12 * scale) or np.any(
        np.abs(w1[guard]) > 1e-12 * scale
    ):
        warnings.warn(
            f"data support reaches r_max within |t|={abs(t)}: propagated field "
            "is truncated",
            TruncationWarning,
        )


def _odd_eval(grid, values, xi):
    """Odd extension of node values at arbitrary xi, zero beyond r_max."""
    out = np.zeros_like(xi)
    a = np.abs(xi)
    inside = a <= grid.r_max
    out[inside] = np.sign(xi[inside]) * sample_values(grid, values, a[inside])
    return out


def _even_eval(grid, values, xi, beyond=0.0):
    out = np.full_like(xi, beyond, dtype=float)
    a = np.abs(xi)
    inside = a <= grid.r_max
    out[inside] = sample_values(grid, values, a[inside])
    return out


def _shift_odd(values, k):
    """values on nodes i -> odd-extended values at nodes i + k (k integer)."""
    n = values.size
    idx = np.arange(n) + k
    out = np.zeros(n)
    direct = (idx >= 0) & (idx < n)
    out[direct] = values[idx[direct]]
    refl = (idx < 0) & (idx > -n)
    out[refl] = -values[-idx[refl]]
    return out


def _shift_even(values, k, beyond):
    n = values.size
    idx = np.abs(np.arange(n) + k)
    out = np.full(n, beyond)
    inside = idx < n
    out[inside] = values[idx[inside]]
    return out


def free_propagate_reduced(f: FieldPair, t: float) -> LinearState:
    """Solve the half-line wave equation exactly from the data in f."""
    _check_grid(f.grid)
    grid = f.grid
    red = to_reduced(f)
    w0 = np.asarray(red.w)
    w1 = np.asarray(red.wt)
    _flag_truncation(grid, w0, w1, t)
    w0p = derivative(grid, w0)
    W1 = cumulative_integral(grid, w1)  # even extension; ~const past support

    k_float = t / grid.h
    k = int(round(k_float))
    if abs(k_float - k) < 1e-9:
        wp = _shift_odd(w0, k)
        wm = _shift_odd(w0, -k)
        dp = _shift_even(w0p, k, 0.0)
        dm = _shift_even(w0p, -k, 0.0)
        vp = _shift_odd(w1, k)
        vm = _shift_odd(w1, -k)
        Ip = _shift_even(W1, k, W1[-1])
        Im = _shift_even(W1, -k, W1[-1])
    else:
        xp = grid.r + t
        xm = grid.r - t
        wp = _odd_eval(grid, w0, xp)
        wm = _odd_eval(grid, w0, xm)
        dp = _even_eval(grid, w0p, xp)
        dm = _even_eval(grid, w0p, xm)
        vp = _odd_eval(grid, w1, xp)
        vm = _odd_eval(grid, w1, xm)
        Ip = _even_eval(grid, W1, xp, beyond=float(W1[-1]))
        Im = _even_eval(grid, W1, xm, beyond=float(W1[-1]))

    w = 0.5 * (wp + wm) + 0.5 * (Ip - Im)
    wt = 0.5 * (dp - dm) + 0.5 * (vp + vm)
    w[0] = 0.0  # exact Dirichlet value at r = 0
    return LinearState(ReducedPair(grid, w, wt), t)


def free_propagate(f: FieldPair, t: float) -> FieldPair:
    """Exact linear evolution; returns the field in u-representation."""
    state = free_propagate_reduced(f, t)
    return from_reduced(state.pair, extrapolation="derivative")


def one_d_energy(red: ReducedPair, a: float | None = None, b: float | None = None) -> float:
    """int (w_r^2 + w_t^2) dr over [a, b] (full span by default)."""
    wr = derivative(red.grid, red.w)
    integrand = wr**2 + red.wt**2
    if a is None:
        a = red.grid.r_min
    if b is None:
        b = red.grid.r_max
    return integral_between(red.grid, integrand, a, b)


# -- Duhamel ------------------------------------------------------------------

def duhamel_integrate(grid: RadialGrid, times, h_values, t0: float, t1: float) -> FieldPair:
    """Inhomogeneous contribution at time t1 of the reduced source h = r F.

    Integrates the half-line propagator over the backward light triangle,
    0.5 * int_{t0}^{t1} int_{r-(t1-tau)}^{r+(t1-tau)} h~(xi, tau) dxi dtau,
    with the midpoint rule (order 2) on the supplied time lattice.
    """
    _check_grid(grid)
    times = np.asarray(times, dtype=float)
    H = np.asarray(h_values, dtype=float)
    if H.shape != (times.size, grid.n):
        raise ValueError("h_values must be (len(times), grid.n)")
    i0 = int(np.argmin(np.abs(times - t0)))
    i1 = int(np.argmin(np.abs(times - t1)))
    if abs(times[i0] - t0) > 1e-9 or abs(times[i1] - t1) > 1e-9 or i1 <= i0:
        raise ValueError("t0 and t1 must lie on the time lattice with t0 < t1")
    if np.max(np.diff(times[i0:i1 + 1])) > grid.h * (1 + 1e-9):
        warnings.warn(
            "time lattice coarser than the grid spacing: midpoint rule is "
            "under-resolved for unit-speed transport",
            RuntimeWarning,
        )
    w = np.zeros(grid.n)
    wt = np.zeros(grid.n)
    for k in range(i0, i1):
        dt = times[k + 1] - times[k]
        tau_mid = 0.5 * (times[k] + times[k + 1])
        h_mid = 0.5 * (H[k] + H[k + 1])
        Hcum = cumulative_integral(grid, h_mid)  # even extension of int_0^xi
        s = t1 - tau_mid
        xp = grid.r + s
        xm = grid.r - s
        w += dt * 0.5 * (
            _even_eval(grid, Hcum, xp, beyond=float(Hcum[-1]))
            - _even_eval(grid, Hcum, xm, beyond=float(Hcum[-1]))
        )
        wt += dt * 0.5 * (_odd_eval(grid, h_mid, xp) + _odd_eval(grid, h_mid, xm))
    w[0] = 0.0
    return from_reduced(ReducedPair(grid, w, wt), extrapolation="derivative")


# -- channel of energy --------------------------------------------------------

def exterior_energy(f: FieldPair, t: float, R: float) -> float:
    """Energy of the free evolution outside the light cone |x| > R + |t|."""
    if R + abs(t) >= f.grid.r_max:
        raise ValueError("R + |t| must stay inside the grid")
    out = free_propagate(f, t)
    return ring_energy(out, R + abs(t), f.grid.r_max)


@dataclass(frozen=True)
class ChannelReport:
    R: float
    direction: str  # "plus" | "minus" | "both"
    rhs: float
    margins: tuple  # entries (t, lhs_plus, lhs_minus)

    @property
    def worst_margin(self) -> float:
        if self.direction in ("plus", "both"):
            return min(lp - self.rhs for _, lp, _ in self.margins)
        return min(lm - self.rhs for _, _, lm in self.margins)

    def to_json_dict(self):
        use_plus = self.direction in ("plus", "both")
        return {
            "R": self.R,
            "direction": self.direction,
            "margins": [
                {"t": t, "lhs": lp if use_plus else lm, "rhs": self.rhs}
                for t, lp, lm in self.margins
            ],
        }


def channel_check(f: FieldPair, R: float, times, tol: float = 1e-8) -> ChannelReport:
    """Verify the exterior-energy channel bound in at least one direction.

    LHS(t) = energy of the free wave outside |x| > R + |t|;
    RHS    = 2 pi int_R^rmax (w_r(0)^2 + w_t(0)^2) dr.
    The bound LHS >= RHS must hold for all +t or for all -t.
    """
    red = to_reduced(f)
    rhs = 2.0 * np.pi * one_d_energy(red, R, f.grid.r_max)
    margins = []
    plus_ok = True
    minus_ok = True
    for t in times:
        if t <= 0:
            raise ValueError("times must be positive")
        lhs_p = exterior_energy(f, t, R)
        lhs_m = exterior_energy(f, -t, R)
        plus_ok &= lhs_p >= rhs - tol
        minus_ok &= lhs_m >= rhs - tol
        margins.append((float(t), float(lhs_p), float(lhs_m)))
    if plus_ok and minus_ok:
        direction = "both"
    elif plus_ok:
        direction = "plus"
    elif minus_ok:
        direction = "minus"
    else:
        raise VerificationError(
            f"channel bound fails in both directions at R={R}: "
            f"worst plus {min(lp - rhs for _, lp, _ in margins):.3e}, "
            f"worst minus {min(lm - rhs for _, _, lm in margins):.3e}"
        )
    return ChannelReport(float(R), direction, float(rhs), tuple(margins))


def channel_report_json(reports, path):
    with open(path, "w") as fh:
        json.dump([r.to_json_dict() for r in reports], fh, sort_keys=True)


# -- transport of characteristic windows ---------------------------------------

@dataclass(frozen=True, eq=False)
class ReducedTrajectory:
    """Time-ordered reduced snapshots w(:, k), wt(:, k) at times[k]."""

    grid: RadialGrid
    times: np.ndarray
    w: np.ndarray
    wt: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        if self.w.shape != (times.size, self.grid.n) or self.wt.shape != self.w.shape:
            raise ValueError("w, wt must be (len(times), grid.n)")
        object.__setattr__(self, "times", times)

    def snapshot(self, t: float) -> ReducedPair:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9:
            raise ValueError(f"no snapshot at t={t}")
        return ReducedPair(self.grid, self.w[k], self.wt[k])


def make_free_reduced_trajectory(f: FieldPair, times) -> ReducedTrajectory:
    times = np.asarray(times, dtype=float)
    w = np.empty((times.size, f.grid.n))
    wt = np.empty_like(w)
    for k, t in enumerate(times):
        st = free_propagate_reduced(f, t)
        w[k] = st.pair.w
        wt[k] = st.pair.wt
    return ReducedTrajectory(f.grid, times, w, wt)


def _window_norm(grid, z, a, b):
    return float(np.sqrt(integral_between(grid, z**2, a, b)))


def transport_residual(w_traj: ReducedTrajectory, h, r0: float, t0: float,
                       M: float, which: str = "z1") -> float:
    """Transport bound for the characteristic windows; <= 0 up to tolerance.

    For z1: | ||z1(., t0+M)||_{L2(r0+M, 4r0+M)} - ||z1(., t0)||_{L2(r0, 4r0)} |
    is bounded by ( int_{r0}^{4r0} ( int_0^M h(r+t, t0+t) dt )^2 dr )^{1/2};
    the z2 variant runs backward in time with source h(r+t, t0-t).
    Returns the difference of the left side and the bound; h = None means a
    free wave, where the two window norms must agree exactly.
    """
    if which not in ("z1", "z2"):
        raise ValueError("which must be 'z1' or 'z2'")
    sgn = 1.0 if which == "z1" else -1.0
    snap0 = w_traj.snapshot(t0)
    snap1 = w_traj.snapshot(t0 + sgn * M)
    cf0 = characteristic_fields(snap0)
    cf1 = characteristic_fields(snap1)
    z0 = cf0.z1 if which == "z1" else cf0.z2
    z1v = cf1.z1 if which == "z1" else cf1.z2
    if 4 * r0 + M > w_traj.grid.r_max:
        raise ValueError("window [r0 + M, 4 r0 + M] leaves the grid")
    n0 = _window_norm(w_traj.grid, z0, r0, 4 * r0)
    n1 = _window_norm(w_traj.grid, z1v, r0 + M, 4 * r0 + M)
    bound = 0.0
    if h is not None:
        r_fine = np.linspace(r0, 4 * r0, 1025)
        t_fine = np.linspace(0.0, M, 257)
        rr, tt = np.meshgrid(r_fine, t_fine, indexing="ij")
        inner = simpson(h(rr + tt, t0 + sgn * tt), x=t_fine, axis=1)
        bound = float(np.sqrt(simpson(inner**2, x=r_fine)))
    return abs(n1 - n0) - bound


# -- strong Huygens -------------------------------------------------------------

def support_annulus(red: ReducedPair, threshold: float = 1e-10):
    """Smallest annulus containing all samples with |w| or |wt| above threshold."""
    mask = (np.abs(red.w) > threshold) | (np.abs(red.wt) > threshold)
    if not np.any(mask):
        return None
    idx = np.nonzero(mask)[0]
    return float(red.grid.r[idx[0]]), float(red.grid.r[idx[-1]])


def huygens_support(f: FieldPair, t: float, in_threshold: float = 1e-12,
                    out_threshold: float = 1e-10):
    """Measured support annulus of the free wave at time t.

    Requires compactly supported data (certified below in_threshold near
    r_max); for t > b the result must sit inside [t - b, t + b].
    """
    red = to_reduced(f)
    sup = support_annulus(red, in_threshold)
    if sup is None:
        return None
    a, b = sup
    if b >= f.grid.r_max * (1 - 1e-9):
        raise ValueError("input not compactly supported inside the grid")
    state = free_propagate_reduced(f, t)
    return support_annulus(state.pair, out_threshold)
