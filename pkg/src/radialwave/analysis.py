"""Exponent calculators, space-time norms, and abstract decay machinery.

Everything scale-related is exact rational arithmetic when called with
ints or Fractions: the critical regularity s_p = 3/2 - 2/(p-1), the
admissibility conditions 1/q + 1/r <= 1/2 and 1/q + 3/r = 3/2 - s + rho,
the interpolation exponent kappa = 1 - 3/p, and the decay increments
sigma, sigma1 = kappa/6, sigma2 = min(sigma/3, sigma1, 3/5).

The recurrence-decay checker consumes a function sampled on a lattice of
log2(A) values: the thresholds where its half-constant inequality starts
to hold sit at astronomically large A for slowly decaying inputs, so all
comparisons are done in log2 space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import simpson

from .core import integrate as _spatial_integrate


def _exact(x):
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def critical_exponent(p):
    """s_p = 3/2 - 2/(p - 1); exact for int or Fraction input."""
    if _exact(p):
        return Fraction(3, 2) - Fraction(2) / (Fraction(p) - 1)
    return 1.5 - 2.0 / (p - 1.0)


# -- admissible pairs ---------------------------------------------------------

def _inv(q):
    if q in (math.inf, np.inf):
        return Fraction(0)
    return (Fraction(1) / Fraction(q)) if _exact(q) else 1.0 / q


def admissibility_check(q, r, s, rho=0):
    """Check the generalized dispersive-estimate conditions for (q, r).

    (q, r, s, rho) must satisfy 1/q + 1/r <= 1/2 and
    1/q + 3/r = 3/2 - s + rho; (q, r) is called m-admissible when
    (q, r, m, 0) passes.  Returns (ok, certificate).
    """
    exact = all(_exact(x) or x in (math.inf, np.inf) for x in (q, r, s, rho))
    iq = _inv(q) if exact else (0.0 if q in (math.inf, np.inf) else 1.0 / q)
    ir = _inv(r) if exact else 1.0 / r
    if exact:
        lhs_scaling = iq + 3 * ir
        rhs_scaling = Fraction(3, 2) - Fraction(s) + Fraction(rho)
        cond_scaling = lhs_scaling == rhs_scaling
        cond_wave = iq + ir <= Fraction(1, 2)
    else:
        lhs_scaling = iq + 3.0 * ir
        rhs_scaling = 1.5 - float(s) + float(rho)
        cond_scaling = abs(lhs_scaling - rhs_scaling) < 1e-12
        cond_wave = iq + ir <= 0.5 + 1e-12
    cert = {
        "inv_q_plus_inv_r": iq + ir,
        "scaling_lhs": lhs_scaling,
        "scaling_rhs": rhs_scaling,
        "wave_condition": bool(cond_wave),
        "scaling_condition": bool(cond_scaling),
    }
    return bool(cond_wave and cond_scaling), cert


def interpolation_kappa(p, s):
    """The interpolation weight kappa = 1 - 3/p and its s-admissible pair.

    1/q = (s + 1 - (2p - 2)(s - s_p)) / 6 and 1/r solves
    (2 - s)/(2p) = kappa (3 - 2s)/6 + (1 - kappa)/r.
    """
    sp_ = critical_exponent(p)
    exact = _exact(p) and _exact(s)
    if exact:
        p = Fraction(p)
        s = Fraction(s)
    if not (3 < p <= 5):
        raise ValueError("need 3 < p <= 5")
    if not (sp_ <= s < 1):
        raise ValueError("need s in [s_p, 1)")
    one = Fraction(1) if exact else 1.0
    kappa = one - 3 * one / p
    inv_q = (s + 1 - (2 * p - 2) * (s - sp_)) / 6
    inv_r = (2 - s) * one / 6 - (kappa / (1 - kappa)) * (3 - 2 * s) * one / 6
    q = 1 / inv_q
    r = 1 / inv_r
    ok, cert = admissibility_check(q, r, s, 0)
    if not ok:
        raise AssertionError(f"constructed pair failed admissibility: {cert}")
    return kappa, q, r


@dataclass(frozen=True)
class ExponentReport:
    p: object
    s_p: object
    kappa: object
    sigma: object
    sigma1: object
    sigma2: object
    s1: object
    admissible_pair: tuple

    def to_json_dict(self):
        def conv(x):
            if isinstance(x, Fraction):
                return {"exact": f"{x.numerator}/{x.denominator}", "value": float(x)}
            return float(x)

        return {
            "p": conv(self.p),
            "s_p": conv(self.s_p),
            "kappa": conv(self.kappa),
            "sigma": conv(self.sigma),
            "sigma1": conv(self.sigma1),
            "sigma2": conv(self.sigma2),
            "s1": conv(self.s1),
            "admissible_pair": [conv(self.admissible_pair[0]), conv(self.admissible_pair[1])],
        }


def regularity_constants(p) -> ExponentReport:
    """All p-dependent decay constants plus the first regularity step
    s1 = min(1, s_p + (99/100) sigma2)."""
    if not (3 < p < 5):
        raise ValueError("need 3 < p < 5")
    exact = _exact(p)
    if exact:
        p = Fraction(p)
        sp_ = critical_exponent(p)
        sigma = 3 * min(p - 3, Fraction(1)) / (2 * p)
        kappa = 1 - Fraction(3) / p
        sigma1 = kappa / 6
        sigma2 = min(sigma / 3, sigma1, Fraction(3, 5))
        s1 = min(Fraction(1), sp_ + Fraction(99, 100) * sigma2)
    else:
        sp_ = critical_exponent(p)
        sigma = 3 * min(p - 3, 1.0) / (2 * p)
        kappa = 1 - 3.0 / p
        sigma1 = kappa / 6
        sigma2 = min(sigma / 3, sigma1, 0.6)
        s1 = min(1.0, sp_ + 0.99 * sigma2)
    _, q, r = interpolation_kappa(p, sp_)
    return ExponentReport(p, sp_, kappa, sigma, sigma1, sigma2, s1, (q, r))


# -- the exponent ladder -------------------------------------------------------

def g_weight(beta):
    """g(beta) = ((3/2)^(1-beta) + (1/2)^(1-beta)) / 2; < 1 on (0, 1)."""
    b = np.asarray(beta, dtype=float)
    return 0.5 * (1.5 ** (1 - b) + 0.5 ** (1 - b))


@dataclass(frozen=True)
class LadderState:
    betas: np.ndarray
    gs: np.ndarray
    increments: np.ndarray
    reached: bool

    def to_json_dict(self):
        return {
            "n_steps": int(self.betas.size - 1),
            "beta_final": float(self.betas[-1]),
            "reached": self.reached,
        }

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("n,beta,g,increment\n")
            for n, (b, g, inc) in enumerate(zip(self.betas, self.gs, self.increments)):
                fh.write(f"{n},{float(b)!r},{float(g)!r},{float(inc)!r}\n")


def decay_ladder(p, beta0=None, target=1.0 - 1e-6, max_steps=10**5) -> LadderState:
    """Iterate beta -> beta + log2(2 / (1 + g(beta))) up to the target.

    Starting from beta0 = 2/(p-1) the increments are strictly positive and
    the sequence climbs to 1, the supremum of reachable decay weights.
    """
    lo = 2.0 / (float(p) - 1.0)
    if beta0 is None:
        beta0 = lo
    if not (lo - 1e-12 <= beta0 < 1.0):
        raise ValueError(f"beta0 must lie in [2/(p-1), 1) = [{lo}, 1)")
    betas = [float(beta0)]
    gs = []
    incs = []
    while len(betas) <= max_steps:
        b = betas[-1]
        g = float(g_weight(b))
        inc = math.log2(2.0 / (1.0 + g))
        gs.append(g)
        incs.append(inc)
        if b >= target:
            break
        betas.append(b + inc)
    reached = betas[-1] >= target
    return LadderState(np.array(betas), np.array(gs), np.array(incs), reached)


# -- recurrence decay checker --------------------------------------------------

def recurrence_decay_check(log2_A, S, alpha, beta, l, omega, c):
    """Run the decay-bootstrap induction on a sampled lattice.

    Premise: S(A) <= c (S(A^beta) S(A^alpha)^l + A^-omega) with
    l alpha + beta > 1 and S -> 0.  The machinery finds A0 where the
    half-constant variant (with l- = 0.99 l, omega- = 0.99 omega) holds and
    S < 1/2 beyond A0^alpha, seeds S(A) <= A^-omega1, propagates it over
    the blocks [A0^(1/beta)^n, A0^(1/beta)^(n+1)], and climbs the exponent
    ladder omega -> min(omega-, omega (beta + l- alpha)).  The verdict is
    whether the conclusion S(A) <= 2c A^-omega holds on the lattice; all
    A-coordinates are handled and reported as log2(A).
    """
    a = np.asarray(log2_A, dtype=float)
    S = np.asarray(S, dtype=float)
    if a.ndim != 1 or a.shape != S.shape or not np.all(np.diff(a) > 0):
        raise ValueError("need increasing log2_A lattice matching S")
    if np.any(S < 0):
        raise ValueError("S must be nonnegative")
    if not (0 < alpha < beta < 1):
        raise ValueError("need 0 < alpha < beta < 1")
    if not (l * alpha + beta > 1):
        raise ValueError("need l*alpha + beta > 1")
    with np.errstate(divide="ignore"):
        logS = np.where(S > 0, np.log2(np.maximum(S, 1e-320)), -np.inf)

    def logS_at(aq):
        # linear interpolation of log2 S; exact for power laws
        return np.interp(aq, a, logS)

    l_minus = 0.99 * l
    w_minus = 0.99 * omega
    log_c = math.log2(c)
    a_min = a[0]
    # domain where both rescaled arguments stay on the lattice
    dom = a * alpha >= a_min
    ai = a[dom]
    Si_log = logS[dom]
    term_top = logS_at(beta * ai) + l * logS_at(alpha * ai)
    prem_rhs = log_c + np.logaddexp2(term_top, -omega * ai)
    prem_ok = Si_log <= prem_rhs + 1e-9
    report = {
        "verdict": "inconclusive",
        "fitted_exponent": float("nan"),
        "log2_A0": None,
        "log2_witness": None,
        "omega1": None,
        "exponent_ladder": [],
        "constant": 2.0 * c,
    }
    # fitted exponent over the top half with S > 0
    top = (a >= 0.5 * a[-1]) & (S > 0)
    if np.count_nonzero(top) >= 4:
        slope = np.polyfit(a[top], logS[top], 1)[0]
        report["fitted_exponent"] = float(-slope)
    if not np.all(prem_ok):
        bad = ai[~prem_ok]
        # genuine violation: fails persistently at the large end
        if bad[-1] >= 0.75 * ai[-1]:
            report["verdict"] = "premise_violation"
            report["log2_witness"] = float(bad[-1])
            return report
    # search for A0: half-constant inequality beyond it, S < 1/2 from A0^alpha on
    half_rhs = np.logaddexp2(
        -1.0 + logS_at(beta * ai) + l_minus * logS_at(alpha * ai),
        -1.0 - w_minus * ai,
    )
    half_ok = Si_log <= half_rhs + 1e-9
    small = logS < -1.0 + 1e-12  # S < 1/2
    a0 = None
    # suffix scans: smallest lattice a0 making both conditions hold onwards
    half_suffix = np.flip(np.logical_and.accumulate(np.flip(half_ok)))
    for idx in range(ai.size):
        if not half_suffix[idx]:
            continue
        cand = ai[idx]
        if np.all(small[a >= alpha * cand]):
            a0 = float(cand)
            break
    if a0 is None:
        return report
    report["log2_A0"] = a0
    omega1 = min(w_minus, 1.0 / a0)
    report["omega1"] = omega1
    # seed + dyadic-in-exponent block propagation, verified on the lattice
    blocks = []
    lo = alpha * a0
    hi = a0
    while lo < a[-1]:
        sel = (a >= lo) & (a <= min(hi, a[-1]))
        if np.any(sel) and not np.all(logS[sel] <= -omega1 * a[sel] + 1e-9):
            return report
        blocks.append((lo, min(hi, a[-1])))
        lo, hi = hi, hi / beta
    # exponent ladder: omega_k+1 = min(omega-, omega_k (beta + l- alpha))
    ladder = [omega1]
    for _ in range(200):
        nxt = min(w_minus, ladder[-1] * (beta + l_minus * alpha))
        ladder.append(nxt)
        if nxt >= w_minus:
            break
    report["exponent_ladder"] = [float(x) for x in ladder]
    # final conclusion with the premise constant: S(A) <= 2c A^-omega beyond A0
    tail = a >= a0
    conclusion = np.all(logS[tail] <= 1.0 + log_c - omega * a[tail] + 1e-9)
    if conclusion:
        report["verdict"] = "confirmed"
    return report


# -- space-time norms ----------------------------------------------------------

@dataclass(frozen=True)
class NormKind:
    """One of the space-time norms: S, W, Z_s, Y_s, or a raw LqLr pair."""

    kind: str
    s: float | None = None
    q: float | None = None
    r: float | None = None

    def exponents(self, p=None):
        if self.kind == "S":
            if p is None:
                raise ValueError("S norm needs p")
            return 2.0 * (p - 1), 2.0 * (p - 1)
        if self.kind == "W":
            return 4.0, 4.0
        if self.kind == "Z":
            if self.s is None:
                raise ValueError("Z_s norm needs s")
            return 2.0 / (self.s + 1.0), 2.0 / (2.0 - self.s)
        if self.kind == "Y":
            if self.s is None or p is None:
                raise ValueError("Y_s norm needs s and p")
            sp_ = float(critical_exponent(p))
            denom = self.s + 1.0 - (2.0 * p - 2.0) * (self.s - sp_)
            if denom <= 1e-12:
                raise ValueError(
                    f"Y_s time exponent singular: s+1-(2p-2)(s-s_p) = {denom}"
                )
            return 2.0 * p / denom, 2.0 * p / (2.0 - self.s)
        if self.kind == "LqLr":
            if self.q is None or self.r is None:
                raise ValueError("LqLr norm needs q and r")
            return float(self.q), float(self.r)
        raise ValueError(f"unknown norm kind {self.kind!r}")


def spacetime_norm(traj, kind: NormKind, p=None, interval=None) -> float:
    """L^q_t L^r_x norm of a trajectory of radial snapshots.

    traj must expose .times and .snapshots (FieldPair list); the spatial
    integral is 4 pi int r^2 |u|^r dr on each snapshot's grid.
    """
    q_t, r_x = kind.exponents(p)
    times = np.asarray(traj.times, dtype=float)
    snaps = list(traj.snapshots)
    if interval is not None:
        lo, hi = interval
        keep = (times >= lo - 1e-12) & (times <= hi + 1e-12)
        times = times[keep]
        snaps = [s for s, k in zip(snaps, keep) if k]
    if times.size < 3:
        raise ValueError("need at least 3 snapshots for the time quadrature")
    vals = np.empty(times.size)
    for i, f in enumerate(snaps):
        spatial = 4.0 * np.pi * _spatial_integrate(f.grid, f.grid.r**2 * np.abs(f.u) ** r_x)
        vals[i] = spatial ** (q_t / r_x)
    return float(simpson(vals, x=times) ** (1.0 / q_t))


# -- weighted sup profiles ------------------------------------------------------

@dataclass(frozen=True)
class FBetaReport:
    beta: float
    radii: np.ndarray
    fbeta: np.ndarray
    monotone_ok: bool
    fitted_C: float
    recurrence_margins: np.ndarray
    envelope_divergent: bool
    window: tuple


def fbeta_profile(traj, beta: float, p: float, radii=None) -> FBetaReport:
    """f_beta(r) = sup over the window and |x| >= r of |x|^beta |u(x, t)|.

    Checks that f_beta is nonincreasing and measures the constant C in the
    halving recurrence
    f(r) <= g(beta) f(r/2) + C f(r/2)^p r^(2 - (p-1) beta).
    The all-time sup is replaced by the trajectory's finite window, which
    is reported; an envelope attaining its sup at the domain edge is
    flagged divergent.
    """
    times = np.asarray(traj.times, dtype=float)
    grid = traj.snapshots[0].grid
    weight = grid.r**beta
    sup_field = np.zeros(grid.n)
    for f in traj.snapshots:
        sup_field = np.maximum(sup_field, weight * np.abs(f.u))
    # suffix sup: F(r_i) = max over j >= i
    F = np.maximum.accumulate(sup_field[::-1])[::-1]
    envelope_divergent = bool(
        np.argmax(sup_field) >= grid.n - 2 and sup_field[-1] > 0
    )
    if radii is None:
        r_lo = max(grid.r_min, 8 * (grid.r[1] - grid.r[0]))
        k_max = int(np.floor(np.log2(grid.r_max / max(r_lo, 1e-12))))
        radii = grid.r_max / 2.0 ** np.arange(k_max + 1)
        radii = np.sort(radii)
    radii = np.asarray(radii, dtype=float)
    fb = np.interp(radii, grid.r, F)
    monotone_ok = bool(np.all(np.diff(fb) <= 1e-12))
    g = float(g_weight(beta))
    margins = []
    fitted = 0.0
    for rk in radii:
        if rk / 2 < radii[0]:
            continue
        f_r = float(np.interp(rk, radii, fb))
        f_half = float(np.interp(rk / 2, radii, fb))
        denom = f_half**p * rk ** (2.0 - (p - 1.0) * beta)
        excess = f_r - g * f_half
        if denom > 0:
            fitted = max(fitted, excess / denom)
        margins.append(excess)
    return FBetaReport(
        beta=float(beta),
        radii=radii,
        fbeta=fb,
        monotone_ok=monotone_ok,
        fitted_C=float(fitted),
        recurrence_margins=np.array(margins),
        envelope_divergent=envelope_divergent,
        window=(float(times[0]), float(times[-1])),
    )


def exponent_report_json(report: ExponentReport, path):
    with open(path, "w") as fh:
        json.dump(report.to_json_dict(), fh, sort_keys=True)
