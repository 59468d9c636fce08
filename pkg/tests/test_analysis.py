import math
from fractions import Fraction

import numpy as np
import pytest

from radialwave.analysis import (
    ExponentReport,
    NormKind,
    admissibility_check,
    critical_exponent,
    decay_ladder,
    fbeta_profile,
    g_weight,
    interpolation_kappa,
    recurrence_decay_check,
    regularity_constants,
    spacetime_norm,
)
from radialwave.core import FieldPair, GEOMETRIC, make_grid


class Traj:
    """Minimal trajectory protocol for the analysis operations."""

    def __init__(self, times, snapshots):
        self.times = np.asarray(times, dtype=float)
        self.snapshots = snapshots


class TestCriticalExponent:
    def test_values_exact(self):
        assert critical_exponent(4) == Fraction(5, 6)
        assert critical_exponent(5) == Fraction(1)
        assert critical_exponent(3) == Fraction(1, 2)

    def test_float_path(self):
        assert critical_exponent(4.0) == pytest.approx(5 / 6)


class TestAdmissibility:
    def test_pair_44_half_admissible(self):
        ok, cert = admissibility_check(4, 4, Fraction(1, 2))
        assert ok
        assert cert["scaling_lhs"] == Fraction(1)

    def test_pair_inf_6_one_admissible(self):
        ok, _ = admissibility_check(math.inf, 6, 1)
        assert ok

    def test_s_norm_pair_sp_admissible(self):
        p = 4
        q = 2 * (p - 1)
        ok, _ = admissibility_check(q, q, critical_exponent(p))
        assert ok

    def test_failing_pair(self):
        ok, _ = admissibility_check(2, 2, Fraction(1, 2))
        assert not ok


class TestInterpolationKappa:
    def test_kappa_p4(self):
        kappa, q, r = interpolation_kappa(4, Fraction(5, 6))
        assert kappa == Fraction(1, 4)
        assert q == Fraction(36, 11)  # 1/q = 11/36
        assert Fraction(1, q) + Fraction(1, r) <= Fraction(1, 2)

    def test_kappa_range(self):
        # kappa = 1 - 3/p stays in (0, 0.4); s = s_p is valid only for p < 5
        for p in (3.5, 4.0, 4.5, 4.9):
            kappa, _, _ = interpolation_kappa(p, float(critical_exponent(p)))
            assert 0 < kappa < 0.4

    def test_invalid_s(self):
        with pytest.raises(ValueError):
            interpolation_kappa(4, Fraction(1, 2))


class TestRegularityConstants:
    def test_p4_exact(self):
        rep = regularity_constants(4)
        assert rep.s_p == Fraction(5, 6)
        assert rep.kappa == Fraction(1, 4)
        assert rep.sigma == Fraction(3, 8)
        assert rep.sigma1 == Fraction(1, 24)
        assert rep.sigma2 == Fraction(1, 24)
        assert rep.s1 == Fraction(5, 6) + Fraction(99, 100) * Fraction(1, 24)

    def test_consistency_across_p(self):
        for p in (Fraction(7, 2), Fraction(4), Fraction(9, 2)):
            rep = regularity_constants(p)
            assert rep.sigma2 <= rep.sigma1
            assert 0 < rep.kappa < Fraction(2, 5)
            assert 0 < rep.sigma2

    def test_json_dict(self):
        d = regularity_constants(4).to_json_dict()
        assert d["sigma1"]["exact"] == "1/24"

    def test_range_rejected(self):
        with pytest.raises(ValueError):
            regularity_constants(5)


class TestDecayLadder:
    def test_g_endpoint_values(self):
        assert g_weight(1.0) == pytest.approx(1.0, abs=1e-15)
        assert g_weight(0.0) == pytest.approx(1.0, abs=1e-15)
        # frozen scalar oracle values
        assert g_weight(0.5) == pytest.approx(0.9659258262890682, rel=1e-12)
        inc = math.log2(2 / (1 + g_weight(0.5)))
        assert inc == pytest.approx(0.024791109686524895, rel=1e-10)

    def test_g_strictly_below_one_and_convex(self):
        b = np.linspace(0.001, 0.999, 2001)
        g = g_weight(b)
        assert np.all(g < 1.0)
        assert np.all(np.diff(g, 2) > 0)  # convexity on the lattice

    @pytest.mark.parametrize("p", [3.5, 4.0, 4.5])
    def test_ladder_reaches_one(self, p):
        st = decay_ladder(p)
        assert st.reached
        assert st.betas.size - 1 < 10**5
        assert np.all(st.increments > 0)
        assert st.betas[-1] >= 1 - 1e-6
        assert np.all(np.diff(st.betas) > 0)

    def test_beta0_out_of_range(self):
        with pytest.raises(ValueError):
            decay_ladder(4.0, beta0=0.1)

    def test_csv(self, tmp_path):
        st = decay_ladder(4.0)
        path = tmp_path / "ladder.csv"
        st.to_csv(path)
        assert open(path).readline().strip() == "n,beta,g,increment"


class TestRecurrenceDecay:
    def lattice(self, a_max, step=0.25):
        return np.arange(step, a_max + step / 2, step)

    def test_exact_power_law_confirmed(self):
        omega = 0.04
        a = self.lattice(4000.0)
        S = 2.0 ** (-omega * a)
        rep = recurrence_decay_check(a, S, 1 / 3, 2 / 3, 3.0, omega, 1.0)
        assert rep["verdict"] == "confirmed"
        assert rep["fitted_exponent"] == pytest.approx(omega, rel=1e-6)
        assert rep["log2_A0"] is not None

    def test_scaled_power_law_p4(self):
        # S(A) = 2 A^-omega with (alpha, beta, l) = (1/3, 2/3, p-1), p = 4
        omega = 0.04
        a = self.lattice(6500.0)
        S = 2.0 * 2.0 ** (-omega * a)
        rep = recurrence_decay_check(a, S, 1 / 3, 2 / 3, 3.0, omega, 3.0)
        assert rep["verdict"] == "confirmed"
        assert rep["fitted_exponent"] == pytest.approx(omega, rel=1e-6)

    def test_log_decay_violates_premise(self):
        a = self.lattice(2000.0)
        S = 1.0 / (a * math.log(2.0))  # S = 1/ln(A)
        rep = recurrence_decay_check(a, S, 1 / 3, 2 / 3, 3.0, 0.04, 1.0)
        assert rep["verdict"] == "premise_violation"
        assert rep["log2_witness"] is not None
        assert rep["log2_witness"] > 1000.0

    def test_precondition(self):
        a = self.lattice(100.0)
        with pytest.raises(ValueError):
            recurrence_decay_check(a, np.ones_like(a), 0.5, 0.4, 1.0, 0.1, 1.0)
        with pytest.raises(ValueError):
            recurrence_decay_check(a, np.ones_like(a), 0.2, 0.3, 1.0, 0.1, 1.0)


class TestSpacetimeNorm:
    def make_traj(self, a_of_t, b_of_r, times, grid):
        snaps = [
            FieldPair(grid, a_of_t(t) * b_of_r(grid.r), np.zeros(grid.n))
            for t in times
        ]
        return Traj(times, snaps)

    def test_zero_trajectory(self):
        g = make_grid(0.0, 8.0, 257)
        traj = self.make_traj(lambda t: 0.0, lambda r: np.zeros_like(r), np.linspace(0, 1, 9), g)
        for kind in (NormKind("S"), NormKind("W"), NormKind("Z", s=5 / 6), NormKind("Y", s=5 / 6)):
            assert spacetime_norm(traj, kind, p=4.0) == 0.0

    def test_y_exponents_at_p4(self):
        q, r = NormKind("Y", s=5 / 6).exponents(p=4.0)
        assert q == pytest.approx(48 / 11)
        assert r == pytest.approx(48 / 7)

    def test_y_exponent_singularity_flagged(self):
        # s + 1 - (2p-2)(s - s_p) = 0 at s slightly above s_p for large factor
        p = 4.9
        sp_ = float(critical_exponent(p))
        s_sing = (1 + (2 * p - 2) * sp_) / (2 * p - 3)
        if s_sing < 1.5:
            with pytest.raises(ValueError):
                NormKind("Y", s=s_sing).exponents(p=p)

    def test_separable_oracle(self):
        # u(r,t) = a(t) b(r): norm = (int |a|^q)^(1/q) * ||b||_{L^r}
        g = make_grid(0.0, 10.0, 2001)
        times = np.linspace(0.0, 2.0, 161)
        a_f = lambda t: 1.0 + 0.5 * np.sin(3.0 * t)
        b_f = lambda r: np.exp(-(r**2))
        traj = self.make_traj(a_f, b_f, times, g)
        kind = NormKind("S")
        p = 4.0
        q = 2 * (p - 1)
        got = spacetime_norm(traj, kind, p=p)
        from scipy.integrate import quad

        time_part = quad(lambda t: a_f(t) ** q, 0, 2)[0] ** (1 / q)
        space_part = (4 * np.pi * quad(lambda r: r**2 * b_f(r) ** q, 0, 10)[0]) ** (1 / q)
        assert got == pytest.approx(time_part * space_part, rel=1e-6)

    def test_homogeneous_degree_one(self):
        g = make_grid(0.0, 8.0, 513)
        times = np.linspace(0.0, 1.0, 17)
        traj = self.make_traj(lambda t: np.exp(-t), lambda r: np.exp(-(r**2)), times, g)
        base = spacetime_norm(traj, NormKind("W"))
        scaled = Traj(times, [f.scaled(3.0) for f in traj.snapshots])
        assert spacetime_norm(scaled, NormKind("W")) == pytest.approx(3 * base, rel=1e-12)


class TestFBeta:
    def test_zero_trajectory(self):
        g = make_grid(0.0, 8.0, 257)
        traj = Traj(np.linspace(0, 1, 5), [FieldPair(g, np.zeros(g.n), np.zeros(g.n))] * 5)
        rep = fbeta_profile(traj, 0.5, 4.0)
        assert np.all(rep.fbeta == 0.0)
        assert rep.monotone_ok

    def test_static_singular_family(self):
        # u = C r^(-2/3): f_beta finite and decaying for beta < 2/3,
        # envelope divergent (sup at the domain edge) for beta > 2/3
        g = make_grid(0.25, 64.0, 4097, GEOMETRIC)
        C = 0.60570686427738
        u = C * g.r ** (-2.0 / 3.0)
        traj = Traj(np.array([0.0, 0.5, 1.0]), [FieldPair(g, u, np.zeros(g.n))] * 3)
        lo = fbeta_profile(traj, 0.5, 4.0)
        assert lo.monotone_ok and not lo.envelope_divergent
        assert lo.fbeta[-1] < lo.fbeta[0]
        hi = fbeta_profile(traj, 0.8, 4.0)
        assert hi.envelope_divergent

    def test_outgoing_free_wave_decays(self):
        from radialwave.core import ReducedPair, from_reduced
        from radialwave.linear_wave import free_propagate

        g = make_grid(0.0, 64.0, 8001)
        t_b = (g.r - 2.0) / 0.5
        w0 = np.where(np.abs(t_b) < 1, np.exp(1 - 1 / (1 - np.minimum(t_b**2, 1 - 1e-12))), 0.0)
        f = from_reduced(ReducedPair(g, w0, np.zeros(g.n)), extrapolation="derivative")
        times = np.array([0.0, 8.0, 16.0, 32.0])
        traj = Traj(times, [free_propagate(f, t) for t in times])
        rep = fbeta_profile(traj, 0.5, 4.0)
        assert rep.monotone_ok
        # d'Alembert rate: |u| ~ 1/r along the wave, so r^0.5 |u| decays
        assert rep.fbeta[-1] < 0.5 * np.max(rep.fbeta)
        assert rep.window == (0.0, 32.0)
