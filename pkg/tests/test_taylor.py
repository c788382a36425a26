"""Generalized Taylor expansion and the truncated lifting."""

import math

import numpy as np
import pytest
from scipy.integrate import quad as squad

from gmono import DomainError, ExponentialGauge, Interval, PreconditionError, UnitGauge
from gmono.gderiv import ConeSpec, cone_membership, fn_exp, fn_poly
from gmono.measures import DensityPart, MeasureRep
from gmono.taylor import (
    build_approx,
    convergence_profile,
    estimate_limits_at_a,
    growth_exponent,
    taylor_data,
    taylor_expand,
)

R = Interval(-math.inf, math.inf)
I01 = Interval(0.0, 1.0, left_closed=True, right_closed=True)


def exp_taylor_data_01():
    gu = UnitGauge(I01)
    cone = ConeSpec(gu, 1, 2)
    f = fn_exp(interval=I01)
    dfn = MeasureRep(I01, continuous=DensityPart(pdf=math.exp, support=(0.0, 1.0)))
    return taylor_data(f, cone, limits_at_a={1: 1.0, 2: 1.0}, dfn=dfn)


def exp_taylor_data_R():
    gu = UnitGauge(R)
    cone = ConeSpec(gu, 1, 2)
    dfn = MeasureRep(
        R,
        continuous=DensityPart(pdf=math.exp, tail_decay_hint=("exponential", 1.0)),
    )
    return taylor_data(fn_exp(), cone, limits_at_a={1: 0.0, 2: 0.0}, dfn=dfn)


class TestTaylorExpand:
    def test_exp_unit_identity(self):
        # oracle: p_j = sum (x-a)^(i-j)/(i-j)!, h_j = int e^t (x-t)^(2-j)
        td = exp_taylor_data_01()
        for j in (1, 2):
            for x in np.linspace(0.0, 1.0, 9):
                p, h = taylor_expand(td, j, float(x))
                assert p + h == pytest.approx(math.exp(x), rel=1e-10)
                oracle_p = sum(x ** (i - j) / math.factorial(i - j) for i in (j, 2)[: 3 - j])
                oracle_p = sum(x ** (i - j) / math.factorial(i - j) for i in range(j, 3))
                assert p == pytest.approx(oracle_p, rel=1e-12)
                oracle_h, _ = squad(
                    lambda t: math.exp(t) * (x - t) ** (2 - j) / math.factorial(2 - j),
                    0.0,
                    x,
                ) if x > 0 else (0.0, 0.0)
                assert h == pytest.approx(oracle_h, abs=1e-10)

    def test_spec_example_values(self):
        td = exp_taylor_data_01()
        p, h = taylor_expand(td, 2, 1.0)
        assert p == pytest.approx(1.0)
        assert h == pytest.approx(math.e - 1.0, rel=1e-10)

    def test_constant_top_derivative(self):
        # f with f'' constant on R: h_j = 0, p_j = f^(j)(-inf) w_j at j = n.
        gu = UnitGauge(R)
        cone = ConeSpec(gu, 2, 2)
        f = fn_poly([0.0, 0.0, 0.5])  # f'' = 1
        dfn = MeasureRep(R)  # empty Stieltjes measure
        td = taylor_data(f, cone, limits_at_a={2: 1.0}, dfn=dfn)
        p, h = taylor_expand(td, 2, 3.0)
        assert h == 0.0
        assert p == pytest.approx(1.0)

    def test_limits_must_vanish_off_finiteness_row(self):
        g = ExponentialGauge(R, [0.0, 0.0, 0.0, -1.0, 2.0, 1.0])
        cone = ConeSpec(g, 2, 5)
        f = fn_exp(rate=2.0)
        dfn = MeasureRep(R)
        with pytest.raises(PreconditionError):
            taylor_data(
                f, cone, limits_at_a={2: 0.0, 3: 1.0, 4: 0.0, 5: 0.0}, dfn=dfn
            )

    def test_out_of_range_j(self):
        td = exp_taylor_data_01()
        with pytest.raises(DomainError):
            taylor_expand(td, 0, 0.5)


class TestBuildApprox:
    def test_exp_R_oracle(self):
        td = exp_taylor_data_R()
        ah = build_approx(td, 0.0, -5.0)
        oracle, _ = squad(lambda t: math.exp(t) * (1 - t) ** 2 / 2, -5.0, 1.0)
        assert ah.R.func(1.0) == pytest.approx(oracle, rel=1e-9)
        assert abs(ah.g_y.func(1.0) - math.e) < 0.05

    def test_closed_form_P_R(self):
        # Unit-gauge a = -inf closed forms: P has the deficit coefficients
        # c_i = f^(i)(z) - int_[y,inf) df''(t) (z-t)_+^(2-i)/(2-i)!.
        td = exp_taylor_data_R()
        z, y = 0.0, -3.0
        ah = build_approx(td, z, y)
        c0_oracle = 1.0 - squad(
            lambda t: math.exp(t) * (0.0 - t) ** 2 / 2, y, 0.0
        )[0]
        x = -1.0
        R_oracle = squad(lambda t: math.exp(t) * (x - t) ** 2 / 2, y, x)[0]
        P_oracle = c0_oracle  # k = 1: P = c_0 (f'(inf-limits vanish)
        assert ah.R.func(x) == pytest.approx(R_oracle, rel=1e-9)
        assert ah.P.func(x) == pytest.approx(P_oracle, rel=1e-9)

    def test_pure_wpoly_is_exact(self):
        # f already in the polynomial cone: R = 0 and g_y = f exactly.
        gu = UnitGauge(R)
        cone = ConeSpec(gu, 1, 1)
        f = fn_poly([2.0, 1.0])  # f' = 1: nondecreasing with finite limit
        td = taylor_data(f, cone, limits_at_a={1: 1.0}, dfn=MeasureRep(R))
        ah = build_approx(td, 0.0, -4.0)
        for x in (-2.0, 0.0, 3.0):
            assert ah.R.func(x) == 0.0
            assert ah.g_y.func(x) == pytest.approx(f.func(x), rel=1e-12)

    def test_single_atom_truncation(self):
        # df'' = delta at t0: truncation with y > t0 removes everything.
        gu = UnitGauge(R)
        cone = ConeSpec(gu, 1, 2)
        t0 = -2.0
        dfn = MeasureRep(R, atoms=[(t0, 1.0)])

        def fval(x):
            return 1.0 + max(x - t0, 0.0) ** 2 / 2.0

        from gmono.gderiv import FunctionRep

        f = FunctionRep(
            R,
            fval,
            gauged_data=lambda j, x: [
                fval(x),
                max(x - t0, 0.0),
                1.0 if x >= t0 else 0.0,
            ][j],
        )
        td = taylor_data(f, cone, limits_at_a={1: 0.0, 2: 0.0}, dfn=dfn)
        ah_hit = build_approx(td, 0.0, t0 - 1.0)  # y below the atom
        ah_miss = build_approx(td, 0.0, t0 + 0.5)  # y above the atom
        for x in (-3.0, 0.0, 2.0):
            assert ah_hit.g_y.func(x) == pytest.approx(fval(x), rel=1e-10)
        # with the atom truncated away, R = 0 and only the constant part
        # survives: g_y matches f at z but not below the atom
        assert ah_miss.R.func(3.0) == 0.0

    def test_interpolation_at_z(self):
        td = exp_taylor_data_R()
        for y in (-1.0, -4.0):
            ah = build_approx(td, 0.0, y)
            assert ah.g_y.func(0.0) == pytest.approx(1.0, abs=1e-10)
            assert ah.gauged(0, 0.0) == pytest.approx(1.0, abs=1e-10)

    def test_kth_derivative_identity(self):
        # (g_y)^(k) w_k = p_k + h_(k,y) on a grid.
        td = exp_taylor_data_R()
        y = -3.0
        ah = build_approx(td, 0.0, y)
        for x in (-4.0, -1.0, 0.5, 2.0):
            lhs = ah.gauged(1, x)
            oracle = squad(lambda t: math.exp(t) * max(x - t, 0.0), y, max(x, y))[0]
            assert lhs == pytest.approx(oracle, rel=1e-8, abs=1e-10)

    def test_k_equals_n_plus_one_path(self):
        # k = n+1: the polynomial part of the expansion is the empty sum,
        # so g_y = (degree-k-1 interpolant) + truncated mixture.
        gu = UnitGauge(R)
        cone = ConeSpec(gu, 3, 2)  # 2-convex functions

        def fval(x):
            return x**3 / 6.0

        from gmono.gderiv import FunctionRep

        f = FunctionRep(
            R,
            fval,
            gauged_data=lambda j, x: [fval(x), x * x / 2.0, x, 1.0][j],
        )
        # df'' is Lebesgue measure: discretize on a window
        td = taylor_data(f, cone, limits_at_a={}, dfn=None, window=(-12.0, 4.0))
        gaps = []
        for y in (-3.0, -6.0, -9.0):
            ah = build_approx(td, 0.0, y)
            gaps.append(max(abs(ah.g_y.func(x) - fval(x)) for x in (-2.0, 0.0, 2.0)))
        assert gaps[-1] < 2e-2
        assert gaps[2] <= gaps[0] + 1e-12  # deeper truncation approximates better
        rep = cone_membership(
            ah.g_y, cone, grid=np.linspace(-5, 3, 65), tol=1e-6
        )
        assert rep.member

    def test_rejects_out_of_range_y(self):
        td = exp_taylor_data_R()
        with pytest.raises(DomainError):
            build_approx(td, 0.0, 0.5)  # y > z

    def test_cone_closure(self):
        td = exp_taylor_data_R()
        cone = td.cone
        for y in (-1.0, -8.0):
            ah = build_approx(td, 0.0, y)
            rep = cone_membership(
                ah.g_y, cone, grid=np.linspace(-10, 4, 141), tol=1e-7
            )
            assert rep.member, y


class TestNonUnitGauges:
    def _member_61(self):
        # Cone member for the lam = (0,0,0,-1,2,1) gauges, built from known
        # pieces: the finite left-anchored degree-4 element plus an atom
        # mixture of degree-5 positive parts.  Every gauged derivative has
        # an exact expression through the chain identities.
        from gmono.gderiv import FunctionRep, mixture_function
        from gmono.wpoly import chain_t_handle

        g = ExponentialGauge(R, [0.0, 0.0, 0.0, -1.0, 2.0, 1.0])
        mu = MeasureRep(R, atoms=[(-1.0, 0.5), (0.5, 0.25)])
        base = [chain_t_handle(g, -math.inf, j, 4) for j in range(5)]
        mix = mixture_function(mu, g, 0, 5)

        def value(x):
            return base[0].eval(x) + mix.func(x)

        def gauged(j, x):
            acc = mix.gauged_data(j, x)
            if j <= 4:
                acc += base[j].eval(x) / g.value(j, x)
            return acc

        f = FunctionRep(g.interval, value, gauged_data=gauged, name="member61")
        cone = ConeSpec(g, 2, 5)
        limits = {2: 0.0, 3: 0.0, 4: 1.0, 5: 0.0}
        return g, f, cone, limits, mu

    def test_taylor_identity_61(self):
        g, f, cone, limits, mu = self._member_61()
        td = taylor_data(f, cone, limits_at_a=limits, dfn=mu)
        worst = 0.0
        for j in range(2, 6):
            for x in (-1.5, 0.0, 0.8):
                p, h = taylor_expand(td, j, x)
                lhs = f.gauged_data(j, x) * g.value(j, x)
                worst = max(worst, abs(lhs - (p + h)))
        assert worst < 1e-9

    def test_lifting_61(self):
        g, f, cone, limits, mu = self._member_61()
        td = taylor_data(f, cone, limits_at_a=limits, dfn=mu)
        grid = np.linspace(-4.0, 2.0, 41)
        rows = convergence_profile(td, 0.0, [-0.5, -1.5, -3.0], grid)
        rights = [r[1] for r in rows]
        lefts = [r[2] for r in rows]
        assert all(v >= -1e-8 for v in rights + lefts)
        assert rights[-1] < 1e-8  # y below every atom: mixture fully kept
        ah = build_approx(td, 0.0, -3.0)
        rep = cone_membership(ah.g_y, cone, grid=np.linspace(-3, 1.5, 41),
                              tol=1e-6)
        assert rep.member


class TestConvergenceProfile:
    def test_exp_profile(self):
        td = exp_taylor_data_R()
        grid = np.concatenate([np.linspace(-6, 0, 25), np.linspace(0.125, 3, 24)])
        ys = [-(2.0**i) for i in range(7)]
        rows = convergence_profile(td, 0.0, ys, grid)
        rights = [r[1] for r in rows]
        lefts = [r[2] for r in rows]
        assert all(v >= -1e-9 for v in rights + lefts)
        assert all(b <= a + 1e-9 for a, b in zip(rights, rights[1:]))
        assert all(b <= a + 1e-9 for a, b in zip(lefts, lefts[1:]))
        assert rights[-1] < 1e-3

    def test_monotone_approach_pointwise(self):
        # Right of z: g_y increases to f from below as y drops.  Left of z
        # with k = 1: g_y decreases to f from above.
        td = exp_taylor_data_R()
        a1 = build_approx(td, 0.0, -2.0)
        a2 = build_approx(td, 0.0, -6.0)
        for x in np.linspace(0, 3, 13):
            v1, v2 = a1.g_y.func(float(x)), a2.g_y.func(float(x))
            assert v1 - 1e-10 <= v2 <= math.exp(x) + 1e-10
        for x in np.linspace(-6, 0, 13):
            v1, v2 = a1.g_y.func(float(x)), a2.g_y.func(float(x))
            assert math.exp(x) - 1e-10 <= v2 <= v1 + 1e-10

    def test_atom_straddle(self):
        gu = UnitGauge(R)
        cone = ConeSpec(gu, 1, 2)
        t0 = -2.0
        dfn = MeasureRep(R, atoms=[(t0, 1.0)])
        from gmono.gderiv import FunctionRep

        def fval(x):
            return max(x - t0, 0.0) ** 2 / 2.0

        f = FunctionRep(
            R,
            fval,
            gauged_data=lambda j, x: [
                fval(x),
                max(x - t0, 0.0),
                1.0 if x >= t0 else 0.0,
            ][j],
        )
        td = taylor_data(f, cone, limits_at_a={1: 0.0, 2: 0.0}, dfn=dfn)
        grid = np.linspace(-5, 3, 33)
        rows = convergence_profile(td, 0.0, [-1.0, -1.9, -2.1, -4.0], grid)
        assert rows[0][1] > 1e-3  # atom still excluded
        assert rows[2][1] < 1e-12  # y below the atom: exact
        assert rows[3][1] < 1e-12


class TestLimitsEstimation:
    def test_exp_limits_on_R(self):
        cone = ConeSpec(UnitGauge(R), 1, 2)
        lim = estimate_limits_at_a(fn_exp(), cone)
        assert lim[1] == pytest.approx(0.0, abs=1e-8)
        assert lim[2] == pytest.approx(0.0, abs=1e-8)

    def test_failure_is_loud(self):
        cone = ConeSpec(UnitGauge(R), 1, 1)
        # f' = 2x + 1 has no limit at -inf (it diverges): must fail.
        with pytest.raises(PreconditionError):
            estimate_limits_at_a(fn_poly([0.0, 1.0, 1.0]), cone)

    def test_closed_endpoint(self):
        cone = ConeSpec(UnitGauge(I01), 1, 2)
        lim = estimate_limits_at_a(fn_exp(interval=I01), cone)
        assert lim[1] == pytest.approx(1.0)


class TestGrowthDiagnostic:
    def test_left_example_growth(self):
        from gmono.gderiv import rem_left_example

        f = rem_left_example(1, 2)
        window = -np.geomspace(10, 1000, 12)
        slope = growth_exponent(f, window)
        assert slope == pytest.approx(0.5, abs=0.1)  # |f| ~ |x|^(k-1/2), k=1

    def test_gy_growth_differs(self):
        td = exp_taylor_data_R()
        ah = build_approx(td, 0.0, -4.0)
        window = -np.geomspace(10, 300, 8)
        slope = growth_exponent(ah.g_y, window)
        assert abs(slope) < 0.2  # flat: constant left tail for k=1
