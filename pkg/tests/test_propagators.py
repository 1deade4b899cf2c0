import math

import numpy as np
import pytest

from fracwave.contour import HankelSpec
from fracwave.mittag_leffler import MLParams, ml_eval
from fracwave.operator_model import apply as op_apply
from fracwave.operator_model import build_ladder_model, build_scalar_model
from fracwave.propagators import (
    DecayReport,
    a_prop_apply,
    a_prop_norm_decay,
    conv_norm_decay,
    decay_report_to_csv,
    derivative_identity_check,
    laplace_check,
    make_propagator,
    prop_apply,
    prop_norm_decay,
    prop_time_derivative,
    strong_continuity_check,
    uno_identity_check,
)

RNG = np.random.default_rng(271828)
ALPHA = 1.5
GAMMA = -0.75


def ladder():
    return build_ladder_model(GAMMA, math.pi / 6, 1e-2, 1e4, 4)


def wide_ladder():
    # reaches high enough spectral radii that the t -> 0 transition
    # rho* = t^{-alpha} stays inside the modelled range
    return build_ladder_model(GAMMA, math.pi / 6, 1e-2, 1e7, 4)


def rand_vec(m):
    return RNG.standard_normal(m.dimension) + 1j * RNG.standard_normal(m.dimension)


def mid_theta0(m, alpha=ALPHA):
    return 0.5 * (math.pi / 2.0 + (math.pi - m.profile.theta) / alpha)


class TestHandle:
    def test_rejects_bad_alpha(self):
        for alpha in [0.5, 1.0, 2.0, 2.5]:
            with pytest.raises(ValueError):
                make_propagator(ladder(), alpha)

    def test_rejects_unknown_representation(self):
        with pytest.raises(ValueError):
            make_propagator(ladder(), ALPHA, representation="dense")

    def test_rejects_hankel_with_shifted_delta(self):
        with pytest.raises(ValueError):
            make_propagator(ladder(), ALPHA, delta=2.0, representation="hankel-path")

    def test_rejects_inadmissible_sector(self):
        # mu of this model exceeds pi - alpha*pi/2 once alpha is close to 2
        with pytest.raises(ValueError):
            make_propagator(ladder(), 1.9)

    def test_t0_limit(self):
        m = ladder()
        x = rand_vec(m)
        p1 = make_propagator(m, ALPHA, representation="oracle")
        assert np.allclose(prop_apply(p1, 0.0, x), x)
        p2 = make_propagator(m, ALPHA, delta=2.0, representation="oracle")
        assert np.allclose(prop_apply(p2, 0.0, x), x)  # 1/Gamma(2) = 1
        with pytest.raises(ValueError):
            prop_apply(p1, -1.0, x)


class TestRepresentationsAgree:
    def test_scalar_closed_form(self):
        m = build_scalar_model(2.0)
        x = np.array([1.0, 0.0], dtype=complex)
        p = make_propagator(m, ALPHA, representation="gamma-path")
        for t in [0.3, 1.0, 5.0]:
            want = ml_eval(MLParams(ALPHA, 1.0), -(t**ALPHA) * 2.0)
            assert abs(prop_apply(p, t, x)[0] - want) <= 1e-8 * abs(want) + 1e-12

    def test_three_way(self):
        m = ladder()
        x = rand_vec(m)
        hank = HankelSpec(theta0=mid_theta0(m))
        handles = [
            make_propagator(m, ALPHA, representation="oracle"),
            make_propagator(m, ALPHA, representation="gamma-path"),
            make_propagator(m, ALPHA, representation="hankel-path", hankel=hank),
        ]
        for t in [0.1, 1.0]:
            vals = [prop_apply(p, t, x) for p in handles]
            scale = np.linalg.norm(vals[0])
            for v in vals[1:]:
                assert np.linalg.norm(v - vals[0]) <= 1e-8 * scale

    def test_delta_two(self):
        m = ladder()
        x = rand_vec(m)
        oracle = make_propagator(m, ALPHA, delta=2.0, representation="oracle")
        path = make_propagator(m, ALPHA, delta=2.0, representation="gamma-path")
        for t in [0.5, 2.0]:
            want = prop_apply(oracle, t, x)
            got = prop_apply(path, t, x)
            assert np.linalg.norm(got - want) <= 1e-8 * np.linalg.norm(want)


class TestNormDecay:
    TS = np.geomspace(0.01, 10.0, 16)

    def test_e_alpha_slope(self):
        p = make_propagator(ladder(), ALPHA, representation="oracle")
        rep = prop_norm_decay(p, self.TS)
        assert abs(rep.fitted_slope - (-ALPHA * (1.0 + GAMMA))) <= 0.08

    def test_t_e_alpha2_slope(self):
        p = make_propagator(ladder(), ALPHA, delta=2.0, representation="oracle")
        rep = prop_norm_decay(p, self.TS, with_prefactor=True)
        assert abs(rep.fitted_slope - (1.0 - ALPHA * (1.0 + GAMMA))) <= 0.08

    def test_conv_slope(self):
        # norm of A (g_{alpha-1} * E_alpha)(t), i.e. of the time derivative
        p = make_propagator(ladder(), ALPHA, representation="oracle")
        rep = conv_norm_decay(p, self.TS)
        assert abs(rep.fitted_slope - (-1.0 - ALPHA * (1.0 + GAMMA))) <= 0.15

    def test_a_e_slope(self):
        p = make_propagator(ladder(), ALPHA, delta=ALPHA, representation="oracle")
        rep = a_prop_norm_decay(p, self.TS)
        assert abs(rep.fitted_slope - (-2.0 * ALPHA - ALPHA * GAMMA)) <= 0.1

    def test_constant_positive(self):
        p = make_propagator(ladder(), ALPHA, representation="oracle")
        rep = prop_norm_decay(p, self.TS)
        assert rep.c_empirical > 0
        assert np.all(rep.norms > 0)

    def test_rejects_bad_sweep(self):
        p = make_propagator(ladder(), ALPHA, representation="oracle")
        with pytest.raises(ValueError):
            prop_norm_decay(p, [1.0])
        with pytest.raises(ValueError):
            prop_norm_decay(p, [0.0, 1.0])


class TestTimeDerivative:
    def finite_difference(self, p, t, n, x, h):
        # central differences of t^{delta-1} E(.) x
        g = lambda s: s ** (p.delta - 1.0) * prop_apply(p, s, x)
        if n == 1:
            return (g(t + h) - g(t - h)) / (2.0 * h)
        return (g(t + h) - 2.0 * g(t) + g(t - h)) / h**2

    @pytest.mark.parametrize("delta", [1.0, 2.0])
    @pytest.mark.parametrize("n", [1, 2])
    def test_matches_finite_differences(self, delta, n):
        m = ladder()
        x = rand_vec(m)
        p = make_propagator(m, ALPHA, delta=delta, representation="oracle")
        t = 1.0
        want = prop_time_derivative(p, t, n, x)
        h = 1e-5 if n == 1 else 1e-4
        fd = self.finite_difference(p, t, n, x, h)
        assert np.linalg.norm(fd - want) <= 1e-5 * (np.linalg.norm(want) + 1.0)

    def test_order_zero_is_prefactored_apply(self):
        m = ladder()
        x = rand_vec(m)
        p = make_propagator(m, ALPHA, delta=2.0, representation="oracle")
        want = 2.0 * prop_apply(p, 2.0, x)
        assert np.allclose(prop_time_derivative(p, 2.0, 0, x), want)

    def test_rejects_bad_args(self):
        p = make_propagator(ladder(), ALPHA, representation="oracle")
        x = rand_vec(p.model)
        with pytest.raises(ValueError):
            prop_time_derivative(p, 0.0, 1, x)
        with pytest.raises(ValueError):
            prop_time_derivative(p, 1.0, -1, x)


class TestAProp:
    def test_dual_forms_agree(self):
        m = ladder()
        x = rand_vec(m)
        p = make_propagator(m, ALPHA, delta=ALPHA, representation="oracle")
        for t in [0.5, 1.0, 3.0]:
            composed = a_prop_apply(p, t, x, via="apply")
            direct = a_prop_apply(p, t, x, via="contour")
            assert np.linalg.norm(direct - composed) <= 1e-8 * np.linalg.norm(composed)

    def test_rejects_unknown_via(self):
        p = make_propagator(ladder(), ALPHA, representation="oracle")
        with pytest.raises(ValueError):
            a_prop_apply(p, 1.0, rand_vec(p.model), via="dense")


class TestIdentities:
    def test_laplace_transform(self):
        m = ladder()
        x = rand_vec(m)
        p = make_propagator(m, ALPHA, representation="oracle")
        for lam in [0.5, 2.0, 10.0]:
            assert laplace_check(p, lam, x) <= 1e-4

    def test_laplace_rejects_bad_lam(self):
        p = make_propagator(ladder(), ALPHA, representation="oracle")
        with pytest.raises(ValueError):
            laplace_check(p, -1.0, rand_vec(p.model))

    def test_derivative_identity_oracle(self):
        m = ladder()
        x = rand_vec(m)
        p = make_propagator(m, ALPHA, representation="oracle")
        for t in [0.1, 1.0, 5.0]:
            assert derivative_identity_check(p, t, x, method="oracle") <= 1e-8

    def test_derivative_identity_grid_scalar(self):
        m = build_scalar_model(2.0)
        x = np.array([1.0, 0.0], dtype=complex)
        p = make_propagator(m, ALPHA, representation="oracle")
        assert derivative_identity_check(p, 1.0, x, n_grid=2048) <= 1e-4

    def test_uno_identity(self):
        m = ladder()
        x = rand_vec(m)
        p = make_propagator(m, ALPHA, representation="oracle")
        assert uno_identity_check(p, 1.0, x) <= 1e-5

    def test_uno_identity_grid_scalar(self):
        m = build_scalar_model(2.0)
        x = np.array([1.0, 0.0], dtype=complex)
        p = make_propagator(m, ALPHA, representation="oracle")
        coarse = uno_identity_check(p, 1.0, x, method="grid", n_grid=512)
        fine = uno_identity_check(p, 1.0, x, method="grid", n_grid=2048)
        assert fine <= 1e-6
        assert fine <= coarse


class TestStrongContinuity:
    def test_operator_norm_slope(self):
        p = make_propagator(wide_ladder(), ALPHA, representation="oracle")
        rep = strong_continuity_check(p, np.geomspace(1e-4, 1e-1, 10))
        assert abs(rep.slope - (-ALPHA * GAMMA)) <= 0.1
        assert rep.constant > 0


class TestCsv:
    def test_round_trip_columns(self):
        p = make_propagator(ladder(), ALPHA, representation="oracle")
        rep = prop_norm_decay(p, np.geomspace(0.1, 10.0, 6))
        text = decay_report_to_csv(rep, header_lines=["seed=1"])
        lines = text.strip().splitlines()
        assert lines[0] == "# seed=1"
        assert lines[1] == "t,norm,fitted_slope,C_empirical"
        body = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
        assert body.shape == (6, 4)
        assert np.allclose(body[:, 0], rep.t_values)
        assert np.allclose(body[:, 1], rep.norms)
        assert np.allclose(body[:, 2], rep.fitted_slope)
