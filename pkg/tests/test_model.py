import math

import numpy as np
import pytest

from levyexit.model import (
    ModelParams,
    RegimeError,
    ScalingParams,
    drift,
    drift_function,
    is_bistable,
    nondimensionalize,
    potential,
    steady_states,
    zero_drift,
)


class TestModelParams:
    @pytest.mark.parametrize("theta,beta", [(0.0, 3.0), (-0.1, 3.0), (0.1, 0.0), (0.1, -2.0)])
    def test_rejects_nonpositive(self, theta, beta):
        with pytest.raises(ValueError, match="positive"):
            ModelParams(theta=theta, beta=beta)

    def test_bistable_predicate_matches_region(self):
        assert ModelParams(0.1, 3.0).bistable
        assert not ModelParams(1.5, 0.5).bistable  # theta >= 1
        # beta at the fold (1+theta)^2 / (4 theta) is excluded
        theta = 0.25
        fold = (1.0 + theta) ** 2 / (4.0 * theta)
        assert not ModelParams(theta, fold).bistable
        assert ModelParams(theta, fold - 1e-9).bistable

    def test_is_bistable_agrees_with_property(self):
        for theta in (0.05, 0.3, 0.9, 1.2):
            for beta in (0.5, 2.0, 5.0):
                p = ModelParams(theta, beta)
                assert is_bistable(p) == p.bistable


class TestSteadyStates:
    def test_reference_parameters(self):
        st = steady_states(ModelParams(0.1, 3.0))
        assert st.extinction == 0.0
        assert st.threshold == pytest.approx(4.0, abs=1e-12)
        assert st.tumor == pytest.approx(5.0, abs=1e-12)

    # positive branch roots need beta > 1 on top of the bistability bound
    @pytest.mark.parametrize("theta,beta", [(0.1, 2.0), (0.2, 1.5), (0.5, 1.1), (0.08, 3.3)])
    def test_ordering_and_stationarity(self, theta, beta):
        p = ModelParams(theta, beta)
        st = steady_states(p)
        assert 0.0 == st.extinction < st.threshold < st.tumor
        for x in (st.threshold, st.tumor):
            assert abs(drift(x, p)) <= 1e-10 * max(1.0, abs(x))

    def test_theta_above_one_rejected(self):
        with pytest.raises(RegimeError, match="theta"):
            steady_states(ModelParams(1.0, 0.5))

    def test_degenerate_discriminant_rejected(self):
        theta = 0.25
        fold = (1.0 + theta) ** 2 / (4.0 * theta)
        with pytest.raises(RegimeError, match="discriminant"):
            steady_states(ModelParams(theta, fold + 0.1))

    def test_drift_sign_pattern_between_states(self):
        # stable-unstable-stable: f < 0 left of the threshold, > 0 between
        # threshold and tumor state, < 0 beyond
        p = ModelParams(0.1, 3.0)
        assert drift(2.0, p) < 0
        assert drift(4.5, p) > 0
        assert drift(6.0, p) < 0


class TestDriftAndPotential:
    def test_drift_vectorizes(self):
        p = ModelParams(0.1, 3.0)
        xs = np.linspace(0.0, 5.0, 11)
        vals = drift(xs, p)
        assert vals.shape == xs.shape
        assert vals[0] == 0.0  # extinction state is a root
        assert isinstance(drift(2.5, p), float)

    def test_potential_gradient_is_minus_drift(self):
        p = ModelParams(0.1, 3.0)
        e = 1e-6
        for x in (0.5, 2.0, 3.3, 4.8):
            grad = (potential(x + e, p) - potential(x - e, p)) / (2.0 * e)
            assert grad == pytest.approx(-drift(x, p), rel=1e-6, abs=1e-8)

    @pytest.mark.parametrize("x", [-1.0, -1.5])
    def test_potential_pole_rejected(self, x):
        with pytest.raises(ValueError, match="pole"):
            potential(x, ModelParams(0.1, 3.0))

    def test_zero_drift_is_zero(self):
        xs = np.linspace(-2.0, 2.0, 7)
        assert np.all(zero_drift(xs) == 0.0)
        assert zero_drift(1.3) == 0.0

    def test_drift_function_coercion(self):
        p = ModelParams(0.1, 3.0)
        f = drift_function(p)
        assert f(2.5) == drift(2.5, p)
        g = drift_function(zero_drift)
        assert g is zero_drift
        with pytest.raises(TypeError):
            drift_function(42)


class TestNondimensionalization:
    def test_known_mapping(self):
        s = ScalingParams(lambda_rate=1.0, k1=10.0, k2=1.0, e_total=0.3)
        nd = nondimensionalize(s)
        assert nd.params.theta == pytest.approx(0.1, rel=1e-14)
        assert nd.params.beta == pytest.approx(3.0, rel=1e-14)
        assert nd.time_scale == 1.0
        assert nd.density_scale == pytest.approx(10.0)

    def test_out_of_range_rates_warn(self):
        with pytest.warns(UserWarning):
            ScalingParams(lambda_rate=10.0, k1=10.0, k2=1.0, e_total=0.3)

    def test_nonpositive_rates_rejected(self):
        with pytest.raises(ValueError):
            ScalingParams(lambda_rate=0.0, k1=10.0, k2=1.0, e_total=0.3)
