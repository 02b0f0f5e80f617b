import math
import warnings

import numpy as np
import pytest
from scipy.integrate import IntegrationWarning, quad

from levyexit.levy import NoiseParams, stable_constant
from levyexit.model import ModelParams, zero_drift
from levyexit.solver import (
    DenseSystem,
    EscapeTarget,
    GridError,
    QualityWarning,
    SingularMatrixError,
    assemble_operator,
    build_grid,
    dump_system,
    escape_probability,
    escape_rhs,
    mean_exit_time,
    met_rhs,
    observed_order,
    solve_dense,
)

TUMOR = ModelParams(0.1, 3.0)


def stable_exit_exact(x, r, alpha):
    coef = math.gamma(0.5) / (
        2.0**alpha * math.gamma(1.0 + alpha / 2.0) * math.gamma((1.0 + alpha) / 2.0))
    return coef * (r * r - x * x) ** (alpha / 2.0)


class TestGrid:
    def test_basic_layout(self):
        g = build_grid(-1.0, 1.0, 0.25)
        assert (g.jc, g.jd, g.jm) == (-4, 4, 0)
        assert g.n == 7
        assert np.allclose(g.interior_x(), np.arange(-3, 4) * 0.25)
        assert g.node_x()[0] == -1.0 and g.node_x()[-1] == 1.0

    def test_asymmetric_interval(self):
        g = build_grid(0.0, 5.0, 0.01)
        assert (g.jc, g.jd, g.jm) == (0, 500, 250)
        assert g.n == 499

    @pytest.mark.parametrize("c,d,h,msg", [
        (0.0, 5.0, -0.1, "positive"),
        (2.0, 1.0, 0.1, "c < d"),
        (0.5, 5.0, 0.1, "c <= 0 < d"),
        (-1.0, 0.0, 0.1, "c <= 0 < d"),
        (0.0, 5.0, 0.013, "not integral"),
        (0.0, 0.02, 0.01, "interior nodes"),
    ])
    def test_rejections(self, c, d, h, msg):
        with pytest.raises(GridError, match=msg):
            build_grid(c, d, h)

    def test_all_divisibility_violations_reported(self):
        with pytest.raises(GridError) as err:
            build_grid(-0.05, 5.0, 0.03)
        assert str(err.value).count("not integral") >= 2


class TestGaussianLimit:
    # with eps = 0 the problem reduces to u'' = -2/a with zero boundary data,
    # whose discrete solution is exact for the quadratic answer
    def test_met_is_parabola(self):
        g = build_grid(-1.0, 1.0, 1.0 / 200.0)
        n = NoiseParams(a=1.0, epsilon=0.0, alpha=1.0)
        u = mean_exit_time(g, zero_drift, n)
        x = g.interior_x()
        assert np.max(np.abs(u.interior - (1.0 - x**2))) <= 1e-12

    def test_escape_is_linear(self):
        g = build_grid(-1.0, 1.0, 1.0 / 200.0)
        n = NoiseParams(a=1.0, epsilon=0.0, alpha=1.0)
        p = escape_probability(g, zero_drift, n, EscapeTarget.LEFT_EXTINCTION)
        x = g.interior_x()
        assert np.max(np.abs(p.interior - (1.0 - x) / 2.0)) <= 1e-12
        assert p.value_at_c == 1.0 and p.value_at_d == 0.0

    def test_matrix_is_tridiagonal_without_jumps(self):
        g = build_grid(-1.0, 1.0, 0.1)
        op = assemble_operator(g, zero_drift, NoiseParams(a=1.0, epsilon=0.0, alpha=1.0))
        off = np.triu(op.matrix, 2) + np.tril(op.matrix, -2)
        assert np.all(off == 0.0)
        assert np.all(op.sink_left == 0.0) and np.all(op.sink_right == 0.0)

    def test_scheme_variants_coincide_without_jumps(self):
        g = build_grid(-1.0, 1.0, 0.1)
        n = NoiseParams(a=1.0, epsilon=0.0, alpha=1.0)
        a = assemble_operator(g, zero_drift, n, scheme="corrected")
        b = assemble_operator(g, zero_drift, n, scheme="uncorrected")
        assert np.array_equal(a.matrix, b.matrix)


class TestPureStableBenchmark:
    # closed form for the standard stable exit from (-r, r)
    BOUNDS = {0.5: 1.5e-3, 1.0: 1.5e-3, 1.5: 6e-4}

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_center_value(self, alpha):
        g = build_grid(-1.0, 1.0, 1.0 / 200.0)
        n = NoiseParams(a=0.0, epsilon=1.0, alpha=alpha)
        u = mean_exit_time(g, zero_drift, n)
        assert abs(u.value_at(0.0) - stable_exit_exact(0.0, 1.0, alpha)) <= self.BOUNDS[alpha]

    def test_reflection_symmetry(self):
        # the LU solve can break bitwise symmetry, but only at rounding level
        g = build_grid(-1.0, 1.0, 1.0 / 100.0)
        n = NoiseParams(a=0.0, epsilon=1.0, alpha=1.5)
        u = mean_exit_time(g, zero_drift, n)
        assert np.max(np.abs(u.interior - u.interior[::-1])) <= 1e-13

    def test_correction_beats_plain_quadrature_at_high_alpha(self):
        # sup-norm comparisons near the boundary are muddied by the
        # dist^(alpha/2) singularity, so the sup-norm claim is made only at
        # alpha = 1.5 where the quadrature truncation dominates; at the
        # center the correction wins from alpha = 1 up
        g = build_grid(-1.0, 1.0, 1.0 / 100.0)
        for alpha in (1.0, 1.5):
            n = NoiseParams(a=0.0, epsilon=1.0, alpha=alpha)
            exact0 = stable_exit_exact(0.0, 1.0, alpha)
            u_c = mean_exit_time(g, zero_drift, n)
            u_u = mean_exit_time(g, zero_drift, n, scheme="uncorrected")
            assert abs(u_c.value_at(0.0) - exact0) < abs(u_u.value_at(0.0) - exact0)
        ref = stable_exit_exact(g.interior_x(), 1.0, 1.5)
        n = NoiseParams(a=0.0, epsilon=1.0, alpha=1.5)
        err_c = np.max(np.abs(mean_exit_time(g, zero_drift, n).interior - ref))
        err_u = np.max(np.abs(
            mean_exit_time(g, zero_drift, n, scheme="uncorrected").interior - ref))
        assert err_c < err_u


def exact_nonlocal_action(phi, x, alpha, c, d):
    """eps=1 generator action on phi extended by zero outside [c, d],
    via symmetric pairing and an analytic far tail."""
    ca = stable_constant(alpha)

    def phit(z):
        return phi(z) if c <= z <= d else 0.0

    def integrand(y):
        return (phit(x + y) + phit(x - y) - 2.0 * phi(x)) * y ** (-1.0 - alpha)

    cuts = sorted({d - x, x - c})
    total = 0.0
    prev = 0.0
    for cut in cuts:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            part, _ = quad(integrand, prev, cut, limit=200, epsabs=1e-12, epsrel=1e-11)
        total += part
        prev = cut
    # beyond both boundaries only the -2 phi(x) term survives
    total += -2.0 * phi(x) * prev ** (-alpha) / alpha
    return ca * total


class TestOperatorConsistency:
    # On a smooth field vanishing to second order at the boundary, the
    # corrected stencil is second-order accurate; without the correction the
    # quadrature truncation limits the order to 2 - alpha.  The defect is
    # measured on |x| <= 1/2: the zero extension of phi has a second
    # derivative jump at the boundary, which drags even the corrected rows
    # next to it back to order 2 - alpha.

    @staticmethod
    def _phi(z):
        return (1.0 - z * z) ** 2 * math.cos(z)

    def _defects(self, h, alpha):
        g = build_grid(-1.0, 1.0, h)
        n = NoiseParams(a=0.0, epsilon=1.0, alpha=alpha)
        xs = g.interior_x()
        band = np.abs(xs) <= 0.5
        phi_vec = np.array([self._phi(z) for z in xs])
        exact = np.array([exact_nonlocal_action(self._phi, z, alpha, -1.0, 1.0)
                          for z in xs])
        out = {}
        for scheme in ("corrected", "uncorrected"):
            op = assemble_operator(g, zero_drift, n, scheme=scheme)
            disc = op.matrix @ phi_vec  # boundary values of phi are 0
            out[scheme] = float(np.max(np.abs(disc - exact)[band]))
        return out

    @pytest.mark.parametrize("alpha", [0.5, 1.5])
    def test_orders(self, alpha):
        hs = (1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0)
        defects = [self._defects(h, alpha) for h in hs]
        errs_c = [d["corrected"] for d in defects]
        errs_u = [d["uncorrected"] for d in defects]
        orders_c = [math.log2(e1 / e2) for e1, e2 in zip(errs_c, errs_c[1:])]
        orders_u = [math.log2(e1 / e2) for e1, e2 in zip(errs_u, errs_u[1:])]
        assert min(orders_c) >= 1.8
        for o in orders_u:
            assert o == pytest.approx(2.0 - alpha, abs=0.25)
        assert errs_c[-1] < errs_u[-1]


class TestEscapeStructure:
    def test_duality_and_range(self):
        g = build_grid(0.0, 5.0, 0.01)
        n = NoiseParams(a=0.5, epsilon=0.5, alpha=1.5)
        pl = escape_probability(g, TUMOR, n, EscapeTarget.LEFT_EXTINCTION)
        pr = escape_probability(g, TUMOR, n, EscapeTarget.RIGHT_MALIGNANT)
        assert np.max(np.abs(pl.interior + pr.interior - 1.0)) <= 1e-10
        assert pl.interior.min() >= -1e-8 and pl.interior.max() <= 1.0 + 1e-8

    def test_dirichlet_data_per_target(self):
        g = build_grid(0.0, 5.0, 0.05)
        n = NoiseParams(a=0.0, epsilon=0.3, alpha=1.0)
        pl = escape_probability(g, TUMOR, n, EscapeTarget.LEFT_EXTINCTION)
        pr = escape_probability(g, TUMOR, n, EscapeTarget.RIGHT_MALIGNANT)
        assert (pl.value_at_c, pl.value_at_d) == (1.0, 0.0)
        assert (pr.value_at_c, pr.value_at_d) == (0.0, 1.0)
        assert pl.values()[0] == 1.0 and pl.values()[-1] == 0.0

    def test_tags(self):
        g = build_grid(-1.0, 1.0, 0.1)
        n = NoiseParams(a=1.0, epsilon=0.0, alpha=1.0)
        assert mean_exit_time(g, zero_drift, n).tag == "mean-exit-time"
        assert escape_probability(
            g, zero_drift, n, EscapeTarget.LEFT_EXTINCTION).tag == "escape-probability-left"
        assert escape_probability(
            g, zero_drift, n, EscapeTarget.RIGHT_MALIGNANT).tag == "escape-probability-right"


class TestAssembly:
    def test_sink_and_boundary_weight_signs(self):
        # sinks are stored as positive magnitudes and land on the diagonal
        # with a minus sign; boundary-node weights are quadrature weights
        g = build_grid(0.0, 5.0, 0.05)
        op = assemble_operator(g, TUMOR, NoiseParams(a=0.2, epsilon=0.4, alpha=1.2))
        assert np.all(op.sink_left > 0.0) and np.all(op.sink_right > 0.0)
        assert np.all(op.w_left >= 0.0) and np.all(op.w_right >= 0.0)
        assert np.all(np.diag(op.matrix) < 0.0)

    def test_operator_kills_constants(self):
        # row sums plus boundary weights must balance the tail sink, so a
        # constant field sees zero net action
        g = build_grid(0.0, 5.0, 0.01)
        op = assemble_operator(g, TUMOR, NoiseParams(a=0.5, epsilon=0.5, alpha=1.5))
        ones = np.ones(g.n)
        action = op.matrix @ ones + op.w_left + op.w_right
        assert np.max(np.abs(action + op.sink_left + op.sink_right)) <= 1e-10

    def test_met_rhs_is_minus_one(self):
        g = build_grid(-1.0, 1.0, 0.25)
        op = assemble_operator(g, zero_drift, NoiseParams(a=1.0, epsilon=0.0, alpha=1.0))
        rhs = met_rhs(op)
        assert rhs.shape == (g.n,)
        assert np.all(rhs == -1.0)

    def test_escape_rhs_nonpositive(self):
        # rhs is minus the target-side outflow weights, so it cannot be > 0
        g = build_grid(-1.0, 1.0, 0.1)
        op = assemble_operator(g, zero_drift, NoiseParams(a=0.0, epsilon=1.0, alpha=1.2))
        for target in EscapeTarget:
            assert np.all(escape_rhs(op, target) <= 0.0)

    def test_reflection_antisymmetry_of_weights(self):
        g = build_grid(-1.0, 1.0, 0.05)
        op = assemble_operator(g, zero_drift, NoiseParams(a=0.3, epsilon=0.4, alpha=1.5))
        assert np.max(np.abs(op.matrix - op.matrix[::-1, ::-1])) == 0.0
        assert np.max(np.abs(op.w_left - op.w_right[::-1])) == 0.0


class TestSolveDense:
    def test_singular_matrix_reported_with_pivot(self):
        g = build_grid(-1.0, 1.0, 0.5)
        m = np.array([[1.0, 2.0, 3.0],
                      [2.0, 4.0, 6.0],
                      [0.5, 1.0, 2.0]])
        sys = DenseSystem(matrix=m, rhs=np.ones(3), grid=g)
        with pytest.raises(SingularMatrixError) as err:
            solve_dense(sys)
        assert err.value.pivot_index == 1

    def test_malformed_shapes_rejected(self):
        g = build_grid(-1.0, 1.0, 0.5)
        with pytest.raises(ValueError, match="malformed"):
            solve_dense(DenseSystem(matrix=np.ones((3, 3)), rhs=np.ones(2), grid=g))

    def test_healthy_solve_warns_nothing(self):
        import warnings

        g = build_grid(0.0, 5.0, 0.01)
        with warnings.catch_warnings():
            warnings.simplefilter("error", QualityWarning)
            mean_exit_time(g, TUMOR, NoiseParams(a=0.5, epsilon=0.5, alpha=1.5))

    def test_dump_system_round_trip(self, tmp_path):
        g = build_grid(-1.0, 1.0, 0.25)
        op = assemble_operator(g, zero_drift, NoiseParams(a=0.0, epsilon=1.0, alpha=1.0))
        sys = DenseSystem(op.matrix, met_rhs(op), g)
        path = tmp_path / "system.txt"
        dump_system(sys, str(path))
        rows = [ln for ln in path.read_text().splitlines() if ln and not ln.startswith("#")]
        assert len(rows) == g.n
        first = np.array([float(tok) for tok in rows[0].split()])
        assert first.size == g.n + 1  # row of A plus the rhs entry
        assert np.array_equal(first[:-1], sys.matrix[0])  # 17 digits round-trip


class TestSolutionField:
    def test_value_at_picks_nearest_node(self):
        g = build_grid(0.0, 5.0, 0.5)
        n = NoiseParams(a=0.5, epsilon=0.2, alpha=1.1)
        u = mean_exit_time(g, TUMOR, n)
        assert u.value_at(2.5) == u.interior[4]
        assert u.value_at(2.49) == u.interior[4]
        assert u.value_at(0.0) == 0.0

    def test_value_at_outside_rejected(self):
        g = build_grid(0.0, 5.0, 0.5)
        u = mean_exit_time(g, TUMOR, NoiseParams(a=0.5, epsilon=0.2, alpha=1.1))
        with pytest.raises(ValueError, match="outside"):
            u.value_at(5.3)

    def test_values_concatenates_endpoints(self):
        g = build_grid(-1.0, 1.0, 0.25)
        u = mean_exit_time(g, zero_drift, NoiseParams(a=1.0, epsilon=0.0, alpha=1.0))
        vals = u.values()
        assert vals.shape == (g.n + 2,)
        assert vals[0] == 0.0 and vals[-1] == 0.0


class TestObservedOrder:
    def test_matches_expected_band_on_tumor_problem(self):
        n = NoiseParams(a=0.5, epsilon=0.5, alpha=1.5)
        fields = [mean_exit_time(build_grid(0.0, 5.0, h), TUMOR, n)
                  for h in (0.05, 0.025, 0.0125)]
        est = observed_order(*fields, probe=2.5)
        assert not est.degenerate
        assert 1.7 <= est.value <= 2.3

    def test_identical_fields_flagged_degenerate(self):
        n = NoiseParams(a=1.0, epsilon=0.0, alpha=1.0)
        # the Gaussian parabola is exact on every grid: differences vanish
        fields = [mean_exit_time(build_grid(-1.0, 1.0, h), zero_drift, n)
                  for h in (0.2, 0.1, 0.05)]
        est = observed_order(*fields, probe=0.0)
        assert est.degenerate
        assert "converged" in str(est)

    def test_non_halving_grids_rejected(self):
        n = NoiseParams(a=1.0, epsilon=0.0, alpha=1.0)
        fields = [mean_exit_time(build_grid(-1.0, 1.0, h), zero_drift, n)
                  for h in (0.2, 0.1, 0.025)]
        with pytest.raises(ValueError, match="halve"):
            observed_order(*fields, probe=0.0)
