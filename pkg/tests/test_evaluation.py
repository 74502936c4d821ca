import numpy as np
import pytest

from sipsolve.evaluation import (
    BoundInputs,
    classification_metrics,
    directional_derivative_check,
    empirical_risk,
    estimate_constants,
    excess_risk,
    gradient_oracle,
    kfold_cv,
    mse_function,
    predict_labels,
    replicate_stats,
    theorem_bound,
)
from sipsolve.grids import DiscreteFn, make_uniform_grid
from sipsolve.losses import LossKind
from sipsolve.operators import (
    Sample,
    adjoint_row,
    deconv_problem,
    flr_problem,
    forward,
)
from sipsolve.solvers import FixedInvSqrtN, InverseSqrt, SolverConfig
from sipsolve.synthgen import FlrGenConfig, gen_flr, gen_flr_classification


GRID = make_uniform_grid(0, 1, 1000)
PROBLEM = flr_problem(LossKind.SQUARED, GRID)


def constant_path(value=1.0, n=100):
    grid = make_uniform_grid(0, 1, n)
    return DiscreteFn(grid, np.full(n, value))


class TestMse:
    def test_identical(self):
        f = DiscreteFn(GRID, np.sin(GRID.points))
        assert mse_function(f, f) == 0.0

    def test_unit_offset(self):
        f = DiscreteFn(GRID, np.sin(GRID.points))
        g = DiscreteFn(GRID, f.values + 1.0)
        assert mse_function(f, g) == pytest.approx(1.0)

    def test_zero_vs_sine(self):
        truth = DiscreteFn(GRID, np.sin(4 * np.pi * GRID.points))
        assert mse_function(DiscreteFn.zeros(GRID), truth) == pytest.approx(0.5, abs=0.01)

    def test_grid_mismatch(self):
        with pytest.raises(ValueError, match="grid mismatch"):
            mse_function(DiscreteFn.zeros(GRID),
                         DiscreteFn.zeros(make_uniform_grid(0, 1, 10)))


class TestEmpiricalRisk:
    def test_truth_with_zero_noise(self):
        samples, f_true, _ = gen_flr(FlrGenConfig(n_samples=30, fine_n=200,
                                                  obs_n=200, nsr=0.0, seed=1))
        problem = flr_problem(LossKind.SQUARED, f_true.grid)
        assert empirical_risk(problem, f_true, samples) == pytest.approx(0.0, abs=1e-28)

    def test_zero_function_formula(self):
        samples, _, _ = gen_flr(FlrGenConfig(n_samples=30, fine_n=200, obs_n=100, seed=2))
        problem = flr_problem(LossKind.SQUARED, make_uniform_grid(0, 1, 200))
        risk = empirical_risk(problem, DiscreteFn.zeros(problem.w_grid), samples)
        assert risk == pytest.approx(np.mean([0.5 * s.y**2 for s in samples]), rel=1e-14)

    def test_logistic_zero_function_is_log_two(self):
        samples, _ = gen_flr_classification(
            FlrGenConfig(n_samples=40, fine_n=100, obs_n=50, seed=3)
        )
        problem = flr_problem(LossKind.LOGISTIC, make_uniform_grid(0, 1, 100))
        risk = empirical_risk(problem, DiscreteFn.zeros(problem.w_grid), samples)
        assert risk == pytest.approx(np.log(2), rel=1e-14)

    def test_empty_input(self):
        with pytest.raises(ValueError, match="at least one"):
            empirical_risk(PROBLEM, DiscreteFn.zeros(GRID), [])

    def test_convex_along_segments(self):
        rng = np.random.default_rng(4)
        samples, _, _ = gen_flr(FlrGenConfig(n_samples=50, fine_n=150, obs_n=50, seed=5))
        problem = flr_problem(LossKind.SQUARED, make_uniform_grid(0, 1, 150))
        f = DiscreteFn(problem.w_grid, rng.normal(size=150))
        g = DiscreteFn(problem.w_grid, rng.normal(size=150))
        rf = empirical_risk(problem, f, samples)
        rg = empirical_risk(problem, g, samples)
        for lam in np.linspace(0, 1, 11):
            mix = DiscreteFn(problem.w_grid, lam * f.values + (1 - lam) * g.values)
            assert empirical_risk(problem, mix, samples) <= lam * rf + (1 - lam) * rg + 1e-10


class TestExcessRisk:
    def test_zero_at_truth(self):
        samples, f_true, _ = gen_flr(FlrGenConfig(n_samples=20, fine_n=100,
                                                  obs_n=100, seed=6))
        problem = flr_problem(LossKind.SQUARED, f_true.grid)
        assert excess_risk(problem, f_true, f_true, samples) == 0.0

    def test_constant_offset_closed_form(self):
        """With x = 1 paths and no noise the gap is half the squared shift."""
        f_true = DiscreteFn(GRID, np.sin(4 * np.pi * GRID.points))
        x = constant_path()
        samples = [Sample(x, forward(PROBLEM, f_true, x))] * 5
        c = 0.8
        shifted = DiscreteFn(GRID, f_true.values + c)
        shift_of_forward = c * GRID.spacing * (GRID.n - 1)  # = c here
        expected = 0.5 * shift_of_forward**2
        assert excess_risk(PROBLEM, shifted, f_true, samples) == pytest.approx(
            expected, rel=1e-12
        )

    def test_nonnegative_for_large_eval(self):
        rng = np.random.default_rng(7)
        samples, f_true, _ = gen_flr(FlrGenConfig(n_samples=4000, seed=8))
        problem = flr_problem(LossKind.SQUARED, f_true.grid)
        f_hat = DiscreteFn(f_true.grid, f_true.values + 0.3 * rng.normal(size=1000))
        assert excess_risk(problem, f_hat, f_true, samples) > 0.0


class TestGradientOracle:
    def test_stationary_at_truth(self):
        samples, f_true, _ = gen_flr(FlrGenConfig(n_samples=50, fine_n=200,
                                                  obs_n=200, nsr=0.0, seed=9))
        problem = flr_problem(LossKind.SQUARED, f_true.grid)
        g = gradient_oracle(problem, f_true, samples)
        np.testing.assert_allclose(g.values, 0.0, atol=1e-15)

    def test_deterministic_constant_case(self):
        samples = [Sample(constant_path(), 2.0)] * 7
        g = gradient_oracle(PROBLEM, DiscreteFn.zeros(GRID), samples)
        np.testing.assert_allclose(g.values, -2.0, rtol=1e-14)


class TestDirectionalDerivative:
    def test_zero_direction(self):
        samples, _, _ = gen_flr(FlrGenConfig(n_samples=20, fine_n=100, obs_n=50, seed=10))
        problem = flr_problem(LossKind.SQUARED, make_uniform_grid(0, 1, 100))
        f = DiscreteFn(problem.w_grid, np.sin(problem.w_grid.points))
        analytic, numeric = directional_derivative_check(
            problem, f, DiscreteFn.zeros(problem.w_grid), samples, 1e-4
        )
        assert analytic == 0.0
        assert numeric == 0.0

    @pytest.mark.parametrize("loss", [LossKind.SQUARED, LossKind.LOGISTIC])
    def test_analytic_matches_numeric(self, loss):
        rng = np.random.default_rng(11)
        cfg = FlrGenConfig(n_samples=500, fine_n=200, obs_n=50, seed=12)
        if loss is LossKind.SQUARED:
            samples, _, _ = gen_flr(cfg)
        else:
            samples, _ = gen_flr_classification(cfg)
        problem = flr_problem(loss, make_uniform_grid(0, 1, 200))
        w = problem.w_grid.points
        f = DiscreteFn(problem.w_grid, rng.normal() * np.sin(np.pi * w))
        g = DiscreteFn(problem.w_grid, rng.normal() * np.cos(2 * np.pi * w))
        analytic, numeric = directional_derivative_check(problem, f, g, samples, 1e-4)
        assert abs(analytic - numeric) / max(abs(analytic), abs(numeric)) < 1e-5


class TestTheoremBound:
    def test_degenerate_zero(self):
        bound = theorem_bound(BoundInputs(D=0.0, C=1.0, EY2=0.0, opnorm2=1.0,
                                          n=10, schedule=InverseSqrt(1.0)))
        assert bound == 0.0

    def test_direct_substitution(self):
        # n=1, alpha_1=1, D=1, M = C*(EY2 + opnorm2*D^2) = 1 -> 0.5 + 1
        bound = theorem_bound(BoundInputs(D=1.0, C=1.0, EY2=1.0, opnorm2=0.0,
                                          n=1, schedule=InverseSqrt(1.0)))
        assert bound == pytest.approx(1.5)

    def test_fixed_schedule_scales_as_inverse_sqrt_n(self):
        def bound_at(n):
            return theorem_bound(BoundInputs(D=1.0, C=1.0, EY2=1.0, opnorm2=1.0,
                                             n=n, schedule=FixedInvSqrtN(0.5, n)))
        assert bound_at(400) / bound_at(100) == pytest.approx(0.5, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            BoundInputs(D=-1.0, C=1.0, EY2=1.0, opnorm2=1.0, n=1,
                        schedule=InverseSqrt(1.0))


class TestEstimateConstants:
    def test_deconv_kernel_constant(self):
        problem = deconv_problem(LossKind.SQUARED, make_uniform_grid(-10, 10, 2001))
        samples = [Sample(10.0, 0.5), Sample(0.0, 1.0)]
        inputs = estimate_constants(problem, samples, 2.0, InverseSqrt(1.0))
        assert inputs.C == pytest.approx(20.0, abs=0.05)
        assert inputs.EY2 == pytest.approx(np.mean([0.25, 1.0]))
        assert inputs.n == 2

    def test_flr_constant_path_kernel_norm(self):
        samples = [Sample(constant_path(), 1.0)]
        inputs = estimate_constants(PROBLEM, samples, 2.0, InverseSqrt(1.0))
        assert inputs.C == pytest.approx(1.0, abs=2e-3)

    def test_power_iteration_matches_dense_eigenvalue(self):
        """Power iteration agrees with the dense normal-operator spectrum."""
        samples, _, _ = gen_flr(FlrGenConfig(n_samples=40, fine_n=120, obs_n=60, seed=13))
        problem = flr_problem(LossKind.SQUARED, make_uniform_grid(0, 1, 120))
        inputs = estimate_constants(problem, samples, 2.0, InverseSqrt(1.0),
                                    power_iters=60)
        spacing = problem.w_grid.spacing
        rows = np.array([adjoint_row(problem, s.x) for s in samples])
        weighted = rows.copy()
        weighted[:, -1] = 0.0
        dense = rows.T @ (weighted * spacing) / len(samples)
        top = np.max(np.real(np.linalg.eigvals(dense)))
        assert inputs.opnorm2 == pytest.approx(top, rel=0.01)

    def test_empty_samples(self):
        with pytest.raises(ValueError, match="at least one"):
            estimate_constants(PROBLEM, [], 1.0, InverseSqrt(1.0))


class TestReplicateStats:
    def test_constant(self):
        stats = replicate_stats([1.0, 1.0, 1.0])
        assert (stats.mean, stats.sd) == (1.0, 0.0)

    def test_two_values(self):
        stats = replicate_stats([0.0, 2.0])
        assert stats.mean == 1.0
        assert stats.sd == pytest.approx(np.sqrt(2))

    def test_order_invariant(self):
        a = replicate_stats([3.0, 1.0, 2.0])
        b = replicate_stats([1.0, 2.0, 3.0])
        assert (a.mean, a.sd) == (b.mean, b.sd)

    def test_too_few(self):
        with pytest.raises(ValueError, match="two values"):
            replicate_stats([1.0])


class TestClassificationMetrics:
    def test_perfect(self):
        labels = np.array([1.0, -1.0, 1.0, -1.0])
        assert classification_metrics(labels, labels) == (1.0, 1.0)

    def test_constant_predictions_balanced_labels(self):
        preds = np.ones(100)
        labels = np.concatenate([np.ones(50), -np.ones(50)])
        acc, kappa = classification_metrics(preds, labels)
        assert acc == 0.5
        assert kappa == 0.0

    def test_inverted_balanced(self):
        labels = np.concatenate([np.ones(50), -np.ones(50)])
        acc, kappa = classification_metrics(-labels, labels)
        assert acc == 0.0
        assert kappa == -1.0

    def test_kappa_range(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            preds = rng.choice([-1.0, 1.0], size=30)
            labels = rng.choice([-1.0, 1.0], size=30)
            acc, kappa = classification_metrics(preds, labels)
            assert 0.0 <= acc <= 1.0
            assert -1.0 <= kappa <= 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="equal length"):
            classification_metrics(np.ones(3), np.ones(4))

    def test_bad_values(self):
        with pytest.raises(ValueError, match="-1 or \\+1"):
            classification_metrics(np.array([0.5]), np.array([1.0]))


class TestKfoldCv:
    def test_fold_sizes(self):
        samples, _ = gen_flr_classification(
            FlrGenConfig(n_samples=300, fine_n=100, obs_n=50, seed=15)
        )
        problem = flr_problem(LossKind.LOGISTIC, make_uniform_grid(0, 1, 100))
        result = kfold_cv(problem, samples, 3,
                          SolverConfig(schedule=InverseSqrt(1.0)), seed=1)
        assert len(result.fold_metrics) == 3

    def test_constant_labels_give_zero_kappa(self):
        """Against a constant-label fold, agreement is pure chance: kappa = 0.

        (A zero-intercept functional classifier cannot predict the majority
        class on centered covariates, so accuracy stays near the positive
        prediction rate; kappa is identically zero.)
        """
        samples, _ = gen_flr_classification(
            FlrGenConfig(n_samples=120, fine_n=100, obs_n=50, seed=16)
        )
        all_pos = [Sample(s.x, 1.0) for s in samples]
        problem = flr_problem(LossKind.LOGISTIC, make_uniform_grid(0, 1, 100))
        result = kfold_cv(problem, all_pos, 3,
                          SolverConfig(schedule=InverseSqrt(2.0)), seed=2)
        for acc, kappa in result.fold_metrics:
            assert kappa == 0.0
            assert 0.0 <= acc <= 1.0

    def test_deterministic_folds(self):
        samples, _ = gen_flr_classification(
            FlrGenConfig(n_samples=90, fine_n=100, obs_n=50, seed=17)
        )
        problem = flr_problem(LossKind.LOGISTIC, make_uniform_grid(0, 1, 100))
        config = SolverConfig(schedule=InverseSqrt(1.0))
        a = kfold_cv(problem, samples, 3, config, seed=3)
        b = kfold_cv(problem, samples, 3, config, seed=3)
        assert a.fold_metrics == b.fold_metrics

    def test_invalid_k(self):
        samples, _ = gen_flr_classification(
            FlrGenConfig(n_samples=10, fine_n=50, obs_n=50, seed=18)
        )
        problem = flr_problem(LossKind.LOGISTIC, make_uniform_grid(0, 1, 50))
        config = SolverConfig(schedule=InverseSqrt(1.0))
        with pytest.raises(ValueError, match="invalid k"):
            kfold_cv(problem, samples, 1, config, seed=4)
        with pytest.raises(ValueError, match="invalid k"):
            kfold_cv(problem, samples, 11, config, seed=4)


def test_predict_labels_tie_goes_positive():
    f = DiscreteFn.zeros(GRID)
    labels = predict_labels(PROBLEM, f, [Sample(constant_path(), 1.0)])
    np.testing.assert_array_equal(labels, [1.0])
