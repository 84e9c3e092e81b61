import numpy as np
import pytest

from dantzig.bench import oracle_instance
from dantzig.core import from_design, resolve_lambda, unit_scaled
from dantzig.fpsolver import (
    IterationTrace,
    check_stop,
    effective_norm,
    estimate_support,
    iterate_change,
    lstsq_min_norm,
    relative_change,
    solve,
    stage1,
    stage2,
    support_fingerprint,
)
from dantzig.linop import DantzigOperator, apply_A, apply_At
from dantzig.oracle import lp_reference_solve
from dantzig.prox import residual_prox, soft_threshold
from shared.errors import EmptySupportError, StepSizeTooLargeError
from shared.schemas import Method, Scheme, SolverConfig, Termination
from tests.helpers import tight_config


def make_trace(changes, supports):
    trace = IterationTrace()
    for change, support in zip(changes, supports):
        beta = np.zeros(6)
        beta[list(support)] = 1.0
        trace.record(change, support_fingerprint(beta))
    return trace


# Критерии остановки

def test_stop_on_relative_change():
    cfg = SolverConfig(alpha=1.0, epsilon=1e-4, eta=5)
    trace = make_trace([0.5, 0.1, 5e-5], [{0}, {1}, {2}])
    assert check_stop(trace, cfg) is Termination.REL_CHANGE


def test_relative_change_boundary_is_excluded():
    cfg = SolverConfig(alpha=1.0, epsilon=1e-4, eta=5)
    assert check_stop(make_trace([1e-4], [{0}]), cfg) is None
    assert check_stop(make_trace([0.99999e-4], [{0}]), cfg) is Termination.REL_CHANGE


def test_stop_on_support_stationary():
    cfg = SolverConfig(alpha=1.0, epsilon=1e-4, eta=5)
    supports = [{3}] + [{0, 2}] * 6
    trace = make_trace([1.0] * 7, supports)
    assert check_stop(trace, cfg) is Termination.SUPPORT_STATIONARY

    short = make_trace([1.0] * 6, [{3}] + [{0, 2}] * 5)
    assert check_stop(short, cfg) is None


def test_relative_change_checked_first():
    cfg = SolverConfig(alpha=1.0, epsilon=1e-4, eta=1)
    trace = make_trace([1.0, 1e-6], [{1}, {1}])
    assert check_stop(trace, cfg) is Termination.REL_CHANGE


def test_continue_when_no_criterion():
    cfg = SolverConfig(alpha=1.0, epsilon=1e-4, eta=5)
    trace = make_trace([0.3, 0.2, 0.1], [{0}, {0}, {1}])
    assert check_stop(trace, cfg) is None


def test_empty_trace():
    with pytest.raises(ValueError):
        check_stop(IterationTrace(), SolverConfig(alpha=1.0))


def test_relative_change_zero_base():
    assert relative_change(np.array([3.0, 4.0]), np.zeros(2)) == 5.0
    assert relative_change(np.array([2.0, 0.0]), np.array([1.0, 0.0])) == 1.0


def test_iterate_change_sees_moving_tau():
    beta = np.array([1.0, -2.0])
    tau = np.array([0.5, 0.0])
    assert iterate_change(beta, beta, tau * 1.5, tau) == pytest.approx(0.5)
    assert iterate_change(beta * 1.25, beta, tau, tau) == pytest.approx(0.25)
    assert iterate_change(beta, beta, tau, tau) == 0.0


def test_support_fingerprint():
    assert support_fingerprint(np.array([0.0, 1.0, -2.0])) == support_fingerprint(np.array([0.0, 5.0, 3.0]))
    assert support_fingerprint(np.array([1.0, 0.0])) != support_fingerprint(np.array([0.0, 1.0]))


# Stage-I

@pytest.mark.parametrize("scheme", [Scheme.TAU_FIRST, Scheme.BETA_FIRST])
def test_identity_design_fixed_point(identity_problem, scheme):
    op = DantzigOperator(identity_problem)
    beta, _, trace = stage1(op, tight_config(op.norm_estimate, scheme))
    assert np.max(np.abs(beta - [0.5, 0.0, 0.0, 0.0])) <= 1e-4
    assert trace.termination is Termination.REL_CHANGE


def test_zero_data_stops_immediately():
    problem = unit_scaled(np.eye(4), np.zeros(4), 0.3)
    result = solve(problem, SolverConfig(alpha=0.2))
    assert result.iterations == 1
    assert result.termination is Termination.REL_CHANGE
    assert not result.beta_raw.any()
    assert not result.tau.any()
    assert result.empty_support
    assert not result.beta_hat.any()


def test_step_size_validated(identity_problem):
    op = DantzigOperator(identity_problem)
    with pytest.raises(StepSizeTooLargeError):
        stage1(op, SolverConfig(alpha=1.0, lam=1.0))


def test_max_iters_termination(small_problems):
    op = DantzigOperator(small_problems[0])
    cfg = SolverConfig(alpha=0.2 * op.norm_estimate ** 2, epsilon=1e-300, eta=1000, max_iters=3)
    _, _, trace = stage1(op, cfg)
    assert trace.termination is Termination.MAX_ITERS
    assert len(trace) == 3


@pytest.mark.parametrize("scheme", [Scheme.TAU_FIRST, Scheme.BETA_FIRST])
def test_matches_lp_oracle(small_problems, scheme):
    for problem in small_problems:
        op = DantzigOperator(problem)
        result = solve(problem, tight_config(op.norm_estimate, scheme), op=op)
        _, objective = lp_reference_solve(problem)
        assert np.abs(result.beta_raw).sum() == pytest.approx(objective, abs=1e-4)
        assert result.feasibility_violation <= 1e-6


@pytest.mark.parametrize("scheme", [Scheme.TAU_FIRST, Scheme.BETA_FIRST])
def test_stalled_beta_does_not_stop_early(scheme):
    # beta почти не меняется, пока tau ещё движется к неподвижной точке
    problem = oracle_instance(12, 8, 0.2, 0.05, 3)
    op = DantzigOperator(problem)
    result = solve(problem, tight_config(op.norm_estimate, scheme), op=op)
    _, objective = lp_reference_solve(problem)
    assert result.termination is Termination.REL_CHANGE
    assert np.abs(result.beta_raw).sum() == pytest.approx(objective, abs=1e-4)
    assert result.feasibility_violation <= 1e-6


@pytest.mark.parametrize("scheme", [Scheme.TAU_FIRST, Scheme.BETA_FIRST])
def test_matches_lp_oracle_on_hundred_instances(scheme):
    for seed in range(100):
        problem = oracle_instance(12, 8, 0.2, 0.05, seed)
        op = DantzigOperator(problem)
        result = solve(problem, tight_config(op.norm_estimate, scheme), op=op)
        _, objective = lp_reference_solve(problem)
        assert abs(np.abs(result.beta_raw).sum() - objective) <= 1e-4, seed
        assert result.feasibility_violation <= 1e-6, seed


def test_schemes_agree(small_problems):
    for problem in small_problems[:3]:
        op = DantzigOperator(problem)
        tau_first = solve(problem, tight_config(op.norm_estimate, Scheme.TAU_FIRST), op=op)
        beta_first = solve(problem, tight_config(op.norm_estimate, Scheme.BETA_FIRST), op=op)
        assert np.abs(tau_first.beta_raw).sum() == pytest.approx(np.abs(beta_first.beta_raw).sum(), abs=1e-4)


def test_fixed_point_residuals(small_problems):
    for problem in small_problems:
        op = DantzigOperator(problem)
        cfg = tight_config(op.norm_estimate)
        beta, tau, trace = stage1(op, cfg)
        assert trace.termination is Termination.REL_CHANGE

        lam = resolve_lambda(cfg, effective_norm(op))
        beta_residual = beta - soft_threshold(beta - (lam / cfg.alpha) * apply_At(op, tau), 1.0 / cfg.alpha)
        tau_residual = tau - residual_prox(apply_A(op, beta) + tau, op.b, problem.delta)
        assert np.max(np.abs(beta_residual)) <= 1e-6 * (1 + np.max(np.abs(beta)))
        assert np.max(np.abs(tau_residual)) <= 1e-6 * (1 + np.max(np.abs(tau)))


def test_non_unit_scaling_matches_oracle(rng):
    X = rng.standard_normal((12, 8)) * np.array([1.0, 2.0, 0.5, 3.0, 1.0, 1.5, 0.7, 2.5])
    y = X @ np.array([1.5, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, 0.0]) + 0.05 * rng.standard_normal(12)
    problem = from_design(X, y, 0.2)
    op = DantzigOperator(problem)
    result = solve(problem, tight_config(op.norm_estimate), op=op)
    _, objective = lp_reference_solve(problem)
    assert np.abs(result.beta_raw).sum() == pytest.approx(objective, abs=1e-4)


def test_deterministic(small_problems):
    problem = small_problems[1]
    first = solve(problem, SolverConfig(alpha=1.0))
    second = solve(problem, SolverConfig(alpha=1.0))
    assert np.array_equal(first.beta_raw, second.beta_raw)
    assert np.array_equal(first.beta_hat, second.beta_hat)
    assert first.iterations == second.iterations


# Stage-II

def test_estimate_support():
    assert list(estimate_support(np.array([0.9, 1e-6, -0.4]), 0.1)) == [0, 2]
    assert list(estimate_support(np.array([0.0, 1e-300, -0.4]), 0.0)) == [1, 2]
    with pytest.raises(EmptySupportError):
        estimate_support(np.zeros(3), 0.1)


def test_stage2_identity_debias(identity_problem):
    beta_hat = stage2(identity_problem, np.array([0.5, 0.0, 0.0, 0.0]), 0.1)
    assert np.allclose(beta_hat, [1.0, 0.0, 0.0, 0.0], atol=1e-14)


def test_stage2_square_invertible(rng):
    X = rng.standard_normal((5, 5)) + 5 * np.eye(5)
    y = rng.standard_normal(5)
    beta_hat = stage2(from_design(X, y, 0.1), np.ones(5), 0.1)
    assert np.allclose(beta_hat, np.linalg.solve(X, y), atol=1e-10)


def test_stage2_normal_equations(rng):
    X = rng.standard_normal((38, 20))
    y = rng.standard_normal(38)
    beta_inf = np.zeros(20)
    support = [1, 3, 4, 7, 9, 11, 12, 15, 17, 19]
    beta_inf[support] = 1.0
    beta_hat = stage2(from_design(X, y, 0.1), beta_inf, 0.5)

    X_support = X[:, support]
    expected = np.linalg.solve(X_support.T @ X_support, X_support.T @ y)
    assert np.allclose(beta_hat[support], expected, atol=1e-8)
    off = np.setdiff1d(np.arange(20), support)
    assert np.array_equal(beta_hat[off], np.zeros(off.size))


def test_lstsq_min_norm_rank_deficient(rng):
    base = rng.standard_normal((10, 3))
    A = np.column_stack([base, base[:, 0], base[:, 1] + base[:, 2]])
    y = rng.standard_normal(10)
    assert np.allclose(lstsq_min_norm(A, y), np.linalg.pinv(A) @ y, atol=1e-10)


def test_lstsq_zero_matrix():
    assert np.array_equal(lstsq_min_norm(np.zeros((4, 2)), np.ones(4)), np.zeros(2))


# Полный алгоритм

def test_postprocess_disabled_passthrough(small_problems):
    result = solve(small_problems[0], SolverConfig(alpha=1.0, postprocess=False))
    assert np.array_equal(result.beta_hat, result.beta_raw)


def test_support_subset_of_estimated_set(small_problems):
    for problem in small_problems:
        result = solve(problem, SolverConfig(alpha=1.0, tol=0.05))
        if result.empty_support:
            continue
        nonzero = set(np.flatnonzero(result.beta_hat))
        assert nonzero <= set(result.support)


def test_summary_fields(identity_problem):
    result = solve(identity_problem, SolverConfig(alpha=0.2))
    summary = result.summary()
    assert summary["method"] == Method.FP.value
    assert summary["iterations"] == result.iterations
    assert summary["l1_norm"] == pytest.approx(np.abs(result.beta_hat).sum())
    assert set(summary) >= {"seconds", "termination", "feasibility_violation"}
