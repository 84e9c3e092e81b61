import math

import numpy as np
import pandas as pd
import pytest

from dantzig import bench
from dantzig.bench import (
    RECORD_COLUMNS,
    accuracy_rho,
    aggregate,
    cell_instance,
    default_solver_params,
    gen_design,
    gen_observations,
    gen_sparse_beta,
    oracle_check,
    read_records,
    run_sweep,
    stationarity_window,
    universal_delta,
    write_aggregates,
    write_records,
)
from shared.errors import (
    DegenerateDenominatorError,
    DimensionMismatchError,
    InvalidDatasetError,
    SizeLimitError,
    UsageError,
)
from shared.schemas import BenchRecord, Method, SweepConfig, Termination

TINY_SWEEP = dict(
    m_values=[1],
    sigma_values=[0.05, 0.1],
    replicates=2,
    base_seed=7,
    methods=[Method.FP, Method.ADM],
    n_per_m=24,
    p_per_m=48,
    s_per_m=3,
    max_iters=2_000,
)


# Генераторы

def test_gen_design_unit_columns():
    X = gen_design(30, 12, 3)
    assert X.shape == (30, 12)
    assert np.allclose(np.linalg.norm(X, axis=0), 1.0, atol=1e-14)
    assert np.array_equal(X, gen_design(30, 12, 3))
    assert not np.array_equal(X, gen_design(30, 12, 4))


def test_gen_sparse_beta():
    beta, support = gen_sparse_beta(100, 7, 11)
    assert support.size == 7
    assert np.all(np.diff(support) > 0)
    assert np.array_equal(np.flatnonzero(beta), support)
    assert np.all(np.abs(beta[support]) >= 1.0)

    again, _ = gen_sparse_beta(100, 7, 11)
    assert np.array_equal(beta, again)

    with pytest.raises(ValueError):
        gen_sparse_beta(5, 6, 0)


def test_gen_sparse_beta_uses_both_signs():
    beta, support = gen_sparse_beta(2000, 400, 5)
    signs = np.sign(beta[support])
    assert (signs > 0).any() and (signs < 0).any()


def test_gen_observations():
    X = gen_design(20, 5, 0)
    beta = np.array([1.0, 0.0, -2.0, 0.0, 0.0])
    assert np.array_equal(gen_observations(X, beta, 0.0, 1), X @ beta)
    noisy = gen_observations(X, beta, 0.1, 1)
    assert np.array_equal(noisy, gen_observations(X, beta, 0.1, 1))
    assert not np.array_equal(noisy, X @ beta)
    with pytest.raises(DimensionMismatchError):
        gen_observations(X, np.ones(4), 0.1, 1)


def test_gen_sparse_beta_magnitude_statistics():
    beta, support = gen_sparse_beta(100_000, 100_000, 21)
    magnitudes = np.abs(beta[support])
    assert magnitudes.mean() == pytest.approx(1.0 + math.sqrt(2.0 / math.pi), abs=0.01)
    assert np.mean(beta[support] > 0) == pytest.approx(0.5, abs=0.01)


@pytest.mark.parametrize("sigma", [0.01, 0.15])
def test_gen_observations_noise_level(sigma):
    X = np.zeros((100_000, 1))
    noise = gen_observations(X, np.zeros(1), sigma, 8)
    assert noise.std() == pytest.approx(sigma, rel=0.02)
    assert abs(noise.mean()) <= 5 * sigma / math.sqrt(noise.size)


def test_generators_at_full_scale():
    X = gen_design(720, 2560, 1)
    beta, support = gen_sparse_beta(2560, 80, 2)
    y = gen_observations(X, beta, 0.05, 3)
    assert X.shape == (720, 2560)
    assert np.allclose(np.linalg.norm(X, axis=0), 1.0, atol=1e-14)
    assert support.size == 80 and np.count_nonzero(beta) == 80
    assert y.shape == (720,)


# Метрики и параметры

def test_accuracy_rho():
    assert accuracy_rho([1.0, 0.0], [1.0, 0.0], 0.5) == 0.0
    # знаменатель min(1, 0.25) + min(0, 0.25) = 0.25
    assert accuracy_rho([1.0, 0.0], [0.0, 0.0], 0.5) == pytest.approx(2.0)
    with pytest.raises(DegenerateDenominatorError):
        accuracy_rho([0.0, 0.0], [1.0, 0.0], 0.1)
    with pytest.raises(DegenerateDenominatorError):
        accuracy_rho([1.0, 0.0], [1.0, 0.0], 0.0)


def test_universal_delta():
    assert universal_delta(0.1, 2560) == pytest.approx(0.1 * math.sqrt(2.0 * math.log(2560)))
    assert universal_delta(1.0, 1) == 0.0


def test_stationarity_window():
    # 4 ln(5) ln(0.05) + 10 отрицательно, поэтому минимум 5
    assert stationarity_window(5.0, 0.05, 50_000) == 5
    assert stationarity_window(100.0, 0.01, 50_000) == math.ceil(4 * math.log(100.0) * math.log(0.01) + 200.0)
    assert stationarity_window(1000.0, 0.01, 100) == 10


def test_default_solver_params():
    cfg, delta = default_solver_params(0.05, 2560, 2.0)
    assert cfg.alpha == pytest.approx(0.8)
    assert cfg.lam == pytest.approx(0.999 * 0.8 / 4.0)
    assert cfg.tol == pytest.approx(0.1)
    assert cfg.epsilon == 1e-4
    assert cfg.eta == stationarity_window(0.8, 0.05, cfg.max_iters)
    assert delta == pytest.approx(universal_delta(0.05, 2560))

    with pytest.raises(ValueError):
        default_solver_params(0.0, 10, 1.0)


# Прогон

def test_cell_instance_shared_across_methods():
    cfg = SweepConfig(**TINY_SWEEP)
    X1, beta1, y1 = cell_instance(cfg, 1, 0, 1)
    X2, beta2, y2 = cell_instance(cfg, 1, 0, 1)
    assert np.array_equal(X1, X2) and np.array_equal(beta1, beta2) and np.array_equal(y1, y2)
    assert X1.shape == (24, 48)
    assert np.count_nonzero(beta1) == 3

    X3, _, _ = cell_instance(cfg, 1, 0, 0)
    assert not np.array_equal(X1, X3)


def test_run_sweep_records():
    cfg = SweepConfig(**TINY_SWEEP)
    records = run_sweep(cfg)
    assert len(records) == 1 * 2 * 2 * 2
    assert records == sorted(records, key=bench.record_sort_key)
    assert {r.method for r in records} == {Method.FP, Method.ADM}
    for record in records:
        assert not record.failed
        assert record.rho_raw >= 0 and record.rho_post >= 0
        assert record.termination in {t.value for t in Termination}


def test_run_sweep_deterministic_except_time():
    cfg = SweepConfig(**TINY_SWEEP)
    first = [r.model_dump(exclude={"wall_seconds"}) for r in run_sweep(cfg)]
    second = [r.model_dump(exclude={"wall_seconds"}) for r in run_sweep(cfg)]
    assert first == second


def test_run_sweep_parallel_matches_serial():
    serial = run_sweep(SweepConfig(**TINY_SWEEP))
    parallel = run_sweep(SweepConfig(**TINY_SWEEP, jobs=2))
    assert [r.model_dump(exclude={"wall_seconds"}) for r in serial] == \
           [r.model_dump(exclude={"wall_seconds"}) for r in parallel]


def test_failed_method_is_recorded(monkeypatch):
    run_method = bench._run_method

    def failing(method, problem, sigma, max_iters):
        if method is Method.ADM:
            raise RuntimeError("сбой")
        return run_method(method, problem, sigma, max_iters)

    monkeypatch.setattr(bench, "_run_method", failing)
    records = run_sweep(SweepConfig(**{**TINY_SWEEP, "replicates": 1}))
    failed = [r for r in records if r.failed]
    assert len(failed) == 2
    assert all(r.method is Method.ADM and r.rho_raw is None and r.iterations is None for r in failed)
    assert all(not r.failed for r in records if r.method is Method.FP)


# CSV и агрегаты

def make_record(method, sigma, replicate, rho, iterations=10, termination="rel_change"):
    return BenchRecord(
        method=method, m=1, sigma=sigma, replicate=replicate, rho_raw=rho, rho_post=rho / 2,
        iterations=iterations, wall_seconds=0.25, feasibility_violation=0.0, termination=termination,
    )


def test_records_csv_round_trip(tmp_path):
    records = [
        make_record(Method.FP, 0.05, 0, 1.0 / 3.0),
        make_record(Method.FP, 0.05, 1, math.pi),
        BenchRecord(method=Method.ADM, m=1, sigma=0.05, replicate=0, termination="failed"),
    ]
    path = write_records(records, tmp_path / "out" / "records.csv")

    header = path.read_text().splitlines()[0]
    assert header.split(",") == RECORD_COLUMNS
    assert read_records(path) == records


def test_read_records_rejects_header(tmp_path):
    path = tmp_path / "bad.csv"
    pd.DataFrame({"method": ["fp"], "m": [1]}).to_csv(path, index=False)
    with pytest.raises(InvalidDatasetError):
        read_records(path)


def test_aggregate_values():
    records = [
        make_record(Method.FP, 0.05, 0, 1.0, iterations=10),
        make_record(Method.FP, 0.05, 1, 3.0, iterations=20),
        make_record(Method.ADM, 0.05, 0, 2.0, iterations=5),
        BenchRecord(method=Method.ADM, m=1, sigma=0.05, replicate=1, termination="failed"),
    ]
    rows = aggregate(records)
    table = {(r.method.value, r.metric): (r.mean, r.std) for r in rows}

    assert table[("fp", "rho_raw")] == pytest.approx((2.0, math.sqrt(2.0)))
    assert table[("fp", "rho_post")] == pytest.approx((1.0, math.sqrt(0.5)))
    assert table[("fp", "iterations")] == pytest.approx((15.0, math.sqrt(50.0)))
    # одна запись: std = 0
    assert table[("adm", "rho_raw")] == (2.0, 0.0)
    assert [r.metric for r in rows[:4]] == ["rho_raw", "rho_post", "iterations", "wall_seconds"]
    assert rows[0].method is Method.ADM


def test_aggregate_empty():
    failed = BenchRecord(method=Method.FP, m=1, sigma=0.05, replicate=0, termination="failed")
    assert aggregate([failed]) == []


def test_write_aggregates(tmp_path):
    rows = aggregate([make_record(Method.FP, 0.1, 0, 1.5)])
    path = write_aggregates(rows, tmp_path / "aggregate.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["method", "m", "sigma", "metric", "mean", "std"]
    assert len(frame) == 4


# Сверка с оракулом

def test_oracle_check_passes():
    report = oracle_check(12, 8, 0.2, seed=0, trials=3)
    assert report["ok"]
    assert report["trials"] == 3
    assert report["failed_seed"] is None
    assert report["max_gap"] <= 1e-4
    assert report["max_violation"] <= 1e-6


def test_oracle_check_reports_failing_seed(monkeypatch):
    monkeypatch.setattr(bench, "lp_reference_solve", lambda problem: (np.zeros(problem.p), -1.0))
    report = oracle_check(12, 8, 0.2, seed=40, trials=5)
    assert not report["ok"]
    assert report["failed_seed"] == 40
    assert report["trials"] == 1


def test_oracle_check_arguments():
    with pytest.raises(UsageError):
        oracle_check(12, 8, 0.2, seed=0, trials=0)
    with pytest.raises(SizeLimitError):
        oracle_check(12, 30, 0.2, seed=0, trials=1)
