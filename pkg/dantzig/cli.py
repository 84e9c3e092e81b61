"""
Командная строка: solve, bench, classify, oracle-check

Каждая команда при успехе печатает одну строку JSON в stdout,
журнал пишется в stderr. Коды выхода: 0 успех, 1 численный сбой,
2 ошибка входных данных или параметров.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from config import BENCH_CONFIG, CLASSIFY_CONFIG, SOLVER_CONFIG, SUMMARY_SCHEMA_VERSION, get_jobs
from dantzig import bench, classify
from dantzig.core import from_design, unit_scaled
from dantzig.csv_io import FLOAT_FORMAT, read_matrix, read_vector, write_matrix, write_vector
from dantzig.fpsolver import solve
from dantzig.linop import DantzigOperator
from shared.database import store_bench_records
from shared.errors import DimensionMismatchError, NumericalError, UsageError
from shared.logs import get_logger, setup_logging
from shared.schemas import Method, Scheme, SolverConfig, SweepConfig

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2

# Поля моделей конфигурации и флаги, которыми они задаются
FIELD_FLAGS = {
    "delta": "--delta",
    "alpha": "--alpha",
    "lam": "--lambda",
    "lambda": "--lambda",
    "tol": "--tol",
    "epsilon": "--epsilon",
    "eta": "--eta",
    "max_iters": "--max-iters",
    "m_values": "--m-list",
    "sigma_values": "--sigma-list",
    "replicates": "--reps",
    "base_seed": "--seed",
    "methods": "--methods",
    "n_per_m": "--scale",
    "p_per_m": "--scale",
    "s_per_m": "--scale",
    "jobs": "--jobs",
}


def describe_validation_error(error: ValidationError) -> str:
    """Сообщения pydantic с именами флагов вместо имён полей"""
    parts = []
    for item in error.errors():
        field = str(item["loc"][0]) if item["loc"] else ""
        flag = FIELD_FLAGS.get(field, field)
        parts.append(f"{flag}: {item['msg']}" if flag else item["msg"])
    return "; ".join(parts)


def _int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"ожидается список целых через запятую: {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"ожидается список чисел через запятую: {text!r}")


def _method_list(text: str) -> List[Method]:
    try:
        return [Method(item.strip()) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"методы из {{fp, adm, ladm}}: {text!r}")


def _scale(text: str):
    values = _int_list(text)
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"ожидается n,p,s: {text!r}")
    return values


def _emit(command: str, payload: dict):
    print(json.dumps({"schema": SUMMARY_SCHEMA_VERSION, "command": command, **payload}, ensure_ascii=False))


# Команды

def cmd_solve(args) -> int:
    X = read_matrix(args.x)
    y = read_vector(args.y)
    problem = from_design(X, y, args.delta)

    op = DantzigOperator(problem, seed=args.seed)
    alpha = args.alpha if args.alpha is not None else SOLVER_CONFIG["alpha_factor"] * op.norm_estimate ** 2
    cfg = SolverConfig(
        alpha=alpha,
        lam=args.lam,
        tol=args.tol,
        epsilon=args.epsilon,
        eta=args.eta,
        max_iters=args.max_iters,
        scheme=Scheme(args.scheme.replace("-", "_")),
        postprocess=not args.no_postprocess,
    )
    result = solve(problem, cfg, op=op)

    payload = result.summary()
    if args.out:
        payload["out"] = str(write_vector(args.out, result.beta_hat))
    _emit("solve", payload)
    return EXIT_OK


def cmd_bench(args) -> int:
    n_per_m, p_per_m, s_per_m = args.scale or (
        BENCH_CONFIG["n_per_m"], BENCH_CONFIG["p_per_m"], BENCH_CONFIG["s_per_m"]
    )
    cfg = SweepConfig(
        m_values=args.m_list,
        sigma_values=args.sigma_list,
        replicates=args.reps,
        base_seed=args.seed,
        methods=args.methods,
        n_per_m=n_per_m,
        p_per_m=p_per_m,
        s_per_m=s_per_m,
        max_iters=args.max_iters,
        jobs=args.jobs if args.jobs is not None else get_jobs(),
    )
    records = bench.run_sweep(cfg)

    out_dir = Path(args.out_dir)
    raw_path = bench.write_records(records, out_dir / "records.csv")
    aggregate_path = bench.write_aggregates(bench.aggregate(records), out_dir / "aggregate.csv")

    payload = {
        "records": len(records),
        "failed": sum(r.failed for r in records),
        "raw": str(raw_path),
        "aggregate": str(aggregate_path),
    }
    if args.db_url:
        payload["stored"] = store_bench_records(records, args.db_url)
    _emit("bench", payload)
    return EXIT_OK


def _classify_data(args):
    if args.planted:
        return classify.planted_dataset(60, 40, 500, seed=args.seed)
    missing = [flag for flag, value in (("--train-x", args.train_x), ("--train-y", args.train_y),
                                        ("--test-x", args.test_x), ("--test-y", args.test_y)) if not value]
    if missing:
        raise UsageError(f"Не заданы файлы: {', '.join(missing)} (или используйте --planted)")
    train = classify.load_dataset(args.train_x, args.train_y)
    test = classify.load_dataset(args.test_x, args.test_y)
    if train.n_features != test.n_features:
        raise DimensionMismatchError(f"признаков в train {train.n_features}, в test {test.n_features}")
    return train, test


def cmd_classify(args) -> int:
    train, test = _classify_data(args)
    n_top = args.n_top if args.n_top is not None else min(CLASSIFY_CONFIG["n_top"], train.n_features)
    indices = classify.select_top_variance(train, n_top)
    method = Method(args.method)

    # норма X^T X редуцированной матрицы не зависит от delta
    reduced = unit_scaled(train.features[:, indices], train.labels.astype(np.float64), 0.0)
    cfg = classify.classify_solver_config(
        DantzigOperator(reduced).norm_estimate, alpha=args.alpha, tol=args.tol, eta=args.eta,
        epsilon=args.epsilon, max_iters=args.max_iters, postprocess=args.postprocess,
    )

    rows = []
    raw_columns = []
    for delta in args.delta_list:
        beta, result = classify.train_reduced(train, indices, delta, cfg, method)
        y_raw, labels = classify.predict_labels(test.features, beta)
        raw_columns.append(y_raw)
        rows.append({
            "delta": delta,
            "misdiagnoses": classify.misdiagnosis_count(labels, test.labels),
            "iterations": result.iterations,
            "wall_seconds": result.wall_seconds,
        })

    table = pd.DataFrame(rows, columns=["delta", "misdiagnoses", "iterations", "wall_seconds"])
    payload = {"n_top": n_top, "method": method.value, "rows": rows}
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(args.out, index=False, float_format=FLOAT_FORMAT)
        payload["out"] = str(args.out)
    if args.emit_raw:
        payload["raw"] = str(write_matrix(args.emit_raw, np.column_stack(raw_columns)))
    _emit("classify", payload)
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    report = bench.oracle_check(
        args.n, args.p, args.delta, args.seed, args.trials,
        sigma=args.sigma, scheme=Scheme(args.scheme.replace("-", "_")),
    )
    _emit("oracle-check", report)
    if not report["ok"]:
        print(f"seed {report['failed_seed']}: допуски нарушены", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# Разбор аргументов

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dantzig", description="Решатель задачи Dantzig selector")
    parser.add_argument("--log-level", default=None, help="уровень журнала (DEBUG, INFO, ...)")
    parser.add_argument("--log-file", default=None, help="дополнительно писать журнал в файл")
    commands = parser.add_subparsers(dest="command", required=True)

    schemes = ["beta-first", "tau-first"]

    solve_parser = commands.add_parser("solve", help="решить одну задачу")
    solve_parser.add_argument("--x", required=True, help="CSV матрицы X")
    solve_parser.add_argument("--y", required=True, help="CSV вектора y")
    solve_parser.add_argument("--delta", type=float, required=True)
    solve_parser.add_argument("--alpha", type=float, default=None)
    solve_parser.add_argument("--lambda", dest="lam", type=float, default=None)
    solve_parser.add_argument("--tol", type=float, default=SOLVER_CONFIG["tol"])
    solve_parser.add_argument("--epsilon", type=float, default=SOLVER_CONFIG["epsilon"])
    solve_parser.add_argument("--eta", type=int, default=SOLVER_CONFIG["eta"])
    solve_parser.add_argument("--max-iters", type=int, default=SOLVER_CONFIG["max_iters"])
    solve_parser.add_argument("--scheme", choices=schemes, default=SOLVER_CONFIG["scheme"].replace("_", "-"))
    solve_parser.add_argument("--no-postprocess", action="store_true")
    solve_parser.add_argument("--out", default=None, help="CSV для beta_hat")
    solve_parser.add_argument("--seed", type=int, default=0, help="seed степенного метода")
    solve_parser.set_defaults(handler=cmd_solve)

    bench_parser = commands.add_parser("bench", help="прогон на синтетических данных")
    bench_parser.add_argument("--m-list", type=_int_list, default=[1])
    bench_parser.add_argument("--sigma-list", type=_float_list, default=list(BENCH_CONFIG["sigma_values"]))
    bench_parser.add_argument("--reps", type=int, default=BENCH_CONFIG["replicates"])
    bench_parser.add_argument("--seed", type=int, default=BENCH_CONFIG["base_seed"])
    bench_parser.add_argument("--methods", type=_method_list,
                              default=[Method(m) for m in BENCH_CONFIG["methods"]])
    bench_parser.add_argument("--out-dir", required=True)
    bench_parser.add_argument("--scale", type=_scale, default=None, help="n,p,s на единицу m")
    bench_parser.add_argument("--max-iters", type=int, default=SOLVER_CONFIG["max_iters"])
    bench_parser.add_argument("--jobs", type=int, default=None)
    bench_parser.add_argument("--db-url", default=None, help="сохранить записи в БД")
    bench_parser.set_defaults(handler=cmd_bench)

    classify_parser = commands.add_parser("classify", help="классификация на редуцированной задаче")
    classify_parser.add_argument("--train-x")
    classify_parser.add_argument("--train-y")
    classify_parser.add_argument("--test-x")
    classify_parser.add_argument("--test-y")
    classify_parser.add_argument("--planted", action="store_true", help="синтетический набор вместо файлов")
    classify_parser.add_argument("--seed", type=int, default=0)
    classify_parser.add_argument("--n-top", type=int, default=None)
    classify_parser.add_argument("--delta-list", type=_float_list, default=list(CLASSIFY_CONFIG["delta_grid"]))
    classify_parser.add_argument("--method", choices=["fp", "adm"], default="fp")
    classify_parser.add_argument("--postprocess", action="store_true")
    classify_parser.add_argument("--alpha", type=float, default=None)
    classify_parser.add_argument("--tol", type=float, default=CLASSIFY_CONFIG["tol"])
    classify_parser.add_argument("--eta", type=int, default=CLASSIFY_CONFIG["eta"])
    classify_parser.add_argument("--epsilon", type=float, default=CLASSIFY_CONFIG["epsilon"])
    classify_parser.add_argument("--max-iters", type=int, default=SOLVER_CONFIG["max_iters"])
    classify_parser.add_argument("--out", default=None)
    classify_parser.add_argument("--emit-raw", default=None, help="CSV значений y_raw (столбец на delta)")
    classify_parser.set_defaults(handler=cmd_classify)

    oracle_parser = commands.add_parser("oracle-check", help="сверка с LP-оракулом")
    oracle_parser.add_argument("--n", type=int, default=12)
    oracle_parser.add_argument("--p", type=int, default=8)
    oracle_parser.add_argument("--delta", type=float, default=0.2)
    oracle_parser.add_argument("--seed", type=int, default=0)
    oracle_parser.add_argument("--trials", type=int, default=100)
    oracle_parser.add_argument("--sigma", type=float, default=0.05)
    oracle_parser.add_argument("--scheme", choices=schemes, default="tau-first")
    oracle_parser.set_defaults(handler=cmd_oracle_check)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    setup_logging(args.log_level, args.log_file)
    try:
        return args.handler(args)
    except ValidationError as e:
        message = describe_validation_error(e)
        logger.error("Ошибка параметров", command=args.command, error=message)
        print(f"ошибка: {message}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ValueError) as e:
        logger.error("Ошибка входных данных", command=args.command, error=str(e))
        print(f"ошибка: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as e:
        logger.error("Численный сбой", command=args.command, error=str(e))
        print(f"численный сбой: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
