"""
Command-line driver.

Reads a JSON run configuration, dispatches the configured task and writes
CSV or JSON records to a file or stdout.

Exit codes: 0 on success, 2 for invalid configuration or input, 3 when a
budget ran out (records computed so far are still written), 1 otherwise.
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from typing import Any, Dict, Iterable, Iterator, List, Optional

from pydantic import ValidationError

from ._logging import LogConfig, configure_logging, get_logger, run_context
from .betashift import sparse_zero_replacement
from .config import ResultRecord, RunConfig
from .exceptions import DimspecError, InternalError, ResourceError
from .pressure import DimensionEnclosure
from .spectrum import (
    beta_curve,
    dimension,
    exhaustion_dimension,
    invert_dimension,
    invert_dimension_markov,
)
from .symbolic import format_word, language, parse_word


logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2
EXIT_BUDGET = 3

CSV_COLUMNS = {
    "dimension": ["h_lo", "h_hi", "depth", "converged"],
    "invert": ["beta", "h_lo", "h_hi", "depth", "converged"],
    "curve": ["beta", "h_lo", "h_hi", "depth", "converged"],
    "markov-invert":
        ["m", "beta", "h_lo", "h_hi", "depth", "converged", "terminal"],
    "exhaust": ["size", "h_lo", "h_hi", "depth", "converged", "error"],
    "pressure": ["t", "depth", "lower", "upper", "method"],
    "language": ["n", "count", "word"],
    "replace": ["result", "positions"],
}


def _number(value: float) -> Any:
    """Floats pass through; infinities become text so JSON stays valid."""
    value = float(value)
    if math.isfinite(value):
        return value
    return "inf" if value > 0 else "-inf"


def _enclosure_fields(enclosure: DimensionEnclosure) -> Dict[str, Any]:
    return {
        "h_lo": _number(enclosure.h_lo),
        "h_hi": _number(enclosure.h_hi),
        "depth": enclosure.depth,
    }


def _enclosure_flags(enclosure: DimensionEnclosure) -> Dict[str, Any]:
    return {
        "converged": enclosure.converged,
        "guard_hits": enclosure.guard_hits,
        "budget_exhausted": enclosure.budget_exhausted,
    }


def _records(config: RunConfig) -> Iterator[ResultRecord]:
    task = config.task
    budgets = config.budgets
    budget = budgets.to_budget()

    if task.name == "replace":
        plan = sparse_zero_replacement(
            parse_word(task.word), task.beta, task.k, task.beta_prime
        )
        yield ResultRecord(
            task=task.name,
            inputs={
                "word": task.word,
                "beta": task.beta,
                "beta_prime": task.beta_prime,
                "k": task.k,
            },
            outputs={
                "result": format_word(plan.result),
                "positions": list(plan.positions),
            }
        )
        return

    if task.name == "exhaust":
        for rung in exhaustion_dimension(
            task.sizes, target_width=budgets.target_width, budget=budget
        ):
            outputs = {"size": rung.size}
            flags = {"converged": False, "error": rung.error}
            if rung.enclosure is not None:
                outputs.update(_enclosure_fields(rung.enclosure))
                outputs["raw_h_lo"] = _number(rung.raw.h_lo)
                flags.update(_enclosure_flags(rung.enclosure))
            flags["budget_exhausted"] = rung.budget_exhausted
            yield ResultRecord(
                task=task.name,
                inputs={"size": rung.size},
                outputs=outputs,
                flags=flags
            )
        return

    sys_spec = config.system.build()
    shift = config.shift.build(sys_spec.size)

    if task.name == "language":
        words = language(shift, task.depth, budgets.max_words)
        yield ResultRecord(
            task=task.name,
            inputs={"n": task.depth},
            outputs={
                "n": task.depth,
                "count": len(words),
                "words": [format_word(word) for word in words],
            }
        )
    elif task.name == "dimension":
        enclosure = dimension(shift, sys_spec, budgets.target_width, budget)
        yield ResultRecord(
            task=task.name,
            inputs={"target_width": budgets.target_width},
            outputs=_enclosure_fields(enclosure),
            flags=_enclosure_flags(enclosure)
        )
    elif task.name == "pressure":
        engine = budget.engine(shift, sys_spec)
        for t in task.t:
            enclosure = engine.enclosure(task.depth, t)
            yield ResultRecord(
                task=task.name,
                inputs={"t": t, "depth": task.depth},
                outputs={
                    "t": t,
                    "depth": enclosure.depth,
                    "lower": _number(enclosure.lower),
                    "upper": _number(enclosure.upper),
                    "method": enclosure.method,
                },
                flags={"guard_hits": engine.guard_hits}
            )
    elif task.name == "curve":
        for beta, enclosure in beta_curve(
            sys_spec, task.beta_lo, task.beta_hi, task.step,
            budgets.target_width, budget
        ):
            yield ResultRecord(
                task=task.name,
                inputs={"beta": beta},
                outputs={"beta": beta, **_enclosure_fields(enclosure)},
                flags=_enclosure_flags(enclosure)
            )
    elif task.name == "invert":
        result = invert_dimension(
            sys_spec, task.d_target, budgets.epsilon, budgets.target_width,
            budget
        )
        yield ResultRecord(
            task=task.name,
            inputs={"d_target": task.d_target, "epsilon": budgets.epsilon},
            outputs={
                "beta": result.beta,
                **_enclosure_fields(result.enclosure)
            },
            flags={
                **_enclosure_flags(result.enclosure),
                "converged": result.converged
            }
        )
    elif task.name == "markov-invert":
        result = invert_dimension_markov(
            shift,
            sys_spec,
            task.d_target,
            budgets.epsilon,
            budgets.target_width,
            budget,
            anchor=task.anchor
        )
        yield ResultRecord(
            task=task.name,
            inputs={"d_target": task.d_target, "epsilon": budgets.epsilon},
            outputs={
                "m": result.m,
                "beta": result.beta,
                **_enclosure_fields(result.enclosure)
            },
            flags={
                **_enclosure_flags(result.enclosure),
                "converged": result.converged,
                "terminal": result.terminal
            }
        )
    else:
        raise InternalError(f"No dispatcher for task {task.name}")


def run(config: RunConfig) -> Iterator[ResultRecord]:
    """
    Execute the configured task, yielding result records in order.

    Raises:
        DimspecError: Subclasses as raised by the library operations
    """
    with run_context(task=config.task.name):
        logger.info("Starting task %s", config.task.name)
        started = time.perf_counter()
        guard_hits = 0
        count = 0
        for record in _records(config):
            if config.output.include_timing:
                record = record.model_copy(
                    update={"wall_time": time.perf_counter() - started}
                )
            guard_hits = max(guard_hits, record.flags.get("guard_hits") or 0)
            count += 1
            yield record
        logger.info(
            "Finished task %s", config.task.name,
            extra={"records": count, "guard_hits": guard_hits}
        )


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, (list, tuple)):
        return ";".join(_cell(item) for item in value)
    return str(value)


def _rows(record: ResultRecord, columns: List[str]) -> List[List[str]]:
    values = {**record.outputs, **record.flags}
    if record.task == "language":
        return [[_cell(values["n"]), _cell(values["count"]), word]
                for word in values["words"]]
    return [[_cell(values.get(column)) for column in columns]]


def emit(
    records: Iterable[ResultRecord], format_: str = "csv",
    task: Optional[str] = None
) -> str:
    """
    Serialise records as CSV (header plus rows) or as a JSON list.

    Args:
        records: Records of a single task
        format_: "csv" or "json"
        task: Task name; needed for the CSV header of an empty stream

    Returns:
        The serialised text, newline terminated
    """
    records = list(records)
    if format_ == "json":
        return json.dumps([record.to_json() for record in records],
                          indent=2) + "\n"
    if format_ != "csv":
        raise ValueError(f"Unknown output format: {format_}")
    task = task or (records[0].task if records else None)
    if task not in CSV_COLUMNS:
        raise ValueError(f"Unknown task for CSV output: {task}")
    columns = CSV_COLUMNS[task]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for record in records:
        writer.writerows(_rows(record, columns))
    return buffer.getvalue()


def _load_config(path: str) -> Dict[str, Any]:
    """
    Read a JSON configuration from a file, or from stdin when path is "-".

    Raises:
        ValueError: If the text is not valid JSON
        OSError: If the file cannot be read
    """
    if path == "-":
        logger.debug("Reading configuration from stdin")
        try:
            return json.load(sys.stdin)
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON from stdin: {str(e)}") from e
    with open(path, "r", encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(
                f"Invalid JSON in configuration file: {str(e)}"
            ) from e


def _parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse command line arguments.

    Returns:
        argparse.Namespace: Parsed command line arguments
    """
    parser = argparse.ArgumentParser(
        prog="dimspec",
        description=(
            "Certified Hausdorff dimension enclosures for shift-generated "
            "conformal constructions"
        ),
        formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )

    input_group = parser.add_argument_group("Input")
    input_group.add_argument(
        "--config",
        required=True,
        help="Path to the JSON run configuration, or - to read stdin"
    )

    output_group = parser.add_argument_group("Output")
    output_group.add_argument(
        "--output",
        help="Write records to this path instead of the configured one"
    )
    output_group.add_argument(
        "--format",
        choices=["csv", "json"],
        help="Override the configured output format"
    )

    log_group = parser.add_argument_group("Logging")
    log_group.add_argument(
        "--debug", action="store_true", help="Enable debug logging"
    )

    return parser.parse_args(argv)


def _log_validation(error: ValidationError) -> None:
    for issue in error.errors():
        location = ".".join(str(part) for part in issue["loc"]) or "config"
        logger.error("Invalid configuration at %s: %s", location, issue["msg"])


def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Command-line entry point.

    Returns:
        The process exit code
    """
    args = _parse_arguments(argv)
    if args.debug:
        configure_logging(LogConfig(level="DEBUG"))
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        config = RunConfig.model_validate(_load_config(args.config))
    except ValidationError as e:
        _log_validation(e)
        return EXIT_INVALID
    except ValueError as e:
        logger.error(str(e))
        return EXIT_INVALID
    except OSError as e:
        logger.error("Cannot read configuration: %s", str(e))
        return EXIT_INVALID

    output = config.output
    format_ = args.format or output.format
    path = args.output or output.path

    records = []
    code = EXIT_OK
    try:
        for record in run(config):
            records.append(record)
            if record.flags.get("budget_exhausted"):
                code = EXIT_BUDGET
    except ResourceError as e:
        logger.warning(
            "Budget exhausted after %d records: %s", len(records), str(e)
        )
        code = EXIT_BUDGET
    except InternalError as e:
        logger.error("Internal error: %s", str(e))
        return EXIT_FAILURE
    except DimspecError as e:
        logger.error("%s: %s", type(e).__name__, str(e))
        return EXIT_INVALID

    try:
        _write(emit(records, format_, config.task.name), path)
    except OSError as e:
        logger.error("Cannot write output: %s", str(e))
        return EXIT_FAILURE
    return code


if __name__ == "__main__":
    sys.exit(main())
