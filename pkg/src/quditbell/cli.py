"""Command-line front end: bounds, violations, visibility scans, table evaluation.

Exit codes are a stable contract: 0 success, 1 input error, 2 resource or
budget error.  Reports go to stdout as JSON (CSV for scans on request); --out
writes the same payload to a file atomically.
"""

from __future__ import annotations

import io
import json
import os
import sys
import tempfile
import time
from dataclasses import dataclass
from typing import Optional

import click

from .bounds import Bipartition, BudgetExceededError, hlnhv_bound, lhv_bound
from .optimize import (
    critical_visibility,
    max_violation,
    optimal_angles,
    optimize_with_restarts,
)
from .quantum import (
    DENSE_DIMENSION_LIMIT,
    DenseLimitError,
    PhaseConfiguration,
    ghz_bell_value,
    ghz_state,
    ghz_table,
    joint_probabilities,
)
from .scenario import (
    BellScenario,
    JointProbabilityTable,
    TableFormatError,
    bell_value,
    correlation_q,
)

BUDGET_ENV_VAR = "QUDITBELL_BUDGET"
DEFAULT_BUDGET = 10**8

ANGLES_MODES = ("optimal", "zero", "optimized-symmetric", "optimized-free")

__all__ = ["RunConfig", "cli", "main", "run"]


@dataclass
class RunConfig:
    """Parsed invocation: one command plus its scenario and I/O options."""

    command: str
    n: int = 0
    d: int = 0
    partition: Optional[Bipartition] = None
    angles_mode: str = "optimal"
    budget: int = DEFAULT_BUDGET
    output_path: Optional[str] = None
    format: str = "json"


class InputError(ValueError):
    """User-supplied arguments or files are invalid (exit code 1)."""


def _scenario(n: int, d: int) -> BellScenario:
    if n < 2:
        raise InputError(f"need at least 2 parties, got {n}")
    try:
        return BellScenario(n, d)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _sig10(x: float) -> float:
    """Round a float to 10 significant digits for reporting."""
    return float(f"{x:.10g}")


def _render_csv(rows: list[dict]) -> str:
    out = io.StringIO()
    if rows:
        header = list(rows[0])
        out.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for key in header:
                value = row[key]
                cells.append(f"{value:.10g}" if isinstance(value, float) else str(value))
            out.write(",".join(cells) + "\n")
    return out.getvalue()


def _render(payload, fmt: str) -> str:
    if fmt == "csv":
        if not isinstance(payload, list):
            raise InputError("csv output is only available for scan tables")
        return _render_csv(payload)
    return json.dumps(payload, indent=2) + "\n"


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".quditbell-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(payload, fmt: str, out_path: Optional[str]) -> None:
    text = _render(payload, fmt)
    if out_path:
        _atomic_write(out_path, text)
    else:
        click.echo(text, nl=False)


def _parse_range(text: str) -> tuple[int, int]:
    """Inclusive integer range 'a:b' (also 'a..b' or a single value)."""
    sep = ":" if ":" in text else ".." if ".." in text else None
    try:
        if sep is None:
            lo = hi = int(text)
        else:
            lo_s, hi_s = text.split(sep, 1)
            lo, hi = int(lo_s), int(hi_s)
    except ValueError as exc:
        raise InputError(f"range must look like '2:4', got {text!r}") from exc
    return lo, hi


def cmd_bound(config: RunConfig, model: str, jobs: int) -> dict:
    scenario = _scenario(config.n, config.d)
    started = time.perf_counter()
    if model == "hlnhv":
        if config.partition is None:
            raise InputError("hlnhv bound needs --partition, e.g. '1,2/3'")
        bound, witness = hlnhv_bound(
            scenario, config.partition, budget=config.budget, jobs=jobs
        )
        part = witness.partition
        d = scenario.dimension
        enumerated = d ** (2 ** len(part.block_a)) * d ** (2 ** len(part.block_b))
        witness_json = {"xi": dict(witness.xi), "zeta": dict(witness.zeta)}
        partition_json = [list(part.block_a), list(part.block_b)]
    else:
        bound, local = lhv_bound(scenario, budget=config.budget)
        enumerated = scenario.dimension ** (2 * scenario.n_parties)
        witness_json = {
            f"party-{p + 1}": {"1": o1, "2": o2} for p, (o1, o2) in enumerate(local)
        }
        partition_json = None
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return {
        "n": config.n,
        "d": config.d,
        "model": model,
        "partition": partition_json,
        "bound": str(bound),
        "bound_float": float(bound),
        "witness": witness_json,
        "strategies_enumerated": enumerated,
        "elapsed_ms": _sig10(elapsed_ms),
    }


def _angles_for_mode(scenario, mode, restarts, opt_budget, seed):
    if mode == "optimal":
        return optimal_angles(scenario)
    if mode == "zero":
        return PhaseConfiguration.zero(scenario)
    search_mode = "symmetric" if mode == "optimized-symmetric" else "free"
    result = optimize_with_restarts(
        scenario, restarts=restarts, budget=opt_budget, mode=search_mode, seed=seed
    )
    return result.config


# auto prefers the dense path only while the matrix work stays trivial; the
# closed form is exact for the GHZ state at any size
_AUTO_DENSE_LIMIT = 256


def _resolve_method(scenario, method: str) -> str:
    dim = scenario.n_outcome_tuples
    if method == "auto":
        return "dense" if dim <= _AUTO_DENSE_LIMIT else "closed-form"
    if method == "dense" and dim > DENSE_DIMENSION_LIMIT:
        raise DenseLimitError(
            f"dense path supports d^N <= {DENSE_DIMENSION_LIMIT}, got {dim}; "
            "use --method closed-form"
        )
    return method


def _table_for(scenario, config_phases, method: str) -> JointProbabilityTable:
    if method == "dense":
        return joint_probabilities(ghz_state(scenario), config_phases)
    return ghz_table(config_phases)


def cmd_violation(
    config: RunConfig,
    method: str,
    restarts: int,
    opt_budget: int,
    seed: int,
    emit_table: Optional[str],
) -> dict:
    scenario = _scenario(config.n, config.d)
    phases = _angles_for_mode(scenario, config.angles_mode, restarts, opt_budget, seed)
    method = _resolve_method(scenario, method)
    if method == "closed-form" and not emit_table:
        value = ghz_bell_value(phases)
    else:
        table = _table_for(scenario, phases, method)
        value = bell_value(table)
        if emit_table:
            _atomic_write(emit_table, json.dumps(table.to_json_dict(), indent=2) + "\n")
    ceiling = max_violation(scenario)
    return {
        "n": config.n,
        "d": config.d,
        "angles_mode": config.angles_mode,
        "bell_value": _sig10(value),
        "closed_form_max": _sig10(ceiling),
        "difference": _sig10(value - ceiling),
        "hlnhv_bound": _sig10(2.0 ** (config.n - 1)),
        "witness_fired": value > 2.0 ** (config.n - 1),
        "angles": phases.to_json_dict(),
    }


def cmd_visibility(config: RunConfig) -> dict:
    scenario = _scenario(config.n, config.d)
    report = critical_visibility(scenario)
    payload = report.to_json_dict()
    for key in ("max_value", "ratio", "critical_visibility", "svetlichny_visibility"):
        payload[key] = _sig10(payload[key])
    payload["hlnhv_bound"] = _sig10(2.0 ** (config.n - 1))
    return payload


def cmd_scan(n_range: tuple[int, int], d_range: tuple[int, int]) -> list[dict]:
    rows = []
    for n in range(n_range[0], n_range[1] + 1):
        for d in range(d_range[0], d_range[1] + 1):
            scenario = _scenario(n, d)
            report = critical_visibility(scenario)
            rows.append(
                {
                    "n": n,
                    "d": d,
                    "hlnhv_bound": _sig10(2.0 ** (n - 1)),
                    "max_violation": _sig10(report.max_value),
                    "ratio": _sig10(report.ratio),
                    "v_cr": _sig10(report.critical_visibility),
                }
            )
    return rows


def cmd_eval(config: RunConfig, table_path: str) -> dict:
    try:
        with open(table_path) as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise InputError(f"cannot read {table_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{table_path} is not valid JSON: {exc}") from exc
    try:
        table = JointProbabilityTable.from_json_dict(payload)
    except TableFormatError as exc:
        raise InputError(f"{table_path}: {exc}") from exc
    value = bell_value(table)
    bound = 2.0 ** (table.scenario.n_parties - 1)
    return {
        "n": table.scenario.n_parties,
        "d": table.scenario.dimension,
        "bell_value": _sig10(value),
        "q_values": {
            s: _sig10(correlation_q(s, table))
            for s in table.scenario.setting_strings()
        },
        "hlnhv_bound": _sig10(bound),
        "witness_fired": value > bound,
    }


@click.group()
def cli():
    """N-qudit Bell-type inequality toolkit."""


_common = [
    click.option("--n", type=int, required=True, help="Number of parties (>= 2)."),
    click.option("--d", type=int, required=True, help="Outcomes per measurement (>= 2)."),
    click.option("--out", "out_path", type=click.Path(), default=None,
                 help="Write the report to this file (atomic) instead of stdout."),
]


def _add_options(options):
    def wrap(func):
        for option in reversed(options):
            func = option(func)
        return func
    return wrap


@cli.command()
@_add_options(_common)
@click.option("--model", type=click.Choice(["hlnhv", "lhv"]), default="hlnhv",
              show_default=True, help="Hidden-variable model to bound.")
@click.option("--partition", default=None,
              help="Bipartition for hlnhv, slash-separated comma lists like '1,2/3'.")
@click.option("--budget", type=int, envvar=BUDGET_ENV_VAR, default=DEFAULT_BUDGET,
              show_default=True, help="Maximum number of strategies to enumerate.")
@click.option("--threads", type=int, default=None,
              help="Worker processes for the enumeration (default: machine parallelism).")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def bound(n, d, out_path, model, partition, budget, threads, fmt):
    """Certify the HLNHV (or LHV) bound by exhaustive enumeration."""
    config = RunConfig("bound", n=n, d=d, budget=budget, output_path=out_path, format=fmt)
    if partition is not None:
        config.partition = Bipartition.parse(partition, n)
    jobs = threads if threads else (os.cpu_count() or 1)
    _emit(cmd_bound(config, model, jobs), fmt, out_path)


@cli.command()
@_add_options(_common)
@click.option("--angles", "angles_mode", type=click.Choice(ANGLES_MODES),
              default="optimal", show_default=True,
              help="Measurement phases: the closed-form optimum, all zeros, or a fresh search.")
@click.option("--method", type=click.Choice(["auto", "dense", "closed-form"]),
              default="auto", show_default=True,
              help="Probability path for the GHZ state; auto takes dense only "
                   "while d^N stays small.")
@click.option("--emit-table", type=click.Path(), default=None,
              help="Also write the probability table JSON to this file.")
@click.option("--restarts", type=int, default=20, show_default=True,
              help="Random restarts for the optimized-* modes.")
@click.option("--budget", type=int, default=20_000, show_default=True,
              help="Objective evaluations per restart for the optimized-* modes.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def violation(n, d, out_path, angles_mode, method, emit_table, restarts, budget, seed, fmt):
    """Quantum Bell value of the GHZ state at the requested angles."""
    config = RunConfig("violation", n=n, d=d, angles_mode=angles_mode,
                       output_path=out_path, format=fmt)
    report = cmd_violation(config, method, restarts, budget, seed, emit_table)
    _emit(report, fmt, out_path)


@cli.command()
@_add_options(_common)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def visibility(n, d, out_path, fmt):
    """Critical visibility of the white-noise GHZ mixture."""
    config = RunConfig("visibility", n=n, d=d, output_path=out_path, format=fmt)
    _emit(cmd_visibility(config), fmt, out_path)


@cli.command()
@click.option("--n-range", default="2:4", show_default=True,
              help="Inclusive party range 'lo:hi'.")
@click.option("--d-range", default="2:3", show_default=True,
              help="Inclusive dimension range 'lo:hi'.")
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
def scan(n_range, d_range, out_path, fmt):
    """Tabulate bound, maximal violation, ratio, and v_cr over a grid."""
    lo_n, hi_n = _parse_range(n_range)
    lo_d, hi_d = _parse_range(d_range)
    if (lo_n <= hi_n and lo_n < 2) or (lo_d <= hi_d and lo_d < 2):
        raise InputError("scan requires n >= 2 and d >= 2")
    rows = cmd_scan((lo_n, hi_n), (lo_d, hi_d))
    _emit(rows, fmt, out_path)


@cli.command("eval")
@click.argument("table_file", type=click.Path())
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def eval_table(table_file, out_path, fmt):
    """Evaluate the Bell functional on a probability-table JSON file."""
    config = RunConfig("eval", output_path=out_path, format=fmt)
    _emit(cmd_eval(config, table_file), fmt, out_path)


def run(argv=None) -> int:
    """Invoke the CLI and map exceptions onto the exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        return 1
    except (InputError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except (BudgetExceededError, DenseLimitError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
