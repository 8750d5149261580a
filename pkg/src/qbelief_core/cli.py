from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from . import contingency as ct
from . import prospect as pr
from . import quantum_belief as qb
from . import stpetersburg as sp
from .classify import EXIT_OK, exit_code_for
from .errors import (
    ArityError,
    ConfigError,
    InfeasibleCalibration,
    InputError,
    LabelMismatch,
    ParseError,
)
from .render import exact, sig
from .types import StageHook

CSV_HEADER = ("stratum", "arm", "successes", "trials")


class Subcommand(str, Enum):
    REVERSAL = "reversal"
    BELIEF = "belief"
    DISJUNCTION = "disjunction"
    STPETERSBURG = "stpetersburg"


class OutputFormat(str, Enum):
    TEXT = "text"
    JSON = "json"


def _env_format() -> OutputFormat:
    raw = os.getenv("QBELIEF_FORMAT", OutputFormat.JSON.value).lower()
    try:
        return OutputFormat(raw)
    except ValueError:
        raise ConfigError(f"QBELIEF_FORMAT must be 'text' or 'json', got {raw!r}") from None


def _env_precision() -> int:
    raw = os.getenv("QBELIEF_PRECISION", "12")
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"QBELIEF_PRECISION must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class RunConfig:
    subcommand: Subcommand
    inputs: Tuple[Path, ...]
    output_format: OutputFormat = field(default_factory=_env_format)
    # significant digits of every rendered number
    precision: int = field(default_factory=_env_precision)
    yates: bool = False
    one_sided: Optional[str] = None
    theta: Optional[float] = None
    rounds: int = 0
    strict: bool = False
    observation: pr.ObservationMode = pr.ObservationMode.RESET

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "subcommand", Subcommand(self.subcommand))
            object.__setattr__(self, "output_format", OutputFormat(self.output_format))
            object.__setattr__(self, "observation", pr.ObservationMode(self.observation))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        object.__setattr__(self, "inputs", tuple(Path(p) for p in self.inputs))
        if not 1 <= self.precision <= 15:
            raise ConfigError(f"precision must lie in [1, 15], got {self.precision}")
        if not self.inputs:
            raise ConfigError("an --input file is required")
        for p in self.inputs:
            if not p.is_file():
                raise ConfigError(f"input file not found: {p}")
        if self.one_sided not in (None, "greater", "less"):
            raise ConfigError(f"--one-sided must be 'greater' or 'less', got {self.one_sided!r}")
        if self.theta is not None and self.theta < 0:
            raise ConfigError(f"--theta must be >= 0, got {self.theta}")
        if self.rounds < 0:
            raise ConfigError(f"--rounds must be >= 0, got {self.rounds}")


@dataclass(frozen=True)
class RunOutcome:
    exit_code: int
    report: Optional[Dict[str, Any]] = None
    error: Optional[str] = None


# ---------------------------------------------------------------------------
# Input parsing
# ---------------------------------------------------------------------------


def _int_field(value: str, name: str, line: int) -> int:
    try:
        return int(value.strip())
    except (ValueError, AttributeError):
        raise ParseError(f"{name} must be an integer, got {value!r}", line) from None


def parse_stratified_csv(path: Path) -> ct.StratifiedTable:
    """Read ``stratum,arm,successes,trials`` rows into a StratifiedTable."""
    rows: List[Tuple[str, str, int, int]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise ParseError(f"header must be {','.join(CSV_HEADER)!r}, got {header!r}", 1)
        for record in reader:
            line = reader.line_num
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(CSV_HEADER):
                raise ParseError(f"expected 4 fields, got {len(record)}", line)
            z, arm = record[0].strip(), record[1].strip()
            if not z or not arm:
                raise ParseError("stratum and arm must be non-empty", line)
            s = _int_field(record[2], "successes", line)
            n = _int_field(record[3], "trials", line)
            try:
                ct.ArmCounts(s, n)
            except ValueError as exc:
                raise ParseError(str(exc), line) from None
            rows.append((z, arm, s, n))
    if not rows:
        raise ParseError("no data rows")
    try:
        return ct.stratified_from_rows(rows)
    except LabelMismatch as exc:
        raise ArityError(str(exc)) from None


def _load_json(path: Path) -> Mapping[str, Any]:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(data, dict):
        raise ParseError("top-level JSON value must be an object")
    return data


def _field(data: Mapping[str, Any], key: str) -> Any:
    try:
        return data[key]
    except KeyError:
        raise ParseError(f"missing field {key!r}") from None


@contextmanager
def _malformed(what: str) -> Iterator[None]:
    """Turn type and value errors from a JSON payload into ParseError."""
    try:
        yield
    except InputError:
        raise
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed {what}: {exc}") from None


def parse_fraction_grid_json(path: Path) -> qb.RawFractionGrid:
    data = _load_json(path)
    rows, cols = _field(data, "rows"), _field(data, "cols")
    counts = data.get("counts")
    with _malformed("grid"):
        if "fractions" not in data and counts is not None:
            return qb.RawFractionGrid.from_counts(rows, cols, counts)
        return qb.RawFractionGrid(tuple(rows), tuple(cols), _field(data, "fractions"), counts)


def parse_gamble_json(path: Path) -> Tuple[pr.Gamble, pr.AcceptanceData]:
    data = _load_json(path)
    with _malformed("gamble"):
        gamble = pr.Gamble(
            _field(data, "win"), _field(data, "loss"), data.get("stated_win_chance", 0.5)
        )
        acceptance = pr.AcceptanceData(
            _field(data, "accept_given_win"),
            _field(data, "accept_given_loss"),
            _field(data, "accept_unknown"),
        )
    return gamble, acceptance


def parse_stpetersburg_json(path: Path) -> Tuple[sp.StPetersburgSpec, Optional[float]]:
    data = _load_json(path)
    with _malformed("St. Petersburg spec"):
        spec = sp.StPetersburgSpec(
            base_payout=data.get("base", 1),
            max_rounds=data.get("max_rounds"),
            house_bankroll=data.get("bankroll"),
            pay_final_on_truncation=bool(data.get("pay_final_on_truncation", False)),
        )
        wealth = data.get("wealth")
        return spec, None if wealth is None else float(wealth)


# ---------------------------------------------------------------------------
# Analyses
# ---------------------------------------------------------------------------


def _rational(x: Any, digits: int) -> Dict[str, Any]:
    return {"exact": exact(x), "decimal": sig(x, digits)}


def _tests(t: ct.TwoArmTable, config: RunConfig) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for name, fn in (
        ("chi_squared", lambda: ct.chi_squared(t, yates=config.yates)),
        ("fisher_exact", lambda: ct.fisher_exact(t, alternative=config.one_sided or "two-sided")),
    ):
        try:
            out[name] = fn().to_dict(config.precision)
        except ct.DegenerateTable as exc:
            out[name] = {"degenerate": str(exc)}
    return out


def _reversal(config: RunConfig, stage: StageHook) -> Dict[str, Any]:
    digits = config.precision
    stage("parse")
    strata = parse_stratified_csv(config.inputs[0])
    stage("detect_reversal")
    report = ct.detect_reversal(strata)
    stage("tests")
    tests = {
        "pooled": _tests(ct.pool(strata), config),
        "strata": [{"stratum": z, **_tests(t, config)} for z, t in strata.strata],
    }
    stage("backdoor_adjust")
    adjusted = {arm: _rational(ct.backdoor_adjust(strata, arm), digits) for arm in strata.labels}
    return {"reversal": report.to_dict(digits), "tests": tests, "backdoor_adjusted": adjusted}


def _belief(config: RunConfig, stage: StageHook) -> Dict[str, Any]:
    digits = config.precision
    stage("parse")
    raw = parse_fraction_grid_json(config.inputs[0])
    stage("normalize_fractions")
    joint = qb.normalize_fractions(raw)
    stage("state_from_joint")
    state = qb.state_from_joint(joint)
    stage("build_tree")
    tree = qb.build_tree(joint)

    out: Dict[str, Any] = {
        "joint": joint.to_dict(digits),
        "state": {
            **state.to_dict(digits),
            "squared_norm": sig(sum(a * a for a in state.amplitudes), digits),
        },
        "tree": tree.to_dict(digits),
    }
    if joint.is_square:
        stage("order_metrics")
        labels = joint.rows
        out["order_effects"] = [
            {"first": x, "second": y, **_rational(qb.order_effect(joint, x, y), digits)}
            for i, x in enumerate(labels)
            for y in labels[i + 1 :]
        ]
        out["independence_defects"] = {
            x: _rational(qb.independence_defect(joint, x), digits) for x in labels
        }
    if raw.counts is not None and len(raw.cols) == 2:
        stage("row_tests")
        out["row_tests"] = {row: _tests(qb.row_table(raw, row), config) for row in raw.rows}
    return out


def _disjunction(config: RunConfig, stage: StageHook) -> Dict[str, Any]:
    digits = config.precision
    stage("parse")
    gamble, data = parse_gamble_json(config.inputs[0])
    stage("disjunction_report")
    report = pr.disjunction_report(gamble, data)
    out: Dict[str, Any] = {"report": report.to_dict(digits)}

    theta, source = config.theta, "flag"
    if theta is None:
        theta, source = pr.matching_angle(gamble, data), "matching_angle"
    out["theta"] = None if theta is None else sig(theta, digits)
    out["theta_source"] = None if theta is None else source
    if config.rounds > 0 and theta is not None:
        stage("evolve_unrevealed")
        points = pr.trajectory(report.reference, gamble, theta, config.rounds, report.effect)
        out["trajectory"] = [p.to_dict(digits) for p in points]
        observed = pr.observe(points[-1].state, gamble, config.observation)
        out["after_observation"] = {
            "mode": config.observation.value,
            "state": observed.to_dict(digits),
            "utility": sig(pr.expected_utility(observed, gamble), digits),
        }
    return out


def _stpetersburg(config: RunConfig, stage: StageHook) -> Dict[str, Any]:
    stage("parse")
    spec, wealth = parse_stpetersburg_json(config.inputs[0])
    stage("valuate")
    return sp.valuate(spec, wealth).to_dict(config.precision)


_ANALYSES: Dict[Subcommand, Callable[[RunConfig, StageHook], Dict[str, Any]]] = {
    Subcommand.REVERSAL: _reversal,
    Subcommand.BELIEF: _belief,
    Subcommand.DISJUNCTION: _disjunction,
    Subcommand.STPETERSBURG: _stpetersburg,
}


def run(config: RunConfig, *, on_stage: Optional[StageHook] = None) -> RunOutcome:
    """
    Run one subcommand. Input errors become exit status 1; an infeasible
    calibration under ``strict`` becomes 2 (its report is still returned).
    """
    stage = on_stage or (lambda name: None)
    try:
        body = _ANALYSES[config.subcommand](config, stage)
    except Exception as exc:
        code = exit_code_for(exc, strict=config.strict)
        if code is None:
            raise
        return RunOutcome(code, None, f"{type(exc).__name__}: {exc}")
    report = {"subcommand": config.subcommand.value, "input": str(config.inputs[0]), **body}
    verdict = body.get("report") if config.subcommand is Subcommand.DISJUNCTION else None
    if verdict is not None and not verdict["feasible"]:
        exc = InfeasibleCalibration(verdict["eigenvalues"], verdict["off_diag"])
        code = exit_code_for(exc, strict=config.strict)
        if code:
            return RunOutcome(code, report, verdict["infeasibility"])
    return RunOutcome(EXIT_OK, report)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _flatten(value: Any, prefix: str = "") -> List[Tuple[str, Any]]:
    if isinstance(value, dict):
        items: List[Tuple[str, Any]] = []
        for k, v in value.items():
            items.extend(_flatten(v, f"{prefix}.{k}" if prefix else str(k)))
        return items
    if isinstance(value, list):
        items = []
        for i, v in enumerate(value):
            items.extend(_flatten(v, f"{prefix}.{i}" if prefix else str(i)))
        return items
    return [(prefix, value)]


def render_report(report: Mapping[str, Any], output_format: OutputFormat) -> str:
    """JSON (indented, key order kept) or one ``dotted.key: value`` line per leaf."""
    if OutputFormat(output_format) is OutputFormat.JSON:
        return json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    lines = [f"{k}: {json.dumps(v, ensure_ascii=False)}" for k, v in _flatten(dict(report))]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", required=True, action="append", type=Path)
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=None)
    common.add_argument("--precision", type=int, default=None)

    parser = argparse.ArgumentParser(
        prog="qbelief",
        description="Probability reversal, quantum belief states and the disjunction effect.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    rev = sub.add_parser(Subcommand.REVERSAL.value, parents=[common], help="Simpson reversal")
    rev.add_argument("--yates", action="store_true", help="continuity-corrected chi-squared")
    rev.add_argument(
        "--one-sided",
        nargs="?",
        const="greater",
        choices=["greater", "less"],
        default=None,
        help="one-sided Fisher test (arm order as in the CSV)",
    )

    sub.add_parser(Subcommand.BELIEF.value, parents=[common], help="two-stage belief state")

    dis = sub.add_parser(Subcommand.DISJUNCTION.value, parents=[common], help="disjunction effect")
    dis.add_argument("--theta", type=float, default=None, help="rotation per unrevealed round")
    dis.add_argument("--rounds", type=int, default=0)
    dis.add_argument("--strict", action="store_true", help="exit 2 on infeasible calibration")
    dis.add_argument(
        "--observe", choices=[m.value for m in pr.ObservationMode], default="reset"
    )

    sub.add_parser(Subcommand.STPETERSBURG.value, parents=[common], help="St. Petersburg values")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    kwargs: Dict[str, Any] = {
        "subcommand": args.subcommand,
        "inputs": tuple(args.input),
        "yates": getattr(args, "yates", False),
        "one_sided": getattr(args, "one_sided", None),
        "theta": getattr(args, "theta", None),
        "rounds": getattr(args, "rounds", 0),
        "strict": getattr(args, "strict", False),
        "observation": getattr(args, "observe", "reset"),
    }
    if args.format is not None:
        kwargs["output_format"] = args.format
    if args.precision is not None:
        kwargs["precision"] = args.precision
    return RunConfig(**kwargs)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        print(f"qbelief: {exc}", file=sys.stderr)
        return 1

    from . import otel_setup
    from .otel_runtime import configure_from_env, run_traced_optional

    traced = configure_from_env()
    try:
        outcome = run_traced_optional(config, otel_enabled=traced)
    finally:
        if traced:
            otel_setup.shutdown()
    if outcome.report is not None:
        sys.stdout.write(render_report(outcome.report, config.output_format))
    if outcome.error is not None:
        print(f"qbelief: {outcome.error}", file=sys.stderr)
    return outcome.exit_code


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
