"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import date as Date
from pathlib import Path

from . import anomaly as anomaly_mod
from . import descriptive, normality, nptests, volatility
from .errors import EventWindowError
from .report import RunConfig, run_full, write_outputs, write_table1, write_table2
from .series import load_csv, log_returns, segment

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems; the CLI contract wants 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _load_config_file(path: str) -> dict[str, str]:
    """Plain KEY=VALUE configuration, one per line, # comments allowed."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line not KEY=VALUE: {line!r}")
        key, _, value = line.partition("=")
        values[key.strip().lower().replace("-", "_")] = value.strip()
    return values


def _build_parser() -> _Parser:
    parser = _Parser(prog="eventwindow", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="input CSV path")
    common.add_argument("--event-date", help="event date (ISO-8601)")
    common.add_argument("--date-column", help="date column name (default: date)")
    common.add_argument("--value-column", help="value column name (default: value)")
    common.add_argument("--window-days", type=int, help="calendar half-window around the event")
    common.add_argument("--iters", type=int, help="bootstrap iterations (default: 10000)")
    common.add_argument("--seed", type=int, help="bootstrap / detector seed (default: 42)")
    common.add_argument("--alpha", type=float, help="significance level (default: 0.05)")
    common.add_argument("--out", help="output directory (default: out)")
    common.add_argument("--config", help="plain-text KEY=VALUE config file; flags override")

    for name, doc in (
        ("describe", "per-segment descriptive statistics"),
        ("normality", "five-test battery per segment"),
        ("compare", "bootstrap-wrapped two-sample tests"),
        ("anomaly", "post-segment ensemble anomaly detection"),
        ("volatility", "rolling variance and the variance-ratio comparison"),
        ("report", "full pipeline: all of the above plus file outputs"),
    ):
        sub.add_parser(name, parents=[common], help=doc)
    return parser


_CONFIG_KEYS = {
    "input": str,
    "event_date": str,
    "date_column": str,
    "value_column": str,
    "window_days": int,
    "iters": int,
    "seed": int,
    "alpha": float,
    "out": str,
    "trees": int,
    "subsample": int,
    "contamination": float,
    "nu": float,
}


def _merge_config(args: argparse.Namespace, parser: _Parser) -> RunConfig:
    merged: dict[str, object] = {}
    if args.config:
        try:
            raw = _load_config_file(args.config)
        except FileNotFoundError:
            parser.error(f"config file not found: {args.config}")
        except ValueError as err:
            parser.error(str(err))
        for key, text in raw.items():
            if key == "weights":
                merged["weights"] = tuple(float(p) for p in text.split(","))
            elif key == "volatility_windows":
                merged["volatility_windows"] = tuple(int(p) for p in text.split(","))
            elif key in _CONFIG_KEYS:
                merged[key] = _CONFIG_KEYS[key](text)
            else:
                parser.error(f"unknown config key {key!r}")

    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag

    if "input" not in merged:
        parser.error("--input is required (flag or config file)")
    if "event_date" not in merged:
        parser.error("--event-date is required (flag or config file)")
    try:
        event = Date.fromisoformat(str(merged["event_date"]))
    except ValueError:
        parser.error(f"--event-date not ISO-8601: {merged['event_date']!r}")

    kwargs = {
        "input_path": str(merged["input"]),
        "event_date": event,
    }
    optional = {
        "date_column": "date_column",
        "value_column": "value_column",
        "window_days": "window_days",
        "iters": "bootstrap_iterations",
        "seed": "seed",
        "alpha": "alpha",
        "out": "output_dir",
        "trees": "trees",
        "subsample": "subsample",
        "contamination": "contamination",
        "nu": "nu",
        "weights": "weights",
        "volatility_windows": "volatility_windows",
    }
    for key, attr in optional.items():
        if key in merged:
            kwargs[attr] = merged[key]
    try:
        return RunConfig(**kwargs)
    except ValueError as err:
        parser.error(str(err))


def _loaded_segments(config: RunConfig):
    from .report import _trim_window

    series = load_csv(config.input_path, value_column=config.value_column, date_column=config.date_column)
    series = _trim_window(series, config.event_date, config.window_days)
    return segment(series, config.event_date)


def _emit(payload: dict, out_dir: str | None, filename: str) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / filename).write_text(text + "\n", encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.error("a subcommand is required")
    config = _merge_config(args, parser)
    out_dir = config.output_dir if (args.out or args.config) else None

    try:
        if args.command == "report":
            report = run_full(config)
            paths = write_outputs(report, config.output_dir)
            print(f"report written to {paths['report']}")
            return 0

        seg = _loaded_segments(config)
        samples = {
            "pre": seg.pre.observed(),
            "post": seg.post.observed(),
            "full": seg.full.observed(),
        }
        if args.command == "describe":
            summaries = {k: descriptive.summarize(v) for k, v in samples.items()}
            _emit({k: v.as_dict() for k, v in summaries.items()}, out_dir, "describe.json")
            if out_dir:
                write_table1(summaries, Path(out_dir) / "table1.csv")
        elif args.command == "normality":
            verdicts = {k: normality.battery(v).as_dict() for k, v in samples.items()}
            _emit(verdicts, out_dir, "normality.json")
        elif args.command == "compare":
            plan = config.plan()
            tests = [
                nptests.ks_two_sample(samples["pre"], samples["post"], plan, config.alpha),
                nptests.mann_whitney_u(samples["pre"], samples["post"], plan, config.alpha),
                nptests.brown_forsythe(samples["pre"], samples["post"], plan, config.alpha),
                nptests.cliffs_delta(samples["pre"], samples["post"], plan, config.alpha),
            ]
            _emit({"tests": [t.as_dict() for t in tests]}, out_dir, "compare.json")
            if out_dir:
                write_table2(tests, Path(out_dir) / "table2.csv")
        elif args.command == "anomaly":
            verdicts = anomaly_mod.detect_segment(
                seg.post,
                trees=config.trees,
                subsample=config.subsample,
                contamination=config.contamination,
                nu=config.nu,
                weights=config.weights,
                seed=config.seed,
            )
            payload = [
                {
                    "date": v.date.isoformat(),
                    "votes": v.method_votes,
                    "ensemble_score": v.ensemble_score,
                    "is_anomaly": v.is_anomaly,
                }
                for v in verdicts
            ]
            _emit({"anomalies": payload}, out_dir, "anomaly.json")
        elif args.command == "volatility":
            plan = config.plan()
            pre_r = log_returns(seg.pre).log_returns
            post_r = log_returns(seg.post).log_returns
            comparison = volatility.variance_ratio(pre_r, post_r, plan, config.alpha)
            _emit(comparison.as_dict(), out_dir, "volatility.json")
        return 0
    except FileNotFoundError as err:
        print(f"eventwindow: input not found: {err}", file=sys.stderr)
        return DATA_EXIT
    except EventWindowError as err:
        print(f"eventwindow: {err}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    raise SystemExit(main())
