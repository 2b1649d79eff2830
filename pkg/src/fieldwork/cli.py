"""Command-line driver: scenario generation, robot runs, evaluation,
aggregation, log replay, and the session service.

Exit codes: 0 success, 1 usage, 2 data/file error, 3 numerical failure.
Outputs are written atomically (temp file + rename), so a crash leaves at
worst a *.partial file, never a half-written artifact.
"""

import glob
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor

import click

from .errors import (
    FactorizationFailure,
    FieldworkError,
    FormatError,
    ReplayMismatch,
)
from .evaluate import (
    EvaluationReport,
    aggregate,
    evaluate_session,
    write_box_stats_csv,
    write_grand_means_csv,
    write_reports_csv,
    write_time_series_csv,
)
from .gp import DEFAULT_HP_INIT, Hyperparams
from .scenario import (
    Cell,
    DEFAULT_NOISE_FRAC,
    GridSpec,
    SCENARIO_LOG_L,
    SCENARIO_LOG_SF2,
    build_scenario,
    load_scenario,
    save_scenario,
)
from .session import dump_log, load_log, replay_log, run_robot, session_to_log


def _atomic_write(path: str, text: str):
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)),
                               suffix=".partial")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _parse_seeds(text: str) -> list[int]:
    """Comma-separated seeds with inclusive a-b ranges, e.g. '0-5,7,9'."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            cut = part.index("-", 1)
            lo, hi = int(part[:cut]), int(part[cut + 1:])
            if hi < lo:
                raise click.UsageError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise click.UsageError("no seeds given")
    return seeds


def _parse_cell(text: str) -> Cell:
    try:
        row, col = (int(p) for p in text.split(","))
    except ValueError:
        raise click.UsageError(f"expected 'row,col', got {text!r}") from None
    return Cell(row, col)


def _scenario_index(scenario_dir: str) -> dict:
    paths = sorted(glob.glob(os.path.join(scenario_dir, "*.json")))
    if not paths:
        raise FormatError(f"no scenario files in {scenario_dir}")
    index = {}
    for path in paths:
        field = load_scenario(path)
        index[field.name] = field
    return index


@click.group()
def cli():
    """Adaptive-sampling workbench."""


@cli.command()
@click.option("--kind", type=click.Choice(["gp", "gmm"]), required=True)
@click.option("--count", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True,
              help="First seed; scenario i uses seed + i.")
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--log-l", type=float, default=SCENARIO_LOG_L, show_default=True,
              help="GP kind only: log length scale (degrees).")
@click.option("--log-sf2", type=float, default=SCENARIO_LOG_SF2,
              show_default=True, help="GP kind only: log signal variance.")
@click.option("--noise-frac", type=float, default=DEFAULT_NOISE_FRAC,
              show_default=True)
def gen(kind, count, seed, out, log_l, log_sf2, noise_frac):
    """Generate ground-truth scenario files."""
    os.makedirs(out, exist_ok=True)
    spec = GridSpec()
    hp = Hyperparams(log_l, log_sf2, 0.0)
    for i in range(count):
        field = build_scenario(kind, spec, seed + i, hp=hp,
                               noise_frac=noise_frac)
        path = os.path.join(out, f"{field.name}.json")
        save_scenario(field, path)
        click.echo(f"wrote {path}")


def _run_one(scenario_path, strategy, seed, budget, hp_tuple, start_rowcol):
    """Worker for one (scenario, strategy, seed) run; returns (name, text)."""
    scenario = load_scenario(scenario_path)
    session = run_robot(
        scenario, strategy, budget,
        hp_init=Hyperparams(*hp_tuple), seed=seed,
        start=Cell(*start_rowcol),
    )
    return session.id, dump_log(session_to_log(session))


@cli.command()
@click.option("--scenarios", "scenario_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--strategy", type=click.Choice(["random", "entropy", "entropy_mean"]), required=True)
@click.option("--seeds", default="0", show_default=True,
              help="Comma list with inclusive ranges, e.g. 0-9.")
@click.option("--budget", type=int, default=190, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--start", default="0,0", show_default=True, help="Start cell row,col.")
@click.option("--hp-init", default=None,
              help="log_l,log_sf2,log_sn2 (default -7.5,0.5,1.0).")
@click.option("--jobs", type=int, default=1, show_default=True)
def run(scenario_dir, strategy, seeds, budget, out, start, hp_init, jobs):
    """Run robot sessions: one log per (scenario, strategy, seed)."""
    os.makedirs(out, exist_ok=True)
    seed_list = _parse_seeds(seeds)
    start_cell = _parse_cell(start)
    if hp_init is not None:
        hp = tuple(float(p) for p in hp_init.split(","))
        if len(hp) != 3:
            raise click.UsageError("--hp-init needs three comma-separated values")
    else:
        hp = (DEFAULT_HP_INIT.log_l, DEFAULT_HP_INIT.log_sf2, DEFAULT_HP_INIT.log_sn2)
    paths = sorted(glob.glob(os.path.join(scenario_dir, "*.json")))
    if not paths:
        raise FormatError(f"no scenario files in {scenario_dir}")
    tasks = [(p, strategy, s, budget, hp, (start_cell.row, start_cell.col))
             for p in paths for s in seed_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, *zip(*tasks)))
    else:
        results = [_run_one(*t) for t in tasks]
    for name, text in results:
        path = os.path.join(out, f"{name}.json")
        _atomic_write(path, text)
        click.echo(f"wrote {path}")


def _eval_one(log_path, scenario_dir, time_series):
    scenarios = _scenario_index(scenario_dir)
    payload = load_log(log_path)
    name = payload["scenario_name"]
    if name not in scenarios:
        raise FormatError(f"{log_path}: unknown scenario {name!r}")
    session = replay_log(payload, scenarios[name])
    report = evaluate_session(session, time_series=time_series)
    return report


@cli.command("eval")
@click.option("--sessions", "session_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--scenarios", "scenario_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--time-series", is_flag=True, default=False)
@click.option("--jobs", type=int, default=1, show_default=True)
def eval_cmd(session_dir, scenario_dir, out, time_series, jobs):
    """Evaluate session logs: per-session JSON plus combined CSVs."""
    os.makedirs(out, exist_ok=True)
    log_paths = sorted(glob.glob(os.path.join(session_dir, "*.json")))
    if not log_paths:
        raise FormatError(f"no session logs in {session_dir}")
    if jobs > 1:
        args = [(p, scenario_dir, time_series) for p in log_paths]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_eval_one, *zip(*args)))
    else:
        reports = [_eval_one(p, scenario_dir, time_series) for p in log_paths]
    for report in reports:
        path = os.path.join(out, f"report-{report.session_id}.json")
        _atomic_write(path, json.dumps(report.to_dict(), indent=2) + "\n")
    write_reports_csv(reports, os.path.join(out, "reports.csv"))
    if time_series:
        write_time_series_csv(reports, os.path.join(out, "time_series.csv"))
    click.echo(f"evaluated {len(reports)} sessions into {out}")


def _report_from_dict(payload: dict) -> EvaluationReport:
    series = None
    if "time_series" in payload:
        series = [(int(e["n"]), float(e["rmse_gp"])) for e in payload["time_series"]]
    return EvaluationReport(
        session_id=payload["session_id"],
        scenario_name=payload["scenario_name"],
        agent=payload["agent"],
        rmse_spline=float(payload["rmse_spline"]),
        rmse_gp=float(payload["rmse_gp"]),
        rmse_spline_norm=float(payload["rmse_spline_norm"]),
        rmse_gp_norm=float(payload["rmse_gp_norm"]),
        time_series=series,
    )


@cli.command("aggregate")
@click.option("--reports", "report_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
def aggregate_cmd(report_dir, out):
    """Aggregate reports into grand means and boxplot statistics."""
    os.makedirs(out, exist_ok=True)
    paths = sorted(glob.glob(os.path.join(report_dir, "report-*.json")))
    if not paths:
        raise FormatError(f"no report files in {report_dir}")
    reports = []
    for path in paths:
        with open(path) as handle:
            try:
                reports.append(_report_from_dict(json.load(handle)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{path}: bad report file ({exc})") from exc
    stats = aggregate(reports)
    write_box_stats_csv(stats, os.path.join(out, "box_stats.csv"))
    write_grand_means_csv(stats, os.path.join(out, "grand_means.csv"))
    click.echo(f"aggregated {len(reports)} reports into {out}")


@cli.command()
@click.option("--session", "session_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--scenarios", "scenario_dir", type=click.Path(exists=True, file_okay=False), required=True)
def replay(session_path, scenario_dir):
    """Recompute reveals from waypoints and verify log integrity."""
    payload = load_log(session_path)
    scenarios = _scenario_index(scenario_dir)
    name = payload["scenario_name"]
    if name not in scenarios:
        raise FormatError(f"{session_path}: unknown scenario {name!r}")
    replay_log(payload, scenarios[name])
    click.echo(f"{session_path}: ok")


@cli.command()
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--scenario-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--log-dir", type=click.Path(file_okay=False), required=True)
@click.option("--static-dir", type=click.Path(file_okay=False), default=None,
              help="Optional built web UI to serve at /.")
def serve(port, host, scenario_dir, log_dir, static_dir):
    """Start the session service."""
    import uvicorn

    from .service import create_app

    app = create_app(scenario_dir, log_dir, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except (FormatError, ReplayMismatch) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        return 2
    except (FactorizationFailure, ArithmeticError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 3
    except FieldworkError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
