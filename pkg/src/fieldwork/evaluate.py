"""Field reconstruction from samples and RMSE scoring against ground truth.

Two reconstructions: a biharmonic-spline scattered-data interpolant
(Green's function g(r) = r^2 (ln r - 1), exact at the samples, extrapolates
by construction) and GP regression with hyperparameters re-estimated from
the collected samples. Reports carry raw RMSE in field units and the same
value normalized by the fixed 0-20 field range.
"""

import csv
import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from . import backend
from .errors import FactorizationFailure, GridMismatch
from .gp import DEFAULT_HP_INIT, Hyperparams, TrainingSet, fit, optimize_hyperparams, predict
from .scenario import Field, GridSpec, Provenance, VALUE_HI, VALUE_LO
from .session import Session

log = logging.getLogger(__name__)

FIELD_RANGE = VALUE_HI - VALUE_LO

DEFAULT_BATCH = 20


@dataclass(frozen=True)
class EvaluationReport:
    """Per-session reconstruction errors, raw and range-normalized."""

    session_id: str
    scenario_name: str
    agent: str
    rmse_spline: float
    rmse_gp: float
    rmse_spline_norm: float
    rmse_gp_norm: float
    time_series: list[tuple[int, float]] | None = None
    reconstructions: tuple[Field, Field] | None = None

    def to_dict(self) -> dict:
        payload = {
            "session_id": self.session_id,
            "scenario_name": self.scenario_name,
            "agent": self.agent,
            "rmse_spline": self.rmse_spline,
            "rmse_gp": self.rmse_gp,
            "rmse_spline_norm": self.rmse_spline_norm,
            "rmse_gp_norm": self.rmse_gp_norm,
        }
        if self.time_series is not None:
            payload["time_series"] = [
                {"n": n, "rmse_gp": value} for n, value in self.time_series
            ]
        return payload


@dataclass(frozen=True)
class GroupStats:
    """Boxplot statistics of one (scenario, agent, method) group."""

    median: float
    p25: float
    p75: float
    count: int


@dataclass(frozen=True)
class AggregateStats:
    """Boxplot stats per group plus grand means per (agent, method)."""

    box: dict
    grand_mean: dict


def _green(r: np.ndarray) -> np.ndarray:
    """Biharmonic Green's function r^2 (ln r - 1) with the r=0 singularity
    removed (g(0) = 0)."""
    out = np.zeros_like(r)
    mask = r > 0
    rm = r[mask]
    out[mask] = rm * rm * (np.log(rm) - 1.0)
    return out


def _collapse_duplicates(samples):
    """Average values at exactly coincident locations."""
    sums: dict[tuple[float, float], list[float]] = {}
    order: list[tuple[float, float]] = []
    for loc, value in samples:
        key = (float(loc[0]), float(loc[1]))
        if key not in sums:
            sums[key] = [0.0, 0.0]
            order.append(key)
        sums[key][0] += float(value)
        sums[key][1] += 1.0
    locs = np.array(order, dtype=np.float64)
    values = np.array([sums[k][0] / sums[k][1] for k in order])
    return locs, values


def reconstruct_spline(samples, spec: GridSpec) -> Field:
    """Biharmonic-spline interpolation of (location_m, value) samples.

    Solves the dense Green's system (with a couple of iterative-refinement
    sweeps to keep the interpolation residual near machine level) and
    evaluates at every cell center. A singular system falls back to the
    constant field at the sample mean, with a warning.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    locs, values = _collapse_duplicates(samples)
    centers = spec.centers_m()
    mean_value = float(values.mean())
    coeffs = None
    if len(locs) > 1:
        g = _green(np.sqrt(backend.sq_dists_sym(locs)))
        try:
            lu = lu_factor(g)
            a = lu_solve(lu, values)
            for _ in range(2):
                a += lu_solve(lu, values - g @ a)
            if np.isfinite(a).all():
                coeffs = a
        except Exception:
            coeffs = None
    if coeffs is None:
        log.warning("singular interpolation system for %d samples; "
                    "returning constant field", len(locs))
        grid_values = np.full(spec.n_cells, mean_value)
    else:
        w = _green(np.sqrt(backend.sq_dists(centers, locs)))
        grid_values = w @ coeffs
    return Field(spec, grid_values, Provenance.RECONSTRUCTION, name="spline")


def reconstruct_gp(samples, spec: GridSpec,
                   hp_init: Hyperparams = DEFAULT_HP_INIT) -> Field:
    """GP-regression reconstruction of (location_m, value) samples.

    Locations convert to degrees, hyperparameters are re-estimated from
    hp_init, and the posterior mean is evaluated at every cell center.
    Falls back to the spline reconstruction if factorization fails.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise ValueError("need at least two samples")
    locs_m = np.array([loc for loc, _ in samples], dtype=np.float64)
    values = np.array([v for _, v in samples], dtype=np.float64)
    train = TrainingSet(spec.m_to_lonlat(locs_m), values)
    try:
        hp = optimize_hyperparams(train, hp_init)
        model = fit(train, hp)
        mean = predict(model, spec.centers_lonlat()).mean
    except FactorizationFailure:
        log.warning("GP reconstruction failed to factorize; "
                    "falling back to spline")
        return reconstruct_spline(samples, spec)
    return Field(spec, mean, Provenance.RECONSTRUCTION, name="gp")


def rmse(a: Field, b: Field) -> float:
    """Root mean squared error over all cells; grids must match."""
    if a.grid != b.grid:
        raise GridMismatch(f"grids differ: {a.grid} vs {b.grid}")
    diff = a.values - b.values
    return math.sqrt(float(diff @ diff) / a.grid.n_cells)


def session_samples(session: Session, limit: int | None = None):
    """Revealed cells as (location_m, value) pairs, in reveal order."""
    reveals = session.revealed if limit is None else session.revealed[:limit]
    grid = session.scenario.grid
    return [(grid.cell_center_m(r.cell), r.value) for r in reveals]


def evaluate_over_time(session: Session,
                       batch_size: int = DEFAULT_BATCH) -> list[tuple[int, float]]:
    """GP-reconstruction RMSE after each batch of revealed samples.

    Batch n covers the first min(n * batch_size, total) reveals, so the
    last batch may be short (e.g. 10 samples when 190 are split by 20).
    """
    total = len(session.revealed)
    if total < 2:
        raise ValueError("need at least two revealed cells")
    series = []
    n_batches = math.ceil(total / batch_size)
    for n in range(1, n_batches + 1):
        samples = session_samples(session, limit=min(n * batch_size, total))
        recon = reconstruct_gp(samples, session.scenario.grid)
        series.append((n, rmse(recon, session.scenario)))
    return series


def evaluate_session(session: Session, *, time_series: bool = False,
                     batch_size: int = DEFAULT_BATCH,
                     keep_fields: bool = False) -> EvaluationReport:
    """Reconstruct with both methods and score against the ground truth."""
    samples = session_samples(session)
    spline = reconstruct_spline(samples, session.scenario.grid)
    gp_field = reconstruct_gp(samples, session.scenario.grid)
    rmse_spline = rmse(spline, session.scenario)
    rmse_gp = rmse(gp_field, session.scenario)
    series = evaluate_over_time(session, batch_size) if time_series else None
    return EvaluationReport(
        session_id=session.id,
        scenario_name=session.scenario.name,
        agent=session.agent.value,
        rmse_spline=rmse_spline,
        rmse_gp=rmse_gp,
        rmse_spline_norm=rmse_spline / FIELD_RANGE,
        rmse_gp_norm=rmse_gp / FIELD_RANGE,
        time_series=series,
        reconstructions=(spline, gp_field) if keep_fields else None,
    )


def aggregate(reports) -> AggregateStats:
    """Boxplot stats per (scenario, agent, method) and grand means.

    Percentiles use linear interpolation between order statistics. The
    grand mean per (agent, method) averages the per-scenario means, i.e.
    every scenario weighs equally regardless of session count.
    """
    groups: dict[tuple[str, str, str], list[float]] = defaultdict(list)
    for report in reports:
        groups[(report.scenario_name, report.agent, "spline")].append(report.rmse_spline)
        groups[(report.scenario_name, report.agent, "gp")].append(report.rmse_gp)
    box = {}
    per_scenario_means: dict[tuple[str, str], list[float]] = defaultdict(list)
    for key, values in groups.items():
        arr = np.asarray(values)
        p25, median, p75 = np.percentile(arr, [25.0, 50.0, 75.0])
        box[key] = GroupStats(float(median), float(p25), float(p75), len(values))
        scenario, agent, method = key
        per_scenario_means[(agent, method)].append(float(arr.mean()))
    grand = {key: float(np.mean(vals)) for key, vals in per_scenario_means.items()}
    return AggregateStats(box=box, grand_mean=grand)


# --- exporters -------------------------------------------------------------

def write_report_json(report: EvaluationReport, path: str):
    with open(path, "w") as handle:
        json.dump(report.to_dict(), handle, indent=2)
        handle.write("\n")


def write_reports_csv(reports, path: str):
    """One row per session per reconstruction method."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["session", "scenario", "agent", "method",
                         "rmse_raw", "rmse_norm"])
        for r in reports:
            writer.writerow([r.session_id, r.scenario_name, r.agent, "spline",
                             repr(r.rmse_spline), repr(r.rmse_spline_norm)])
            writer.writerow([r.session_id, r.scenario_name, r.agent, "gp",
                             repr(r.rmse_gp), repr(r.rmse_gp_norm)])


def write_time_series_csv(reports, path: str):
    """Long-format batch series: one row per (session, n)."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["session", "n", "rmse"])
        for r in reports:
            for n, value in r.time_series or []:
                writer.writerow([r.session_id, n, repr(value)])


def write_box_stats_csv(stats: AggregateStats, path: str):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["scenario", "agent", "method", "median", "p25", "p75"])
        for (scenario, agent, method), g in sorted(stats.box.items()):
            writer.writerow([scenario, agent, method,
                             repr(g.median), repr(g.p25), repr(g.p75)])


def write_grand_means_csv(stats: AggregateStats, path: str):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["agent", "method", "mean_rmse"])
        for (agent, method), value in sorted(stats.grand_mean.items()):
            writer.writerow([agent, method, repr(value)])
