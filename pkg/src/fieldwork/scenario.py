"""Synthetic ground-truth fields: generation, perturbation, and file I/O.

A scenario is a rectangular grid of scalar values (a chlorophyll proxy in
ug/L) produced either by drawing one joint sample from a GP prior or by
evaluating a randomly sampled Gaussian mixture, then adding bounded noise
and rescaling to a fixed value range. Grid geometry lives in meters; kernel
evaluation happens in geographic degrees anchored at a reference latitude,
so degree-valued length scales apply unchanged.
"""

import json
import math
import os
import tempfile
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.stats import multivariate_normal

from . import backend
from .errors import DegenerateField, FormatError
from .gp import Hyperparams, chol_with_jitter

# Equirectangular conversion: meters per degree of latitude; longitude
# degrees shrink by cos(latitude).
M_PER_DEG = 111_320.0

SCENARIO_FORMAT_VERSION = 1

# Default value range of generated fields (chlorophyll proxy, ug/L).
VALUE_LO = 0.0
VALUE_HI = 20.0

DEFAULT_NOISE_FRAC = 0.05

# Scenario-generation GP hyperparameters (log length scale in degrees,
# log signal variance), matched to previously observed field smoothness.
SCENARIO_LOG_L = -7.81
SCENARIO_LOG_SF2 = 1.68


class Provenance(str, Enum):
    GP_SAMPLE = "gp_sample"
    GMM = "gmm"
    RECONSTRUCTION = "reconstruction"


@dataclass(frozen=True)
class Cell:
    """Grid cell addressed by (row, col), row-major."""

    row: int
    col: int


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid of square cells with geographic anchoring.

    Cells (not lattice points) carry the samples; a sample lives at the
    cell center. width_m and height_m must be exact multiples of cell_m.
    """

    width_m: float = 400.0
    height_m: float = 200.0
    cell_m: float = 10.0
    anchor_lat: float = 34.086

    def __post_init__(self):
        if self.cell_m <= 0:
            raise ValueError("cell_m must be positive")
        for extent, name in ((self.width_m, "width_m"), (self.height_m, "height_m")):
            ratio = extent / self.cell_m
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                raise ValueError(f"{name} must be a positive multiple of cell_m")

    @property
    def cols(self) -> int:
        return round(self.width_m / self.cell_m)

    @property
    def rows(self) -> int:
        return round(self.height_m / self.cell_m)

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    def valid(self, cell: Cell) -> bool:
        return 0 <= cell.row < self.rows and 0 <= cell.col < self.cols

    def index(self, cell: Cell) -> int:
        """Row-major linear index of a cell."""
        return cell.row * self.cols + cell.col

    def all_cells(self) -> list[Cell]:
        """All cells in row-major order."""
        return [Cell(r, c) for r in range(self.rows) for c in range(self.cols)]

    def cell_center_m(self, cell: Cell) -> tuple[float, float]:
        """Cell-center (x, y) in meters; origin cell center at (cell_m/2, cell_m/2)."""
        return ((cell.col + 0.5) * self.cell_m, (cell.row + 0.5) * self.cell_m)

    def centers_m(self) -> np.ndarray:
        """(n_cells, 2) array of cell-center (x, y) meters, row-major."""
        cols = (np.arange(self.cols) + 0.5) * self.cell_m
        rows = (np.arange(self.rows) + 0.5) * self.cell_m
        xx, yy = np.meshgrid(cols, rows)
        return np.ascontiguousarray(np.column_stack([xx.ravel(), yy.ravel()]))

    def centers_lonlat(self) -> np.ndarray:
        """(n_cells, 2) array of cell-center (lon, lat) degrees, row-major."""
        return self.m_to_lonlat(self.centers_m())

    def m_to_lonlat(self, xy_m: np.ndarray) -> np.ndarray:
        """Convert (x, y) meter coordinates to (lon, lat) degrees."""
        xy_m = np.atleast_2d(np.asarray(xy_m, dtype=np.float64))
        lon = xy_m[:, 0] / (M_PER_DEG * math.cos(math.radians(self.anchor_lat)))
        lat = self.anchor_lat + xy_m[:, 1] / M_PER_DEG
        return np.ascontiguousarray(np.column_stack([lon, lat]))


def cell_center_lonlat(spec: GridSpec, cell: Cell) -> tuple[float, float]:
    """Geographic (lon, lat) degrees of a cell's center."""
    if not spec.valid(cell):
        raise ValueError(f"cell {cell} outside {spec.rows}x{spec.cols} grid")
    lonlat = spec.m_to_lonlat(np.array([spec.cell_center_m(cell)]))
    return (float(lonlat[0, 0]), float(lonlat[0, 1]))


@dataclass(frozen=True)
class Field:
    """A grid of scalar values plus provenance metadata.

    Serves both as ground truth (generated scenarios) and as reconstruction
    output. values is row-major with length rows*cols.
    """

    grid: GridSpec
    values: np.ndarray
    provenance: Provenance
    seed: int | None = None
    name: str = ""

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.shape != (self.grid.n_cells,):
            raise ValueError(
                f"values length {values.size} != rows*cols {self.grid.n_cells}"
            )
        object.__setattr__(self, "values", values)

    def value_at(self, cell: Cell) -> float:
        return float(self.values[self.grid.index(cell)])

    def as_grid(self) -> np.ndarray:
        """values reshaped to (rows, cols)."""
        return self.values.reshape(self.grid.rows, self.grid.cols)


@dataclass(frozen=True)
class GmmSpec:
    """Mixture of 2-D Gaussian bumps over the domain rectangle (meters)."""

    n_components: int
    means: np.ndarray        # (k, 2) meters
    covariances: np.ndarray  # (k, 2, 2) m^2, symmetric positive definite
    weights: np.ndarray      # (k,) positive

    def __post_init__(self):
        if not (len(self.means) == len(self.covariances) == len(self.weights)
                == self.n_components):
            raise ValueError("component count mismatch")
        for cov in self.covariances:
            if not np.allclose(cov, cov.T):
                raise ValueError("covariance not symmetric")
            if np.linalg.eigvalsh(cov).min() <= 0:
                raise ValueError("covariance not positive definite")

    def density(self, xy_m: np.ndarray) -> np.ndarray:
        """Weighted mixture density at (n, 2) meter locations."""
        xy_m = np.atleast_2d(xy_m)
        total = np.zeros(len(xy_m))
        for mean, cov, w in zip(self.means, self.covariances, self.weights):
            total += w * multivariate_normal(mean=mean, cov=cov).pdf(xy_m)
        return total


@dataclass(frozen=True)
class GmmRanges:
    """Sampling ranges for random mixtures (configuration, not constants)."""

    n_components: tuple[int, int] = (2, 6)       # inclusive
    axis_std_m: tuple[float, float] = (20.0, 80.0)
    weight: tuple[float, float] = (0.5, 1.0)


def generate_gp_field(spec: GridSpec, hp: Hyperparams, seed: int) -> Field:
    """Draw one joint sample from the zero-mean GP prior over cell centers.

    The kernel is evaluated on degree coordinates so degree-valued
    hyperparameters apply directly. Deterministic for a fixed seed. The raw
    sample is returned; the scenario pipeline adds noise and rescales.
    """
    centers = spec.centers_lonlat()
    cov = backend.se_sym(centers, hp.l, hp.sf2, 0.0)
    chol = chol_with_jitter(cov, hp.sf2)
    rng = np.random.default_rng(seed)
    values = chol @ rng.standard_normal(spec.n_cells)
    return Field(spec, values, Provenance.GP_SAMPLE, seed=seed, name=f"gp-{seed:04d}")


def sample_gmm_spec(spec: GridSpec, rng: np.random.Generator,
                    ranges: GmmRanges = GmmRanges()) -> GmmSpec:
    """Randomly sample mixture structure: count, locations, orientations."""
    k = int(rng.integers(ranges.n_components[0], ranges.n_components[1] + 1))
    means = np.column_stack([
        rng.uniform(0.0, spec.width_m, size=k),
        rng.uniform(0.0, spec.height_m, size=k),
    ])
    covs = np.empty((k, 2, 2))
    for i in range(k):
        theta = rng.uniform(0.0, math.pi)
        s1, s2 = rng.uniform(*ranges.axis_std_m, size=2)
        rot = np.array([[math.cos(theta), -math.sin(theta)],
                        [math.sin(theta), math.cos(theta)]])
        covs[i] = rot @ np.diag([s1 ** 2, s2 ** 2]) @ rot.T
    weights = rng.uniform(*ranges.weight, size=k)
    return GmmSpec(k, means, covs, weights)


def generate_gmm_field(spec: GridSpec, seed: int,
                       ranges: GmmRanges = GmmRanges()) -> Field:
    """Evaluate a randomly sampled Gaussian mixture at every cell center.

    Raw (unrescaled) field; deterministic per seed.
    """
    rng = np.random.default_rng(seed)
    gmm = sample_gmm_spec(spec, rng, ranges)
    values = gmm.density(spec.centers_m())
    return Field(spec, values, Provenance.GMM, seed=seed, name=f"gmm-{seed:04d}")


def add_noise_and_rescale(field: Field, noise_frac: float = DEFAULT_NOISE_FRAC,
                          lo: float = VALUE_LO, hi: float = VALUE_HI,
                          seed: int = 0) -> Field:
    """Add bounded uniform noise, then rescale affinely so min->lo, max->hi.

    Noise is zero-mean uniform with amplitude noise_frac * max(field),
    independent per cell. Raises DegenerateField when the noisy field is
    constant (rescale undefined).
    """
    if hi <= lo:
        raise ValueError("hi must exceed lo")
    if not 0.0 <= noise_frac < 1.0:
        raise ValueError("noise_frac must be in [0, 1)")
    values = field.values.copy()
    amp = noise_frac * float(values.max())
    if amp > 0.0:
        rng = np.random.default_rng(seed)
        values += rng.uniform(-amp, amp, size=values.shape)
    vmin, vmax = float(values.min()), float(values.max())
    if vmax <= vmin:
        raise DegenerateField("constant field cannot be rescaled")
    values = (values - vmin) / (vmax - vmin) * (hi - lo) + lo
    return replace(field, values=values)


def build_scenario(kind: str, spec: GridSpec, seed: int,
                   hp: Hyperparams | None = None,
                   noise_frac: float = DEFAULT_NOISE_FRAC,
                   lo: float = VALUE_LO, hi: float = VALUE_HI,
                   gmm_ranges: GmmRanges = GmmRanges()) -> Field:
    """Full scenario pipeline: generate, add noise, rescale to [lo, hi]."""
    if kind == "gp":
        if hp is None:
            hp = Hyperparams(SCENARIO_LOG_L, SCENARIO_LOG_SF2, 0.0)
        raw = generate_gp_field(spec, hp, seed)
    elif kind == "gmm":
        raw = generate_gmm_field(spec, seed, gmm_ranges)
    else:
        raise ValueError(f"unknown scenario kind {kind!r}")
    return add_noise_and_rescale(raw, noise_frac, lo, hi, seed=seed)


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".partial")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def save_scenario(field: Field, path: str):
    """Write a scenario file (JSON, 64-bit round-trip precision)."""
    payload = {
        "format_version": SCENARIO_FORMAT_VERSION,
        "name": field.name,
        "provenance": field.provenance.value,
        "seed": field.seed,
        "grid": {
            "width_m": field.grid.width_m,
            "height_m": field.grid.height_m,
            "cell_m": field.grid.cell_m,
            "anchor_lat": field.grid.anchor_lat,
        },
        "values": field.values.tolist(),
    }
    _atomic_write(path, json.dumps(payload))


def load_scenario(path: str) -> Field:
    """Read a scenario file; raises FormatError with field diagnostics."""
    with open(path) as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    if not isinstance(payload, dict):
        raise FormatError(f"{path}: top level must be an object")
    version = payload.get("format_version")
    if version != SCENARIO_FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format_version {version!r}")
    try:
        grid_raw = payload["grid"]
        spec = GridSpec(
            width_m=float(grid_raw["width_m"]),
            height_m=float(grid_raw["height_m"]),
            cell_m=float(grid_raw["cell_m"]),
            anchor_lat=float(grid_raw["anchor_lat"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: bad grid block ({exc})") from exc
    tag = payload.get("provenance")
    try:
        provenance = Provenance(tag)
    except ValueError:
        raise FormatError(f"{path}: unknown provenance tag {tag!r}") from None
    values = payload.get("values")
    if not isinstance(values, list) or len(values) != spec.n_cells:
        got = len(values) if isinstance(values, list) else type(values).__name__
        raise FormatError(
            f"{path}: values length {got} != rows*cols {spec.n_cells}"
        )
    seed = payload.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise FormatError(f"{path}: seed must be an integer or null")
    return Field(
        grid=spec,
        values=np.asarray(values, dtype=np.float64),
        provenance=provenance,
        seed=seed,
        name=str(payload.get("name", "")),
    )
