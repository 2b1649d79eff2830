"""Waypoint scoring and selection over candidate grid cells.

Three strategies: uniform random, maximum posterior entropy, and entropy
plus a weighted share of the predictive mean. Entropy depends only on
sample locations; the mean term biases selection toward high field values.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NoCandidates
from .gp import GpModel, entropy, predict
from .scenario import Cell, GridSpec

# Exploration-exploitation weight on the normalized predictive mean.
DEFAULT_ALPHA = 0.25


class Strategy(str, Enum):
    RANDOM = "random"
    ENTROPY = "entropy"
    ENTROPY_MEAN = "entropy_mean"


@dataclass(frozen=True)
class AcquisitionScores:
    """Per-candidate scores plus the candidate cells they refer to."""

    scores: np.ndarray
    strategy: Strategy
    cells: tuple[Cell, ...]
    alpha: float = 0.0

    def __post_init__(self):
        if len(self.scores) != len(self.cells):
            raise ValueError("scores and candidate cells differ in length")


def _candidate_centers(spec: GridSpec, candidates) -> np.ndarray:
    """(n, 2) degree coordinates of candidate cell centers."""
    rc = np.array([[c.row, c.col] for c in candidates], dtype=np.float64)
    xy_m = (rc[:, ::-1] + 0.5) * spec.cell_m
    return spec.m_to_lonlat(xy_m)


def score_random(candidates) -> AcquisitionScores:
    """Flat scores; selection draws uniformly from the non-excluded cells."""
    cells = tuple(candidates)
    return AcquisitionScores(np.zeros(len(cells)), Strategy.RANDOM, cells)


def score_entropy(model: GpModel, candidates, spec: GridSpec) -> AcquisitionScores:
    """Posterior-entropy score at each candidate's center."""
    cells = tuple(candidates)
    if not cells:
        raise ValueError("no candidates")
    pred = predict(model, _candidate_centers(spec, cells))
    return AcquisitionScores(entropy(pred.variance), Strategy.ENTROPY, cells)


def score_entropy_plus_mean(model: GpModel, candidates, spec: GridSpec,
                            alpha: float = DEFAULT_ALPHA) -> AcquisitionScores:
    """Normalized entropy plus alpha times the normalized predictive mean.

    Each term is divided by its maximum over the candidates; a normalizer
    that is not strictly positive is replaced by 1 (the raw term is used),
    which keeps the score defined early in a run when the centered means
    can be all-nonpositive.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    cells = tuple(candidates)
    if not cells:
        raise ValueError("no candidates")
    pred = predict(model, _candidate_centers(spec, cells))
    h = entropy(pred.variance)
    mu = pred.mean
    h_max = h.max()
    h_term = h / h_max if np.isfinite(h_max) and h_max > 0 else h
    mu_max = mu.max()
    mu_term = mu / mu_max if mu_max > 0 else mu
    return AcquisitionScores(h_term + alpha * mu_term, Strategy.ENTROPY_MEAN,
                             cells, alpha)


def select(scores: AcquisitionScores, rng: np.random.Generator | None = None,
           exclude=frozenset()) -> Cell:
    """Pick the next waypoint from the scored candidates.

    Random strategy draws uniformly over non-excluded candidates using rng;
    the others take the argmax, breaking exact ties toward the lowest
    row-major linear index. Raises NoCandidates when everything is excluded.
    """
    cells = scores.cells
    keep = np.fromiter((c not in exclude for c in cells), dtype=bool, count=len(cells))
    if not keep.any():
        raise NoCandidates("all candidate cells excluded")
    if scores.strategy is Strategy.RANDOM:
        if rng is None:
            raise ValueError("random selection requires an rng")
        idx = np.flatnonzero(keep)
        return cells[idx[rng.integers(len(idx))]]
    vals = scores.scores
    best = None
    best_key = None
    for i in np.flatnonzero(keep):
        cell = cells[i]
        key = (-vals[i], cell.row, cell.col)
        if best_key is None or key < best_key:
            best, best_key = cell, key
    return best
