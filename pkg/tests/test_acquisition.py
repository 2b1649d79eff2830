import numpy as np
import pytest

from fieldwork.acquisition import (
    AcquisitionScores,
    Strategy,
    score_entropy,
    score_entropy_plus_mean,
    score_random,
    select,
)
from fieldwork.errors import NoCandidates
from fieldwork.gp import GpModel, Hyperparams, TrainingSet, fit, predict
from fieldwork.scenario import Cell
from oracles import acquisition_argmax_oracle

HP = Hyperparams(-7.6, 0.6, -1.0)


def model_from_cells(spec, cells, values, hp=HP):
    centers = spec.centers_lonlat()
    idx = [spec.index(c) for c in cells]
    return fit(TrainingSet(centers[idx], values), hp)


class TestScoreEntropy:
    def test_no_data_scores_all_equal(self, spec):
        scores = score_entropy(GpModel.prior(HP), spec.all_cells(), spec)
        assert np.unique(scores.scores).size == 1

    def test_single_sample_argmax_is_farthest_cell(self, spec):
        # length scale wide enough that variance stays unsaturated everywhere
        hp = Hyperparams(-6.5, 0.6, -1.0)
        sample = Cell(3, 4)
        model = model_from_cells(spec, [sample], [7.0], hp)
        scores = score_entropy(model, spec.all_cells(), spec)
        best = select(scores)
        centers = spec.centers_lonlat()
        dists = np.linalg.norm(centers - centers[spec.index(sample)], axis=1)
        farthest = spec.all_cells()[int(np.argmax(dists))]
        assert best == farthest

    def test_ordering_matches_variance_ordering(self, spec, rng):
        cells = spec.all_cells()
        picked = rng.choice(len(cells), size=6, replace=False)
        model = model_from_cells(spec, [cells[i] for i in picked],
                                 rng.uniform(0, 20, size=6))
        scores = score_entropy(model, cells, spec).scores
        variances = predict(model, spec.centers_lonlat()).variance
        # no pair may be ordered one way by variance and the other by score
        sign_v = np.sign(variances[:, None] - variances[None, :])
        sign_h = np.sign(scores[:, None] - scores[None, :])
        assert not (sign_v * sign_h < 0).any()


class TestScoreEntropyPlusMean:
    def test_alpha_zero_matches_entropy_selection(self, spec, rng):
        cells = spec.all_cells()
        for trial in range(5):
            picked = rng.choice(len(cells), size=4, replace=False)
            model = model_from_cells(spec, [cells[i] for i in picked],
                                     rng.uniform(0, 20, size=4))
            a = select(score_entropy(model, cells, spec))
            b = select(score_entropy_plus_mean(model, cells, spec, alpha=0.0))
            assert a == b

    def test_no_data_scores_all_equal(self, spec):
        scores = score_entropy_plus_mean(GpModel.prior(HP), spec.all_cells(),
                                         spec, alpha=0.25)
        assert np.unique(scores.scores).size == 1

    def test_argmax_matches_brute_force_oracle(self, spec, rng):
        cells = spec.all_cells()
        rows_cols = [(c.row, c.col) for c in cells]
        centers = spec.centers_lonlat()
        picked = rng.choice(len(cells), size=5, replace=False)
        train_cells = [cells[i] for i in picked]
        values = rng.uniform(0, 20, size=5)
        model = model_from_cells(spec, train_cells, values)
        scores = score_entropy_plus_mean(model, cells, spec, alpha=0.25)
        got = select(scores)
        idx = [spec.index(c) for c in train_cells]
        want = acquisition_argmax_oracle(centers[idx], values, HP, centers,
                                         rows_cols, alpha=0.25)
        assert got == want

    def test_nonpositive_mean_normalizer_falls_back_to_raw_term(self, spec):
        cells = spec.all_cells()
        model = model_from_cells(spec, [Cell(0, 0), Cell(19, 39)],
                                 [-5.0, -1.0])
        scores = score_entropy_plus_mean(model, cells, spec, alpha=0.25)
        assert np.isfinite(scores.scores).all()
        rows_cols = [(c.row, c.col) for c in cells]
        centers = spec.centers_lonlat()
        idx = [spec.index(Cell(0, 0)), spec.index(Cell(19, 39))]
        want = acquisition_argmax_oracle(
            centers[idx], np.array([-5.0, -1.0]), HP, centers, rows_cols,
            alpha=0.25)
        assert select(scores) == want

    def test_rejects_negative_alpha(self, spec):
        with pytest.raises(ValueError):
            score_entropy_plus_mean(GpModel.prior(HP), spec.all_cells(), spec,
                                    alpha=-0.1)


class TestSelect:
    def test_all_equal_scores_pick_lowest_linear_index(self, spec):
        scores = score_entropy(GpModel.prior(HP), spec.all_cells(), spec)
        assert select(scores) == Cell(0, 0)

    def test_tie_break_skips_excluded(self, spec):
        scores = score_entropy(GpModel.prior(HP), spec.all_cells(), spec)
        assert select(scores, exclude={Cell(0, 0), Cell(0, 1)}) == Cell(0, 2)

    def test_random_is_reproducible(self, spec):
        scores = score_random(spec.all_cells())
        a = select(scores, rng=np.random.default_rng(99))
        b = select(scores, rng=np.random.default_rng(99))
        assert a == b
        assert scores.strategy is Strategy.RANDOM

    def test_random_requires_rng(self, spec):
        with pytest.raises(ValueError):
            select(score_random(spec.all_cells()))

    def test_all_excluded_raises(self, spec):
        scores = score_random(spec.all_cells())
        with pytest.raises(NoCandidates):
            select(scores, rng=np.random.default_rng(0),
                   exclude=set(spec.all_cells()))

    def test_argmax_invariant_under_affine_rescaling(self, spec, rng):
        cells = spec.all_cells()
        raw = rng.normal(size=len(cells))
        base = AcquisitionScores(raw, Strategy.ENTROPY, tuple(cells))
        scaled = AcquisitionScores(3.5 * raw + 11.0, Strategy.ENTROPY,
                                   tuple(cells))
        assert select(base) == select(scaled)

    def test_mismatched_lengths_rejected(self, spec):
        with pytest.raises(ValueError):
            AcquisitionScores(np.zeros(3), Strategy.ENTROPY,
                              (Cell(0, 0), Cell(0, 1)))
