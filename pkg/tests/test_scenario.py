import json
import math

import numpy as np
import pytest

from fieldwork.errors import DegenerateField, FormatError
from fieldwork.gp import Hyperparams
from fieldwork.scenario import (
    Cell,
    Field,
    GmmSpec,
    GridSpec,
    M_PER_DEG,
    Provenance,
    add_noise_and_rescale,
    build_scenario,
    cell_center_lonlat,
    generate_gmm_field,
    generate_gp_field,
    load_scenario,
    save_scenario,
)
from oracles import variogram_length_scale


class TestGridSpec:
    def test_default_grid_is_40_by_20(self, spec):
        assert (spec.cols, spec.rows, spec.n_cells) == (40, 20, 800)

    def test_extents_must_be_cell_multiples(self):
        with pytest.raises(ValueError):
            GridSpec(width_m=405.0)
        with pytest.raises(ValueError):
            GridSpec(cell_m=-1.0)

    def test_origin_cell_center(self, spec):
        lon, lat = cell_center_lonlat(spec, Cell(0, 0))
        assert lat == pytest.approx(34.086 + 5.0 / M_PER_DEG, abs=1e-15)
        assert lon == pytest.approx(
            5.0 / (M_PER_DEG * math.cos(math.radians(34.086))), abs=1e-15)

    def test_adjacent_columns_longitude_gap(self, spec):
        lon0, _ = cell_center_lonlat(spec, Cell(0, 0))
        lon1, _ = cell_center_lonlat(spec, Cell(0, 1))
        expected = 10.0 / (M_PER_DEG * math.cos(math.radians(34.086)))
        assert lon1 - lon0 == pytest.approx(expected, rel=1e-12)

    def test_adjacent_rows_latitude_gap(self, spec):
        for row in (0, 7, 18):
            _, lat_a = cell_center_lonlat(spec, Cell(row, 3))
            _, lat_b = cell_center_lonlat(spec, Cell(row + 1, 3))
            assert lat_b - lat_a == pytest.approx(10.0 / M_PER_DEG, rel=1e-12)

    def test_centers_match_scalar_conversion(self, spec):
        centers = spec.centers_lonlat()
        probe = Cell(13, 27)
        lon, lat = cell_center_lonlat(spec, probe)
        assert centers[spec.index(probe)] == pytest.approx([lon, lat])


class TestGpField:
    def test_deterministic_per_seed(self, spec, scenario_hp):
        a = generate_gp_field(spec, scenario_hp, seed=4)
        b = generate_gp_field(spec, scenario_hp, seed=4)
        assert (a.values == b.values).all()
        c = generate_gp_field(spec, scenario_hp, seed=5)
        assert (a.values != c.values).any()

    def test_variogram_recovers_length_scale(self, spec, scenario_hp):
        ratios = []
        for seed in range(3):
            field = generate_gp_field(spec, scenario_hp, seed)
            ratios.append(variogram_length_scale(field) / scenario_hp.l)
        assert 0.5 <= float(np.median(ratios)) <= 2.0

    def test_single_cell_grid_samples_prior_variance(self, scenario_hp):
        tiny = GridSpec(width_m=10.0, height_m=10.0, cell_m=10.0)
        draws = np.array([
            generate_gp_field(tiny, scenario_hp, seed).values[0]
            for seed in range(10_000)
        ])
        assert draws.var() == pytest.approx(scenario_hp.sf2, rel=0.05)

    def test_spatial_mean_is_small(self, spec, scenario_hp):
        # Var(spatial mean) = average covariance entry, exactly computable;
        # equivalently sf2 / n_eff for the effective sample count
        from fieldwork import backend

        cov = backend.se_sym(spec.centers_lonlat(), scenario_hp.l, scenario_hp.sf2, 0.0)
        sigma_mean = math.sqrt(cov.mean())
        means = [generate_gp_field(spec, scenario_hp, s).values.mean()
                 for s in range(40)]
        violations = sum(abs(m) > 3.0 * sigma_mean for m in means)
        assert violations <= 2
        assert abs(np.mean(means)) < sigma_mean


class TestGmmField:
    def test_deterministic_per_seed(self, spec):
        a = generate_gmm_field(spec, seed=9)
        b = generate_gmm_field(spec, seed=9)
        assert (a.values == b.values).all()

    def test_nonnegative_before_rescaling(self, spec):
        for seed in range(10):
            assert generate_gmm_field(spec, seed).values.min() >= 0.0

    def test_single_isotropic_component_peaks_at_mean(self, spec):
        gmm = GmmSpec(
            n_components=1,
            means=np.array([[173.0, 88.0]]),
            covariances=np.array([[[900.0, 0.0], [0.0, 900.0]]]),
            weights=np.array([1.0]),
        )
        values = gmm.density(spec.centers_m())
        centers = spec.centers_m()
        # brute-force argmax over all 800 cells
        nearest = min(range(spec.n_cells),
                      key=lambda i: np.hypot(*(centers[i] - [173.0, 88.0])))
        assert int(np.argmax(values)) == nearest

    def test_mixture_is_sum_of_components(self, spec):
        rng = np.random.default_rng(3)
        means = np.array([[100.0, 50.0], [300.0, 150.0]])
        covs = np.array([[[400.0, 0.0], [0.0, 900.0]],
                         [[2500.0, 300.0], [300.0, 1600.0]]])
        weights = np.array([0.6, 0.9])
        both = GmmSpec(2, means, covs, weights)
        parts = [
            GmmSpec(1, means[i:i + 1], covs[i:i + 1], weights[i:i + 1])
            for i in range(2)
        ]
        pts = rng.uniform([0, 0], [400, 200], size=(17, 2))
        np.testing.assert_allclose(
            both.density(pts), parts[0].density(pts) + parts[1].density(pts),
            rtol=1e-12)

    def test_rejects_non_spd_covariance(self):
        with pytest.raises(ValueError):
            GmmSpec(1, np.array([[1.0, 1.0]]),
                    np.array([[[1.0, 2.0], [2.0, 1.0]]]), np.array([1.0]))


class TestNoiseAndRescale:
    def test_identity_when_already_spanning(self, spec, rng):
        values = rng.uniform(0.0, 20.0, size=spec.n_cells)
        values[0], values[1] = 0.0, 20.0
        field = Field(spec, values, Provenance.GMM, name="x")
        out = add_noise_and_rescale(field, noise_frac=0.0)
        np.testing.assert_array_equal(out.values, values)

    def test_endpoints_attained_exactly(self, spec, scenario_hp):
        for seed in (0, 1, 2):
            raw = generate_gp_field(spec, scenario_hp, seed)
            out = add_noise_and_rescale(raw, seed=seed)
            assert out.values.min() == 0.0
            assert out.values.max() == 20.0

    def test_constant_zero_field_degenerates(self, spec):
        field = Field(spec, np.zeros(spec.n_cells), Provenance.GMM, name="flat")
        with pytest.raises(DegenerateField):
            add_noise_and_rescale(field, noise_frac=0.05)

    def test_noise_is_bounded_and_seeded(self, spec, scenario_hp):
        raw = generate_gp_field(spec, scenario_hp, 0)
        a = add_noise_and_rescale(raw, seed=7)
        b = add_noise_and_rescale(raw, seed=7)
        assert (a.values == b.values).all()
        assert a.values.min() >= 0.0 and a.values.max() <= 20.0

    def test_validates_arguments(self, spec, gp_scenario):
        with pytest.raises(ValueError):
            add_noise_and_rescale(gp_scenario, noise_frac=1.5)
        with pytest.raises(ValueError):
            add_noise_and_rescale(gp_scenario, lo=5.0, hi=5.0)


class TestScenarioFiles:
    def test_round_trip_is_bit_exact(self, tmp_path, gp_scenario):
        path = tmp_path / "scen.json"
        save_scenario(gp_scenario, str(path))
        loaded = load_scenario(str(path))
        assert (loaded.values == gp_scenario.values).all()
        assert loaded.grid == gp_scenario.grid
        assert loaded.name == gp_scenario.name
        assert loaded.provenance == gp_scenario.provenance
        assert loaded.seed == gp_scenario.seed

    def test_wrong_value_count_rejected(self, tmp_path, gp_scenario):
        path = tmp_path / "scen.json"
        save_scenario(gp_scenario, str(path))
        payload = json.loads(path.read_text())
        payload["values"] = payload["values"][:-3]
        path.write_text(json.dumps(payload))
        with pytest.raises(FormatError, match="values length"):
            load_scenario(str(path))

    def test_unknown_provenance_named_in_error(self, tmp_path, gp_scenario):
        path = tmp_path / "scen.json"
        save_scenario(gp_scenario, str(path))
        payload = json.loads(path.read_text())
        payload["provenance"] = "volcanic"
        path.write_text(json.dumps(payload))
        with pytest.raises(FormatError, match="volcanic"):
            load_scenario(str(path))

    def test_bad_json_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"format_version": 1,\n  "oops"')
        with pytest.raises(FormatError, match="line"):
            load_scenario(str(path))


class TestBuildScenario:
    def test_gp_pipeline_spans_range(self, spec):
        field = build_scenario("gp", spec, seed=3)
        assert field.values.min() == 0.0
        assert field.values.max() == 20.0
        assert field.provenance is Provenance.GP_SAMPLE

    def test_gmm_pipeline_spans_range(self, spec):
        field = build_scenario("gmm", spec, seed=3)
        assert field.values.min() == 0.0
        assert field.values.max() == 20.0
        assert field.provenance is Provenance.GMM

    def test_unknown_kind_rejected(self, spec):
        with pytest.raises(ValueError):
            build_scenario("perlin", spec, seed=0)
