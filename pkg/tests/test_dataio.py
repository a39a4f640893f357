"""Serialization: CSV and JSON exports, spectrum dialects, bundled data."""
import json
import math

import numpy as np
import pytest

from cmpkit import (
    DB_FLOOR,
    FeedConfig,
    SweepSpec,
    SystemParams,
    bundled_dataset,
    cpa_feed_conditions,
    export_csv,
    export_csv_set,
    export_fit_json,
    export_json,
    export_minima_csv,
    fit_coupled,
    frequency_grid,
    import_json,
    linear_grid,
    load_spectrum_csv,
    minima_trace,
    save_spectrum_csv,
    sweep_field,
    sweep_phase,
    sweep_ratio,
    synth_spectrum,
)
from cmpkit.dataio import SWEEP_CSV_COLUMNS, sweep_from_dict, sweep_to_dict


@pytest.fixture
def field_result(reference_params):
    spec = SweepSpec(
        parameter="omega_m",
        values=linear_grid(10018.0, 10030.0, 4.0),
        freqs=frequency_grid(10023.6, 10.0, 2.5),
        params=reference_params,
        quantity="s11",
    )
    return sweep_field(spec)


@pytest.fixture
def ratio_result(balanced_params):
    spec = SweepSpec(
        parameter="q",
        values=np.array([0.5, 1.4, 2.0]),
        freqs=np.array([balanced_params.omega_c - 3.6, balanced_params.omega_c]),
        params=balanced_params,
        quantity="total",
        feed=FeedConfig(delta_phi=0.0, q=1.0),
    )
    return sweep_ratio(spec)


class TestExportCsv:
    def test_header_and_columns(self, field_result, tmp_path):
        path = tmp_path / "sweep.csv"
        export_csv(field_result, path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# cmpkit.sweep/1 v")
        assert "# quantity = s11" in lines
        assert any("power_dB = 10*log10(power / input_power)" in l for l in lines)
        assert any(l.startswith("# input_power = ") for l in lines)
        header_idx = next(i for i, l in enumerate(lines) if not l.startswith("#"))
        assert lines[header_idx] == ",".join(SWEEP_CSV_COLUMNS)

    def test_row_count_and_sweep_major_order(self, field_result, tmp_path):
        path = tmp_path / "sweep.csv"
        export_csv(field_result, path)
        rows = [
            l.split(",")
            for l in path.read_text().splitlines()
            if l and not l.startswith("#") and not l.startswith("sweep_param")
        ]
        n, m = field_result.power.shape
        assert len(rows) == n * m
        assert all(r[0] == "omega_m_MHz" for r in rows)
        # first block is the first sweep value across all frequencies
        first = rows[:m]
        assert {r[1] for r in first} == {repr(float(field_result.sweep_values[0]))}
        freqs = [float(r[2]) for r in first]
        assert freqs == [float(f) for f in field_result.freqs]

    def test_values_round_trip_through_repr(self, field_result, tmp_path):
        path = tmp_path / "sweep.csv"
        export_csv(field_result, path)
        rows = [
            l.split(",")
            for l in path.read_text().splitlines()
            if l and not l.startswith("#") and not l.startswith("sweep_param")
        ]
        n, m = field_result.power.shape
        parsed = np.array([float(r[3]) for r in rows]).reshape(n, m)
        assert np.array_equal(parsed, field_result.power)
        parsed_db = np.array([float(r[4]) for r in rows]).reshape(n, m)
        assert np.array_equal(parsed_db, field_result.power_db)

    def test_ratio_sweep_states_per_row_input(self, ratio_result, tmp_path):
        path = tmp_path / "ratio.csv"
        export_csv(ratio_result, path)
        text = path.read_text()
        assert "# input_power = 1 + q, per sweep row" in text

    def test_writes_parent_directories(self, field_result, tmp_path):
        path = tmp_path / "deep" / "nested" / "sweep.csv"
        export_csv(field_result, path)
        assert path.is_file()


class TestExportCsvSet:
    def test_uniform_quantity_required(self, field_result, ratio_result, tmp_path):
        with pytest.raises(ValueError, match="uniform quantity"):
            export_csv_set([field_result, ratio_result], tmp_path / "set.csv")

    def test_member_count_recorded(self, field_result, tmp_path):
        path = tmp_path / "set.csv"
        export_csv_set([field_result, field_result], path)
        text = path.read_text()
        assert "# members = 2" in text
        rows = [
            l for l in text.splitlines() if l and not l.startswith(("#", "sweep_param"))
        ]
        assert len(rows) == 2 * field_result.power.size

    def test_empty_set_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="empty"):
            export_csv_set([], tmp_path / "set.csv")


class TestJsonRoundTrip:
    def test_sweep_round_trip_bit_exact(self, field_result, tmp_path):
        path = tmp_path / "sweep.json"
        export_json(field_result, path)
        back = import_json(path)
        assert np.array_equal(back.power, field_result.power)
        assert np.array_equal(back.sweep_values, field_result.sweep_values)
        assert np.array_equal(back.freqs, field_result.freqs)
        assert back.quantity == field_result.quantity
        assert back.input_power == field_result.input_power
        assert back.metadata == field_result.metadata

    def test_ratio_sweep_preserves_per_row_input(self, ratio_result, tmp_path):
        path = tmp_path / "ratio.json"
        export_json(ratio_result, path)
        back = import_json(path)
        assert np.array_equal(back.input_power, ratio_result.input_power)
        assert np.array_equal(back.power_db, ratio_result.power_db)

    def test_overlays_survive(self, reference_params, tmp_path):
        feed = cpa_feed_conditions(reference_params)
        spec = SweepSpec(
            parameter="omega_m",
            values=linear_grid(10018.0, 10030.0, 4.0),
            freqs=frequency_grid(10023.6, 10.0, 2.5),
            params=reference_params,
            quantity="total",
            feed=feed,
        )
        result = sweep_field(spec)
        assert result.overlays
        path = tmp_path / "overlaid.json"
        export_json(result, path)
        back = import_json(path)
        assert [o.name for o in back.overlays] == [o.name for o in result.overlays]
        for a, b in zip(back.overlays, result.overlays):
            assert np.array_equal(a.freqs, b.freqs)
            assert np.array_equal(a.sweep_values, b.sweep_values)

    def test_sweep_set_round_trip(self, field_result, tmp_path):
        path = tmp_path / "set.json"
        export_json([field_result, field_result], path)
        back = import_json(path)
        assert isinstance(back, list) and len(back) == 2
        assert np.array_equal(back[1].power, field_result.power)

    def test_schema_dispatch_and_errors(self, field_result, tmp_path):
        path = tmp_path / "sweep.json"
        export_json(field_result, path)
        doc = json.loads(path.read_text())
        assert doc["schema"] == "cmpkit.sweep/1"
        with pytest.raises(ValueError, match="cmpkit.sweep/1"):
            sweep_from_dict({"schema": "cmpkit.fit/1"})
        bad = tmp_path / "bad.json"
        bad.write_text('{"schema": "other/1"}')
        with pytest.raises(ValueError, match="not a cmpkit"):
            import_json(bad)

    def test_string_input_rejected(self, tmp_path):
        with pytest.raises(TypeError, match="str"):
            export_json("not a sweep", tmp_path / "bad.json")

    def test_json_has_no_nan(self, field_result, tmp_path):
        doc = sweep_to_dict(field_result)
        # floored dB keeps every number finite so strict JSON can hold it
        text = json.dumps(doc, allow_nan=False)
        assert "NaN" not in text

    def test_minima_json(self, reference_params, coupling_map, tmp_path):
        from cmpkit import DEFAULT_PERTURBATION, sweep_displacement

        spec = SweepSpec(
            parameter="x",
            values=linear_grid(-4.0, 4.0, 1.0),
            freqs=frequency_grid(10023.6, 30.0, 0.02),
            params=reference_params,
            quantity="total",
            feed=cpa_feed_conditions(reference_params),
            coupling=coupling_map,
            overrides=DEFAULT_PERTURBATION,
        )
        trace = minima_trace(sweep_displacement(spec))
        path = tmp_path / "minima.json"
        export_json(trace, path)
        doc = import_json(path)
        assert doc["schema"] == "cmpkit.minima/1"
        assert doc["sweep_values"] == trace.sweep_values.tolist()
        assert doc["branch_averaged"] == [bool(b) for b in trace.branch_averaged]


class TestMinimaCsv:
    def test_columns_include_branch_flag(self, reference_params, coupling_map, tmp_path):
        from cmpkit import DEFAULT_PERTURBATION, sweep_displacement

        spec = SweepSpec(
            parameter="x",
            values=linear_grid(-4.0, 4.0, 1.0),
            freqs=frequency_grid(10023.6, 30.0, 0.02),
            params=reference_params,
            quantity="total",
            feed=cpa_feed_conditions(reference_params),
            coupling=coupling_map,
            overrides=DEFAULT_PERTURBATION,
        )
        trace = minima_trace(sweep_displacement(spec))
        path = tmp_path / "minima.csv"
        export_minima_csv(trace, path)
        lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == ",".join(SWEEP_CSV_COLUMNS + ("branch_averaged",))
        assert len(lines) - 1 == trace.sweep_values.size
        flags = [int(l.split(",")[5]) for l in lines[1:]]
        assert flags == [int(b) for b in trace.branch_averaged]


class TestFitJson:
    def test_fit_result_serializes(self, tmp_path):
        truth = SystemParams(
            omega_c=10023.6, omega_m=10023.6, g_m=9.2,
            kappa_1=1.72, kappa_2=2.94, kappa_int=0.0, gamma_m=1.5,
        )
        data = synth_spectrum(truth, (10003.6, 10043.6), 0.1, kind="s11")
        fit = fit_coupled(data, guess=truth)
        path = tmp_path / "fit.json"
        export_fit_json(fit, path)
        doc = import_json(path)
        assert doc["schema"] == "cmpkit.fit/1"
        assert doc["model"] == "reflection"
        assert doc["converged"] is True
        assert doc["estimates"]["g_m"] == fit.estimates["g_m"]
        assert doc["stderr"].keys() == doc["estimates"].keys()


class TestSpectrumCsv:
    def test_complex_round_trip_bit_exact(self, tmp_path):
        truth = SystemParams(
            omega_c=10023.6, omega_m=10023.6, g_m=9.2,
            kappa_1=1.72, kappa_2=2.94, kappa_int=0.0, gamma_m=1.5,
        )
        data = synth_spectrum(truth, (10013.6, 10033.6), 0.5, kind="s21")
        path = tmp_path / "spec.csv"
        save_spectrum_csv(data, path)
        back = load_spectrum_csv(path)
        assert back.kind == "s21"
        assert np.array_equal(back.values, data.values)
        # GHz round trip may move a frequency by one part in 2**52
        assert np.allclose(back.freqs, data.freqs, rtol=1e-15, atol=0.0)

    def test_power_round_trip_through_db(self, tmp_path):
        truth = SystemParams(
            omega_c=10023.6, omega_m=10023.6, g_m=3.9,
            kappa_1=1.72, kappa_2=2.94, kappa_int=0.0, gamma_m=1.5,
        )
        data = synth_spectrum(truth, (10013.6, 10033.6), 0.5, kind="s11_power")
        path = tmp_path / "power.csv"
        save_spectrum_csv(data, path, db_reference=2.0)
        text = path.read_text()
        assert "# db_reference = 2.0" in text
        assert "freq_GHz,power_dB" in text
        back = load_spectrum_csv(path)
        assert back.kind == "s11_power"
        assert np.allclose(back.values, data.values, rtol=1e-12)

    def test_power_file_without_reference_rejected(self, tmp_path):
        path = tmp_path / "noref.csv"
        rows = "\n".join(f"{10.0 + 0.001 * k},-3.0" for k in range(12))
        path.write_text("freq_GHz,power_dB\n" + rows + "\n")
        with pytest.raises(ValueError, match="db_reference"):
            load_spectrum_csv(path)

    def test_unknown_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("freq_MHz,re,im\n" + "\n".join("1,2,3" for _ in range(12)))
        with pytest.raises(ValueError, match="header"):
            load_spectrum_csv(path)

    def test_non_numeric_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        rows = "\n".join(f"{10.0 + 0.001 * k},0.1,0.2" for k in range(11))
        path.write_text("freq_GHz,re,im\n" + rows + "\nten,0.1,0.2\n")
        with pytest.raises(ValueError, match="non-numeric"):
            load_spectrum_csv(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("# only comments\n")
        with pytest.raises(ValueError, match="no data"):
            load_spectrum_csv(path)

    def test_quantity_comment_sets_kind(self, tmp_path):
        path = tmp_path / "s21.csv"
        rows = "\n".join(f"{10.0 + 0.001 * k},0.1,0.2" for k in range(12))
        path.write_text("# quantity = s21\nfreq_GHz,re,im\n" + rows + "\n")
        assert load_spectrum_csv(path).kind == "s21"

    def test_total_quantity_rejected_for_fit_data(self, tmp_path):
        path = tmp_path / "total.csv"
        rows = "\n".join(f"{10.0 + 0.001 * k},-3.0" for k in range(12))
        path.write_text(
            "# quantity = total\n# db_reference = 1.0\nfreq_GHz,power_dB\n" + rows + "\n"
        )
        with pytest.raises(ValueError, match="quantity"):
            load_spectrum_csv(path)

    def test_db_floor_respected_when_saving(self, tmp_path):
        from cmpkit import SpectrumDataset

        freqs = np.linspace(10000.0, 10010.0, 11)
        values = np.full(11, 1e-45)  # below the floor
        data = SpectrumDataset(freqs=freqs, values=values, kind="s11_power")
        path = tmp_path / "floor.csv"
        save_spectrum_csv(data, path)
        dbs = [
            float(l.split(",")[1])
            for l in path.read_text().splitlines()
            if l and not l.startswith(("#", "freq_GHz"))
        ]
        assert all(db == DB_FLOOR for db in dbs)


class TestBundledDataset:
    def test_exists_and_loads(self):
        path = bundled_dataset()
        data = load_spectrum_csv(path)
        assert data.kind == "s11"
        assert data.is_complex
        assert data.freqs.size == 801

    def test_fit_recovers_generator_parameters(self):
        data = load_spectrum_csv(bundled_dataset())
        generator = SystemParams(
            omega_c=10023.6, omega_m=10023.6, g_m=9.2,
            kappa_1=1.72, kappa_2=2.94, kappa_int=0.0, gamma_m=1.5,
        )
        from cmpkit import estimate_coupled_guess

        fit = fit_coupled(data, guess=estimate_coupled_guess(data))
        assert fit.converged
        assert fit.estimates["omega_c"] == pytest.approx(generator.omega_c, abs=1e-6)
        assert fit.estimates["g_m"] == pytest.approx(generator.g_m, rel=1e-6)
        assert fit.estimates["gamma_m"] == pytest.approx(generator.gamma_m, rel=1e-6)
        assert fit.estimates["kappa_1"] == pytest.approx(generator.kappa_1, rel=1e-6)
        assert fit.estimates["kappa_loss"] == pytest.approx(2.94, rel=1e-6)

    def test_unknown_name_rejected(self):
        with pytest.raises(FileNotFoundError):
            bundled_dataset("missing.csv")
