import copy
import io
import json
import time

import numpy as np
import pandas as pd
import pytest
from conftest import SUB_SATELLITE, TABLE1

from hap_link.geodesy import project
from hap_link.models import RESULT_COLUMNS, GeographicCoord
from hap_link.scenario import (
    SWEEP_COLUMN,
    EmptyInputError,
    MissingFieldError,
    ScenarioParseError,
    ScenarioValidationError,
    Simulator,
    eirp_check,
    load_scenario,
    poi_arrivals,
    read_csv,
    run_mission,
    snr_vs_ground_distance,
    to_frame,
    to_rows,
    write_csv,
)
from hap_link.tables import TableFileError

HEADLINE_SNR_DB = 13.0584


def _load(data: dict, **kwargs):
    return load_scenario(json.dumps(data), **kwargs)


def _degrees(point: dict) -> dict:
    return {
        "latitude": point["latitudeDeg"],
        "longitude": point["longitudeDeg"],
        "altitude": point["altitudeM"],
    }


def _csv(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    write_csv(frame, buffer)
    return buffer.getvalue()


@pytest.fixture(scope="module")
def mission():
    """Reference mission sampled every 10 s."""
    data = copy.deepcopy(TABLE1)
    data["updatePeriod"] = 10.0
    return run_mission(_load(data))


@pytest.fixture
def stochastic_hop(short_hop_data):
    short_hop_data["toggles"].update(shadowing=True, forceLos=None, troposphericScint=True)
    short_hop_data["seed"] = 7
    return short_hop_data


# ---------------------------------------------------------------------------
# Loading and validation
# ---------------------------------------------------------------------------


def test_packaged_table1_loads(table1):
    assert [p.label for p in table1.hap.pois] == [
        "Takeoff",
        "Tehran",
        "Sub-satellite point",
        "Landing",
    ]
    assert [p.interest_level for p in table1.hap.pois] == [1, 4, 16, 1]
    assert table1.link.bandwidth_hz == 4e8
    assert table1.seed == 1


def test_empty_document_names_first_missing_field():
    with pytest.raises(MissingFieldError, match="satellite") as info:
        load_scenario("{}")
    assert info.value.path == "satellite"


def test_zero_update_period_rejected(table1_data):
    table1_data["updatePeriod"] = 0
    with pytest.raises(ScenarioValidationError, match="updatePeriod"):
        _load(table1_data)


def test_nested_error_path(table1_data):
    table1_data["hap"]["pois"][2]["latitudeDeg"] = 89.0
    with pytest.raises(ScenarioValidationError) as info:
        _load(table1_data)
    assert info.value.path == "hap.pois[2].latitudeDeg"


def test_unknown_key_rejected(table1_data):
    table1_data["link"]["txPowerDBm"] = 30.0
    with pytest.raises(ScenarioValidationError, match=r"link\.txPowerDBm"):
        _load(table1_data)


def test_schema_version_checked(table1_data):
    table1_data["schemaVersion"] = 2
    with pytest.raises(ScenarioValidationError, match="schemaVersion"):
        _load(table1_data)


def test_malformed_json_reports_position():
    with pytest.raises(ScenarioParseError) as info:
        load_scenario('{\n  "satellite": }')
    assert info.value.line == 2


def test_stochastic_scenario_needs_seed(table1_data):
    table1_data["toggles"]["shadowing"] = True
    del table1_data["seed"]
    with pytest.raises(ScenarioValidationError, match="seed"):
        _load(table1_data)


def test_seed_override(table1_data):
    assert _load(table1_data, seed=99).seed == 99


def test_minimal_document_takes_defaults():
    scenario = _load(
        {
            "satellite": {"position": {"latitudeDeg": 0.0, "longitudeDeg": 0.0}},
            "hap": {"pois": [SUB_SATELLITE]},
        }
    )
    assert scenario.link.carrier_frequency_ghz == 20.0
    assert scenario.hap.speed_mps == 24.0
    assert scenario.hap.antenna.max_gain_dbi == 39.7
    assert scenario.toggles.force_los is True
    assert scenario.update_period == 1.0


def test_table_paths_resolve_against_scenario_directory(table1_data, tmp_path):
    table1_data["tablePaths"] = {"clutterLoss": "tables/clutter.csv"}
    scenario = _load(table1_data, base_dir=tmp_path)
    assert scenario.table_paths.clutter_loss == tmp_path / "tables" / "clutter.csv"
    assert scenario.table_paths.shadow_fading is None


def test_eirp_check(table1_data):
    assert eirp_check(_load(table1_data)) is None
    table1_data["link"]["txPowerDbm"] = 40.0
    assert eirp_check(_load(table1_data)) == pytest.approx(2.48, abs=0.01)


# ---------------------------------------------------------------------------
# Simulator
# ---------------------------------------------------------------------------


def test_missing_table_fails_before_simulation(table1_data, tmp_path):
    table1_data["tablePaths"] = {"shadowFading": str(tmp_path / "absent.csv")}
    with pytest.raises(TableFileError):
        Simulator(_load(table1_data))


def test_workers_must_be_positive(table1):
    with pytest.raises(ValueError, match="workers"):
        Simulator(table1, workers=0)


def test_default_sample_count_follows_update_distance(table1):
    sim = Simulator(table1)
    expected = np.ceil(sim.arc_table.total_length / (24.0 * 1.0))
    assert sim.plan.sample_count == expected


def test_headline_snr_at_sub_satellite_point(table1):
    position = GeographicCoord.from_degrees(**_degrees(SUB_SATELLITE))
    sample = Simulator(table1).sample_at(position)
    assert sample.snr_db == pytest.approx(HEADLINE_SNR_DB, abs=1.5)
    assert sample.ground_distance_m < 1.0
    assert sample.elevation_deg == pytest.approx(90.0, abs=0.1)
    assert sample.capacity_bps == pytest.approx(1.78e9, rel=0.05)


def test_snr_negative_300_km_away(table1):
    position = GeographicCoord.from_degrees(0.04 + 300.0 / 111.32, -4.95, 20_000.0)
    assert Simulator(table1).sample_at(position).snr_db < 0.0


def test_max_gain_poi_is_sub_satellite_point(table1):
    assert Simulator(table1).max_gain_poi() == 2


def test_mission_headline(mission):
    assert list(mission.columns) == list(RESULT_COLUMNS)
    best = mission.loc[mission["snr_db"].idxmax()]
    assert best["snr_db"] == pytest.approx(HEADLINE_SNR_DB, abs=1.5)
    assert best["ground_m"] <= 50_000.0


def test_mission_rows_are_time_ordered(mission):
    assert mission["time_s"].iloc[0] == 0.0
    np.testing.assert_allclose(np.diff(mission["time_s"]), 10.0)
    assert (mission["elev_deg"] > 0.0).all()


def test_coverage_radius(mission):
    curve = snr_vs_ground_distance(mission)
    assert curve["ground_m"].is_monotonic_increasing
    covered = curve.loc[curve["snr_db"] > 0.0, "ground_m"]
    assert 50_000.0 <= covered.max() <= 200_000.0
    assert (curve.loc[curve["ground_m"] > 300_000.0, "snr_db"] < 0.0).all()


def test_deterministic_terms_only_by_default(mission):
    for column in ("sf_db", "cl_db", "tscint_db", "iscint_db"):
        assert (mission[column] == 0.0).all()


def test_transmit_power_shifts_every_sample(short_hop_data):
    base = run_mission(_load(short_hop_data))
    short_hop_data["link"]["txPowerDbm"] += 3.5
    louder = run_mission(_load(short_hop_data))
    np.testing.assert_allclose(louder["snr_db"] - base["snr_db"], 3.5, atol=1e-9)


def test_full_mission_runs_within_a_minute(table1):
    started = time.perf_counter()
    frame = run_mission(table1)
    assert time.perf_counter() - started <= 60.0
    assert len(frame) > 0


def test_uniform_samples_span_the_plan(short_hop_data):
    sim = Simulator(_load(short_hop_data))
    samples = sim.uniform_samples()
    assert len(samples) == sim.plan.sample_count + 1
    for sample, poi in ((samples[0], sim.plan.pois[0]), (samples[-1], sim.plan.pois[-1])):
        x, y = project(poi.position.latitude, poi.position.longitude)
        assert (sample.x, sample.y) == pytest.approx((float(x), float(y)), abs=1e-6)
        assert sample.z == pytest.approx(poi.position.altitude)


def test_hover_keeps_snr_constant(short_hop_data):
    short_hop_data["hap"]["pois"] = [SUB_SATELLITE, SUB_SATELLITE]
    short_hop_data["hap"]["hoverDurationS"] = 10.0
    frame = run_mission(_load(short_hop_data))
    assert len(frame) == 11
    assert np.ptp(frame["snr_db"].to_numpy()) < 1e-9
    assert frame["time_s"].iloc[-1] == 10.0


def test_single_row_hover(short_hop_data):
    short_hop_data["hap"]["pois"] = [SUB_SATELLITE]
    assert len(run_mission(_load(short_hop_data))) == 1


def test_progress_reports_every_chunk(short_hop_data):
    calls = []
    run_mission(_load(short_hop_data), chunk_size=100, on_progress=lambda *c: calls.append(c))
    assert calls[-1][0] == calls[-1][1]
    assert [d for d, _ in calls] == list(range(1, len(calls) + 1))


# ---------------------------------------------------------------------------
# Determinism
# ---------------------------------------------------------------------------


def test_same_seed_same_bytes_for_any_worker_count(stochastic_hop):
    scenario = _load(stochastic_hop)
    serial = _csv(run_mission(scenario, workers=1, chunk_size=50))
    parallel = _csv(run_mission(scenario, workers=4, chunk_size=50))
    again = _csv(run_mission(scenario, workers=3, chunk_size=50))
    assert serial == parallel == again


def test_stochastic_terms_present_and_seeded(stochastic_hop):
    first = run_mission(_load(stochastic_hop), chunk_size=50)
    other = run_mission(_load(stochastic_hop, seed=8), chunk_size=50)
    assert (first["sf_db"] != 0.0).any()
    assert (first["tscint_db"] > 0.0).all()
    assert not first["sf_db"].equals(other["sf_db"])


# ---------------------------------------------------------------------------
# Frequency sweep
# ---------------------------------------------------------------------------


def test_sweep_shows_oxygen_dip(table1):
    frame = Simulator(table1).sweep_frequency(20.0, 100.0, 1.0)
    assert len(frame) == 81
    assert frame.columns[0] == SWEEP_COLUMN
    snr = frame.set_index(SWEEP_COLUMN)["snr_db"]
    assert snr[60.0] <= (snr[50.0] + snr[70.0]) / 2.0 - 10.0
    assert (snr[snr.index <= 50.0] > 0.0).all()


def test_sweep_at_reference_frequency_matches_mission_peak(short_hop_data):
    scenario = _load(short_hop_data)
    sweep = Simulator(scenario).sweep_frequency(20.0, 20.0, 1.0)
    peak = run_mission(scenario)["snr_db"].max()
    assert len(sweep) == 1
    assert sweep["snr_db"].iloc[0] == pytest.approx(peak, abs=0.1)


def test_sweep_range_checked(table1):
    with pytest.raises(ValueError, match="fstart"):
        Simulator(table1).sweep_frequency(30.0, 20.0, 1.0)
    with pytest.raises(ValueError, match="step"):
        Simulator(table1).sweep_frequency(20.0, 30.0, 0.0)


# ---------------------------------------------------------------------------
# Reductions and CSV
# ---------------------------------------------------------------------------


def test_snr_vs_ground_distance_averages_repeats():
    frame = pd.DataFrame({"ground_m": [5.0, 1.0, 5.0], "snr_db": [2.0, 9.0, 4.0]})
    curve = snr_vs_ground_distance(frame)
    assert curve["ground_m"].tolist() == [1.0, 5.0]
    assert curve["snr_db"].tolist() == [9.0, 3.0]


def test_snr_vs_ground_distance_needs_rows():
    with pytest.raises(EmptyInputError):
        snr_vs_ground_distance([])


def test_csv_round_trip_is_exact(short_hop_data):
    frame = run_mission(_load(short_hop_data))
    text = _csv(frame)
    assert text.splitlines()[0] == ",".join(RESULT_COLUMNS)
    pd.testing.assert_frame_equal(read_csv(io.StringIO(text)), frame, check_exact=True)


def test_rows_and_frames_agree(short_hop_data):
    frame = run_mission(_load(short_hop_data))
    rows = to_rows(frame)
    assert len(rows) == len(frame)
    pd.testing.assert_frame_equal(to_frame(rows), frame)


# ---------------------------------------------------------------------------
# PoI arrivals
# ---------------------------------------------------------------------------


def test_arrivals_follow_the_flight(table1, mission):
    arrivals = Simulator(table1).poi_arrivals(mission)
    assert arrivals["label"].tolist() == ["Takeoff", "Tehran", "Sub-satellite point", "Landing"]
    takeoff, _, overhead, landing = arrivals.itertuples(index=False)
    assert takeoff.time_s == 0.0
    assert takeoff.distance_m < 1.0
    assert landing.time_s == mission["time_s"].iloc[-1]
    assert landing.distance_m < 300.0
    assert overhead.distance_m == pytest.approx(mission["ground_m"].min(), abs=1e-3)
    assert 0.0 < overhead.time_s < landing.time_s


def test_arrivals_need_rows(table1):
    with pytest.raises(EmptyInputError):
        poi_arrivals(pd.DataFrame(columns=list(RESULT_COLUMNS)), Simulator(table1).plan.pois)
