# scenario.py
# Scenario loading and the simulation loop.
#
# The Simulator owns the run: it turns a validated Scenario into the link,
# trajectory and channel inputs, evaluates samples in fixed-size chunks and
# assembles the result frame in chunk order. No terminal output here; callers
# pass an optional progress callback.
#
# Randomness: chunk c draws from Philox(key=seed, counter=c << 192), two
# uniforms per sample (LOS, shadow fading). Chunk boundaries do not depend on
# the worker count, so output is identical for any degree of parallelism.

import json
import math
import sys
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import IO

import numpy as np
import pandas as pd
from pydantic import ValidationError

from hap_link.channel import (
    UNIFORMS_PER_SAMPLE,
    BelowHorizonError,
    channel_losses,
    evaluate_channel,
    link_geometry,
)
from hap_link.geodesy import WGS84, great_circle
from hap_link.linkbudget import (
    EIRP_TOLERANCE_DB,
    antenna_gains,
    compute_snr,
    eirp_mismatch_db,
    link_snr,
    shannon_capacity,
)
from hap_link.models import (
    RESULT_COLUMNS,
    AntennaConfig,
    AntennaSettings,
    ChannelOptions,
    GeographicCoord,
    GeoPoint,
    LinkConfig,
    PointOfInterest,
    ProjectedCoord,
    ResultRow,
    Scenario,
    SnrSample,
    TimedTrajectory,
    TrajectoryPlan,
)
from hap_link.tables import LossTables, load_tables
from hap_link.trajectory import (
    ArcLengthTable,
    constant_speed_timeline,
    curve_geodetic,
    sample_uniform_parameter,
    step_count,
)

CHUNK_SIZE = 65_536
KNOTS_PER_RESOLUTION_UNIT = 100
SWEEP_COLUMN = "freq_ghz"
ARRIVAL_COLUMNS = ("poi", "label", "time_s", "distance_m")

ProgressCallback = Callable[[int, int], None]


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------


class ScenarioError(Exception):
    """Base class for scenario documents that cannot be turned into a Scenario."""


class ScenarioParseError(ScenarioError):
    """Raised when the scenario document is not well-formed JSON."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ScenarioValidationError(ScenarioError):
    """Raised when a scenario field violates its constraints."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class MissingFieldError(ScenarioValidationError):
    """Raised when a required scenario field is absent."""


class EmptyInputError(ValueError):
    """Raised when an operation needs at least one result row and got none."""


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def _error_path(loc: Iterable) -> str:
    """Dotted JSON path with list indices in brackets, e.g. hap.pois[2].latitudeDeg."""
    path = ""
    for part in loc:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else str(part))
    return path


def load_scenario(
    text: str, base_dir: Path | None = None, seed: int | None = None
) -> Scenario:
    """Parse and validate a scenario document.

    Relative `tablePaths` resolve against `base_dir`. A `seed` given here
    replaces the document's seed before validation.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(exc.msg, exc.lineno, exc.colno) from exc

    if seed is not None and isinstance(data, dict):
        data["seed"] = seed

    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        path = _error_path(first["loc"])
        if first["type"] == "missing":
            raise MissingFieldError(path, "field required") from exc
        raise ScenarioValidationError(path, first["msg"]) from exc

    if base_dir is not None:
        resolved = {
            name: (base_dir / path) if not path.is_absolute() else path
            for name, path in scenario.table_paths.model_dump().items()
            if path is not None
        }
        scenario = scenario.model_copy(
            update={"table_paths": scenario.table_paths.model_copy(update=resolved)}
        )
    return scenario


def load_scenario_file(path: Path, seed: int | None = None) -> Scenario:
    return load_scenario(path.read_text(encoding="utf-8"), base_dir=path.parent, seed=seed)


def eirp_check(scenario: Scenario) -> float | None:
    """EIRP mismatch in dB when it exceeds tolerance, else None."""
    density = scenario.link.eirp_density_dbw_per_mhz
    if density is None:
        return None
    gap = eirp_mismatch_db(link_config(scenario), density)
    return gap if abs(gap) > EIRP_TOLERANCE_DB else None


# ---------------------------------------------------------------------------
# Scenario -> core types
# ---------------------------------------------------------------------------


def _position(point: GeoPoint) -> GeographicCoord:
    return GeographicCoord.from_degrees(point.latitude_deg, point.longitude_deg, point.altitude_m)


def _antenna(settings: AntennaSettings, carrier_ghz: float) -> AntennaConfig:
    return AntennaConfig(
        max_gain_dbi=settings.max_gain_dbi,
        aperture_diameter_m=settings.aperture_diameter_m,
        boresight_inclination_deg=settings.boresight_inclination_deg,
        boresight_azimuth_deg=settings.boresight_azimuth_deg,
        gain_floor_db=settings.gain_floor_db,
        carrier_frequency_ghz=settings.carrier_frequency_ghz or carrier_ghz,
    )


def link_config(scenario: Scenario, carrier_ghz: float | None = None) -> LinkConfig:
    """Downlink config; `carrier_ghz` retunes the link and every unpinned antenna."""
    fc = carrier_ghz or scenario.link.carrier_frequency_ghz
    return LinkConfig(
        tx_power_dbm=scenario.link.tx_power_dbm,
        tx_antenna=_antenna(scenario.satellite.antenna, fc),
        rx_antenna=_antenna(scenario.hap.antenna, fc),
        bandwidth_hz=scenario.link.bandwidth_hz,
        noise_figure_db=scenario.link.noise_figure_db,
        carrier_frequency_ghz=fc,
    )


def trajectory_plan(scenario: Scenario) -> TrajectoryPlan:
    pois = [
        PointOfInterest(position=_position(p), interest_level=p.interest_level, label=p.label)
        for p in scenario.hap.pois
    ]
    return TrajectoryPlan(
        pois=pois,
        sample_count=scenario.hap.sample_count or 1000,
        speed=scenario.hap.speed_mps,
        arc_knots=max(2, round(KNOTS_PER_RESOLUTION_UNIT * scenario.time_resolution)),
    )


def channel_options(scenario: Scenario) -> ChannelOptions:
    t = scenario.toggles
    return ChannelOptions(
        shadowing=t.shadowing,
        tropospheric_scint=t.tropospheric_scint,
        ionospheric_scint=t.ionospheric_scint,
        force_los=t.force_los,
        atmospheric_column_fraction=t.atmospheric_column_fraction,
        band=scenario.band,
        p_fluc_4ghz=scenario.p_fluc_4ghz,
    )


# ---------------------------------------------------------------------------
# Simulator
# ---------------------------------------------------------------------------


class Simulator:
    """Runs one scenario. Loss tables are loaded once and shared by all workers."""

    def __init__(
        self,
        scenario: Scenario,
        tables: LossTables | None = None,
        workers: int = 1,
        chunk_size: int = CHUNK_SIZE,
        on_progress: ProgressCallback | None = None,
    ):
        if workers < 1:
            raise ValueError(f"workers must be >= 1, got {workers}")
        self.scenario = scenario
        self.tables = tables or load_tables(scenario.table_paths)
        self.workers = workers
        self.chunk_size = chunk_size
        self.on_progress = on_progress

        self.satellite = _position(scenario.satellite.position)
        self.options = channel_options(scenario)
        self.link = link_config(scenario)

        plan = trajectory_plan(scenario)
        self.arc_table = ArcLengthTable.build(plan)
        # K sets the uniform-parameter samples only; the timeline steps by arc length.
        if scenario.hap.sample_count is None:
            step = plan.speed * scenario.update_period
            k = max(2, math.ceil(self.arc_table.total_length / step))
            plan = plan.model_copy(update={"sample_count": k})
        self.plan = plan

    # -- randomness ----------------------------------------------------------

    def _generator(self, chunk: int) -> np.random.Generator:
        return np.random.Generator(
            np.random.Philox(key=self.scenario.seed or 0, counter=chunk << 192)
        )

    # -- trajectory ----------------------------------------------------------

    def timeline(self) -> TimedTrajectory:
        """Constant-speed trajectory, or a hover at the start for zero-length plans."""
        dt = self.scenario.update_period
        if self.arc_table.total_length > 0.0:
            return constant_speed_timeline(self.plan, dt, self.arc_table)
        hover = self.scenario.hap.hover_duration_s
        times = np.arange(step_count(hover, dt)) * dt
        lat, lon, alt = curve_geodetic(self.plan, np.zeros(times.size))
        return TimedTrajectory(
            times=times, latitude=lat, longitude=lon, altitude=alt, total_duration=hover
        )

    def uniform_samples(self) -> list[ProjectedCoord]:
        """The K+1 curve points at evenly spaced parameter values."""
        return sample_uniform_parameter(self.plan)

    # -- evaluation ----------------------------------------------------------

    def _evaluate_chunk(
        self,
        chunk: int,
        times: np.ndarray,
        lat: np.ndarray,
        lon: np.ndarray,
        alt: np.ndarray,
        link: LinkConfig,
    ) -> pd.DataFrame:
        sat = self.satellite
        uniforms = self._generator(chunk).random((times.size, UNIFORMS_PER_SAMPLE))
        slant, elevation, low_lat = link_geometry(
            sat.latitude, sat.longitude, sat.altitude, lat, lon, alt
        )
        parts = channel_losses(
            self.tables,
            self.scenario.environment,
            link.carrier_frequency_ghz,
            slant,
            elevation,
            low_lat,
            self.options,
            uniforms,
        )
        tx_gain, rx_gain = antenna_gains(
            link, sat.latitude, sat.longitude, sat.altitude, lat, lon, alt
        )
        snr = np.asarray(link_snr(link, tx_gain, rx_gain, parts["total_loss_db"]))
        return pd.DataFrame(
            {
                "time_s": times,
                "lat_deg": np.degrees(lat),
                "lon_deg": np.degrees(lon),
                "alt_m": alt,
                "slant_m": slant,
                "ground_m": great_circle(
                    lat, lon, sat.latitude, sat.longitude, WGS84.semi_major_axis
                ),
                "elev_deg": elevation,
                "fspl_db": parts["fspl_db"],
                "sf_db": parts["sf_db"],
                "cl_db": parts["cl_db"],
                "atm_db": parts["atm_db"],
                "tscint_db": parts["tscint_db"],
                "iscint_db": parts["iscint_db"],
                "total_loss_db": parts["total_loss_db"],
                "snr_db": snr,
                "capacity_bps": shannon_capacity(snr, link.bandwidth_hz),
            },
            columns=list(RESULT_COLUMNS),
        )

    def evaluate(self, trajectory: TimedTrajectory) -> pd.DataFrame:
        """Result frame for every trajectory sample, in time order."""
        n = len(trajectory)
        starts = list(range(0, n, self.chunk_size))
        total = len(starts)

        def run(chunk: int) -> pd.DataFrame:
            window = slice(starts[chunk], starts[chunk] + self.chunk_size)
            return self._evaluate_chunk(
                chunk,
                trajectory.times[window],
                trajectory.latitude[window],
                trajectory.longitude[window],
                trajectory.altitude[window],
                self.link,
            )

        frames = []
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            for done, frame in enumerate(pool.map(run, range(total)), start=1):
                frames.append(frame)
                if self.on_progress is not None:
                    self.on_progress(done, total)
        if not frames:
            return pd.DataFrame(columns=list(RESULT_COLUMNS))
        return pd.concat(frames, ignore_index=True)

    def run_mission(self) -> pd.DataFrame:
        return self.evaluate(self.timeline())

    def sample_at(
        self, position: GeographicCoord, time_s: float = 0.0, chunk: int = 0
    ) -> SnrSample:
        """Single-sample evaluation through the scalar channel and budget operations."""
        state = evaluate_channel(
            self.tables,
            self.scenario.environment,
            self.link.carrier_frequency_ghz,
            self.satellite,
            position,
            self.options,
            self._generator(chunk),
        )
        snr = compute_snr(self.link, self.satellite, position, state)
        return SnrSample(
            time_s=time_s,
            snr_db=snr,
            ground_distance_m=float(
                great_circle(
                    position.latitude,
                    position.longitude,
                    self.satellite.latitude,
                    self.satellite.longitude,
                    WGS84.semi_major_axis,
                )
            ),
            slant_distance_m=state.slant_distance_m,
            elevation_deg=state.elevation_deg,
            capacity_bps=float(shannon_capacity(snr, self.link.bandwidth_hz)),
            loss_breakdown=state,
        )

    def max_gain_poi(self) -> int:
        """Index of the PoI with the highest SNR; PoIs below the horizon are skipped."""
        best, best_snr = None, -math.inf
        for index, poi in enumerate(self.plan.pois):
            try:
                snr = self.sample_at(poi.position, chunk=index).snr_db
            except BelowHorizonError:
                continue
            if snr > best_snr:
                best, best_snr = index, snr
        if best is None:
            raise BelowHorizonError("no point of interest sees the satellite above the horizon")
        return best

    def poi_arrivals(self, frame: pd.DataFrame) -> pd.DataFrame:
        return poi_arrivals(frame, self.plan.pois)

    def sweep_frequency(self, f_start: float, f_stop: float, f_step: float) -> pd.DataFrame:
        """One row per carrier frequency with the HAP hovering at the best PoI."""
        if not 0.0 < f_start <= f_stop:
            raise ValueError("sweep needs 0 < fstart <= fstop")
        if f_step <= 0.0:
            raise ValueError("sweep step must be positive")
        count = math.floor((f_stop - f_start) / f_step + 1e-9) + 1
        frequencies = f_start + f_step * np.arange(count)

        position = self.plan.pois[self.max_gain_poi()].position
        lat = np.array([position.latitude])
        lon = np.array([position.longitude])
        alt = np.array([position.altitude])

        frames = []
        for index, fc in enumerate(frequencies):
            link = link_config(self.scenario, carrier_ghz=float(fc))
            frames.append(self._evaluate_chunk(index, np.array([fc]), lat, lon, alt, link))
            if self.on_progress is not None:
                self.on_progress(index + 1, count)
        frame = pd.concat(frames, ignore_index=True)
        return frame.rename(columns={"time_s": SWEEP_COLUMN})


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------


def run_mission(scenario: Scenario, workers: int = 1, **kwargs) -> pd.DataFrame:
    return Simulator(scenario, workers=workers, **kwargs).run_mission()


def sweep_frequency(
    scenario: Scenario, f_start: float, f_stop: float, f_step: float, **kwargs
) -> pd.DataFrame:
    return Simulator(scenario, **kwargs).sweep_frequency(f_start, f_stop, f_step)


def max_gain_poi(scenario: Scenario, **kwargs) -> int:
    return Simulator(scenario, **kwargs).max_gain_poi()


def snr_vs_ground_distance(rows: pd.DataFrame | list[ResultRow]) -> pd.DataFrame:
    """(ground_m, snr_db) sorted by distance; repeated distances are averaged."""
    frame = rows if isinstance(rows, pd.DataFrame) else to_frame(rows)
    if frame.empty:
        raise EmptyInputError("no result rows to reduce")
    return frame.groupby("ground_m", sort=True, as_index=False)["snr_db"].mean()


def poi_arrivals(frame: pd.DataFrame, pois: Sequence[PointOfInterest]) -> pd.DataFrame:
    """Closest approach to each PoI: earliest row at the minimum ground distance."""
    if frame.empty:
        raise EmptyInputError("no result rows to reduce")
    lat = np.radians(frame["lat_deg"].to_numpy(float))
    lon = np.radians(frame["lon_deg"].to_numpy(float))
    times = frame["time_s"].to_numpy(float)
    records = []
    for index, poi in enumerate(pois):
        p = poi.position
        distance = great_circle(lat, lon, p.latitude, p.longitude, WGS84.semi_major_axis)
        nearest = int(np.argmin(distance))
        records.append((index, poi.label, float(times[nearest]), float(distance[nearest])))
    return pd.DataFrame.from_records(records, columns=list(ARRIVAL_COLUMNS))


# ---------------------------------------------------------------------------
# Rows and CSV
# ---------------------------------------------------------------------------


def to_rows(frame: pd.DataFrame) -> list[ResultRow]:
    return [ResultRow.model_validate(record) for record in frame.to_dict("records")]


def to_frame(rows: list[ResultRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=list(RESULT_COLUMNS))


def write_csv(frame: pd.DataFrame, destination: Path | IO[str] | None = None) -> None:
    """Header plus one line per row; floats in shortest round-trip form."""
    target = sys.stdout if destination is None else destination
    frame.to_csv(target, index=False, lineterminator="\n")


def read_csv(source: Path | IO[str]) -> pd.DataFrame:
    return pd.read_csv(source, float_precision="round_trip")
