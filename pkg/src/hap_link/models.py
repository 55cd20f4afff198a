# models.py
# Data contracts for the GEO-to-HAP link simulator.
# No business logic lives here: pure schema and validation.
#
# Angles inside the core types are radians; degrees appear only in the
# scenario schema (configuration boundary) and in result rows (reporting).

import math
from enum import StrEnum
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator
from pydantic.alias_generators import to_camel

# ---------------------------------------------------------------------------
# Geodesy
# ---------------------------------------------------------------------------


class Ellipsoid(BaseModel):
    """Reference ellipsoid plus the pseudo-Mercator normalisation exponents."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    semi_major_axis: float = Field(6378137.0, gt=0, description="a, metres.")
    eccentricity: float = Field(0.0818191908426215, ge=0, lt=1, description="e.")
    projection_alpha: float = Field(25.059, description="Exponent scaling projected x.")
    projection_beta: float = Field(24.665, description="Exponent scaling projected y.")

    @property
    def eccentricity_squared(self) -> float:
        return self.eccentricity**2

    @property
    def semi_minor_axis(self) -> float:
        return self.semi_major_axis * math.sqrt(1.0 - self.eccentricity_squared)


class GeographicCoord(BaseModel):
    """Latitude/longitude (radians) and ellipsoidal altitude (metres)."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    latitude: float = Field(..., ge=-math.pi / 2, le=math.pi / 2)
    longitude: float = Field(..., description="Normalised to [-pi, pi).")
    altitude: float = Field(0.0, ge=-500.0)

    @field_validator("longitude")
    @classmethod
    def _normalise_longitude(cls, value: float) -> float:
        wrapped = (value + math.pi) % (2.0 * math.pi) - math.pi
        if wrapped >= math.pi:
            wrapped -= 2.0 * math.pi
        return wrapped

    @classmethod
    def from_degrees(cls, latitude: float, longitude: float, altitude: float = 0.0):
        return cls(
            latitude=math.radians(latitude),
            longitude=math.radians(longitude),
            altitude=altitude,
        )

    @property
    def latitude_deg(self) -> float:
        return math.degrees(self.latitude)

    @property
    def longitude_deg(self) -> float:
        return math.degrees(self.longitude)


class GeocentricCoord(BaseModel):
    """Earth-centred Cartesian point, metres."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    x: float
    y: float
    z: float


class ProjectedCoord(BaseModel):
    """Pseudo-Mercator point; z is the altitude carried through unchanged."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    x: float
    y: float
    z: float = 0.0


# ---------------------------------------------------------------------------
# Trajectory
# ---------------------------------------------------------------------------


class PointOfInterest(BaseModel):
    """A trajectory control point; higher interest pulls the curve closer."""

    model_config = ConfigDict(frozen=True)

    position: GeographicCoord
    interest_level: int = Field(1, ge=1)
    label: str = ""


class TrajectoryPlan(BaseModel):
    """PoIs in visiting order, parameter sample count K and cruise speed."""

    model_config = ConfigDict(frozen=True)

    pois: list[PointOfInterest] = Field(default_factory=list)
    sample_count: int = Field(1000, ge=2, description="K, uniform-parameter samples.")
    speed: float = Field(..., gt=0, description="Ground-track speed, m/s.")
    arc_knots: int = Field(100_000, ge=2, description="Intervals of the arc-length table.")


class TimedTrajectory(BaseModel):
    """Constant-speed, time-stamped HAP positions (radians / metres)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    latitude: np.ndarray
    longitude: np.ndarray
    altitude: np.ndarray
    total_duration: float = Field(..., ge=0)

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def samples(self) -> list[tuple[float, GeographicCoord]]:
        """Materialise (timestamp, position) pairs. Costly for long missions."""
        return [
            (float(t), GeographicCoord(latitude=lat, longitude=lon, altitude=alt))
            for t, lat, lon, alt in zip(
                self.times, self.latitude, self.longitude, self.altitude, strict=True
            )
        ]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "time_s": self.times,
                "lat_deg": np.degrees(self.latitude),
                "lon_deg": np.degrees(self.longitude),
                "alt_m": self.altitude,
            }
        )

    def write_csv(self, path: Path) -> None:
        self.to_frame().to_csv(path, index=False)


# ---------------------------------------------------------------------------
# Antenna
# ---------------------------------------------------------------------------


class AntennaConfig(BaseModel):
    """Circular-aperture (reflector) antenna mounted relative to local vertical."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    max_gain_dbi: float
    aperture_diameter_m: float = Field(..., gt=0)
    boresight_inclination_deg: float = Field(0.0, ge=0, le=180, description="0 = zenith.")
    boresight_azimuth_deg: float = Field(0.0, description="Tilt plane, clockwise from north.")
    carrier_frequency_ghz: float = Field(..., gt=0)
    gain_floor_db: float = Field(60.0, gt=0, description="Floor, dB below max gain.")


# ---------------------------------------------------------------------------
# Channel
# ---------------------------------------------------------------------------


class Environment(StrEnum):
    DENSE_URBAN = "denseUrban"
    URBAN = "urban"
    SUBURBAN = "suburban"
    RURAL = "rural"


class Band(StrEnum):
    """Column of the TR 38.811 shadowing/clutter tables."""

    S = "s"
    KA = "ka"


class ChannelOptions(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    shadowing: bool = False
    tropospheric_scint: bool = False
    ionospheric_scint: bool = False
    force_los: bool | None = True
    atmospheric_column_fraction: float = Field(1.0, gt=0, le=1)
    band: Band = Band.KA
    p_fluc_4ghz: float = Field(0.0, ge=0, description="Ionospheric fluctuation at 4 GHz, dB.")


class ChannelState(BaseModel):
    """Per-sample loss decomposition plus the geometry it was computed for."""

    model_config = ConfigDict(frozen=True)

    slant_distance_m: float = Field(..., ge=0)
    elevation_deg: float
    los: bool
    fspl_db: float = Field(..., ge=0)
    shadow_fading_db: float
    clutter_loss_db: float = Field(..., ge=0)
    atmospheric_loss_db: float = Field(..., ge=0)
    tropospheric_scint_db: float = Field(..., ge=0)
    ionospheric_scint_db: float = Field(..., ge=0)
    total_loss_db: float

    @model_validator(mode="after")
    def _total_is_sum(self) -> "ChannelState":
        parts = (
            self.fspl_db
            + self.shadow_fading_db
            + self.clutter_loss_db
            + self.atmospheric_loss_db
            + self.tropospheric_scint_db
            + self.ionospheric_scint_db
        )
        if abs(parts - self.total_loss_db) > 1e-9:
            raise ValueError(f"total_loss_db {self.total_loss_db} != component sum {parts}")
        return self


# ---------------------------------------------------------------------------
# Link budget
# ---------------------------------------------------------------------------


class LinkConfig(BaseModel):
    """Downlink budget inputs: the satellite transmits, the HAP receives."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    tx_power_dbm: float = 37.5
    tx_antenna: AntennaConfig
    rx_antenna: AntennaConfig
    bandwidth_hz: float = Field(4e8, gt=0)
    noise_figure_db: float = Field(1.2, ge=0)
    carrier_frequency_ghz: float = Field(20.0, gt=0)


class SnrSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    time_s: float
    snr_db: float
    ground_distance_m: float = Field(..., ge=0)
    slant_distance_m: float = Field(..., ge=0)
    elevation_deg: float
    capacity_bps: float = Field(..., ge=0)
    loss_breakdown: ChannelState


class ResultRow(BaseModel):
    """One CSV row. Field order is the column order."""

    model_config = ConfigDict(frozen=True)

    time_s: float
    lat_deg: float
    lon_deg: float
    alt_m: float
    slant_m: float
    ground_m: float
    elev_deg: float
    fspl_db: float
    sf_db: float
    cl_db: float
    atm_db: float
    tscint_db: float
    iscint_db: float
    total_loss_db: float
    snr_db: float
    capacity_bps: float


RESULT_COLUMNS: tuple[str, ...] = tuple(ResultRow.model_fields)


# ---------------------------------------------------------------------------
# Scenario schema (JSON, camelCase keys, degrees)
# ---------------------------------------------------------------------------


class _Schema(BaseModel):
    model_config = ConfigDict(
        alias_generator=to_camel,
        populate_by_name=True,
        extra="forbid",
        frozen=True,
        allow_inf_nan=False,
    )


class GeoPoint(_Schema):
    latitude_deg: float = Field(..., ge=-90, le=90)
    longitude_deg: float = Field(..., ge=-180, le=180)
    altitude_m: float = Field(0.0, ge=-500)


class PoiSettings(GeoPoint):
    latitude_deg: float = Field(..., gt=-85, lt=85, description="Projectable latitudes only.")
    interest_level: int = Field(1, ge=1)
    label: str = ""


class AntennaSettings(_Schema):
    max_gain_dbi: float
    aperture_diameter_m: float = Field(..., gt=0)
    boresight_inclination_deg: float = Field(0.0, ge=0, le=180)
    boresight_azimuth_deg: float = 0.0
    gain_floor_db: float = Field(60.0, gt=0)
    carrier_frequency_ghz: float | None = Field(None, gt=0, description="Defaults to the link.")


GEO_ANTENNA = AntennaSettings(
    max_gain_dbi=58.5, aperture_diameter_m=5.0, boresight_inclination_deg=180.0
)
HAP_ANTENNA = AntennaSettings(
    max_gain_dbi=39.7, aperture_diameter_m=0.6, boresight_inclination_deg=0.0
)


class SatelliteSettings(_Schema):
    position: GeoPoint
    antenna: AntennaSettings = GEO_ANTENNA


class HapSettings(_Schema):
    pois: list[PoiSettings] = Field(..., min_length=1)
    speed_mps: float = Field(24.0, gt=0)
    sample_count: int | None = Field(None, ge=2)
    hover_duration_s: float = Field(0.0, ge=0, description="Row span of a static plan.")
    antenna: AntennaSettings = HAP_ANTENNA


class LinkSettings(_Schema):
    tx_power_dbm: float = 37.5
    bandwidth_hz: float = Field(4e8, gt=0)
    noise_figure_db: float = Field(1.2, ge=0)
    carrier_frequency_ghz: float = Field(20.0, gt=0)
    eirp_density_dbw_per_mhz: float | None = 40.0


class Toggles(_Schema):
    shadowing: bool = False
    tropospheric_scint: bool = False
    ionospheric_scint: bool = False
    force_los: bool | None = True
    atmospheric_column_fraction: float = Field(1.0, gt=0, le=1)


class TablePaths(_Schema):
    shadow_fading: Path | None = None
    clutter_loss: Path | None = None
    zenith_attenuation: Path | None = None
    tropospheric_scintillation: Path | None = None
    los_probability: Path | None = None


class Scenario(_Schema):
    """Full simulation description. Omitted optional fields take the reference values."""

    schema_version: Literal[1] = 1
    satellite: SatelliteSettings
    hap: HapSettings
    link: LinkSettings = LinkSettings()
    environment: Environment = Environment.RURAL
    band: Band = Band.KA
    toggles: Toggles = Toggles()
    update_period: float = Field(1.0, gt=0, description="Seconds between rows.")
    time_resolution: float = Field(1000.0, gt=0, description="Arc-table resolution, 1/s.")
    p_fluc_4ghz: float = Field(0.0, ge=0, alias="pFluc4GHz")
    table_paths: TablePaths = TablePaths()
    seed: int | None = Field(None, ge=0, validate_default=True)

    @field_validator("seed")
    @classmethod
    def _seed_for_stochastic_runs(cls, value: int | None, info: ValidationInfo) -> int | None:
        toggles = info.data.get("toggles")
        if value is None and toggles is not None:
            if toggles.shadowing or toggles.force_los is None:
                raise ValueError(
                    "a seed is required when shadowing or probabilistic line-of-sight is enabled"
                )
        return value
