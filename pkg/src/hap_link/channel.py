# channel.py
# Large-scale NTN channel losses (TR 38.811 as used for a GEO-to-HAP link).
#
#   total = FSPL + SF + CL + PL_atm + PL_tropo + PL_iono
#
# Every component has a scalar operation for direct use and the composite
# `channel_losses` works on whole arrays of samples. Randomness never comes
# from module state: callers pass a numpy Generator (scalar API) or the two
# uniforms each sample consumes (array API, column 0 = LOS draw, column 1 =
# shadow-fading draw).

import math

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import ndtri

from hap_link.geodesy import WGS84, geodetic_to_ecef, local_up
from hap_link.geodesy import elevation_deg as _elevation_kernel
from hap_link.models import Band, ChannelOptions, ChannelState, Environment, GeographicCoord
from hap_link.tables import LossTables

ATMOSPHERE_MIN_FREQUENCY_GHZ = 10.0
LOW_ELEVATION_DEG = 10.0
IONOSPHERE_MAX_LATITUDE_DEG = 20.0
IONOSPHERE_MAX_FREQUENCY_GHZ = 6.0

# Shift into the open interval so the inverse normal CDF stays finite.
_HALF_ULP = 2.0**-54

UNIFORMS_PER_SAMPLE = 2


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------


class NonPositiveInputError(ValueError):
    """Raised when a frequency or distance that must be positive is not."""


class BelowHorizonError(ValueError):
    """Raised when the link elevation is at or below the local horizon."""


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _elevations(elevation_deg: ArrayLike) -> np.ndarray:
    e = np.asarray(elevation_deg, dtype=float)
    if np.any(e <= 0.0):
        raise BelowHorizonError(f"elevation {float(np.min(e)):.4f} deg is not above the horizon")
    if np.any(e > 90.0):
        raise ValueError("elevation cannot exceed 90 degrees")
    return e


def _out(values: np.ndarray) -> np.ndarray | float:
    values = np.asarray(values)
    return float(values) if values.ndim == 0 else values


def _standard_normal(u: ArrayLike) -> np.ndarray:
    return ndtri(np.asarray(u, dtype=float) + _HALF_ULP)


# ---------------------------------------------------------------------------
# Components
# ---------------------------------------------------------------------------


def free_space_path_loss(fc_ghz: ArrayLike, distance_m: ArrayLike) -> np.ndarray | float:
    fc = np.asarray(fc_ghz, dtype=float)
    d = np.asarray(distance_m, dtype=float)
    if np.any(fc <= 0.0) or np.any(d <= 0.0):
        raise NonPositiveInputError("carrier frequency and distance must be positive")
    return _out(32.45 + 20.0 * np.log10(fc) + 20.0 * np.log10(d))


def sample_shadow_fading(
    tables: LossTables,
    env: Environment,
    los: bool,
    elevation_deg: float,
    rng: np.random.Generator,
    band: Band = Band.KA,
) -> float:
    """Zero-mean Gaussian draw (dB) with the tabulated sigma."""
    sigma = tables.sigma(env, band, los, _elevations(elevation_deg))
    return float(sigma[0] * _standard_normal(rng.random()))


def clutter_loss(
    tables: LossTables,
    env: Environment,
    los: ArrayLike,
    elevation_deg: ArrayLike,
    band: Band = Band.KA,
) -> np.ndarray | float:
    e = _elevations(elevation_deg)
    los = np.broadcast_to(np.asarray(los, dtype=bool), e.shape)
    if np.all(los):
        return _out(np.zeros(e.shape))
    values = tables.clutter(env, band, e).reshape(e.shape)
    return _out(np.where(los, 0.0, values))


def atmospheric_absorption(
    tables: LossTables,
    fc_ghz: float,
    elevation_deg: ArrayLike,
    column_fraction: float = 1.0,
) -> np.ndarray | float:
    """A_zenith(fc) / sin(elevation), where the absorption applies; 0 elsewhere."""
    e = _elevations(elevation_deg)
    applicable = (fc_ghz >= ATMOSPHERE_MIN_FREQUENCY_GHZ) | (e < LOW_ELEVATION_DEG)
    if not np.any(applicable):
        return _out(np.zeros(e.shape))
    zenith = tables.zenith(fc_ghz) * column_fraction
    return _out(np.where(applicable, zenith / np.sin(np.radians(e)), 0.0))


def ionospheric_scintillation(
    fc_ghz: ArrayLike, latitude_deg: ArrayLike, p_fluc_4ghz: float
) -> np.ndarray | float:
    fc = np.asarray(fc_ghz, dtype=float)
    if np.any(fc <= 0.0):
        raise NonPositiveInputError("carrier frequency must be positive")
    lat = np.asarray(latitude_deg, dtype=float)
    applicable = (np.abs(lat) < IONOSPHERE_MAX_LATITUDE_DEG) | (fc < IONOSPHERE_MAX_FREQUENCY_GHZ)
    value = (fc / 4.0) ** -1.5 * p_fluc_4ghz / math.sqrt(2.0)
    return _out(np.where(applicable, value, 0.0))


def tropospheric_scintillation(
    tables: LossTables, fc_ghz: float, elevation_deg: ArrayLike, enabled: bool
) -> np.ndarray | float:
    """99th-percentile Toulouse fade (20 GHz) for the elevation bucket."""
    if fc_ghz <= 0.0:
        raise NonPositiveInputError("carrier frequency must be positive")
    e = _elevations(elevation_deg)
    if not enabled:
        return _out(np.zeros(e.shape))
    return _out(tables.scintillation(e).reshape(e.shape))


def los_probability_draw(
    tables: LossTables,
    env: Environment,
    elevation_deg: float,
    rng: np.random.Generator,
    forced: bool | None = None,
) -> bool:
    e = _elevations(elevation_deg)
    if forced is not None:
        return forced
    return bool(rng.random() < tables.p_los(env, e)[0])


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def channel_losses(
    tables: LossTables,
    env: Environment,
    fc_ghz: float,
    slant_m: np.ndarray,
    elevation_deg: np.ndarray,
    latitude_deg: np.ndarray,
    options: ChannelOptions,
    uniforms: np.ndarray,
) -> dict[str, np.ndarray]:
    """Loss decomposition for arrays of samples.

    `latitude_deg` is the latitude of the lower endpoint (ionospheric
    applicability); `uniforms` has shape (n, 2).
    """
    e = _elevations(elevation_deg)
    slant = np.asarray(slant_m, dtype=float)

    if options.force_los is None:
        los = uniforms[:, 0] < tables.p_los(env, e)
    else:
        los = np.full(e.shape, options.force_los)

    fspl = np.asarray(free_space_path_loss(fc_ghz, slant), dtype=float)
    if options.shadowing:
        sf = tables.sigma(env, options.band, los, e) * _standard_normal(uniforms[:, 1])
    else:
        sf = np.zeros(e.shape)
    cl = np.broadcast_to(clutter_loss(tables, env, los, e, options.band), e.shape)
    atm = np.broadcast_to(
        atmospheric_absorption(tables, fc_ghz, e, options.atmospheric_column_fraction), e.shape
    )
    tscint = np.broadcast_to(
        tropospheric_scintillation(tables, fc_ghz, e, options.tropospheric_scint), e.shape
    )
    if options.ionospheric_scint:
        iscint = np.broadcast_to(
            ionospheric_scintillation(fc_ghz, latitude_deg, options.p_fluc_4ghz), e.shape
        )
    else:
        iscint = np.zeros(e.shape)

    total = fspl + sf + cl + atm + tscint + iscint
    return {
        "los": los,
        "fspl_db": fspl,
        "sf_db": sf,
        "cl_db": np.asarray(cl, dtype=float),
        "atm_db": np.asarray(atm, dtype=float),
        "tscint_db": np.asarray(tscint, dtype=float),
        "iscint_db": np.asarray(iscint, dtype=float),
        "total_loss_db": total,
    }


def link_geometry(
    tx_lat: ArrayLike,
    tx_lon: ArrayLike,
    tx_alt: ArrayLike,
    rx_lat: ArrayLike,
    rx_lon: ArrayLike,
    rx_alt: ArrayLike,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Slant range, elevation seen from the lower endpoint and that endpoint's latitude (deg)."""
    tx = geodetic_to_ecef(tx_lat, tx_lon, tx_alt, WGS84)
    rx = geodetic_to_ecef(rx_lat, rx_lon, rx_alt, WGS84)
    slant = np.linalg.norm(tx - rx, axis=-1)

    rx_lower = np.asarray(np.asarray(rx_alt, dtype=float) <= np.asarray(tx_alt, dtype=float))
    low_lat = np.where(rx_lower, rx_lat, tx_lat)
    low_lon = np.where(rx_lower, rx_lon, tx_lon)
    observer = np.where(rx_lower[..., None], rx, tx)
    target = np.where(rx_lower[..., None], tx, rx)
    elevation = _elevation_kernel(observer, local_up(low_lat, low_lon), target)
    return slant, elevation, np.degrees(low_lat)


def evaluate_channel(
    tables: LossTables,
    env: Environment,
    fc_ghz: float,
    tx_pos: GeographicCoord,
    rx_pos: GeographicCoord,
    options: ChannelOptions,
    rng: np.random.Generator,
) -> ChannelState:
    if fc_ghz <= 0.0:
        raise NonPositiveInputError("carrier frequency must be positive")
    slant, elevation, low_lat = link_geometry(
        tx_pos.latitude,
        tx_pos.longitude,
        tx_pos.altitude,
        rx_pos.latitude,
        rx_pos.longitude,
        rx_pos.altitude,
    )
    parts = channel_losses(
        tables,
        env,
        fc_ghz,
        np.atleast_1d(slant),
        np.atleast_1d(elevation),
        np.atleast_1d(low_lat),
        options,
        rng.random((1, UNIFORMS_PER_SAMPLE)),
    )
    return ChannelState(
        slant_distance_m=float(slant),
        elevation_deg=float(elevation),
        los=bool(parts["los"][0]),
        fspl_db=float(parts["fspl_db"][0]),
        shadow_fading_db=float(parts["sf_db"][0]),
        clutter_loss_db=float(parts["cl_db"][0]),
        atmospheric_loss_db=float(parts["atm_db"][0]),
        tropospheric_scint_db=float(parts["tscint_db"][0]),
        ionospheric_scint_db=float(parts["iscint_db"][0]),
        total_loss_db=float(parts["total_loss_db"][0]),
    )
