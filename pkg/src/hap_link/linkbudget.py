# linkbudget.py
# Downlink budget: satellite transmits, HAP receives.
#
#   SNR = P_tx + G_tx(θ_tx) + G_rx(θ_rx) − L_total − N
#   N   = −174 dBm/Hz + 10·log10(B) + NF        (290 K reference)
#   C   = B·log2(1 + 10^(SNR/10))

import math

import numpy as np
from numpy.typing import ArrayLike

from hap_link.antenna import aperture_gain, boresight_vector, off_boresight_deg
from hap_link.geodesy import WGS84, geodetic_to_ecef
from hap_link.models import AntennaConfig, ChannelState, GeographicCoord, LinkConfig

THERMAL_NOISE_DBM_PER_HZ = -174.0
EIRP_TOLERANCE_DB = 0.1


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------


class NonPositiveBandwidthError(ValueError):
    """Raised when a bandwidth that must be positive is not."""


# ---------------------------------------------------------------------------
# Noise and capacity
# ---------------------------------------------------------------------------


def noise_power(bandwidth_hz: float, noise_figure_db: float) -> float:
    """Receiver noise power, dBm."""
    if bandwidth_hz <= 0:
        raise NonPositiveBandwidthError(f"bandwidth must be positive, got {bandwidth_hz}")
    return THERMAL_NOISE_DBM_PER_HZ + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def shannon_capacity(snr_db: ArrayLike, bandwidth_hz: float) -> np.ndarray | float:
    if bandwidth_hz <= 0:
        raise NonPositiveBandwidthError(f"bandwidth must be positive, got {bandwidth_hz}")
    linear = np.power(10.0, np.asarray(snr_db, dtype=float) / 10.0)
    capacity = bandwidth_hz * np.log1p(linear) / math.log(2.0)
    return float(capacity) if capacity.ndim == 0 else capacity


def eirp_mismatch_db(cfg: LinkConfig, eirp_density_dbw_per_mhz: float) -> float:
    """Transmit EIRP (dBW) minus the EIRP implied by a density over the link bandwidth."""
    eirp_dbw = cfg.tx_power_dbm + cfg.tx_antenna.max_gain_dbi - 30.0
    implied_dbw = eirp_density_dbw_per_mhz + 10.0 * math.log10(cfg.bandwidth_hz / 1e6)
    return eirp_dbw - implied_dbw


# ---------------------------------------------------------------------------
# Gains and SNR
# ---------------------------------------------------------------------------


def _node_gain(
    cfg: AntennaConfig,
    lat: ArrayLike,
    lon: ArrayLike,
    node_ecef: np.ndarray,
    target_ecef: np.ndarray,
) -> np.ndarray:
    boresight = boresight_vector(
        lat, lon, cfg.boresight_inclination_deg, cfg.boresight_azimuth_deg
    )
    return np.asarray(aperture_gain(cfg, off_boresight_deg(node_ecef, boresight, target_ecef)))


def antenna_gains(
    cfg: LinkConfig,
    tx_lat: ArrayLike,
    tx_lon: ArrayLike,
    tx_alt: ArrayLike,
    rx_lat: ArrayLike,
    rx_lon: ArrayLike,
    rx_alt: ArrayLike,
) -> tuple[np.ndarray, np.ndarray]:
    """Transmit and receive gains (dBi) along each line of sight."""
    tx = geodetic_to_ecef(tx_lat, tx_lon, tx_alt, WGS84)
    rx = geodetic_to_ecef(rx_lat, rx_lon, rx_alt, WGS84)
    return (
        _node_gain(cfg.tx_antenna, tx_lat, tx_lon, tx, rx),
        _node_gain(cfg.rx_antenna, rx_lat, rx_lon, rx, tx),
    )


def link_snr(
    cfg: LinkConfig, tx_gain_dbi: ArrayLike, rx_gain_dbi: ArrayLike, total_loss_db: ArrayLike
) -> np.ndarray | float:
    snr = (
        cfg.tx_power_dbm
        + np.asarray(tx_gain_dbi, dtype=float)
        + np.asarray(rx_gain_dbi, dtype=float)
        - np.asarray(total_loss_db, dtype=float)
        - noise_power(cfg.bandwidth_hz, cfg.noise_figure_db)
    )
    return float(snr) if snr.ndim == 0 else snr


def compute_snr(
    cfg: LinkConfig, tx_pos: GeographicCoord, rx_pos: GeographicCoord, channel: ChannelState
) -> float:
    tx_gain, rx_gain = antenna_gains(
        cfg,
        tx_pos.latitude,
        tx_pos.longitude,
        tx_pos.altitude,
        rx_pos.latitude,
        rx_pos.longitude,
        rx_pos.altitude,
    )
    return float(link_snr(cfg, tx_gain, rx_gain, channel.total_loss_db))
