import math
from unittest.mock import MagicMock

import numpy as np
import pytest
from scipy.special import ndtr

from hap_link.channel import (
    BelowHorizonError,
    NonPositiveInputError,
    atmospheric_absorption,
    channel_losses,
    clutter_loss,
    evaluate_channel,
    free_space_path_loss,
    ionospheric_scintillation,
    link_geometry,
    los_probability_draw,
    sample_shadow_fading,
    tropospheric_scintillation,
)
from hap_link.models import Band, ChannelOptions, Environment, GeographicCoord

RURAL = Environment.RURAL
SATELLITE = GeographicCoord.from_degrees(0.04, -4.95, 35_770_880.0)
HAP = GeographicCoord.from_degrees(0.04, -4.95, 20_000.0)


def _rng(*draws):
    rng = MagicMock()
    rng.random.side_effect = list(draws)
    return rng


# ---------------------------------------------------------------------------
# Free-space path loss
# ---------------------------------------------------------------------------


def test_fspl_against_direct_evaluation():
    rng = np.random.default_rng(3)
    fc = rng.uniform(1.0, 100.0, 1000)
    d = rng.uniform(1e3, 4e7, 1000)
    expected = 32.45 + 20.0 * np.log10(fc) + 20.0 * np.log10(d)
    np.testing.assert_allclose(free_space_path_loss(fc, d), expected, rtol=0, atol=1e-9)


def test_fspl_distance_doubling_adds_6_db():
    delta = free_space_path_loss(20.0, 2e7) - free_space_path_loss(20.0, 1e7)
    assert delta == pytest.approx(6.0206, abs=1e-4)


def test_fspl_geostationary_ka():
    assert free_space_path_loss(20.0, 35_750_880.0) == pytest.approx(209.54, abs=0.01)


@pytest.mark.parametrize(("fc", "d"), [(0.0, 1e3), (20.0, 0.0), (-1.0, 1e3)])
def test_fspl_non_positive(fc, d):
    with pytest.raises(NonPositiveInputError):
        free_space_path_loss(fc, d)


# ---------------------------------------------------------------------------
# Table-driven components
# ---------------------------------------------------------------------------


def test_elevation_must_be_above_horizon(tables):
    with pytest.raises(BelowHorizonError):
        clutter_loss(tables, RURAL, False, 0.0)
    with pytest.raises(ValueError, match="90"):
        clutter_loss(tables, RURAL, False, 91.0)


def test_clutter_only_without_line_of_sight(tables):
    assert clutter_loss(tables, RURAL, True, 30.0) == 0.0
    assert clutter_loss(tables, RURAL, False, 30.0) == 21.9
    np.testing.assert_array_equal(
        clutter_loss(tables, RURAL, np.array([True, False]), np.array([30.0, 30.0])), [0.0, 21.9]
    )


def test_shadow_fading_uses_tabulated_sigma(tables):
    assert sample_shadow_fading(tables, RURAL, True, 90.0, _rng(0.5)) == pytest.approx(0.0)
    one_sigma = sample_shadow_fading(tables, RURAL, True, 90.0, _rng(float(ndtr(1.0))))
    assert one_sigma == pytest.approx(0.4, rel=1e-9)


def test_shadow_fading_statistics(tables):
    key = (RURAL, Band.KA, True)
    sigma = {**tables.shadow_sigma, key: np.full_like(tables.shadow_sigma[key], 1.2)}
    flat = tables.model_copy(update={"shadow_sigma": sigma})
    rng = np.random.default_rng(5)
    draws = np.array([sample_shadow_fading(flat, RURAL, True, 45.0, rng) for _ in range(100_000)])
    assert abs(draws.mean()) < 0.02
    assert 1.18 <= draws.std() <= 1.22


def test_wide_shadow_fading_statistics(tables):
    rng = np.random.default_rng(5)
    draws = [sample_shadow_fading(tables, RURAL, False, 45.0, rng) for _ in range(4000)]
    assert np.mean(draws) == pytest.approx(0.0, abs=0.6)
    assert np.std(draws) == pytest.approx(11.8, rel=0.05)


def test_atmospheric_absorption_scales_with_cosecant(tables):
    zenith = tables.zenith(20.0)
    assert atmospheric_absorption(tables, 20.0, 90.0) == pytest.approx(zenith)
    assert atmospheric_absorption(tables, 20.0, 30.0) == pytest.approx(2.0 * zenith)
    assert atmospheric_absorption(tables, 20.0, 90.0, 0.5) == pytest.approx(0.5 * zenith)


def test_atmospheric_absorption_applicability(tables):
    assert atmospheric_absorption(tables, 5.0, 45.0) == 0.0
    assert atmospheric_absorption(tables, 5.0, 5.0) > 0.0


def test_ionospheric_scintillation_applicability():
    expected = 5.0**-1.5 * 1.1 / math.sqrt(2.0)
    assert ionospheric_scintillation(20.0, 10.0, 1.1) == pytest.approx(expected)
    assert ionospheric_scintillation(20.0, 45.0, 1.1) == 0.0
    low_band = 0.5**-1.5 * 1.1 / math.sqrt(2.0)
    assert ionospheric_scintillation(2.0, 45.0, 1.1) == pytest.approx(low_band)
    with pytest.raises(NonPositiveInputError):
        ionospheric_scintillation(0.0, 10.0, 1.1)


def test_tropospheric_scintillation(tables):
    assert tropospheric_scintillation(tables, 20.0, 12.0, enabled=False) == 0.0
    assert tropospheric_scintillation(tables, 20.0, 12.0, enabled=True) == 1.08


def test_los_draw(tables):
    assert los_probability_draw(tables, RURAL, 45.0, _rng(), forced=True) is True
    assert los_probability_draw(tables, RURAL, 45.0, _rng(), forced=False) is False
    assert los_probability_draw(tables, RURAL, 45.0, _rng(0.0)) is True
    assert los_probability_draw(tables, RURAL, 45.0, _rng(1.0)) is False


def test_los_draw_frequency(tables):
    even = {**tables.los_probability, RURAL: np.full_like(tables.los_probability[RURAL], 0.5)}
    coin = tables.model_copy(update={"los_probability": even})
    rng = np.random.default_rng(11)
    hits = sum(los_probability_draw(coin, RURAL, 45.0, rng) for _ in range(100_000))
    assert 0.49 <= hits / 100_000 <= 0.51


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def _single(tables, options, fc=20.0, elevation=30.0, latitude=0.0, draws=(0.0, 0.5)):
    return channel_losses(
        tables,
        RURAL,
        fc,
        np.array([3.6e7]),
        np.array([elevation]),
        np.array([latitude]),
        options,
        np.array([draws]),
    )


def test_channel_losses_total_is_sum(tables):
    options = ChannelOptions(
        shadowing=True,
        tropospheric_scint=True,
        ionospheric_scint=True,
        force_los=None,
        p_fluc_4ghz=1.1,
    )
    uniforms = np.random.default_rng(0).random((3, 2))
    slant, e, lat = np.full(3, 3.6e7), np.array([20.0, 45.0, 80.0]), np.zeros(3)
    parts = channel_losses(tables, RURAL, 20.0, slant, e, lat, options, uniforms)
    components = ("fspl_db", "sf_db", "cl_db", "atm_db", "tscint_db", "iscint_db")
    np.testing.assert_allclose(sum(parts[k] for k in components), parts["total_loss_db"])
    assert parts["los"].dtype == bool


def test_channel_losses_deterministic_terms_only(tables):
    parts = _single(tables, ChannelOptions(), elevation=60.0, draws=(0.99, 0.01))
    assert parts["los"][0]
    assert parts["sf_db"][0] == 0.0
    assert parts["cl_db"][0] == 0.0
    assert parts["iscint_db"][0] == 0.0


def test_forced_nlos_adds_clutter(tables):
    parts = _single(tables, ChannelOptions(force_los=False))
    assert not parts["los"][0]
    assert parts["cl_db"][0] == 21.9


def test_band_selects_table_column(tables):
    parts = _single(tables, ChannelOptions(force_los=False, band=Band.S), fc=2.0, latitude=45.0)
    assert parts["cl_db"][0] == 18.42


def test_link_geometry_is_seen_from_lower_endpoint():
    args = (SATELLITE.latitude, SATELLITE.longitude, SATELLITE.altitude)
    hap = (math.radians(10.0), math.radians(5.0), 20_000.0)
    slant_a, elev_a, lat_a = link_geometry(*args, *hap)
    slant_b, elev_b, lat_b = link_geometry(*hap, *args)
    assert slant_a == pytest.approx(slant_b)
    assert elev_a == pytest.approx(elev_b)
    assert lat_a == pytest.approx(10.0)
    assert lat_b == pytest.approx(10.0)


def test_evaluate_channel_at_sub_satellite_point(tables):
    state = evaluate_channel(
        tables, RURAL, 20.0, SATELLITE, HAP, ChannelOptions(), np.random.default_rng(1)
    )
    assert state.los
    assert state.elevation_deg == pytest.approx(90.0, abs=0.1)
    assert state.slant_distance_m == pytest.approx(35_750_880.0, rel=1e-4)
    assert state.total_loss_db == pytest.approx(state.fspl_db + state.atmospheric_loss_db)
    assert 209.0 < state.total_loss_db < 210.5


def test_total_loss_grows_away_from_sub_satellite_point(tables):
    rng = np.random.default_rng(1)
    losses = []
    for offset_km in (0.0, 25.0, 50.0, 100.0, 200.0, 400.0, 800.0):
        hap = GeographicCoord.from_degrees(0.04 + offset_km / 111.32, -4.95, 20_000.0)
        state = evaluate_channel(tables, RURAL, 20.0, SATELLITE, hap, ChannelOptions(), rng)
        losses.append(state.total_loss_db)
    assert np.all(np.diff(losses) > 0)


def test_evaluate_channel_below_horizon(tables):
    far_side = GeographicCoord.from_degrees(0.0, 175.0, 20_000.0)
    with pytest.raises(BelowHorizonError):
        evaluate_channel(
            tables, RURAL, 20.0, SATELLITE, far_side, ChannelOptions(), np.random.default_rng(1)
        )
