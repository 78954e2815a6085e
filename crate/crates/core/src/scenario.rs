//! Ready-made scenarios: the link configurations, channels and SNR grids
//! used by the command-line presets and the acceptance tests.

use std::fmt;
use std::str::FromStr;

use crate::atmosphere::{complex_refractivity, los_transfer};
use crate::catalog::{AtmosphereState, LineCatalog};
use crate::channel::ChannelResponse;
use crate::error::{Error, Result};
use crate::grid::FreqGrid;
use crate::phy::{LinkConfig, Scheme};

/// Laboratory air used by every atmospheric preset.
pub const LAB_TEMPERATURE_C: f64 = 29.0;
pub const LAB_RELATIVE_HUMIDITY: f64 = 0.45;
pub const LAB_PRESSURE_ATM: f64 = 1.0;

/// Atmospheric grid spacing, GHz.
pub const ATMOSPHERE_STEP_GHZ: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// 100 ps pulse at 130 GHz through pure GDD and through a 50.5 ps two-path channel.
    Fig2Pulse,
    /// Attenuation and GDD per metre from 100 to 600 GHz in laboratory air.
    Fig3Atmosphere,
    /// 20 Gbit/s QPSK at 380 GHz over 30 m.
    Fig4Qpsk380,
    /// 200 Gbaud BPSK over 220 to 540 GHz and 100 m.
    Fig5Pdc,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig2Pulse, Preset::Fig3Atmosphere, Preset::Fig4Qpsk380, Preset::Fig5Pdc];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2Pulse => "fig2_pulse",
            Preset::Fig3Atmosphere => "fig3_atmosphere",
            Preset::Fig4Qpsk380 => "fig4_qpsk380",
            Preset::Fig5Pdc => "fig5_pdc",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid("preset", format!("unknown preset `{s}`")))
    }
}

pub fn lab_air() -> AtmosphereState {
    AtmosphereState::from_celsius(LAB_TEMPERATURE_C, LAB_RELATIVE_HUMIDITY, LAB_PRESSURE_ATM)
        .expect("laboratory conditions are valid")
}

/// Line-of-sight atmospheric channel from the built-in catalog.
pub fn atmosphere_channel(atmos: &AtmosphereState, grid: &FreqGrid, distance_m: f64) -> Result<ChannelResponse> {
    let spec = complex_refractivity(&LineCatalog::builtin(), atmos, grid)?;
    los_transfer(&spec, distance_m)
}

/// Grid holding every DFT bin of a link frame, widened to the atmosphere
/// step where that is coarser than needed.
pub fn link_grid(config: &LinkConfig) -> Result<FreqGrid> {
    let half = config.sample_rate_gsps() / 2.0;
    FreqGrid::span(config.carrier_ghz - half, config.carrier_ghz + half, ATMOSPHERE_STEP_GHZ)
}

pub fn fig4_link() -> LinkConfig {
    LinkConfig {
        scheme: Scheme::Qpsk,
        symbol_rate_gbaud: 10.0,
        carrier_ghz: 380.0,
        rolloff: 0.35,
        span_symbols: 16,
        frame_bits: 4096,
        samples_per_symbol: 2,
    }
}

pub const FIG4_DISTANCE_M: f64 = 30.0;
pub const FIG4_SNAPSHOT_DB: f64 = 21.4;

pub fn fig4_channel() -> Result<ChannelResponse> {
    atmosphere_channel(&lab_air(), &link_grid(&fig4_link())?, FIG4_DISTANCE_M)
}

pub fn fig5_link() -> LinkConfig {
    LinkConfig {
        scheme: Scheme::Bpsk,
        symbol_rate_gbaud: 200.0,
        carrier_ghz: 380.0,
        rolloff: 0.6,
        span_symbols: 16,
        frame_bits: 1 << 14,
        samples_per_symbol: 2,
    }
}

pub const FIG5_DISTANCE_M: f64 = 100.0;
pub const FIG5_SNR_DB: [f64; 4] = [10.0, 12.0, 14.0, 16.0];
pub const FIG5_SHORT_TAPS: usize = 7;
pub const FIG5_LONG_TAPS: usize = 61;

pub fn fig5_channel() -> Result<ChannelResponse> {
    atmosphere_channel(&lab_air(), &link_grid(&fig5_link())?, FIG5_DISTANCE_M)
}
