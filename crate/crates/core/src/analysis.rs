//! Phase, group delay and group delay dispersion of channels, plus the
//! bandwidth-integrated dispersion metric, mobility coherence time and PAPR.
//!
//! Sign conventions: with `φ = arg h`, group delay is `τ = -dφ/dω` and group
//! delay dispersion is `dτ/dω = -d²φ/dω²`, so `exp(-j·½·D·ω²)` has GDD `+D`.
//! Angular frequency is in rad/ps, group delay in ps and GDD in ps².

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::{omega_rad_per_ps, ChannelResponse};
use crate::error::{Error, Result};
use crate::grid::FreqGrid;
use crate::phy::Waveform;

/// Magnitude below which the phase of a transfer value is treated as undefined.
pub const AMPLITUDE_FLOOR: f64 = 1e-6;

/// Sequential 1-D unwrap: each step is folded into (-π, π].
pub fn unwrap_phase(wrapped: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(wrapped.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in wrapped {
        if let Some(q) = prev {
            let d = p - q;
            if !(-PI..=PI).contains(&d) {
                offset -= (d / (2.0 * PI)).round() * 2.0 * PI;
            }
        }
        out.push(p + offset);
        prev = Some(p);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    pub grid: FreqGrid,
    pub phase_unwrapped: Vec<f64>,
    pub group_delay_ps: Vec<f64>,
    pub gdd_ps2: Vec<f64>,
    /// `true` where derivatives are unavailable: `|h|` below the amplitude
    /// floor, or an unmasked run too short (< 4 points) to difference.
    pub amplitude_floor_mask: Vec<bool>,
    pub amplitude: Vec<f64>,
}

impl PhaseProfile {
    pub fn amplitude_db(&self) -> Vec<f64> {
        self.amplitude.iter().map(|a| 20.0 * a.log10()).collect()
    }

    /// `(freq, gdd)` over unmasked points inside the band.
    pub fn band_gdd(&self, lo_ghz: f64, hi_ghz: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid
            .band_indices(lo_ghz, hi_ghz)
            .filter(|&i| !self.amplitude_floor_mask[i])
            .map(|i| (self.grid.freq_ghz(i), self.gdd_ps2[i]))
    }

    /// Largest |GDD| within the band and where it occurs.
    pub fn peak_abs_gdd(&self, lo_ghz: f64, hi_ghz: f64) -> Option<(f64, f64)> {
        self.band_gdd(lo_ghz, hi_ghz)
            .map(|(f, g)| (f, g.abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

pub fn phase_profile(channel: &ChannelResponse) -> Result<PhaseProfile> {
    phase_profile_with_floor(channel, AMPLITUDE_FLOOR)
}

pub fn phase_profile_with_floor(channel: &ChannelResponse, floor: f64) -> Result<PhaseProfile> {
    let grid = *channel.grid();
    let n = grid.len();
    if n < 5 {
        return Err(Error::invalid("grid", format!("phase profile needs >= 5 points, got {n}")));
    }
    let h = channel.h();
    let amplitude: Vec<f64> = h.iter().map(|v| v.norm()).collect();
    let mut mask: Vec<bool> = amplitude.iter().map(|&a| a < floor).collect();

    let mut phase = vec![f64::NAN; n];
    let mut group_delay = vec![f64::NAN; n];
    let mut gdd = vec![f64::NAN; n];

    // unwrap across the whole grid so segments keep a common reference, then
    // differentiate each unmasked run separately
    let unwrapped = unwrap_phase(&h.iter().map(|v| v.arg()).collect::<Vec<_>>());
    let dw = omega_rad_per_ps(grid.step_ghz());

    let mut i = 0;
    while i < n {
        if mask[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && !mask[i] {
            i += 1;
        }
        let seg = start..i;
        if seg.len() < 4 {
            for k in seg {
                mask[k] = true;
            }
            continue;
        }
        let p = &unwrapped[seg.clone()];
        let m = p.len();
        for k in 0..m {
            let (d1, d2) = if k == 0 {
                (
                    (-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * dw),
                    (2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3]) / (dw * dw),
                )
            } else if k == m - 1 {
                (
                    (3.0 * p[k] - 4.0 * p[k - 1] + p[k - 2]) / (2.0 * dw),
                    (2.0 * p[k] - 5.0 * p[k - 1] + 4.0 * p[k - 2] - p[k - 3]) / (dw * dw),
                )
            } else {
                (
                    (p[k + 1] - p[k - 1]) / (2.0 * dw),
                    (p[k + 1] - 2.0 * p[k] + p[k - 1]) / (dw * dw),
                )
            };
            phase[start + k] = p[k];
            group_delay[start + k] = -d1;
            gdd[start + k] = -d2;
        }
    }

    Ok(PhaseProfile {
        grid,
        phase_unwrapped: phase,
        group_delay_ps: group_delay,
        gdd_ps2: gdd,
        amplitude_floor_mask: mask,
        amplitude,
    })
}

/// Straight-line model of a phase response: `φ(f) ≈ phase_rad - ω(f - ref)·delay_ps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinePhase {
    pub reference_ghz: f64,
    pub phase_rad: f64,
    pub delay_ps: f64,
}

impl AffinePhase {
    #[inline]
    pub fn at(&self, f_ghz: f64) -> f64 {
        self.phase_rad - omega_rad_per_ps(f_ghz - self.reference_ghz) * self.delay_ps
    }
}

/// Unwrapped in-band phase of a channel with its least-squares affine fit.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPhase {
    pub indices: std::ops::Range<usize>,
    pub unwrapped: Vec<f64>,
    pub fit: AffinePhase,
}

/// Unwraps `arg h` over the grid points inside `band` and fits a line in ω.
pub fn band_phase(channel: &ChannelResponse, band: (f64, f64)) -> Result<BandPhase> {
    let (lo, hi) = band;
    let grid = channel.grid();
    let indices = grid.band_indices(lo, hi);
    if indices.len() < 2 {
        return Err(Error::EmptyBand {
            lo_ghz: lo,
            hi_ghz: hi,
            needed: 2,
        });
    }
    let h = &channel.h()[indices.clone()];
    if let Some(k) = h.iter().position(|v| v.norm() < AMPLITUDE_FLOOR) {
        return Err(Error::MaskedPhase {
            freq_ghz: grid.freq_ghz(indices.start + k),
        });
    }
    let unwrapped = unwrap_phase(&h.iter().map(|v| v.arg()).collect::<Vec<_>>());
    let reference = 0.5 * (grid.freq_ghz(indices.start) + grid.freq_ghz(indices.end - 1));
    let xs: Vec<f64> = indices.clone().map(|i| omega_rad_per_ps(grid.freq_ghz(i) - reference)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = unwrapped.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&unwrapped).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let fit = AffinePhase {
        reference_ghz: reference,
        phase_rad: my - slope * mx,
        delay_ps: -slope,
    };
    Ok(BandPhase {
        indices,
        unwrapped,
        fit,
    })
}

/// `2π·B·mean|GDD|` over the band, in ps. A value comparable to or larger
/// than the symbol duration marks dispersion that visibly distorts symbols.
pub fn integrated_gdd_metric(profile: &PhaseProfile, band: (f64, f64)) -> Result<f64> {
    let (lo, hi) = band;
    let vals: Vec<f64> = profile.band_gdd(lo, hi).map(|(_, g)| g.abs()).collect();
    if !(hi > lo) || vals.len() < 2 {
        return Err(Error::EmptyBand {
            lo_ghz: lo,
            hi_ghz: hi,
            needed: 2,
        });
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    Ok(metric_from_mean_gdd(hi - lo, mean))
}

/// Metric for a constant |GDD| (ps²) over a bandwidth in GHz, in ps.
pub fn metric_from_mean_gdd(bandwidth_ghz: f64, mean_abs_gdd_ps2: f64) -> f64 {
    2.0 * PI * bandwidth_ghz * 1e-3 * mean_abs_gdd_ps2
}

/// Mean |GDD| (ps²) at which the metric equals the symbol duration `1/B`;
/// falls as `1/B²`.
pub fn required_gdd_ps2(bandwidth_ghz: f64) -> f64 {
    let symbol_ps = 1e3 / bandwidth_ghz;
    symbol_ps / (2.0 * PI * bandwidth_ghz * 1e-3)
}

/// Half-wavelength travel time `c/(2·f·v)` in seconds.
pub fn coherence_time(carrier_ghz: f64, speed_kmh: f64) -> Result<f64> {
    if !(carrier_ghz > 0.0) {
        return Err(Error::invalid("carrier", "must be positive"));
    }
    if !(speed_kmh > 0.0) {
        return Err(Error::invalid("speed", "must be positive"));
    }
    let half_wavelength_m = crate::atmosphere::C_M_PER_S / (2.0 * carrier_ghz * 1e9);
    Ok(half_wavelength_m / (speed_kmh / 3.6))
}

/// Peak-to-average power ratio of a waveform, dB.
pub fn papr(wave: &Waveform) -> Result<f64> {
    papr_db(wave.samples())
}

pub fn papr_db(samples: &[Complex64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("waveform", "empty"));
    }
    let (peak, sum) = samples
        .iter()
        .map(|s| s.norm_sqr())
        .fold((0.0f64, 0.0f64), |(p, s), v| (p.max(v), s + v));
    if sum == 0.0 {
        return Err(Error::invalid("waveform", "all samples are zero"));
    }
    Ok(10.0 * (peak / (sum / samples.len() as f64)).log10())
}
