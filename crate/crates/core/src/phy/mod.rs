//! Single-carrier BPSK/QPSK physical layer: bit sources, root-raised-cosine
//! modulation, frequency-domain channel application, AWGN and matched-filter
//! demodulation.
//!
//! Frames are processed circularly: a frame of `n` symbols at `sps` samples
//! per symbol is one DFT block of `n·sps` samples, and the pulse, channel and
//! matched filter are all applied as per-bin products. The pulse spectrum is
//! the exact root of a raised cosine, so pulse ⊗ matched filter is Nyquist.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

mod modem;
mod prbs;

pub use modem::{
    add_awgn, apply_channel, demodulate, demodulate_synced, modulate, noise_variance, SpectralFilter, Sync,
};
pub use prbs::{prbs, Prbs};
pub(crate) use modem::{add_noise, demodulate_with, matched_filter_spectrum, modulate_symbols};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Bpsk,
    Qpsk,
}

impl Scheme {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Scheme::Bpsk => 1,
            Scheme::Qpsk => 2,
        }
    }

    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }

    /// Unit-energy constellation, indexed by the Gray-coded bit pattern
    /// (first bit is the most significant).
    pub fn constellation(self) -> Vec<Complex64> {
        (0..self.order()).map(|i| self.point(i)).collect()
    }

    #[inline]
    pub fn point(self, index: usize) -> Complex64 {
        match self {
            Scheme::Bpsk => Complex64::new(if index & 1 == 0 { 1.0 } else { -1.0 }, 0.0),
            Scheme::Qpsk => {
                let re = if index & 2 == 0 { 1.0 } else { -1.0 };
                let im = if index & 1 == 0 { 1.0 } else { -1.0 };
                Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
            }
        }
    }

    /// Maps bits to symbol indices.
    pub fn map_bits(self, bits: &[u8]) -> Vec<usize> {
        bits.chunks(self.bits_per_symbol())
            .map(|c| c.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize))
            .collect()
    }

    /// Nearest-point decision, returned as a constellation index.
    #[inline]
    pub fn slice(self, z: Complex64) -> usize {
        match self {
            Scheme::Bpsk => usize::from(z.re < 0.0),
            Scheme::Qpsk => (usize::from(z.re < 0.0) << 1) | usize::from(z.im < 0.0),
        }
    }

    /// Number of differing bits between two symbol indices.
    #[inline]
    pub fn bit_errors(self, a: usize, b: usize) -> u32 {
        ((a ^ b) as u32).count_ones()
    }

    /// Constellation index of the point closest to `z`.
    pub fn index_of(self, z: Complex64) -> usize {
        self.slice(z)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Bpsk => "bpsk",
            Scheme::Qpsk => "qpsk",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Scheme::Bpsk),
            "qpsk" => Ok(Scheme::Qpsk),
            other => Err(Error::invalid("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub scheme: Scheme,
    pub symbol_rate_gbaud: f64,
    pub carrier_ghz: f64,
    pub rolloff: f64,
    /// Pulse span in symbols. With block processing the pulse is never
    /// truncated; the span sets the guard excluded at each frame edge.
    pub span_symbols: usize,
    pub frame_bits: usize,
    pub samples_per_symbol: usize,
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.symbol_rate_gbaud > 0.0 && self.symbol_rate_gbaud.is_finite()) {
            return Err(Error::invalid("symbol_rate", "must be positive"));
        }
        if !(self.carrier_ghz > 0.0 && self.carrier_ghz.is_finite()) {
            return Err(Error::invalid("carrier", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::invalid("rolloff", format!("{} outside [0, 1]", self.rolloff)));
        }
        if self.samples_per_symbol < 2 {
            return Err(Error::invalid("samples_per_symbol", "must be >= 2"));
        }
        if self.occupied_bandwidth_ghz() > self.sample_rate_gsps() {
            return Err(Error::invalid("rolloff", "occupied bandwidth exceeds the sample rate"));
        }
        let bps = self.scheme.bits_per_symbol();
        if self.frame_bits == 0 || !self.frame_bits.is_multiple_of(bps) {
            return Err(Error::invalid(
                "frame_bits",
                format!("{} is not a positive multiple of {bps}", self.frame_bits),
            ));
        }
        Ok(())
    }

    pub fn sample_rate_gsps(&self) -> f64 {
        self.symbol_rate_gbaud * self.samples_per_symbol as f64
    }

    pub fn occupied_bandwidth_ghz(&self) -> f64 {
        (1.0 + self.rolloff) * self.symbol_rate_gbaud
    }

    /// Absolute frequency band the signal occupies, GHz.
    pub fn occupied_band(&self) -> (f64, f64) {
        let half = self.occupied_bandwidth_ghz() / 2.0;
        (self.carrier_ghz - half, self.carrier_ghz + half)
    }

    pub fn frame_symbols(&self) -> usize {
        self.frame_bits / self.scheme.bits_per_symbol()
    }

    pub fn frame_samples(&self) -> usize {
        self.frame_symbols() * self.samples_per_symbol
    }

    pub fn symbol_duration_ps(&self) -> f64 {
        1e3 / self.symbol_rate_gbaud
    }

    /// Raised-cosine spectrum at baseband frequency `f_ghz`, unit in the
    /// passband. Aliases at multiples of the symbol rate sum to one.
    pub fn raised_cosine(&self, f_ghz: f64) -> f64 {
        let rs = self.symbol_rate_gbaud;
        let a = f_ghz.abs();
        let lo = (1.0 - self.rolloff) * rs / 2.0;
        let hi = (1.0 + self.rolloff) * rs / 2.0;
        if self.rolloff == 0.0 {
            return match a.partial_cmp(&lo) {
                Some(std::cmp::Ordering::Less) => 1.0,
                Some(std::cmp::Ordering::Equal) => 0.5,
                _ => 0.0,
            };
        }
        if a <= lo {
            1.0
        } else if a >= hi {
            0.0
        } else {
            0.5 * (1.0 + (PI / (self.rolloff * rs) * (a - lo)).cos())
        }
    }

    /// Root-raised-cosine pulse spectrum on a DFT bin, scaled so that a
    /// frame of unit-energy symbols has unit energy per symbol.
    pub fn pulse_spectrum(&self, f_ghz: f64) -> f64 {
        (self.samples_per_symbol as f64 * self.raised_cosine(f_ghz)).sqrt()
    }
}

/// Complex baseband envelope around a carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<Complex64>,
    sample_rate_gsps: f64,
    carrier_ghz: f64,
    samples_per_symbol: usize,
    /// Two-sided occupied bandwidth, GHz. A channel applied to the waveform
    /// must cover this band.
    bandwidth_ghz: f64,
    bits_per_symbol: usize,
}

impl Waveform {
    pub fn new(samples: Vec<Complex64>, sample_rate_gsps: f64, carrier_ghz: f64, samples_per_symbol: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("waveform", "no samples"));
        }
        if samples.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("waveform", "non-finite sample"));
        }
        if !(sample_rate_gsps > 0.0 && sample_rate_gsps.is_finite()) {
            return Err(Error::invalid("sample_rate", "must be positive"));
        }
        if !carrier_ghz.is_finite() {
            return Err(Error::invalid("carrier", "must be finite"));
        }
        if samples_per_symbol < 2 {
            return Err(Error::invalid("samples_per_symbol", "must be >= 2"));
        }
        Ok(Self {
            samples,
            sample_rate_gsps,
            carrier_ghz,
            samples_per_symbol,
            bandwidth_ghz: sample_rate_gsps,
            bits_per_symbol: 1,
        })
    }

    /// Gaussian pulse of the given full width at half maximum (power), centred
    /// in the record.
    pub fn gaussian_pulse(fwhm_ps: f64, carrier_ghz: f64, sample_rate_gsps: f64, n_samples: usize) -> Result<Self> {
        if !(fwhm_ps > 0.0) {
            return Err(Error::invalid("pulse_width", "must be positive"));
        }
        let dt = 1e3 / sample_rate_gsps;
        let centre = (n_samples / 2) as f64;
        // |x|² = exp(-t²/σ²) has its half-power points at ±σ·√ln2
        let sigma = fwhm_ps / (2.0 * 2f64.ln().sqrt());
        let samples = (0..n_samples)
            .map(|i| {
                let t = (i as f64 - centre) * dt;
                Complex64::new((-t * t / (2.0 * sigma * sigma)).exp(), 0.0)
            })
            .collect();
        Self::new(samples, sample_rate_gsps, carrier_ghz, 2)
    }

    pub fn with_bandwidth(mut self, bandwidth_ghz: f64) -> Result<Self> {
        if !(bandwidth_ghz > 0.0 && bandwidth_ghz <= self.sample_rate_gsps) {
            return Err(Error::invalid("bandwidth", "must be in (0, sample rate]"));
        }
        self.bandwidth_ghz = bandwidth_ghz;
        Ok(self)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate_gsps(&self) -> f64 {
        self.sample_rate_gsps
    }

    pub fn carrier_ghz(&self) -> f64 {
        self.carrier_ghz
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    pub fn symbol_rate_gbaud(&self) -> f64 {
        self.sample_rate_gsps / self.samples_per_symbol as f64
    }

    pub fn bandwidth_ghz(&self) -> f64 {
        self.bandwidth_ghz
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Duration of one sample, ps.
    pub fn sample_period_ps(&self) -> f64 {
        1e3 / self.sample_rate_gsps
    }

    pub(crate) fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        Self {
            samples,
            ..self.clone()
        }
    }
}
