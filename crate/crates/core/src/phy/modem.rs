use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{LinkConfig, Waveform};
use crate::analysis::band_phase;
use crate::channel::{omega_rad_per_ps, ChannelResponse};
use crate::error::{Error, Result};
use crate::fft::{self, bin_freq};

/// Gray-maps `bits` and shapes them with the root-raised-cosine pulse.
pub fn modulate(bits: &[u8], config: &LinkConfig) -> Result<Waveform> {
    config.validate()?;
    if bits.len() != config.frame_bits {
        return Err(Error::ConfigMismatch(format!(
            "{} bits supplied for a {}-bit frame",
            bits.len(),
            config.frame_bits
        )));
    }
    let symbols: Vec<Complex64> = config
        .scheme
        .map_bits(bits)
        .into_iter()
        .map(|i| config.scheme.point(i))
        .collect();
    Ok(modulate_symbols(&symbols, config))
}

pub(crate) fn modulate_symbols(symbols: &[Complex64], config: &LinkConfig) -> Waveform {
    let nsym = symbols.len();
    let sps = config.samples_per_symbol;
    let n = nsym * sps;
    let fs = config.sample_rate_gsps();
    let mut a = symbols.to_vec();
    fft::forward(&mut a);
    // spectrum of the zero-stuffed symbol train repeats every nsym bins
    let mut x: Vec<Complex64> = (0..n)
        .map(|k| a[k % nsym] * config.pulse_spectrum(bin_freq(k, n, fs)))
        .collect();
    fft::inverse(&mut x);
    Waveform {
        samples: x,
        sample_rate_gsps: fs,
        carrier_ghz: config.carrier_ghz,
        samples_per_symbol: sps,
        bandwidth_ghz: config.occupied_bandwidth_ghz(),
        bits_per_symbol: config.scheme.bits_per_symbol(),
    }
}

/// A channel sampled onto the DFT bins of a particular waveform layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFilter {
    n: usize,
    sample_rate_gsps: f64,
    carrier_ghz: f64,
    values: Vec<Complex64>,
}

impl SpectralFilter {
    pub fn identity(n: usize, sample_rate_gsps: f64, carrier_ghz: f64) -> Self {
        Self {
            n,
            sample_rate_gsps,
            carrier_ghz,
            values: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    /// Samples `channel` on the bins of an `n`-point block. Bins within
    /// `bandwidth_ghz/2` of the carrier must lie on the channel grid; bins
    /// outside that band and outside the grid take the nearest edge value.
    pub fn from_channel(
        channel: &ChannelResponse,
        n: usize,
        sample_rate_gsps: f64,
        carrier_ghz: f64,
        bandwidth_ghz: f64,
    ) -> Result<Self> {
        let grid = channel.grid();
        let half = bandwidth_ghz / 2.0;
        let sampler = channel.sampler();
        let mut values = Vec::with_capacity(n);
        let (mut miss_lo, mut miss_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..n {
            let fb = bin_freq(k, n, sample_rate_gsps);
            let f = carrier_ghz + fb;
            match sampler.at(f) {
                Some(v) => values.push(v),
                None if fb.abs() <= half => {
                    miss_lo = miss_lo.min(f);
                    miss_hi = miss_hi.max(f);
                    values.push(Complex64::new(0.0, 0.0));
                }
                None => {
                    let edge = if f < grid.lo_ghz() { grid.lo_ghz() } else { grid.hi_ghz() };
                    values.push(sampler.at(edge).unwrap_or(Complex64::new(1.0, 0.0)));
                }
            }
        }
        if miss_lo.is_finite() {
            return Err(Error::Coverage {
                lo_ghz: miss_lo,
                hi_ghz: miss_hi,
                cov_lo_ghz: grid.lo_ghz(),
                cov_hi_ghz: grid.hi_ghz(),
            });
        }
        Ok(Self {
            n,
            sample_rate_gsps,
            carrier_ghz,
            values,
        })
    }

    pub fn for_waveform(channel: &ChannelResponse, wave: &Waveform) -> Result<Self> {
        Self::from_channel(channel, wave.len(), wave.sample_rate_gsps, wave.carrier_ghz, wave.bandwidth_ghz)
    }

    pub fn for_config(channel: &ChannelResponse, config: &LinkConfig) -> Result<Self> {
        Self::from_channel(
            channel,
            config.frame_samples(),
            config.sample_rate_gsps(),
            config.carrier_ghz,
            config.occupied_bandwidth_ghz(),
        )
    }

    /// Per-bin linear phase and constant phase that undo `sync`.
    pub fn sync_correction(n: usize, sample_rate_gsps: f64, carrier_ghz: f64, sync: &Sync) -> Self {
        let values = (0..n)
            .map(|k| {
                let w = omega_rad_per_ps(bin_freq(k, n, sample_rate_gsps));
                Complex64::from_polar(1.0, w * sync.delay_ps - sync.phase_rad)
            })
            .collect();
        Self {
            n,
            sample_rate_gsps,
            carrier_ghz,
            values,
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Filter equal to applying `self` then `other`.
    pub fn then(&self, other: &SpectralFilter) -> Result<Self> {
        self.check_layout(other.n, other.sample_rate_gsps, other.carrier_ghz)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
            ..self.clone()
        })
    }

    fn check_layout(&self, n: usize, fs: f64, fc: f64) -> Result<()> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        if n != self.n || !close(fs, self.sample_rate_gsps) || !close(fc, self.carrier_ghz) {
            return Err(Error::ConfigMismatch(format!(
                "filter built for {} samples at {} GS/s around {} GHz, waveform has {n} at {fs} GS/s around {fc} GHz",
                self.n, self.sample_rate_gsps, self.carrier_ghz
            )));
        }
        Ok(())
    }

    pub fn apply(&self, wave: &Waveform) -> Result<Waveform> {
        self.check_layout(wave.len(), wave.sample_rate_gsps, wave.carrier_ghz)?;
        let mut x = wave.samples.clone();
        fft::forward(&mut x);
        for (v, h) in x.iter_mut().zip(&self.values) {
            *v *= h;
        }
        fft::inverse(&mut x);
        Ok(wave.with_samples(x))
    }
}

/// Passes `wave` through `channel` by per-bin multiplication.
pub fn apply_channel(wave: &Waveform, channel: &ChannelResponse) -> Result<Waveform> {
    SpectralFilter::for_waveform(channel, wave)?.apply(wave)
}

/// Per-symbol complex noise variance after the matched filter for a
/// unit-energy symbol at the given Eb/N0.
pub fn noise_variance(ebn0_db: f64, bits_per_symbol: usize) -> f64 {
    1.0 / (bits_per_symbol as f64 * 10f64.powf(ebn0_db / 10.0))
}

/// Adds circular complex white Gaussian noise for the requested Eb/N0, with
/// energy referenced to the nominal unit energy per transmitted symbol.
/// `f64::INFINITY` returns the waveform unchanged.
pub fn add_awgn(wave: &Waveform, ebn0_db: f64, seed: u64) -> Waveform {
    if ebn0_db == f64::INFINITY {
        return wave.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = wave.samples.clone();
    add_noise(&mut x, noise_variance(ebn0_db, wave.bits_per_symbol), &mut rng);
    wave.with_samples(x)
}

pub(crate) fn add_noise(x: &mut [Complex64], variance: f64, rng: &mut ChaCha8Rng) {
    let s = (variance / 2.0).sqrt();
    for v in x.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *v += Complex64::new(re * s, im * s);
    }
}

/// Genie timing and carrier phase: the channel's least-squares delay and
/// phase at the carrier over the occupied band.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sync {
    pub delay_ps: f64,
    pub phase_rad: f64,
}

impl Sync {
    pub fn from_channel(channel: &ChannelResponse, config: &LinkConfig) -> Result<Self> {
        let fit = band_phase(channel, config.occupied_band())?.fit;
        Ok(Self {
            delay_ps: fit.delay_ps,
            phase_rad: fit.at(config.carrier_ghz),
        })
    }
}

/// Matched filter and symbol-rate sampling at zero timing offset.
pub fn demodulate(wave: &Waveform, config: &LinkConfig) -> Result<Vec<Complex64>> {
    demodulate_with(wave, config, None)
}

/// Matched filter after removing a known delay and carrier phase.
pub fn demodulate_synced(wave: &Waveform, config: &LinkConfig, sync: &Sync) -> Result<Vec<Complex64>> {
    let corr = SpectralFilter::sync_correction(wave.len(), wave.sample_rate_gsps, wave.carrier_ghz, sync);
    demodulate_with(wave, config, Some(&corr))
}

pub(crate) fn demodulate_with(wave: &Waveform, config: &LinkConfig, pre: Option<&SpectralFilter>) -> Result<Vec<Complex64>> {
    check_matches(wave, config)?;
    let mut x = wave.samples.clone();
    fft::forward(&mut x);
    if let Some(f) = pre {
        f.check_layout(wave.len(), wave.sample_rate_gsps, wave.carrier_ghz)?;
        for (v, h) in x.iter_mut().zip(&f.values) {
            *v *= h;
        }
    }
    Ok(matched_filter_spectrum(&x, config))
}

/// Matched filter on a block spectrum, then decimation by folding aliases.
pub(crate) fn matched_filter_spectrum(spectrum: &[Complex64], config: &LinkConfig) -> Vec<Complex64> {
    let n = spectrum.len();
    let sps = config.samples_per_symbol;
    let nsym = n / sps;
    let fs = config.sample_rate_gsps();
    let mut folded = vec![Complex64::new(0.0, 0.0); nsym];
    for (k, v) in spectrum.iter().enumerate() {
        let p = config.pulse_spectrum(bin_freq(k, n, fs));
        if p != 0.0 {
            folded[k % nsym] += v * p;
        }
    }
    fft::inverse(&mut folded);
    let scale = 1.0 / sps as f64;
    folded.iter_mut().for_each(|v| *v *= scale);
    folded
}

fn check_matches(wave: &Waveform, config: &LinkConfig) -> Result<()> {
    config.validate()?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    if wave.samples_per_symbol != config.samples_per_symbol
        || !close(wave.sample_rate_gsps, config.sample_rate_gsps())
        || !close(wave.carrier_ghz, config.carrier_ghz)
        || wave.len() != config.frame_samples()
    {
        return Err(Error::ConfigMismatch(format!(
            "waveform ({} samples, {} GS/s, {} GHz, sps {}) does not match link ({} samples, {} GS/s, {} GHz, sps {})",
            wave.len(),
            wave.sample_rate_gsps,
            wave.carrier_ghz,
            wave.samples_per_symbol,
            config.frame_samples(),
            config.sample_rate_gsps(),
            config.carrier_ghz,
            config.samples_per_symbol
        )));
    }
    Ok(())
}
