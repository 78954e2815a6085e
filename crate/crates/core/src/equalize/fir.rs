use num_complex::Complex64;

use crate::channel::ChannelResponse;
use crate::error::{Error, Result};
use crate::fft::bin_freq;
use crate::phy::{LinkConfig, SpectralFilter, Sync};

/// Taps below this fraction of the main tap magnitude are dropped.
pub const TAP_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateSource {
    GenieFromH,
    PilotTrained,
}

/// Symbol-spaced end-to-end response: `r[t] = Σ_j taps[j]·a[t - delay_offset - j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirChannelEstimate {
    pub taps: Vec<Complex64>,
    pub delay_offset: i64,
    pub source: EstimateSource,
}

impl FirChannelEstimate {
    pub fn new(taps: Vec<Complex64>, delay_offset: i64, source: EstimateSource) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::invalid("taps", "estimate needs at least one tap"));
        }
        if taps.iter().any(|t| !(t.re.is_finite() && t.im.is_finite())) {
            return Err(Error::invalid("taps", "non-finite tap"));
        }
        if !(taps.iter().map(|t| t.norm()).fold(0.0, f64::max) > 0.0) {
            return Err(Error::invalid("taps", "main tap is zero"));
        }
        Ok(Self {
            taps,
            delay_offset,
            source,
        })
    }

    /// Estimate from real taps with zero offset, mostly for tests and examples.
    pub fn from_real(taps: &[f64]) -> Result<Self> {
        Self::new(
            taps.iter().map(|&t| Complex64::new(t, 0.0)).collect(),
            0,
            EstimateSource::GenieFromH,
        )
    }

    /// Channel memory length: number of taps after the first.
    pub fn cml(&self) -> usize {
        self.taps.len() - 1
    }

    pub fn main_tap(&self) -> usize {
        self.taps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }
}

/// End-to-end symbol-spaced response of pulse ⊗ channel ⊗ matched filter,
/// computed on the link's frame block.
pub fn estimate_fir(channel: &ChannelResponse, config: &LinkConfig) -> Result<FirChannelEstimate> {
    let filter = SpectralFilter::for_config(channel, config)?;
    estimate_from_filter(&filter, config)
}

/// As [`estimate_fir`], after removing the genie delay and carrier phase.
pub fn estimate_fir_synced(channel: &ChannelResponse, config: &LinkConfig, sync: &Sync) -> Result<FirChannelEstimate> {
    let n = config.frame_samples();
    let filter = SpectralFilter::for_config(channel, config)?.then(&SpectralFilter::sync_correction(
        n,
        config.sample_rate_gsps(),
        config.carrier_ghz,
        sync,
    ))?;
    estimate_from_filter(&filter, config)
}

/// Symbol-spaced response of an arbitrary per-bin filter on the frame block.
pub fn estimate_from_filter(filter: &SpectralFilter, config: &LinkConfig) -> Result<FirChannelEstimate> {
    config.validate()?;
    let n = config.frame_samples();
    if filter.len() != n {
        return Err(Error::ConfigMismatch(format!(
            "filter has {} bins, frame has {n} samples",
            filter.len()
        )));
    }
    let fs = config.sample_rate_gsps();
    let spectrum: Vec<Complex64> = filter
        .values()
        .iter()
        .enumerate()
        .map(|(k, h)| h * config.pulse_spectrum(bin_freq(k, n, fs)))
        .collect();
    let g = crate::phy::matched_filter_spectrum(&spectrum, config);
    truncate_circular(&g)
}

/// Keeps the shortest run of circular taps that holds every tap above the
/// threshold, read with indices in `[-n/2, n/2)`.
fn truncate_circular(g: &[Complex64]) -> Result<FirChannelEstimate> {
    let n = g.len() as i64;
    let peak = g.iter().map(|t| t.norm()).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::invalid("channel", "end-to-end response is zero"));
    }
    let signed = |k: usize| {
        let k = k as i64;
        if k < n.div_euclid(2) + n.rem_euclid(2) {
            k
        } else {
            k - n
        }
    };
    let (mut lo, mut hi) = (i64::MAX, i64::MIN);
    for (k, t) in g.iter().enumerate() {
        if t.norm() >= TAP_THRESHOLD * peak {
            let s = signed(k);
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    let taps = (lo..=hi).map(|s| g[s.rem_euclid(n) as usize]).collect();
    FirChannelEstimate::new(taps, lo, EstimateSource::GenieFromH)
}

/// Least-mean-squares estimate of `n_taps` taps from known pilot symbols
/// and the matching received soft symbols.
pub fn train_lms(
    pilots: &[Complex64],
    received: &[Complex64],
    n_taps: usize,
    delay_offset: i64,
    step: f64,
    passes: usize,
) -> Result<FirChannelEstimate> {
    if pilots.len() != received.len() || pilots.is_empty() {
        return Err(Error::invalid("pilots", "pilot and received sequences must be non-empty and equal length"));
    }
    if n_taps == 0 {
        return Err(Error::invalid("n_taps", "must be >= 1"));
    }
    let n = pilots.len() as i64;
    let mut taps = vec![Complex64::new(0.0, 0.0); n_taps];
    for _ in 0..passes {
        for t in 0..n {
            let regress: Vec<Complex64> = (0..n_taps as i64)
                .map(|j| pilots[(t - delay_offset - j).rem_euclid(n) as usize])
                .collect();
            let pred: Complex64 = taps.iter().zip(&regress).map(|(g, a)| g * a).sum();
            let err = received[t as usize] - pred;
            for (g, a) in taps.iter_mut().zip(&regress) {
                *g += err * a.conj() * step;
            }
        }
    }
    FirChannelEstimate::new(taps, delay_offset, EstimateSource::PilotTrained)
}
