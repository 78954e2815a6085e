//! Monte-Carlo and semi-analytic bit-error-rate experiments.
//!
//! A sweep runs, for each Eb/N0 point, independent frames of PRBS data
//! through modulation, optional compensating filters, the channel, AWGN,
//! genie-synchronized matched filtering and an equalizer, counting bit
//! errors away from the frame edges until the stop rule is met. All
//! randomness derives from one master seed, and frames are processed in
//! fixed batches with an ordered reduction so results do not depend on
//! thread scheduling.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::channel::ChannelResponse;
use crate::equalize::{
    estimate_fir_synced, mlse_circular, pdc_filter, zf_equalizer, DfeEqualizer, EqualizerKind, EqualizerSpec,
    FirChannelEstimate, LinearEqualizer, STATE_BUDGET,
};
use crate::error::{Error, Result};
use crate::multipath::cascade;
use crate::phy::{
    add_noise, demodulate_with, modulate_symbols, noise_variance, LinkConfig, Prbs, Scheme, SpectralFilter, Sync,
};

/// Largest number of sequences the semi-analytic method will enumerate.
pub const ENUMERATION_BUDGET: usize = 1 << 22;

/// Interference outside the enumerated window, relative to the desired
/// coefficient's energy, above which the semi-analytic result is refused.
pub const RESIDUAL_LIMIT: f64 = 0.01;

const BATCH_FRAMES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BerMethod {
    MonteCarlo,
    SemiAnalytic,
}

impl fmt::Display for BerMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BerMethod::MonteCarlo => "monte_carlo",
            BerMethod::SemiAnalytic => "semi_analytic",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerResult {
    pub ebn0_db: f64,
    /// Bits counted; for semi-analytic results, the number of enumerated
    /// sequences.
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub method: BerMethod,
    pub fingerprint: String,
}

impl BerResult {
    /// Half-width of the `k`-sigma binomial confidence interval.
    pub fn ci_halfwidth(&self, k: f64) -> f64 {
        k * (self.ber * (1.0 - self.ber) / self.bits.max(1) as f64).sqrt()
    }
}

/// Monte-Carlo termination per SNR point: stop once `min_errors` bit errors
/// or `max_bits` counted bits are reached, whichever comes first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_bits: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            min_errors: 100,
            max_bits: 100_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PdcPlacement {
    #[default]
    Off,
    /// Compensator after the channel, ahead of the matched filter.
    Receiver,
    /// Compensator applied to the transmitted waveform.
    Transmitter,
}

impl fmt::Display for PdcPlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PdcPlacement::Off => "off",
            PdcPlacement::Receiver => "on",
            PdcPlacement::Transmitter => "tx",
        })
    }
}

impl FromStr for PdcPlacement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(PdcPlacement::Off),
            "on" | "rx" => Ok(PdcPlacement::Receiver),
            "tx" => Ok(PdcPlacement::Transmitter),
            other => Err(Error::invalid("pdc", format!("`{other}`; use on, off, rx or tx"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub master_seed: u64,
    pub stop: StopRule,
    pub pdc: PdcPlacement,
    /// Keep the slicer input of the first frame at this Eb/N0.
    pub snapshot_ebn0_db: Option<f64>,
    /// Extra responses applied before the channel, on the channel's grid.
    pub tx_filters: Vec<ChannelResponse>,
    /// Extra responses applied after the channel and any receiver PDC.
    pub rx_filters: Vec<ChannelResponse>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            master_seed: 1,
            stop: StopRule::default(),
            pdc: PdcPlacement::Off,
            snapshot_ebn0_db: None,
            tx_filters: Vec::new(),
            rx_filters: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationSnapshot {
    pub ebn0_db: f64,
    pub soft: Vec<Complex64>,
    pub tx_index: Vec<usize>,
}

impl ConstellationSnapshot {
    /// RMS distance of each received point from the centroid of all points
    /// sent with the same symbol, divided by the RMS centroid magnitude so
    /// that a flat channel gain leaves it unchanged.
    pub fn cluster_spread(&self) -> f64 {
        let m = self.tx_index.iter().copied().max().unwrap_or(0) + 1;
        let mut sum = vec![Complex64::default(); m];
        let mut count = vec![0usize; m];
        for (y, &i) in self.soft.iter().zip(&self.tx_index) {
            sum[i] += y;
            count[i] += 1;
        }
        let centroid: Vec<Complex64> = sum.iter().zip(&count).map(|(s, &c)| s / c.max(1) as f64).collect();
        let ss: f64 = self.soft.iter().zip(&self.tx_index).map(|(y, &i)| (y - centroid[i]).norm_sqr()).sum();
        let used: Vec<&Complex64> = centroid.iter().zip(&count).filter(|(_, &c)| c > 0).map(|(v, _)| v).collect();
        let radius = (used.iter().map(|v| v.norm_sqr()).sum::<f64>() / used.len().max(1) as f64).sqrt();
        (ss / self.soft.len().max(1) as f64).sqrt() / radius
    }

    /// CSV with header `re,im,tx_symbol_index`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,tx_symbol_index\n");
        for (y, i) in self.soft.iter().zip(&self.tx_index) {
            out.push_str(&format!("{},{},{}\n", y.re, y.im, i));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepLabels {
    pub eq: String,
    pub taps: usize,
    pub pdc: String,
    pub channel: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<BerResult>,
    pub snapshot: Option<ConstellationSnapshot>,
    pub labels: SweepLabels,
    /// Channel memory of the end-to-end symbol-spaced response seen by the
    /// equalizer.
    pub cml: usize,
}

impl SweepResult {
    /// CSV with header `ebn0_db,ber,bits,errors,eq,taps,pdc,channel_label,fingerprint`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ebn0_db,ber,bits,errors,eq,taps,pdc,channel_label,fingerprint\n");
        let label = csv_field(&self.labels.channel);
        for p in &self.points {
            out.push_str(&format!(
                "{},{:e},{},{},{},{},{},{},{}\n",
                p.ebn0_db, p.ber, p.bits, p.errors, self.labels.eq, self.labels.taps, self.labels.pdc, label, p.fingerprint
            ));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// SplitMix64 step, used to derive independent child seeds.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    let mut z = parent.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Closed-form BPSK/QPSK bit error rate on an AWGN channel, `Q(√(2·Eb/N0))`.
pub fn awgn_ber(ebn0_db: f64) -> f64 {
    q_function((2.0 * 10f64.powf(ebn0_db / 10.0)).sqrt())
}

/// Receiver resolved once per sweep and reused by every frame.
enum Receiver {
    Slicer,
    Linear(LinearEqualizer),
    Dfe(DfeEqualizer),
    Mlse(FirChannelEstimate),
}

impl Receiver {
    /// Slicer input (when one exists) and decisions for one frame.
    fn detect(&self, soft: Vec<Complex64>, scheme: Scheme) -> Result<(Vec<Complex64>, Vec<usize>)> {
        Ok(match self {
            Receiver::Slicer => {
                let d = soft.iter().map(|z| scheme.slice(*z)).collect();
                (soft, d)
            }
            Receiver::Linear(eq) => {
                let y = eq.equalize(&soft);
                let d = y.iter().map(|z| scheme.slice(*z)).collect();
                (y, d)
            }
            Receiver::Dfe(eq) => eq.run(&soft, scheme),
            Receiver::Mlse(est) => {
                let d = mlse_circular(est, &soft, scheme, STATE_BUDGET)?;
                (soft, d)
            }
        })
    }

    /// Symbols at each frame edge excluded from error counting.
    fn reach(&self, est: &FirChannelEstimate) -> usize {
        let mem = est.cml() + est.delay_offset.unsigned_abs() as usize;
        match self {
            Receiver::Slicer => mem,
            Receiver::Linear(eq) => mem + eq.taps.len() + eq.decision_delay.unsigned_abs() as usize,
            Receiver::Dfe(eq) => {
                mem + eq.feedforward.len() + eq.feedback.len() + eq.decision_delay.unsigned_abs() as usize
            }
            Receiver::Mlse(_) => 2 * mem,
        }
    }
}

/// Frame layout, filters and receiver for one SNR point.
struct Setup<'a> {
    config: &'a LinkConfig,
    tx: SpectralFilter,
    rx: SpectralFilter,
    receiver: Receiver,
    guard: usize,
    variance: f64,
}

#[derive(Default)]
struct FrameOutcome {
    bits: u64,
    errors: u64,
    snapshot: Option<(Vec<Complex64>, Vec<usize>)>,
}

impl Setup<'_> {
    fn run_frame(&self, frame_seed: u64, keep: bool) -> Result<FrameOutcome> {
        let cfg = self.config;
        let scheme = cfg.scheme;
        let nsym = cfg.frame_symbols();
        let prbs_seed = (frame_seed % ((1 << 23) - 1)) as u32 + 1;
        let bits: Vec<u8> = Prbs::new(23, prbs_seed)?.take(cfg.frame_bits).collect();
        let tx_index = scheme.map_bits(&bits);
        let symbols: Vec<Complex64> = tx_index.iter().map(|&i| scheme.point(i)).collect();

        let wave = self.tx.apply(&modulate_symbols(&symbols, cfg))?;
        let mut samples = wave.samples().to_vec();
        if self.variance > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(frame_seed);
            add_noise(&mut samples, self.variance, &mut rng);
        }
        let received = crate::phy::Waveform::new(samples, wave.sample_rate_gsps(), wave.carrier_ghz(), wave.samples_per_symbol())?;
        let soft = demodulate_with(&received, cfg, Some(&self.rx))?;
        let (slicer_in, decided) = self.receiver.detect(soft, scheme)?;

        let counted = self.guard..nsym - self.guard;
        let errors: u64 = counted
            .clone()
            .map(|k| u64::from(scheme.bit_errors(decided[k], tx_index[k])))
            .sum();
        Ok(FrameOutcome {
            bits: (counted.len() * scheme.bits_per_symbol()) as u64,
            errors,
            snapshot: keep.then(|| (slicer_in[counted.clone()].to_vec(), tx_index[counted].to_vec())),
        })
    }
}

fn fingerprint(parts: &[String]) -> String {
    let digest = Sha256::digest(parts.join("|").as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn channel_digest(ch: &ChannelResponse) -> String {
    let mut hasher = Sha256::new();
    let g = ch.grid();
    hasher.update(g.lo_ghz().to_le_bytes());
    hasher.update(g.step_ghz().to_le_bytes());
    hasher.update((g.len() as u64).to_le_bytes());
    for v in ch.h() {
        hasher.update(v.re.to_le_bytes());
        hasher.update(v.im.to_le_bytes());
    }
    hasher.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Monte-Carlo BER sweep. `eq = None` slices the synchronized matched-filter
/// output directly.
pub fn run_ber_sweep(
    config: &LinkConfig,
    channel: &ChannelResponse,
    eq: Option<EqualizerSpec>,
    snr_grid_db: &[f64],
    options: &SweepOptions,
) -> Result<SweepResult> {
    config.validate()?;
    if snr_grid_db.is_empty() {
        return Err(Error::invalid("snr_grid", "empty"));
    }
    if snr_grid_db.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("snr_grid", "must be strictly increasing"));
    }
    if options.stop.max_bits == 0 {
        return Err(Error::invalid("stop.max_bits", "must be positive"));
    }
    let band = config.occupied_band();

    let mut tx_chain: Vec<ChannelResponse> = options.tx_filters.clone();
    let mut rx_chain: Vec<ChannelResponse> = Vec::new();
    match options.pdc {
        PdcPlacement::Off => {}
        PdcPlacement::Transmitter => tx_chain.push(pdc_filter(channel, band)?),
        PdcPlacement::Receiver => rx_chain.push(pdc_filter(channel, band)?),
    }
    rx_chain.extend(options.rx_filters.iter().cloned());
    if let Some(EqualizerSpec {
        kind: EqualizerKind::Zf, ..
    }) = eq
    {
        let mut so_far = tx_chain.clone();
        so_far.push(channel.clone());
        so_far.extend(rx_chain.iter().cloned());
        rx_chain.push(zf_equalizer(&cascade(&so_far)?, band)?);
    }

    let mut all = tx_chain.clone();
    all.push(channel.clone());
    all.extend(rx_chain.iter().cloned());
    let total = cascade(&all)?;
    let sync = Sync::from_channel(&total, config)?;
    let est = estimate_fir_synced(&total, config, &sync)?;

    let n = config.frame_samples();
    let fs = config.sample_rate_gsps();
    let fc = config.carrier_ghz;
    let mut tx = SpectralFilter::identity(n, fs, fc);
    for r in tx_chain.iter().chain(std::iter::once(channel)) {
        tx = tx.then(&SpectralFilter::for_config(r, config)?)?;
    }
    let mut rx = SpectralFilter::sync_correction(n, fs, fc, &sync);
    for r in &rx_chain {
        rx = rx.then(&SpectralFilter::for_config(r, config)?)?;
    }

    let (eq_label, taps) = match eq {
        None => ("none".to_string(), 0),
        Some(s) => (
            match s.kind {
                EqualizerKind::Zf => "zf",
                EqualizerKind::LinearMmse => "mmse",
                EqualizerKind::Dfe => "dfe",
                EqualizerKind::Mlse => "mlse",
            }
            .to_string(),
            s.n_taps,
        ),
    };
    let labels = SweepLabels {
        eq: eq_label,
        taps,
        pdc: options.pdc.to_string(),
        channel: channel.label().to_string(),
    };
    let digest = channel_digest(&total);
    let filters: Vec<String> = options
        .tx_filters
        .iter()
        .chain(&options.rx_filters)
        .map(channel_digest)
        .collect();

    let mut points = Vec::with_capacity(snr_grid_db.len());
    let mut snapshot = None;
    for (pi, &ebn0) in snr_grid_db.iter().enumerate() {
        let tag = |e: Error| Error::AtSnrPoint {
            ebn0_db: ebn0,
            source: Box::new(e),
        };
        let variance = noise_variance(ebn0, config.scheme.bits_per_symbol());
        let receiver = match eq {
            None
            | Some(EqualizerSpec {
                kind: EqualizerKind::Zf, ..
            }) => Receiver::Slicer,
            Some(s) => {
                let spec = s.with_noise(variance);
                match s.kind {
                    EqualizerKind::LinearMmse => Receiver::Linear(crate::equalize::linear_mmse(&est, &spec).map_err(tag)?),
                    EqualizerKind::Dfe => {
                        Receiver::Dfe(DfeEqualizer::design(&est, s.n_taps, s.n_taps, variance).map_err(tag)?)
                    }
                    EqualizerKind::Mlse => {
                        crate::equalize::trellis_states(&est, config.scheme, STATE_BUDGET).map_err(tag)?;
                        Receiver::Mlse(est.clone())
                    }
                    EqualizerKind::Zf => unreachable!(),
                }
            }
        };
        let guard = config.span_symbols + receiver.reach(&est);
        if 2 * guard >= config.frame_symbols() {
            return Err(tag(Error::invalid(
                "frame_bits",
                format!("frame of {} symbols is shorter than twice the {guard}-symbol edge guard", config.frame_symbols()),
            )));
        }
        let setup = Setup {
            config,
            tx: tx.clone(),
            rx: rx.clone(),
            receiver,
            guard,
            variance,
        };
        let point_seed = derive_seed(options.master_seed, pi as u64);
        let want_snapshot = options.snapshot_ebn0_db.is_some_and(|s| (s - ebn0).abs() < 1e-9);

        let (mut bits, mut errors) = (0u64, 0u64);
        let mut frame = 0u64;
        'frames: loop {
            let batch: Vec<Result<FrameOutcome>> = (frame..frame + BATCH_FRAMES as u64)
                .into_par_iter()
                .map(|f| setup.run_frame(derive_seed(point_seed, f), want_snapshot && f == 0))
                .collect();
            for outcome in batch {
                let o = outcome.map_err(tag)?;
                if let Some((soft, tx_index)) = o.snapshot {
                    snapshot = Some(ConstellationSnapshot {
                        ebn0_db: ebn0,
                        soft,
                        tx_index,
                    });
                }
                bits += o.bits;
                errors += o.errors;
                frame += 1;
                if errors >= options.stop.min_errors || bits >= options.stop.max_bits {
                    break 'frames;
                }
            }
        }

        let fp = fingerprint(&[
            format!("{config:?}"),
            digest.clone(),
            filters.join(","),
            format!("{eq:?}"),
            options.pdc.to_string(),
            format!("{:?}", options.stop),
            options.master_seed.to_string(),
            format!("{ebn0:?}"),
        ]);
        points.push(BerResult {
            ebn0_db: ebn0,
            bits,
            errors,
            ber: errors as f64 / bits as f64,
            method: BerMethod::MonteCarlo,
            fingerprint: fp,
        });
    }

    Ok(SweepResult {
        points,
        snapshot,
        labels,
        cml: est.cml(),
    })
}

/// Semi-analytic BER of symbol-by-symbol slicing of the symbol-spaced
/// output described by `est`: the desired symbol is the zero-delay tap and
/// the `cml_window` strongest other taps are enumerated exactly.
pub fn semi_analytic_ber(est: &FirChannelEstimate, scheme: Scheme, ebn0_db: f64, cml_window: usize) -> Result<BerResult> {
    let variance = noise_variance(ebn0_db, scheme.bits_per_symbol());
    let result = enumerate_ber(&est.taps, est.delay_offset, variance, scheme, cml_window)?;
    finish_semi(result, ebn0_db, &est.taps, est.delay_offset, variance, scheme, cml_window)
}

/// As [`semi_analytic_ber`] for the output of a linear equalizer: uses the
/// combined channel-equalizer response and the filtered noise variance.
pub fn semi_analytic_ber_linear(
    est: &FirChannelEstimate,
    eq: &LinearEqualizer,
    scheme: Scheme,
    ebn0_db: f64,
    cml_window: usize,
) -> Result<BerResult> {
    let (first, coeffs) = eq.combined_response(est);
    let variance = noise_variance(ebn0_db, scheme.bits_per_symbol()) * eq.noise_gain();
    let result = enumerate_ber(&coeffs, first, variance, scheme, cml_window)?;
    finish_semi(result, ebn0_db, &coeffs, first, variance, scheme, cml_window)
}

fn finish_semi(
    (ber, count): (f64, u64),
    ebn0_db: f64,
    coeffs: &[Complex64],
    first: i64,
    variance: f64,
    scheme: Scheme,
    window: usize,
) -> Result<BerResult> {
    let fp = fingerprint(&[
        format!("{coeffs:?}"),
        first.to_string(),
        format!("{variance:?}"),
        scheme.to_string(),
        window.to_string(),
    ]);
    Ok(BerResult {
        ebn0_db,
        bits: count,
        errors: 0,
        ber,
        method: BerMethod::SemiAnalytic,
        fingerprint: fp,
    })
}

/// Averages the per-bit Gaussian error probability over every desired
/// symbol and every pattern of the `window` strongest interferers.
/// `coeffs[i]` multiplies `a[k - first - i]`.
fn enumerate_ber(coeffs: &[Complex64], first: i64, variance: f64, scheme: Scheme, window: usize) -> Result<(f64, u64)> {
    let desired_pos = -first;
    let desired = if (0..coeffs.len() as i64).contains(&desired_pos) {
        coeffs[desired_pos as usize]
    } else {
        Complex64::default()
    };
    let mut others: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i as i64 != desired_pos)
        .map(|(_, c)| *c)
        .collect();
    others.sort_by(|a, b| b.norm_sqr().total_cmp(&a.norm_sqr()));
    let window = window.min(others.len());
    let residual: f64 = others[window..].iter().map(|c| c.norm_sqr()).sum();
    if residual > RESIDUAL_LIMIT * desired.norm_sqr() {
        return Err(Error::invalid(
            "cml_window",
            format!(
                "interference outside a {window}-tap window holds {:.2}% of the desired energy; widen the window",
                100.0 * residual / desired.norm_sqr().max(f64::MIN_POSITIVE)
            ),
        ));
    }
    let m = scheme.order();
    let count = (m as f64).powi(window as i32 + 1);
    if count > ENUMERATION_BUDGET as f64 {
        return Err(Error::EnumerationBudget {
            count,
            budget: ENUMERATION_BUDGET,
        });
    }
    let count = count as u64;
    let interferers = &others[..window];
    let points = scheme.constellation();
    let sigma = (variance / 2.0).sqrt();
    let bps = scheme.bits_per_symbol();

    let mut total = 0.0;
    for pattern in 0..count {
        let mut p = pattern as usize;
        let a0 = p % m;
        p /= m;
        let mut y = desired * points[a0];
        for c in interferers {
            y += c * points[p % m];
            p /= m;
        }
        let tx = points[a0];
        // each Gray bit is decided on one quadrature
        let mut pe = q_function(tx.re.signum() * y.re / sigma);
        if bps == 2 {
            pe += q_function(tx.im.signum() * y.im / sigma);
        }
        total += pe / bps as f64;
    }
    Ok((total / count as f64, count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equalize::EstimateSource;
    use crate::grid::FreqGrid;
    use crate::multipath::{multipath_transfer, Path, PathSet};

    fn cfg(scheme: Scheme, frame_bits: usize) -> LinkConfig {
        LinkConfig {
            scheme,
            symbol_rate_gbaud: 10.0,
            carrier_ghz: 380.0,
            rolloff: 0.35,
            span_symbols: 8,
            frame_bits,
            samples_per_symbol: 2,
        }
    }

    fn grid() -> FreqGrid {
        FreqGrid::span(360.0, 400.0, 0.01).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn q_function_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert!((q_function(1.0) / 0.158_655_253_931_457_05 - 1.0).abs() < 1e-13);
        assert!((q_function(3.0) / 1.349_898_031_630_095_9e-3 - 1.0).abs() < 1e-13);
        assert!((awgn_ber(9.6) - 1.0e-5).abs() < 0.05e-5);
    }

    #[test]
    fn seeds_are_spread() {
        let a: Vec<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn single_tap_semi_analytic_is_closed_form() {
        for scheme in [Scheme::Bpsk, Scheme::Qpsk] {
            let est = FirChannelEstimate::from_real(&[1.0]).unwrap();
            for ebn0 in [0.0, 4.0, 9.6] {
                let r = semi_analytic_ber(&est, scheme, ebn0, 0).unwrap();
                assert!((r.ber / awgn_ber(ebn0) - 1.0).abs() < 1e-13, "{scheme} {ebn0}");
                assert_eq!(r.method, BerMethod::SemiAnalytic);
            }
        }
    }

    #[test]
    fn two_tap_semi_analytic_matches_hand_enumeration() {
        // ½[Q(1.3·√(2γ)) + Q(0.7·√(2γ))] at γ = 6 dB, from scipy.special.erfc
        let est = FirChannelEstimate::from_real(&[1.0, 0.3]).unwrap();
        let r = semi_analytic_ber(&est, Scheme::Bpsk, 6.0, 1).unwrap();
        assert!((r.ber - TWO_TAP_6DB).abs() < 1e-12, "{}", r.ber);
    }

    const TWO_TAP_6DB: f64 = 0.012122166306366965;

    #[test]
    fn semi_analytic_refuses_narrow_window() {
        let est = FirChannelEstimate::from_real(&[1.0, 0.5, 0.2]).unwrap();
        assert!(semi_analytic_ber(&est, Scheme::Bpsk, 8.0, 1).is_err());
        assert!(semi_analytic_ber(&est, Scheme::Bpsk, 8.0, 2).is_ok());
        let long = FirChannelEstimate::new(vec![c(0.3); 30], 0, EstimateSource::GenieFromH).unwrap();
        assert!(matches!(
            semi_analytic_ber(&long, Scheme::Qpsk, 8.0, 29),
            Err(Error::EnumerationBudget { .. })
        ));
    }

    #[test]
    fn identity_channel_follows_q_function() {
        let config = cfg(Scheme::Bpsk, 4096);
        let opts = SweepOptions {
            master_seed: 11,
            stop: StopRule {
                min_errors: 400,
                max_bits: 2_000_000,
            },
            ..Default::default()
        };
        let res = run_ber_sweep(&config, &ChannelResponse::identity(grid()), None, &[2.0, 5.0, 7.0], &opts).unwrap();
        for p in &res.points {
            let q = awgn_ber(p.ebn0_db);
            let sigma = (q * (1.0 - q) / p.bits as f64).sqrt();
            assert!((p.ber - q).abs() < 3.0 * sigma, "{} dB: {} vs {q}", p.ebn0_db, p.ber);
        }
        assert_eq!(res.labels.eq, "none");
        assert_eq!(res.cml, 0);
    }

    #[test]
    fn sweeps_are_reproducible() {
        let config = cfg(Scheme::Qpsk, 2048);
        let ch = multipath_transfer(&PathSet::two_path(100.0, 0.4).unwrap(), &grid()).unwrap();
        let opts = SweepOptions {
            master_seed: 5,
            stop: StopRule {
                min_errors: 50,
                max_bits: 200_000,
            },
            snapshot_ebn0_db: Some(8.0),
            ..Default::default()
        };
        let eq: EqualizerSpec = "dfe:5".parse().unwrap();
        let a = run_ber_sweep(&config, &ch, Some(eq), &[4.0, 8.0], &opts).unwrap();
        let b = run_ber_sweep(&config, &ch, Some(eq), &[4.0, 8.0], &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.snapshot.is_some());
        let other = SweepOptions {
            master_seed: 6,
            ..opts.clone()
        };
        let c = run_ber_sweep(&config, &ch, Some(eq), &[4.0, 8.0], &other).unwrap();
        assert_ne!(a.points[0].fingerprint, c.points[0].fingerprint);
        assert!(a.to_csv().starts_with("ebn0_db,ber,bits,errors,eq,taps,pdc,channel_label,fingerprint\n"));
    }

    #[test]
    fn cluster_spread_ignores_flat_gain() {
        let soft = vec![c(1.1), c(0.9), c(-1.0), c(-1.2)];
        let a = ConstellationSnapshot {
            ebn0_db: 0.0,
            soft: soft.clone(),
            tx_index: vec![0, 0, 1, 1],
        };
        let b = ConstellationSnapshot {
            soft: soft.iter().map(|v| v * Complex64::new(0.0, 0.3)).collect(),
            ..a.clone()
        };
        assert!((a.cluster_spread() - b.cluster_spread()).abs() < 1e-12);
        assert!((a.cluster_spread() - 0.1 / 1.105f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_unordered_grid_and_tags_errors() {
        let config = cfg(Scheme::Bpsk, 1024);
        let ch = ChannelResponse::identity(grid());
        assert!(run_ber_sweep(&config, &ch, None, &[5.0, 5.0], &SweepOptions::default()).is_err());
        let long: Vec<Path> = (0..30).map(|k| Path::new(100.0 * k as f64, c(0.9f64.powi(k)))).collect();
        let ch = multipath_transfer(&PathSet::new(long).unwrap(), &grid()).unwrap();
        let mlse: EqualizerSpec = "mlse".parse().unwrap();
        match run_ber_sweep(&config, &ch, Some(mlse), &[10.0], &SweepOptions::default()) {
            Err(Error::AtSnrPoint { ebn0_db, source }) => {
                assert_eq!(ebn0_db, 10.0);
                assert!(matches!(*source, Error::StateBudget { .. }));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn phase_only_channel_with_pdc_is_lossless() {
        let config = cfg(Scheme::Qpsk, 8192);
        let ch = ChannelResponse::quadratic_phase(grid(), 20_000.0, 380.0);
        let stop = StopRule {
            min_errors: 300,
            max_bits: 4_000_000,
        };
        let opts = SweepOptions {
            master_seed: 3,
            stop,
            pdc: PdcPlacement::Receiver,
            ..Default::default()
        };
        let res = run_ber_sweep(&config, &ch, None, &[6.0], &opts).unwrap();
        let p = &res.points[0];
        let q = awgn_ber(6.0);
        assert!((p.ber - q).abs() < 3.0 * (q / p.bits as f64).sqrt(), "{} vs {q}", p.ber);

        let off = run_ber_sweep(&config, &ch, None, &[6.0], &SweepOptions { pdc: PdcPlacement::Off, ..opts }).unwrap();
        assert!(off.points[0].ber > 10.0 * q);
    }
}
