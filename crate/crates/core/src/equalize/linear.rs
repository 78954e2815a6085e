use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::fir::FirChannelEstimate;
use crate::channel::ChannelResponse;
use crate::error::{Error, Result};

/// Diagonal loading added when the tap correlation matrix is not positive definite.
pub const DIAGONAL_LOADING: f64 = 1e-12;

/// Smallest in-band |h| the zero-forcing inverse accepts (40 dB of gain).
pub const ZF_FLOOR: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EqualizerKind {
    Zf,
    LinearMmse,
    Dfe,
    Mlse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualizerSpec {
    pub kind: EqualizerKind,
    /// Tap count; for the DFE, both the feed-forward and the feedback count.
    pub n_taps: usize,
    /// Per-symbol complex noise variance at the equalizer input.
    pub noise_variance: f64,
}

impl EqualizerSpec {
    pub fn new(kind: EqualizerKind, n_taps: usize, noise_variance: f64) -> Result<Self> {
        if n_taps == 0 && matches!(kind, EqualizerKind::LinearMmse | EqualizerKind::Dfe) {
            return Err(Error::invalid("n_taps", "must be >= 1"));
        }
        if !(noise_variance >= 0.0) {
            return Err(Error::invalid("noise_variance", "must be >= 0"));
        }
        Ok(Self {
            kind,
            n_taps,
            noise_variance,
        })
    }

    pub fn with_noise(self, noise_variance: f64) -> Self {
        Self { noise_variance, ..self }
    }

    fn expect(&self, kind: EqualizerKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::ConfigMismatch(format!("expected a {kind:?} spec, got {:?}", self.kind)));
        }
        Ok(())
    }
}

impl fmt::Display for EqualizerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            EqualizerKind::Zf => f.write_str("zf"),
            EqualizerKind::LinearMmse => write!(f, "mmse:{}", self.n_taps),
            EqualizerKind::Dfe => write!(f, "dfe:{}", self.n_taps),
            EqualizerKind::Mlse => f.write_str("mlse"),
        }
    }
}

/// Parses `zf`, `mmse:N`, `dfe:N` or `mlse`; noise variance starts at zero.
impl FromStr for EqualizerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, taps) = match s.split_once(':') {
            Some((n, t)) => (n, Some(t)),
            None => (s.as_str(), None),
        };
        let parse_taps = |t: Option<&str>| -> Result<usize> {
            t.ok_or_else(|| Error::invalid("eq", format!("`{name}` needs a tap count, e.g. `{name}:7`")))?
                .parse()
                .map_err(|_| Error::invalid("eq", format!("bad tap count in `{s}`")))
        };
        match name {
            "zf" if taps.is_none() => EqualizerSpec::new(EqualizerKind::Zf, 0, 0.0),
            "mlse" if taps.is_none() => EqualizerSpec::new(EqualizerKind::Mlse, 0, 0.0),
            "mmse" => EqualizerSpec::new(EqualizerKind::LinearMmse, parse_taps(taps)?, 0.0),
            "dfe" => EqualizerSpec::new(EqualizerKind::Dfe, parse_taps(taps)?, 0.0),
            _ => Err(Error::invalid("eq", format!("unknown equalizer `{s}`; use zf, mmse:N, dfe:N or mlse"))),
        }
    }
}

/// Full zero-forcing inverse `1/h` on the band, unity outside it.
pub fn zf_equalizer(channel: &ChannelResponse, band: (f64, f64)) -> Result<ChannelResponse> {
    zf_equalizer_with_floor(channel, band, ZF_FLOOR)
}

pub fn zf_equalizer_with_floor(channel: &ChannelResponse, band: (f64, f64), floor: f64) -> Result<ChannelResponse> {
    let grid = channel.grid();
    let idx = grid.band_indices(band.0, band.1);
    if idx.is_empty() {
        return Err(Error::EmptyBand {
            lo_ghz: band.0,
            hi_ghz: band.1,
            needed: 1,
        });
    }
    let mut h = vec![Complex64::new(1.0, 0.0); grid.len()];
    for i in idx {
        let v = channel.h()[i];
        if v.norm() < floor {
            return Err(Error::NonInvertible {
                freq_ghz: grid.freq_ghz(i),
                magnitude: v.norm(),
            });
        }
        h[i] = v.inv();
    }
    ChannelResponse::new(*grid, h, 0.0, format!("zf({})", channel.label()))
}

/// Convolution matrix of the estimate seen by an `l`-tap symbol-spaced
/// filter: entry `(i, c)` is the gain from `a[k - c - offset]` to `r[k - i]`.
pub(crate) fn convolution_matrix(est: &FirChannelEstimate, l: usize) -> DMatrix<Complex64> {
    let m = est.taps.len();
    let mut h = DMatrix::zeros(l, m + l - 1);
    for i in 0..l {
        for (j, g) in est.taps.iter().enumerate() {
            h[(i, i + j)] = *g;
        }
    }
    h
}

/// Solves `R·X = B` for Hermitian `R`, adding [`DIAGONAL_LOADING`] if the
/// Cholesky factorization fails. Returns the loading used.
pub(crate) fn hermitian_solve(mut r: DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, f64)> {
    if let Some(ch) = r.clone().cholesky() {
        return Ok((ch.solve(b), 0.0));
    }
    for i in 0..r.nrows() {
        r[(i, i)] += Complex64::new(DIAGONAL_LOADING, 0.0);
    }
    match r.cholesky() {
        Some(ch) => Ok((ch.solve(b), DIAGONAL_LOADING)),
        None => Err(Error::invalid(
            "equalizer",
            "tap correlation matrix is singular even after diagonal loading",
        )),
    }
}

/// Finite-length MMSE filter. `y[k] = Σ_i conj(taps[i])·r[k - i]` estimates
/// `a[k - decision_delay]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEqualizer {
    pub taps: Vec<Complex64>,
    pub decision_delay: i64,
    pub mse: f64,
    pub diagonal_loading: f64,
}

impl LinearEqualizer {
    /// Filters a circular block of soft symbols; element `k` of the output
    /// estimates transmitted symbol `k`.
    pub fn equalize(&self, soft: &[Complex64]) -> Vec<Complex64> {
        let n = soft.len() as i64;
        (0..n)
            .map(|k| {
                let t = k + self.decision_delay;
                self.taps
                    .iter()
                    .enumerate()
                    .map(|(i, w)| w.conj() * soft[(t - i as i64).rem_euclid(n) as usize])
                    .sum()
            })
            .collect()
    }

    /// Response from `a[k - d]` to the equalizer output aligned to `a[k]`,
    /// indexed by `d` from `first`: returns `(first, coefficients)`.
    pub fn combined_response(&self, est: &FirChannelEstimate) -> (i64, Vec<Complex64>) {
        let l = self.taps.len();
        let h = convolution_matrix(est, l);
        let coeffs: Vec<Complex64> = (0..h.ncols())
            .map(|c| (0..l).map(|i| self.taps[i].conj() * h[(i, c)]).sum())
            .collect();
        (est.delay_offset - self.decision_delay, coeffs)
    }

    pub fn noise_gain(&self) -> f64 {
        self.taps.iter().map(|w| w.norm_sqr()).sum()
    }
}

/// Wiener solution for `spec.n_taps` symbol-spaced taps, with the decision
/// delay that minimizes the MSE.
pub fn linear_mmse(est: &FirChannelEstimate, spec: &EqualizerSpec) -> Result<LinearEqualizer> {
    spec.expect(EqualizerKind::LinearMmse)?;
    mmse_design(est, spec.n_taps, spec.noise_variance)
}

pub(crate) fn mmse_design(est: &FirChannelEstimate, l: usize, noise_variance: f64) -> Result<LinearEqualizer> {
    if l == 0 {
        return Err(Error::invalid("n_taps", "must be >= 1"));
    }
    let h = convolution_matrix(est, l);
    let mut r = &h * h.adjoint();
    for i in 0..l {
        r[(i, i)] += Complex64::new(noise_variance, 0.0);
    }
    let (x, loading) = hermitian_solve(r, &h)?;
    let mut best: Option<(f64, usize)> = None;
    for c in 0..h.ncols() {
        let q: Complex64 = (0..l).map(|i| h[(i, c)].conj() * x[(i, c)]).sum();
        let mse = 1.0 - q.re;
        if best.is_none_or(|(b, _)| mse < b) {
            best = Some((mse, c));
        }
    }
    let (mse, c) = best.expect("at least one column");
    Ok(LinearEqualizer {
        taps: x.column(c).iter().copied().collect(),
        decision_delay: c as i64 + est.delay_offset,
        mse,
        diagonal_loading: loading,
    })
}
