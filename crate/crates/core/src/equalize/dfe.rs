use nalgebra::DMatrix;
use num_complex::Complex64;

use super::fir::FirChannelEstimate;
use super::linear::{convolution_matrix, hermitian_solve, EqualizerKind, EqualizerSpec};
use crate::error::Result;
use crate::phy::Scheme;

/// MMSE decision-feedback equalizer with symbol-spaced feed-forward taps and
/// hard-decision feedback.
#[derive(Debug, Clone, PartialEq)]
pub struct DfeEqualizer {
    pub feedforward: Vec<Complex64>,
    /// `feedback[t - 1]` multiplies the decision made `t` symbols earlier.
    pub feedback: Vec<Complex64>,
    pub decision_delay: i64,
    pub mse: f64,
    pub diagonal_loading: f64,
}

impl DfeEqualizer {
    /// Joint MMSE design for `n_ff` feed-forward and `n_fb` feedback taps,
    /// assuming correct past decisions. `n_fb = 0` is the linear MMSE design.
    pub fn design(est: &FirChannelEstimate, n_ff: usize, n_fb: usize, noise_variance: f64) -> Result<Self> {
        if n_ff == 0 {
            return Err(crate::error::Error::invalid("n_taps", "must be >= 1"));
        }
        let h = convolution_matrix(est, n_ff);
        let ncol = h.ncols();
        let mut full = &h * h.adjoint();
        for i in 0..n_ff {
            full[(i, i)] += Complex64::new(noise_variance, 0.0);
        }

        let mut best: Option<DfeEqualizer> = None;
        for c in 0..ncol {
            let mut r = full.clone();
            for t in 1..=n_fb {
                if c + t < ncol {
                    let col = h.column(c + t);
                    r -= col * col.adjoint();
                }
            }
            let hc = DMatrix::from_iterator(n_ff, 1, h.column(c).iter().copied());
            let (w, loading) = hermitian_solve(r, &hc)?;
            let q: Complex64 = (0..n_ff).map(|i| hc[(i, 0)].conj() * w[(i, 0)]).sum();
            let mse = 1.0 - q.re;
            if best.as_ref().is_some_and(|b| b.mse <= mse) {
                continue;
            }
            let feedback = (1..=n_fb)
                .map(|t| {
                    if c + t < ncol {
                        (0..n_ff).map(|i| w[(i, 0)].conj() * h[(i, c + t)]).sum()
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            best = Some(DfeEqualizer {
                feedforward: w.iter().copied().collect(),
                feedback,
                decision_delay: c as i64 + est.delay_offset,
                mse,
                diagonal_loading: loading,
            });
        }
        Ok(best.expect("convolution matrix has at least one column"))
    }

    /// Equalizes a circular block of soft symbols, returning the soft values
    /// fed to the slicer and the decided constellation indices.
    pub fn run(&self, soft: &[Complex64], scheme: Scheme) -> (Vec<Complex64>, Vec<usize>) {
        let n = soft.len() as i64;
        let mut slicer_in = Vec::with_capacity(soft.len());
        let mut decided: Vec<usize> = Vec::with_capacity(soft.len());
        let mut points: Vec<Complex64> = Vec::with_capacity(soft.len());
        for k in 0..n {
            let t0 = k + self.decision_delay;
            let mut y: Complex64 = self
                .feedforward
                .iter()
                .enumerate()
                .map(|(i, w)| w.conj() * soft[(t0 - i as i64).rem_euclid(n) as usize])
                .sum();
            for (t, b) in self.feedback.iter().enumerate() {
                let j = k as usize;
                if j > t {
                    y -= b * points[j - t - 1];
                }
            }
            let d = scheme.slice(y);
            slicer_in.push(y);
            decided.push(d);
            points.push(scheme.point(d));
        }
        (slicer_in, decided)
    }
}

/// Designs the DFE from `spec` (equal feed-forward and feedback counts) and
/// returns hard decisions for each symbol of the block.
pub fn dfe(est: &FirChannelEstimate, spec: &EqualizerSpec, soft: &[Complex64], scheme: Scheme) -> Result<Vec<usize>> {
    if spec.kind != EqualizerKind::Dfe {
        return Err(crate::error::Error::ConfigMismatch(format!(
            "expected a Dfe spec, got {:?}",
            spec.kind
        )));
    }
    let eq = DfeEqualizer::design(est, spec.n_taps, spec.n_taps, spec.noise_variance)?;
    Ok(eq.run(soft, scheme).1)
}
